#pragma once

#include <span>

#include "umbilic/chart_grid.hpp"
#include "umbilic/periodic_field.hpp"

namespace umbilic {

enum class PointwiseOp { Exp, Log, Mul, Add, Scale, Reciprocal, Modulus };

struct PointwiseOptions {
  /// Samples with modulus below this are a domain violation for Log/Reciprocal.
  double floor = 1e-300;
  /// Factor used by Scale.
  cplx factor = 1.0;
};

// Samplewise maps. Exp, Log, Reciprocal, Modulus and Scale take one field;
// Mul and Add fold over all inputs. Mul is the plain samplewise product (use
// operator* on PeriodicField for the dealiased product).
PeriodicField pointwise_map(std::span<const PeriodicField> fields, PointwiseOp op,
                            const PointwiseOptions& options = {});
ChartGrid pointwise_map(std::span<const ChartGrid> fields, PointwiseOp op,
                        const PointwiseOptions& options = {});

}  // namespace umbilic
