#include "umbilic/pointwise.hpp"

#include <cmath>
#include <vector>

#include "umbilic/errors.hpp"

namespace umbilic {

namespace {

struct Mapped {
  std::vector<cplx> values;
  bool real;
};

template <class Field>
Mapped map_samples(std::span<const Field> fields, PointwiseOp op, const PointwiseOptions& options) {
  if (fields.empty()) fail(ErrorKind::InvalidArgument, "pointwise_map needs at least one field");
  const Field& first = fields.front();
  const bool unary = op != PointwiseOp::Mul && op != PointwiseOp::Add;
  if (unary && fields.size() != 1) fail(ErrorKind::InvalidArgument, "pointwise_map: operation takes one field");

  Mapped out{std::vector<cplx>(first.values().begin(), first.values().end()), first.real_tag()};
  switch (op) {
    case PointwiseOp::Exp:
      for (auto& x : out.values) x = out.real ? cplx(std::exp(x.real())) : std::exp(x);
      break;
    case PointwiseOp::Log:
      for (auto& x : out.values) {
        if (std::abs(x) < options.floor) fail(ErrorKind::DomainError, "pointwise log below floor");
        if (out.real && x.real() <= 0.0) out.real = false;
      }
      for (auto& x : out.values) x = out.real ? cplx(std::log(x.real())) : std::log(x);
      break;
    case PointwiseOp::Reciprocal:
      for (auto& x : out.values) {
        if (std::abs(x) < options.floor) fail(ErrorKind::DomainError, "pointwise reciprocal below floor");
        x = 1.0 / x;
      }
      break;
    case PointwiseOp::Modulus:
      for (auto& x : out.values) x = std::abs(x);
      out.real = true;
      break;
    case PointwiseOp::Scale:
      for (auto& x : out.values) x *= options.factor;
      out.real = out.real && options.factor.imag() == 0.0;
      break;
    case PointwiseOp::Mul:
    case PointwiseOp::Add:
      for (std::size_t f = 1; f < fields.size(); ++f) {
        if (fields[f].values().size() != out.values.size())
          fail(ErrorKind::InvalidArgument, "pointwise_map: resolution mismatch");
        for (std::size_t k = 0; k < out.values.size(); ++k) {
          if (op == PointwiseOp::Mul)
            out.values[k] *= fields[f].values()[k];
          else
            out.values[k] += fields[f].values()[k];
        }
        out.real = out.real && fields[f].real_tag();
      }
      break;
  }
  if (out.real)
    for (auto& x : out.values) x.imag(0.0);
  return out;
}

}  // namespace

PeriodicField pointwise_map(std::span<const PeriodicField> fields, PointwiseOp op,
                            const PointwiseOptions& options) {
  for (const auto& f : fields)
    if (!(f.lattice() == fields.front().lattice()) || f.n() != fields.front().n())
      fail(ErrorKind::InvalidArgument, "pointwise_map: lattice or resolution mismatch");
  auto m = map_samples(fields, op, options);
  const auto& f0 = fields.front();
  return PeriodicField(f0.lattice(), f0.n(), std::move(m.values), m.real);
}

ChartGrid pointwise_map(std::span<const ChartGrid> fields, PointwiseOp op, const PointwiseOptions& options) {
  for (const auto& f : fields)
    if (!f.same_layout(fields.front())) fail(ErrorKind::InvalidArgument, "pointwise_map: chart mismatch");
  auto m = map_samples(fields, op, options);
  const auto& f0 = fields.front();
  return ChartGrid(f0.chart_id(), f0.radius(), f0.n(), std::move(m.values), m.real);
}

}  // namespace umbilic
