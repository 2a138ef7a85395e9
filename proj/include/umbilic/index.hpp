#pragma once

// Zero localization and half-integer indices for umbilic fields (r, or any
// f_{;zz}), chart transitions of quadratic differentials, and the
// Poincare-Hopf audit on the torus and the two-chart sphere.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "umbilic/chart_grid.hpp"
#include "umbilic/periodic_field.hpp"

namespace umbilic {

using FieldEval = std::function<cplx(cplx z)>;

struct SurfaceSpec {
  enum class Kind { torus, sphere };
  Kind kind;
  int genus;
  int euler;

  static SurfaceSpec torus() { return {Kind::torus, 1, 0}; }
  static SurfaceSpec sphere() { return {Kind::sphere, 0, 2}; }
};

struct UmbilicRecord {
  cplx z0;
  /// 2 * index; 0 only for degenerate (non-isolated) zero sets.
  int twice_index = 0;
  double residual = 0.0;
  std::string chart_id;
  double contour_radius = 0.0;
  /// Winding of the flagged cell cluster, independent of the contour.
  int cell_winding = 0;
  bool degenerate = false;
  /// Set by the sphere pipeline when the index was recomputed in the other chart.
  bool chart_checked = false;
  bool chart_stable = true;
};

/// alpha = -r: a positive multiple of the quadratic differential lambda^2.
struct QuadraticDifferentialRep {
  ChartGrid alpha;
  std::string chart_id;
};

QuadraticDifferentialRep quadratic_differential_rep(const ChartGrid& r);

/// (1/2pi) * sum of wrapped phase increments around the closed loop.
/// Throws ZeroOnContour for a value with modulus <= zero_floor and
/// PhaseStepTooLarge for a wrapped step of magnitude >= pi/2.
int winding_degree(std::span<const cplx> loop, double zero_floor = 0.0);

struct LocateOptions {
  /// Zero floor relative to the field's sup-norm.
  double zero_floor = 1e-9;
  /// Bisection depth for refining one grid edge.
  int max_edge_depth = 12;
  /// Fraction of samples below the floor that signals a totally umbilical input.
  double degenerate_fraction = 0.25;
};

struct ZeroCell {
  int i;
  int j;
  int winding;
  bool degenerate;
};

struct ZeroCluster {
  std::vector<ZeroCell> cells;
  int winding = 0;
  bool degenerate = false;
  /// Mean of the cell centres (unwrapped on the torus).
  cplx center;
};

struct ZeroCellReport {
  std::vector<ZeroCluster> clusters;
  double field_scale = 0.0;
  double zero_floor = 0.0;
  /// Grid spacing in the z-plane (largest cell side on the torus).
  double cell_size = 0.0;
};

/// Cell windings of a periodic field, refined along edges with the spectral
/// interpolant. Windings of all cells sum to zero exactly.
ZeroCellReport locate_zero_cells(const PeriodicField& field, const LocateOptions& options = {});
/// Same on a chart; `exact` (if given) replaces bicubic interpolation during
/// edge refinement. Only cells with all corners inside the disk mask are used.
ZeroCellReport locate_zero_cells(const ChartGrid& field, const LocateOptions& options = {},
                                 const FieldEval& exact = {});

struct IndexOptions {
  int initial_points = 64;
  int max_points = 1 << 14;
  /// Absolute modulus below which a contour sample counts as a zero.
  double zero_floor = 0.0;
};

/// twice_index = -deg(field/|field|) on the circle |z - z0| = radius.
int umbilic_index(const FieldEval& field, cplx z0, double radius, const IndexOptions& options = {});
int umbilic_index(const ChartGrid& field, cplx z0, double radius, const IndexOptions& options = {});
int umbilic_index(const PeriodicField& field, cplx z0, double radius, const IndexOptions& options = {});

struct RecordOptions {
  LocateOptions locate;
};

/// Refines cluster locations (Levenberg-Marquardt on Re f, Im f) and measures
/// indices on circles isolated from the other clusters.
std::vector<UmbilicRecord> records_from_clusters(const ZeroCellReport& cells, const FieldEval& field,
                                                 const std::string& chart_id,
                                                 const std::function<cplx(const ZeroCell&)>& cell_center,
                                                 const std::function<double(cplx, cplx)>& distance);

struct AuditReport {
  long sum_twice_index = 0;
  long expected = 0;
  long discrepancy = 0;
  bool pass = false;
  int degenerate_records = 0;
  std::vector<UmbilicRecord> records;
};

/// Checks sum of twice_index against 2 chi exactly. Degenerate records make
/// the audit fail (the formula needs isolated zeros).
AuditReport poincare_hopf_audit(std::span<const UmbilicRecord> records, const SurfaceSpec& surface);

/// Holomorphic chart change w -> z(w).
struct ChartTransition {
  std::function<cplx(cplx)> map;
  std::function<cplx(cplx)> derivative;

  static ChartTransition identity();
  static ChartTransition inversion();  // z = 1/w
};

/// alpha~(w) = alpha(z(w)) (dz/dw)^2 on the target chart grid. Samples where
/// the result is not finite (poles of the transition) are stored as NaN.
/// Throws TransitionSingular if dz/dw vanishes at a target sample.
ChartGrid chart_transition_quadratic(const FieldEval& alpha, const ChartTransition& transition,
                                     std::string target_chart, double radius, int n);
/// Sampled alpha: values off the source grid come from bicubic interpolation,
/// and points outside the source square become NaN.
ChartGrid chart_transition_quadratic(const ChartGrid& alpha, const ChartTransition& transition,
                                     std::string target_chart, double radius, int n);

struct TorusUmbilicResult {
  PeriodicField r;
  ZeroCellReport cells;
  std::vector<UmbilicRecord> records;
  AuditReport audit;
};

/// Zeros of r = Pu for a periodic potential. Throws TotallyDegenerate when u
/// passes the locally-spherical test.
TorusUmbilicResult torus_umbilics(const PeriodicField& u, const RecordOptions& options = {},
                                  double spherical_tolerance = 1e-9);

struct SpherePerturbation {
  /// One of "re", "im", "height", "re2".
  std::string harmonic;
  double epsilon;
};

/// Conformal factor e^u = d (1+|z|^2)^{-2} (1 + sum eps_k p_k) on the sphere.
struct SphereMetricSpec {
  double degree = 1.0;
  std::vector<SpherePerturbation> perturbations;
};

/// Chart potential jets; chart "z" is the affine coordinate, chart "w" = 1/z.
JetFunction sphere_potential_jet(const SphereMetricSpec& spec, bool second_chart);

struct SphereOptions {
  double chart_radius = 1.25;
  int grid_n = 128;
  /// Chart z owns |z| <= 1 + ownership_slack; chart w owns |w| < 1/(1 + ownership_slack).
  double ownership_slack = 1e-6;
  double spherical_tolerance = 1e-9;
  RecordOptions records;
};

struct SphereUmbilicResult {
  std::vector<UmbilicRecord> records;
  AuditReport audit;
  ChartGrid r_chart_z;
  ChartGrid r_chart_w;
};

SphereUmbilicResult sphere_two_chart_umbilics(const SphereMetricSpec& spec, const SphereOptions& options = {});

}  // namespace umbilic
