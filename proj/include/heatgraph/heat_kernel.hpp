#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heatgraph/operators.hpp"

namespace heatgraph {

enum class KernelMethod { automatic, eigen, taylor, krylov };

std::string_view to_string(KernelMethod method) noexcept;
KernelMethod parse_kernel_method(std::string_view name);

// Eigendecomposition of M^{1/2} Delta M^{-1/2} = Q diag(lambda) Q^T, so that
// P(t,x,y) = [Q e^{t lambda} Q^T](x,y) / sqrt(mu(x) mu(y)).
class SpectralDecomposition {
 public:
  SpectralDecomposition(const WeightedGraph& graph, Boundary boundary);
  SpectralDecomposition(Vector eigenvalues, Matrix eigenvectors, Vector sqrt_measure);

  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigenvectors() const noexcept { return eigenvectors_; }
  const Vector& sqrt_measure() const noexcept { return sqrt_measure_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }

  Matrix kernel(double t) const;
  // d/dt P(t, x, y), exact from the spectral formula.
  Matrix kernel_time_derivative(double t) const;

  // c = Q^T M^{1/2} f and its inverse; e^{t Delta} acts diagonally on c.
  Vector to_spectral(const Vector& f) const;
  Vector from_spectral(const Vector& c) const;
  Vector evolve(const Vector& f, double t) const;

  // Smallest nonzero |lambda| for natural boundary, |lambda_max| for Dirichlet.
  double spectral_gap() const;

 private:
  Vector eigenvalues_;
  Matrix eigenvectors_;
  Vector sqrt_measure_;
};

struct KernelOptions {
  Boundary boundary = Boundary::natural;
  // `automatic` picks eigen up to this many vertices, krylov above.
  std::size_t dense_limit = 2000;
  // Columns to compute, as vertex indices; empty means every vertex.
  std::vector<std::size_t> sources;
  // Target accuracy of the exponential-action backends.
  double action_tolerance = 1e-13;
  // Taylor backend without scaling-and-squaring is only allowed for t*D_mu <= 10.
  bool scaling_and_squaring = true;
};

struct KernelProvenance {
  std::string generator;
  std::optional<int> radius;
  std::optional<int> previous_radius;
};

// P(t, x, y) on a time grid. slices[k] has one column per source:
// slices[k](y, j) = P(times[k], sources[j], y).
struct HeatKernel {
  GraphPtr graph;
  std::vector<double> times;
  KernelMethod method = KernelMethod::eigen;
  Boundary boundary = Boundary::natural;
  std::vector<std::size_t> sources;
  std::vector<Matrix> slices;
  Matrix mass_defect;  // (time, source): 1 - sum_y P(t, x, y) mu(y)
  std::shared_ptr<const SpectralDecomposition> spectral;
  KernelProvenance provenance;

  bool dense() const noexcept { return graph && sources.size() == graph->size(); }
  std::optional<std::size_t> time_index(double t) const;
  std::optional<std::size_t> source_column(std::size_t x) const;
  // Needs x or y among the sources.
  double value(std::size_t k, std::size_t x, std::size_t y) const;
  // P(times[k], x, .); needs x among the sources.
  Vector column(std::size_t k, std::size_t x) const;
  // sum_y P(t_k, ., y) g(y) mu(y); g must be supported on the sources.
  Vector apply(std::size_t k, const Vector& g) const;
};

HeatKernel compute_kernel(GraphPtr graph, std::vector<double> times,
                          KernelMethod method = KernelMethod::automatic,
                          const KernelOptions& options = {});

// e^{t Delta} f by the positivity-preserving (uniformized) Taylor series.
Vector taylor_action(const WeightedGraph& graph, Boundary boundary, const Vector& f, double t,
                     double tolerance = 1e-13);
// e^{t Delta} f by Lanczos on the symmetrized Laplacian with adaptive sub-steps.
Vector krylov_action(const WeightedGraph& graph, Boundary boundary, const Vector& f, double t,
                     double tolerance = 1e-13);
// Dense e^{t Delta} by uniformized Taylor with scaling-and-squaring.
Matrix taylor_exponential(const WeightedGraph& graph, Boundary boundary, double t);

std::vector<double> dyadic_grid(double t0, double t1);

// ---------------------------------------------------------------------------
// Audits. Every audit reports the measured error next to its tolerance.

struct AuditItem {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct KernelAuditOptions {
  double symmetry_tolerance = 1e-10;
  double mass_tolerance = 1e-10;
  double substochastic_slack = 1e-12;
  std::optional<double> semigroup_tolerance;  // default by method: 1e-8 eigen/taylor, 1e-6 krylov
  double residual_tolerance = 1e-9;
  // Relative round-off floor for positivity on backends with cancellation.
  double positivity_floor = 1e-13;
  // When set, replaces every tolerance above (used to force failures).
  std::optional<double> override_tolerance;
};

struct KernelAuditReport {
  std::vector<AuditItem> items;
  bool pass() const;
};

KernelAuditReport audit_kernel(const HeatKernel& kernel, const KernelAuditOptions& options = {});

struct SemigroupReport {
  double max_relative_error = 0.0;
  std::size_t pairs_checked = 0;
  double tolerance = 0.0;
  bool pass = false;
};

// Chapman-Kolmogorov: sum_z P(t,x,z) P(s,z,y) mu(z) = P(t+s,x,y). Needs a dense
// kernel; every pair (t, s) must have t + s on the grid (GridMismatch).
// The error is max |lhs - rhs| / max |P(t+s)| over all x, y.
SemigroupReport semigroup_audit(const HeatKernel& kernel,
                                const std::vector<std::pair<double, double>>& pairs,
                                std::optional<double> tolerance = std::nullopt);

// All pairs (t, s) with t + s on the grid.
std::vector<std::pair<double, double>> semigroup_pairs(const std::vector<double>& times);

struct SeriesReport {
  std::vector<double> errors;  // sup-norm error of the K-term partial sum, K = 0, 1, ...
  std::optional<std::size_t> terms_needed;  // first K with error <= 1e-10
  double tail_bound = 0.0;  // (2 D_mu t)^{K+1} / (K+1)! ||u||_inf at terms_needed
  bool scaled = false;
  std::size_t squarings = 0;
  double final_error = 0.0;
};

// Partial Taylor sums of e^{t Delta} u against the eigendecomposition. With
// scaling enabled the series is applied to t / 2^s repeatedly.
SeriesReport series_vs_eigen_audit(const WeightedGraph& graph, const Vector& u, double t,
                                   std::size_t max_terms, bool scaling = false);

struct ResidualReport {
  double max_residual = 0.0;
  bool exact_derivative = false;  // spectral d/dt; otherwise second-order differences
};

// max |d/dt P - Delta_x P| at times[k].
ResidualReport heat_equation_residual(const HeatKernel& kernel, std::size_t k);

// ---------------------------------------------------------------------------
// Dirichlet exhaustion over lattice balls.

struct LatticeFamily {
  int dimension = 1;
  LaplacianKind kind = LaplacianKind::combinatorial;
};

struct ExhaustionOptions {
  int initial_radius = 4;
  std::size_t max_vertices = 4'000'000;
  KernelMethod method = KernelMethod::taylor;
  std::vector<VertexId> extra_sources;
  double action_tolerance = 1e-15;
};

struct ExhaustionResult {
  HeatKernel kernel;  // at `radius`
  int radius = 0;
  int previous_radius = 0;
  double difference = 0.0;  // sup |P_prev - P| over sources and times
  // max (P_prev - P), positive values are monotonicity violations.
  double monotonicity_violation = 0.0;
  std::vector<double> previous_max_defect;  // per time, at previous_radius
};

ExhaustionResult exhaustion_kernel(const LatticeFamily& family, const VertexId& center,
                                   const std::vector<double>& times, double tolerance,
                                   const ExhaustionOptions& options = {});

}  // namespace heatgraph
