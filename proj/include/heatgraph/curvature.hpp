#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "heatgraph/heat_kernel.hpp"

namespace heatgraph {

enum class CurvatureKind { cde, cde_prime };

std::string_view to_string(CurvatureKind kind) noexcept;
CurvatureKind parse_curvature_kind(std::string_view name);

// Ingredients of the exponential curvature-dimension inequalities at one vertex.
struct CdeForm {
  double lhs = 0.0;            // Gamma_2(f)(x) - Gamma(f, Gamma(f)/f)(x)
  double delta_f = 0.0;        // (Delta f)(x)
  double gamma_f = 0.0;        // Gamma(f)(x)
  double f_delta_log_f = 0.0;  // f(x) (Delta log f)(x)
};

// f is a full vector over the graph; only the closed 2-ball of x is read and
// must be positive there (NonPositiveFunction otherwise).
CdeForm cde_form(const WeightedGraph& graph, std::size_t x, const Vector& f);

// The squared term: (Delta f)^2 for CDE, (f Delta log f)^2 for CDE'.
double dimension_term(const CdeForm& form, CurvatureKind kind);

// lhs - term / n - K Gamma(f). For CDE this is only meaningful when
// delta_f < 0; callers check `cde_applicable`.
double curvature_margin(const CdeForm& form, CurvatureKind kind, double n, double K);
bool cde_applicable(const CdeForm& form);

struct CurvatureQuery {
  std::size_t vertex = 0;
  double n = 2.0;
  double K = 0.0;
  CurvatureKind kind = CurvatureKind::cde_prime;
};

struct SearchBudget {
  std::size_t restarts = 64;
  std::size_t iterations_per_restart = 400;
  std::size_t random_samples = 4000;
  // Hard cap on objective evaluations per vertex; 0 means unlimited.
  std::size_t max_evaluations = 0;
  std::uint64_t seed = 1;
  // f = exp(box * tanh(z)) on the 2-ball, f(x) = 1.
  double box = 6.0;
  // Number of explored functions kept per vertex for later re-checks.
  std::size_t keep_witnesses = 32;
};

// A positive test function: `values` on `support`, 1 everywhere else.
struct TestFunction {
  std::vector<std::size_t> support;
  std::vector<double> values;

  Vector expand(std::size_t n) const;
};

struct Witness {
  TestFunction f;
  CdeForm form;
  double margin = 0.0;
};

enum class CurvatureVerdict { no_violation_found, violated, vacuous };

std::string_view to_string(CurvatureVerdict verdict) noexcept;

struct VertexCurvatureReport {
  CurvatureQuery query;
  bool interior = true;  // the 2-ball avoids the truncation boundary
  CurvatureVerdict verdict = CurvatureVerdict::no_violation_found;
  double worst_margin = kInfinity;
  std::optional<Witness> witness;  // attains worst_margin
  // sup over explored feasible f of term / lhs at K = 0. It is a lower
  // estimate of the smallest admissible n; +inf when some explored f has
  // lhs <= 0 and a nonzero term.
  double n_best = 0.0;
  std::optional<Witness> n_best_witness;
  std::vector<Witness> witnesses;
  std::size_t restarts = 0;
  std::size_t converged_restarts = 0;
  std::size_t samples = 0;
  std::size_t evaluations = 0;
  bool budget_exhausted = false;
};

// Falsification search for one vertex. Never proves the condition.
VertexCurvatureReport check_curvature(const WeightedGraph& graph, const CurvatureQuery& query,
                                      const SearchBudget& budget = {});

struct CurvatureReport {
  CurvatureKind kind = CurvatureKind::cde_prime;
  double n = 0.0;
  double K = 0.0;
  std::vector<VertexCurvatureReport> vertices;
  std::size_t interior_violations = 0;
  std::size_t boundary_violations = 0;
  double interior_n_best = 0.0;
  double boundary_n_best = 0.0;
};

// Every vertex in `vertices` (all when empty), data-parallel.
CurvatureReport check_curvature_all(const WeightedGraph& graph, CurvatureKind kind, double n, double K,
                                    const SearchBudget& budget = {},
                                    std::vector<std::size_t> vertices = {},
                                    std::size_t threads = 0);

// A certificate must re-evaluate to its margin and, for CDE, a violation must
// also violate CDE' at the same (n, K).
struct CertificateCheck {
  double reevaluation_error = 0.0;
  bool consistent_with_implication = true;
};

CertificateCheck recheck_certificate(const WeightedGraph& graph, const CurvatureQuery& query,
                                     const Witness& witness);

// ---------------------------------------------------------------------------
// Li-Yau and Harnack audits on u(t, .) = P(t, x0, .).

struct LiYauPoint {
  std::size_t time_index = 0;
  std::size_t vertex = 0;
};

struct LiYauReport {
  std::size_t source = 0;
  double n = 0.0;
  double worst_slack = -kInfinity;  // max of lhs - n / (2t)
  LiYauPoint worst{};
  double minimal_n = 0.0;  // max of 2 t lhs over the checked points
  std::size_t checked = 0;
  // Default sweep only: points where u underflowed to 0 nearby.
  std::size_t skipped = 0;
  std::size_t violations = 0;
  bool pass = true;
};

// Gamma(sqrt u)/u - Delta u / (2u) <= n / (2t). When `points` is empty every
// positive time and every vertex off the truncation boundary is checked,
// skipping points where the kernel has underflowed.
LiYauReport li_yau_audit(const HeatKernel& kernel, std::size_t source, double n,
                         const std::vector<LiYauPoint>& points = {}, double tolerance = 1e-9);

struct HarnackSample {
  double t1 = 0.0;
  double t2 = 0.0;
  std::size_t x = 0;
  std::size_t y = 0;
};

struct HarnackReport {
  std::size_t source = 0;
  double n = 0.0;
  double worst_ratio = 0.0;  // lhs / rhs
  HarnackSample worst{};
  std::size_t checked = 0;
  std::size_t violations = 0;
  bool pass = true;
};

// u(T1,x) <= u(T2,y) (T2/T1)^n exp(4 (mu_max/omega_min) d(x,y)^2 / (T2 - T1)).
HarnackReport harnack_audit(const HeatKernel& kernel, std::size_t source, double n,
                            const std::vector<HarnackSample>& samples, double tolerance = 1e-9);

// Uniform samples of grid times T1 < T2 and vertices off the truncation boundary.
std::vector<HarnackSample> sample_harnack(const HeatKernel& kernel, std::size_t count, std::uint64_t seed,
                                          const std::vector<std::size_t>& vertices = {});
std::vector<LiYauPoint> sample_li_yau(const HeatKernel& kernel, std::size_t count, std::uint64_t seed,
                                      const std::vector<std::size_t>& vertices = {});

// Vertices with no truncation-boundary vertex within `radius` hops.
std::vector<std::size_t> interior_vertices(const WeightedGraph& graph, int radius);

}  // namespace heatgraph
