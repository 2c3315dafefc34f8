#include "heatgraph/curvature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <unordered_map>

#include "heatgraph/error.hpp"
#include "heatgraph/parallel.hpp"

namespace heatgraph {

std::string_view to_string(CurvatureKind kind) noexcept {
  return kind == CurvatureKind::cde ? "cde" : "cde-prime";
}

CurvatureKind parse_curvature_kind(std::string_view name) {
  if (name == "cde" || name == "CDE") return CurvatureKind::cde;
  if (name == "cde-prime" || name == "cde_prime" || name == "cde'" || name == "CDE'") {
    return CurvatureKind::cde_prime;
  }
  throw Error(ErrorCode::UsageError, "unknown curvature condition '" + std::string(name) + "'");
}

std::string_view to_string(CurvatureVerdict verdict) noexcept {
  switch (verdict) {
    case CurvatureVerdict::no_violation_found: return "no-violation-found";
    case CurvatureVerdict::violated: return "violated";
    case CurvatureVerdict::vacuous: return "vacuous";
  }
  return "no-violation-found";
}

Vector TestFunction::expand(std::size_t n) const {
  Vector f = Vector::Ones(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < support.size(); ++i) f[static_cast<Eigen::Index>(support[i])] = values[i];
  return f;
}

namespace {

// The closed 2-ball of x in BFS order: x first, then distance 1, then 2.
struct LocalBall {
  std::vector<std::size_t> vertices;
  std::size_t inner = 0;  // number of vertices at distance <= 1
  std::vector<std::vector<std::pair<std::size_t, double>>> neighbors;  // for the inner vertices
  std::vector<double> mu;                                              // for the inner vertices
};

LocalBall local_ball(const WeightedGraph& graph, std::size_t x) {
  LocalBall ball;
  std::unordered_map<std::size_t, std::size_t> local;
  ball.vertices.push_back(x);
  local[x] = 0;
  for (const auto& nb : graph.neighbors(x)) {
    if (local.emplace(nb.index, ball.vertices.size()).second) ball.vertices.push_back(nb.index);
  }
  ball.inner = ball.vertices.size();
  for (std::size_t i = 1; i < ball.inner; ++i) {
    for (const auto& nb : graph.neighbors(ball.vertices[i])) {
      if (local.emplace(nb.index, ball.vertices.size()).second) ball.vertices.push_back(nb.index);
    }
  }
  ball.neighbors.resize(ball.inner);
  ball.mu.resize(ball.inner);
  for (std::size_t i = 0; i < ball.inner; ++i) {
    ball.mu[i] = graph.measure(ball.vertices[i]);
    for (const auto& nb : graph.neighbors(ball.vertices[i])) {
      ball.neighbors[i].emplace_back(local.at(nb.index), nb.weight);
    }
  }
  return ball;
}

CdeForm evaluate(const LocalBall& ball, const std::vector<double>& f) {
  const std::size_t m = ball.inner;
  std::vector<double> gam(m), lap(m);
  for (std::size_t i = 0; i < m; ++i) {
    double g = 0.0, l = 0.0;
    for (const auto& [j, w] : ball.neighbors[i]) {
      const double d = f[j] - f[i];
      g += w * d * d;
      l += w * d;
    }
    gam[i] = g / (2.0 * ball.mu[i]);
    lap[i] = l / ball.mu[i];
  }
  double lap_gamma = 0.0, gamma_f_lap = 0.0, gamma_f_h = 0.0, lap_log = 0.0;
  const double h0 = gam[0] / f[0];
  for (const auto& [j, w] : ball.neighbors[0]) {
    const double df = f[j] - f[0];
    lap_gamma += w * (gam[j] - gam[0]);
    gamma_f_lap += w * df * (lap[j] - lap[0]);
    gamma_f_h += w * df * (gam[j] / f[j] - h0);
    lap_log += w * (std::log(f[j]) - std::log(f[0]));
  }
  const double mu0 = ball.mu[0];
  CdeForm form;
  const double gamma2 = 0.5 * lap_gamma / mu0 - gamma_f_lap / (2.0 * mu0);
  form.lhs = gamma2 - gamma_f_h / (2.0 * mu0);
  form.delta_f = lap[0];
  form.gamma_f = gam[0];
  form.f_delta_log_f = f[0] * lap_log / mu0;
  return form;
}

constexpr double kFeasibilityMargin = 1e-8;
constexpr double kPenalty = 1e20;
constexpr double kViolationTolerance = 1e-9;

std::uint64_t vertex_seed(std::uint64_t seed, const VertexId& id) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : id) h = (h ^ c) * 1099511628211ull;
  return seed * 0x9E3779B97F4A7C15ull ^ h;
}

class Search {
 public:
  Search(const WeightedGraph& graph, const CurvatureQuery& query, const SearchBudget& budget)
      : graph_(graph), query_(query), budget_(budget), ball_(local_ball(graph, query.vertex)) {
    report_.query = query;
  }

  VertexCurvatureReport run() {
    const std::size_t dim = ball_.vertices.size() - 1;
    if (dim == 0) {
      // Isolated vertex: every form vanishes.
      report_.verdict = query_.kind == CurvatureKind::cde ? CurvatureVerdict::vacuous
                                                          : CurvatureVerdict::no_violation_found;
      report_.worst_margin = query_.kind == CurvatureKind::cde ? kInfinity : 0.0;
      return report_;
    }
    std::mt19937_64 rng(vertex_seed(budget_.seed, graph_.id(query_.vertex)));
    std::uniform_real_distribution<double> start(-2.0, 2.0);
    std::vector<double> z(dim);

    for (std::size_t s = 0; s < budget_.random_samples && !exhausted(); ++s) {
      for (auto& v : z) v = start(rng);
      record(z, /*keep=*/false);
      ++report_.samples;
    }
    for (std::size_t r = 0; r < budget_.restarts && !exhausted(); ++r) {
      for (auto& v : z) v = start(rng);
      ++report_.restarts;
      bool converged = minimize(z, Objective::margin);
      if (!exhausted()) converged = minimize(z, Objective::quotient) && converged;
      report_.converged_restarts += converged;
    }
    report_.budget_exhausted = exhausted();
    if (query_.kind == CurvatureKind::cde && !any_feasible_) {
      report_.verdict = CurvatureVerdict::vacuous;
    } else if (report_.worst_margin < -kViolationTolerance) {
      report_.verdict = CurvatureVerdict::violated;
    }
    std::sort(report_.witnesses.begin(), report_.witnesses.end(),
              [](const Witness& a, const Witness& b) { return a.margin < b.margin; });
    return report_;
  }

 private:
  enum class Objective { margin, quotient };

  bool exhausted() const {
    return budget_.max_evaluations > 0 && report_.evaluations >= budget_.max_evaluations;
  }

  std::vector<double> to_function(const double* z) const {
    std::vector<double> f(ball_.vertices.size());
    f[0] = 1.0;
    for (std::size_t i = 1; i < f.size(); ++i) f[i] = std::exp(budget_.box * std::tanh(z[i - 1]));
    return f;
  }

  Witness make_witness(const std::vector<double>& f, const CdeForm& form, double margin) const {
    Witness w;
    w.f.support = ball_.vertices;
    w.f.values = f;
    w.form = form;
    w.margin = margin;
    return w;
  }

  // Evaluates f(z), updates the running extremes and returns the objective.
  double record(const std::vector<double>& z, bool keep, Objective objective = Objective::margin) {
    ++report_.evaluations;
    const auto f = to_function(z.data());
    const CdeForm form = evaluate(ball_, f);
    const bool feasible = query_.kind == CurvatureKind::cde_prime || form.delta_f <= -kFeasibilityMargin;
    if (!feasible) return kPenalty * (1.0 + form.delta_f + kFeasibilityMargin);
    any_feasible_ = true;
    const double margin = curvature_margin(form, query_.kind, query_.n, query_.K);
    if (margin < report_.worst_margin) {
      report_.worst_margin = margin;
      report_.witness = make_witness(f, form, margin);
    }
    const double term = dimension_term(form, query_.kind);
    double quotient = 0.0;
    if (form.lhs > 1e-12) {
      quotient = term / form.lhs;
    } else if (term > 1e-9) {
      quotient = kInfinity;
    }
    if (quotient > report_.n_best) {
      report_.n_best = quotient;
      report_.n_best_witness = make_witness(f, form, margin);
    }
    if (keep && report_.witnesses.size() < budget_.keep_witnesses) {
      report_.witnesses.push_back(make_witness(f, form, margin));
    }
    if (objective == Objective::margin) return margin;
    return std::isinf(quotient) ? -kPenalty : -quotient;
  }

  struct Context {
    Search* self;
    Objective objective;
  };

  static double gsl_objective(const gsl_vector* v, void* params) {
    auto* ctx = static_cast<Context*>(params);
    std::vector<double> z(v->size);
    for (std::size_t i = 0; i < v->size; ++i) z[i] = gsl_vector_get(v, i);
    return ctx->self->record(z, false, ctx->objective);
  }

  bool minimize(std::vector<double>& z, Objective objective) {
    const std::size_t dim = z.size();
    Context ctx{this, objective};
    gsl_multimin_function fn{&Search::gsl_objective, dim, &ctx};
    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    for (std::size_t i = 0; i < dim; ++i) gsl_vector_set(x, i, z[i]);
    gsl_vector_set_all(step, 0.5);
    gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_multimin_fminimizer_set(m, &fn, x, step);
    bool converged = false;
    for (std::size_t it = 0; it < budget_.iterations_per_restart && !exhausted(); ++it) {
      if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-8) == GSL_SUCCESS) {
        converged = true;
        break;
      }
    }
    for (std::size_t i = 0; i < dim; ++i) z[i] = gsl_vector_get(m->x, i);
    gsl_multimin_fminimizer_free(m);
    gsl_vector_free(step);
    gsl_vector_free(x);
    if (objective == Objective::margin) record(z, true);
    return converged;
  }

  const WeightedGraph& graph_;
  CurvatureQuery query_;
  SearchBudget budget_;
  LocalBall ball_;
  VertexCurvatureReport report_;
  bool any_feasible_ = false;
};

}  // namespace

CdeForm cde_form(const WeightedGraph& graph, std::size_t x, const Vector& f) {
  if (x >= graph.size()) throw Error(ErrorCode::UnknownVertex, "vertex index out of range");
  if (static_cast<std::size_t>(f.size()) != graph.size()) {
    throw Error(ErrorCode::GraphMismatch, "function length differs from vertex count");
  }
  const LocalBall ball = local_ball(graph, x);
  std::vector<double> local(ball.vertices.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    local[i] = f[static_cast<Eigen::Index>(ball.vertices[i])];
    if (!(local[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveFunction, "f must be positive on the 2-ball of the vertex");
    }
  }
  return evaluate(ball, local);
}

double dimension_term(const CdeForm& form, CurvatureKind kind) {
  const double t = kind == CurvatureKind::cde ? form.delta_f : form.f_delta_log_f;
  return t * t;
}

double curvature_margin(const CdeForm& form, CurvatureKind kind, double n, double K) {
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "dimension n must be > 0");
  return form.lhs - dimension_term(form, kind) / n - K * form.gamma_f;
}

bool cde_applicable(const CdeForm& form) { return form.delta_f < 0.0; }

VertexCurvatureReport check_curvature(const WeightedGraph& graph, const CurvatureQuery& query,
                                      const SearchBudget& budget) {
  if (query.vertex >= graph.size()) throw Error(ErrorCode::UnknownVertex, "vertex index out of range");
  if (!(query.n > 0.0)) throw Error(ErrorCode::InvalidArgument, "dimension n must be > 0");
  Search search(graph, query, budget);
  auto report = search.run();
  const auto inner = interior_vertices(graph, 1);
  report.interior = std::binary_search(inner.begin(), inner.end(), query.vertex);
  return report;
}

CurvatureReport check_curvature_all(const WeightedGraph& graph, CurvatureKind kind, double n, double K,
                                    const SearchBudget& budget, std::vector<std::size_t> vertices,
                                    std::size_t threads) {
  if (vertices.empty()) {
    vertices.resize(graph.size());
    for (std::size_t i = 0; i < graph.size(); ++i) vertices[i] = i;
  }
  CurvatureReport report;
  report.kind = kind;
  report.n = n;
  report.K = K;
  report.vertices.resize(vertices.size());
  const auto inner = interior_vertices(graph, 1);
  parallel_for(vertices.size(), threads == 0 ? default_threads() : threads, [&](std::size_t i) {
    Search search(graph, {vertices[i], n, K, kind}, budget);
    report.vertices[i] = search.run();
    report.vertices[i].interior = std::binary_search(inner.begin(), inner.end(), vertices[i]);
  });
  for (const auto& v : report.vertices) {
    const bool violated = v.verdict == CurvatureVerdict::violated;
    if (v.interior) {
      report.interior_violations += violated;
      report.interior_n_best = std::max(report.interior_n_best, v.n_best);
    } else {
      report.boundary_violations += violated;
      report.boundary_n_best = std::max(report.boundary_n_best, v.n_best);
    }
  }
  return report;
}

CertificateCheck recheck_certificate(const WeightedGraph& graph, const CurvatureQuery& query,
                                     const Witness& witness) {
  CertificateCheck check;
  const CdeForm form = cde_form(graph, query.vertex, witness.f.expand(graph.size()));
  const double margin = curvature_margin(form, query.kind, query.n, query.K);
  check.reevaluation_error = std::abs(margin - witness.margin);
  if (query.kind == CurvatureKind::cde && cde_applicable(form) && margin < -kViolationTolerance) {
    const double prime = curvature_margin(form, CurvatureKind::cde_prime, query.n, query.K);
    check.consistent_with_implication = prime <= margin + 1e-9 * std::max(1.0, std::abs(margin));
  }
  return check;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> interior_vertices(const WeightedGraph& graph, int radius) {
  std::vector<int> dist(graph.size(), -1);
  std::deque<std::size_t> queue;
  for (std::size_t x = 0; x < graph.size(); ++x) {
    if (graph.exterior_weight(x) > 0.0) {
      dist[x] = 0;
      queue.push_back(x);
    }
  }
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop_front();
    for (const auto& nb : graph.neighbors(x)) {
      if (dist[nb.index] < 0) {
        dist[nb.index] = dist[x] + 1;
        queue.push_back(nb.index);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < graph.size(); ++x) {
    if (dist[x] < 0 || dist[x] > radius) out.push_back(x);
  }
  return out;
}

namespace {

std::vector<std::size_t> default_audit_vertices(const HeatKernel& kernel, const std::vector<std::size_t>& given) {
  return given.empty() ? interior_vertices(*kernel.graph, 0) : given;
}

bool positive_around(const WeightedGraph& graph, const Vector& u, std::size_t x) {
  if (!(u[static_cast<Eigen::Index>(x)] > 0.0)) return false;
  for (const auto& nb : graph.neighbors(x)) {
    if (!(u[static_cast<Eigen::Index>(nb.index)] > 0.0)) return false;
  }
  return true;
}

double li_yau_lhs(const WeightedGraph& graph, const Vector& u, std::size_t x) {
  const double ux = u[static_cast<Eigen::Index>(x)];
  if (!(ux > 0.0)) throw Error(ErrorCode::NonPositiveKernel, "kernel not positive at " + graph.id(x));
  const double sx = std::sqrt(ux);
  double grad = 0.0, lap = 0.0;
  for (const auto& nb : graph.neighbors(x)) {
    const double uy = u[static_cast<Eigen::Index>(nb.index)];
    if (!(uy > 0.0)) throw Error(ErrorCode::NonPositiveKernel, "kernel not positive at " + graph.id(nb.index));
    const double ds = std::sqrt(uy) - sx;
    grad += nb.weight * ds * ds;
    lap += nb.weight * (uy - ux);
  }
  const double mu = graph.measure(x);
  return grad / (2.0 * mu * ux) - lap / (2.0 * mu * ux);
}

}  // namespace

LiYauReport li_yau_audit(const HeatKernel& kernel, std::size_t source, double n,
                         const std::vector<LiYauPoint>& points, double tolerance) {
  LiYauReport report;
  report.source = source;
  report.n = n;
  std::vector<LiYauPoint> todo = points;
  if (todo.empty()) {
    for (std::size_t k = 0; k < kernel.times.size(); ++k) {
      if (kernel.times[k] <= 0.0) continue;
      for (std::size_t x : interior_vertices(*kernel.graph, 0)) todo.push_back({k, x});
    }
  }
  std::vector<std::optional<Vector>> columns(kernel.times.size());
  for (const auto& p : todo) {
    if (p.time_index >= kernel.times.size()) throw Error(ErrorCode::GridMismatch, "time index out of range");
    const double t = kernel.times[p.time_index];
    if (!(t > 0.0)) throw Error(ErrorCode::GridMismatch, "Li-Yau audit needs t > 0");
    auto& col = columns[p.time_index];
    if (!col) col = kernel.column(p.time_index, source);
    if (points.empty() && !positive_around(*kernel.graph, *col, p.vertex)) {
      ++report.skipped;
      continue;
    }
    const double lhs = li_yau_lhs(*kernel.graph, *col, p.vertex);
    const double bound = n / (2.0 * t);
    const double slack = lhs - bound;
    ++report.checked;
    report.minimal_n = std::max(report.minimal_n, 2.0 * t * lhs);
    if (slack > report.worst_slack) {
      report.worst_slack = slack;
      report.worst = p;
    }
    if (slack > tolerance * std::max(1.0, bound)) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

HarnackReport harnack_audit(const HeatKernel& kernel, std::size_t source, double n,
                            const std::vector<HarnackSample>& samples, double tolerance) {
  HarnackReport report;
  report.source = source;
  report.n = n;
  const auto scalars = graph_scalars(*kernel.graph);
  const double factor = 4.0 * scalars.mu_max / scalars.omega_min;
  std::unordered_map<std::size_t, std::vector<int>> distances;
  report.worst_ratio = 0.0;
  for (const auto& s : samples) {
    auto k1 = kernel.time_index(s.t1);
    auto k2 = kernel.time_index(s.t2);
    if (!k1 || !k2) throw Error(ErrorCode::GridMismatch, "Harnack times must lie on the grid");
    if (!(s.t1 > 0.0 && s.t1 < s.t2)) throw Error(ErrorCode::GridMismatch, "need 0 < T1 < T2");
    const double u1 = kernel.value(*k1, source, s.x);
    const double u2 = kernel.value(*k2, source, s.y);
    if (!(u1 > 0.0 && u2 > 0.0)) throw Error(ErrorCode::NonPositiveKernel, "kernel not positive");
    auto it = distances.find(s.x);
    if (it == distances.end()) it = distances.emplace(s.x, hop_distances(*kernel.graph, s.x)).first;
    const double d = it->second[s.y];
    const double log_rhs = std::log(u2) + n * std::log(s.t2 / s.t1) + factor * d * d / (s.t2 - s.t1);
    const double ratio = std::exp(std::log(u1) - log_rhs);
    ++report.checked;
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.worst = s;
    }
    if (ratio > 1.0 + tolerance) ++report.violations;
  }
  report.pass = report.violations == 0;
  return report;
}

std::vector<HarnackSample> sample_harnack(const HeatKernel& kernel, std::size_t count, std::uint64_t seed,
                                          const std::vector<std::size_t>& vertices) {
  const auto pool = default_audit_vertices(kernel, vertices);
  std::vector<double> positive;
  for (double t : kernel.times) {
    if (t > 0.0) positive.push_back(t);
  }
  std::sort(positive.begin(), positive.end());
  positive.erase(std::unique(positive.begin(), positive.end()), positive.end());
  if (positive.size() < 2 || pool.empty()) {
    throw Error(ErrorCode::GridMismatch, "Harnack sampling needs two positive times and a vertex");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_t(0, positive.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_v(0, pool.size() - 1);
  std::vector<HarnackSample> out;
  while (out.size() < count) {
    std::size_t a = pick_t(rng), b = pick_t(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    out.push_back({positive[a], positive[b], pool[pick_v(rng)], pool[pick_v(rng)]});
  }
  return out;
}

std::vector<LiYauPoint> sample_li_yau(const HeatKernel& kernel, std::size_t count, std::uint64_t seed,
                                      const std::vector<std::size_t>& vertices) {
  const auto pool = default_audit_vertices(kernel, vertices);
  std::vector<std::size_t> times;
  for (std::size_t k = 0; k < kernel.times.size(); ++k) {
    if (kernel.times[k] > 0.0) times.push_back(k);
  }
  if (times.empty() || pool.empty()) throw Error(ErrorCode::GridMismatch, "nothing to sample");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_t(0, times.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_v(0, pool.size() - 1);
  std::vector<LiYauPoint> out(count);
  for (auto& p : out) p = {times[pick_t(rng)], pool[pick_v(rng)]};
  return out;
}

}  // namespace heatgraph
