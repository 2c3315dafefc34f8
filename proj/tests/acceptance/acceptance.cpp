// One line per acceptance criterion; exit status 0 only when all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "heatgraph/curvature.hpp"
#include "heatgraph/error.hpp"
#include "heatgraph/estimates.hpp"
#include "heatgraph/exponents.hpp"
#include "heatgraph/parabolic.hpp"

using namespace heatgraph;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome heat_kernel_invariants() {
  Outcome o;
  std::vector<std::pair<std::string, GraphPtr>> graphs{{"K2", share(path_graph(2))}, {"P5", share(path_graph(5))}};
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    graphs.push_back({"tree" + std::to_string(seed), share(random_tree(8 + 7 * seed - 1, seed))});
  }
  graphs.push_back({"Z1 R=64", share(lattice_ball(1, 64, LaplacianKind::combinatorial))});
  graphs.push_back({"Z2 R=31", share(lattice_ball(2, 31, LaplacianKind::combinatorial))});
  graphs.push_back({"Z3 R=8 normalized", share(lattice_ball(3, 8, LaplacianKind::normalized))});

  double worst_sym = 0, worst_mass = 0, worst_ck = 0, worst_res = 0;
  for (const auto& [name, g] : graphs) {
    if (g->size() > 2000) throw Error(ErrorCode::InvalidArgument, name + " is too large");
    auto k = compute_kernel(g, {0.25, 0.5, 1.0, 2.0, 4.0}, KernelMethod::eigen);
    for (const auto& item : audit_kernel(k).items) {
      o.require(item.pass, name + " " + item.name + " " + fmt(item.measured));
      if (item.name == "symmetry") worst_sym = std::max(worst_sym, item.measured);
      if (item.name == "mass_conservation") worst_mass = std::max(worst_mass, item.measured);
      if (item.name == "semigroup") worst_ck = std::max(worst_ck, item.measured);
      if (item.name == "heat_equation") worst_res = std::max(worst_res, item.measured);
    }
  }
  o.require(worst_sym <= 1e-10, "symmetry");
  o.require(worst_mass <= 1e-10, "mass");
  o.require(worst_ck <= 1e-8, "Chapman-Kolmogorov");
  o.require(worst_res <= 1e-9, "heat residual");
  o.note(std::to_string(graphs.size()) + " graphs; symmetry " + fmt(worst_sym) + ", mass " + fmt(worst_mass) +
         ", C-K " + fmt(worst_ck) + ", residual " + fmt(worst_res));
  return o;
}

Outcome series_equivalence() {
  Outcome o;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<WeightedGraph> graphs{path_graph(2),
                                    path_graph(50),
                                    random_tree(30, 2),
                                    random_connected_graph(40, 30, 3),
                                    lattice_ball(2, 4, LaplacianKind::combinatorial),
                                    lattice_ball(3, 2, LaplacianKind::normalized)};
  double worst = 0.0;
  for (const auto& g : graphs) {
    Vector u(static_cast<Eigen::Index>(g.size()));
    for (auto& x : u) x = unit(rng) - 0.3;
    for (double t : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      worst = std::max(worst, series_vs_eigen_audit(g, u, t, 200, true).final_error);
    }
  }
  o.require(worst <= 1e-10, "agreement");
  o.note("max relative difference " + fmt(worst) + " over " + std::to_string(graphs.size()) + " graphs, t <= 4");
  return o;
}

std::vector<double> sqrt2_grid(double a, double b) {
  std::vector<double> t;
  for (double s = a; s <= b * (1 + 1e-12); s *= std::sqrt(2.0)) t.push_back(s);
  t.back() = b;
  return t;
}

Outcome decay_reproduction() {
  Outcome o;
  for (int dim : {1, 2}) {
    auto ex = exhaustion_kernel({dim, LaplacianKind::combinatorial}, lattice_origin_id(dim), sqrt2_grid(1.0, 64.0),
                                1e-10);
    const auto x0 = ex.kernel.graph->index(lattice_origin_id(dim));
    for (double r : {kInfinity, 2.0}) {
      auto fit = kernel_decay_fit(ex.kernel, x0, r, dim);
      o.require(fit.pass, "Z" + std::to_string(dim));
      o.note("Z" + std::to_string(dim) + " r=" + (std::isinf(r) ? "inf" : "2") + " slope " + fmt(fit.fitted_slope) +
             " vs " + fmt(fit.theoretical_slope) + " +-" + fmt(fit.tolerance));
    }
  }
  return o;
}

Outcome smoothing() {
  Outcome o;
  ExhaustionOptions opts;
  opts.initial_radius = 8;
  const int support = 5;
  for (int x = -support; x <= support; ++x) {
    if (x != 0) opts.extra_sources.push_back(std::to_string(x));
  }
  auto ex = exhaustion_kernel({1, LaplacianKind::combinatorial}, "0", sqrt2_grid(1.0, 64.0), 1e-10, opts);
  const auto& g = *ex.kernel.graph;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector f = Vector::Zero(static_cast<Eigen::Index>(g.size()));
  for (int x = -support; x <= support; ++x) f[static_cast<Eigen::Index>(g.index(std::to_string(x)))] = unit(rng);

  auto s = smoothing_audit(ex.kernel, f, YoungTriple::from_ab(2.0, kInfinity), 1.0);
  o.require(s.pass, "(2,2,inf) slope");
  o.note("(2,2,inf) random g on [-5,5]: slope " + fmt(s.fitted_slope) + " vs " + fmt(s.theoretical_slope) + " +-" +
         fmt(s.tolerance));
  auto c = smoothing_audit(ex.kernel, f, YoungTriple::from_ab(1.0, 1.0), 1.0);
  o.require(c.contraction_mode && c.max_ratio <= 1.0 + 1e-12, "b=1 contraction");
  o.note("b=1 max ratio " + fmt(c.max_ratio));
  return o;
}

Outcome inequality_audits() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(2, 40);
  const std::size_t draws = 1000;
  std::size_t contraction = 0, holder = 0, embedding = 0;

  std::vector<HeatKernel> kernels;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = share(random_connected_graph(size(rng), seed % 4, seed));
    kernels.push_back(compute_kernel(g, {0.1, 0.5, 1.0, 3.0, 10.0}, KernelMethod::eigen));
  }
  for (std::size_t i = 0; i < draws; ++i) {
    const auto& k = kernels[i % kernels.size()];
    const auto n = static_cast<Eigen::Index>(k.graph->size());
    Vector I(n), a(n), b(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      I[j] = 4.0 * unit(rng) - 2.0;
      a[j] = 2.0 * unit(rng) - 1.0;
      b[j] = 2.0 * unit(rng) - 1.0;
    }
    const double kexp = i % 5 == 0 ? kInfinity : 1.0 + 6.0 * unit(rng);
    if (!contraction_audit(k, I, kexp).satisfied) ++contraction;

    const double p = 1.0 + 9.0 * unit(rng);
    const double conj = i % 7 == 0 ? kInfinity : p / (p - 1.0);
    const double pa = i % 7 == 0 ? 1.0 : p;
    VertexFunction fa(k.graph, a), fb(k.graph, b);
    if (!holder_audit(fa, fb, pa, conj).satisfied) ++holder;

    const double p0 = 1.0 + 5.0 * unit(rng);
    const double p1 = i % 3 == 0 ? kInfinity : p0 + 5.0 * unit(rng);
    if (!embedding_audit(fa, p0, p1).satisfied) ++embedding;
  }
  o.require(contraction == 0, "contraction");
  o.require(holder == 0, "Hoelder");
  o.require(embedding == 0, "embedding");
  o.note(std::to_string(draws) + " draws each; violations " + std::to_string(contraction) + "/" +
         std::to_string(holder) + "/" + std::to_string(embedding));
  return o;
}

Outcome curvature_consistency() {
  Outcome o;
  SearchBudget budget;
  budget.restarts = 16;
  budget.iterations_per_restart = 300;
  budget.random_samples = 1000;
  std::vector<WeightedGraph> graphs{lattice_ball(1, 6, LaplacianKind::combinatorial),
                                    lattice_ball(2, 3, LaplacianKind::normalized), random_tree(12, 4),
                                    random_connected_graph(12, 6, 8)};
  double reeval = 0.0, homog = 0.0;
  std::size_t certificates = 0, wrong_direction = 0;
  for (const auto& g : graphs) {
    for (auto kind : {CurvatureKind::cde, CurvatureKind::cde_prime}) {
      for (auto [n, K] : {std::pair{0.5, 0.0}, {2.0, 0.0}, {4.0, -0.5}, {8.0, 0.25}}) {
        auto rep = check_curvature_all(g, kind, n, K, budget);
        for (const auto& v : rep.vertices) {
          std::vector<Witness> all = v.witnesses;
          if (v.witness) all.push_back(*v.witness);
          if (v.n_best_witness) all.push_back(*v.n_best_witness);
          for (const auto& w : all) {
            ++certificates;
            auto c = recheck_certificate(g, v.query, w);
            reeval = std::max(reeval, c.reevaluation_error);
            if (!c.consistent_with_implication) ++wrong_direction;
            const Vector f = w.f.expand(g.size());
            const double m1 = curvature_margin(cde_form(g, v.query.vertex, f), kind, n, K);
            for (double c2 : {0.5, 3.0}) {
              const double mc = curvature_margin(cde_form(g, v.query.vertex, c2 * f), kind, n, K);
              homog = std::max(homog, std::abs(mc - c2 * c2 * m1) / std::max(1.0, std::abs(c2 * c2 * m1)));
            }
          }
        }
      }
    }
  }
  o.require(certificates > 0, "no certificates produced");
  o.require(reeval <= 1e-9, "re-evaluation");
  o.require(homog <= 1e-9, "homogeneity");
  o.require(wrong_direction == 0, "implication direction");
  o.note(std::to_string(certificates) + " certificates; re-evaluation " + fmt(reeval) + ", homogeneity " +
         fmt(homog) + ", wrong direction " + std::to_string(wrong_direction));
  return o;
}

Outcome li_yau_harnack() {
  Outcome o;
  for (auto [dim, radius] : {std::pair{1, 64}, {2, 30}}) {
    auto g = share(lattice_ball(dim, radius, LaplacianKind::combinatorial));
    const auto x0 = g->index(lattice_origin_id(dim));
    const double n = check_curvature(*g, {x0, 2.0, 0.0, CurvatureKind::cde_prime}).n_best;
    o.require(std::isfinite(n) && n > 0.0, "n_best");
    KernelOptions opts;
    opts.boundary = Boundary::dirichlet;
    opts.sources = {x0};
    auto k = compute_kernel(g, dyadic_grid(0.25, 16.0), KernelMethod::taylor, opts);
    const auto inner = interior_vertices(*g, 2);
    auto ly = li_yau_audit(k, x0, n, sample_li_yau(k, 500, 3, inner));
    auto h = harnack_audit(k, x0, n, sample_harnack(k, 500, 3, inner));
    o.require(ly.checked == 500 && ly.violations == 0, "Li-Yau on Z" + std::to_string(dim));
    o.require(h.checked == 500 && h.violations == 0, "Harnack on Z" + std::to_string(dim));
    o.note("Z" + std::to_string(dim) + " n_best " + fmt(n) + ": Li-Yau " + std::to_string(ly.violations) +
           "/500, Harnack " + std::to_string(h.violations) + "/500");
  }
  return o;
}

Outcome exponent_ledger() {
  Outcome o;
  std::size_t failures = 0, checks = 0;
  double worst = 0.0;
  for (const auto& d : random_feasible_draws(1000, 99)) {
    EpsilonPolicy policy;
    policy.delta_fraction = d.delta_fraction;
    auto r = verify_ledger(exponent_profile(d.p, d.q, d.growth_degree, policy), 1e-12);
    failures += r.failures();
    checks += r.checks.size();
    for (const auto& c : r.checks) {
      if (c.identity) worst = std::max(worst, c.error);
    }
  }
  o.require(failures == 0, std::to_string(failures) + " ledger checks");
  o.note("1000 draws, " + std::to_string(checks) + " checks, worst identity error " + fmt(worst));
  return o;
}

SystemSpec single_vertex(double a) {
  SystemSpec s;
  s.graph = share(WeightedGraph::build({"o"}, {}, {{"o", 1.0}}));
  s.u0 = Vector::Constant(1, a);
  s.v0 = Vector::Constant(1, a);
  return s;
}

SolverOptions on_grid(Solver solver, double horizon, double h) {
  SolverOptions o;
  o.solver = solver;
  o.horizon = horizon;
  for (double t = h; t <= horizon * (1 + 1e-12); t += h) o.output_times.push_back(t);
  return o;
}

Outcome local_existence() {
  Outcome o;
  {
    SolverOptions opts;
    opts.horizon = 2.0;
    opts.solver = Solver::picard;
    auto b = blowup_detect(solve(single_vertex(1.0), opts));
    o.require(std::abs(b.t_star - 1.0) <= 0.05, "T*");
    o.require(std::abs(b.alpha - 1.0) <= 0.15, "alpha");
    o.note("single vertex T* " + fmt(b.t_star) + ", alpha " + fmt(b.alpha));
  }
  SystemSpec lattice;
  lattice.graph = share(lattice_ball(1, 10, LaplacianKind::combinatorial));
  lattice.boundary = Boundary::dirichlet;
  {
    auto z = lattice;
    z.u0 = Vector::Zero(static_cast<Eigen::Index>(z.graph->size()));
    z.v0 = z.u0;
    double worst = 0.0;
    for (auto solver : {Solver::picard, Solver::rk4, Solver::euler}) {
      auto tr = solve(z, on_grid(solver, 2.0, 0.25));
      for (std::size_t k = 0; k < tr.times.size(); ++k) {
        worst = std::max({worst, tr.u[k].cwiseAbs().maxCoeff(), tr.v[k].cwiseAbs().maxCoeff()});
      }
    }
    o.require(worst == 0.0, "zero fixed point");
  }
  double agree = 0.0, duhamel = 0.0;
  {
    auto pic = solve(single_vertex(1.0), on_grid(Solver::picard, 0.8, 0.05));
    auto rk = solve(single_vertex(1.0), on_grid(Solver::rk4, 0.8, 0.05));
    agree = std::max(agree, trajectory_difference(pic, rk));
    duhamel = std::max(duhamel, duhamel_residual(single_vertex(1.0), pic).max_residual);
  }
  for (double a : {0.1, 1.0, 3.0}) {
    auto s = lattice;
    const auto x0 = s.graph->index("0");
    s.u0 = delta_data(*s.graph, x0, a);
    s.v0 = delta_data(*s.graph, x0 + 1, a);
    const double horizon = a > 2.0 ? 0.15 : 1.0;
    auto pic = solve(s, on_grid(Solver::picard, horizon, horizon / 16));
    auto rk = solve(s, on_grid(Solver::rk4, horizon, horizon / 16));
    o.require(pic.status == TrajectoryStatus::completed, "pre-blowup window");
    agree = std::max(agree, trajectory_difference(pic, rk));
    duhamel = std::max(duhamel, duhamel_residual(s, pic).max_residual);
  }
  o.require(agree <= 1e-4, "picard vs rk4");
  o.require(duhamel <= 1e-8, "Duhamel residual");
  o.note("picard vs rk4 " + fmt(agree) + ", Duhamel " + fmt(duhamel));
  return o;
}

Outcome comparison() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<GraphPtr> graphs{share(lattice_ball(1, 12, LaplacianKind::combinatorial)),
                               share(lattice_ball(2, 5, LaplacianKind::normalized)),
                               share(random_connected_graph(25, 10, 2)), share(random_tree(20, 6))};
  double worst = 0.0;
  std::size_t failed = 0;
  for (int i = 0; i < 50; ++i) {
    SystemSpec lo;
    lo.graph = graphs[static_cast<std::size_t>(i) % graphs.size()];
    lo.boundary = lo.graph->is_truncation() && i % 2 == 0 ? Boundary::dirichlet : Boundary::natural;
    lo.p = 1.0 + 3.0 * unit(rng);
    lo.q = 1.0 + 3.0 * unit(rng);
    const auto n = static_cast<Eigen::Index>(lo.graph->size());
    lo.u0 = Vector::Zero(n);
    lo.v0 = Vector::Zero(n);
    auto hi = lo;
    for (Eigen::Index k = 0; k < n; ++k) {
      lo.u0[k] = 0.5 * unit(rng);
      lo.v0[k] = 0.5 * unit(rng);
      hi.u0[k] = lo.u0[k] + 0.5 * unit(rng) * (unit(rng) < 0.5);
      hi.v0[k] = lo.v0[k] + 0.5 * unit(rng) * (unit(rng) < 0.5);
    }
    auto c = comparison_audit(lo, hi, 2.0);
    worst = std::max(worst, c.max_violation);
    if (!c.pass || c.max_violation > 1e-9) ++failed;
  }
  o.require(failed == 0, std::to_string(failed) + " pairs");
  o.note("50 ordered pairs, worst violation " + fmt(worst));
  return o;
}

Outcome fujita() {
  Outcome o;
  {
    SystemSpec s;
    s.graph = share(lattice_ball(1, 64, LaplacianKind::combinatorial));
    s.boundary = Boundary::dirichlet;
    s.p = s.q = 2.0;
    s.u0 = delta_data(*s.graph, s.graph->index("0"), 1.0);
    s.v0 = s.u0;
    SolverOptions opts;
    opts.horizon = 64.0;
    opts.record_all = false;
    auto tr = solve(s, opts);
    o.require(tr.status == TrajectoryStatus::blowup_detected && tr.t_cross && *tr.t_cross < 64.0, "m=1 blowup");
    o.note("m=1 p=q=2: " + std::string(to_string(tr.status)) +
           (tr.t_cross ? " at t=" + fmt(*tr.t_cross) : std::string()));
  }
  {
    SystemSpec s;
    s.graph = share(lattice_ball(3, 44, LaplacianKind::normalized));
    s.boundary = Boundary::dirichlet;
    s.p = s.q = 3.0;
    s.u0 = delta_data(*s.graph, s.graph->index(lattice_origin_id(3)), 1e-3);
    s.v0 = s.u0;
    const auto profile = exponent_profile(3.0, 3.0, 3.0);
    DecayAuditOptions opts;
    opts.solver.dt_max = 0.125;
    auto r = global_decay_audit(s, profile, opts);
    o.require(r.status == TrajectoryStatus::completed, "m=3 global through t=64");
    o.require(r.pass, "m=3 weighted norm bounded");
    o.note("m=3 p=q=3 scale 1e-3 on " + std::to_string(s.graph->size()) + " vertices: " +
           std::string(to_string(r.status)) + ", t^w||u||_s1 decade ratio " + fmt(r.ratio_u) + " (<= " +
           fmt(r.ratio_tolerance) + "), mass defect " + fmt(r.max_mass_defect));
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"heat-kernel invariants", heat_kernel_invariants},
      {"series vs eigendecomposition", series_equivalence},
      {"kernel decay on Z1/Z2", decay_reproduction},
      {"smoothing (2,2,inf) and b=1 contraction", smoothing},
      {"contraction / Hoelder / embedding", inequality_audits},
      {"curvature certificate consistency", curvature_consistency},
      {"Li-Yau and Harnack at n_best", li_yau_harnack},
      {"exponent ledger", exponent_ledger},
      {"local existence solver", local_existence},
      {"comparison principle", comparison},
      {"Fujita dichotomy", fujita},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2zu %s (%.1fs): %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                r.detail.c_str());
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
