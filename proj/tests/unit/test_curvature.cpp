#include <cmath>

#include "doctest.h"
#include "heatgraph/curvature.hpp"
#include "heatgraph/error.hpp"

using namespace heatgraph;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

SearchBudget small_budget() {
  SearchBudget b;
  b.restarts = 12;
  b.iterations_per_restart = 300;
  b.random_samples = 800;
  return b;
}

}  // namespace

TEST_CASE("P3 centre with f = (1, 2, 1)") {
  auto g = path_graph(3);
  Vector f(3);
  f << 1.0, 2.0, 1.0;
  auto form = cde_form(g, 1, f);
  CHECK(form.lhs == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(form.delta_f == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(form.gamma_f == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(form.f_delta_log_f == doctest::Approx(-std::log(16.0)).epsilon(1e-14));
  CHECK(cde_applicable(form));
  CHECK(curvature_margin(form, CurvatureKind::cde, 2.0, 0.0) == doctest::Approx(0.5));
  CHECK(dimension_term(form, CurvatureKind::cde_prime) == doctest::Approx(std::pow(std::log(16.0), 2)));
}

TEST_CASE("constant functions and homogeneity") {
  auto g = lattice_ball(2, 4, LaplacianKind::combinatorial);
  const auto o = g.index(lattice_origin_id(2));
  auto c = cde_form(g, o, Vector::Constant(static_cast<Eigen::Index>(g.size()), 3.0));
  CHECK(c.lhs == doctest::Approx(0.0));
  CHECK(c.delta_f == 0.0);
  CHECK(c.gamma_f == 0.0);
  CHECK(curvature_margin(c, CurvatureKind::cde_prime, 1.0, 0.0) == doctest::Approx(0.0));

  Vector f = Vector::Ones(static_cast<Eigen::Index>(g.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = 0.5 + std::fmod(0.37 * static_cast<double>(i * i), 2.0);
  auto a = cde_form(g, o, f);
  for (double s : {0.1, 2.0, 7.5}) {
    auto b = cde_form(g, o, s * f);
    for (auto kind : {CurvatureKind::cde, CurvatureKind::cde_prime}) {
      const double ma = curvature_margin(a, kind, 3.0, 0.5);
      const double mb = curvature_margin(b, kind, 3.0, 0.5);
      CHECK(std::abs(mb - s * s * ma) <= 1e-9 * std::max(1.0, std::abs(s * s * ma)));
    }
  }
  f[static_cast<Eigen::Index>(g.index("1,0"))] = 0.0;
  CHECK(code_of([&] { cde_form(g, o, f); }) == ErrorCode::NonPositiveFunction);
}

TEST_CASE("single vertex is vacuous for CDE") {
  auto g = WeightedGraph::build({"o"}, {}, {{"o", 1.0}});
  auto r = check_curvature(g, {0, 2.0, 0.0, CurvatureKind::cde});
  CHECK(r.verdict == CurvatureVerdict::vacuous);
  auto rp = check_curvature(g, {0, 2.0, 0.0, CurvatureKind::cde_prime});
  CHECK(rp.verdict == CurvatureVerdict::no_violation_found);
  CHECK(rp.n_best == 0.0);
}

TEST_CASE("Z1 interior CDE' at K = 0") {
  auto g = lattice_ball(1, 6, LaplacianKind::combinatorial);
  const auto o = g.index("0");
  CurvatureQuery q{o, 2.0, 0.0, CurvatureKind::cde_prime};
  auto r = check_curvature(g, q, small_budget());
  CHECK(r.interior);
  CHECK(std::isfinite(r.n_best));
  CHECK(r.n_best > 0.0);
  REQUIRE(r.witness);
  auto re = recheck_certificate(g, q, *r.witness);
  CHECK(re.reevaluation_error <= 1e-9);
  REQUIRE(r.n_best_witness);
  const auto& nb = r.n_best_witness->form;
  CHECK(dimension_term(nb, CurvatureKind::cde_prime) / nb.lhs == doctest::Approx(r.n_best).epsilon(1e-12));

  // same seed, same report
  auto again = check_curvature(g, q, small_budget());
  CHECK(again.n_best == r.n_best);
  CHECK(again.worst_margin == r.worst_margin);
}

TEST_CASE("violations are certified and consistent") {
  auto g = lattice_ball(1, 6, LaplacianKind::combinatorial);
  const auto o = g.index("0");
  for (auto kind : {CurvatureKind::cde, CurvatureKind::cde_prime}) {
    CurvatureQuery q{o, 0.5, 0.0, kind};
    auto r = check_curvature(g, q, small_budget());
    CHECK(r.verdict == CurvatureVerdict::violated);
    REQUIRE(r.witness);
    CHECK(r.worst_margin < -1e-9);
    auto re = recheck_certificate(g, q, *r.witness);
    CHECK(re.reevaluation_error <= 1e-9);
    CHECK(re.consistent_with_implication);
    for (const auto& w : r.witnesses) {
      CHECK(recheck_certificate(g, q, w).consistent_with_implication);
    }
  }
}

TEST_CASE("margin is monotone in n on stored witnesses") {
  auto g = lattice_ball(2, 4, LaplacianKind::combinatorial);
  const auto o = g.index(lattice_origin_id(2));
  auto r = check_curvature(g, {o, 3.0, 0.0, CurvatureKind::cde_prime}, small_budget());
  REQUIRE(!r.witnesses.empty());
  for (const auto& w : r.witnesses) {
    double prev = curvature_margin(w.form, CurvatureKind::cde_prime, 3.0, 0.0);
    for (double n : {4.0, 8.0, 16.0, 1e3}) {
      const double m = curvature_margin(w.form, CurvatureKind::cde_prime, n, 0.0);
      CHECK(m >= prev - 1e-15);
      prev = m;
    }
  }
}

TEST_CASE("Li-Yau on two vertices") {
  auto g = share(path_graph(2));
  std::vector<double> times;
  for (int k = 1; k <= 80; ++k) times.push_back(0.05 * k);
  auto kernel = compute_kernel(g, times, KernelMethod::eigen);
  double closed = 0.0;
  for (double t : times) closed = std::max(closed, 2.0 * t * (1.0 - std::sqrt(std::tanh(t))));
  auto r = li_yau_audit(kernel, 0, closed);
  CHECK(r.minimal_n == doctest::Approx(closed).epsilon(1e-8));
  CHECK(r.pass);
  CHECK(r.checked == 2 * times.size());
  CHECK_FALSE(li_yau_audit(kernel, 0, 0.9 * closed).pass);
}

TEST_CASE("Li-Yau at equilibrium") {
  auto g = share(random_tree(12, 3));
  auto kernel = compute_kernel(g, {200.0}, KernelMethod::eigen);
  auto r = li_yau_audit(kernel, 0, 1e-6);
  CHECK(r.pass);
  CHECK(std::abs(r.worst_slack + 1e-6 / 400.0) < 1e-9);
}

TEST_CASE("Harnack") {
  auto g = share(lattice_ball(1, 40, LaplacianKind::combinatorial));
  const auto o = g->index("0");
  auto kernel = compute_kernel(g, dyadic_grid(0.5, 16.0), KernelMethod::taylor, {Boundary::dirichlet});
  // x = y, T2 = 2 T1
  std::vector<HarnackSample> diag;
  for (std::size_t k = 0; k + 1 < kernel.times.size(); ++k) {
    diag.push_back({kernel.times[k], kernel.times[k + 1], o, o});
  }
  CHECK(harnack_audit(kernel, o, 1.0, diag).pass);
  // far apart: the Gaussian factor dominates
  auto far = harnack_audit(kernel, o, 1.0, {{1.0, 2.0, g->index("-10"), g->index("10")}});
  CHECK(far.pass);
  CHECK(far.worst_ratio < 1e-50);

  auto samples = sample_harnack(kernel, 200, 5, interior_vertices(*g, 2));
  CHECK(samples.size() == 200);
  CHECK(harnack_audit(kernel, o, 2.0, samples).pass);
  CHECK(code_of([&] { harnack_audit(kernel, o, 1.0, {{1.5, 2.0, o, o}}); }) == ErrorCode::GridMismatch);
}
