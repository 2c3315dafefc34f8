#include <cmath>

#include "doctest.h"
#include "heatgraph/error.hpp"
#include "heatgraph/parabolic.hpp"

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

SystemSpec single_vertex(double u0, double v0) {
  SystemSpec s;
  s.graph = share(WeightedGraph::build({"o"}, {}, {{"o", 1.0}}));
  s.u0 = Vector::Constant(1, u0);
  s.v0 = Vector::Constant(1, v0);
  return s;
}

SystemSpec z1_small(double amplitude) {
  SystemSpec s;
  s.graph = share(lattice_ball(1, 10, LaplacianKind::combinatorial));
  s.boundary = Boundary::dirichlet;
  const auto o = s.graph->index("0");
  s.u0 = delta_data(*s.graph, o, amplitude);
  s.v0 = delta_data(*s.graph, o, amplitude);
  s.v0[static_cast<Eigen::Index>(o + 1)] = amplitude / 2;
  return s;
}

SolverOptions grid_options(Solver solver, double horizon) {
  SolverOptions o;
  o.solver = solver;
  o.horizon = horizon;
  for (double t = 0.125; t <= horizon; t += 0.125) o.output_times.push_back(t);
  return o;
}

}  // namespace

TEST_CASE("zero data stays zero") {
  auto s = z1_small(0.0);
  for (auto solver : {Solver::picard, Solver::rk4, Solver::euler}) {
    auto tr = solve(s, grid_options(solver, 2.0));
    CHECK(tr.status == TrajectoryStatus::completed);
    CHECK(tr.final_time() == 2.0);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      CHECK(tr.u[k].cwiseAbs().maxCoeff() == 0.0);
      CHECK(tr.v[k].cwiseAbs().maxCoeff() == 0.0);
    }
  }
  auto tr = picard_solve(s, grid_options(Solver::picard, 1.0));
  CHECK(duhamel_residual(s, tr).max_residual == 0.0);
}

TEST_CASE("single-vertex blowup at t = 1") {
  auto s = single_vertex(1.0, 1.0);
  for (auto solver : {Solver::picard, Solver::rk4}) {
    SolverOptions o;
    o.solver = solver;
    o.horizon = 2.0;
    auto tr = solve(s, o);
    CHECK(tr.status == TrajectoryStatus::blowup_detected);
    REQUIRE(tr.t_cross);
    CHECK(*tr.t_cross == doctest::Approx(1.0).epsilon(1e-3));
    auto b = blowup_detect(tr);
    CHECK(b.crossed);
    CHECK(b.t_star == doctest::Approx(1.0).epsilon(0.05));
    CHECK(b.alpha == doctest::Approx(1.0).epsilon(0.15));
    // closed form along the way
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      if (tr.times[k] > 0.8) break;
      CHECK(tr.u[k][0] == doctest::Approx(1.0 / (1.0 - tr.times[k])).epsilon(1e-3));
    }
  }
}

TEST_CASE("picard windows contract") {
  auto tr = picard_solve(single_vertex(1.0, 1.0), SolverOptions{});
  REQUIRE(!tr.windows.empty());
  for (const auto& w : tr.windows) {
    CHECK(w.contraction_factor <= 0.5);
    CHECK((w.t1 - w.t0) * w.lipschitz <= 0.5 * (1 + 1e-5));
  }
}

TEST_CASE("reaction off reduces to the heat flow") {
  auto s = z1_small(1.0);
  s.v0.setZero();
  s.reaction_u = false;
  s.reaction_v = false;
  SpectralDecomposition sd(*s.graph, s.boundary);
  for (auto solver : {Solver::picard, Solver::rk4}) {
    auto tr = solve(s, grid_options(solver, 2.0));
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      worst = std::max(worst, (tr.u[k] - sd.evolve(s.u0, tr.times[k])).cwiseAbs().maxCoeff());
      CHECK(tr.v[k].cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(worst <= (solver == Solver::picard ? 1e-8 : 1e-6));
  }
  auto tr = picard_solve(s, grid_options(Solver::picard, 2.0));
  CHECK(duhamel_residual(s, tr).max_residual <= 1e-8);
}

TEST_CASE("mass without reaction") {
  auto s = z1_small(1.0);
  s.reaction_u = s.reaction_v = false;
  s.boundary = Boundary::natural;
  auto tr = step_solve(s, grid_options(Solver::rk4, 4.0));
  for (const auto& u : tr.u) CHECK(std::abs(u.sum() - s.u0.sum()) <= 1e-10 * s.u0.sum());
  s.boundary = Boundary::dirichlet;
  auto killed = step_solve(s, grid_options(Solver::rk4, 40.0));
  for (std::size_t k = 1; k < killed.u.size(); ++k) CHECK(killed.u[k].sum() <= killed.u[k - 1].sum() + 1e-14);
  CHECK(killed.u.back().sum() < 0.99 * s.u0.sum());
}

TEST_CASE("picard and rk4 agree on small data") {
  auto s = z1_small(0.1);
  auto pic = picard_solve(s, grid_options(Solver::picard, 1.0));
  auto rk = step_solve(s, grid_options(Solver::rk4, 1.0));
  CHECK(trajectory_difference(pic, rk) <= 1e-5);
  CHECK(duhamel_residual(s, pic).max_residual <= 1e-8);
  CHECK(duhamel_residual(s, rk).max_residual <= 1e-4);
  CHECK(pic.min_value >= -1e-12);
  CHECK(rk.min_value >= -1e-12);
}

TEST_CASE("comparison principle") {
  auto a = z1_small(0.5);
  auto same = comparison_audit(a, a, 1.0);
  CHECK(same.max_violation == 0.0);
  CHECK(same.pass);

  auto b = a;
  b.u0[3] += 0.7;
  auto bump = comparison_audit(a, b, 1.0);
  CHECK(bump.pass);

  auto c = a;
  c.u0 *= 2.0;
  c.v0 *= 2.0;
  CHECK(comparison_audit(a, c, 1.0).pass);
  // reversed order is caught
  CHECK_FALSE(comparison_audit(c, a, 1.0).pass);
}

TEST_CASE("blowup detection edge cases") {
  auto decaying = step_solve(z1_small(0.01), grid_options(Solver::rk4, 4.0));
  CHECK(code_of([&] { blowup_detect(decaying); }) == ErrorCode::NoGrowthDetected);
  auto b = blowup_detect(decaying, 1e-3);
  CHECK(b.crossed);
  CHECK(b.degenerate);
  CHECK(b.t_cross == 0.0);
}

TEST_CASE("invalid systems") {
  auto s = single_vertex(1.0, 1.0);
  s.p = 0.5;
  CHECK(code_of([&] { solve(s, {}); }) == ErrorCode::NonIntegrablePower);
  s.p = 1.0;
  s.q = 1.0;
  CHECK(code_of([&] { solve(s, {}); }) == ErrorCode::InvalidExponent);
  s.q = 2.0;
  s.u0[0] = -1.0;
  CHECK(code_of([&] { solve(s, {}); }) == ErrorCode::InvalidArgument);
  s.u0 = Vector::Zero(2);
  CHECK(code_of([&] { solve(s, {}); }) == ErrorCode::GraphMismatch);
}

TEST_CASE("global decay audit preconditions") {
  auto s = z1_small(0.0);
  CHECK(code_of([&] { global_decay_audit(s, exponent_profile(2, 2, 1)); }) == ErrorCode::InfeasibleRegime);
  s.p = s.q = 3.0;
  DecayAuditOptions o;
  o.horizon = 8.0;
  auto zero = global_decay_audit(s, exponent_profile(3, 3, 3), o);
  CHECK(zero.pass);
  s.u0[10] = 1.0;
  CHECK(code_of([&] { global_decay_audit(s, exponent_profile(3, 3, 3), o); }) == ErrorCode::ContaminatedWindow);
}

TEST_CASE("sweep bookkeeping") {
  auto g = share(lattice_ball(1, 5, LaplacianKind::combinatorial));
  Vector shape = delta_data(*g, g->index("0"), 1.0);
  auto empty = fujita_sweep(g, Boundary::dirichlet, 1.0, {}, {}, {0.1}, shape, shape);
  CHECK(empty.cells.empty());
  auto r = fujita_sweep(g, Boundary::dirichlet, 3.0, {2.0, 3.0}, {3.0}, {}, shape, shape);
  CHECK(r.cells.empty());
  // (q + 1)/(pq - 1) = 3/2 at p = 2 gives q = 5/4 < p; the other branch: (p+1)/(pq-1) = 3/2 -> q = 3/2
  REQUIRE(!r.theoretical_curve.empty());
  for (auto [p, q] : r.theoretical_curve) {
    CHECK((std::max(p, q) + 1) / (p * q - 1) == doctest::Approx(1.5));
  }
}

TEST_CASE("accumulated output grid lands on the horizon") {
  auto s = z1_small(3.0);
  SolverOptions o;
  o.solver = Solver::picard;
  o.horizon = 0.15;
  for (double t = 0.15 / 16; t <= 0.15 * (1 + 1e-12); t += 0.15 / 16) o.output_times.push_back(t);
  auto tr = solve(s, o);
  CHECK(tr.status == TrajectoryStatus::completed);
  CHECK(tr.final_time() == 0.15);
}
