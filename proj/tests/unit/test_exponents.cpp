#include <cmath>

#include "doctest.h"
#include "heatgraph/error.hpp"
#include "heatgraph/exponents.hpp"

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

}  // namespace

TEST_CASE("p = q = 2 on a three-dimensional lattice") {
  auto e = exponent_profile(2, 2, 3);
  CHECK(e.critical_ratio == 1.0);
  CHECK(e.regime == Regime::subcritical_global);
  CHECK_FALSE(e.on_critical_curve);
  CHECK(e.r1 == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(e.r2 == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(e.delta_lower == doctest::Approx(0.5).epsilon(1e-15));
  // caps 0.5, 3 and 1
  CHECK(e.epsilon_cap == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e.epsilon == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(e.delta == doctest::Approx(0.5625).epsilon(1e-15));

  EpsilonPolicy at055;
  at055.delta_fraction = 0.4;  // 0.5 + 0.4 * 0.125
  auto f = exponent_profile(2, 2, 3, at055);
  CHECK(f.delta == doctest::Approx(0.55).epsilon(1e-14));
  CHECK(f.s1 == doctest::Approx(1.5 / 0.55).epsilon(1e-14));
  CHECK(f.s2 == doctest::Approx(2.727272727272727).epsilon(1e-14));
  CHECK(f.w == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(2.0 / f.s2 - 1.0 / f.s1 == doctest::Approx(1.1 / 3.0).epsilon(1e-14));
  CHECK(verify_ledger(f).pass);
}

TEST_CASE("supercritical and rejected inputs") {
  auto e = exponent_profile(2, 2, 2);
  CHECK(e.regime == Regime::supercritical_blowup);
  CHECK(e.on_critical_curve);
  CHECK_FALSE(e.has_ledger);
  CHECK(code_of([&] { verify_ledger(e); }) == ErrorCode::InfeasibleRegime);
  CHECK(code_of([&] { require_subcritical(e); }) == ErrorCode::InfeasibleRegime);
  CHECK(exponent_profile(2, 2, 1).regime == Regime::supercritical_blowup);
  CHECK_FALSE(exponent_profile(2, 2, 1).on_critical_curve);

  CHECK(code_of([] { exponent_profile(1, 1, 3); }) == ErrorCode::InvalidExponent);
  CHECK(code_of([] { exponent_profile(0.5, 4, 3); }) == ErrorCode::InvalidExponent);
  CHECK(code_of([] { exponent_profile(2, 2, 0); }) == ErrorCode::InvalidExponent);
  EpsilonPolicy big;
  big.epsilon = 0.6;
  CHECK(code_of([&] { exponent_profile(2, 2, 3, big); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("p > q is swapped") {
  auto e = exponent_profile(3, 1.5, 4);
  CHECK(e.swapped);
  CHECK(e.p == 1.5);
  CHECK(e.q == 3.0);
  CHECK(e.critical_ratio == doctest::Approx(4.0 / 3.5));
  CHECK(verify_ledger(e).pass);
}

TEST_CASE("ledger holds on random feasible draws") {
  std::size_t failures = 0;
  for (const auto& d : random_feasible_draws(1000, 7)) {
    EpsilonPolicy policy;
    policy.delta_fraction = d.delta_fraction;
    auto report = verify_ledger(exponent_profile(d.p, d.q, d.growth_degree, policy));
    failures += report.failures();
    CHECK(report.checks.size() >= 30);
  }
  CHECK(failures == 0);
}

TEST_CASE("beta identity") {
  auto e = exponent_profile(2, 2, 3);
  for (double beta : {e.w * e.q, e.w1 * e.p, (e.w * e.q + e.delta - 1) * e.p}) {
    auto b = beta_identity(e.delta, beta, 2.5);
    CHECK(b.relative_error < 1e-12);
  }
  auto half = beta_identity(0.5, 0.5, 1.0);
  CHECK(half.closed_form == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(half.relative_error < 1e-12);
  CHECK(code_of([] { beta_identity(1.0, 0.5, 1.0); }) == ErrorCode::InvalidExponent);
}
