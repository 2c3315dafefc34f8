#include "heatgraph/exponents.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_gamma.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "heatgraph/error.hpp"

namespace heatgraph {

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::supercritical_blowup: return "supercritical_blowup";
    case Regime::subcritical_global: return "subcritical_global";
  }
  return "unknown";
}

ExponentProfile exponent_profile(double p, double q, double growth_degree, const EpsilonPolicy& policy) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw Error(ErrorCode::InvalidExponent, "p and q must be >= 1");
  if (!(p * q > 1.0)) throw Error(ErrorCode::InvalidExponent, "pq must exceed 1");
  if (!(growth_degree > 0.0) || !std::isfinite(growth_degree)) {
    throw Error(ErrorCode::InvalidExponent, "growth degree must be positive");
  }
  ExponentProfile e;
  e.swapped = p > q;
  if (e.swapped) std::swap(p, q);
  e.p = p;
  e.q = q;
  const double m = growth_degree;
  e.growth_degree = m;
  const double pq1 = p * q - 1.0;
  e.critical_ratio = (q + 1.0) / pq1;
  e.on_critical_curve = std::abs(e.critical_ratio - m / 2.0) <= 1e-12 * std::max(1.0, m / 2.0);
  e.regime = (e.critical_ratio >= m / 2.0 || e.on_critical_curve) ? Regime::supercritical_blowup
                                                                   : Regime::subcritical_global;
  e.r1 = (m / 2.0) * pq1 / (p + 1.0);
  e.r2 = (m / 2.0) * pq1 / (q + 1.0);
  e.delta_lower = (q + 1.0) / (q * (p + 1.0));
  if (e.regime != Regime::subcritical_global) return e;

  e.epsilon_cap_integrability = m * pq1 / (2.0 * (q + 1.0)) - 1.0;
  e.epsilon_cap_ordering = q * q * (p + 1.0) * (p + 1.0) / ((q + 1.0) * (q + 1.0)) - 1.0;
  e.epsilon_cap_window = std::min(1.0, m / 2.0) * q * (p + 1.0) / (q + 1.0) - 1.0;
  e.epsilon_cap = std::min({e.epsilon_cap_integrability, e.epsilon_cap_ordering, e.epsilon_cap_window});
  if (!(e.epsilon_cap > 0.0)) return e;

  if (policy.epsilon) {
    if (!(*policy.epsilon > 0.0) || !(*policy.epsilon < e.epsilon_cap)) {
      throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, " + std::to_string(e.epsilon_cap) + ")");
    }
    e.epsilon = *policy.epsilon;
  } else {
    e.epsilon = e.epsilon_cap / 2.0;
  }
  if (!(policy.delta_fraction > 0.0) || !(policy.delta_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "delta fraction must lie in (0, 1)");
  }
  const double eps = e.epsilon;
  e.integrability_ok = 2.0 * (q + 1.0) * (1.0 + eps) / (m * pq1) < 1.0;
  e.ordering_ok = q * q * (p + 1.0) * (p + 1.0) / ((q + 1.0) * (q + 1.0)) >= 1.0 + eps;
  e.window_ok = (q + 1.0) * (1.0 + eps) / (q * (p + 1.0)) < std::min(1.0, m / 2.0);

  e.delta_upper = e.delta_lower * (1.0 + eps);
  e.delta = e.delta_lower + policy.delta_fraction * (e.delta_upper - e.delta_lower);
  e.s1 = e.r1 / e.delta;
  e.s2 = e.r2 / e.delta;
  e.w = (1.0 - e.delta) * (p + 1.0) / pq1;
  e.w1 = (m / 2.0) * (1.0 / e.r2 - 1.0 / e.s2);
  e.k_star = 1.0 / (1.0 - 2.0 * e.delta / m);
  e.has_ledger = true;
  return e;
}

void require_subcritical(const ExponentProfile& profile) {
  if (profile.regime != Regime::subcritical_global || !profile.has_ledger) {
    throw Error(ErrorCode::InfeasibleRegime,
                "critical ratio " + std::to_string(profile.critical_ratio) + " is not below m/2 = " +
                    std::to_string(profile.growth_degree / 2.0));
  }
}

std::size_t LedgerReport::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.pass; }));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Ledger {
 public:
  explicit Ledger(double tolerance) { report_.tolerance = tolerance; }

  void identity(std::string name, double value, double expected) {
    LedgerCheck c;
    c.name = std::move(name);
    c.identity = true;
    c.value = value;
    c.expected = expected;
    c.error = std::abs(value - expected);
    c.pass = c.error <= report_.tolerance * std::max(1.0, std::abs(expected));
    report_.checks.push_back(std::move(c));
  }

  void inside(std::string name, double value, double lower, double upper, bool lower_closed = false,
              bool upper_closed = false) {
    LedgerCheck c;
    c.name = std::move(name);
    c.value = value;
    c.lower = lower;
    c.upper = upper;
    c.lower_closed = lower_closed;
    c.upper_closed = upper_closed;
    const double tol = report_.tolerance;
    const bool lo = lower_closed ? value >= lower - tol * std::max(1.0, std::abs(lower)) : value > lower;
    const bool hi = upper_closed ? value <= upper + tol * std::max(1.0, std::abs(upper)) : value < upper;
    c.error = std::max({0.0, lower - value, value - upper});
    c.pass = lo && hi;
    report_.checks.push_back(std::move(c));
  }

  LedgerReport finish() {
    report_.pass = report_.failures() == 0;
    return std::move(report_);
  }

 private:
  LedgerReport report_;
};

}  // namespace

LedgerReport verify_ledger(const ExponentProfile& e, double tolerance) {
  require_subcritical(e);
  const double p = e.p, q = e.q, m = e.growth_degree, d = e.delta, eps = e.epsilon;
  const double pq1 = p * q - 1.0;
  Ledger L(tolerance);

  L.inside("p <= q", p, 1.0, q, true, true);
  L.inside("pq > 1", p * q, 1.0, kInf);
  L.inside("critical ratio < m/2", e.critical_ratio, -kInf, m / 2.0);
  L.inside("2(q+1)(1+eps)/(m(pq-1)) < 1", 2.0 * (q + 1.0) * (1.0 + eps) / (m * pq1), -kInf, 1.0);
  L.inside("q^2(p+1)^2/(q+1)^2 >= 1+eps", q * q * (p + 1.0) * (p + 1.0) / ((q + 1.0) * (q + 1.0)), 1.0 + eps,
           kInf, true);
  L.inside("(q+1)(1+eps)/(q(p+1)) < min{1, m/2}", (q + 1.0) * (1.0 + eps) / (q * (p + 1.0)), -kInf,
           std::min(1.0, m / 2.0));
  L.inside("delta in its window", d, e.delta_lower, e.delta_upper);
  L.inside("0 < delta < min{1, m/2}", d, 0.0, std::min(1.0, m / 2.0));
  L.inside("(p+1)/(p(q+1)) < delta", (p + 1.0) / (p * (q + 1.0)), -kInf, d);

  L.identity("r1 = (m/2)(pq-1)/(p+1)", e.r1, (m / 2.0) * pq1 / (p + 1.0));
  L.identity("r2 = (m/2)(pq-1)/(q+1)", e.r2, (m / 2.0) * pq1 / (q + 1.0));
  L.inside("r2 > 1 + eps", e.r2, 1.0 + eps, kInf);
  L.identity("s1 = r1/delta", e.s1, (m / (2.0 * d)) * pq1 / (p + 1.0));
  L.identity("s2 = r2/delta", e.s2, (m / (2.0 * d)) * pq1 / (q + 1.0));
  L.inside("s1 >= s2", e.s1, e.s2, kInf, true);
  L.inside("s2 > 1", e.s2, 1.0, kInf);
  L.inside("s2 > p", e.s2, p, kInf);
  L.inside("s2 >= s1/q", e.s2, e.s1 / q, kInf, true);
  L.inside("s1 > q", e.s1, q, kInf);
  L.inside("s1 >= s2/p", e.s1, e.s2 / p, kInf, true);

  const double two_delta_m = 2.0 * d / m;
  L.identity("p/s2 - 1/s1 = 2 delta/m", p / e.s2 - 1.0 / e.s1, two_delta_m);
  L.identity("q/s1 - 1/s2 = 2 delta/m", q / e.s1 - 1.0 / e.s2, two_delta_m);
  L.identity("(m/2)(1 - 1/k*) = delta", (m / 2.0) * (1.0 - 1.0 / e.k_star), d);
  L.inside("k* > 1", e.k_star, 1.0, kInf);

  L.identity("w = (m/2)(1/r1 - 1/s1)", e.w, (m / 2.0) * (1.0 / e.r1 - 1.0 / e.s1));
  L.identity("w = (1-delta)(p+1)/(pq-1)", e.w, (1.0 - d) * (p + 1.0) / pq1);
  L.identity("w1 = (1-delta)(q+1)/(pq-1)", e.w1, (1.0 - d) * (q + 1.0) / pq1);
  L.inside("wq in (0,1)", e.w * q, 0.0, 1.0);
  L.inside("(wq+delta-1)p in (0,1)", (e.w * q + d - 1.0) * p, 0.0, 1.0);
  L.inside("w1 p in (0,1)", e.w1 * p, 0.0, 1.0);
  L.inside("(delta+w1 p-1)q in (0,1)", (d + e.w1 * p - 1.0) * q, 0.0, 1.0);
  L.identity("(wq+delta-1)p = (1-delta)(pq+p)/(pq-1)", (e.w * q + d - 1.0) * p, (1.0 - d) * (p * q + p) / pq1);
  L.identity("wq + delta - 1 = w1", e.w * q + d - 1.0, e.w1);
  L.identity("delta + w1 p - 1 = w", d + e.w1 * p - 1.0, e.w);
  L.identity("1 - delta - wq = -w1", 1.0 - d - e.w * q, -e.w1);
  L.identity("1 - delta - (delta + w1 p - 1)q = -w1", 1.0 - d - (d + e.w1 * p - 1.0) * q, -e.w1);
  L.identity("1 - delta - (m/2)(1/r2 - 1/s2)p = -w", 1.0 - d - (m / 2.0) * (1.0 / e.r2 - 1.0 / e.s2) * p, -e.w);
  return L.finish();
}

BetaCheck beta_identity(double alpha, double beta, double t) {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) || !(t > 0.0)) {
    throw Error(ErrorCode::InvalidExponent, "beta identity needs alpha, beta in (0,1) and t > 0");
  }
  BetaCheck b{alpha, beta, t};
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  gsl_integration_qaws_table* table = gsl_integration_qaws_table_alloc(-beta, -alpha, 0, 0);
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(200);
  gsl_function one;
  one.function = [](double, void*) { return 1.0; };
  one.params = nullptr;
  double abserr = 0.0;
  const int status = gsl_integration_qaws(&one, 0.0, t, table, 0.0, 1e-13, 200, ws, &b.quadrature, &abserr);
  gsl_integration_workspace_free(ws);
  gsl_integration_qaws_table_free(table);
  gsl_set_error_handler(old);
  if (status != GSL_SUCCESS) b.quadrature = std::nan("");
  b.closed_form = std::pow(t, 1.0 - alpha - beta) * gsl_sf_beta(1.0 - beta, 1.0 - alpha);
  b.relative_error = std::isnan(b.quadrature) ? std::numeric_limits<double>::infinity() : std::abs(b.quadrature - b.closed_form) / std::abs(b.closed_form);
  return b;
}

std::vector<ExponentDraw> random_feasible_draws(std::size_t count, std::uint64_t seed, double p_max,
                                                double m_max) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pq(1.0, p_max);
  std::uniform_real_distribution<double> md(0.0, m_max);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  std::vector<ExponentDraw> out;
  while (out.size() < count) {
    ExponentDraw d{pq(rng), pq(rng), md(rng), frac(rng)};
    if (!(d.p * d.q > 1.0) || !(d.growth_degree > 0.0)) continue;
    const double ratio = (std::max(d.p, d.q) + 1.0) / (d.p * d.q - 1.0);
    if (ratio < d.growth_degree / 2.0) out.push_back(d);
  }
  return out;
}

}  // namespace heatgraph
