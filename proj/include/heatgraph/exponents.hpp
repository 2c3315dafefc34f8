#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heatgraph {

enum class Regime { supercritical_blowup, subcritical_global };

std::string_view to_string(Regime regime) noexcept;

struct EpsilonPolicy {
  // When unset: half of the joint cap.
  std::optional<double> epsilon;
  // Position of delta inside its window, in (0, 1); 0.5 is the midpoint.
  double delta_fraction = 0.5;
};

// Exponent bookkeeping for the coupled system with p <= q (inputs with p > q
// are swapped and `swapped` is set). Quantities depending on epsilon and delta
// exist only in the subcritical regime (`has_ledger`).
struct ExponentProfile {
  double p = 0.0;
  double q = 0.0;
  double growth_degree = 0.0;
  bool swapped = false;

  double critical_ratio = 0.0;  // (q + 1) / (pq - 1)
  Regime regime = Regime::supercritical_blowup;
  bool on_critical_curve = false;  // critical_ratio == m/2 up to round-off

  double r1 = 0.0;  // (m/2)(pq - 1)/(p + 1)
  double r2 = 0.0;  // (m/2)(pq - 1)/(q + 1)

  bool has_ledger = false;
  // Caps on epsilon from the three window constraints and their minimum.
  double epsilon_cap_integrability = 0.0;  // 2(q+1)(1+e) / (m(pq-1)) < 1
  double epsilon_cap_ordering = 0.0;       // q^2 (p+1)^2 / (q+1)^2 >= 1 + e
  double epsilon_cap_window = 0.0;         // (q+1)(1+e) / (q(p+1)) < min{1, m/2}
  double epsilon_cap = 0.0;
  double epsilon = 0.0;
  bool integrability_ok = false;
  bool ordering_ok = false;
  bool window_ok = false;

  double delta_lower = 0.0;  // (q+1)/(q(p+1))
  double delta_upper = 0.0;  // (q+1)(1+e)/(q(p+1))
  double delta = 0.0;
  double s1 = 0.0;  // r1 / delta
  double s2 = 0.0;  // r2 / delta
  double w = 0.0;   // (1 - delta)(p+1)/(pq-1)
  double w1 = 0.0;  // (m/2)(1/r2 - 1/s2)
  double k_star = 0.0;  // 1 / (1 - 2 delta / m)
};

// InvalidExponent for p < 1, q < 1, pq <= 1 or m <= 0. A supercritical
// profile carries only the regime data. An explicit epsilon outside (0, cap)
// or a delta fraction outside (0, 1) is an InvalidArgument.
ExponentProfile exponent_profile(double p, double q, double growth_degree, const EpsilonPolicy& policy = {});

// InfeasibleRegime unless the profile is subcritical.
void require_subcritical(const ExponentProfile& profile);

struct LedgerCheck {
  std::string name;
  double value = 0.0;
  // identity: |value - expected| <= tolerance * max(1, |expected|).
  // membership: lower < value < upper; closed ends allow the same relative slack.
  double expected = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool identity = false;
  bool lower_closed = false;
  bool upper_closed = false;
  double error = 0.0;
  bool pass = false;
};

struct LedgerReport {
  std::vector<LedgerCheck> checks;
  double tolerance = 0.0;
  bool pass = false;
  std::size_t failures() const;
};

// Every identity and window membership of the small-data existence argument.
// InfeasibleRegime for supercritical profiles.
LedgerReport verify_ledger(const ExponentProfile& profile, double tolerance = 1e-12);

// int_0^t (t - s)^{-alpha} s^{-beta} ds by adaptive quadrature against
// t^{1-alpha-beta} B(1-beta, 1-alpha).
struct BetaCheck {
  double alpha = 0.0;
  double beta = 0.0;
  double t = 1.0;
  double quadrature = 0.0;
  double closed_form = 0.0;
  double relative_error = 0.0;
};

BetaCheck beta_identity(double alpha, double beta, double t);

struct ExponentDraw {
  double p = 0.0;
  double q = 0.0;
  double growth_degree = 0.0;
  double delta_fraction = 0.5;
};

// Uniform draws of subcritical (p, q, m) with p, q in [1, p_max], m in (0, m_max]
// and a random delta position.
std::vector<ExponentDraw> random_feasible_draws(std::size_t count, std::uint64_t seed, double p_max = 8.0,
                                                double m_max = 12.0);

}  // namespace heatgraph
