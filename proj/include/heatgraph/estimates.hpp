#pragma once

#include <optional>
#include <vector>

#include "heatgraph/heat_kernel.hpp"

namespace heatgraph {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares y = slope x + intercept. Needs two distinct x.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// max over (T/10, T] divided by max over (T/100, T/10], T the last time.
// Used as a "no monotone escape" check for quantities that should stay bounded.
double decade_ratio(const std::vector<double>& times, const std::vector<double>& values);

// 1 + 1/b = 1/a + 1/r with a, r, b in [1, inf]; a <= b and r <= b follow.
struct YoungTriple {
  double a = 1.0;
  double r = 1.0;
  double b = 1.0;

  // Completes the triple from (a, b); InvalidExponent when r would leave [1, inf].
  static YoungTriple from_ab(double a, double b);
  // Checks the relation; InvalidExponent otherwise.
  static YoungTriple make(double a, double r, double b);
};

struct WindowOptions {
  double t_min = 4.0;
  double t_max = 64.0;
  // Largest mass defect of a Dirichlet truncation that still counts as untruncated.
  double defect_tolerance = 1e-6;
  double relative_tolerance = 0.1;
  double absolute_tolerance = 0.02;
};

struct DecayFit {
  double r = 1.0;
  std::optional<YoungTriple> triple;  // set by smoothing_audit
  double growth_degree = 0.0;
  std::vector<double> times;
  std::vector<double> values;  // norms (or norm ratios) at `times`
  double fitted_slope = 0.0;
  double fitted_log_constant = 0.0;
  double fit_r2 = 0.0;
  double theoretical_slope = 0.0;  // -(m/2)(1 - 1/r)
  double tolerance = 0.0;
  double max_mass_defect = 0.0;
  // b = 1: the contraction bound with constant 1 is checked instead of the slope.
  bool contraction_mode = false;
  double max_ratio = 0.0;
  bool pass = false;
};

double theoretical_decay_slope(double growth_degree, double r);

// Slope of log ||P(t, x0, .)||_r against log t over the window.
DecayFit kernel_decay_fit(const HeatKernel& kernel, std::size_t center, double r, double growth_degree,
                          const WindowOptions& window = {});

// ||sum_y P(t, ., y) g(y) mu(y)||_b / ||g||_a over the window.
DecayFit smoothing_audit(const HeatKernel& kernel, const Vector& g, const YoungTriple& triple,
                         double growth_degree, const WindowOptions& window = {});

struct GaussianBoundReport {
  std::vector<double> times;
  std::vector<double> constants;  // max over sources and y of P(t,x,y) V(x, sqrt t)
  double empirical_constant = 0.0;
  double stability_ratio = 0.0;  // decade_ratio of the running maximum
  double stability_tolerance = 1.2;
  double max_mass_defect = 0.0;
  bool pass = false;
};

// Every positive grid time up to t_max must be uncontaminated (ContaminatedWindow).
GaussianBoundReport gaussian_bound_audit(const HeatKernel& kernel, double t_max = kInfinity,
                                         double defect_tolerance = 1e-6);

struct ContractionReport {
  double k = 1.0;
  double rhs = 0.0;          // ||I||_k
  std::vector<double> lhs;   // ||P_t I||_k per grid time
  bool satisfied = true;
  bool strictly_decreasing = true;
};

ContractionReport contraction_audit(const HeatKernel& kernel, const Vector& I, double k);

}  // namespace heatgraph
