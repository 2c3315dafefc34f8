#include "heatgraph/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "heatgraph/error.hpp"

namespace heatgraph {

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorCode::TooFewPoints, "line fit needs two points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::TooFewPoints, "line fit needs distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

double decade_ratio(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.empty()) return 1.0;
  const double T = times.back();
  double last = 0.0, previous = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > T / 10.0) {
      last = std::max(last, values[i]);
    } else if (times[i] > T / 100.0) {
      previous = std::max(previous, values[i]);
    }
  }
  if (previous == 0.0) return last == 0.0 ? 1.0 : kInfinity;
  return last / previous;
}

namespace {

double inverse(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

}  // namespace

YoungTriple YoungTriple::from_ab(double a, double b) {
  if (!(a >= 1.0) || !(b >= 1.0)) throw Error(ErrorCode::InvalidExponent, "exponents must be >= 1");
  const double inv_r = 1.0 + inverse(b) - inverse(a);
  if (inv_r < -1e-15 || inv_r > 1.0 + 1e-15) {
    throw Error(ErrorCode::InvalidExponent, "no r in [1, inf] satisfies 1 + 1/b = 1/a + 1/r");
  }
  const double r = inv_r <= 1e-15 ? kInfinity : 1.0 / std::min(1.0, inv_r);
  return {a, r, b};
}

YoungTriple YoungTriple::make(double a, double r, double b) {
  if (!(a >= 1.0) || !(r >= 1.0) || !(b >= 1.0)) {
    throw Error(ErrorCode::InvalidExponent, "exponents must be >= 1");
  }
  if (std::abs(1.0 + inverse(b) - inverse(a) - inverse(r)) > 1e-12) {
    throw Error(ErrorCode::InvalidExponent, "1 + 1/b = 1/a + 1/r does not hold");
  }
  return {a, r, b};
}

double theoretical_decay_slope(double growth_degree, double r) {
  return -(growth_degree / 2.0) * (1.0 - inverse(r));
}

namespace {

std::vector<std::size_t> window_indices(const HeatKernel& kernel, const WindowOptions& window) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < kernel.times.size(); ++k) {
    const double t = kernel.times[k];
    if (t >= window.t_min * (1 - 1e-12) && t <= window.t_max * (1 + 1e-12) && t > 0.0) idx.push_back(k);
  }
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return kernel.times[a] < kernel.times[b]; });
  if (idx.size() < 4) throw Error(ErrorCode::TooFewPoints, "decay fits need at least 4 grid times in the window");
  return idx;
}

double window_defect(const HeatKernel& kernel, const std::vector<std::size_t>& idx) {
  if (kernel.boundary != Boundary::dirichlet) return 0.0;
  double defect = 0.0;
  for (std::size_t k : idx) {
    defect = std::max(defect, kernel.mass_defect.row(static_cast<Eigen::Index>(k)).maxCoeff());
  }
  return defect;
}

void finish_fit(DecayFit& fit, const WindowOptions& window) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < fit.times.size(); ++i) {
    lx.push_back(std::log(fit.times[i]));
    ly.push_back(std::log(fit.values[i]));
  }
  const auto line = fit_line(lx, ly);
  fit.fitted_slope = line.slope;
  fit.fitted_log_constant = line.intercept;
  fit.fit_r2 = line.r2;
  fit.theoretical_slope = theoretical_decay_slope(fit.growth_degree, fit.r);
  fit.tolerance = window.relative_tolerance * std::abs(fit.theoretical_slope) + window.absolute_tolerance;
  fit.pass = std::abs(fit.fitted_slope - fit.theoretical_slope) <= fit.tolerance;
}

}  // namespace

DecayFit kernel_decay_fit(const HeatKernel& kernel, std::size_t center, double r, double growth_degree,
                          const WindowOptions& window) {
  if (!(r >= 1.0)) throw Error(ErrorCode::InvalidExponent, "decay fits need r >= 1");
  const auto idx = window_indices(kernel, window);
  DecayFit fit;
  fit.r = r;
  fit.growth_degree = growth_degree;
  fit.max_mass_defect = window_defect(kernel, idx);
  if (fit.max_mass_defect > window.defect_tolerance) {
    throw Error(ErrorCode::ContaminatedWindow,
                "mass defect " + std::to_string(fit.max_mass_defect) + " exceeds the window tolerance");
  }
  for (std::size_t k : idx) {
    fit.times.push_back(kernel.times[k]);
    fit.values.push_back(lp_norm(kernel.graph->measure(), kernel.column(k, center), r));
  }
  finish_fit(fit, window);
  return fit;
}

DecayFit smoothing_audit(const HeatKernel& kernel, const Vector& g, const YoungTriple& triple,
                         double growth_degree, const WindowOptions& window) {
  const double g_norm = lp_norm(kernel.graph->measure(), g, triple.a);
  if (g_norm == 0.0) throw Error(ErrorCode::ZeroFunction, "g must not vanish");
  const auto idx = window_indices(kernel, window);
  DecayFit fit;
  fit.r = triple.r;
  fit.triple = triple;
  fit.growth_degree = growth_degree;
  fit.max_mass_defect = window_defect(kernel, idx);
  if (fit.max_mass_defect > window.defect_tolerance) {
    throw Error(ErrorCode::ContaminatedWindow,
                "mass defect " + std::to_string(fit.max_mass_defect) + " exceeds the window tolerance");
  }
  for (std::size_t k : idx) {
    fit.times.push_back(kernel.times[k]);
    fit.values.push_back(lp_norm(kernel.graph->measure(), kernel.apply(k, g), triple.b) / g_norm);
  }
  fit.max_ratio = *std::max_element(fit.values.begin(), fit.values.end());
  if (triple.b == 1.0) {
    fit.contraction_mode = true;
    fit.theoretical_slope = 0.0;
    fit.tolerance = 1e-12;
    fit.pass = fit.max_ratio <= 1.0 + fit.tolerance;
    if (std::all_of(fit.values.begin(), fit.values.end(), [](double v) { return v > 0.0; })) {
      std::vector<double> lx, ly;
      for (std::size_t i = 0; i < fit.times.size(); ++i) {
        lx.push_back(std::log(fit.times[i]));
        ly.push_back(std::log(fit.values[i]));
      }
      const auto line = fit_line(lx, ly);
      fit.fitted_slope = line.slope;
      fit.fitted_log_constant = line.intercept;
      fit.fit_r2 = line.r2;
    }
    return fit;
  }
  finish_fit(fit, window);
  return fit;
}

GaussianBoundReport gaussian_bound_audit(const HeatKernel& kernel, double t_max, double defect_tolerance) {
  GaussianBoundReport report;
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < kernel.times.size(); ++k) {
    if (kernel.times[k] > 0.0 && kernel.times[k] <= t_max) idx.push_back(k);
  }
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return kernel.times[a] < kernel.times[b]; });
  if (idx.empty()) throw Error(ErrorCode::TooFewPoints, "no positive grid times");
  report.max_mass_defect = window_defect(kernel, idx);
  if (report.max_mass_defect > defect_tolerance) {
    throw Error(ErrorCode::ContaminatedWindow,
                "mass defect " + std::to_string(report.max_mass_defect) + " exceeds the tolerance");
  }
  const auto& graph = *kernel.graph;
  std::vector<std::vector<int>> distances;
  for (std::size_t x : kernel.sources) distances.push_back(hop_distances(graph, x));
  std::vector<double> running;
  double best = 0.0;
  for (std::size_t k : idx) {
    const double t = kernel.times[k];
    const int radius = static_cast<int>(std::floor(std::sqrt(t) + 1e-12));
    double c = 0.0;
    for (std::size_t j = 0; j < kernel.sources.size(); ++j) {
      double volume = 0.0;
      for (std::size_t y = 0; y < graph.size(); ++y) {
        if (distances[j][y] <= radius) volume += graph.measure(y);
      }
      const double pmax = kernel.slices[k].col(static_cast<Eigen::Index>(j)).maxCoeff();
      c = std::max(c, pmax * volume);
    }
    best = std::max(best, c);
    report.times.push_back(t);
    report.constants.push_back(c);
    running.push_back(best);
  }
  report.empirical_constant = best;
  report.stability_ratio = decade_ratio(report.times, running);
  report.pass = std::isfinite(best) && report.stability_ratio <= report.stability_tolerance;
  return report;
}

ContractionReport contraction_audit(const HeatKernel& kernel, const Vector& I, double k) {
  ContractionReport report;
  report.k = k;
  const auto measure = kernel.graph->measure();
  report.rhs = lp_norm(measure, I, k);
  std::vector<std::size_t> idx(kernel.times.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return kernel.times[a] < kernel.times[b]; });
  double previous = kInfinity;
  for (std::size_t i : idx) {
    const double lhs = lp_norm(measure, kernel.apply(i, I), k);
    report.lhs.push_back(lhs);
    if (lhs > report.rhs * (1.0 + 1e-12)) report.satisfied = false;
    if (!(lhs < previous)) report.strictly_decreasing = false;
    previous = lhs;
  }
  return report;
}

}  // namespace heatgraph
