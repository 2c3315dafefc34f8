#include "heatgraph/parabolic.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "heatgraph/error.hpp"
#include "heatgraph/estimates.hpp"
#include "heatgraph/parallel.hpp"

namespace heatgraph {

std::string_view to_string(Solver solver) noexcept {
  switch (solver) {
    case Solver::picard: return "picard";
    case Solver::euler: return "euler";
    case Solver::rk4: return "rk4";
  }
  return "unknown";
}

std::string_view to_string(TrajectoryStatus status) noexcept {
  switch (status) {
    case TrajectoryStatus::completed: return "completed";
    case TrajectoryStatus::blowup_detected: return "blowup_detected";
    case TrajectoryStatus::resource_limit: return "resource_limit";
  }
  return "unknown";
}

std::string_view to_string(CellVerdict verdict) noexcept {
  switch (verdict) {
    case CellVerdict::blowup: return "blowup";
    case CellVerdict::global_horizon: return "global-horizon";
    case CellVerdict::undecided: return "undecided";
  }
  return "unknown";
}

Solver parse_solver(std::string_view name) {
  if (name == "picard") return Solver::picard;
  if (name == "euler") return Solver::euler;
  if (name == "rk4") return Solver::rk4;
  throw Error(ErrorCode::UsageError, "unknown solver '" + std::string(name) + "'");
}

void validate(const SystemSpec& sys) {
  if (!sys.graph) throw Error(ErrorCode::InvalidArgument, "system has no graph");
  const auto n = static_cast<Eigen::Index>(sys.graph->size());
  if (sys.u0.size() != n || sys.v0.size() != n) {
    throw Error(ErrorCode::GraphMismatch, "initial data size differs from the vertex count");
  }
  if (!(sys.p >= 1.0) || !(sys.q >= 1.0)) {
    throw Error(ErrorCode::NonIntegrablePower, "the solvers need p, q >= 1");
  }
  if (!(sys.p * sys.q > 1.0)) throw Error(ErrorCode::InvalidExponent, "pq must exceed 1");
  if ((n > 0 && (sys.u0.minCoeff() < 0.0 || sys.v0.minCoeff() < 0.0)) || !sys.u0.allFinite() ||
      !sys.v0.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "initial data must be finite and nonnegative");
  }
}

std::optional<std::size_t> Trajectory::time_index(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t - 1e-12 * std::max(1.0, std::abs(t)));
  if (it != times.end() && std::abs(*it - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
    return static_cast<std::size_t>(it - times.begin());
  }
  return std::nullopt;
}

Vector delta_data(const WeightedGraph& graph, std::size_t x, double amplitude) {
  if (x >= graph.size()) throw Error(ErrorCode::UnknownVertex, "vertex index out of range");
  Vector f = Vector::Zero(static_cast<Eigen::Index>(graph.size()));
  f[static_cast<Eigen::Index>(x)] = amplitude;
  return f;
}

namespace {

double sup(const Vector& f) { return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff(); }

Vector power(const Vector& f, double p) {
  const double whole = std::round(p);
  if (whole == p && whole <= 8.0) {
    const int k = static_cast<int>(whole);
    return f.unaryExpr([k](double x) {
      if (!(x > 0.0)) return 0.0;
      double r = x;
      for (int i = 1; i < k; ++i) r *= x;
      return r;
    });
  }
  return f.unaryExpr([p](double x) { return x > 0.0 ? std::pow(x, p) : 0.0; });
}

Vector reaction_u(const SystemSpec& s, const Vector& v) {
  return s.reaction_u ? power(v, s.p) : Vector::Zero(v.size());
}

Vector reaction_v(const SystemSpec& s, const Vector& u) {
  return s.reaction_v ? power(u, s.q) : Vector::Zero(u.size());
}

std::vector<double> landing_times(const SolverOptions& o) {
  std::vector<double> out;
  for (double t : o.output_times) {
    if (t > 0.0 && t < o.horizon) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  // accumulated grids land a rounding error away from each other or the horizon
  const double eps = 1e-12 * std::max(1.0, o.horizon);
  out.erase(std::unique(out.begin(), out.end(), [eps](double a, double b) { return b - a <= eps; }), out.end());
  while (!out.empty() && o.horizon - out.back() <= eps) out.pop_back();
  out.push_back(o.horizon);
  return out;
}

class Recorder {
 public:
  Recorder(Trajectory& tr, const SolverOptions& o) : tr_(tr), record_all_(o.record_all), lands_(landing_times(o)) {}

  // Returns true when the sup norm crossed the threshold.
  bool push(double t, const Vector& u, const Vector& v, double threshold, bool landed) {
    const double s = std::max(sup(u), sup(v));
    tr_.sup_times.push_back(t);
    tr_.sup_values.push_back(s);
    if (u.size() > 0) tr_.min_value = std::min({tr_.min_value, u.minCoeff(), v.minCoeff()});
    const bool crossed = s > threshold;
    if (record_all_ || landed || crossed || tr_.times.empty()) {
      tr_.times.push_back(t);
      tr_.u.push_back(u);
      tr_.v.push_back(v);
    }
    if (crossed && !tr_.t_cross) tr_.t_cross = t;
    return crossed;
  }

  void finish(double t, const Vector& u, const Vector& v) {
    if (tr_.times.empty() || tr_.times.back() != t) {
      tr_.times.push_back(t);
      tr_.u.push_back(u);
      tr_.v.push_back(v);
    }
  }

  const std::vector<double>& lands() const { return lands_; }

 private:
  Trajectory& tr_;
  bool record_all_;
  std::vector<double> lands_;
};

void fit_tail(Trajectory& tr, double threshold) {
  if (tr.status != TrajectoryStatus::blowup_detected) return;
  try {
    const auto b = blowup_detect(tr, threshold);
    if (!b.degenerate && b.fit_points > 0) {
      tr.t_star = b.t_star;
      tr.alpha = b.alpha;
    }
  } catch (const Error&) {
  }
}

}  // namespace

Trajectory picard_solve(const SystemSpec& sys, const SolverOptions& o) {
  validate(sys);
  const auto& graph = *sys.graph;
  if (graph.size() > o.dense_limit) {
    throw Error(ErrorCode::KernelUnavailable, "picard needs a dense spectral kernel; graph exceeds the dense limit");
  }
  const SpectralDecomposition sd(graph, sys.boundary);
  const Matrix& Q = sd.eigenvectors();
  const Vector& lambda = sd.eigenvalues();
  const Vector& sm = sd.sqrt_measure();
  const Eigen::Index n = static_cast<Eigen::Index>(graph.size());

  Trajectory tr;
  tr.solver = Solver::picard;
  Recorder rec(tr, o);
  const auto& lands = rec.lands();
  std::size_t next = 0;
  Vector U = sys.u0, V = sys.v0;
  double t = 0.0;
  const double data_sup = std::max(sup(sys.u0), sup(sys.v0));
  if (rec.push(0.0, U, V, o.threshold, true)) {
    tr.status = TrajectoryStatus::blowup_detected;
    tr.stop_reason = "threshold";
    return tr;
  }

  while (t < o.horizon) {
    while (next < lands.size() && lands[next] <= t) ++next;
    const double target = lands[next];
    const double M = 2.0 * std::max(data_sup, std::max(sup(U), sup(V)));
    const double lip = std::max(sys.p * std::pow(2.0 * M, sys.p - 1.0), sys.q * std::pow(2.0 * M, sys.q - 1.0));
    double T = std::min(o.max_window, target - t);
    if (lip > 0.0) T = std::min(T, o.contraction_safety / lip);
    const double tol = o.picard_tolerance * std::max(1.0, M);

    bool accepted = false;
    Matrix Uj, Vj;
    WindowDiagnostics diag;
    std::size_t N = 0;
    while (!accepted) {
      if (T < o.min_window * std::max(1.0, t)) break;
      N = std::max<std::size_t>(o.min_substeps, static_cast<std::size_t>(std::ceil(T / o.max_substep - 1e-9)));
      const double h = T / static_cast<double>(N);
      const Eigen::Index cols = static_cast<Eigen::Index>(N) + 1;
      const Vector E = (h * lambda).array().exp().matrix();
      // heat evolution of the window's initial data at every node
      Matrix linU(n, cols), linV(n, cols);
      {
        Vector cu = Q.transpose() * sm.cwiseProduct(U);
        Vector cv = Q.transpose() * sm.cwiseProduct(V);
        Matrix cu_all(n, cols), cv_all(n, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
          cu_all.col(j) = cu;
          cv_all.col(j) = cv;
          cu = cu.cwiseProduct(E);
          cv = cv.cwiseProduct(E);
        }
        linU = (Q * cu_all).array().colwise() / sm.array();
        linV = (Q * cv_all).array().colwise() / sm.array();
        linU.col(0) = U;
        linV.col(0) = V;
      }
      Uj = U.replicate(1, cols);
      Vj = V.replicate(1, cols);
      double previous = kInfinity;
      diag = WindowDiagnostics{};
      bool converged = false;
      for (std::size_t it = 1; it <= o.picard_max_iterations; ++it) {
        Matrix Fu(n, cols), Fv(n, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
          Fu.col(j) = reaction_u(sys, Vj.col(j));
          Fv.col(j) = reaction_v(sys, Uj.col(j));
        }
        const Matrix cFu = Q.transpose() * (Fu.array().colwise() * sm.array()).matrix();
        const Matrix cFv = Q.transpose() * (Fv.array().colwise() * sm.array()).matrix();
        Matrix Su = Matrix::Zero(n, cols), Sv = Matrix::Zero(n, cols);
        for (Eigen::Index j = 1; j < cols; ++j) {
          Su.col(j) = (Su.col(j - 1) + 0.5 * h * cFu.col(j - 1)).cwiseProduct(E) + 0.5 * h * cFu.col(j);
          Sv.col(j) = (Sv.col(j - 1) + 0.5 * h * cFv.col(j - 1)).cwiseProduct(E) + 0.5 * h * cFv.col(j);
        }
        Matrix newU = linU + ((Q * Su).array().colwise() / sm.array()).matrix();
        Matrix newV = linV + ((Q * Sv).array().colwise() / sm.array()).matrix();
        newU.col(0) = U;
        newV.col(0) = V;
        const double diff = std::max((newU - Uj).cwiseAbs().maxCoeff(), (newV - Vj).cwiseAbs().maxCoeff());
        if (previous > 100.0 * tol && std::isfinite(previous) && previous > 0.0) {
          diag.contraction_factor = std::max(diag.contraction_factor, diff / previous);
        }
        previous = diff;
        Uj = std::move(newU);
        Vj = std::move(newV);
        diag.iterations = it;
        diag.residual = diff;
        if (!std::isfinite(diff)) break;
        if (diff <= tol) {
          converged = true;
          break;
        }
      }
      if (converged && diag.contraction_factor <= o.contraction_safety) {
        accepted = true;
      } else {
        T /= 2.0;
      }
    }
    if (!accepted) {
      tr.status = TrajectoryStatus::blowup_detected;
      tr.stop_reason = "ContractionStallsAtBlowup";
      break;
    }
    diag.t0 = t;
    diag.t1 = t + T;
    diag.substeps = N;
    diag.lipschitz = lip;
    tr.windows.push_back(diag);
    const double h = T / static_cast<double>(N);
    bool crossed = false;
    for (std::size_t j = 1; j <= N; ++j) {
      const double tj = j == N ? (target - t - T <= 1e-12 * std::max(1.0, target) ? target : t + T)
                               : t + h * static_cast<double>(j);
      const auto jj = static_cast<Eigen::Index>(j);
      const bool landed = j == N && tj == target;
      if (rec.push(tj, Uj.col(jj), Vj.col(jj), o.threshold, landed)) {
        U = Uj.col(jj);
        V = Vj.col(jj);
        t = tj;
        crossed = true;
        break;
      }
    }
    ++tr.steps;
    if (crossed) {
      tr.status = TrajectoryStatus::blowup_detected;
      tr.stop_reason = "threshold";
      break;
    }
    U = Uj.col(static_cast<Eigen::Index>(N));
    V = Vj.col(static_cast<Eigen::Index>(N));
    t = (target - t - T <= 1e-12 * std::max(1.0, target)) ? target : t + T;
  }
  rec.finish(t, U, V);
  fit_tail(tr, o.threshold);
  return tr;
}

Trajectory step_solve(const SystemSpec& sys, const SolverOptions& o) {
  validate(sys);
  if (o.solver == Solver::picard) throw Error(ErrorCode::InvalidArgument, "step_solve needs euler or rk4");
  const auto& graph = *sys.graph;
  const SparseMatrix L = laplacian(graph, sys.boundary);
  const double D = diagonal_bound(graph, sys.boundary);

  Trajectory tr;
  tr.solver = o.solver;
  Recorder rec(tr, o);
  const auto& lands = rec.lands();
  std::size_t next = 0;
  Vector U = sys.u0, V = sys.v0;
  double t = 0.0;
  if (rec.push(0.0, U, V, o.threshold, true)) {
    tr.status = TrajectoryStatus::blowup_detected;
    tr.stop_reason = "threshold";
    return tr;
  }
  auto rhs = [&](const Vector& u, const Vector& v, Vector& du, Vector& dv) {
    du = L * u + reaction_u(sys, v);
    dv = L * v + reaction_v(sys, u);
  };
  Vector k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
  while (t < o.horizon) {
    if (tr.steps >= o.max_steps) {
      tr.status = TrajectoryStatus::resource_limit;
      tr.stop_reason = "ResourceLimit";
      break;
    }
    while (next < lands.size() && lands[next] <= t) ++next;
    const double target = lands[next];
    const double su = sup(U), sv = sup(V);
    double dt = std::min(o.dt_max, o.reaction_cap / (1.0 + sys.p * std::pow(sv, sys.p - 1.0) +
                                                     sys.q * std::pow(su, sys.q - 1.0)));
    if (D > 0.0) dt = std::min(dt, o.stability_cap / (2.0 * D));
    bool land = false;
    if (t + dt * (1.0 + 1e-9) >= target) {
      dt = target - t;
      land = true;
    }
    Vector nu, nv;
    while (true) {
      if (dt < o.min_dt) break;
      rhs(U, V, k1u, k1v);
      if (o.solver == Solver::euler) {
        nu = U + dt * k1u;
        nv = V + dt * k1v;
      } else {
        rhs(U + 0.5 * dt * k1u, V + 0.5 * dt * k1v, k2u, k2v);
        rhs(U + 0.5 * dt * k2u, V + 0.5 * dt * k2v, k3u, k3v);
        rhs(U + dt * k3u, V + dt * k3v, k4u, k4v);
        nu = U + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        nv = V + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      }
      const bool ok = nu.allFinite() && nv.allFinite() &&
                      (nu.size() == 0 || std::min(nu.minCoeff(), nv.minCoeff()) >= -1e-12);
      if (ok) break;
      ++tr.rejected_steps;
      dt /= 2.0;
      land = false;
    }
    if (dt < o.min_dt) {
      tr.status = TrajectoryStatus::blowup_detected;
      tr.stop_reason = "DtUnderflow";
      break;
    }
    U = std::move(nu);
    V = std::move(nv);
    t = land ? target : t + dt;
    ++tr.steps;
    if (rec.push(t, U, V, o.threshold, land)) {
      tr.status = TrajectoryStatus::blowup_detected;
      tr.stop_reason = "threshold";
      break;
    }
  }
  rec.finish(t, U, V);
  fit_tail(tr, o.threshold);
  return tr;
}

Trajectory solve(const SystemSpec& sys, const SolverOptions& options) {
  return options.solver == Solver::picard ? picard_solve(sys, options) : step_solve(sys, options);
}

DuhamelReport duhamel_residual(const SystemSpec& sys, const Trajectory& tr, std::size_t dense_limit) {
  validate(sys);
  if (sys.graph->size() > dense_limit) {
    throw Error(ErrorCode::KernelUnavailable, "Duhamel residual needs a dense spectral kernel");
  }
  if (tr.times.empty() || tr.times.front() != 0.0) {
    throw Error(ErrorCode::GridMismatch, "trajectory must start at t = 0");
  }
  const SpectralDecomposition sd(*sys.graph, sys.boundary);
  const Matrix& Q = sd.eigenvectors();
  const Vector& lambda = sd.eigenvalues();
  const Vector& sm = sd.sqrt_measure();
  const Vector cu0 = Q.transpose() * sm.cwiseProduct(sys.u0);
  const Vector cv0 = Q.transpose() * sm.cwiseProduct(sys.v0);
  auto back = [&](const Vector& c) -> Vector { return (Q * c).cwiseQuotient(sm); };
  auto forward = [&](const Vector& f) -> Vector { return Q.transpose() * sm.cwiseProduct(f); };

  DuhamelReport report;
  const Eigen::Index n = lambda.size();
  Vector Su = Vector::Zero(n), Sv = Vector::Zero(n);
  Vector cfu = forward(reaction_u(sys, tr.v[0]));
  Vector cfv = forward(reaction_v(sys, tr.u[0]));
  report.max_residual = std::max(sup(tr.u[0] - sys.u0), sup(tr.v[0] - sys.v0));
  report.times_checked = 1;
  for (std::size_t k = 1; k < tr.times.size(); ++k) {
    const double h = tr.times[k] - tr.times[k - 1];
    const Vector E = (h * lambda).array().exp().matrix();
    const Vector nfu = forward(reaction_u(sys, tr.v[k]));
    const Vector nfv = forward(reaction_v(sys, tr.u[k]));
    Su = (Su + 0.5 * h * cfu).cwiseProduct(E) + 0.5 * h * nfu;
    Sv = (Sv + 0.5 * h * cfv).cwiseProduct(E) + 0.5 * h * nfv;
    cfu = nfu;
    cfv = nfv;
    const Vector Et = (tr.times[k] * lambda).array().exp().matrix();
    const double r = std::max(sup(tr.u[k] - back(cu0.cwiseProduct(Et) + Su)),
                              sup(tr.v[k] - back(cv0.cwiseProduct(Et) + Sv)));
    if (r > report.max_residual) {
      report.max_residual = r;
      report.worst_time = tr.times[k];
    }
    ++report.times_checked;
  }
  return report;
}

double trajectory_difference(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  std::size_t common = 0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const auto j = b.time_index(a.times[i]);
    if (!j) continue;
    ++common;
    worst = std::max({worst, sup(a.u[i] - b.u[*j]), sup(a.v[i] - b.v[*j])});
  }
  if (common == 0) throw Error(ErrorCode::GridMismatch, "trajectories share no recorded time");
  return worst;
}

ComparisonReport comparison_audit(const SystemSpec& lower, const SystemSpec& upper, double horizon,
                                  const SolverOptions& o) {
  validate(lower);
  validate(upper);
  if (lower.graph != upper.graph && lower.graph->content_hash() != upper.graph->content_hash()) {
    throw Error(ErrorCode::GraphMismatch, "comparison needs one graph");
  }
  if (lower.p != upper.p || lower.q != upper.q || lower.boundary != upper.boundary) {
    throw Error(ErrorCode::InvalidArgument, "comparison needs shared exponents and boundary");
  }
  const SparseMatrix L = laplacian(*lower.graph, lower.boundary);
  const double D = diagonal_bound(*lower.graph, lower.boundary);
  ComparisonReport report;
  Vector u1 = lower.u0, v1 = lower.v0, u2 = upper.u0, v2 = upper.v0;
  auto violation = [&] {
    if (u1.size() == 0) return 0.0;
    return std::max((u1 - u2).maxCoeff(), (v1 - v2).maxCoeff());
  };
  report.max_violation = violation();
  double t = 0.0;
  while (t < horizon) {
    if (report.steps >= o.max_steps) break;
    const double su = std::max(sup(u1), sup(u2)), sv = std::max(sup(v1), sup(v2));
    if (su > o.threshold || sv > o.threshold) {
      report.stopped_by_blowup = true;
      break;
    }
    double dt = std::min(o.dt_max, o.reaction_cap / (1.0 + lower.p * std::pow(sv, lower.p - 1.0) +
                                                     lower.q * std::pow(su, lower.q - 1.0)));
    if (D > 0.0) dt = std::min(dt, o.stability_cap / (2.0 * D));
    if (dt < o.min_dt) {
      report.stopped_by_blowup = true;
      break;
    }
    bool land = false;
    if (t + dt * (1.0 + 1e-9) >= horizon) {
      dt = horizon - t;
      land = true;
    }
    Vector nu1 = u1 + dt * (L * u1 + reaction_u(lower, v1));
    Vector nv1 = v1 + dt * (L * v1 + reaction_v(lower, u1));
    Vector nu2 = u2 + dt * (L * u2 + reaction_u(upper, v2));
    Vector nv2 = v2 + dt * (L * v2 + reaction_v(upper, u2));
    u1 = std::move(nu1);
    v1 = std::move(nv1);
    u2 = std::move(nu2);
    v2 = std::move(nv2);
    t = land ? horizon : t + dt;
    ++report.steps;
    report.max_violation = std::max(report.max_violation, violation());
  }
  report.final_time = t;
  report.pass = report.max_violation <= report.slack;
  return report;
}

namespace {

struct TailData {
  std::vector<double> t;
  std::vector<double> y;  // log sup
};

struct TailFit {
  double rss = 0.0;
  double alpha = 0.0;
  double log_c = 0.0;
};

TailFit fit_for_gap(const TailData& d, double t_star) {
  std::vector<double> x(d.t.size());
  for (std::size_t i = 0; i < d.t.size(); ++i) x[i] = std::log(t_star - d.t[i]);
  const auto line = fit_line(x, d.y);
  TailFit f;
  f.alpha = -line.slope;
  f.log_c = line.intercept;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = d.y[i] - (line.intercept + line.slope * x[i]);
    f.rss += r * r;
  }
  return f;
}

struct GapContext {
  const TailData* data;
  double t_end;
};

double gap_objective(double log_gap, void* params) {
  const auto* ctx = static_cast<const GapContext*>(params);
  return fit_for_gap(*ctx->data, ctx->t_end + std::exp(log_gap)).rss;
}

}  // namespace

BlowupReport blowup_detect(const Trajectory& tr, double threshold) {
  const auto& ts = tr.sup_times.empty() ? tr.times : tr.sup_times;
  std::vector<double> ss = tr.sup_values;
  if (tr.sup_times.empty()) {
    for (std::size_t i = 0; i < tr.times.size(); ++i) ss.push_back(std::max(sup(tr.u[i]), sup(tr.v[i])));
  }
  if (ts.empty()) throw Error(ErrorCode::NoGrowthDetected, "empty trajectory");
  BlowupReport report;
  if (ss.front() > threshold) {
    report.crossed = true;
    report.degenerate = true;
    report.t_cross = ts.front();
    return report;
  }
  std::size_t end = ss.size() - 1;
  for (std::size_t i = 0; i < ss.size(); ++i) {
    if (ss[i] > threshold) {
      report.crossed = true;
      report.t_cross = ts[i];
      end = i;
      break;
    }
  }
  // The tail must be growing: at least a decade above the run's minimum after it.
  const std::size_t argmin = static_cast<std::size_t>(std::min_element(ss.begin(), ss.begin() + end + 1) - ss.begin());
  if (!report.crossed && (ss[end] < 10.0 * ss[argmin] || ss[argmin] <= 0.0 || argmin == end)) {
    throw Error(ErrorCode::NoGrowthDetected, "sup norm is not growing at the end of the run");
  }
  if (ss[end] <= 0.0) throw Error(ErrorCode::NoGrowthDetected, "zero solution");
  TailData d;
  for (double floor = ss[end] / 10.0;; floor /= 10.0) {
    d.t.clear();
    d.y.clear();
    for (std::size_t i = argmin; i <= end; ++i) {
      if (ss[i] >= floor && ss[i] > 0.0) {
        d.t.push_back(ts[i]);
        d.y.push_back(std::log(ss[i]));
      }
    }
    if (d.t.size() >= 5 || floor < ss[argmin]) break;
  }
  if (d.t.size() < 3) throw Error(ErrorCode::NoGrowthDetected, "too few points in the growth tail");
  const double t_end = d.t.back();
  const double span = std::max(t_end - d.t.front(), 1e-300);
  GapContext ctx{&d, t_end};

  const double lo = std::log(span * 1e-6), hi = std::log(span * 1e3);
  constexpr int kGrid = 400;
  int best = 0;
  double best_val = kInfinity;
  std::vector<double> g(kGrid + 1), f(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) {
    g[i] = lo + (hi - lo) * i / kGrid;
    f[i] = gap_objective(g[i], &ctx);
    if (f[i] < best_val) {
      best_val = f[i];
      best = i;
    }
  }
  double log_gap = g[best];
  if (best > 0 && best < kGrid && f[best] < f[best - 1] && f[best] < f[best + 1]) {
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    gsl_function fn{&gap_objective, &ctx};
    gsl_min_fminimizer* m = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
    if (gsl_min_fminimizer_set_with_values(m, &fn, g[best], f[best], g[best - 1], f[best - 1], g[best + 1],
                                           f[best + 1]) == GSL_SUCCESS) {
      for (int it = 0; it < 200; ++it) {
        if (gsl_min_fminimizer_iterate(m) != GSL_SUCCESS) break;
        if (gsl_min_test_interval(gsl_min_fminimizer_x_lower(m), gsl_min_fminimizer_x_upper(m), 1e-12, 0.0) ==
            GSL_SUCCESS)
          break;
      }
      log_gap = gsl_min_fminimizer_x_minimum(m);
    }
    gsl_min_fminimizer_free(m);
    gsl_set_error_handler(old);
  }
  const auto fit = fit_for_gap(d, t_end + std::exp(log_gap));
  report.t_star = t_end + std::exp(log_gap);
  report.alpha = fit.alpha;
  report.log_constant = fit.log_c;
  report.fit_points = d.t.size();
  report.fit_rms = std::sqrt(fit.rss / static_cast<double>(d.t.size()));
  return report;
}

namespace {

// Relative mass lost by the Dirichlet heat flow of u0 + v0 up to the horizon.
double linear_defect(const SystemSpec& sys, double horizon) {
  if (!sys.graph->is_truncation()) return 0.0;
  const Vector f = sys.u0 + sys.v0;
  const auto mu = sys.graph->measure();
  double mass = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) mass += mu[static_cast<std::size_t>(i)] * f[i];
  if (mass == 0.0) return 0.0;
  const Vector g = taylor_action(*sys.graph, Boundary::dirichlet, f, horizon);
  double after = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) after += mu[static_cast<std::size_t>(i)] * g[i];
  return std::max(0.0, 1.0 - after / mass);
}

struct Weighted {
  std::vector<double> times, wu, wv;
};

Weighted weighted_norms(const SystemSpec& sys, const ExponentProfile& e, const Trajectory& tr,
                        const std::vector<double>& times) {
  // canonical u carries (s1, w); with swapped exponents the roles of u and v flip
  const double su = e.swapped ? e.s2 : e.s1, wu = e.swapped ? e.w1 : e.w;
  const double sv = e.swapped ? e.s1 : e.s2, wv = e.swapped ? e.w : e.w1;
  Weighted out;
  const auto mu = sys.graph->measure();
  for (double t : times) {
    const auto k = tr.time_index(t);
    if (!k) continue;
    out.times.push_back(t);
    out.wu.push_back(std::pow(t, wu) * lp_norm(mu, tr.u[*k], su));
    out.wv.push_back(std::pow(t, wv) * lp_norm(mu, tr.v[*k], sv));
  }
  return out;
}

std::vector<double> dyadic_from(double t_min, double horizon) {
  std::vector<double> out;
  for (double t = t_min; t <= horizon * (1 + 1e-12); t *= 2.0) out.push_back(t);
  return out;
}

void check_profile_matches(const SystemSpec& sys, const ExponentProfile& e) {
  const double p = e.swapped ? e.q : e.p, q = e.swapped ? e.p : e.q;
  if (std::abs(p - sys.p) > 1e-12 || std::abs(q - sys.q) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "profile exponents differ from the system's");
  }
}

}  // namespace

GlobalDecayReport global_decay_audit(const SystemSpec& sys, const ExponentProfile& profile,
                                     const DecayAuditOptions& options) {
  validate(sys);
  require_subcritical(profile);
  check_profile_matches(sys, profile);
  GlobalDecayReport report;
  report.profile = profile;
  report.max_mass_defect = linear_defect(sys, options.horizon);
  if (report.max_mass_defect > options.defect_tolerance) {
    throw Error(ErrorCode::ContaminatedWindow, "data loses " + std::to_string(report.max_mass_defect) +
                                                   " of its heat mass through the boundary before the horizon");
  }
  const auto times = dyadic_from(options.t_min, options.horizon);
  SolverOptions so = options.solver;
  so.horizon = options.horizon;
  so.threshold = options.threshold;
  so.output_times = times;
  so.record_all = false;
  const auto tr = solve(sys, so);
  report.status = tr.status;
  report.max_sup = tr.sup_values.empty() ? 0.0 : *std::max_element(tr.sup_values.begin(), tr.sup_values.end());
  const auto w = weighted_norms(sys, profile, tr, times);
  report.times = w.times;
  report.weighted_u = w.wu;
  report.weighted_v = w.wv;
  report.ratio_u = decade_ratio(w.times, w.wu);
  report.ratio_v = decade_ratio(w.times, w.wv);
  report.bounded = report.ratio_u <= report.ratio_tolerance && report.ratio_v <= report.ratio_tolerance;
  report.pass = tr.status == TrajectoryStatus::completed && report.max_sup <= options.threshold &&
                report.bounded && w.times.size() == times.size();
  return report;
}

SweepReport fujita_sweep(GraphPtr graph, Boundary boundary, double growth_degree, const std::vector<double>& p_grid,
                         const std::vector<double>& q_grid, const std::vector<double>& scales,
                         const Vector& u_shape, const Vector& v_shape, const SweepOptions& options) {
  SweepReport report;
  report.growth_degree = growth_degree;
  const double m = growth_degree;
  for (double p : p_grid) {
    if (m * p / 2.0 > 1.0) {
      const double q = (1.0 + m / 2.0) / (m * p / 2.0 - 1.0);
      if (q >= p && q >= 1.0) report.theoretical_curve.emplace_back(p, q);
    }
    const double q = (2.0 * (p + 1.0) / m + 1.0) / p;
    if (q >= 1.0 && q < p) report.theoretical_curve.emplace_back(p, q);
  }
  for (double p : p_grid)
    for (double q : q_grid)
      for (double s : scales) {
        if (!(p * q > 1.0) || p < 1.0 || q < 1.0) continue;
        SweepCell c;
        c.p = p;
        c.q = q;
        c.scale = s;
        report.cells.push_back(c);
      }
  if (report.cells.empty()) return report;

  SystemSpec base;
  base.graph = graph;
  base.boundary = boundary;
  base.u0 = u_shape;
  base.v0 = v_shape;
  const double defect = linear_defect(base, options.horizon);
  const auto times = dyadic_from(1.0, options.horizon);

  parallel_for(report.cells.size(), options.threads ? options.threads : default_threads(), [&](std::size_t i) {
    auto& c = report.cells[i];
    const auto e = exponent_profile(c.p, c.q, m);
    c.critical_ratio = e.critical_ratio;
    c.regime = e.regime;
    SystemSpec sys = base;
    sys.p = c.p;
    sys.q = c.q;
    sys.u0 = c.scale * u_shape;
    sys.v0 = c.scale * v_shape;
    SolverOptions so = options.solver;
    so.horizon = options.horizon;
    so.threshold = options.threshold;
    so.output_times = times;
    so.record_all = false;
    const auto tr = solve(sys, so);
    c.t_cross = tr.t_cross;
    c.max_sup = tr.sup_values.empty() ? 0.0 : *std::max_element(tr.sup_values.begin(), tr.sup_values.end());
    if (tr.status == TrajectoryStatus::blowup_detected) {
      c.verdict = CellVerdict::blowup;
      c.note = tr.stop_reason;
      return;
    }
    if (tr.status == TrajectoryStatus::resource_limit) {
      c.note = "resource limit";
      return;
    }
    if (!e.has_ledger) {
      c.note = "no blowup before the horizon in the blowup regime";
      return;
    }
    if (defect > 1e-6) {
      c.note = "truncation boundary reached before the horizon";
      return;
    }
    const auto w = weighted_norms(sys, e, tr, times);
    c.weighted_ratio = std::max(decade_ratio(w.times, w.wu), decade_ratio(w.times, w.wv));
    if (c.weighted_ratio <= 2.0) {
      c.verdict = CellVerdict::global_horizon;
    } else {
      c.note = "weighted norms still growing";
    }
  });
  return report;
}

ScaleSearch smallness_bisection(const SystemSpec& shape, double lo, double hi, std::size_t iterations,
                                const SweepOptions& options) {
  if (!(lo > 0.0) || !(hi > lo)) throw Error(ErrorCode::InvalidArgument, "need 0 < lo < hi");
  ScaleSearch out;
  SolverOptions so = options.solver;
  so.horizon = options.horizon;
  so.threshold = options.threshold;
  so.record_all = false;
  auto blows = [&](double s) {
    SystemSpec sys = shape;
    sys.u0 = s * shape.u0;
    sys.v0 = s * shape.v0;
    ++out.runs;
    return solve(sys, so).status == TrajectoryStatus::blowup_detected;
  };
  if (blows(lo)) {
    out.blowup_scale = lo;
    return out;
  }
  out.global_scale = lo;
  if (!blows(hi)) {
    out.global_scale = hi;
    return out;
  }
  out.blowup_scale = hi;
  for (std::size_t i = 0; i < iterations; ++i) {
    const double mid = std::sqrt(out.global_scale * out.blowup_scale);
    if (blows(mid)) {
      out.blowup_scale = mid;
    } else {
      out.global_scale = mid;
    }
  }
  return out;
}

}  // namespace heatgraph
