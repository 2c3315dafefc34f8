#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heatgraph/exponents.hpp"
#include "heatgraph/heat_kernel.hpp"

namespace heatgraph {

// u_t = Delta u + v^p, v_t = Delta v + u^q with nonnegative bounded data.
struct SystemSpec {
  GraphPtr graph;
  Boundary boundary = Boundary::natural;
  double p = 2.0;
  double q = 2.0;
  Vector u0;
  Vector v0;
  // Test harness switches: drop v^p from the u equation / u^q from the v equation.
  bool reaction_u = true;
  bool reaction_v = true;
};

// GraphMismatch for wrong data sizes, InvalidArgument for negative data,
// NonIntegrablePower for p or q below 1, InvalidExponent for pq <= 1.
void validate(const SystemSpec& sys);

enum class Solver { picard, euler, rk4 };
enum class TrajectoryStatus { completed, blowup_detected, resource_limit };

std::string_view to_string(Solver solver) noexcept;
std::string_view to_string(TrajectoryStatus status) noexcept;
Solver parse_solver(std::string_view name);

struct SolverOptions {
  Solver solver = Solver::rk4;
  double horizon = 1.0;
  // Sup-norm level treated as blowup.
  double threshold = 1e8;
  // Times the solver must land on exactly (sorted internally).
  std::vector<double> output_times;
  // Keep every node/step; otherwise only t = 0, output times and the last state.
  bool record_all = true;

  // Picard windows.
  double max_window = 0.25;
  double contraction_safety = 0.5;  // T_step * Lipschitz <= this
  double max_substep = 1.0 / 64.0;
  std::size_t min_substeps = 32;
  double picard_tolerance = 1e-10;  // relative to max(1, M)
  std::size_t picard_max_iterations = 200;
  double min_window = 1e-13;
  std::size_t dense_limit = 2000;

  // Explicit stepping.
  double stability_cap = 0.5;
  double reaction_cap = 0.1;
  double dt_max = 1.0 / 64.0;
  double min_dt = 1e-14;
  std::size_t max_steps = 20'000'000;
};

struct WindowDiagnostics {
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t substeps = 0;
  std::size_t iterations = 0;
  double lipschitz = 0.0;
  double contraction_factor = 0.0;  // largest measured iterate-difference ratio
  double residual = 0.0;            // last sup-norm iterate difference
};

struct Trajectory {
  Solver solver = Solver::rk4;
  std::vector<double> times;
  std::vector<Vector> u;
  std::vector<Vector> v;
  TrajectoryStatus status = TrajectoryStatus::completed;
  std::string stop_reason;  // empty, "threshold", "ContractionStallsAtBlowup", "DtUnderflow", ...
  // max(||u||_inf, ||v||_inf) after every node or step, recorded or not.
  std::vector<double> sup_times;
  std::vector<double> sup_values;
  std::vector<WindowDiagnostics> windows;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  double min_value = 0.0;  // smallest entry of u or v seen
  std::optional<double> t_cross;
  // Filled by the solvers when the run ends in blowup and the tail can be fitted.
  std::optional<double> t_star;
  std::optional<double> alpha;

  double final_time() const { return times.empty() ? 0.0 : times.back(); }
  std::optional<std::size_t> time_index(double t) const;
};

Trajectory picard_solve(const SystemSpec& sys, const SolverOptions& options);
Trajectory step_solve(const SystemSpec& sys, const SolverOptions& options);
// Dispatch on options.solver.
Trajectory solve(const SystemSpec& sys, const SolverOptions& options);

// Max over recorded times of the sup-norm gap between the trajectory and the
// Duhamel right-hand side, with composite trapezoid quadrature on the recorded
// grid. KernelUnavailable above the dense limit.
struct DuhamelReport {
  double max_residual = 0.0;
  double worst_time = 0.0;
  std::size_t times_checked = 0;
};

DuhamelReport duhamel_residual(const SystemSpec& sys, const Trajectory& trajectory,
                               std::size_t dense_limit = 2000);

// Largest |a - b| over the output times both runs landed on.
double trajectory_difference(const Trajectory& a, const Trajectory& b);

struct ComparisonReport {
  std::size_t steps = 0;
  double final_time = 0.0;
  double max_violation = 0.0;  // max of u1 - u2 and v1 - v2
  double slack = 1e-9;
  bool stopped_by_blowup = false;
  bool pass = false;
};

// Explicit Euler in lockstep from ordered data (u01 <= u02, v01 <= v02).
ComparisonReport comparison_audit(const SystemSpec& lower, const SystemSpec& upper, double horizon,
                                  const SolverOptions& options = {});

struct BlowupReport {
  bool crossed = false;
  bool degenerate = false;  // already above the threshold at t = 0
  double t_cross = 0.0;
  double t_star = 0.0;
  double alpha = 0.0;
  double log_constant = 0.0;
  std::size_t fit_points = 0;
  double fit_rms = 0.0;  // in log space
};

// Fits sup(t) ~ c (T* - t)^{-alpha} on the last decade of growth. Throws
// NoGrowthDetected when the sup norm is not growing at the end of the run.
BlowupReport blowup_detect(const Trajectory& trajectory, double threshold = 1e8);

struct DecayAuditOptions {
  double horizon = 64.0;
  double t_min = 1.0;
  double threshold = 1e8;
  // Linear mass defect allowed from the data support up to the horizon.
  double defect_tolerance = 1e-6;
  SolverOptions solver;
};

struct GlobalDecayReport {
  ExponentProfile profile;
  std::vector<double> times;
  std::vector<double> weighted_u;  // t^w ||u||_{s1}
  std::vector<double> weighted_v;  // t^{w1} ||v||_{s2}
  double ratio_u = 0.0;  // decade_ratio of the weighted norms
  double ratio_v = 0.0;
  double ratio_tolerance = 2.0;
  double max_sup = 0.0;
  double max_mass_defect = 0.0;
  TrajectoryStatus status = TrajectoryStatus::completed;
  bool bounded = false;
  bool pass = false;
};

// The weighted norms are measured at dyadic times t_min 2^j <= horizon.
// InfeasibleRegime for supercritical profiles; ContaminatedWindow when the
// heat flow of the data loses more than defect_tolerance through a Dirichlet
// boundary before the horizon.
GlobalDecayReport global_decay_audit(const SystemSpec& sys, const ExponentProfile& profile,
                                     const DecayAuditOptions& options = {});

enum class CellVerdict { blowup, global_horizon, undecided };
std::string_view to_string(CellVerdict verdict) noexcept;

struct SweepCell {
  double p = 0.0;
  double q = 0.0;
  double scale = 0.0;
  double critical_ratio = 0.0;
  Regime regime = Regime::supercritical_blowup;
  CellVerdict verdict = CellVerdict::undecided;
  std::optional<double> t_cross;
  double max_sup = 0.0;
  double weighted_ratio = 0.0;
  std::string note;
};

struct SweepOptions {
  double horizon = 64.0;
  double threshold = 1e8;
  SolverOptions solver;
  std::size_t threads = 0;
};

struct SweepReport {
  double growth_degree = 0.0;
  std::vector<SweepCell> cells;
  // (p, q) on the curve (max{p,q} + 1)/(pq - 1) = m/2 for each p in the grid,
  // q solving it when q >= 1 exists.
  std::vector<std::pair<double, double>> theoretical_curve;
};

// Data for a cell is scale * (u_shape, v_shape). Cells run in parallel.
SweepReport fujita_sweep(GraphPtr graph, Boundary boundary, double growth_degree,
                         const std::vector<double>& p_grid, const std::vector<double>& q_grid,
                         const std::vector<double>& scales, const Vector& u_shape, const Vector& v_shape,
                         const SweepOptions& options = {});

// Bisection on the data scale between a global-horizon scale and a blowup
// scale; returns the largest scale found global over the horizon.
struct ScaleSearch {
  double global_scale = 0.0;
  double blowup_scale = 0.0;
  std::size_t runs = 0;
};

ScaleSearch smallness_bisection(const SystemSpec& shape, double lo, double hi, std::size_t iterations,
                                const SweepOptions& options = {});

// amplitude at x, zero elsewhere.
Vector delta_data(const WeightedGraph& graph, std::size_t x, double amplitude);

}  // namespace heatgraph
