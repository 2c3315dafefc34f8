#include "heatgraph/heat_kernel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "heatgraph/error.hpp"

namespace heatgraph {

std::string_view to_string(KernelMethod method) noexcept {
  switch (method) {
    case KernelMethod::automatic: return "auto";
    case KernelMethod::eigen: return "eigen";
    case KernelMethod::taylor: return "taylor";
    case KernelMethod::krylov: return "krylov";
  }
  return "auto";
}

KernelMethod parse_kernel_method(std::string_view name) {
  if (name == "auto" || name == "automatic") return KernelMethod::automatic;
  if (name == "eigen") return KernelMethod::eigen;
  if (name == "taylor") return KernelMethod::taylor;
  if (name == "krylov") return KernelMethod::krylov;
  throw Error(ErrorCode::UsageError, "unknown kernel method '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// SpectralDecomposition

SpectralDecomposition::SpectralDecomposition(const WeightedGraph& graph, Boundary boundary) {
  const Matrix S = Matrix(symmetrized_laplacian(graph, boundary));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(S);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::KernelUnavailable, "eigendecomposition failed");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  sqrt_measure_.resize(static_cast<Eigen::Index>(graph.size()));
  for (std::size_t i = 0; i < graph.size(); ++i) {
    sqrt_measure_[static_cast<Eigen::Index>(i)] = std::sqrt(graph.measure(i));
  }
}

SpectralDecomposition::SpectralDecomposition(Vector eigenvalues, Matrix eigenvectors,
                                             Vector sqrt_measure)
    : eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      sqrt_measure_(std::move(sqrt_measure)) {}

Matrix SpectralDecomposition::kernel(double t) const {
  const Vector inv_sqrt = sqrt_measure_.cwiseInverse();
  const Matrix scaled =
      inv_sqrt.asDiagonal() * eigenvectors_ * (t * eigenvalues_).array().exp().matrix().asDiagonal();
  return scaled * (inv_sqrt.asDiagonal() * eigenvectors_).transpose();
}

Matrix SpectralDecomposition::kernel_time_derivative(double t) const {
  const Vector inv_sqrt = sqrt_measure_.cwiseInverse();
  const Vector weights = eigenvalues_.cwiseProduct((t * eigenvalues_).array().exp().matrix());
  const Matrix left = inv_sqrt.asDiagonal() * eigenvectors_;
  return left * weights.asDiagonal() * left.transpose();
}

Vector SpectralDecomposition::to_spectral(const Vector& f) const {
  return eigenvectors_.transpose() * sqrt_measure_.cwiseProduct(f);
}

Vector SpectralDecomposition::from_spectral(const Vector& c) const {
  return (eigenvectors_ * c).cwiseQuotient(sqrt_measure_);
}

Vector SpectralDecomposition::evolve(const Vector& f, double t) const {
  Vector c = to_spectral(f);
  c.array() *= (t * eigenvalues_).array().exp();
  return from_spectral(c);
}

double SpectralDecomposition::spectral_gap() const {
  // Eigen sorts ascending, so the top eigenvalue is the one closest to zero.
  const Eigen::Index n = eigenvalues_.size();
  const double top = eigenvalues_[n - 1];
  const double scale = std::max(1.0, std::abs(eigenvalues_[0]));
  if (std::abs(top) > 1e-10 * scale || n == 1) return std::abs(top);
  return std::abs(eigenvalues_[n - 2]);
}

// ---------------------------------------------------------------------------
// Exponential actions

namespace {

constexpr double kTaylorTail = 1e-32;
constexpr double kLogUnderflow = -745.0;

// e^{t A} f with A = Delta (possibly Dirichlet). Uses B = I + A / c >= 0
// entrywise and Poisson weights, so every partial sum is nonnegative for
// nonnegative f.
Vector uniformized_action(const SparseMatrix& A, double c, const Vector& f, double t) {
  if (t == 0.0 || c == 0.0) return f;
  const double lambda = c * t;
  Vector result = Vector::Zero(f.size());
  Vector term = f;
  double log_w = -lambda;
  for (std::size_t k = 0;; ++k) {
    const double w = std::exp(log_w);
    if (w > 0.0) result.noalias() += w * term;
    const double kk = static_cast<double>(k);
    const double next_log_w = log_w + std::log(lambda) - std::log(kk + 1.0);
    if (kk + 2.0 > lambda) {
      const double tail = std::exp(next_log_w) / (1.0 - lambda / (kk + 2.0));
      // Keep going while later terms can still reach new vertices with a
      // representable weight, so that positivity is not lost to truncation.
      const bool reaches_all = kk + 1.0 >= static_cast<double>(f.size()) - 1.0;
      if (tail < kTaylorTail && (reaches_all || next_log_w < kLogUnderflow)) break;
    }
    Vector next = term + (A * term) / c;
    term.swap(next);
    log_w = next_log_w;
  }
  return result;
}

Vector lanczos_action(const SparseMatrix& S, const Vector& w0, double t, double tol) {
  constexpr int kMaxBasis = 30;
  Vector w = w0;
  double beta = w.norm();
  if (t == 0.0 || beta == 0.0) return w;
  const double norm_bound = std::max(1e-300, S.cwiseAbs().toDense().rowwise().sum().maxCoeff());
  double done = 0.0;
  double tau = t;
  const Eigen::Index n = w.size();
  while (done < t) {
    tau = std::min(tau, t - done);
    Matrix V(n, kMaxBasis + 1);
    Vector alpha = Vector::Zero(kMaxBasis);
    Vector off = Vector::Zero(kMaxBasis);
    V.col(0) = w / beta;
    int m = kMaxBasis;
    bool breakdown = false;
    for (int j = 0; j < kMaxBasis; ++j) {
      Vector z = S * V.col(j);
      alpha[j] = V.col(j).dot(z);
      // Two passes of full reorthogonalization.
      for (int pass = 0; pass < 2; ++pass) {
        z -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * z);
      }
      off[j] = z.norm();
      if (off[j] <= 1e-14 * norm_bound) {
        m = j + 1;
        breakdown = true;
        break;
      }
      V.col(j + 1) = z / off[j];
    }
    Matrix T = Matrix::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = off[j];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> small(T);
    Vector y;
    for (;;) {
      const Vector e1 = small.eigenvectors().row(0).transpose();
      y = small.eigenvectors() * (tau * small.eigenvalues()).array().exp().matrix().cwiseProduct(e1);
      const double err = breakdown ? 0.0 : beta * off[m - 1] * std::abs(y[m - 1]);
      if (err <= tol * beta * std::max(tau / t, 1e-3) || tau < 1e-12 * t) break;
      tau *= 0.5;
    }
    w = beta * (V.leftCols(m) * y);
    done += tau;
    beta = w.norm();
    if (beta == 0.0) break;
    tau *= 2.0;
  }
  return w;
}

Vector sqrt_measure_of(const WeightedGraph& graph) {
  Vector s(static_cast<Eigen::Index>(graph.size()));
  for (std::size_t i = 0; i < graph.size(); ++i) s[static_cast<Eigen::Index>(i)] = std::sqrt(graph.measure(i));
  return s;
}

}  // namespace

Vector taylor_action(const WeightedGraph& graph, Boundary boundary, const Vector& f, double t,
                     double /*tolerance*/) {
  if (t < 0.0) throw Error(ErrorCode::TimeNegative, "t must be >= 0");
  return uniformized_action(laplacian(graph, boundary), diagonal_bound(graph, boundary), f, t);
}

Vector krylov_action(const WeightedGraph& graph, Boundary boundary, const Vector& f, double t,
                     double tolerance) {
  if (t < 0.0) throw Error(ErrorCode::TimeNegative, "t must be >= 0");
  const Vector s = sqrt_measure_of(graph);
  const Vector w = lanczos_action(symmetrized_laplacian(graph, boundary), s.cwiseProduct(f), t,
                                  tolerance);
  return w.cwiseQuotient(s);
}

Matrix taylor_exponential(const WeightedGraph& graph, Boundary boundary, double t) {
  if (t < 0.0) throw Error(ErrorCode::TimeNegative, "t must be >= 0");
  const auto n = static_cast<Eigen::Index>(graph.size());
  const double c = diagonal_bound(graph, boundary);
  if (t == 0.0 || c == 0.0) return Matrix::Identity(n, n);
  // Enough squarings that t D_mu / 2^s <= 1 and that kMinTerms terms of the
  // series, squared s times, reach every vertex.
  constexpr int kMinTerms = 18;
  const double reach = std::log2(std::max(1.0, static_cast<double>(n - 1) / kMinTerms));
  const int squarings = std::max({0, static_cast<int>(std::ceil(std::log2(c * t))),
                                  static_cast<int>(std::ceil(reach))});
  const double tau = std::ldexp(t, -squarings);
  const double x = c * tau;  // <= 1
  const Matrix B = Matrix::Identity(n, n) + Matrix(laplacian(graph, boundary)) / c;
  Matrix E = Matrix::Identity(n, n);
  Matrix power = Matrix::Identity(n, n);
  double coeff = 1.0;
  for (int k = 1; coeff > 1e-20 || k <= kMinTerms; ++k) {
    power = power * B;
    coeff *= x / k;
    E += coeff * power;
  }
  E *= std::exp(-x);
  for (int s = 0; s < squarings; ++s) E = E * E;
  return E;
}

std::vector<double> dyadic_grid(double t0, double t1) {
  if (!(t0 > 0.0) || t1 < t0) throw Error(ErrorCode::InvalidArgument, "dyadic grid needs 0 < t0 <= t1");
  std::vector<double> out;
  for (double t = t0; t <= t1 * (1.0 + 1e-12); t *= 2.0) out.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------
// HeatKernel

std::optional<std::size_t> HeatKernel::time_index(double t) const {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return k;
  }
  return std::nullopt;
}

std::optional<std::size_t> HeatKernel::source_column(std::size_t x) const {
  if (dense()) return x;
  auto it = std::find(sources.begin(), sources.end(), x);
  if (it == sources.end()) return std::nullopt;
  return static_cast<std::size_t>(it - sources.begin());
}

double HeatKernel::value(std::size_t k, std::size_t x, std::size_t y) const {
  if (auto j = source_column(x)) return slices[k](static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(*j));
  if (auto j = source_column(y)) return slices[k](static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(*j));
  throw Error(ErrorCode::KernelUnavailable, "neither vertex is a kernel source");
}

Vector HeatKernel::column(std::size_t k, std::size_t x) const {
  auto j = source_column(x);
  if (!j) throw Error(ErrorCode::KernelUnavailable, "vertex is not a kernel source");
  return slices[k].col(static_cast<Eigen::Index>(*j));
}

Vector HeatKernel::apply(std::size_t k, const Vector& g) const {
  Vector out = Vector::Zero(slices[k].rows());
  std::vector<char> covered(graph->size(), 0);
  for (std::size_t j = 0; j < sources.size(); ++j) {
    const std::size_t y = sources[j];
    covered[y] = 1;
    const double gy = g[static_cast<Eigen::Index>(y)];
    if (gy != 0.0) out.noalias() += (gy * graph->measure(y)) * slices[k].col(static_cast<Eigen::Index>(j));
  }
  for (std::size_t y = 0; y < graph->size(); ++y) {
    if (!covered[y] && g[static_cast<Eigen::Index>(y)] != 0.0) {
      throw Error(ErrorCode::KernelUnavailable, "function support exceeds kernel sources");
    }
  }
  return out;
}

HeatKernel compute_kernel(GraphPtr graph, std::vector<double> times, KernelMethod method,
                          const KernelOptions& options) {
  if (!graph) throw Error(ErrorCode::InvalidArgument, "null graph");
  for (double t : times) {
    if (!(t >= 0.0)) throw Error(ErrorCode::TimeNegative, "kernel times must be >= 0");
  }
  const std::size_t n = graph->size();
  if (method == KernelMethod::automatic) {
    method = n <= options.dense_limit ? KernelMethod::eigen : KernelMethod::krylov;
  }
  HeatKernel kernel;
  kernel.graph = graph;
  kernel.times = times;
  kernel.method = method;
  kernel.boundary = options.boundary;
  kernel.provenance.generator = graph->metadata().generator;
  kernel.provenance.radius = graph->metadata().truncation_radius;
  if (options.sources.empty()) {
    kernel.sources.resize(n);
    std::iota(kernel.sources.begin(), kernel.sources.end(), 0);
  } else {
    kernel.sources = options.sources;
    for (std::size_t s : kernel.sources) {
      if (s >= n) throw Error(ErrorCode::UnknownVertex, "kernel source out of range");
    }
  }
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(kernel.sources.size());
  kernel.slices.assign(times.size(), Matrix());

  Vector inv_mu(rows);
  for (std::size_t i = 0; i < n; ++i) inv_mu[static_cast<Eigen::Index>(i)] = 1.0 / graph->measure(i);

  auto delta_slice = [&]() {
    Matrix P = Matrix::Zero(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto s = static_cast<Eigen::Index>(kernel.sources[static_cast<std::size_t>(j)]);
      P(s, j) = inv_mu[s];
    }
    return P;
  };
  auto select_columns = [&](const Matrix& full) {
    if (kernel.dense()) return full;
    Matrix P(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      P.col(j) = full.col(static_cast<Eigen::Index>(kernel.sources[static_cast<std::size_t>(j)]));
    }
    return P;
  };

  const double d_mu = diagonal_bound(*graph, options.boundary);

  if (method == KernelMethod::eigen) {
    auto spectral = std::make_shared<const SpectralDecomposition>(*graph, options.boundary);
    kernel.spectral = spectral;
    for (std::size_t k = 0; k < times.size(); ++k) {
      kernel.slices[k] = times[k] == 0.0 ? delta_slice() : select_columns(spectral->kernel(times[k]));
    }
  } else if (method == KernelMethod::taylor && !options.scaling_and_squaring) {
    const Matrix A = Matrix(laplacian(*graph, options.boundary));
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double t = times[k];
      if (t * d_mu > 10.0) {
        throw Error(ErrorCode::SeriesDivergenceGuard,
                    "unscaled Taylor series requested with t*D_mu = " + std::to_string(t * d_mu));
      }
      Matrix E = Matrix::Identity(rows, rows);
      Matrix term = Matrix::Identity(rows, rows);
      for (int j = 1; j < 400; ++j) {
        term = (t / j) * (A * term);
        E += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
      }
      kernel.slices[k] = select_columns(E * inv_mu.asDiagonal());
    }
  } else if (method == KernelMethod::taylor && kernel.dense() && n <= options.dense_limit) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      kernel.slices[k] = times[k] == 0.0
                             ? delta_slice()
                             : Matrix(taylor_exponential(*graph, options.boundary, times[k]) *
                                      inv_mu.asDiagonal());
    }
  } else {
    // Column-by-column exponential action, marching through the sorted grid.
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    for (auto& slice : kernel.slices) slice.resize(rows, cols);
    const SparseMatrix A = laplacian(*graph, options.boundary);
    const SparseMatrix S = symmetrized_laplacian(*graph, options.boundary);
    const Vector sqrt_mu = sqrt_measure_of(*graph);
    for (Eigen::Index j = 0; j < cols; ++j) {
      const std::size_t s = kernel.sources[static_cast<std::size_t>(j)];
      Vector v = Vector::Zero(rows);
      v[static_cast<Eigen::Index>(s)] = inv_mu[static_cast<Eigen::Index>(s)];
      double current = 0.0;
      for (std::size_t k : order) {
        const double dt = times[k] - current;
        if (dt > 0.0) {
          if (method == KernelMethod::taylor) {
            v = uniformized_action(A, d_mu, v, dt);
          } else {
            v = lanczos_action(S, sqrt_mu.cwiseProduct(v), dt, options.action_tolerance)
                    .cwiseQuotient(sqrt_mu);
          }
          current = times[k];
        }
        kernel.slices[k].col(j) = v;
      }
    }
  }

  kernel.mass_defect.resize(static_cast<Eigen::Index>(times.size()), cols);
  Vector mu(rows);
  for (std::size_t i = 0; i < n; ++i) mu[static_cast<Eigen::Index>(i)] = graph->measure(i);
  for (std::size_t k = 0; k < times.size(); ++k) {
    kernel.mass_defect.row(static_cast<Eigen::Index>(k)) =
        (1.0 - (mu.transpose() * kernel.slices[k]).array()).matrix();
  }
  return kernel;
}

// ---------------------------------------------------------------------------
// Audits

bool KernelAuditReport::pass() const {
  return std::all_of(items.begin(), items.end(), [](const AuditItem& i) { return i.pass; });
}

std::vector<std::pair<double, double>> semigroup_pairs(const std::vector<double>& times) {
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = i; j < times.size(); ++j) {
      const double sum = times[i] + times[j];
      for (double t : times) {
        if (std::abs(t - sum) <= 1e-12 * std::max(1.0, sum)) {
          pairs.emplace_back(times[i], times[j]);
          break;
        }
      }
    }
  }
  return pairs;
}

SemigroupReport semigroup_audit(const HeatKernel& kernel,
                                const std::vector<std::pair<double, double>>& pairs,
                                std::optional<double> tolerance) {
  if (!kernel.dense()) throw Error(ErrorCode::KernelUnavailable, "semigroup audit needs a dense kernel");
  SemigroupReport report;
  report.tolerance = tolerance.value_or(kernel.method == KernelMethod::krylov ? 1e-6 : 1e-8);
  Vector mu(static_cast<Eigen::Index>(kernel.graph->size()));
  for (std::size_t i = 0; i < kernel.graph->size(); ++i) mu[static_cast<Eigen::Index>(i)] = kernel.graph->measure(i);
  for (const auto& [t, s] : pairs) {
    auto kt = kernel.time_index(t);
    auto ks = kernel.time_index(s);
    auto kts = kernel.time_index(t + s);
    if (!kt || !ks || !kts) throw Error(ErrorCode::GridMismatch, "t, s and t+s must be on the grid");
    const Matrix lhs = kernel.slices[*kt].transpose() * mu.asDiagonal() * kernel.slices[*ks];
    const Matrix& rhs = kernel.slices[*kts];
    const double scale = rhs.cwiseAbs().maxCoeff();
    report.max_relative_error =
        std::max(report.max_relative_error, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
    ++report.pairs_checked;
  }
  report.pass = report.max_relative_error <= report.tolerance;
  return report;
}

SeriesReport series_vs_eigen_audit(const WeightedGraph& graph, const Vector& u, double t,
                                   std::size_t max_terms, bool scaling) {
  if (t < 0.0) throw Error(ErrorCode::TimeNegative, "t must be >= 0");
  const double d_mu = graph_scalars(graph).d_mu;
  if (!scaling && t * d_mu > 10.0) {
    throw Error(ErrorCode::SeriesDivergenceGuard,
                "t*D_mu = " + std::to_string(t * d_mu) + " exceeds 10 without scaling");
  }
  SeriesReport report;
  report.scaled = scaling;
  const SpectralDecomposition spectral(graph, Boundary::natural);
  const Vector reference = spectral.evolve(u, t);
  const SparseMatrix A = laplacian(graph);
  double tau = t;
  if (scaling && t * d_mu > 1.0) {
    report.squarings = static_cast<std::size_t>(std::ceil(std::log2(t * d_mu)));
    tau = std::ldexp(t, -static_cast<int>(report.squarings));
  }
  const std::size_t repeats = std::size_t{1} << report.squarings;
  const double u_sup = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
  for (std::size_t K = 0; K <= max_terms; ++K) {
    Vector v = u;
    for (std::size_t r = 0; r < repeats; ++r) {
      Vector sum = v;
      Vector term = v;
      for (std::size_t k = 1; k <= K; ++k) {
        term = (tau / static_cast<double>(k)) * (A * term);
        sum += term;
      }
      v = sum;
    }
    const double err = (v - reference).cwiseAbs().maxCoeff();
    report.errors.push_back(err);
    if (!report.terms_needed && err <= 1e-10) {
      report.terms_needed = K;
      double bound = u_sup * static_cast<double>(repeats);
      for (std::size_t k = 1; k <= K + 1; ++k) bound *= 2.0 * d_mu * tau / static_cast<double>(k);
      report.tail_bound = bound;
    }
  }
  report.final_error = report.errors.back();
  return report;
}

ResidualReport heat_equation_residual(const HeatKernel& kernel, std::size_t k) {
  if (k >= kernel.times.size()) throw Error(ErrorCode::GridMismatch, "time index out of range");
  ResidualReport report;
  const auto cols = static_cast<Eigen::Index>(kernel.sources.size());
  Matrix derivative;
  if (kernel.spectral) {
    report.exact_derivative = true;
    const Matrix full = kernel.spectral->kernel_time_derivative(kernel.times[k]);
    derivative.resize(full.rows(), cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      derivative.col(j) = full.col(static_cast<Eigen::Index>(kernel.sources[static_cast<std::size_t>(j)]));
    }
  } else {
    if (k == 0 || k + 1 >= kernel.times.size()) {
      throw Error(ErrorCode::GridTooCoarse, "central differences need neighbours on both sides");
    }
    const double h1 = kernel.times[k] - kernel.times[k - 1];
    const double h2 = kernel.times[k + 1] - kernel.times[k];
    if (!(h1 > 0.0 && h2 > 0.0)) throw Error(ErrorCode::GridTooCoarse, "grid must be increasing");
    derivative = (-h2 / (h1 * (h1 + h2))) * kernel.slices[k - 1] +
                 ((h2 - h1) / (h1 * h2)) * kernel.slices[k] +
                 (h1 / (h2 * (h1 + h2))) * kernel.slices[k + 1];
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Vector lap = apply_laplacian(*kernel.graph, kernel.slices[k].col(j), kernel.boundary);
    report.max_residual = std::max(report.max_residual, (derivative.col(j) - lap).cwiseAbs().maxCoeff());
  }
  return report;
}

KernelAuditReport audit_kernel(const HeatKernel& kernel, const KernelAuditOptions& options) {
  KernelAuditReport report;
  auto tol = [&](double value) { return options.override_tolerance.value_or(value); };
  const auto cols = static_cast<Eigen::Index>(kernel.sources.size());

  {
    AuditItem item{"positivity", kInfinity, 0.0, true, ""};
    const bool exact = kernel.method == KernelMethod::taylor;
    double worst_ratio = kInfinity;
    for (std::size_t k = 0; k < kernel.times.size(); ++k) {
      if (kernel.times[k] <= 0.0) continue;
      const double mn = kernel.slices[k].minCoeff();
      const double mx = kernel.slices[k].maxCoeff();
      item.measured = std::min(item.measured, mn);
      worst_ratio = std::min(worst_ratio, mn / mx);
    }
    if (exact) {
      item.tolerance = tol(0.0);
      item.pass = item.measured > item.tolerance;
      item.note = "strict: nonnegative series terms";
    } else {
      item.tolerance = -tol(options.positivity_floor);
      item.pass = worst_ratio >= item.tolerance;
      item.note = "min P / max P above the round-off floor";
      item.measured = worst_ratio;
    }
    if (item.measured == kInfinity) item.measured = 0.0, item.note = "no positive times";
    report.items.push_back(item);
  }
  {
    AuditItem item{"symmetry", 0.0, tol(options.symmetry_tolerance), false, "relative to max P"};
    for (std::size_t k = 0; k < kernel.times.size(); ++k) {
      const double scale = kernel.slices[k].cwiseAbs().maxCoeff();
      for (Eigen::Index a = 0; a < cols; ++a) {
        for (Eigen::Index b = a + 1; b < cols; ++b) {
          const auto xa = static_cast<Eigen::Index>(kernel.sources[static_cast<std::size_t>(a)]);
          const auto xb = static_cast<Eigen::Index>(kernel.sources[static_cast<std::size_t>(b)]);
          item.measured = std::max(item.measured,
                                   std::abs(kernel.slices[k](xb, a) - kernel.slices[k](xa, b)) / scale);
        }
      }
    }
    item.pass = item.measured <= item.tolerance;
    report.items.push_back(item);
  }
  {
    AuditItem item;
    if (kernel.boundary == Boundary::natural) {
      item = {"mass_conservation", kernel.mass_defect.cwiseAbs().maxCoeff(),
              tol(options.mass_tolerance), false, "|1 - sum_y P mu|"};
    } else {
      item = {"substochastic", std::max(0.0, -kernel.mass_defect.minCoeff()),
              tol(options.substochastic_slack), false,
              "excess of sum_y P mu over 1; max defect " +
                  std::to_string(kernel.mass_defect.maxCoeff())};
    }
    item.pass = item.measured <= item.tolerance;
    report.items.push_back(item);
  }
  if (kernel.dense()) {
    const auto pairs = semigroup_pairs(kernel.times);
    if (!pairs.empty()) {
      const double default_tol = kernel.method == KernelMethod::krylov ? 1e-6 : 1e-8;
      auto sg = semigroup_audit(kernel, pairs, tol(options.semigroup_tolerance.value_or(default_tol)));
      report.items.push_back({"semigroup", sg.max_relative_error, sg.tolerance, sg.pass,
                              std::to_string(sg.pairs_checked) + " pairs"});
    }
  }
  {
    AuditItem item{"heat_equation", 0.0, tol(options.residual_tolerance), false, ""};
    std::size_t checked = 0;
    for (std::size_t k = 0; k < kernel.times.size(); ++k) {
      if (kernel.times[k] <= 0.0) continue;
      if (!kernel.spectral && (k == 0 || k + 1 >= kernel.times.size())) continue;
      item.measured = std::max(item.measured, heat_equation_residual(kernel, k).max_residual);
      ++checked;
    }
    if (!kernel.spectral) {
      // Finite differences are O(dt^2); the tolerance only applies to the spectral route.
      item.note = "second-order differences, informational";
      item.pass = true;
    } else {
      item.note = "spectral derivative";
      item.pass = item.measured <= item.tolerance;
    }
    if (checked > 0) report.items.push_back(item);
  }
  if (auto k0 = kernel.time_index(0.0)) {
    AuditItem item{"initial_condition", 0.0, tol(0.0), false, "P(0,x,y) = delta_x(y)/mu(y)"};
    for (Eigen::Index j = 0; j < cols; ++j) {
      const std::size_t s = kernel.sources[static_cast<std::size_t>(j)];
      for (std::size_t y = 0; y < kernel.graph->size(); ++y) {
        const double expected = y == s ? 1.0 / kernel.graph->measure(y) : 0.0;
        item.measured = std::max(item.measured,
                                 std::abs(kernel.slices[*k0](static_cast<Eigen::Index>(y), j) - expected));
      }
    }
    item.pass = item.measured <= item.tolerance;
    report.items.push_back(item);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Exhaustion

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double lattice_ball_size(int dimension, int radius) {
  double total = 0.0;
  for (int k = 0; k <= std::min(dimension, radius); ++k) {
    total += std::ldexp(1.0, k) * binomial(dimension, k) * binomial(radius, k);
  }
  return total;
}

HeatKernel dirichlet_kernel(const LatticeFamily& family, int radius, const VertexId& center,
                            const std::vector<double>& times, const ExhaustionOptions& options) {
  auto graph = share(lattice_ball(family.dimension, radius, family.kind));
  KernelOptions opts;
  opts.boundary = Boundary::dirichlet;
  opts.dense_limit = 0;
  opts.action_tolerance = options.action_tolerance;
  opts.sources.push_back(graph->index(center));
  for (const auto& id : options.extra_sources) {
    std::size_t idx = graph->index(id);
    if (std::find(opts.sources.begin(), opts.sources.end(), idx) == opts.sources.end()) {
      opts.sources.push_back(idx);
    }
  }
  KernelMethod method = options.method == KernelMethod::automatic ? KernelMethod::taylor : options.method;
  if (method == KernelMethod::taylor && graph->size() <= 1) method = KernelMethod::eigen;
  return compute_kernel(graph, times, method, opts);
}

}  // namespace

ExhaustionResult exhaustion_kernel(const LatticeFamily& family, const VertexId& center,
                                   const std::vector<double>& times, double tolerance,
                                   const ExhaustionOptions& options) {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
  for (double t : times) {
    if (!(t >= 0.0)) throw Error(ErrorCode::TimeNegative, "kernel times must be >= 0");
  }
  const double t_max = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
  ExhaustionResult result;
  if (t_max == 0.0) {
    result.kernel = dirichlet_kernel(family, 1, center, times, options);
    result.radius = result.previous_radius = 1;
    result.kernel.provenance.previous_radius = 1;
    result.previous_max_defect.assign(times.size(), 0.0);
    return result;
  }

  int radius = std::max(1, options.initial_radius);
  HeatKernel previous = dirichlet_kernel(family, radius, center, times, options);
  for (;;) {
    const int next_radius = 2 * radius;
    if (lattice_ball_size(family.dimension, next_radius) > static_cast<double>(options.max_vertices)) {
      throw Error(ErrorCode::NoConvergenceAtResourceLimit,
                  "radius " + std::to_string(next_radius) + " exceeds the vertex cap before reaching tolerance");
    }
    HeatKernel current = dirichlet_kernel(family, next_radius, center, times, options);
    double diff = 0.0;
    double violation = -kInfinity;
    const auto& small = *previous.graph;
    const auto& large = *current.graph;
    std::vector<Eigen::Index> embed(small.size());
    std::vector<char> inside(large.size(), 0);
    for (std::size_t i = 0; i < small.size(); ++i) {
      const std::size_t j = large.index(small.id(i));
      embed[i] = static_cast<Eigen::Index>(j);
      inside[j] = 1;
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
      for (Eigen::Index c = 0; c < current.slices[k].cols(); ++c) {
        for (std::size_t i = 0; i < small.size(); ++i) {
          const double d = previous.slices[k](static_cast<Eigen::Index>(i), c) - current.slices[k](embed[i], c);
          diff = std::max(diff, std::abs(d));
          violation = std::max(violation, d);
        }
        for (std::size_t j = 0; j < large.size(); ++j) {
          if (!inside[j]) diff = std::max(diff, std::abs(current.slices[k](static_cast<Eigen::Index>(j), c)));
        }
      }
    }
    if (diff < tolerance) {
      result.kernel = std::move(current);
      result.radius = next_radius;
      result.previous_radius = radius;
      result.difference = diff;
      result.monotonicity_violation = violation;
      result.kernel.provenance.previous_radius = radius;
      for (std::size_t k = 0; k < times.size(); ++k) {
        result.previous_max_defect.push_back(previous.mass_defect.row(static_cast<Eigen::Index>(k)).maxCoeff());
      }
      return result;
    }
    previous = std::move(current);
    radius = next_radius;
  }
}

}  // namespace heatgraph
