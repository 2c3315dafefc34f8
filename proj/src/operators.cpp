#include "heatgraph/operators.hpp"

#include <algorithm>
#include <cmath>

#include "heatgraph/error.hpp"

namespace heatgraph {

VertexFunction::VertexFunction(GraphPtr graph, Vector values)
    : graph_(std::move(graph)), values_(std::move(values)) {
  if (!graph_) throw Error(ErrorCode::InvalidArgument, "vertex function without a graph");
  if (static_cast<std::size_t>(values_.size()) != graph_->size()) {
    throw Error(ErrorCode::GraphMismatch, "function length differs from vertex count");
  }
}

VertexFunction VertexFunction::constant(GraphPtr graph, double value) {
  Vector v = Vector::Constant(static_cast<Eigen::Index>(graph->size()), value);
  return VertexFunction(std::move(graph), std::move(v));
}

SparseMatrix laplacian(const WeightedGraph& graph, Boundary boundary) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.size() + 2 * graph.edge_count());
  for (std::size_t x = 0; x < graph.size(); ++x) {
    const double inv_mu = 1.0 / graph.measure(x);
    double diag = 0.0;
    for (const auto& nb : graph.neighbors(x)) {
      triplets.emplace_back(x, nb.index, nb.weight * inv_mu);
      diag += nb.weight;
    }
    if (boundary == Boundary::dirichlet) diag += graph.exterior_weight(x);
    triplets.emplace_back(x, x, -diag * inv_mu);
  }
  SparseMatrix L(n, n);
  L.setFromTriplets(triplets.begin(), triplets.end());
  return L;
}

SparseMatrix symmetrized_laplacian(const WeightedGraph& graph, Boundary boundary) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.size() + 2 * graph.edge_count());
  for (std::size_t x = 0; x < graph.size(); ++x) {
    double diag = 0.0;
    for (const auto& nb : graph.neighbors(x)) {
      triplets.emplace_back(x, nb.index,
                            nb.weight / std::sqrt(graph.measure(x) * graph.measure(nb.index)));
      diag += nb.weight;
    }
    if (boundary == Boundary::dirichlet) diag += graph.exterior_weight(x);
    triplets.emplace_back(x, x, -diag / graph.measure(x));
  }
  SparseMatrix S(n, n);
  S.setFromTriplets(triplets.begin(), triplets.end());
  return S;
}

double diagonal_bound(const WeightedGraph& graph, Boundary boundary) {
  double bound = 0.0;
  for (std::size_t x = 0; x < graph.size(); ++x) {
    double m = 0.0;
    for (const auto& nb : graph.neighbors(x)) m += nb.weight;
    if (boundary == Boundary::dirichlet) m += graph.exterior_weight(x);
    bound = std::max(bound, m / graph.measure(x));
  }
  return bound;
}

Vector apply_laplacian(const WeightedGraph& graph, const Vector& f, Boundary boundary) {
  Vector out(f.size());
  for (std::size_t x = 0; x < graph.size(); ++x) {
    const double fx = f[static_cast<Eigen::Index>(x)];
    double acc = 0.0;
    for (const auto& nb : graph.neighbors(x)) {
      acc += nb.weight * (f[static_cast<Eigen::Index>(nb.index)] - fx);
    }
    if (boundary == Boundary::dirichlet) acc -= graph.exterior_weight(x) * fx;
    out[static_cast<Eigen::Index>(x)] = acc / graph.measure(x);
  }
  return out;
}

Vector gamma(const WeightedGraph& graph, const Vector& f, const Vector& g) {
  Vector out(f.size());
  for (std::size_t x = 0; x < graph.size(); ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    double acc = 0.0;
    for (const auto& nb : graph.neighbors(x)) {
      const auto yi = static_cast<Eigen::Index>(nb.index);
      acc += nb.weight * (f[yi] - f[xi]) * (g[yi] - g[xi]);
    }
    out[xi] = acc / (2.0 * graph.measure(x));
  }
  return out;
}

Vector gamma2(const WeightedGraph& graph, const Vector& f) {
  const Vector lap_f = apply_laplacian(graph, f);
  const Vector gamma_f = gamma(graph, f, f);
  return 0.5 * (apply_laplacian(graph, gamma_f) - 2.0 * gamma(graph, f, lap_f));
}

namespace {

void require_same_graph(const VertexFunction& f, const VertexFunction& g) {
  if (f.graph() != g.graph() && f.graph()->content_hash() != g.graph()->content_hash()) {
    throw Error(ErrorCode::GraphMismatch, "functions live on different graphs");
  }
}

}  // namespace

VertexFunction laplacian(const VertexFunction& f) {
  return {f.graph(), apply_laplacian(*f.graph(), f.values())};
}

VertexFunction gamma(const VertexFunction& f, const VertexFunction& g) {
  require_same_graph(f, g);
  return {f.graph(), gamma(*f.graph(), f.values(), g.values())};
}

VertexFunction gamma2(const VertexFunction& f) {
  return {f.graph(), gamma2(*f.graph(), f.values())};
}

double lp_norm(std::span<const double> measure, const Vector& f, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidExponent, "l^p norm needs p >= 1");
  if (std::isinf(p)) return f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double a = std::abs(f[i]);
    if (a == 0.0) continue;
    acc += measure[static_cast<std::size_t>(i)] * (p == 1.0 ? a : std::exp(p * std::log(a)));
  }
  return p == 1.0 ? acc : std::pow(acc, 1.0 / p);
}

double lp_norm(const VertexFunction& f, double p) {
  return lp_norm(f.graph()->measure(), f.values(), p);
}

HolderAudit holder_audit(const VertexFunction& f, const VertexFunction& g, double a, double b) {
  require_same_graph(f, g);
  const double inv_a = std::isinf(a) ? 0.0 : 1.0 / a;
  const double inv_b = std::isinf(b) ? 0.0 : 1.0 / b;
  if (a < 1.0 || b < 1.0 || std::abs(inv_a + inv_b - 1.0) > 1e-12) {
    throw Error(ErrorCode::NonConjugateExponents, "need 1/a + 1/b = 1");
  }
  HolderAudit audit;
  audit.lhs = lp_norm(f.graph()->measure(), f.values().cwiseProduct(g.values()), 1.0);
  audit.rhs = lp_norm(f, a) * lp_norm(g, b);
  audit.satisfied = audit.lhs <= audit.rhs * (1.0 + 1e-12);
  return audit;
}

EmbeddingAudit embedding_audit(const VertexFunction& f, double p0, double p1) {
  if (!(p0 >= 1.0) || !(p1 >= p0)) {
    throw Error(ErrorCode::ExponentOrder, "need 1 <= p0 <= p1");
  }
  const double mu_min = graph_scalars(*f.graph()).mu_min;
  const double exponent = std::isinf(p1) ? -1.0 / p0 : (p0 - p1) / (p0 * p1);
  EmbeddingAudit audit;
  audit.lhs = lp_norm(f, p1);
  audit.bound = std::pow(mu_min, exponent) * lp_norm(f, p0);
  audit.satisfied = audit.lhs <= audit.bound * (1.0 + 1e-12);
  return audit;
}

}  // namespace heatgraph
