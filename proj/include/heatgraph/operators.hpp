#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <limits>

#include "heatgraph/graph.hpp"

namespace heatgraph {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// natural: the graph's own Laplacian (mass conserving on a finite graph).
// dirichlet: the ambient Laplacian restricted to a truncation with zero
// continuation outside, i.e. the diagonal also loses exterior_weight / mu.
enum class Boundary { natural, dirichlet };

// A real function on the vertices of a graph.
class VertexFunction {
 public:
  VertexFunction(GraphPtr graph, Vector values);
  static VertexFunction constant(GraphPtr graph, double value);
  static VertexFunction zero(GraphPtr graph) { return constant(std::move(graph), 0.0); }

  const GraphPtr& graph() const noexcept { return graph_; }
  const Vector& values() const noexcept { return values_; }
  Vector& values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

 private:
  GraphPtr graph_;
  Vector values_;
};

// Row x applies (1/mu(x)) sum_{y~x} omega_xy (f(y) - f(x)).
SparseMatrix laplacian(const WeightedGraph& graph, Boundary boundary = Boundary::natural);

// M^{1/2} Delta M^{-1/2}; symmetric.
SparseMatrix symmetrized_laplacian(const WeightedGraph& graph,
                                   Boundary boundary = Boundary::natural);

// max_x (m(x) + kappa(x)) / mu(x): the largest diagonal magnitude of Delta.
double diagonal_bound(const WeightedGraph& graph, Boundary boundary);

Vector apply_laplacian(const WeightedGraph& graph, const Vector& f,
                       Boundary boundary = Boundary::natural);

Vector gamma(const WeightedGraph& graph, const Vector& f, const Vector& g);
Vector gamma2(const WeightedGraph& graph, const Vector& f);

VertexFunction laplacian(const VertexFunction& f);
VertexFunction gamma(const VertexFunction& f, const VertexFunction& g);
VertexFunction gamma2(const VertexFunction& f);

// Measure-weighted l^p norm; p = kInfinity gives the max norm. Throws
// InvalidExponent for p < 1.
double lp_norm(std::span<const double> measure, const Vector& f, double p);
double lp_norm(const VertexFunction& f, double p);

struct HolderAudit {
  double lhs = 0.0;  // ||f g||_1
  double rhs = 0.0;  // ||f||_a ||g||_b
  bool satisfied = false;
};

HolderAudit holder_audit(const VertexFunction& f, const VertexFunction& g, double a, double b);

struct EmbeddingAudit {
  double lhs = 0.0;    // ||f||_{p1}
  double bound = 0.0;  // mu_min^{(p0-p1)/(p0 p1)} ||f||_{p0}
  bool satisfied = false;
};

EmbeddingAudit embedding_audit(const VertexFunction& f, double p0, double p1);

}  // namespace heatgraph
