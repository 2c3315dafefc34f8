#include <cmath>
#include <random>

#include "doctest.h"
#include "heatgraph/error.hpp"
#include "heatgraph/operators.hpp"

using namespace heatgraph;

namespace {

GraphPtr path(std::size_t n) { return share(path_graph(n)); }

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

GraphPtr two_vertex(double mu_a, double mu_b) {
  return share(WeightedGraph::build({"a", "b"}, {{"a", "b", 1.0}}, {{"a", mu_a}, {"b", mu_b}}));
}

}  // namespace

TEST_CASE("laplacian on P3") {
  auto g = path(3);
  VertexFunction f(g, vec({0, 1, 0}));
  auto lf = laplacian(f);
  CHECK(lf[0] == 1.0);
  CHECK(lf[1] == -2.0);
  CHECK(lf[2] == 1.0);
  CHECK(laplacian(VertexFunction::constant(g, 3.5)).values().cwiseAbs().maxCoeff() == 0.0);

  auto single = share(lattice_ball(1, 0, LaplacianKind::combinatorial));
  CHECK(Matrix(laplacian(*single)).norm() == 0.0);
}

TEST_CASE("laplacian row sums vanish and it is self-adjoint") {
  auto g = share(random_connected_graph(25, 15, 5));
  const Matrix L = Matrix(laplacian(*g));
  CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() < 1e-13);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  Vector f(25), h(25), mu(25);
  for (int i = 0; i < 25; ++i) f[i] = n01(rng), h[i] = n01(rng), mu[i] = g->measure(static_cast<std::size_t>(i));
  const double lhs = (mu.array() * h.array() * (L * f).array()).sum();
  const double rhs = (mu.array() * f.array() * (L * h).array()).sum();
  CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  const Vector gf = gamma(*g, f, f);
  const double energy = (mu.array() * gf.array()).sum();
  const double dirichlet = -(mu.array() * f.array() * (L * f).array()).sum();
  CHECK(std::abs(energy - dirichlet) <= 1e-10 * std::abs(energy));
}

TEST_CASE("symmetrized spectrum lies in [-2 D_mu, 0]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto g = random_connected_graph(60, 40, seed);
    const Matrix S = Matrix(symmetrized_laplacian(g));
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    const double d = graph_scalars(g).d_mu;
    CHECK(es.eigenvalues().maxCoeff() < 1e-12);
    CHECK(es.eigenvalues().minCoeff() >= -2.0 * d - 1e-12);
  }
}

TEST_CASE("gradient forms") {
  auto g = path(3);
  VertexFunction f(g, vec({0, 1, 0}));
  CHECK(gamma(f, f)[1] == 1.0);
  CHECK(gamma(f, VertexFunction::constant(g, 2.0)).values().cwiseAbs().maxCoeff() == 0.0);

  // Hand evaluation of the iterated form: Gamma_2 = (7/4, 5/2, 7/4).
  auto g2 = gamma2(f);
  CHECK(g2[0] == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(g2[1] == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(g2[2] == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(gamma2(VertexFunction::constant(g, 1.0)).values().cwiseAbs().maxCoeff() == 0.0);

  VertexFunction f2(g, 2.0 * f.values());
  CHECK((gamma2(f2).values() - 4.0 * g2.values()).cwiseAbs().maxCoeff() < 1e-14);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  auto p4 = path(4);
  for (int trial = 0; trial < 100; ++trial) {
    VertexFunction h(p4, vec({n01(rng), n01(rng), n01(rng), n01(rng)}));
    CHECK(gamma(h, h).values().minCoeff() >= 0.0);
  }
}

TEST_CASE("mismatched graphs are rejected") {
  VertexFunction f(path(3), vec({0, 1, 0}));
  VertexFunction g(path(4), vec({0, 1, 0, 1}));
  CHECK_THROWS_AS(gamma(f, g), Error);
  CHECK_THROWS_AS(VertexFunction(path(3), vec({1, 2})), Error);
}

TEST_CASE("lp norms") {
  auto g = two_vertex(1.0, 1.0);
  VertexFunction f(g, vec({3, 4}));
  CHECK(lp_norm(f, 2.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(lp_norm(f, kInfinity) == 4.0);
  VertexFunction h(two_vertex(2.0, 3.0), vec({1, 1}));
  CHECK(lp_norm(h, 1.0) == 5.0);
  CHECK(lp_norm(f, 1.5) == doctest::Approx(std::pow(std::pow(3.0, 1.5) + 8.0, 1.0 / 1.5)));
  try {
    lp_norm(f, 0.5);
    FAIL("expected InvalidExponent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidExponent);
  }
}

TEST_CASE("hoelder audit") {
  auto g = two_vertex(1.0, 1.0);
  VertexFunction one(g, vec({1, 1}));
  auto eq = holder_audit(one, one, 2.0, 2.0);
  CHECK(eq.lhs == doctest::Approx(2.0));
  CHECK(eq.rhs == doctest::Approx(2.0));
  CHECK(eq.satisfied);
  VertexFunction a(g, vec({1, 0})), b(g, vec({0, 1}));
  CHECK(holder_audit(a, b, 1.0, kInfinity).lhs == 0.0);
  CHECK(holder_audit(a, b, 3.0, 1.5).satisfied);
  try {
    holder_audit(a, b, 2.0, 3.0);
    FAIL("expected NonConjugateExponents");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonConjugateExponents);
  }

  auto p5 = share(random_connected_graph(5, 2, 9));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> ua(1.0, 6.0);
  int satisfied = 0;
  const int cases = 1000;
  for (int trial = 0; trial < cases; ++trial) {
    Vector x(5), y(5);
    for (int i = 0; i < 5; ++i) x[i] = n01(rng), y[i] = n01(rng);
    const double ea = trial % 10 == 0 ? 1.0 : ua(rng);
    const double eb = ea == 1.0 ? kInfinity : ea / (ea - 1.0);
    satisfied += holder_audit(VertexFunction(p5, x), VertexFunction(p5, y), ea, eb).satisfied;
  }
  CHECK(satisfied == cases);
}

TEST_CASE("embedding audit") {
  auto g = share(lattice_ball(2, 4, LaplacianKind::combinatorial));
  Vector e = Vector::Zero(static_cast<Eigen::Index>(g->size()));
  e[0] = 1.0;
  auto eq = embedding_audit(VertexFunction(g, e), 1.0, kInfinity);
  CHECK(eq.lhs == 1.0);
  CHECK(eq.bound == 1.0);
  CHECK(eq.satisfied);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> up(1.0, 8.0);
  auto r = share(random_connected_graph(20, 10, 4));
  int satisfied = 0;
  const int cases = 1000;
  for (int trial = 0; trial < cases; ++trial) {
    auto graph = trial % 2 ? g : r;
    Vector f(static_cast<Eigen::Index>(graph->size()));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = n01(rng);
    double p0 = up(rng), p1 = up(rng);
    if (p0 > p1) std::swap(p0, p1);
    if (trial % 7 == 0) p1 = kInfinity;
    satisfied += embedding_audit(VertexFunction(graph, f), p0, p1).satisfied;
  }
  CHECK(satisfied == cases);
  CHECK_THROWS_AS(embedding_audit(VertexFunction(g, e), 3.0, 2.0), Error);
}
