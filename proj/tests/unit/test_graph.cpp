#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "heatgraph/error.hpp"
#include "heatgraph/graph.hpp"

using namespace heatgraph;

namespace {

WeightedGraph p3() {
  return WeightedGraph::build({"a", "b", "c"}, {{"a", "b", 1.0}, {"b", "c", 1.0}},
                              {{"a", 1.0}, {"b", 1.0}, {"c", 1.0}});
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("path on three vertices") {
  auto g = p3();
  CHECK(g.size() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.weight(0, 1) == 1.0);
  CHECK(g.weight(1, 0) == 1.0);
  CHECK(g.weight(0, 2) == 0.0);
}

TEST_CASE("construction rejects invalid input") {
  std::map<VertexId, double> mu{{"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"d", 1.0}};
  CHECK(code_of([&] { WeightedGraph::build({"a", "b"}, {{"a", "b", 0.0}}, {{"a", 1.0}, {"b", 1.0}}); }) ==
        ErrorCode::NonPositiveWeight);
  CHECK(code_of([&] { WeightedGraph::build({"a", "b"}, {{"a", "b", 1.0}}, {{"a", 1.0}, {"b", -1.0}}); }) ==
        ErrorCode::NonPositiveMeasure);
  CHECK(code_of([&] { WeightedGraph::build({"a", "b"}, {{"a", "a", 1.0}, {"a", "b", 1.0}}, {{"a", 1.0}, {"b", 1.0}}); }) ==
        ErrorCode::SelfLoop);
  CHECK(code_of([&] { WeightedGraph::build({"a", "b"}, {{"a", "b", 1.0}, {"a", "b", 2.0}}, {{"a", 1.0}, {"b", 1.0}}); }) ==
        ErrorCode::DuplicateEdge);
  CHECK(code_of([&] { WeightedGraph::build({"a", "b", "c", "d"}, {{"a", "b", 1.0}, {"c", "d", 1.0}}, mu); }) ==
        ErrorCode::Disconnected);
  CHECK(code_of([&] { p3().index("zz"); }) == ErrorCode::UnknownVertex);
}

TEST_CASE("both orientations of the same edge are accepted") {
  auto g = WeightedGraph::build({"a", "b"}, {{"a", "b", 2.0}, {"b", "a", 2.0}}, {{"a", 1.0}, {"b", 1.0}});
  CHECK(g.edge_count() == 1);
  CHECK(g.weight(1, 0) == 2.0);
}

TEST_CASE("lattice balls") {
  auto z1 = lattice_ball(1, 2, LaplacianKind::combinatorial);
  CHECK(z1.size() == 5);
  CHECK(z1.edge_count() == 4);
  CHECK(z1.metadata().truncation_radius == 2);

  auto z2 = lattice_ball(2, 2, LaplacianKind::combinatorial);
  CHECK(z2.size() == 13);

  auto z0 = lattice_ball(1, 0, LaplacianKind::combinatorial);
  CHECK(z0.size() == 1);
  CHECK(z0.edge_count() == 0);

  // Brute-force count of the l1 ball in three dimensions.
  int count = 0;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b)
      for (int c = -3; c <= 3; ++c) count += std::abs(a) + std::abs(b) + std::abs(c) <= 3;
  CHECK(lattice_ball(3, 3, LaplacianKind::combinatorial).size() == static_cast<std::size_t>(count));
}

TEST_CASE("graph scalars") {
  CHECK(graph_scalars(lattice_ball(1, 2, LaplacianKind::combinatorial)).d_mu == 2.0);
  auto s2 = graph_scalars(lattice_ball(2, 3, LaplacianKind::combinatorial));
  CHECK(s2.d_mu == 4.0);
  CHECK(s2.mu_min == 1.0);
  CHECK(s2.omega_min == 1.0);
  CHECK(graph_scalars(lattice_ball(2, 3, LaplacianKind::normalized)).d_mu == 1.0);
  for (int dim = 1; dim <= 3; ++dim) {
    CHECK(graph_scalars(lattice_ball(dim, 2, LaplacianKind::combinatorial)).d_mu == 2.0 * dim);
  }
  auto r = random_connected_graph(30, 20, 7);
  auto s = graph_scalars(r);
  for (std::size_t x = 0; x < r.size(); ++x) CHECK(s.d_mu >= s.vertex_weight[x] / r.measure(x));
  CHECK(s.d_mu == doctest::Approx(s.vertex_weight[s.d_mu_vertex] / r.measure(s.d_mu_vertex)));
}

TEST_CASE("balls and volumes") {
  auto g = p3();
  CHECK(ball_and_volume(g, 1, 1).volume == 3.0);
  CHECK(ball_and_volume(g, 0, 0).volume == 1.0);
  auto z2 = lattice_ball(2, 4, LaplacianKind::combinatorial);
  CHECK(ball_and_volume(z2, z2.index(lattice_origin_id(2)), 2).volume == 13.0);

  auto r = random_tree(40, 3);
  for (std::size_t x = 0; x < r.size(); x += 7) {
    CHECK(ball_and_volume(r, x, 0).volume == r.measure(x));
    for (int R = 0; R < 6; ++R) {
      auto a = ball_and_volume(r, x, R);
      auto b = ball_and_volume(r, x, R + 1);
      CHECK(std::includes(b.vertices.begin(), b.vertices.end(), a.vertices.begin(), a.vertices.end()));
      CHECK(a.volume <= b.volume);
    }
  }
}

TEST_CASE("hop metric satisfies the triangle inequality") {
  auto g = random_connected_graph(40, 30, 11);
  std::vector<std::vector<int>> d;
  for (std::size_t x = 0; x < g.size(); ++x) d.push_back(hop_distances(g, x));
  bool ok = true;
  for (std::size_t x = 0; x < g.size(); ++x)
    for (std::size_t y = 0; y < g.size(); ++y)
      for (std::size_t z = 0; z < g.size(); ++z) ok = ok && d[x][z] <= d[x][y] + d[y][z];
  CHECK(ok);
}

TEST_CASE("volume growth fits") {
  auto z1 = lattice_ball(1, 80, LaplacianKind::combinatorial);
  auto o1 = z1.index(lattice_origin_id(1));
  // Least squares of log(2R+1) against log R.
  CHECK(fit_volume_growth(z1, o1, 8).growth_degree == doctest::Approx(0.8401661421768571).epsilon(1e-10));
  auto f1 = fit_volume_growth(z1, o1, 64);
  CHECK(f1.growth_degree == doctest::Approx(0.9443752617197199).epsilon(1e-10));
  CHECK(std::abs(f1.growth_degree - 1.0) < 0.15);
  CHECK(f1.lower_constant == doctest::Approx(2.385561303160387).epsilon(1e-9));
  CHECK_FALSE(f1.radius_exceeds_truncation);

  auto z2 = lattice_ball(2, 70, LaplacianKind::combinatorial);
  auto o2 = z2.index(lattice_origin_id(2));
  CHECK(fit_volume_growth(z2, o2, 8).growth_degree == doctest::Approx(1.6347503482762116).epsilon(1e-10));
  auto f2 = fit_volume_growth(z2, o2, 64);
  CHECK(f2.growth_degree == doctest::Approx(1.8782641833507114).epsilon(1e-10));
  CHECK(std::abs(f2.growth_degree - 2.0) < 0.15);

  CHECK(fit_volume_growth(z2, o2, 80).radius_exceeds_truncation);

  auto single = lattice_ball(1, 0, LaplacianKind::combinatorial);
  CHECK(code_of([&] { fit_volume_growth(single, 0, 4); }) == ErrorCode::InsufficientRadii);
}

TEST_CASE("content hash is deterministic and sensitive") {
  auto a = lattice_ball(2, 3, LaplacianKind::combinatorial);
  auto b = lattice_ball(2, 3, LaplacianKind::combinatorial);
  auto c = lattice_ball(2, 3, LaplacianKind::normalized);
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash() != c.content_hash());
}
