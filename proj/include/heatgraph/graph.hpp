#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace heatgraph {

using VertexId = std::string;

struct WeightedEdge {
  VertexId u;
  VertexId v;
  double weight = 1.0;
};

struct IndexedEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 1.0;
};

struct Neighbor {
  std::size_t index;
  double weight;
};

// Provenance of a graph. Truncations of infinite families carry the
// generator name, its parameters and the truncation radius.
struct GraphMetadata {
  std::string generator;
  std::map<std::string, std::string> params;
  std::optional<int> truncation_radius;
};

// Finite, connected, symmetric weighted graph G = (V, E, omega, mu).
//
// Vertex order is fixed at construction and is the canonical order of every
// matrix built from the graph. `exterior_weight(x)` is the total weight of
// ambient edges leaving a truncation at x; it is zero for graphs that are not
// truncations and is what the Dirichlet (killed) Laplacian adds to the diagonal.
class WeightedGraph {
 public:
  static WeightedGraph build(const std::vector<VertexId>& vertices,
                             const std::vector<WeightedEdge>& edges,
                             const std::map<VertexId, double>& measure,
                             GraphMetadata metadata = {},
                             const std::map<VertexId, double>& exterior = {});

  static WeightedGraph build_indexed(std::vector<VertexId> vertices,
                                     const std::vector<IndexedEdge>& edges,
                                     std::vector<double> measure,
                                     GraphMetadata metadata = {},
                                     std::vector<double> exterior = {});

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  const VertexId& id(std::size_t i) const { return ids_.at(i); }
  const std::vector<VertexId>& ids() const noexcept { return ids_; }
  std::optional<std::size_t> find(const VertexId& id) const;
  // Throws UnknownVertex.
  std::size_t index(const VertexId& id) const;

  double measure(std::size_t i) const { return measure_[i]; }
  std::span<const double> measure() const noexcept { return measure_; }

  std::span<const Neighbor> neighbors(std::size_t i) const {
    return {adjacency_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  // omega_xy, zero when x and y are not adjacent.
  double weight(std::size_t x, std::size_t y) const;

  double exterior_weight(std::size_t i) const { return exterior_[i]; }
  std::span<const double> exterior_weight() const noexcept { return exterior_; }
  bool is_truncation() const noexcept { return has_exterior_; }

  const GraphMetadata& metadata() const noexcept { return metadata_; }

  std::vector<IndexedEdge> edges() const;

  // FNV-1a over ids, measure, edges and exterior weights (bit patterns).
  std::uint64_t content_hash() const;

 private:
  WeightedGraph() = default;
  void finalize(const std::vector<IndexedEdge>& edges);

  std::vector<VertexId> ids_;
  std::unordered_map<VertexId, std::size_t> lookup_;
  std::vector<double> measure_;
  std::vector<double> exterior_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::size_t edge_count_ = 0;
  bool has_exterior_ = false;
  GraphMetadata metadata_;
};

using GraphPtr = std::shared_ptr<const WeightedGraph>;

inline GraphPtr share(WeightedGraph g) {
  return std::make_shared<const WeightedGraph>(std::move(g));
}

struct GraphScalars {
  double mu_min = 0.0;
  double mu_max = 0.0;
  double omega_min = 0.0;  // +inf for an edgeless graph
  std::vector<double> vertex_weight;  // m(x) = sum_{y~x} omega_xy
  double d_mu = 0.0;                  // max_x vertex_weight(x) / mu(x)
  std::size_t d_mu_vertex = 0;
};

GraphScalars graph_scalars(const WeightedGraph& graph);

enum class LaplacianKind { combinatorial, normalized };

// Induced subgraph of Z^dimension on the l1 ball of `radius` around the origin.
// Vertex ids are comma-joined coordinates ("0", "1,-2", ...); order is
// lexicographic in the coordinates.
WeightedGraph lattice_ball(int dimension, int radius, LaplacianKind kind);

std::string lattice_origin_id(int dimension);

WeightedGraph path_graph(std::size_t n, double weight = 1.0, double mu = 1.0);

// Uniform random recursive tree with weights in [0.5, 2] and measures in [0.5, 2].
WeightedGraph random_tree(std::size_t n, std::uint64_t seed);

// Random tree plus `extra_edges` chords, random positive weights and measures.
WeightedGraph random_connected_graph(std::size_t n, std::size_t extra_edges, std::uint64_t seed);

// Hop distances from `source`; -1 never occurs on a connected graph.
std::vector<int> hop_distances(const WeightedGraph& graph, std::size_t source);

struct Ball {
  std::vector<std::size_t> vertices;  // sorted
  double volume = 0.0;
};

Ball ball_and_volume(const WeightedGraph& graph, std::size_t center, int radius);

struct VolumeGrowthFit {
  std::size_t center = 0;
  std::vector<int> radii;
  std::vector<double> volumes;
  double growth_degree = 0.0;   // fitted m
  double lower_constant = 0.0;  // min_R V(x,R) / R^m
  double fit_r2 = 0.0;
  bool radius_exceeds_truncation = false;
};

VolumeGrowthFit fit_volume_growth(const WeightedGraph& graph, std::size_t center, int max_radius);

}  // namespace heatgraph
