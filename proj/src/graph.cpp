#include "heatgraph/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "heatgraph/error.hpp"

namespace heatgraph {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::NonPositiveMeasure: return "NonPositiveMeasure";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::InsufficientRadii: return "InsufficientRadii";
    case ErrorCode::GraphMismatch: return "GraphMismatch";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::NonConjugateExponents: return "NonConjugateExponents";
    case ErrorCode::ExponentOrder: return "ExponentOrder";
    case ErrorCode::TimeNegative: return "TimeNegative";
    case ErrorCode::SeriesDivergenceGuard: return "SeriesDivergenceGuard";
    case ErrorCode::NoConvergenceAtResourceLimit: return "NoConvergenceAtResourceLimit";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::KernelUnavailable: return "KernelUnavailable";
    case ErrorCode::NonPositiveFunction: return "NonPositiveFunction";
    case ErrorCode::NonPositiveKernel: return "NonPositiveKernel";
    case ErrorCode::ContaminatedWindow: return "ContaminatedWindow";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::ZeroFunction: return "ZeroFunction";
    case ErrorCode::InfeasibleRegime: return "InfeasibleRegime";
    case ErrorCode::NonIntegrablePower: return "NonIntegrablePower";
    case ErrorCode::NoGrowthDetected: return "NoGrowthDetected";
    case ErrorCode::ResourceLimit: return "ResourceLimit";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

WeightedGraph WeightedGraph::build(const std::vector<VertexId>& vertices,
                                   const std::vector<WeightedEdge>& edges,
                                   const std::map<VertexId, double>& measure,
                                   GraphMetadata metadata,
                                   const std::map<VertexId, double>& exterior) {
  std::unordered_map<VertexId, std::size_t> lookup;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!lookup.emplace(vertices[i], i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate vertex id '" + vertices[i] + "'");
    }
  }
  auto index_of = [&](const VertexId& id) {
    auto it = lookup.find(id);
    if (it == lookup.end()) throw Error(ErrorCode::UnknownVertex, "vertex '" + id + "'");
    return it->second;
  };

  std::vector<double> mu(vertices.size(), 0.0);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    auto it = measure.find(vertices[i]);
    if (it == measure.end()) {
      throw Error(ErrorCode::NonPositiveMeasure, "no measure for vertex '" + vertices[i] + "'");
    }
    mu[i] = it->second;
  }
  for (const auto& [id, value] : measure) index_of(id);

  std::vector<IndexedEdge> indexed;
  indexed.reserve(edges.size());
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, bool>> seen;
  for (const auto& e : edges) {
    std::size_t a = index_of(e.u);
    std::size_t b = index_of(e.v);
    if (a == b) throw Error(ErrorCode::SelfLoop, "edge at '" + e.u + "'");
    bool forward = a < b;
    auto key = std::minmax(a, b);
    auto it = seen.find(key);
    if (it != seen.end()) {
      // The same pair listed once per orientation with an equal weight is a
      // symmetric adjacency listing, not a multi-edge.
      if (it->second.second != forward && it->second.first == e.weight) continue;
      throw Error(ErrorCode::DuplicateEdge, "edge {" + e.u + "," + e.v + "}");
    }
    seen.emplace(key, std::make_pair(e.weight, forward));
    indexed.push_back({a, b, e.weight});
  }

  std::vector<double> ext;
  if (!exterior.empty()) {
    ext.assign(vertices.size(), 0.0);
    for (const auto& [id, value] : exterior) ext[index_of(id)] = value;
  }
  return build_indexed(vertices, indexed, std::move(mu), std::move(metadata), std::move(ext));
}

WeightedGraph WeightedGraph::build_indexed(std::vector<VertexId> vertices,
                                           const std::vector<IndexedEdge>& edges,
                                           std::vector<double> measure,
                                           GraphMetadata metadata,
                                           std::vector<double> exterior) {
  WeightedGraph g;
  const std::size_t n = vertices.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "graph needs at least one vertex");
  if (measure.size() != n) throw Error(ErrorCode::InvalidArgument, "measure size mismatch");
  g.ids_ = std::move(vertices);
  g.lookup_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.lookup_.emplace(g.ids_[i], i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate vertex id '" + g.ids_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(measure[i] > 0.0) || !std::isfinite(measure[i])) {
      throw Error(ErrorCode::NonPositiveMeasure, "mu(" + g.ids_[i] + ") must be positive");
    }
  }
  g.measure_ = std::move(measure);
  if (exterior.empty()) {
    g.exterior_.assign(n, 0.0);
  } else {
    if (exterior.size() != n) throw Error(ErrorCode::InvalidArgument, "exterior size mismatch");
    for (double w : exterior) {
      if (w < 0.0 || !std::isfinite(w)) {
        throw Error(ErrorCode::NonPositiveWeight, "exterior weights must be nonnegative");
      }
    }
    g.exterior_ = std::move(exterior);
    g.has_exterior_ = true;
  }
  g.metadata_ = std::move(metadata);
  g.finalize(edges);
  return g;
}

void WeightedGraph::finalize(const std::vector<IndexedEdge>& edges) {
  const std::size_t n = ids_.size();
  std::vector<std::size_t> count(n, 0);
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) throw Error(ErrorCode::UnknownVertex, "edge endpoint out of range");
    if (e.u == e.v) throw Error(ErrorCode::SelfLoop, "edge at '" + ids_[e.u] + "'");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorCode::NonPositiveWeight,
                  "omega(" + ids_[e.u] + "," + ids_[e.v] + ") must be positive");
    }
    ++count[e.u];
    ++count[e.v];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + count[i];
  adjacency_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges) {
    adjacency_[fill[e.u]++] = {e.v, e.weight};
    adjacency_[fill[e.v]++] = {e.u, e.weight};
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto first = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    auto last = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    std::sort(first, last, [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    for (auto it = first; it + 1 < last; ++it) {
      if (it->index == (it + 1)->index) {
        throw Error(ErrorCode::DuplicateEdge, "edge {" + ids_[i] + "," + ids_[it->index] + "}");
      }
    }
  }
  edge_count_ = edges.size();

  std::vector<char> visited(n, 0);
  std::deque<std::size_t> queue{0};
  visited[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    std::size_t x = queue.front();
    queue.pop_front();
    for (const auto& nb : neighbors(x)) {
      if (!visited[nb.index]) {
        visited[nb.index] = 1;
        ++reached;
        queue.push_back(nb.index);
      }
    }
  }
  if (reached != n) {
    throw Error(ErrorCode::Disconnected,
                std::to_string(n - reached) + " of " + std::to_string(n) + " vertices unreachable");
  }
}

std::optional<std::size_t> WeightedGraph::find(const VertexId& id) const {
  auto it = lookup_.find(id);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t WeightedGraph::index(const VertexId& id) const {
  auto found = find(id);
  if (!found) throw Error(ErrorCode::UnknownVertex, "vertex '" + id + "'");
  return *found;
}

double WeightedGraph::weight(std::size_t x, std::size_t y) const {
  auto nbs = neighbors(x);
  auto it = std::lower_bound(nbs.begin(), nbs.end(), y,
                             [](const Neighbor& nb, std::size_t v) { return nb.index < v; });
  return (it != nbs.end() && it->index == y) ? it->weight : 0.0;
}

std::vector<IndexedEdge> WeightedGraph::edges() const {
  std::vector<IndexedEdge> out;
  out.reserve(edge_count_);
  for (std::size_t x = 0; x < size(); ++x) {
    for (const auto& nb : neighbors(x)) {
      if (x < nb.index) out.push_back({x, nb.index, nb.weight});
    }
  }
  return out;
}

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  }
  void real(double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    bytes(&bits, sizeof bits);
  }
  void integer(std::uint64_t v) { bytes(&v, sizeof v); }
};

}  // namespace

std::uint64_t WeightedGraph::content_hash() const {
  Fnv f;
  f.integer(size());
  for (std::size_t i = 0; i < size(); ++i) {
    f.bytes(ids_[i].data(), ids_[i].size());
    f.integer(0xff);
    f.real(measure_[i]);
    f.real(exterior_[i]);
  }
  for (const auto& e : edges()) {
    f.integer(e.u);
    f.integer(e.v);
    f.real(e.weight);
  }
  return f.h;
}

GraphScalars graph_scalars(const WeightedGraph& graph) {
  GraphScalars s;
  const std::size_t n = graph.size();
  s.mu_min = std::numeric_limits<double>::infinity();
  s.mu_max = 0.0;
  s.omega_min = std::numeric_limits<double>::infinity();
  s.vertex_weight.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    s.mu_min = std::min(s.mu_min, graph.measure(x));
    s.mu_max = std::max(s.mu_max, graph.measure(x));
    double m = 0.0;
    for (const auto& nb : graph.neighbors(x)) {
      m += nb.weight;
      s.omega_min = std::min(s.omega_min, nb.weight);
    }
    s.vertex_weight[x] = m;
    double ratio = m / graph.measure(x);
    if (ratio > s.d_mu) {
      s.d_mu = ratio;
      s.d_mu_vertex = x;
    }
  }
  return s;
}

std::string lattice_origin_id(int dimension) {
  std::string id = "0";
  for (int i = 1; i < dimension; ++i) id += ",0";
  return id;
}

namespace {

void enumerate_l1_ball(int dimension, int radius, std::vector<int>& prefix,
                       std::vector<std::vector<int>>& out) {
  int used = 0;
  for (int c : prefix) used += std::abs(c);
  if (static_cast<int>(prefix.size()) == dimension) {
    out.push_back(prefix);
    return;
  }
  int budget = radius - used;
  for (int c = -budget; c <= budget; ++c) {
    prefix.push_back(c);
    enumerate_l1_ball(dimension, radius, prefix, out);
    prefix.pop_back();
  }
}

std::string coords_id(const std::vector<int>& c) {
  std::string id;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) id += ',';
    id += std::to_string(c[i]);
  }
  return id;
}

}  // namespace

WeightedGraph lattice_ball(int dimension, int radius, LaplacianKind kind) {
  if (dimension < 1) throw Error(ErrorCode::InvalidArgument, "lattice dimension must be >= 1");
  if (radius < 0) throw Error(ErrorCode::InvalidArgument, "lattice radius must be >= 0");

  std::vector<std::vector<int>> points;
  std::vector<int> prefix;
  enumerate_l1_ball(dimension, radius, prefix, points);

  const std::uint64_t base = 2 * static_cast<std::uint64_t>(radius) + 1;
  auto key = [&](const std::vector<int>& c) {
    std::uint64_t k = 0;
    for (int v : c) k = k * base + static_cast<std::uint64_t>(v + radius);
    return k;
  };
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(points.size() * 2);
  for (std::size_t i = 0; i < points.size(); ++i) index.emplace(key(points[i]), i);

  std::vector<IndexedEdge> edges;
  std::vector<int> degree(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto c = points[i];
    for (int d = 0; d < dimension; ++d) {
      c[d] += 1;
      int norm = 0;
      for (int v : c) norm += std::abs(v);
      if (norm <= radius) {
        std::size_t j = index.at(key(c));
        edges.push_back({i, j, 1.0});
        ++degree[i];
        ++degree[j];
      }
      c[d] -= 1;
    }
  }

  const double ambient = 2.0 * dimension;
  std::vector<double> measure(points.size(), 1.0);
  std::vector<double> exterior(points.size(), 0.0);
  std::vector<VertexId> ids;
  ids.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    ids.push_back(coords_id(points[i]));
    if (kind == LaplacianKind::normalized) measure[i] = ambient;
    exterior[i] = ambient - degree[i];
  }

  GraphMetadata meta;
  meta.generator = "lattice";
  meta.params["dimension"] = std::to_string(dimension);
  meta.params["radius"] = std::to_string(radius);
  meta.params["kind"] = kind == LaplacianKind::combinatorial ? "combinatorial" : "normalized";
  meta.truncation_radius = radius;
  return WeightedGraph::build_indexed(std::move(ids), edges, std::move(measure), std::move(meta),
                                      std::move(exterior));
}

WeightedGraph path_graph(std::size_t n, double weight, double mu) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "path needs at least one vertex");
  std::vector<VertexId> ids;
  std::vector<IndexedEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(std::to_string(i));
    if (i + 1 < n) edges.push_back({i, i + 1, weight});
  }
  GraphMetadata meta;
  meta.generator = "path";
  meta.params["n"] = std::to_string(n);
  return WeightedGraph::build_indexed(std::move(ids), edges, std::vector<double>(n, mu),
                                      std::move(meta));
}

WeightedGraph random_tree(std::size_t n, std::uint64_t seed) {
  return random_connected_graph(n, 0, seed);
}

WeightedGraph random_connected_graph(std::size_t n, std::size_t extra_edges, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "graph needs at least one vertex");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> positive(0.5, 2.0);
  std::vector<VertexId> ids;
  std::vector<IndexedEdge> edges;
  std::set<std::pair<std::size_t, std::size_t>> present;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(std::to_string(i));
    if (i > 0) {
      std::uniform_int_distribution<std::size_t> parent(0, i - 1);
      std::size_t p = parent(rng);
      edges.push_back({p, i, positive(rng)});
      present.emplace(p, i);
    }
  }
  const std::size_t max_edges = n * (n - 1) / 2;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  while (extra_edges > 0 && present.size() < max_edges) {
    std::size_t a = pick(rng), b = pick(rng);
    if (a > b) std::swap(a, b);
    if (a == b || present.count({a, b})) continue;
    present.emplace(a, b);
    edges.push_back({a, b, positive(rng)});
    --extra_edges;
  }
  std::vector<double> measure(n);
  for (auto& m : measure) m = positive(rng);
  GraphMetadata meta;
  meta.generator = "random";
  meta.params["n"] = std::to_string(n);
  meta.params["seed"] = std::to_string(seed);
  return WeightedGraph::build_indexed(std::move(ids), edges, std::move(measure), std::move(meta));
}

std::vector<int> hop_distances(const WeightedGraph& graph, std::size_t source) {
  std::vector<int> dist(graph.size(), -1);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    std::size_t x = queue.front();
    queue.pop_front();
    for (const auto& nb : graph.neighbors(x)) {
      if (dist[nb.index] < 0) {
        dist[nb.index] = dist[x] + 1;
        queue.push_back(nb.index);
      }
    }
  }
  return dist;
}

Ball ball_and_volume(const WeightedGraph& graph, std::size_t center, int radius) {
  if (center >= graph.size()) throw Error(ErrorCode::UnknownVertex, "center index out of range");
  Ball ball;
  std::vector<int> dist(graph.size(), -1);
  std::deque<std::size_t> queue{center};
  dist[center] = 0;
  while (!queue.empty()) {
    std::size_t x = queue.front();
    queue.pop_front();
    ball.vertices.push_back(x);
    if (dist[x] == radius) continue;
    for (const auto& nb : graph.neighbors(x)) {
      if (dist[nb.index] < 0) {
        dist[nb.index] = dist[x] + 1;
        queue.push_back(nb.index);
      }
    }
  }
  std::sort(ball.vertices.begin(), ball.vertices.end());
  for (std::size_t x : ball.vertices) ball.volume += graph.measure(x);
  return ball;
}

VolumeGrowthFit fit_volume_growth(const WeightedGraph& graph, std::size_t center, int max_radius) {
  if (center >= graph.size()) throw Error(ErrorCode::UnknownVertex, "center index out of range");
  if (max_radius < 2 || graph.size() < 2) {
    throw Error(ErrorCode::InsufficientRadii, "volume fit needs max_radius >= 2 and >= 2 vertices");
  }
  VolumeGrowthFit fit;
  fit.center = center;
  auto dist = hop_distances(graph, center);
  // V(x, R) for all R at once from the distance histogram.
  std::vector<double> shell(static_cast<std::size_t>(max_radius) + 1, 0.0);
  for (std::size_t y = 0; y < graph.size(); ++y) {
    if (dist[y] <= max_radius) {
      shell[static_cast<std::size_t>(dist[y])] += graph.measure(y);
      if (graph.exterior_weight(y) > 0.0) fit.radius_exceeds_truncation = true;
    }
  }
  double running = shell[0];
  std::vector<double> lx, ly;
  for (int r = 1; r <= max_radius; ++r) {
    running += shell[static_cast<std::size_t>(r)];
    fit.radii.push_back(r);
    fit.volumes.push_back(running);
    lx.push_back(std::log(static_cast<double>(r)));
    ly.push_back(std::log(running));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.growth_degree = sxy / sxx;
  fit.fit_r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.lower_constant = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fit.radii.size(); ++i) {
    fit.lower_constant = std::min(fit.lower_constant,
                                  fit.volumes[i] / std::pow(fit.radii[i], fit.growth_degree));
  }
  return fit;
}

}  // namespace heatgraph
