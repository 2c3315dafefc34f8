#include "heatgraph/io.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "heatgraph/error.hpp"

namespace heatgraph {

namespace fs = std::filesystem;

Json graph_to_json(const WeightedGraph& graph) {
  Json j;
  j["vertices"] = graph.ids();
  Json edges = Json::array();
  for (const auto& e : graph.edges()) {
    edges.push_back({{"u", graph.id(e.u)}, {"v", graph.id(e.v)}, {"w", e.weight}});
  }
  j["edges"] = std::move(edges);
  Json measure = Json::object();
  for (std::size_t i = 0; i < graph.size(); ++i) measure[graph.id(i)] = graph.measure(i);
  j["measure"] = std::move(measure);
  const auto& meta = graph.metadata();
  Json m = Json::object();
  if (!meta.generator.empty()) m["generator"] = meta.generator;
  if (!meta.params.empty()) m["params"] = meta.params;
  if (meta.truncation_radius) m["truncation_radius"] = *meta.truncation_radius;
  j["metadata"] = std::move(m);
  if (graph.is_truncation()) {
    Json ext = Json::object();
    for (std::size_t i = 0; i < graph.size(); ++i) {
      if (graph.exterior_weight(i) > 0.0) ext[graph.id(i)] = graph.exterior_weight(i);
    }
    j["exterior"] = std::move(ext);
  }
  return j;
}

namespace {

VertexId vertex_name(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorCode::ParseError, "vertex ids must be strings or integers");
}

}  // namespace

WeightedGraph graph_from_json(const Json& j) {
  try {
    if (!j.is_object() || !j.contains("vertices") || !j.contains("edges")) {
      throw Error(ErrorCode::ParseError, "graph JSON needs \"vertices\" and \"edges\"");
    }
    std::vector<VertexId> vertices;
    for (const auto& v : j.at("vertices")) vertices.push_back(vertex_name(v));
    std::vector<WeightedEdge> edges;
    for (const auto& e : j.at("edges")) {
      edges.push_back({vertex_name(e.at("u")), vertex_name(e.at("v")), e.value("w", 1.0)});
    }
    std::map<VertexId, double> measure;
    if (j.contains("measure")) {
      for (const auto& [k, v] : j.at("measure").items()) measure[k] = v.get<double>();
    } else {
      for (const auto& v : vertices) measure[v] = 1.0;
    }
    GraphMetadata meta;
    if (j.contains("metadata")) {
      const auto& m = j.at("metadata");
      meta.generator = m.value("generator", std::string{});
      if (m.contains("params")) {
        for (const auto& [k, v] : m.at("params").items()) {
          meta.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
      if (m.contains("truncation_radius") && !m.at("truncation_radius").is_null()) {
        meta.truncation_radius = m.at("truncation_radius").get<int>();
      }
    }
    std::map<VertexId, double> exterior;
    if (j.contains("exterior")) {
      for (const auto& [k, v] : j.at("exterior").items()) exterior[k] = v.get<double>();
    }
    return WeightedGraph::build(vertices, edges, measure, std::move(meta), exterior);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph JSON: ") + e.what());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& path) {
  const auto text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

WeightedGraph read_graph(const fs::path& path) { return graph_from_json(read_json(path)); }

void write_graph(const fs::path& path, const WeightedGraph& graph) { write_json(path, graph_to_json(graph)); }

void write_atomic(const fs::path& path, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()) + "." +
                              std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename onto " + path.string());
  }
}

void write_json(const fs::path& path, const Json& j) { write_atomic(path, j.dump(2) + "\n"); }

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

std::string CsvTable::str() const {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_double(row[i]);
    s += "\n";
  }
  return s;
}

void write_csv(const fs::path& path, const CsvTable& table) { write_atomic(path, table.str()); }

Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

Json numbers(const std::vector<double>& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(number(x));
  return a;
}

Json numbers(const Vector& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(number(x));
  return a;
}

Json report_envelope(const std::string& command, Json inputs) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["inputs"] = std::move(inputs);
  return j;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'H', 'G', 'K', 'C', 'A', 'C', 'H', '1'};

struct Fnv {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

void put_u64(std::string& s, std::uint64_t v) { s.append(reinterpret_cast<const char*>(&v), sizeof v); }

void put_doubles(std::string& s, const double* p, std::size_t n) {
  s.append(reinterpret_cast<const char*>(p), n * sizeof(double));
}

void put_matrix(std::string& s, const Matrix& m) {
  put_u64(s, static_cast<std::uint64_t>(m.rows()));
  put_u64(s, static_cast<std::uint64_t>(m.cols()));
  put_doubles(s, m.data(), static_cast<std::size_t>(m.size()));
}

struct Reader {
  const std::string& s;
  std::size_t pos = 0;
  void need(std::size_t n) const {
    if (pos + n > s.size()) throw Error(ErrorCode::IoError, "truncated kernel cache entry");
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, s.data() + pos, 8);
    pos += 8;
    return v;
  }
  void doubles(double* out, std::size_t n) {
    need(n * sizeof(double));
    std::memcpy(out, s.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
  }
  Matrix matrix() {
    const auto r = static_cast<Eigen::Index>(u64());
    const auto c = static_cast<Eigen::Index>(u64());
    Matrix m(r, c);
    doubles(m.data(), static_cast<std::size_t>(m.size()));
    return m;
  }
  Vector vector() {
    const auto n = static_cast<Eigen::Index>(u64());
    Vector v(n);
    doubles(v.data(), static_cast<std::size_t>(n));
    return v;
  }
};

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

KernelCache::KernelCache(fs::path dir) : dir_(std::move(dir)) {}

std::optional<KernelCache> KernelCache::from_environment() {
  const char* env = std::getenv("HEATGRAPH_CACHE");
  if (!env || !*env) return std::nullopt;
  return KernelCache(env);
}

std::string KernelCache::key(const WeightedGraph& graph, const std::vector<double>& times, KernelMethod method,
                             const KernelOptions& options) const {
  Fnv h;
  h.u64(graph.content_hash());
  h.u64(static_cast<std::uint64_t>(method));
  h.u64(static_cast<std::uint64_t>(options.boundary));
  h.u64(options.dense_limit);
  h.f64(options.action_tolerance);
  h.u64(options.scaling_and_squaring ? 1 : 0);
  h.u64(times.size());
  for (double t : times) h.f64(t);
  h.u64(options.sources.size());
  for (auto s : options.sources) h.u64(s);
  return hex(h.h);
}

std::optional<HeatKernel> KernelCache::load(GraphPtr graph, const std::vector<double>& times, KernelMethod method,
                                            const KernelOptions& options) const {
  const fs::path file = dir_ / (key(*graph, times, method, options) + ".hgk");
  std::error_code ec;
  if (!fs::exists(file, ec)) {
    ++misses_;
    return std::nullopt;
  }
  const std::string data = read_text(file);
  Reader r{data};
  r.need(sizeof kMagic);
  if (std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::IoError, "not a kernel cache entry: " + file.string());
  }
  r.pos = sizeof kMagic;
  if (r.u64() != graph->content_hash()) {
    ++misses_;
    return std::nullopt;
  }
  HeatKernel k;
  k.graph = graph;
  k.times = times;
  k.method = static_cast<KernelMethod>(r.u64());
  k.boundary = static_cast<Boundary>(r.u64());
  k.sources.resize(r.u64());
  for (auto& s : k.sources) s = r.u64();
  k.slices.resize(r.u64());
  for (auto& m : k.slices) m = r.matrix();
  k.mass_defect = r.matrix();
  if (r.u64() == 1) {
    Vector lambda = r.vector();
    Matrix q = r.matrix();
    Vector sqrt_mu = r.vector();
    k.spectral = std::make_shared<const SpectralDecomposition>(std::move(lambda), std::move(q), std::move(sqrt_mu));
  }
  k.provenance.generator = graph->metadata().generator;
  k.provenance.radius = graph->metadata().truncation_radius;
  ++hits_;
  return k;
}

void KernelCache::store(const HeatKernel& kernel, KernelMethod requested, const KernelOptions& options) const {
  std::string s(kMagic, sizeof kMagic);
  put_u64(s, kernel.graph->content_hash());
  put_u64(s, static_cast<std::uint64_t>(kernel.method));
  put_u64(s, static_cast<std::uint64_t>(kernel.boundary));
  put_u64(s, kernel.sources.size());
  for (auto x : kernel.sources) put_u64(s, x);
  put_u64(s, kernel.slices.size());
  for (const auto& m : kernel.slices) put_matrix(s, m);
  put_matrix(s, kernel.mass_defect);
  put_u64(s, kernel.spectral ? 1 : 0);
  if (kernel.spectral) {
    const auto& sd = *kernel.spectral;
    put_u64(s, static_cast<std::uint64_t>(sd.eigenvalues().size()));
    put_doubles(s, sd.eigenvalues().data(), static_cast<std::size_t>(sd.eigenvalues().size()));
    put_matrix(s, sd.eigenvectors());
    put_u64(s, static_cast<std::uint64_t>(sd.sqrt_measure().size()));
    put_doubles(s, sd.sqrt_measure().data(), static_cast<std::size_t>(sd.sqrt_measure().size()));
  }
  write_atomic(dir_ / (key(*kernel.graph, kernel.times, requested, options) + ".hgk"), s);
}

HeatKernel cached_kernel(GraphPtr graph, std::vector<double> times, KernelMethod method,
                         const KernelOptions& options, const KernelCache* cache) {
  if (cache) {
    if (auto hit = cache->load(graph, times, method, options)) return std::move(*hit);
  }
  auto kernel = compute_kernel(graph, times, method, options);
  if (cache) cache->store(kernel, method, options);
  return kernel;
}

}  // namespace heatgraph
