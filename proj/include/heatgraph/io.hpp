#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "heatgraph/heat_kernel.hpp"
#include "json.hpp"

namespace heatgraph {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// {"vertices": [...], "edges": [{"u", "v", "w"}], "measure": {id: mu},
//  "metadata": {"generator", "params", "truncation_radius"}, "exterior": {id: weight}}
// "exterior" is only written for truncations.
Json graph_to_json(const WeightedGraph& graph);
WeightedGraph graph_from_json(const Json& j);

WeightedGraph read_graph(const std::filesystem::path& path);
void write_graph(const std::filesystem::path& path, const WeightedGraph& graph);

// IoError on failure.
std::string read_text(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);
// Writes to a temporary file in the same directory, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
void write_json(const std::filesystem::path& path, const Json& j);

// Numbers are written with round-trip precision.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string str() const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Non-finite doubles become strings ("inf", "-inf", "nan") since JSON has no literal for them.
Json number(double x);
Json numbers(const std::vector<double>& xs);
Json numbers(const Vector& xs);

// Report skeleton: schema_version, command and the echoed inputs.
Json report_envelope(const std::string& command, Json inputs);

// ---------------------------------------------------------------------------
// On-disk kernel cache keyed by graph content, method, boundary, grid, sources
// and backend options. Entries are raw doubles, so a warm hit reproduces the
// cold computation bit for bit.

class KernelCache {
 public:
  explicit KernelCache(std::filesystem::path dir);
  // HEATGRAPH_CACHE when set and non-empty.
  static std::optional<KernelCache> from_environment();

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::string key(const WeightedGraph& graph, const std::vector<double>& times, KernelMethod method,
                  const KernelOptions& options) const;
  std::optional<HeatKernel> load(GraphPtr graph, const std::vector<double>& times, KernelMethod method,
                                 const KernelOptions& options) const;
  void store(const HeatKernel& kernel, KernelMethod requested, const KernelOptions& options) const;

  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }

 private:
  std::filesystem::path dir_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

// compute_kernel through the cache when one is given.
HeatKernel cached_kernel(GraphPtr graph, std::vector<double> times, KernelMethod method,
                         const KernelOptions& options, const KernelCache* cache);

}  // namespace heatgraph
