#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heatgraph/io.hpp"

namespace heatgraph::cli {

enum ExitCode : int { kPass = 0, kUsage = 1, kAuditFailure = 2 };

// "lattice:D[:radius=R][:kind=combinatorial|normalized]", "path:N",
// "tree:N[:seed=S]", "random:N[:extra=E][:seed=S]", "k2".
struct FamilySpec {
  std::string name;
  int dimension = 1;
  std::optional<int> radius;
  LaplacianKind kind = LaplacianKind::combinatorial;
  std::size_t n = 0;
  std::size_t extra = 0;
  std::uint64_t seed = 1;

  bool is_lattice() const { return name == "lattice"; }
};

FamilySpec parse_family(std::string_view text);
WeightedGraph build_family(const FamilySpec& family, int default_radius = 20);

// "0.5,1,2" | "a:b:dyadic" | "a:b:h" (arithmetic, both ends included).
std::vector<double> parse_grid(std::string_view text);
// A real number or "inf".
double parse_exponent(std::string_view text);
// "delta:<id|origin>:<amplitude>" | "const:<value>" | "zero".
Vector parse_data(const WeightedGraph& graph, std::string_view text);
Boundary parse_boundary(std::string_view text);

// Consolidated battery on one graph family. Keys: "family" (required),
// "tolerance" (replaces every numeric tolerance), "seed", "curvature_budget",
// "samples". UsageError for an empty config.
Json audit_all(const Json& config);

// Runs one command line (without the program name). Reports go to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace heatgraph::cli
