#include "heatgraph/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <random>

#include "CLI11.hpp"
#include "heatgraph/curvature.hpp"
#include "heatgraph/error.hpp"
#include "heatgraph/estimates.hpp"
#include "heatgraph/exponents.hpp"
#include "heatgraph/parabolic.hpp"

namespace heatgraph::cli {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double to_double(std::string_view s) {
  if (s == "inf" || s == "+inf") return kInfinity;
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) {
    throw Error(ErrorCode::UsageError, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

long long to_integer(std::string_view s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) {
    throw Error(ErrorCode::UsageError, "not an integer: '" + std::string(s) + "'");
  }
  return v;
}

std::size_t to_count(std::string_view s) {
  const auto v = to_integer(s);
  if (v < 0) throw Error(ErrorCode::UsageError, "expected a nonnegative integer: '" + std::string(s) + "'");
  return static_cast<std::size_t>(v);
}

LaplacianKind parse_kind(std::string_view s) {
  if (s == "combinatorial") return LaplacianKind::combinatorial;
  if (s == "normalized") return LaplacianKind::normalized;
  throw Error(ErrorCode::UsageError, "unknown laplacian kind '" + std::string(s) + "'");
}

std::size_t vertex_index(const WeightedGraph& g, const std::string& id) {
  if (id != "origin") return g.index(id);
  const auto& params = g.metadata().params;
  const auto dim = params.find("dimension");
  if (dim == params.end()) return 0;
  return g.index(lattice_origin_id(std::stoi(dim->second)));
}

}  // namespace

FamilySpec parse_family(std::string_view text) {
  auto parts = split(text, ':');
  FamilySpec f;
  f.name = parts[0];
  std::size_t next = 1;
  auto positional = [&](const char* what) -> std::string {
    if (next >= parts.size() || parts[next].find('=') != std::string::npos) {
      throw Error(ErrorCode::UsageError, std::string("family '") + std::string(text) + "' needs " + what);
    }
    return parts[next++];
  };
  if (f.name == "lattice") {
    f.dimension = static_cast<int>(to_integer(positional("a dimension")));
    if (f.dimension < 1) throw Error(ErrorCode::UsageError, "lattice dimension must be >= 1");
  } else if (f.name == "path" || f.name == "tree" || f.name == "random") {
    f.n = to_count(positional("a vertex count"));
  } else if (f.name != "k2") {
    throw Error(ErrorCode::UsageError, "unknown graph family '" + f.name + "'");
  }
  for (; next < parts.size(); ++next) {
    const auto kv = split(parts[next], '=');
    if (kv.size() != 2) throw Error(ErrorCode::UsageError, "bad family option '" + parts[next] + "'");
    if (kv[0] == "radius") {
      f.radius = static_cast<int>(to_integer(kv[1]));
    } else if (kv[0] == "kind") {
      f.kind = parse_kind(kv[1]);
    } else if (kv[0] == "seed") {
      f.seed = to_count(kv[1]);
    } else if (kv[0] == "extra") {
      f.extra = to_count(kv[1]);
    } else {
      throw Error(ErrorCode::UsageError, "unknown family option '" + kv[0] + "'");
    }
  }
  return f;
}

WeightedGraph build_family(const FamilySpec& f, int default_radius) {
  if (f.name == "lattice") return lattice_ball(f.dimension, f.radius.value_or(default_radius), f.kind);
  if (f.name == "path") return path_graph(f.n);
  if (f.name == "tree") return random_tree(f.n, f.seed);
  if (f.name == "random") return random_connected_graph(f.n, f.extra, f.seed);
  return path_graph(2);
}

std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> grid;
  if (text.find(':') == std::string_view::npos) {
    for (const auto& s : split(text, ',')) grid.push_back(to_double(s));
  } else {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw Error(ErrorCode::UsageError, "grid must be a:b:dyadic or a:b:step");
    const double a = to_double(parts[0]);
    const double b = to_double(parts[1]);
    if (!(a <= b)) throw Error(ErrorCode::UsageError, "grid needs a <= b");
    if (parts[2] == "dyadic") {
      if (!(a > 0.0)) throw Error(ErrorCode::UsageError, "dyadic grid needs a > 0");
      grid = dyadic_grid(a, b);
    } else {
      const double h = to_double(parts[2]);
      if (!(h > 0.0)) throw Error(ErrorCode::UsageError, "grid step must be > 0");
      const auto n = static_cast<long long>(std::floor((b - a) / h + 1e-9));
      for (long long k = 0; k <= n; ++k) grid.push_back(a + static_cast<double>(k) * h);
    }
  }
  if (grid.empty()) throw Error(ErrorCode::UsageError, "empty grid");
  return grid;
}

double parse_exponent(std::string_view text) { return to_double(text); }

Vector parse_data(const WeightedGraph& g, std::string_view text) {
  const auto parts = split(text, ':');
  const auto n = static_cast<Eigen::Index>(g.size());
  if (parts[0] == "zero" && parts.size() == 1) return Vector::Zero(n);
  if (parts[0] == "const" && parts.size() == 2) return Vector::Constant(n, to_double(parts[1]));
  if (parts[0] == "delta" && parts.size() == 3) return delta_data(g, vertex_index(g, parts[1]), to_double(parts[2]));
  throw Error(ErrorCode::UsageError, "data must be delta:<id>:<a>, const:<c> or zero");
}

Boundary parse_boundary(std::string_view text) {
  if (text == "natural") return Boundary::natural;
  if (text == "dirichlet") return Boundary::dirichlet;
  throw Error(ErrorCode::UsageError, "boundary must be natural or dirichlet");
}

// ---------------------------------------------------------------------------
// audit-all

namespace {

struct Battery {
  std::optional<double> override_tolerance;
  Json audits = Json::array();
  Json skipped = Json::array();
  bool pass = true;

  double tol(double t) const { return override_tolerance.value_or(t); }

  void add(const std::string& name, double measured, double tolerance, bool ok, const std::string& note = {}) {
    Json a{{"name", name}, {"measured", number(measured)}, {"tolerance", number(tolerance)}, {"pass", ok}};
    if (!note.empty()) a["note"] = note;
    audits.push_back(std::move(a));
    pass = pass && ok;
  }
  // measured <= tolerance
  void bound(const std::string& name, double measured, double tolerance, const std::string& note = {}) {
    const double t = tol(tolerance);
    add(name, measured, t, measured <= t, note);
  }
};

WeightedGraph small_member(const FamilySpec& f, const WeightedGraph& g, std::size_t limit) {
  if (!f.is_lattice()) return g;
  int r = 0;
  while (lattice_ball(f.dimension, r + 1, f.kind).size() <= limit) ++r;
  return lattice_ball(f.dimension, r, f.kind);
}

std::vector<double> window_grid(double t0, double t1) {
  std::vector<double> t;
  for (double s = t0; s <= t1 * (1 + 1e-12); s *= std::sqrt(2.0)) t.push_back(s);
  if (std::abs(t.back() - t1) > 1e-9 * t1) t.push_back(t1);
  t.back() = t1;
  return t;
}

}  // namespace

Json audit_all(const Json& config) {
  if (!config.is_object() || config.empty() || !config.contains("family")) {
    throw Error(ErrorCode::UsageError, "audit-all config needs at least a \"family\"");
  }
  const auto family = parse_family(config.at("family").get<std::string>());
  Battery b;
  if (config.contains("tolerance")) b.override_tolerance = config.at("tolerance").get<double>();
  const std::uint64_t seed = config.value("seed", 1);
  const std::size_t samples = config.value("samples", std::size_t{200});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto graph = share(build_family(family));
  if (graph->size() > 2000) throw Error(ErrorCode::UsageError, "audit-all needs at most 2000 vertices");
  const std::size_t origin =
      family.is_lattice() ? graph->index(lattice_origin_id(family.dimension)) : std::size_t{0};

  // heat-kernel invariants
  {
    auto kernel = compute_kernel(graph, {0.25, 0.5, 1.0, 2.0, 4.0}, KernelMethod::eigen);
    KernelAuditOptions opts;
    opts.override_tolerance = b.override_tolerance;
    for (const auto& item : audit_kernel(kernel, opts).items) {
      b.add("kernel." + item.name, item.measured, item.tolerance, item.pass, item.note);
    }

    Vector I(static_cast<Eigen::Index>(graph->size()));
    for (auto& v : I) v = unit(rng) - 0.5;
    for (double k : {1.0, 2.0, kInfinity}) {
      auto c = contraction_audit(kernel, I, k);
      double worst = 0.0;
      for (double l : c.lhs) worst = std::max(worst, l / c.rhs - 1.0);
      b.bound("estimates.contraction_k" + std::string(std::isinf(k) ? "inf" : std::to_string(static_cast<int>(k))),
              std::max(worst, 0.0), 1e-12);
    }
  }

  // series equivalence on a small member
  {
    const auto small = small_member(family, *graph, 50);
    if (small.size() <= 50) {
      Vector u(static_cast<Eigen::Index>(small.size()));
      for (auto& v : u) v = unit(rng);
      double worst = 0.0;
      for (double t : {0.5, 1.0, 4.0}) {
        worst = std::max(worst, series_vs_eigen_audit(small, u, t, 200, true).final_error);
      }
      b.bound("kernel.series_vs_eigen", worst, 1e-10);
    }
  }

  // decay on the exhaustion
  if (family.is_lattice() && family.dimension <= 2) {
    auto ex = exhaustion_kernel({family.dimension, family.kind}, lattice_origin_id(family.dimension),
                                window_grid(1.0, 64.0), 1e-10);
    WindowOptions w;
    if (b.override_tolerance) {
      w.relative_tolerance = 0.0;
      w.absolute_tolerance = *b.override_tolerance;
    }
    const auto o = ex.kernel.graph->index(lattice_origin_id(family.dimension));
    for (double r : {kInfinity, 2.0}) {
      auto fit = kernel_decay_fit(ex.kernel, o, r, family.dimension, w);
      b.add(std::string("estimates.decay_slope_r") + (std::isinf(r) ? "inf" : "2"),
            std::abs(fit.fitted_slope - fit.theoretical_slope), fit.tolerance, fit.pass,
            "fitted " + std::to_string(fit.fitted_slope) + " vs " + std::to_string(fit.theoretical_slope));
    }
  }

  // curvature self-consistency and Li-Yau / Harnack with the estimated n
  {
    SearchBudget budget;
    budget.seed = seed;
    budget.max_evaluations = config.value("curvature_budget", std::size_t{20000});
    double reeval = 0.0, homog = 0.0;
    std::size_t inconsistent = 0;
    double n_best = 0.0;
    for (auto kind : {CurvatureKind::cde_prime, CurvatureKind::cde}) {
      CurvatureQuery q{origin, 2.0, 0.0, kind};
      auto r = check_curvature(*graph, q, budget);
      if (kind == CurvatureKind::cde_prime) n_best = r.n_best;
      std::vector<Witness> all = r.witnesses;
      if (r.witness) all.push_back(*r.witness);
      for (const auto& w : all) {
        auto c = recheck_certificate(*graph, q, w);
        reeval = std::max(reeval, c.reevaluation_error);
        if (!c.consistent_with_implication) ++inconsistent;
        Vector f = w.f.expand(graph->size());
        const double m1 = curvature_margin(cde_form(*graph, origin, f), kind, q.n, q.K);
        const double m3 = curvature_margin(cde_form(*graph, origin, 3.0 * f), kind, q.n, q.K);
        homog = std::max(homog, std::abs(m3 - 9.0 * m1) / std::max(1.0, std::abs(9.0 * m1)));
      }
    }
    b.bound("curvature.certificate_reevaluation", reeval, 1e-9);
    b.bound("curvature.homogeneity", homog, 1e-9);
    b.add("curvature.implication_direction", static_cast<double>(inconsistent), 0.0, inconsistent == 0);

    if (std::isfinite(n_best) && n_best > 0.0) {
      KernelOptions dirichlet;
      dirichlet.boundary = Boundary::dirichlet;
      dirichlet.sources = {origin};
      auto kernel = compute_kernel(graph, dyadic_grid(0.25, 16.0), KernelMethod::taylor, dirichlet);
      const auto inner = interior_vertices(*graph, 2);
      auto ly = li_yau_audit(kernel, origin, n_best, sample_li_yau(kernel, samples, seed, inner), b.tol(1e-9));
      b.add("curvature.li_yau_violations", static_cast<double>(ly.violations), 0.0, ly.pass,
            "n = " + std::to_string(n_best) + ", grid minimal n " + std::to_string(ly.minimal_n));
      auto h = harnack_audit(kernel, origin, n_best, sample_harnack(kernel, samples, seed, inner), b.tol(1e-9));
      b.add("curvature.harnack_violations", static_cast<double>(h.violations), 0.0, h.pass,
            "worst ratio " + std::to_string(h.worst_ratio));
    } else {
      b.skipped.push_back({{"name", "curvature.li_yau"}, {"reason", "no finite n_best at the source"}});
    }
  }

  // comparison principle
  {
    double worst = 0.0;
    bool ok = true;
    for (int i = 0; i < 5; ++i) {
      SystemSpec lo;
      lo.graph = graph;
      lo.boundary = graph->is_truncation() ? Boundary::dirichlet : Boundary::natural;
      lo.p = 1.0 + 2.0 * unit(rng);
      lo.q = 1.0 + 2.0 * unit(rng);
      const auto n = static_cast<Eigen::Index>(graph->size());
      lo.u0 = Vector::Zero(n);
      lo.v0 = Vector::Zero(n);
      auto hi = lo;
      for (Eigen::Index k = 0; k < n; ++k) {
        lo.u0[k] = 0.2 * unit(rng);
        lo.v0[k] = 0.2 * unit(rng);
        hi.u0[k] = lo.u0[k] + 0.2 * unit(rng);
        hi.v0[k] = lo.v0[k] + 0.2 * unit(rng);
      }
      auto c = comparison_audit(lo, hi, 1.0);
      worst = std::max(worst, c.max_violation);
      ok = ok && c.pass;
    }
    b.add("parabolic.comparison", worst, b.tol(1e-9), ok && worst <= b.tol(1e-9));
  }

  // exponent identities
  {
    std::size_t failures = 0, checks = 0;
    double worst = 0.0;
    for (const auto& d : random_feasible_draws(samples, seed)) {
      EpsilonPolicy policy;
      policy.delta_fraction = d.delta_fraction;
      auto r = verify_ledger(exponent_profile(d.p, d.q, d.growth_degree, policy), b.tol(1e-12));
      failures += r.failures();
      checks += r.checks.size();
      for (const auto& c : r.checks) {
        if (c.identity) worst = std::max(worst, c.error);
      }
    }
    b.add("exponents.ledger", worst, b.tol(1e-12), failures == 0,
          std::to_string(checks) + " checks, " + std::to_string(failures) + " failures");
  }

  Json report = report_envelope("audit-all", config);
  report["vertices"] = graph->size();
  report["audits"] = std::move(b.audits);
  report["skipped"] = std::move(b.skipped);
  report["pass"] = b.pass;
  return report;
}

// ---------------------------------------------------------------------------
// command line

namespace {

struct GraphArgs {
  std::string graph;
  std::string family;

  void attach(CLI::App* app) {
    app->add_option("--graph", graph, "graph JSON file");
    app->add_option("--family", family, "generator, e.g. lattice:2:radius=20");
  }
  GraphPtr load() const {
    if (graph.empty() == family.empty()) throw Error(ErrorCode::UsageError, "give exactly one of --graph, --family");
    if (!graph.empty()) return share(read_graph(graph));
    return share(build_family(parse_family(family)));
  }
  Json echo() const { return graph.empty() ? Json{{"family", family}} : Json{{"graph", graph}}; }
};

struct Output {
  std::string out;
  std::string csv;

  void attach(CLI::App* app, bool with_csv) {
    app->add_option("--out", out, "write the JSON report here as well");
    if (with_csv) app->add_option("--csv", csv, "time-series CSV");
  }
};

Boundary boundary_for(const std::string& name, const WeightedGraph& g) {
  if (name == "auto") return g.is_truncation() ? Boundary::dirichlet : Boundary::natural;
  return parse_boundary(name);
}

std::string_view boundary_name(Boundary b) { return b == Boundary::dirichlet ? "dirichlet" : "natural"; }

Json function_json(const WeightedGraph& g, const TestFunction& f) {
  Json j = Json::object();
  for (std::size_t i = 0; i < f.support.size(); ++i) j[g.id(f.support[i])] = f.values[i];
  return j;
}

Json ledger_json(const LedgerReport& r) {
  Json a = Json::array();
  for (const auto& c : r.checks) {
    Json j{{"name", c.name}, {"value", number(c.value)}, {"pass", c.pass}};
    if (c.identity) {
      j["expected"] = number(c.expected);
      j["error"] = number(c.error);
    } else {
      j["lower"] = number(c.lower);
      j["upper"] = number(c.upper);
    }
    a.push_back(std::move(j));
  }
  return Json{{"checks", std::move(a)}, {"tolerance", r.tolerance}, {"pass", r.pass}, {"failures", r.failures()}};
}

Json profile_json(const ExponentProfile& e) {
  Json j{{"p", e.p},
         {"q", e.q},
         {"m", e.growth_degree},
         {"swapped", e.swapped},
         {"critical_ratio", number(e.critical_ratio)},
         {"half_m", e.growth_degree / 2},
         {"regime", to_string(e.regime)},
         {"on_critical_curve", e.on_critical_curve}};
  if (e.has_ledger) {
    j["r1"] = e.r1;
    j["r2"] = e.r2;
    j["epsilon_caps"] = {{"integrability", number(e.epsilon_cap_integrability)},
                         {"ordering", number(e.epsilon_cap_ordering)},
                         {"window", number(e.epsilon_cap_window)}};
    j["epsilon"] = e.epsilon;
    j["delta_window"] = {e.delta_lower, e.delta_upper};
    j["delta"] = e.delta;
    j["s1"] = e.s1;
    j["s2"] = e.s2;
    j["w"] = e.w;
    j["w1"] = e.w1;
    j["k_star"] = e.k_star;
  }
  return j;
}

int emit(std::ostream& out, const Output& o, const Json& report, bool pass) {
  if (!o.out.empty()) write_json(o.out, report);
  out << report.dump(2) << "\n";
  return pass ? kPass : kAuditFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"heatgraph: heat kernels, curvature and reaction-diffusion on weighted graphs"};
  app.require_subcommand(1);
  int status = kPass;
  std::function<int()> action;
  auto bind = [&](CLI::App* cmd, std::function<int()> fn) {
    cmd->callback([&action, fn = std::move(fn)] { action = fn; });
  };

  // graph
  auto* graph_cmd = app.add_subcommand("graph", "graph files and generators");
  graph_cmd->require_subcommand(1);
  struct {
    int lattice = 0;
    int radius = 10;
    std::string kind = "combinatorial";
    std::size_t path = 0, tree = 0, random = 0, extra = 0;
    std::uint64_t seed = 1;
    Output o;
  } gen;
  auto* gen_cmd = graph_cmd->add_subcommand("gen", "generate a graph file");
  gen_cmd->add_option("--lattice", gen.lattice, "lattice dimension");
  gen_cmd->add_option("--radius", gen.radius, "l1 radius");
  gen_cmd->add_option("--kind", gen.kind, "combinatorial | normalized");
  gen_cmd->add_option("--path", gen.path, "path on N vertices");
  gen_cmd->add_option("--tree", gen.tree, "random tree on N vertices");
  gen_cmd->add_option("--random", gen.random, "random connected graph on N vertices");
  gen_cmd->add_option("--extra", gen.extra, "extra chords for --random");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.o.out, "graph JSON path (stdout when absent)");
  bind(gen_cmd, [&] {
    const int chosen = (gen.lattice > 0) + (gen.path > 0) + (gen.tree > 0) + (gen.random > 0);
    if (chosen != 1) throw Error(ErrorCode::UsageError, "choose one of --lattice, --path, --tree, --random");
    WeightedGraph g = gen.lattice > 0 ? lattice_ball(gen.lattice, gen.radius, parse_kind(gen.kind))
                      : gen.path > 0  ? path_graph(gen.path)
                      : gen.tree > 0  ? random_tree(gen.tree, gen.seed)
                                      : random_connected_graph(gen.random, gen.extra, gen.seed);
    if (gen.o.out.empty()) {
      out << graph_to_json(g).dump(2) << "\n";
    } else {
      write_graph(gen.o.out, g);
      out << Json{{"schema_version", kSchemaVersion}, {"command", "graph gen"}, {"out", gen.o.out},
                  {"vertices", g.size()}, {"edges", g.edge_count()}}
                 .dump(2)
          << "\n";
    }
    return int{kPass};
  });

  struct {
    GraphArgs g;
    std::string center = "origin";
    int max_radius = 8;
    Output o;
  } info;
  auto* info_cmd = graph_cmd->add_subcommand("info", "scalars and volume growth");
  info.g.attach(info_cmd);
  info_cmd->add_option("--center", info.center);
  info_cmd->add_option("--max-radius", info.max_radius);
  info.o.attach(info_cmd, false);
  bind(info_cmd, [&] {
    auto g = info.g.load();
    const auto s = graph_scalars(*g);
    Json r = report_envelope("graph info", info.g.echo());
    r["vertices"] = g->size();
    r["edges"] = g->edge_count();
    r["truncation"] = g->is_truncation();
    r["mu_min"] = s.mu_min;
    r["mu_max"] = s.mu_max;
    r["omega_min"] = number(s.omega_min);
    r["d_mu"] = s.d_mu;
    r["d_mu_vertex"] = g->id(s.d_mu_vertex);
    if (g->size() > 1) {
      const auto fit = fit_volume_growth(*g, vertex_index(*g, info.center), info.max_radius);
      r["volume_growth"] = {{"radii", fit.radii},
                            {"volumes", fit.volumes},
                            {"growth_degree", fit.growth_degree},
                            {"lower_constant", fit.lower_constant},
                            {"fit_r2", fit.fit_r2},
                            {"radius_exceeds_truncation", fit.radius_exceeds_truncation}};
    }
    return emit(out, info.o, r, true);
  });

  // heat
  auto* heat_cmd = app.add_subcommand("heat", "heat kernels");
  heat_cmd->require_subcommand(1);
  struct HeatArgs {
    GraphArgs g;
    std::string t_grid = "0.5,1";
    std::string method = "auto";
    std::string boundary = "natural";
    std::vector<std::string> sources;
    double tolerance = 1e-13;
    std::string cache_dir;
    std::optional<double> override_tolerance;
    Output o;
  };
  HeatArgs hc, ha;
  auto attach_heat = [](CLI::App* cmd, HeatArgs& h) {
    h.g.attach(cmd);
    cmd->add_option("--t-grid,--t", h.t_grid, "times: list, a:b:dyadic or a:b:step");
    cmd->add_option("--method", h.method, "auto | eigen | taylor | krylov");
    cmd->add_option("--boundary", h.boundary, "natural | dirichlet");
    cmd->add_option("--source", h.sources, "source vertex id (repeatable; all when absent)");
    cmd->add_option("--tolerance", h.tolerance, "action accuracy of taylor/krylov");
    cmd->add_option("--cache-dir", h.cache_dir, "kernel cache (default HEATGRAPH_CACHE)");
    h.o.attach(cmd, true);
  };
  auto* compute_cmd = heat_cmd->add_subcommand("compute", "compute P(t, x, y)");
  attach_heat(compute_cmd, hc);
  auto* audit_cmd = heat_cmd->add_subcommand("audit", "kernel invariant audits");
  attach_heat(audit_cmd, ha);
  audit_cmd->add_option("--audit-tolerance", ha.override_tolerance, "replace every audit tolerance");

  auto heat_kernel = [](const HeatArgs& h, std::optional<KernelCache>& cache) {
    auto g = h.g.load();
    KernelOptions opts;
    opts.boundary = parse_boundary(h.boundary);
    opts.action_tolerance = h.tolerance;
    for (const auto& s : h.sources) opts.sources.push_back(vertex_index(*g, s));
    if (!h.cache_dir.empty()) {
      cache.emplace(h.cache_dir);
    } else {
      cache = KernelCache::from_environment();
    }
    return cached_kernel(g, parse_grid(h.t_grid), parse_kernel_method(h.method), opts, cache ? &*cache : nullptr);
  };
  auto heat_inputs = [](const HeatArgs& h) {
    Json in = h.g.echo();
    in["t_grid"] = h.t_grid;
    in["method"] = h.method;
    in["boundary"] = h.boundary;
    in["sources"] = h.sources;
    in["tolerance"] = h.tolerance;
    return in;
  };
  auto kernel_summary = [](Json& r, const HeatKernel& k, const std::optional<KernelCache>& cache) {
    r["method"] = to_string(k.method);
    r["times"] = k.times;
    Json sources = Json::array();
    for (auto s : k.sources) sources.push_back(k.graph->id(s));
    r["sources"] = std::move(sources);
    std::vector<double> defect;
    for (Eigen::Index i = 0; i < k.mass_defect.rows(); ++i) defect.push_back(k.mass_defect.row(i).maxCoeff());
    r["max_mass_defect"] = numbers(defect);
    if (cache) r["cache"] = {{"dir", cache->dir().string()}, {"hits", cache->hits()}, {"misses", cache->misses()}};
  };
  bind(compute_cmd, [&] {
    std::optional<KernelCache> cache;
    auto k = heat_kernel(hc, cache);
    Json r = report_envelope("heat compute", heat_inputs(hc));
    kernel_summary(r, k, cache);
    if (k.graph->size() * k.sources.size() * k.times.size() <= 250000) {
      Json slices = Json::array();
      for (const auto& m : k.slices) {
        Json cols = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) cols.push_back(numbers(Vector(m.col(j))));
        slices.push_back(std::move(cols));
      }
      r["slices"] = std::move(slices);
    }
    if (!hc.o.csv.empty()) {
      CsvTable t{{"t", "source_index", "max_p", "mass_defect"}, {}};
      for (std::size_t i = 0; i < k.times.size(); ++i) {
        for (Eigen::Index j = 0; j < k.slices[i].cols(); ++j) {
          t.rows.push_back({k.times[i], static_cast<double>(k.sources[static_cast<std::size_t>(j)]),
                            k.slices[i].col(j).maxCoeff(), k.mass_defect(static_cast<Eigen::Index>(i), j)});
        }
      }
      write_csv(hc.o.csv, t);
    }
    return emit(out, hc.o, r, true);
  });
  bind(audit_cmd, [&] {
    std::optional<KernelCache> cache;
    auto k = heat_kernel(ha, cache);
    Json in = heat_inputs(ha);
    if (ha.override_tolerance) in["audit_tolerance"] = *ha.override_tolerance;
    Json r = report_envelope("heat audit", in);
    kernel_summary(r, k, cache);
    KernelAuditOptions opts;
    opts.override_tolerance = ha.override_tolerance;
    Json items = Json::array();
    bool pass = true;
    auto add = [&](const std::string& name, double measured, double tolerance, bool ok, const std::string& note) {
      Json j{{"name", name}, {"measured", number(measured)}, {"tolerance", number(tolerance)}, {"pass", ok}};
      if (!note.empty()) j["note"] = note;
      items.push_back(std::move(j));
      pass = pass && ok;
    };
    for (const auto& it : audit_kernel(k, opts).items) add(it.name, it.measured, it.tolerance, it.pass, it.note);
    r["audits"] = std::move(items);
    r["pass"] = pass;
    return emit(out, ha.o, r, pass);
  });

  // curvature
  auto* curv_cmd = app.add_subcommand("curvature", "curvature-dimension falsification, Li-Yau and Harnack");
  curv_cmd->require_subcommand(1);
  struct {
    GraphArgs g;
    std::string kind = "cde-prime";
    double n = 2.0, K = 0.0;
    std::size_t budget = 0, restarts = 64, samples = 4000;
    std::uint64_t seed = 1;
    std::vector<std::string> vertices;
    std::size_t threads = 0;
    Output o;
  } cc;
  auto* check_cmd = curv_cmd->add_subcommand("check", "search for violating test functions");
  cc.g.attach(check_cmd);
  check_cmd->add_option("--kind", cc.kind, "cde | cde-prime");
  check_cmd->add_option("--n", cc.n, "dimension");
  check_cmd->add_option("--K", cc.K, "curvature");
  check_cmd->add_option("--budget", cc.budget, "objective evaluations per vertex (0 = unlimited)");
  check_cmd->add_option("--restarts", cc.restarts);
  check_cmd->add_option("--random-samples", cc.samples);
  check_cmd->add_option("--seed", cc.seed);
  check_cmd->add_option("--vertex", cc.vertices, "vertex id (repeatable; all when absent)");
  check_cmd->add_option("--threads", cc.threads, "workers (default HEATGRAPH_THREADS)");
  cc.o.attach(check_cmd, false);
  bind(check_cmd, [&] {
    auto g = cc.g.load();
    const auto kind = parse_curvature_kind(cc.kind);
    SearchBudget budget;
    budget.max_evaluations = cc.budget;
    budget.restarts = cc.restarts;
    budget.random_samples = cc.samples;
    budget.seed = cc.seed;
    std::vector<std::size_t> vs;
    for (const auto& v : cc.vertices) vs.push_back(vertex_index(*g, v));
    auto rep = check_curvature_all(*g, kind, cc.n, cc.K, budget, vs, cc.threads);
    Json in = cc.g.echo();
    in.update({{"kind", cc.kind}, {"n", cc.n}, {"K", cc.K}, {"budget", cc.budget}, {"restarts", cc.restarts},
               {"random_samples", cc.samples}, {"seed", cc.seed}, {"vertices", cc.vertices}});
    Json r = report_envelope("curvature check", in);
    Json per = Json::array();
    bool consistent = true;
    double reeval = 0.0;
    for (const auto& v : rep.vertices) {
      Json j{{"vertex", g->id(v.query.vertex)},
             {"interior", v.interior},
             {"verdict", to_string(v.verdict)},
             {"worst_margin", number(v.worst_margin)},
             {"n_best", number(v.n_best)},
             {"restarts", v.restarts},
             {"converged_restarts", v.converged_restarts},
             {"samples", v.samples},
             {"evaluations", v.evaluations},
             {"budget_exhausted", v.budget_exhausted}};
      if (v.witness) {
        auto c = recheck_certificate(*g, v.query, *v.witness);
        reeval = std::max(reeval, c.reevaluation_error);
        consistent = consistent && c.consistent_with_implication;
        j["witness"] = {{"f", function_json(*g, v.witness->f)},
                        {"margin", v.witness->margin},
                        {"lhs", v.witness->form.lhs},
                        {"delta_f", v.witness->form.delta_f},
                        {"gamma_f", v.witness->form.gamma_f},
                        {"f_delta_log_f", v.witness->form.f_delta_log_f},
                        {"reevaluation_error", c.reevaluation_error},
                        {"consistent_with_implication", c.consistent_with_implication}};
      }
      per.push_back(std::move(j));
    }
    r["vertices"] = std::move(per);
    r["interior_violations"] = rep.interior_violations;
    r["boundary_violations"] = rep.boundary_violations;
    r["interior_n_best"] = number(rep.interior_n_best);
    r["boundary_n_best"] = number(rep.boundary_n_best);
    r["max_reevaluation_error"] = reeval;
    const bool pass = rep.interior_violations + rep.boundary_violations == 0 && consistent && reeval <= 1e-9;
    r["pass"] = pass;
    return emit(out, cc.o, r, pass);
  });

  struct {
    GraphArgs g;
    std::string source = "origin";
    std::optional<double> n;
    std::string t_grid = "0.25:16:dyadic";
    std::string boundary = "auto";
    std::size_t samples = 500;
    std::uint64_t seed = 1;
    int margin = 2;
    Output o;
  } ly;
  auto* ly_cmd = curv_cmd->add_subcommand("li-yau", "Li-Yau and Harnack audits on P(t, x0, .)");
  ly.g.attach(ly_cmd);
  ly_cmd->add_option("--source", ly.source);
  ly_cmd->add_option("--n", ly.n, "dimension (default: n_best of a CDE' search at the source)");
  ly_cmd->add_option("--t-grid,--t", ly.t_grid);
  ly_cmd->add_option("--boundary", ly.boundary, "auto | natural | dirichlet");
  ly_cmd->add_option("--samples", ly.samples);
  ly_cmd->add_option("--seed", ly.seed);
  ly_cmd->add_option("--interior-margin", ly.margin, "hops kept away from the truncation boundary");
  ly.o.attach(ly_cmd, false);
  bind(ly_cmd, [&] {
    auto g = ly.g.load();
    const auto x0 = vertex_index(*g, ly.source);
    double n = 0.0;
    if (ly.n) {
      n = *ly.n;
    } else {
      SearchBudget budget;
      budget.seed = ly.seed;
      n = check_curvature(*g, {x0, 2.0, 0.0, CurvatureKind::cde_prime}, budget).n_best;
    }
    KernelOptions opts;
    opts.boundary = boundary_for(ly.boundary, *g);
    opts.sources = {x0};
    auto kernel = compute_kernel(g, parse_grid(ly.t_grid), KernelMethod::taylor, opts);
    const auto inner = interior_vertices(*g, ly.margin);
    auto a = li_yau_audit(kernel, x0, n, sample_li_yau(kernel, ly.samples, ly.seed, inner));
    auto h = harnack_audit(kernel, x0, n, sample_harnack(kernel, ly.samples, ly.seed, inner));
    Json in = ly.g.echo();
    in.update({{"source", ly.source}, {"t_grid", ly.t_grid}, {"samples", ly.samples}, {"seed", ly.seed}});
    Json r = report_envelope("curvature li-yau", in);
    r["n"] = number(n);
    r["li_yau"] = {{"checked", a.checked}, {"violations", a.violations}, {"worst_slack", number(a.worst_slack)},
                   {"minimal_n", a.minimal_n}, {"tolerance", 1e-9}, {"pass", a.pass}};
    r["harnack"] = {{"checked", h.checked}, {"violations", h.violations}, {"worst_ratio", number(h.worst_ratio)},
                    {"tolerance", 1e-9}, {"pass", h.pass}};
    r["pass"] = a.pass && h.pass;
    return emit(out, ly.o, r, a.pass && h.pass);
  });

  // decay
  auto* decay_cmd = app.add_subcommand("decay", "kernel decay on lattice exhaustions");
  decay_cmd->require_subcommand(1);
  struct {
    std::string family = "lattice:1";
    std::string r = "inf";
    std::string t = "4:64:dyadic";
    std::string center = "origin";
    double tolerance = 1e-10;
    Output o;
  } dc;
  auto* fit_cmd = decay_cmd->add_subcommand("fit", "fit log ||P(t, x0, .)||_r against log t");
  fit_cmd->add_option("--graph-family,--family", dc.family, "lattice:D[:kind=...]");
  fit_cmd->add_option("--r", dc.r, "exponent, or inf");
  fit_cmd->add_option("--t", dc.t, "time grid");
  fit_cmd->add_option("--center", dc.center);
  fit_cmd->add_option("--tolerance", dc.tolerance, "exhaustion convergence tolerance");
  dc.o.attach(fit_cmd, true);
  bind(fit_cmd, [&] {
    const auto fam = parse_family(dc.family);
    if (!fam.is_lattice()) throw Error(ErrorCode::UsageError, "decay fit needs a lattice family");
    const auto center = dc.center == "origin" ? lattice_origin_id(fam.dimension) : dc.center;
    const auto times = parse_grid(dc.t);
    auto ex = exhaustion_kernel({fam.dimension, fam.kind}, center, times, dc.tolerance);
    WindowOptions w;
    w.t_min = times.front();
    w.t_max = times.back();
    auto fit = kernel_decay_fit(ex.kernel, ex.kernel.graph->index(center), parse_exponent(dc.r), fam.dimension, w);
    Json r = report_envelope("decay fit", {{"family", dc.family}, {"r", dc.r}, {"t", dc.t}, {"center", center},
                                           {"tolerance", dc.tolerance}});
    r["radius"] = ex.radius;
    r["previous_radius"] = ex.previous_radius;
    r["exhaustion_difference"] = ex.difference;
    r["times"] = fit.times;
    r["norms"] = fit.values;
    r["fitted_slope"] = fit.fitted_slope;
    r["fitted_log_constant"] = fit.fitted_log_constant;
    r["fit_r2"] = fit.fit_r2;
    r["theoretical_slope"] = fit.theoretical_slope;
    r["tolerance"] = fit.tolerance;
    r["max_mass_defect"] = fit.max_mass_defect;
    r["pass"] = fit.pass;
    if (!dc.o.csv.empty()) {
      CsvTable t{{"t", "norm"}, {}};
      for (std::size_t i = 0; i < fit.times.size(); ++i) t.rows.push_back({fit.times[i], fit.values[i]});
      write_csv(dc.o.csv, t);
    }
    return emit(out, dc.o, r, fit.pass);
  });

  // simulate
  struct {
    GraphArgs g;
    std::string boundary = "auto";
    double p = 2.0, q = 2.0;
    std::string u0 = "zero", v0 = "zero";
    std::string solver = "rk4";
    double T = 1.0;
    double threshold = 1e8;
    std::optional<double> dt_max;
    std::optional<double> every;
    std::optional<double> m;
    bool duhamel = false;
    Output o;
  } sim;
  auto* sim_cmd = app.add_subcommand("simulate", "solve u_t = Delta u + v^p, v_t = Delta v + u^q");
  sim.g.attach(sim_cmd);
  sim_cmd->add_option("--boundary", sim.boundary, "auto | natural | dirichlet");
  sim_cmd->add_option("--p", sim.p);
  sim_cmd->add_option("--q", sim.q);
  sim_cmd->add_option("--u0", sim.u0, "delta:<id>:<a> | const:<c> | zero");
  sim_cmd->add_option("--v0", sim.v0);
  sim_cmd->add_option("--solver", sim.solver, "picard | rk4 | euler");
  sim_cmd->add_option("--T", sim.T, "horizon");
  sim_cmd->add_option("--threshold", sim.threshold, "sup norm treated as blowup");
  sim_cmd->add_option("--dt-max", sim.dt_max);
  sim_cmd->add_option("--every", sim.every, "output spacing (default T/64)");
  sim_cmd->add_option("--m", sim.m, "growth degree; adds the weighted norms of the decay audit to the CSV");
  sim_cmd->add_flag("--duhamel", sim.duhamel, "report the Duhamel residual (dense graphs)");
  sim.o.attach(sim_cmd, true);
  bind(sim_cmd, [&] {
    SystemSpec s;
    s.graph = sim.g.load();
    s.boundary = boundary_for(sim.boundary, *s.graph);
    s.p = sim.p;
    s.q = sim.q;
    s.u0 = parse_data(*s.graph, sim.u0);
    s.v0 = parse_data(*s.graph, sim.v0);
    SolverOptions o;
    o.solver = parse_solver(sim.solver);
    o.horizon = sim.T;
    o.threshold = sim.threshold;
    if (sim.dt_max) o.dt_max = *sim.dt_max;
    o.record_all = false;
    const double h = sim.every.value_or(sim.T / 64);
    if (!(h > 0.0)) throw Error(ErrorCode::UsageError, "--every must be > 0");
    for (double t = h; t < sim.T * (1 - 1e-12); t += h) o.output_times.push_back(t);
    o.output_times.push_back(sim.T);
    const auto tr = solve(s, o);

    Json in = sim.g.echo();
    in.update({{"boundary", boundary_name(s.boundary)}, {"p", sim.p}, {"q", sim.q}, {"u0", sim.u0}, {"v0", sim.v0},
               {"solver", sim.solver}, {"T", sim.T}, {"threshold", sim.threshold}});
    Json r = report_envelope("simulate", in);
    r["status"] = to_string(tr.status);
    r["stop_reason"] = tr.stop_reason;
    r["final_time"] = tr.final_time();
    r["t_cross"] = tr.t_cross ? Json(*tr.t_cross) : Json(nullptr);
    r["steps"] = tr.steps;
    r["rejected_steps"] = tr.rejected_steps;
    r["windows"] = tr.windows.size();
    r["min_value"] = tr.min_value;
    try {
      const auto b = blowup_detect(tr, sim.threshold);
      r["blowup"] = {{"crossed", b.crossed}, {"degenerate", b.degenerate}, {"t_cross", b.t_cross},
                     {"t_star", b.t_star},   {"alpha", b.alpha},           {"fit_points", b.fit_points},
                     {"fit_rms", b.fit_rms}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoGrowthDetected) throw;
      r["blowup"] = nullptr;
    }
    if (sim.duhamel) {
      const auto d = duhamel_residual(s, tr);
      r["duhamel"] = {{"max_residual", d.max_residual}, {"worst_time", d.worst_time},
                      {"times_checked", d.times_checked}};
    }
    std::optional<ExponentProfile> profile;
    if (sim.m) {
      auto e = exponent_profile(sim.p, sim.q, *sim.m);
      r["profile"] = profile_json(e);
      if (e.has_ledger) profile = e;
    }
    if (!sim.o.csv.empty()) {
      CsvTable t{{"t", "sup_u", "sup_v", "l1_u", "l1_v"}, {}};
      if (profile) {
        t.header.push_back("weighted_u");
        t.header.push_back("weighted_v");
      }
      const auto mu = s.graph->measure();
      for (std::size_t i = 0; i < tr.times.size(); ++i) {
        std::vector<double> row{tr.times[i], tr.u[i].cwiseAbs().maxCoeff(), tr.v[i].cwiseAbs().maxCoeff(),
                                lp_norm(mu, tr.u[i], 1.0), lp_norm(mu, tr.v[i], 1.0)};
        if (profile) {
          const auto& e = *profile;
          const Vector& u = e.swapped ? tr.v[i] : tr.u[i];
          const Vector& v = e.swapped ? tr.u[i] : tr.v[i];
          const double t = tr.times[i];
          row.push_back(t > 0 ? std::pow(t, e.w) * lp_norm(mu, u, e.s1) : 0.0);
          row.push_back(t > 0 ? std::pow(t, e.w1) * lp_norm(mu, v, e.s2) : 0.0);
        }
        t.rows.push_back(std::move(row));
      }
      write_csv(sim.o.csv, t);
    }
    return emit(out, sim.o, r, true);
  });

  // sweep
  struct {
    GraphArgs g;
    std::string boundary = "auto";
    std::string p = "2", q = "2";
    std::string scales = "0.01";
    std::string shape = "delta:origin:1";
    std::string v_shape;
    std::optional<double> m;
    double T = 64.0;
    double threshold = 1e8;
    std::optional<double> dt_max;
    std::size_t threads = 0;
    Output o;
  } sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "regime map over (p, q) and data scales");
  sw.g.attach(sweep_cmd);
  sweep_cmd->add_option("--boundary", sw.boundary);
  sweep_cmd->add_option("--p", sw.p, "grid: list or a:b:step");
  sweep_cmd->add_option("--q", sw.q);
  sweep_cmd->add_option("--scales", sw.scales, "data scales");
  sweep_cmd->add_option("--shape", sw.shape, "data shape for u (and v)");
  sweep_cmd->add_option("--v-shape", sw.v_shape);
  sweep_cmd->add_option("--m", sw.m, "growth degree (default: lattice dimension)");
  sweep_cmd->add_option("--T", sw.T);
  sweep_cmd->add_option("--threshold", sw.threshold);
  sweep_cmd->add_option("--dt-max", sw.dt_max);
  sweep_cmd->add_option("--threads", sw.threads);
  sw.o.attach(sweep_cmd, false);
  bind(sweep_cmd, [&] {
    auto g = sw.g.load();
    double m = 0.0;
    if (sw.m) {
      m = *sw.m;
    } else if (!sw.g.family.empty() && parse_family(sw.g.family).is_lattice()) {
      m = parse_family(sw.g.family).dimension;
    } else {
      throw Error(ErrorCode::UsageError, "--m is required unless --family is a lattice");
    }
    SweepOptions opts;
    opts.horizon = sw.T;
    opts.threshold = sw.threshold;
    opts.threads = sw.threads;
    if (sw.dt_max) opts.solver.dt_max = *sw.dt_max;
    const Vector u = parse_data(*g, sw.shape);
    const Vector v = sw.v_shape.empty() ? u : parse_data(*g, sw.v_shape);
    auto rep = fujita_sweep(g, boundary_for(sw.boundary, *g), m, parse_grid(sw.p), parse_grid(sw.q),
                            parse_grid(sw.scales), u, v, opts);
    Json in = sw.g.echo();
    in.update({{"p", sw.p}, {"q", sw.q}, {"scales", sw.scales}, {"shape", sw.shape}, {"m", m}, {"T", sw.T}});
    Json r = report_envelope("sweep", in);
    Json cells = Json::array();
    for (const auto& c : rep.cells) {
      cells.push_back({{"p", c.p},
                       {"q", c.q},
                       {"scale", c.scale},
                       {"critical_ratio", number(c.critical_ratio)},
                       {"regime", to_string(c.regime)},
                       {"verdict", to_string(c.verdict)},
                       {"t_cross", c.t_cross ? Json(*c.t_cross) : Json(nullptr)},
                       {"max_sup", number(c.max_sup)},
                       {"weighted_ratio", number(c.weighted_ratio)},
                       {"note", c.note}});
    }
    r["cells"] = std::move(cells);
    Json curve = Json::array();
    for (auto [p, q] : rep.theoretical_curve) curve.push_back({p, q});
    r["theoretical_curve"] = std::move(curve);
    return emit(out, sw.o, r, true);
  });

  // exponents
  struct {
    double p = 2.0, q = 2.0, m = 3.0;
    std::optional<double> epsilon;
    double delta_fraction = 0.5;
    Output o;
  } ex;
  auto* ex_cmd = app.add_subcommand("exponents", "exponent profile and identity ledger");
  ex_cmd->add_option("--p", ex.p)->required();
  ex_cmd->add_option("--q", ex.q)->required();
  ex_cmd->add_option("--m", ex.m, "growth degree")->required();
  ex_cmd->add_option("--epsilon", ex.epsilon);
  ex_cmd->add_option("--delta-fraction", ex.delta_fraction);
  ex.o.attach(ex_cmd, false);
  bind(ex_cmd, [&] {
    EpsilonPolicy pol;
    pol.epsilon = ex.epsilon;
    pol.delta_fraction = ex.delta_fraction;
    const auto e = exponent_profile(ex.p, ex.q, ex.m, pol);
    Json in{{"p", ex.p}, {"q", ex.q}, {"m", ex.m}, {"delta_fraction", ex.delta_fraction}};
    if (ex.epsilon) in["epsilon"] = *ex.epsilon;
    Json r = report_envelope("exponents", in);
    r.update(profile_json(e));
    bool pass = true;
    if (e.has_ledger) {
      const auto l = verify_ledger(e);
      r["ledger"] = ledger_json(l);
      pass = l.pass;
    }
    r["pass"] = pass;
    return emit(out, ex.o, r, pass);
  });

  // audit-all
  struct {
    std::string config;
    std::string family;
    std::optional<double> tolerance;
    std::optional<std::uint64_t> seed;
    Output o;
  } aa;
  auto* aa_cmd = app.add_subcommand("audit-all", "consolidated invariant battery");
  aa_cmd->add_option("--config", aa.config, "JSON config");
  aa_cmd->add_option("--family", aa.family);
  aa_cmd->add_option("--tolerance", aa.tolerance, "replace every numeric tolerance");
  aa_cmd->add_option("--seed", aa.seed);
  aa.o.attach(aa_cmd, false);
  bind(aa_cmd, [&] {
    Json config = Json::object();
    if (!aa.config.empty()) {
      const auto text = read_text(aa.config);
      if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::UsageError, "empty config");
      }
      try {
        config = Json::parse(text);
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, aa.config + ": " + e.what());
      }
    }
    if (!aa.family.empty()) config["family"] = aa.family;
    if (aa.tolerance) config["tolerance"] = *aa.tolerance;
    if (aa.seed) config["seed"] = *aa.seed;
    const auto r = audit_all(config);
    return emit(out, aa.o, r, r.at("pass").get<bool>());
  });

  std::vector<std::string> argv_store{"heatgraph"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << Json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
    return kUsage;
  }
  try {
    status = action ? action() : kUsage;
  } catch (const Error& e) {
    err << Json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << Json{{"error", "IoError"}, {"message", e.what()}}.dump() << "\n";
    return kUsage;
  }
  return status;
}

}  // namespace heatgraph::cli
