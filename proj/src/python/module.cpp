#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "heatgraph/cli.hpp"
#include "heatgraph/curvature.hpp"
#include "heatgraph/error.hpp"
#include "heatgraph/exponents.hpp"
#include "heatgraph/parabolic.hpp"

namespace py = pybind11;
using namespace heatgraph;

namespace {

using Holder = std::shared_ptr<WeightedGraph>;

Holder hold(WeightedGraph g) { return std::make_shared<WeightedGraph>(std::move(g)); }

LaplacianKind kind_of(const std::string& s) {
  if (s == "combinatorial") return LaplacianKind::combinatorial;
  if (s == "normalized") return LaplacianKind::normalized;
  throw Error(ErrorCode::InvalidArgument, "kind must be combinatorial or normalized");
}

}  // namespace

PYBIND11_MODULE(_heatgraph, m) {
  m.doc() = "Heat kernels, curvature audits and reaction-diffusion on weighted graphs";

  py::register_exception<Error>(m, "HeatgraphError");

  py::class_<WeightedGraph, Holder>(m, "Graph")
      .def_property_readonly("size", &WeightedGraph::size)
      .def_property_readonly("edge_count", &WeightedGraph::edge_count)
      .def_property_readonly("ids", &WeightedGraph::ids)
      .def_property_readonly("is_truncation", &WeightedGraph::is_truncation)
      .def_property_readonly("measure",
                             [](const WeightedGraph& g) {
                               auto s = g.measure();
                               return std::vector<double>(s.begin(), s.end());
                             })
      .def("index", &WeightedGraph::index, py::arg("id"))
      .def("to_json", [](const WeightedGraph& g) { return graph_to_json(g).dump(); })
      .def("__len__", &WeightedGraph::size)
      .def("__repr__", [](const WeightedGraph& g) {
        return "<Graph " + std::to_string(g.size()) + " vertices, " + std::to_string(g.edge_count()) + " edges>";
      });

  m.def(
      "lattice_ball",
      [](int dimension, int radius, const std::string& kind) { return hold(lattice_ball(dimension, radius, kind_of(kind))); },
      py::arg("dimension"), py::arg("radius"), py::arg("kind") = "combinatorial");
  m.def("path_graph", [](std::size_t n) { return hold(path_graph(n)); }, py::arg("n"));
  m.def("random_tree", [](std::size_t n, std::uint64_t seed) { return hold(random_tree(n, seed)); }, py::arg("n"),
        py::arg("seed") = 1);
  m.def(
      "random_connected_graph",
      [](std::size_t n, std::size_t extra, std::uint64_t seed) { return hold(random_connected_graph(n, extra, seed)); },
      py::arg("n"), py::arg("extra") = 0, py::arg("seed") = 1);
  m.def("graph_from_json", [](const std::string& text) { return hold(graph_from_json(Json::parse(text))); });
  m.def("lattice_origin_id", &lattice_origin_id);

  m.def(
      "heat_kernel",
      [](Holder g, std::vector<double> times, const std::string& method, const std::string& boundary) {
        KernelOptions opts;
        opts.boundary = cli::parse_boundary(boundary);
        auto k = compute_kernel(std::move(g), std::move(times), parse_kernel_method(method), opts);
        return k.slices;
      },
      py::arg("graph"), py::arg("times"), py::arg("method") = "auto", py::arg("boundary") = "natural",
      "List of matrices P[k][y, x] = P(times[k], x, y).");

  m.def(
      "laplacian",
      [](Holder g, const std::string& boundary) { return Matrix(laplacian(*g, cli::parse_boundary(boundary))); },
      py::arg("graph"), py::arg("boundary") = "natural");
  m.def("gamma", [](Holder g, const Vector& f, const Vector& h) { return gamma(*g, f, h); });
  m.def("gamma2", [](Holder g, const Vector& f) { return gamma2(*g, f); });

  m.def(
      "curvature_margin",
      [](Holder g, std::size_t x, const Vector& f, const std::string& kind, double n, double K) {
        return curvature_margin(cde_form(*g, x, f), parse_curvature_kind(kind), n, K);
      },
      py::arg("graph"), py::arg("vertex"), py::arg("f"), py::arg("kind") = "cde-prime", py::arg("n") = 2.0,
      py::arg("K") = 0.0);

  m.def("critical_ratio", [](double p, double q) { return exponent_profile(p, q, 1.0).critical_ratio; });

  m.def(
      "simulate",
      [](Holder g, double p, double q, const Vector& u0, const Vector& v0, const std::string& solver, double horizon,
         const std::string& boundary, double threshold) {
        SystemSpec s;
        s.graph = std::move(g);
        s.boundary = cli::parse_boundary(boundary);
        s.p = p;
        s.q = q;
        s.u0 = u0;
        s.v0 = v0;
        SolverOptions o;
        o.solver = parse_solver(solver);
        o.horizon = horizon;
        o.threshold = threshold;
        const auto tr = solve(s, o);
        py::dict d;
        d["status"] = std::string(to_string(tr.status));
        d["times"] = tr.times;
        d["u"] = tr.u;
        d["v"] = tr.v;
        d["t_cross"] = tr.t_cross ? py::cast(*tr.t_cross) : py::none();
        d["t_star"] = tr.t_star ? py::cast(*tr.t_star) : py::none();
        d["alpha"] = tr.alpha ? py::cast(*tr.alpha) : py::none();
        return d;
      },
      py::arg("graph"), py::arg("p"), py::arg("q"), py::arg("u0"), py::arg("v0"), py::arg("solver") = "rk4",
      py::arg("horizon") = 1.0, py::arg("boundary") = "natural", py::arg("threshold") = 1e8);

  m.def("_audit_all", [](const std::string& config) { return cli::audit_all(Json::parse(config)).dump(); });
  m.def("_run", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
