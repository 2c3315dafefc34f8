"""Heat kernels, curvature audits and reaction-diffusion on weighted graphs."""

import json

from ._heatgraph import (
    Graph,
    HeatgraphError,
    critical_ratio,
    curvature_margin,
    gamma,
    gamma2,
    graph_from_json,
    heat_kernel,
    laplacian,
    lattice_ball,
    lattice_origin_id,
    path_graph,
    random_connected_graph,
    random_tree,
    simulate,
)
from ._heatgraph import _audit_all, _run


def audit_all(config):
    """Consolidated audit battery; `config` needs at least a "family"."""
    return json.loads(_audit_all(json.dumps(config)))


def run(*args):
    """Runs the command line in-process. Returns (exit_code, report_or_None, stderr)."""
    code, out, err = _run([str(a) for a in args])
    report = json.loads(out) if out.lstrip().startswith("{") else None
    return code, report, err


__all__ = [
    "Graph",
    "HeatgraphError",
    "audit_all",
    "critical_ratio",
    "curvature_margin",
    "gamma",
    "gamma2",
    "graph_from_json",
    "heat_kernel",
    "laplacian",
    "lattice_ball",
    "lattice_origin_id",
    "path_graph",
    "random_connected_graph",
    "random_tree",
    "run",
    "simulate",
]
