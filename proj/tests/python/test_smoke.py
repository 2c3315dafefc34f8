import math

import numpy as np
import pytest

import heatgraph as hg


def test_lattice_ball_and_ids():
    g = hg.lattice_ball(2, 3)
    assert len(g) == 25
    assert g.is_truncation
    assert g.ids[g.index("0,0")] == "0,0"


def test_two_vertex_kernel_closed_form():
    g = hg.path_graph(2)
    (p,) = hg.heat_kernel(g, [0.7], method="eigen")
    assert p.shape == (2, 2)
    assert p[0, 0] == pytest.approx(0.5 * (1 + math.exp(-1.4)), abs=1e-13)
    assert p.sum(axis=0) == pytest.approx([1.0, 1.0], abs=1e-13)


def test_laplacian_kills_constants():
    g = hg.random_connected_graph(15, extra=4, seed=3)
    lap = hg.laplacian(g)
    assert np.abs(lap @ np.ones(len(g))).max() < 1e-12


def test_curvature_margin_homogeneity():
    g = hg.lattice_ball(1, 4)
    f = np.linspace(0.5, 2.0, len(g))
    x = g.index("0")
    a = hg.curvature_margin(g, x, f, "cde", 2.0, 0.0)
    b = hg.curvature_margin(g, x, 3.0 * f, "cde", 2.0, 0.0)
    assert b == pytest.approx(9.0 * a, rel=1e-9, abs=1e-12)


def test_single_vertex_blowup():
    g = hg.graph_from_json('{"vertices": ["o"], "edges": [], "measure": {"o": 1.0}}')
    r = hg.simulate(g, 2.0, 2.0, np.array([1.0]), np.array([1.0]), horizon=2.0)
    assert r["status"] == "blowup_detected"
    assert r["t_star"] == pytest.approx(1.0, rel=0.05)


def test_cli_in_process():
    code, report, _ = hg.run("exponents", "--p", 2, "--q", 2, "--m", 3)
    assert code == 0
    assert report["critical_ratio"] == 1.0
    code, report, err = hg.run("heat", "audit", "--family", "k2")
    assert code == 0 and report["pass"]
    code, report, err = hg.run("exponents", "--nope")
    assert code == 1 and report is None and "error" in err


def test_errors_are_translated():
    with pytest.raises(hg.HeatgraphError):
        hg.lattice_ball(2, 3).index("nowhere")


def test_audit_all_small():
    report = hg.audit_all({"family": "path:12"})
    assert report["pass"]
    with pytest.raises(hg.HeatgraphError):
        hg.audit_all({})
