import json

import numpy as np
import pytest

from bassnet import analytic
from bassnet import io
from bassnet import network as nw
from bassnet.bounds import verify_bounds
from bassnet.curves import EnsembleEstimate, ExactCurve
from bassnet.exact import solve_master
from bassnet.montecarlo import estimate_ensemble
from bassnet.network import NetworkSpec

P, Q = 0.01, 0.1


def test_network_round_trip(tmp_path):
    for net in (
        nw.grid(2, 3, P, Q),
        nw.erdos_renyi(40, 3.0, P, Q, seed=2),
        NetworkSpec.from_edges(3, [0.1, 0.2, 0.3], [(0, 1, 1 / 3), (1, 2, 0.7), (2, 0, 1e-17)]),
    ):
        path = tmp_path / "n.json"
        io.write_network(path, net)
        back = io.read_network(path)
        assert back == net
        assert back.edges == net.edges
        assert back.metadata == net.metadata


def test_scalar_p_written_when_uniform(tmp_path):
    path = tmp_path / "n.json"
    io.write_network(path, nw.circle(4, P, Q))
    assert json.loads(path.read_text())["p"] == P
    io.write_network(path, NetworkSpec.from_edges(2, [0.1, 0.2], [(0, 1, Q), (1, 0, Q)]))
    assert json.loads(path.read_text())["p"] == [0.1, 0.2]


@pytest.mark.parametrize(
    "doc, match",
    [
        ({"M": 3, "p": P, "edges": [[0, 1, Q], [2, 2, Q]]}, r"\$\.edges\[1\]: self-loop at node 2"),
        ({"M": 3, "p": P, "edges": [[0, 1, Q], [0, 1, Q]]}, r"\$\.edges\[1\]: duplicate"),
        ({"M": 3, "p": P, "edges": [[0, 5, Q]]}, r"\$\.edges\[0\]: node id"),
        ({"M": 3, "p": P, "edges": [[0, 1, -1.0]]}, r"\$\.edges\[0\]: weight"),
        ({"M": 3, "p": [P, P], "edges": []}, r"\$\.p: expected 3"),
        ({"M": 3, "p": 0, "edges": []}, r"\$\.p"),
        ({"M": 3, "edges": []}, r"\$\.p: missing"),
        ({"M": 3, "p": P, "edges": [], "extra": 1}, "unknown field"),
        ({"M": True, "p": P, "edges": []}, r"\$\.M"),
        ([1, 2], r"\$: expected an object"),
    ],
)
def test_network_format_errors(doc, match):
    with pytest.raises(io.NetworkFormatError, match=match):
        io.network_from_dict(doc)


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(io.NetworkFormatError, match="malformed JSON"):
        io.read_network(path)


def test_isolated_nodes_are_readable(tmp_path):
    net = NetworkSpec.from_edges(3, P, [(0, 1, Q)])
    path = tmp_path / "n.json"
    io.write_network(path, net)
    assert io.read_network(path) == net


def test_exact_curve_round_trip(tmp_path):
    t = np.linspace(0, 50, 11)
    curve = solve_master(nw.circle(4, P, Q), t)
    path = tmp_path / "c.csv"
    io.write_curve(path, curve)
    back = io.read_curve(path)
    assert isinstance(back, ExactCurve)
    np.testing.assert_array_equal(back.t, curve.t)
    np.testing.assert_array_equal(back.f, curve.f)
    np.testing.assert_array_equal(back.f_nodes, curve.f_nodes)
    np.testing.assert_array_equal(back.lower, analytic.f_two_node(t, P, Q))
    np.testing.assert_array_equal(back.upper, analytic.f_bass(t, P, Q))
    assert back.params == curve.params
    assert path.read_text().splitlines()[0] == "t,f,se,lower,upper,f_0,f_1,f_2,f_3"
    meta = io.read_meta(path)
    assert meta["source"] == "exact" and meta["seed"] is None


def test_mc_curve_round_trip(tmp_path):
    est = estimate_ensemble(nw.circle(20, P, Q), np.linspace(0, 30, 7), 50, base_seed=3)
    path = tmp_path / "mc.csv"
    io.write_curve(path, est, per_node=False)
    back = io.read_curve(path)
    assert isinstance(back, EnsembleEstimate)
    assert back.runs == 50 and back.base_seed == 3
    np.testing.assert_array_equal(back.se, est.se)
    assert back.f_nodes is None


def test_inhomogeneous_curve_has_null_pq(tmp_path):
    net = NetworkSpec.from_edges(2, [0.1, 0.2], [(0, 1, Q), (1, 0, Q)])
    path = tmp_path / "c.csv"
    io.write_curve(path, solve_master(net, [0.0, 1.0]))
    meta = io.read_meta(path)
    assert meta["p"] is None and meta["q"] is None
    back = io.read_curve(path)
    assert back.lower[1] == analytic.f_two_node(1.0, 0.1, Q)
    assert back.upper[1] == analytic.f_bass(1.0, 0.2, Q)


def test_missing_column(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("t,f,se,lower\n0,0,,0\n")
    with pytest.raises(io.CurveFormatError, match="missing column 'upper'"):
        io.read_curve(path)


def test_non_increasing_time_rejected(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("t,f,se,lower,upper\n0,0,,,\n0,0,,,\n")
    with pytest.raises(io.CurveFormatError, match="strictly increasing"):
        io.read_curve(path)


def test_byte_determinism(tmp_path):
    t = np.linspace(0, 50, 11)
    curve = solve_master(nw.grid(2, 2, P, Q), t)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    io.write_curve(a, curve)
    io.write_curve(b, solve_master(nw.grid(2, 2, P, Q), t))
    assert a.read_bytes() == b.read_bytes()
    assert io.sidecar_path(a).read_bytes() == io.sidecar_path(b).read_bytes()


def test_sidecar_path():
    assert io.sidecar_path("run/c.csv").as_posix() == "run/c.meta.json"


def test_report(tmp_path):
    t = np.linspace(0, 50, 6)
    rep = verify_bounds(solve_master(nw.two_node(P, Q), t), (P, Q))
    path = tmp_path / "r.csv"
    io.write_report(path, rep)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(io.REPORT_COLUMNS)
    assert len(lines) == 7
    assert io.read_meta(path)["passed"] is True
