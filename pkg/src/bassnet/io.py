"""File formats: network JSON, curve/report CSV and ``.meta.json`` sidecars.

Floats are written with ``repr`` (shortest string that round-trips a 64-bit
float), keys in fixed order, ``\\n`` line endings, so identical inputs give
identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import analytic
from .analytic import BassParams
from .curves import AdoptionCurve, EnsembleEstimate, ExactCurve
from .network import NetworkSpec, validate

__all__ = [
    "NetworkFormatError",
    "CurveFormatError",
    "write_network",
    "read_network",
    "network_to_dict",
    "network_from_dict",
    "sidecar_path",
    "write_meta",
    "read_meta",
    "curve_bounds",
    "write_curve",
    "read_curve",
    "write_report",
    "write_table",
    "CURVE_COLUMNS",
]

CURVE_COLUMNS = ["t", "f", "se", "lower", "upper"]


class NetworkFormatError(ValueError):
    pass


class CurveFormatError(ValueError):
    pass


def _num(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


# ---------------------------------------------------------------------------
# networks


def network_to_dict(net: NetworkSpec) -> dict:
    p = net.external_rates
    p_out = float(p[0]) if np.all(p == p[0]) else [float(v) for v in p]
    return {
        "M": net.node_count,
        "p": p_out,
        "edges": [[k, j, w] for k, j, w in net.edges],
        "meta": net.metadata,
    }


def write_network(path, net: NetworkSpec) -> None:
    bad = [v for v in validate(net, allow_isolated=True)]
    if bad:
        raise NetworkFormatError("refusing to write invalid network: " + "; ".join(v.message for v in bad))
    Path(path).write_text(json.dumps(network_to_dict(net)) + "\n")


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def network_from_dict(doc) -> NetworkSpec:
    """Parse and check a network document; errors name the offending JSON path."""
    if not isinstance(doc, dict):
        raise NetworkFormatError("$: expected an object")
    for key in ("M", "p", "edges"):
        if key not in doc:
            raise NetworkFormatError(f"$.{key}: missing")
    extra = set(doc) - {"M", "p", "edges", "meta"}
    if extra:
        raise NetworkFormatError(f"$: unknown field(s) {sorted(extra)}")
    M = doc["M"]
    if not _is_int(M) or M < 1:
        raise NetworkFormatError("$.M: expected a positive integer")
    p = doc["p"]
    if isinstance(p, list):
        if len(p) != M:
            raise NetworkFormatError(f"$.p: expected {M} entries, got {len(p)}")
        for i, v in enumerate(p):
            if not _is_num(v) or not v > 0:
                raise NetworkFormatError(f"$.p[{i}]: expected a positive number")
    elif not _is_num(p) or not p > 0:
        raise NetworkFormatError("$.p: expected a positive number or a list of them")
    meta = doc.get("meta", "")
    if not isinstance(meta, str):
        raise NetworkFormatError("$.meta: expected a string")
    edges = doc["edges"]
    if not isinstance(edges, list):
        raise NetworkFormatError("$.edges: expected a list")
    seen = set()
    for i, e in enumerate(edges):
        where = f"$.edges[{i}]"
        if not (isinstance(e, list) and len(e) == 3 and _is_int(e[0]) and _is_int(e[1]) and _is_num(e[2])):
            raise NetworkFormatError(f"{where}: expected [source:int, target:int, weight:float]")
        k, j, w = e
        if not (0 <= k < M and 0 <= j < M):
            raise NetworkFormatError(f"{where}: node id outside [0, {M})")
        if k == j:
            raise NetworkFormatError(f"{where}: self-loop at node {j}")
        if not w > 0:
            raise NetworkFormatError(f"{where}: weight must be positive")
        if (k, j) in seen:
            raise NetworkFormatError(f"{where}: duplicate edge ({k}, {j})")
        seen.add((k, j))
    return NetworkSpec.from_edges(M, p, edges, meta)


def read_network(path) -> NetworkSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"malformed JSON in {path}: {exc}") from None
    return network_from_dict(doc)


# ---------------------------------------------------------------------------
# sidecars


def sidecar_path(path) -> Path:
    """``run/c.csv`` -> ``run/c.meta.json``."""
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def write_meta(path, meta: dict) -> Path:
    side = sidecar_path(path)
    side.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    return side


def read_meta(path) -> dict:
    side = sidecar_path(path)
    if not side.exists():
        return {}
    return json.loads(side.read_text())


# ---------------------------------------------------------------------------
# curves


def curve_bounds(curve: AdoptionCurve):
    """``(lower, upper)`` columns: homogeneous bounds when ``p``/``q`` are known,
    else the (min, max) rate bounds from ``p_range``/``q_range``, else ``None``."""
    t = np.asarray(curve.t, dtype=float)
    bp = curve.params
    if bp is not None:
        return analytic.f_two_node(t, bp), analytic.f_bass(t, bp)
    pr, qr = curve.meta.get("p_range"), curve.meta.get("q_range")
    if pr and qr and pr[0] > 0 and qr[0] > 0:
        return analytic.f_two_node(t, BassParams(pr[0], qr[0])), analytic.f_bass(t, BassParams(pr[1], qr[1]))
    return None, None


def write_curve(path, curve: AdoptionCurve, extra_meta: dict | None = None, per_node: bool = True) -> None:
    """Write ``t,f,se,lower,upper[,f_0,...]`` plus the ``.meta.json`` sidecar."""
    t = np.asarray(curve.t, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise CurveFormatError("t must be strictly increasing")
    lower, upper = curve_bounds(curve)
    if lower is None and curve.lower is not None:
        lower, upper = curve.lower, curve.upper
    nodes = curve.f_nodes if per_node else None
    header = list(CURVE_COLUMNS)
    if nodes is not None:
        header += [f"f_{j}" for j in range(nodes.shape[0])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(t.size):
            row = [
                _num(t[i]),
                _num(curve.f[i]),
                _num(curve.se[i]) if curve.se is not None else "",
                _num(lower[i]) if lower is not None else "",
                _num(upper[i]) if upper is not None else "",
            ]
            if nodes is not None:
                row += [_num(v) for v in nodes[:, i]]
            w.writerow(row)
    meta = {k: v for k, v in curve.meta.items() if k != "states"}
    meta.setdefault("source", curve.source)
    for key in ("p", "q", "M", "seed", "runs"):
        meta.setdefault(key, None)
    if extra_meta:
        meta.update(extra_meta)
    write_meta(path, meta)


def _column(rows, header, name, required=True):
    if name not in header:
        if required:
            raise CurveFormatError(f"missing column {name!r}")
        return None
    i = header.index(name)
    cells = [r[i] for r in rows]
    if all(c == "" for c in cells):
        return None
    try:
        return np.array([float(c) if c != "" else np.nan for c in cells])
    except ValueError as exc:
        raise CurveFormatError(f"column {name!r}: {exc}") from None


def read_curve(path) -> AdoptionCurve:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CurveFormatError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    for name in CURVE_COLUMNS:
        if name not in header:
            raise CurveFormatError(f"missing column {name!r}")
    t = _column(body, header, "t")
    if t is None or np.any(np.isnan(t)):
        raise CurveFormatError("column 't' has empty cells")
    if np.any(np.diff(t) <= 0):
        raise CurveFormatError("t is not strictly increasing")
    f = _column(body, header, "f")
    se = _column(body, header, "se")
    node_cols = [h for h in header if h.startswith("f_")]
    f_nodes = np.array([_column(body, header, h) for h in node_cols]) if node_cols else None
    meta = read_meta(path)
    kw = dict(
        t=t,
        f=f,
        se=se,
        f_nodes=f_nodes,
        meta=meta,
        lower=_column(body, header, "lower"),
        upper=_column(body, header, "upper"),
    )
    if se is not None:
        return EnsembleEstimate(runs=int(meta.get("runs") or 0), base_seed=meta.get("seed"), **kw)
    return ExactCurve(**kw)


# ---------------------------------------------------------------------------
# reports and tables

REPORT_COLUMNS = [
    "t",
    "observed",
    "lower",
    "upper",
    "margin_low",
    "margin_high",
    "slack",
    "violation_low",
    "violation_high",
]


def write_report(path, report, extra_meta: dict | None = None) -> None:
    """Per-point bound check CSV; the sidecar carries the summary."""
    cols = [
        report.t,
        report.observed,
        report.lower,
        report.upper,
        report.margin_low,
        report.margin_high,
        report.slack,
    ]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for i in range(report.t.size):
            row = [_num(c[i]) for c in cols]
            row += [str(int(report.violation_low[i])), str(int(report.violation_high[i]))]
            w.writerow(row)
    meta = report.summary()
    if extra_meta:
        meta.update(extra_meta)
    write_meta(path, meta)


def write_table(path, header, rows, meta: dict | None = None) -> None:
    """Generic numeric CSV (``None``/NaN cells left empty)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else _num(c) for c in row])
    if meta is not None:
        write_meta(path, meta)
