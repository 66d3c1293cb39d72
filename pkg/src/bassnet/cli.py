"""Command-line front end: ``bassnet {gen,exact,mc,bounds,gap,conjecture,figure1}``.

Exit codes: 0 success, 1 I/O failure, 2 invalid flags or inputs, 3 a
requested check failed. Every output file gets a ``.meta.json`` sidecar that
echoes the command line and the resolved configuration.
"""

from __future__ import annotations

import argparse
import os
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import BassParams
from .bounds import conjecture_experiment, gap_metrics, verify_bounds, verify_bounds_inhomogeneous
from .exact import MAX_EXACT_NODES, ExactSolverError, solve_master
from .io import (
    NetworkFormatError,
    CurveFormatError,
    read_curve,
    read_network,
    write_curve,
    write_meta,
    write_network,
    write_report,
    write_table,
)
from .montecarlo import estimate_ensemble
from .network import FAMILIES, check_homogeneity, generate

DEFAULT_SEED = 42
EXIT_IO, EXIT_USAGE, EXIT_CHECK = 1, 2, 3


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


def default_seed() -> int:
    env = os.environ.get("BASSNET_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"BASSNET_SEED must be an integer, got {env!r}") from None


def _positive(kind):
    def parse(text):
        try:
            val = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a {kind.__name__}, got {text!r}") from None
        if not val > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return val

    parse.__name__ = f"positive {kind.__name__}"
    return parse


pos_float = _positive(float)
pos_int = _positive(int)


def prob(text):
    val = float(text)
    if not 0 <= val <= 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return val


def float_list(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError("expected positive comma-separated numbers")
    return vals


def _run_meta(args, **extra):
    config = {k: v for k, v in vars(args).items() if k != "func" and not k.startswith("_")}
    meta = {"command": shlex.join(["bassnet"] + list(args._argv)), "config": config, "version": __version__}
    meta.update(extra)
    return meta


def _grid(t_max, points):
    if points < 2:
        raise UsageError("--points must be at least 2")
    return np.linspace(0.0, t_max, points)


def _out(path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args):
    params = {"p": args.p, "q": args.q}
    fam = args.family
    if fam in ("complete", "pairs"):
        params["M"] = _need(args, "M")
    elif fam == "circle":
        params.update(M=_need(args, "M"), sided=args.sided)
    elif fam == "grid":
        params.update(D=_need(args, "D"), side=_need(args, "side"))
    elif fam == "erdos_renyi":
        params.update(M=_need(args, "M"), lam=_need(args, "lam"))
    elif fam == "scale_free":
        params.update(M=_need(args, "M"), m_attach=args.m_attach)
    elif fam == "small_world":
        params.update(M=_need(args, "M"), k=args.k, rewire_prob=args.rewire_prob)
    try:
        net = generate(fam, seed=args.seed, **params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_network(_out(args.out), net)
    write_meta(args.out, _run_meta(args))
    h = check_homogeneity(net)
    print(f"M={net.node_count} edges={net.edge_count} q_j in [{h.q_min!r}, {h.q_max!r}] -> {args.out}")


def _need(args, name):
    val = getattr(args, name)
    if val is None:
        raise UsageError(f"--{name.replace('_', '-')} is required for family {args.family!r}")
    return val


def cmd_exact(args):
    net = read_network(args.net)
    if net.node_count > MAX_EXACT_NODES:
        raise UsageError(
            f"network has M={net.node_count} > {MAX_EXACT_NODES} nodes; the exact solver is capped, use `bassnet mc`"
        )
    t = _grid(args.t_max, args.points)
    try:
        curve = solve_master(net, t, allow_isolated=True)
    except ExactSolverError as exc:
        raise UsageError(str(exc)) from None
    write_curve(_out(args.out), curve, _run_meta(args), per_node=not args.aggregate_only)
    print(f"exact curve M={net.node_count} points={t.size} f(t_max)={float(curve.f[-1])!r} -> {args.out}")


def cmd_mc(args):
    net = read_network(args.net)
    t = _grid(args.t_max, args.points)
    est = estimate_ensemble(net, t, args.runs, base_seed=args.seed, per_node=args.per_node, threads=args.threads)
    write_curve(_out(args.out), est, _run_meta(args), per_node=args.per_node)
    print(f"mc curve M={net.node_count} runs={args.runs} f(t_max)={float(est.f[-1])!r} -> {args.out}")


def cmd_bounds(args):
    curve = read_curve(args.curve)
    bp = curve.params
    if args.net is not None:
        net = read_network(args.net)
        h = check_homogeneity(net)
        if bp is None or not h.homogeneous:
            report = verify_bounds_inhomogeneous(curve, net)
        else:
            report = verify_bounds(curve, bp)
    elif args.p is not None and args.q is not None:
        try:
            report = verify_bounds(curve, BassParams(args.p, args.q))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif bp is not None:
        report = verify_bounds(curve, bp)
    else:
        raise UsageError("curve metadata lacks p/q; pass --p/--q or --net")
    out = args.out or str(Path(args.curve).with_name(Path(args.curve).stem + "_bounds.csv"))
    write_report(_out(out), report, _run_meta(args))
    s = report.summary()
    print(
        f"{s['source']} curve: {s['violations_low']} lower / {s['violations_high']} upper violations, "
        f"worst margins {s['worst_margin_low']:.3e} / {s['worst_margin_high']:.3e} -> {out}"
    )
    if not report.passed:
        raise CheckFailed("bound violations beyond the allowed slack")


def cmd_gap(args):
    rows = []
    for lam in args.lambdas:
        g = gap_metrics(BassParams(args.p, lam * args.p))
        rows.append([g.lam, args.p, lam * args.p, g.t_half_lower, g.t_half_upper, g.ratio, g.asymptotic,
                     g.relative_deviation])
    header = ["lambda", "p", "q", "t_half_lower", "t_half_upper", "ratio", "asymptotic", "relative_deviation"]
    write_table(_out(args.out), header, rows, _run_meta(args))
    for r in rows:
        print(f"q/p={r[0]:g}: T_upper/T_lower = {r[5]:.6f}")
    ratios = [r[5] for r in rows]
    if not all(0 < r <= 1 for r in ratios):
        raise CheckFailed("half-life ratio outside (0, 1]")


def cmd_conjecture(args):
    bp = BassParams(args.p, args.q)
    t = _grid(args.t_max or 10.0 / (bp.p + bp.q), args.points)
    res = conjecture_experiment(args.M, bp, args.samples, seed=args.seed, t_grid=t, edge_prob=args.edge_prob)
    rows = [[t[i], res.f_complete[i], res.max_excess[i]] for i in range(t.size)]
    meta = _run_meta(args, worst_excess=res.worst, candidates=res.candidates, tolerance=res.tolerance)
    write_table(_out(args.out), ["t", "f_complete", "max_excess"], rows, meta)
    verdict = "counterexample candidates: " + str(res.candidates) if res.candidates else "no sample exceeds f_complete"
    print(f"M={args.M} samples={args.samples}: max excess {res.worst:.3e}; {verdict} -> {args.out}")


def cmd_figure1(args):
    from .plotting import render_figure1

    outdir = Path(args.outdir)
    panels, ratio = render_figure1(outdir, p=args.p, points=args.points)
    for key, pan in panels.items():
        rows = zip(pan.x, pan.t, pan.lower, pan.upper, pan.gap)
        write_table(outdir / f"figure1_{key}.csv", [pan.scale, "t", "lower", "upper", "gap"], rows,
                    _run_meta(args, panel=key, lam=pan.lam, p=pan.params.p, q=pan.params.q))
    write_table(
        outdir / "figure1_D.csv",
        ["lambda", "ratio", "asymptotic", "relative_deviation"],
        zip(ratio.lam, ratio.ratio, ratio.asymptotic, ratio.relative_deviation),
        _run_meta(args, panel="D", p=args.p),
    )
    gap_a = float(panels["A"].gap.max())
    gap_c = float(panels["C"].gap.max())
    large = ratio.lam >= 100
    dev_d = float(ratio.relative_deviation[large].max())
    checks = {
        "panel_A_max_gap": [gap_a, gap_a < 0.01],
        "panel_C_max_gap": [gap_c, gap_c > 0.4],
        "panel_D_max_rel_dev_lam_ge_100": [dev_d, dev_d < 0.05],
    }
    write_meta(outdir / "figure1.json", _run_meta(args, checks=checks))
    for name, (val, ok) in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name} = {val:.4g}")
    if not all(ok for _, ok in checks.values()):
        raise CheckFailed("figure checks failed")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bassnet", description="Stochastic Bass model on networks and its universal bounds.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a network file")
    g.add_argument("--family", required=True, choices=sorted(FAMILIES))
    g.add_argument("--M", type=pos_int)
    g.add_argument("--p", type=pos_float, default=0.01)
    g.add_argument("--q", type=pos_float, default=0.1)
    g.add_argument("--sided", type=int, choices=(1, 2), default=1)
    g.add_argument("--D", type=pos_int)
    g.add_argument("--side", type=pos_int)
    g.add_argument("--lam", type=pos_float, help="mean degree for erdos_renyi")
    g.add_argument("--m-attach", type=pos_int, default=2)
    g.add_argument("--k", type=pos_int, default=4)
    g.add_argument("--rewire-prob", type=prob, default=0.1)
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("exact", help="exact master-equation curve (M <= %d)" % MAX_EXACT_NODES)
    e.add_argument("--net", required=True)
    e.add_argument("--t-max", type=pos_float, required=True)
    e.add_argument("--points", type=pos_int, default=200)
    e.add_argument("--aggregate-only", action="store_true", help="omit per-node columns")
    e.add_argument("-o", "--out", required=True)
    e.set_defaults(func=cmd_exact)

    m = sub.add_parser("mc", help="Monte Carlo curve")
    m.add_argument("--net", required=True)
    m.add_argument("--t-max", type=pos_float, required=True)
    m.add_argument("--points", type=pos_int, default=200)
    m.add_argument("--runs", type=pos_int, default=1000)
    m.add_argument("--seed", type=int)
    m.add_argument("--threads", type=pos_int, default=os.cpu_count() or 1)
    m.add_argument("--per-node", action="store_true")
    m.add_argument("-o", "--out", required=True)
    m.set_defaults(func=cmd_mc)

    b = sub.add_parser("bounds", help="check a curve file against the universal bounds")
    b.add_argument("--curve", required=True)
    b.add_argument("--net", help="network file; required for rate-inhomogeneous curves")
    b.add_argument("--p", type=pos_float)
    b.add_argument("--q", type=pos_float)
    b.add_argument("-o", "--out")
    b.set_defaults(func=cmd_bounds)

    gp = sub.add_parser("gap", help="half-life ratio of the bounds for several q/p")
    gp.add_argument("--p", type=pos_float, default=0.01)
    gp.add_argument("--lambdas", type=float_list, required=True)
    gp.add_argument("-o", "--out", default="gap.csv")
    gp.set_defaults(func=cmd_gap)

    c = sub.add_parser("conjecture", help="sample M-node homogeneous networks against the complete one")
    c.add_argument("--M", type=pos_int, required=True)
    c.add_argument("--p", type=pos_float, default=0.01)
    c.add_argument("--q", type=pos_float, default=0.1)
    c.add_argument("--samples", type=pos_int, default=200)
    c.add_argument("--edge-prob", type=prob, default=0.5)
    c.add_argument("--t-max", type=pos_float)
    c.add_argument("--points", type=pos_int, default=51)
    c.add_argument("--seed", type=int)
    c.add_argument("-o", "--out", default="conjecture.csv")
    c.set_defaults(func=cmd_conjecture)

    f = sub.add_parser("figure1", help="render the bound-band figure (SVG + CSV)")
    f.add_argument("--outdir", default="figure1")
    f.add_argument("--p", type=pos_float, default=0.01)
    f.add_argument("--points", type=pos_int, default=401)
    f.set_defaults(func=cmd_figure1)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args._argv = argv
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = default_seed()
        if args.command == "conjecture" and args.M > MAX_EXACT_NODES:
            raise UsageError(f"--M must be <= {MAX_EXACT_NODES}")
        args.func(args)
    except UsageError as exc:
        print(f"bassnet {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NetworkFormatError, CurveFormatError) as exc:
        print(f"bassnet {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bassnet {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except CheckFailed as exc:
        print(f"bassnet {args.command}: {exc}", file=sys.stderr)
        return EXIT_CHECK
    return 0


if __name__ == "__main__":
    sys.exit(main())
