"""Command-line surface: constructions, rate checks, training, and charts.

Every CSV starts with a `#` config-echo header carrying the resolved
parameters, tool version, and compute backend, so any output can be
reproduced byte-for-byte by re-running the echoed command.  Exit codes are a
stable contract: 0 success, 1 usage error, 2 a measured value violated its
bound or criterion, 3 numerical failure (divergence or a failed search).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import BACKEND_NAME
from .activations import CATALOG, DegenerateActivationError, get_activation
from .calculus import NetworkJetSource, QuadratureEvalError, SobolevSpec, make_grid, sobolev_error
from .constructions import (
    ConstructionError,
    CoordinateTarget,
    coordinate_projection_net,
    derivative_limit_sequence,
    unbounded_limit_sequence,
)
from .networks import load_network, save_network, total_norm
from .rates import UnsupportedRateError, verify_rate
from .svg import ChartError, Series, render_chart
from .training import PRESETS, preset, run_experiment, scatter_rows

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CRITERION = 2
EXIT_NUMERICAL = 3

_ANALYTIC_BOUNDED = ("sigmoid", "tanh", "arctan", "isru")


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit code 2 for usage; our contract says 1."""

    def exit(self, status: int = 0, message: str | None = None):
        if message:
            self._print_message(message, sys.stderr)
        raise SystemExit(EXIT_USAGE if status == 2 else status)


def _parse_p(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    p = float(text)
    if p < 1:
        raise ValueError(f"exponent p must be >= 1 or inf, got {text}")
    return p


def _parse_ns(text: str) -> list[int]:
    ns = [int(part) for part in text.split(",") if part.strip()]
    if not ns or any(n < 1 for n in ns):
        raise ValueError(f"step list must be positive integers, got {text!r}")
    return ns


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return "inf" if f == math.inf else repr(f)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _write_csv(out: str | None, command: str, params: dict, columns: list[str], rows: list[tuple]) -> None:
    lines = [f"# sobnn {__version__}", f"# command: {command}", f"# backend: {BACKEND_NAME}"]
    lines += [f"# {key}: {_cell(params[key])}" for key in sorted(params)]
    lines.append(",".join(columns))
    lines += [",".join(_cell(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _cmd_activations(args) -> int:
    rows = []
    for name, act in CATALOG.items():
        rows.append((
            name,
            act.a if act.a is not None else "",
            "analytic" if act.smoothness is None else act.smoothness,
            act.bounded,
            act.sup_abs if act.sup_abs is not None else "",
            act.deriv_sup.get(1, ""),
            act.deriv_sup.get(2, ""),
        ))
    _write_csv(args.out, "activations", {}, ["name", "a", "smoothness", "bounded", "sup_abs", "d1_sup", "d2_sup"], rows)
    return EXIT_OK


def _cmd_rates(args) -> int:
    act = get_activation(args.activation)
    p = _parse_p(args.p)
    ns = _parse_ns(args.ns)
    grid = None if p == math.inf else make_grid((args.B, 1), (args.panels, args.nodes))
    records = verify_rate(act, p, args.B, ns, grid)
    params = {"activation": args.activation, "p": p, "B": args.B, "ns": args.ns,
              "panels": args.panels, "nodes": args.nodes}
    rows = [(args.activation, p, r.n, r.net_norm, r.measured, r.bound, r.passed) for r in records]
    _write_csv(args.out, "rates", params, ["activation", "p", "n", "total_norm", "measured_error", "bound", "pass"], rows)
    return EXIT_OK if all(r.passed for r in records) else EXIT_CRITERION


def _converge_k_limit(act) -> int:
    if act.smoothness is None:
        return 4
    # kinked catalog entries all have an absolutely continuous top derivative,
    # so the quotient sequence converges one order higher than C^m alone gives
    return act.smoothness


def _grid_for(d: int, b: float, panels: int, nodes: int):
    if panels <= 0:
        panels = {1: 2000, 2: 60, 3: 16}[d]
    return make_grid((b, d), (panels, nodes))


def _cmd_converge(args) -> int:
    act = get_activation(args.activation)
    p = _parse_p(args.p)
    ns = _parse_ns(args.ns)
    if args.analytic:
        if args.activation not in _ANALYTIC_BOUNDED:
            raise DegenerateActivationError(
                f"--analytic needs a bounded analytic activation, not {args.activation}")
        if not 1 <= args.k <= 4:
            raise ValueError(f"order k={args.k} out of range for the analytic family")
    else:
        limit = _converge_k_limit(act)
        if not 1 <= args.k <= limit:
            raise ValueError(f"order k={args.k} unsupported for {args.activation} (max {limit})")
    if args.d < 1 or args.L < 2:
        raise ValueError("need d >= 1 and L >= 2")
    grid = _grid_for(args.d, args.B, args.panels, args.nodes)
    spec = SobolevSpec(args.k, p)
    rows = []
    last_net = None
    for n in ns:
        if args.analytic:
            net, target, _ = unbounded_limit_sequence(act, args.d, args.L, args.B, args.k, p, n)
        else:
            net, target = derivative_limit_sequence(act, args.d, args.L, args.B, n)
        err = sobolev_error(NetworkJetSource(net, act), target, spec, grid)
        if not math.isfinite(err):
            raise QuadratureEvalError(f"non-finite Sobolev error at n={n}")
        rows.append((n, total_norm(net), err))
        last_net = net
    if args.save_net and last_net is not None:
        save_network(last_net, args.save_net)
    params = {"activation": args.activation, "k": args.k, "p": p, "B": args.B, "L": args.L,
              "d": args.d, "ns": args.ns, "panels": args.panels, "nodes": args.nodes,
              "analytic": args.analytic}
    _write_csv(args.out, "converge", params, ["n", "total_norm", "sobolev_error"], rows)
    return EXIT_OK


def _cmd_project(args) -> int:
    act = get_activation(args.activation)
    p = _parse_p(args.p)
    if not 1 <= args.k <= 2:
        raise ValueError("projection checks support k in {1, 2}")
    grid = _grid_for(args.d, args.B, args.panels, args.nodes) if args.panels > 0 else None
    params = {"activation": args.activation, "d": args.d, "L": args.L, "k": args.k, "p": p,
              "eps": args.eps, "B": args.B, "panels": args.panels, "nodes": args.nodes}
    if args.load_net:
        net = load_network(args.load_net)
        if net.arch.input_dim != args.d:
            raise ValueError(f"loaded network expects d={net.arch.input_dim}, flags say {args.d}")
        used = grid if grid is not None else _grid_for(args.d, args.B, 0, args.nodes)
        err = sobolev_error(NetworkJetSource(net, act), CoordinateTarget(args.d, 1),
                            SobolevSpec(args.k, p), used)
        rows = [(args.activation, args.d, net.arch.depth, args.k, p, args.eps, "", err)]
        _write_csv(args.out, "project", params,
                   ["activation", "d", "L", "k", "p", "eps", "scale", "measured_error"], rows)
        return EXIT_OK if err <= args.eps else EXIT_CRITERION
    res = coordinate_projection_net(act, args.d, args.L, 1, args.B, args.k, p, args.eps, grid)
    if args.save_net:
        save_network(res.net, args.save_net)
    rows = [(args.activation, args.d, args.L, args.k, p, args.eps, res.scale, res.error)]
    _write_csv(args.out, "project", params,
               ["activation", "d", "L", "k", "p", "eps", "scale", "measured_error"], rows)
    return EXIT_OK


def _train_config(args):
    cfg = preset(args.preset)
    patch = {}
    for field in ("trials", "seed", "epochs", "lr"):
        value = getattr(args, field)
        if value is not None:
            patch[field] = value
    if args.batch is not None:
        patch["batch_size"] = args.batch
    if args.clamp is not None:
        patch["clamp"] = args.clamp
    return replace(cfg, **patch) if patch else cfg


def _cmd_train(args) -> int:
    cfg = _train_config(args)
    result = run_experiment(cfg)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    params = asdict(cfg)
    params["preset"] = args.preset
    params["clamp"] = "" if cfg.clamp is None else cfg.clamp
    params["arch"] = "x".join(str(w) for w in cfg.arch)
    trial_rows = []
    for t, trial in enumerate(result.trials):
        for rec in trial.records:
            trial_rows.append((t, int(rec[0]), rec[1], rec[2], rec[3]))
    _write_csv(str(outdir / f"{args.preset}-trials.csv"), "train", params,
               ["trial", "epoch", "loss", "best_loss", "total_norm"], trial_rows)
    if result.table is not None:
        # one row per training epoch; the epoch-0 probe stays in the trial CSV
        agg_rows = [(int(row[0]), row[2], row[3], row[4], row[5]) for row in result.table[1:]]
        _write_csv(str(outdir / f"{args.preset}-aggregate.csv"), "train", params,
                   ["epoch", "mean_best_loss", "mean_norm", "norm_lo95", "norm_hi95"], agg_rows)
    if result.diverged:
        sys.stderr.write(f"trials diverged: {list(result.diverged)}\n")
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_scatter(args) -> int:
    cfg = _train_config(args)
    result = run_experiment(cfg)
    rows_raw = scatter_rows(result, stride=50)
    params = asdict(cfg)
    params["preset"] = args.preset
    params["clamp"] = "" if cfg.clamp is None else cfg.clamp
    params["arch"] = "x".join(str(w) for w in cfg.arch)
    params["stride"] = 50
    rows = [(i, row[2], row[3]) for i, row in enumerate(rows_raw)]
    _write_csv(args.out, "scatter", params, ["checkpoint", "loss", "total_norm"], rows)
    return EXIT_NUMERICAL if result.diverged else EXIT_OK


def _read_csv(path: str):
    header = None
    data: list[list[str]] = []
    with open(path, newline="") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
            else:
                data.append(line.split(","))
    if header is None or not data:
        raise ValueError(f"{path} has no data rows")
    return header, data


def _cmd_plot(args) -> int:
    header, data = _read_csv(args.infile)
    xcol = args.x if args.x else header[0]
    for name in (xcol, args.y):
        if name not in header:
            raise ValueError(f"column {name!r} not in {header}")
    xi, yi = header.index(xcol), header.index(args.y)

    def column(i: int) -> np.ndarray:
        return np.array([float(row[i]) for row in data])

    xs, ys = column(xi), column(yi)
    band = None
    lo_name = args.y.replace("mean_", "") + "_lo95"
    hi_name = args.y.replace("mean_", "") + "_hi95"
    if lo_name in header and hi_name in header:
        band = (column(header.index(lo_name)), column(header.index(hi_name)))
    points = bool(np.any(np.diff(xs) < 0))
    chart = render_chart(
        [Series(xs, ys, label=args.y, band=band, points=points)],
        title=Path(args.infile).name,
        xlabel=xcol,
        ylabel=args.y,
        logy=args.logy,
    )
    out = args.out if args.out else str(Path(args.infile).with_suffix("")) + f"-{args.y}.svg"
    with open(out, "w", newline="\n") as fh:
        fh.write(chart)
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="sobnn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sobnn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pa = sub.add_parser("activations", help="catalog of supported activations")
    pa.add_argument("--out", default=None)
    pa.set_defaults(fn=_cmd_activations)

    pr = sub.add_parser("rates", help="quotient-net error against the proved K/n bound")
    pr.add_argument("--activation", required=True)
    pr.add_argument("--p", default="inf")
    pr.add_argument("--B", type=float, default=5.0)
    pr.add_argument("--ns", default="1,2,5,10,50,100,500,1000")
    pr.add_argument("--panels", type=int, default=2000)
    pr.add_argument("--nodes", type=int, default=2)
    pr.add_argument("--out", default=None)
    pr.set_defaults(fn=_cmd_rates)

    pc = sub.add_parser("converge", help="Sobolev error of the limit sequences")
    pc.add_argument("--activation", required=True)
    pc.add_argument("--k", type=int, default=1)
    pc.add_argument("--p", default="2")
    pc.add_argument("--B", type=float, default=5.0)
    pc.add_argument("--L", type=int, default=3)
    pc.add_argument("--d", type=int, default=1)
    pc.add_argument("--ns", default="1,2,4,8,16,32,64,128,256")
    pc.add_argument("--analytic", action="store_true",
                    help="approach the unbounded target instead of the derivative target")
    pc.add_argument("--panels", type=int, default=0)
    pc.add_argument("--nodes", type=int, default=2)
    pc.add_argument("--save-net", dest="save_net", default=None)
    pc.add_argument("--out", default=None)
    pc.set_defaults(fn=_cmd_converge)

    pp = sub.add_parser("project", help="build or measure a coordinate projection net")
    pp.add_argument("--activation", required=True)
    pp.add_argument("--d", type=int, default=1)
    pp.add_argument("--L", type=int, default=2)
    pp.add_argument("--B", type=float, default=5.0)
    pp.add_argument("--k", type=int, default=1)
    pp.add_argument("--p", default="2")
    pp.add_argument("--eps", type=float, default=0.1)
    pp.add_argument("--panels", type=int, default=0)
    pp.add_argument("--nodes", type=int, default=2)
    pp.add_argument("--save-net", dest="save_net", default=None)
    pp.add_argument("--load-net", dest="load_net", default=None)
    pp.add_argument("--out", default=None)
    pp.set_defaults(fn=_cmd_project)

    def add_train_flags(p):
        p.add_argument("--preset", required=True, choices=sorted(PRESETS))
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--batch", type=int, default=None)
        p.add_argument("--lr", type=float, default=None)
        p.add_argument("--clamp", type=float, default=None)

    pt = sub.add_parser("train", help="run a training experiment preset")
    add_train_flags(pt)
    pt.add_argument("--outdir", default=".")
    pt.set_defaults(fn=_cmd_train)

    ps = sub.add_parser("scatter", help="loss-vs-norm checkpoints across trials")
    add_train_flags(ps)
    ps.add_argument("--out", default=None)
    ps.set_defaults(fn=_cmd_scatter)

    pl = sub.add_parser("plot", help="render a CSV column as a deterministic SVG chart")
    pl.add_argument("--in", dest="infile", required=True)
    pl.add_argument("--x", default=None, help="x column (default: first column)")
    pl.add_argument("--y", required=True)
    pl.add_argument("--logy", action="store_true")
    pl.add_argument("--out", default=None)
    pl.set_defaults(fn=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)
    try:
        return args.fn(args)
    except (UnsupportedRateError, DegenerateActivationError, ChartError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(f"sobnn: {exc}\n")
        return EXIT_USAGE
    except (ConstructionError, QuadratureEvalError, FloatingPointError) as exc:
        sys.stderr.write(f"sobnn: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
