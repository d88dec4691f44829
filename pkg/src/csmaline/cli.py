"""Command-line front end.

Every subcommand writes CSV (the data contract), or JSON / SVG with
``--format``. Output goes to ``--out`` or ``$CSMA_LINE_OUT``; when neither
is set the data is printed to stdout and the one-line summary to stderr.

Exit status: 0 on success, 2 on usage errors, 1 on computation errors.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .combinatorics import active_count_table
from .errors import CsmaLineError
from .exact import stationary_distribution, throughput_exact
from .fairness import fair_rates, fair_throughput
from .model import LineNetworkConfig, neighbor_counts, parse_number
from .output import bar_plot, csv_text, line_plot, write_json
from .recursion import avg_throughput_equal, throughput_recursive
from .simulator import Relay, Saturated, SimConfig, simulate
from .spectral import alpha_matching, avg_throughput_limit, characteristic_roots
from .sweeps import PRESETS, run_preset

__all__ = ["main", "build_parser"]

ENV_OUT = "CSMA_LINE_OUT"

# Flag name -> JSON config key; JSON values are defaults, flags override.
_CONFIG_KEYS = ("n", "beta", "sigma", "alpha", "rho", "r", "horizon", "warmup", "seed", "jobs", "out", "format")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage().strip()}")


def _number(text: str):
    try:
        return parse_number(text)
    except CsmaLineError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _number_list(text: str):
    return [_number(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("network and run options")
    g.add_argument("--config", help="JSON file with any of the flag values (flags win)")
    g.add_argument("--n", type=int, help="number of nodes")
    g.add_argument("--beta", type=int, help="blocking range in hops")
    g.add_argument("--sigma", type=_number_list, help="equal activation rate (comma list for sweeps)")
    g.add_argument("--alpha", type=_number, help="fair-rate parameter")
    g.add_argument("--rho", type=_number_list, help="explicit per-node rates, comma separated")
    g.add_argument("--r", type=_number_list, help="arrival rate at node 1 (comma list for sweeps)")
    g.add_argument("--horizon", type=float, help="simulated time")
    g.add_argument("--warmup", type=float, help="discarded initial time")
    g.add_argument("--seed", type=int, help="RNG seed")
    g.add_argument("--jobs", type=int, help="parallel workers for sweeps")
    g.add_argument("--out", help=f"output directory (default ${ENV_OUT}, else stdout)")
    g.add_argument("--format", choices=("csv", "json", "svg"), help="output format (svg also writes the CSV)")

    parser = _Parser(prog="csmaline", description="Linear CSMA network analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    helps = {
        "exact": "throughput and state probabilities by enumeration",
        "throughput": "per-node throughput by the Z recursion",
        "fair-rates": "fair activation rates and their throughput",
        "roots": "characteristic roots and partial-fraction weights",
        "avg": "average throughput, its limit and the matching fair alpha",
        "counts": "number of states by node and activity level",
        "simulate": "event-driven simulation (saturated, or relay with --r)",
        "sweep": "regenerate a figure dataset",
    }
    subs = {name: sub.add_parser(name, parents=[common], help=h, description=h) for name, h in helps.items()}
    subs["exact"].add_argument("--states", action="store_true", help="emit state probabilities instead")
    subs["simulate"].add_argument("--node1-saturated", action="store_true", help="relay mode with node 1 always backlogged")
    subs["simulate"].add_argument("--trace", action="store_true", help="emit the event trace")
    subs["simulate"].add_argument("--batches", type=int, default=20, help="batch-means windows")
    subs["sweep"].add_argument("preset", choices=sorted(PRESETS), help="figure preset")
    return parser


def _merge_config(args) -> argparse.Namespace:
    if not args.config:
        return args
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    rates = doc.get("rates")
    if isinstance(rates, dict):  # network schema: {"n", "beta", "rates": {"mode", ...}}
        for key in ("sigma", "alpha", "rho"):
            if key in rates:
                doc.setdefault(key, rates[key])
    unknown = set(doc) - set(_CONFIG_KEYS) - {"rates"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}; valid: {', '.join(_CONFIG_KEYS)}")
    for key in _CONFIG_KEYS:
        if getattr(args, key, None) is None and key in doc:
            val = doc[key]
            if key in ("sigma", "rho", "r"):
                val = [parse_number(v) for v in (val if isinstance(val, list) else [val])]
            elif key == "alpha":
                val = parse_number(val)
            setattr(args, key, val)
    return args


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s) {' '.join(missing)}")


def _network(args) -> LineNetworkConfig:
    _need(args, "n", "beta")
    chosen = [k for k in ("sigma", "alpha", "rho") if getattr(args, k) is not None]
    if len(chosen) != 1:
        raise UsageError(f"{args.command}: give exactly one of --sigma, --alpha, --rho")
    if args.sigma is not None:
        if len(args.sigma) != 1:
            raise UsageError(f"{args.command}: --sigma takes a single value here")
        return LineNetworkConfig.equal(args.n, args.beta, args.sigma[0])
    if args.alpha is not None:
        return LineNetworkConfig.fair(args.n, args.beta, args.alpha)
    if len(args.rho) != args.n:
        raise UsageError(f"{args.command}: --rho lists {len(args.rho)} rates but --n is {args.n}")
    return LineNetworkConfig.explicit(args.rho, args.beta)


def _fraction_text(x) -> str:
    return str(x) if isinstance(x, (int, Fraction)) else ""


class _Emitter:
    """Single writer for everything a command produces."""

    def __init__(self, args, name: str):
        self.fmt = args.format or "csv"
        out = args.out or os.environ.get(ENV_OUT)
        self.dir = Path(out) if out else None
        self.name = name
        self.written = []

    def _put(self, filename: str, text: str):
        if self.dir is None:
            sys.stdout.write(text)
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / filename
        path.write_text(text)
        self.written.append(str(path))

    def table(self, header, rows, doc=None, svg: Optional[str] = None, suffix: str = ""):
        stem = self.name + suffix
        if self.fmt == "json":
            buf = io.StringIO()
            write_json(buf, doc if doc is not None else {"columns": list(header), "rows": [list(r) for r in rows]})
            self._put(stem + ".json", buf.getvalue())
            return
        if self.fmt == "svg" and svg is not None:
            self._put(stem + ".svg", svg)
            if self.dir is None:
                return
        self._put(stem + ".csv", csv_text(header, rows))


def _cmd_exact(args, em):
    cfg = _network(args)
    if args.states:
        dist = stationary_distribution(cfg)
        rows = [(s, p, _fraction_text(p)) for s, p in zip(dist.space.bit_strings(), dist.probs)]
        em.table(["state", "probability", "probability_exact"], rows)
        return f"{dist.space.size} feasible states"
    theta = throughput_exact(cfg)
    rows = [(i, t, _fraction_text(t)) for i, t in enumerate(theta, start=1)]
    em.table(["node", "theta", "theta_exact"], rows, svg=bar_plot({"theta": [float(t) for t in theta]}, "throughput"))
    return f"exact throughput for {cfg.n} nodes, sum {float(sum(theta)):.6g}"


def _cmd_throughput(args, em):
    cfg = _network(args)
    theta = throughput_recursive(cfg)
    rows = [(i, t) for i, t in enumerate(theta, start=1)]
    em.table(["node", "theta"], rows, svg=bar_plot({"theta": [float(t) for t in theta]}, "throughput"))
    return f"throughput for {cfg.n} nodes: min {float(min(theta)):.6g}, max {float(max(theta)):.6g}"


def _cmd_fair_rates(args, em):
    _need(args, "n", "beta", "alpha")
    vec = fair_rates(args.n, args.beta, args.alpha)
    gamma = neighbor_counts(args.n, args.beta)
    tf = fair_throughput(args.alpha, args.beta)
    rows = [(i, int(g), r, tf) for i, (g, r) in enumerate(zip(gamma, vec.rho), start=1)]
    em.table(["node", "gamma", "rho", "theta_fair"], rows,
             svg=bar_plot({"rho": [float(r) for r in vec.rho]}, "fair rates"))
    return f"fair rates for {args.n} nodes, common throughput {float(tf):.6g}"


def _sigmas(args):
    _need(args, "sigma", "beta")
    return args.sigma


def _cmd_roots(args, em):
    rows = []
    for s in _sigmas(args):
        rs = characteristic_roots(float(s), args.beta)
        for j, (lam, c) in enumerate(zip(rs.roots, rs.coeffs)):
            rows.append((s, args.beta, j, lam.real, lam.imag, c.real, c.imag))
    em.table(["sigma", "beta", "j", "lambda_re", "lambda_im", "c_re", "c_im"], rows)
    return f"{len(rows)} roots"


def _cmd_avg(args, em):
    sig = _sigmas(args)
    rows, ys = [], []
    for s in sig:
        avg_n = avg_throughput_equal(s, args.beta, args.n) if args.n is not None else None
        alpha_n = alpha_matching(s, args.beta, args.n) if args.n is not None else None
        rows.append((s, args.beta, "" if args.n is None else args.n,
                     "" if avg_n is None else avg_n, avg_throughput_limit(float(s), args.beta),
                     "" if alpha_n is None else alpha_n, alpha_matching(s, args.beta)))
        ys.append(float(alpha_n if alpha_n is not None else rows[-1][-1]))
    svg = line_plot({f"beta={args.beta}": ([float(s) for s in sig], ys)}, "matching alpha", "sigma", "alpha")
    em.table(["sigma", "beta", "n", "avg_n", "avg_inf", "alpha_n", "alpha_inf"], rows, svg=svg)
    return f"average throughput for {len(rows)} sigma values"


def _cmd_counts(args, em):
    _need(args, "n", "beta")
    table = active_count_table(args.n, args.beta)
    em.table(["i", "l", "count"], list(table.rows()))
    return f"counts for {args.n} nodes up to level {table.max_level}"


def _cmd_simulate(args, em):
    cfg = _network(args)
    if args.r is not None and len(args.r) != 1:
        raise UsageError("simulate: --r takes a single value")
    if args.r is not None or args.node1_saturated:
        mode = Relay(float(args.r[0]) if args.r else 0.0, args.node1_saturated)
    else:
        mode = Saturated()
    sim = SimConfig(
        cfg,
        mode,
        horizon=args.horizon if args.horizon is not None else 1e5,
        warmup=args.warmup,
        seed=args.seed if args.seed is not None else 0,
        trace=args.trace,
        batches=args.batches,
    )
    rep = simulate(sim)
    if args.trace and em.fmt != "json":
        em.table(["t", "node", "event", "queue_len"], rep.trace, suffix="_trace")
    rows = [
        (i, t, ci, qm, qx)
        for i, (t, ci, qm, qx) in enumerate(zip(rep.theta_hat, rep.theta_ci, rep.queue_mean, rep.queue_max), start=1)
    ]
    em.table(["node", "theta_hat", "theta_ci", "queue_mean", "queue_max"], rows, doc=rep.to_dict(),
             svg=bar_plot({"theta_hat": list(rep.theta_hat)}, "simulated throughput"))
    return f"simulated {rep.events} events, end-to-end {rep.end_to_end:.6g} +/- {rep.end_to_end_ci:.3g}"


def _cmd_sweep(args, em):
    ov = {
        "n": [args.n] if args.n is not None else None,
        "beta": [args.beta] if args.beta is not None else None,
        "sigma": args.sigma,
        "alpha": args.alpha,
        "r": args.r,
        "horizon": args.horizon,
        "jobs": args.jobs or 1,
        "seed": args.seed if args.seed is not None else 1,
    }
    if em.dir is None:
        res = run_preset(args.preset, ov)
        for k, p in enumerate(res.panels):
            if k:
                sys.stdout.write("\n")
            sys.stdout.write(f"# {p.name}\n" + csv_text(p.header, p.rows))
    else:
        res = run_preset(args.preset, ov, out_dir=em.dir, svg=em.fmt == "svg")
        em.written.append(str(em.dir / f"{args.preset}_index.json"))
    done = sum(c["complete"] for c in res.cells)
    if not res.complete:
        raise _Partial(f"{args.preset}: {done}/{len(res.cells)} cells complete")
    return f"{args.preset}: {len(res.panels)} panels, {done} cells"


class _Partial(Exception):
    pass


_COMMANDS = {
    "exact": _cmd_exact,
    "throughput": _cmd_throughput,
    "fair-rates": _cmd_fair_rates,
    "roots": _cmd_roots,
    "avg": _cmd_avg,
    "counts": _cmd_counts,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = _merge_config(parser.parse_args(argv))
        em = _Emitter(args, args.command.replace("-", "_"))
        summary = _COMMANDS[args.command](args, em)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (CsmaLineError, ValueError, ArithmeticError, KeyError, _Partial) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    where = f" -> {', '.join(em.written)}" if em.written else ""
    print(summary + where, file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
