"""Parameter-sweep presets that regenerate the figure datasets.

Each preset produces one or more *panels* (a CSV each, optionally an SVG)
plus an ``index.json`` manifest listing every cell and whether it finished.
"""
from __future__ import annotations

import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .model import LineNetworkConfig
from .output import barcode_plot, bar_plot, line_plot, write_csv, write_json
from .recursion import avg_throughput_equal, throughput_recursive
from .simulator import Relay, SimConfig, simulate, stability_threshold
from .spectral import DIVERGENT, alpha_matching, avg_throughput_limit

__all__ = ["PRESETS", "Panel", "SweepResult", "run_preset", "asymptote_onset", "fig5_curves"]

SIGMA_GRID = (0.5, 1.0, 2.0, 5.0, 10.0)
FIG4_BETAS = (1, 2, 4, 5, 9)
FIG5_ALPHA = 11.68
FIG5_SIGMA = 6.0
TRACE_R = 0.47


@dataclass
class Panel:
    name: str
    header: list
    rows: list
    svg: Optional[str] = None
    meta: dict = field(default_factory=dict)


@dataclass
class SweepResult:
    preset: str
    params: dict
    panels: list
    cells: list  # dicts with at least "cell" and "complete"

    @property
    def complete(self) -> bool:
        return all(c["complete"] for c in self.cells)


def _sigma_grid(overrides) -> tuple:
    return tuple(overrides.get("sigma") or SIGMA_GRID)


def _profile_panels(pairs, sigmas, label) -> tuple:
    panels, cells = [], []
    for n, beta in pairs:
        rows, series = [], {}
        for s in sigmas:
            key = f"{label}_n{n}_beta{beta}_sigma{s:g}"
            try:
                theta = throughput_recursive(LineNetworkConfig.equal(n, beta, float(s)))
            except Exception as exc:  # recorded in the manifest
                cells.append({"cell": key, "complete": False, "error": str(exc)})
                continue
            cells.append({"cell": key, "complete": True})
            rows.extend((s, i, float(t)) for i, t in enumerate(theta, start=1))
            series[f"sigma={s:g}"] = theta.tolist()
        svg = bar_plot(series, title=f"n={n}, beta={beta}", ylabel="throughput") if series else None
        panels.append(Panel(f"{label}_n{n}_beta{beta}", ["sigma", "node", "theta"], rows, svg))
    return panels, cells


def _fig1(ov):
    ns = ov.get("n") or (6, 9, 12, 15)
    return _profile_panels([(n, 1) for n in ns], _sigma_grid(ov), "fig1")


def _fig2(ov):
    betas = ov.get("beta") or (2, 3)
    ns = ov.get("n") or (9,)
    return _profile_panels([(n, b) for n in ns for b in betas], _sigma_grid(ov), "fig2")


def _fig3(ov):
    """Large-network limits: average throughput and matching fair alpha."""
    betas = ov.get("beta") or FIG4_BETAS
    sigmas = ov.get("sigma") or tuple(np.round(np.arange(0.1, 20.0001, 0.1), 10))
    rows, cells, series = [], [], {}
    for b in betas:
        ys = []
        for s in sigmas:
            avg = avg_throughput_limit(s, b)
            alpha = alpha_matching(s, b)
            rows.append((s, b, avg, alpha))
            ys.append(alpha)
        series[f"beta={b}"] = (list(sigmas), ys)
        cells.append({"cell": f"fig3_beta{b}", "complete": True})
    svg = line_plot(series, "alpha(sigma), n -> infinity", "sigma", "alpha")
    return [Panel("fig3", ["sigma", "beta", "avg_inf", "alpha_inf"], rows, svg)], cells


def asymptote_onset(beta: int, n: int, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Smallest sigma in [lo, hi] where the equal-rate average reaches 1/(beta+1).

    Found by bisection on ``avg_n(sigma) - 1/(beta+1)``; requires a sign
    change on the bracket.
    """
    target = 1.0 / (beta + 1)
    f = lambda s: avg_throughput_equal(s, beta, n) - target
    if f(lo) >= 0 or f(hi) < 0:
        raise ValueError("bracket does not straddle the asymptote")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def _fig4(ov):
    n = (ov.get("n") or (10,))[0]
    betas = ov.get("beta") or FIG4_BETAS
    sigmas = ov.get("sigma") or tuple(np.round(np.arange(0.05, 20.0001, 0.05), 10))
    rows, cells, series, onsets = [], [], {}, {}
    for b in betas:
        ys = []
        for s in sigmas:
            avg = avg_throughput_equal(float(s), b, n)
            alpha = alpha_matching(float(s), b, n)
            rows.append((s, b, n, avg, alpha))
            ys.append(alpha)
        series[f"beta={b}"] = (list(sigmas), ys)
        if any(a == DIVERGENT for a in ys):
            first = next(s for s, a in zip(sigmas, ys) if a == DIVERGENT)
            onsets[str(b)] = asymptote_onset(b, n, 1e-9, float(first))
        cells.append({"cell": f"fig4_beta{b}", "complete": True})
    svg = line_plot(series, f"alpha_n(sigma), n={n}", "sigma", "alpha", ylim=(0.0, 20.0))
    panel = Panel("fig4", ["sigma", "beta", "n", "avg_n", "alpha_n"], rows, svg, {"asymptote_onset": onsets})
    return [panel], cells


def _relay_cell(args):
    scheme, r, n, beta, param, horizon, seed = args
    net = LineNetworkConfig.fair(n, beta, param) if scheme == "fair" else LineNetworkConfig.equal(n, beta, param)
    rep = simulate(SimConfig(net, Relay(r), horizon=horizon, seed=seed))
    return {
        "scheme": scheme,
        "r": r,
        "end_to_end": rep.end_to_end,
        "end_to_end_ci": rep.end_to_end_ci,
        "end_to_end_se": rep.end_to_end_se,
        "theta_n": float(rep.theta_hat[-1]),
        "queue_mean": rep.queue_mean.tolist(),
    }


def _run_cells(fn: Callable, jobs_args: list, jobs: int) -> list:
    """Evaluate cells, in parallel when ``jobs > 1``; failures become error records."""

    def safe_serial(a):
        try:
            return fn(a), None
        except Exception:
            return None, traceback.format_exc(limit=1)

    if jobs <= 1:
        return [safe_serial(a) for a in jobs_args]
    out = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, a) for a in jobs_args]
        for fut in futures:
            try:
                out.append((fut.result(), None))
            except Exception as exc:
                out.append((None, repr(exc)))
    return out


def fig5_curves(
    r_grid=None,
    n: int = 5,
    beta: int = 1,
    alpha: float = FIG5_ALPHA,
    sigma: float = FIG5_SIGMA,
    horizon: float = 1e5,
    seed: int = 1,
    jobs: int = 1,
) -> tuple:
    """End-to-end throughput against arrival rate for fair and equal rates.

    The same seed is used for every cell (common random numbers), which
    keeps the curves smooth in ``r``. Returns ``(records, cells)``.
    """
    if r_grid is None:
        r_grid = tuple(np.round(np.arange(0.05, 0.80001, 0.05), 10))
    args = [
        (scheme, float(r), n, beta, param, horizon, seed)
        for scheme, param in (("fair", alpha), ("equal", sigma))
        for r in r_grid
    ]
    results = _run_cells(_relay_cell, args, jobs)
    records, cells = [], []
    for a, (res, err) in zip(args, results):
        key = f"fig5_{a[0]}_r{a[1]:g}"
        if err is None:
            records.append(res)
            cells.append({"cell": key, "complete": True})
        else:
            cells.append({"cell": key, "complete": False, "error": err})
    return records, cells


def _fig5(ov):
    n = (ov.get("n") or (5,))[0]
    beta = (ov.get("beta") or (1,))[0]
    alpha = ov.get("alpha") or FIG5_ALPHA
    sigma = (ov.get("sigma") or (FIG5_SIGMA,))[0]
    records, cells = fig5_curves(
        ov.get("r"), n, beta, alpha, sigma, ov.get("horizon") or 1e5, ov.get("seed", 1), ov.get("jobs", 1)
    )
    rows = [(x["scheme"], x["r"], x["end_to_end"], x["end_to_end_ci"], x["theta_n"]) for x in records]
    series = {}
    for scheme in ("fair", "equal"):
        pts = [(x["r"], x["end_to_end"]) for x in records if x["scheme"] == scheme]
        if pts:
            series[scheme] = ([p[0] for p in pts], [p[1] for p in pts])
    rstar = float(stability_threshold(alpha, beta))
    if series:
        xs = series[next(iter(series))][0]
        series["saturated fair throughput"] = (xs, [rstar] * len(xs))
    svg = line_plot(series, f"end-to-end throughput, n={n}, beta={beta}", "arrival rate r", "throughput") if series else None
    meta = {"alpha": alpha, "sigma": sigma, "r_star": rstar}
    return [Panel("fig5", ["scheme", "r", "end_to_end", "end_to_end_ci", "theta_n"], rows, svg, meta)], cells


def _trace_run(scheme, ov, horizon):
    n = (ov.get("n") or (5,))[0]
    beta = (ov.get("beta") or (1,))[0]
    r = (ov.get("r") or (TRACE_R,))[0]
    if scheme == "fair":
        net = LineNetworkConfig.fair(n, beta, ov.get("alpha") or FIG5_ALPHA)
    else:
        net = LineNetworkConfig.equal(n, beta, (ov.get("sigma") or (FIG5_SIGMA,))[0])
    cfg = SimConfig(net, Relay(r), horizon=horizon, warmup=0.0, seed=ov.get("seed", 1), trace=True, batches=1)
    return simulate(cfg), n


def _intervals(trace):
    open_at, out = {}, []
    for t, node, kind, _ in trace:
        if kind == "on":
            open_at[node] = t
        elif kind == "off" and node in open_at:
            out.append((node, open_at.pop(node), t))
    return out


def _fig6(ov):
    horizon = ov.get("horizon") or 200.0
    panels, cells = [], []
    for scheme in ("equal", "fair"):
        rep, n = _trace_run(scheme, ov, horizon)
        rows = [row for row in rep.trace]
        svg = barcode_plot(_intervals(rep.trace), n, 0.0, horizon, f"activity, {scheme} rates")
        panels.append(Panel(f"fig6_{scheme}", ["t", "node", "event", "queue_len"], rows, svg,
                            {"decimated": rep.trace_decimated}))
        cells.append({"cell": f"fig6_{scheme}", "complete": True})
    return panels, cells


def _fig7(ov):
    horizon = ov.get("horizon") or 2e4
    rep, n = _trace_run("fair", ov, horizon)
    rows = [(t, node, q) for t, node, kind, q in rep.trace if kind in ("on", "arrive") and q >= 0]
    panels = []
    for label, t_end in (("large", horizon), ("small", min(horizon, horizon / 40))):
        sel = [row for row in rows if row[0] <= t_end]
        series = {}
        for node in range(1, n + 1):
            pts = [(t, q) for t, k, q in sel if k == node]
            series[f"node {node}"] = ([p[0] for p in pts], [float(p[1]) for p in pts])
        svg = line_plot(series, f"queue lengths, fair rates ({label} scale)", "time", "packets")
        panels.append(Panel(f"fig7_{label}", ["t", "node", "queue_len"], sel, svg,
                            {"decimated": rep.trace_decimated}))
    return panels, [{"cell": "fig7", "complete": True}]


PRESETS = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
}


def run_preset(name: str, overrides: Optional[dict] = None, out_dir=None, svg: bool = False) -> SweepResult:
    """Execute a preset; write CSVs, optional SVGs and ``index.json`` if ``out_dir`` is given.

    A failing panel does not stop the others; the manifest marks which cells
    completed.
    """
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    ov = dict(overrides or {})
    try:
        panels, cells = PRESETS[name](ov)
    except Exception as exc:
        panels, cells = [], [{"cell": name, "complete": False, "error": repr(exc)}]
    result = SweepResult(name, {k: v for k, v in ov.items() if v is not None}, panels, cells)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for p in panels:
            write_csv(out / f"{p.name}.csv", p.header, p.rows)
            entry = {"panel": p.name, "csv": f"{p.name}.csv", "rows": len(p.rows), "meta": p.meta}
            if svg and p.svg:
                (out / f"{p.name}.svg").write_text(p.svg)
                entry["svg"] = f"{p.name}.svg"
            files.append(entry)
        write_json(
            out / f"{name}_index.json",
            {"preset": name, "params": result.params, "panels": files, "cells": cells, "complete": result.complete},
        )
    return result
