"""Event-driven simulation of the line network.

Each unblocked, idle node with something to send holds an exponential
backoff clock at its activation rate; transmissions last an exponential
time with mean 1. Because every clock is memoryless, cancelling a clock
when its node becomes blocked and drawing a fresh one when it is unblocked
has the same law as freezing the backoff. For the same reason a relay node
with an empty buffer simply holds no clock: an expiry on an empty buffer
only restarts the backoff, so the first useful expiry after a packet
arrives is again exponential.

Two modes are supported:

* ``Saturated()``: every node always has packets.
* ``Relay(arrival_rate, node1_saturated)``: packets enter at node 1 (Poisson,
  or an infinite backlog), hop along nodes 2..n and leave after node n.
"""
from __future__ import annotations

import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy import stats

from .errors import InvalidConfig
from .model import LineNetworkConfig, is_feasible

__all__ = [
    "Saturated",
    "Relay",
    "SimConfig",
    "SimReport",
    "simulate",
    "simulate_saturated",
    "simulate_relay",
    "stability_threshold",
    "combine_reports",
    "replicate",
    "trace_rows",
]

_ACT, _END, _ARR = 0, 1, 2
_BUFFER = 4096


@dataclass(frozen=True)
class Saturated:
    pass


@dataclass(frozen=True)
class Relay:
    arrival_rate: float = 0.0
    node1_saturated: bool = False

    def __post_init__(self):
        if self.arrival_rate < 0 or not math.isfinite(self.arrival_rate):
            raise InvalidConfig("arrival_rate must be finite and non-negative")
        if self.arrival_rate == 0 and not self.node1_saturated:
            raise InvalidConfig("relay mode needs arrival_rate > 0 or node1_saturated")


@dataclass(frozen=True)
class SimConfig:
    """Simulation run parameters.

    ``warmup`` defaults to 10% of ``horizon``. Batch means use ``batches``
    equal-length windows after the warmup.
    """

    network: LineNetworkConfig
    mode: Union[Saturated, Relay] = field(default_factory=Saturated)
    horizon: float = 1e5
    warmup: Optional[float] = None
    seed: int = 0
    trace: bool = False
    batches: int = 20
    trace_cap: int = 1_000_000
    check_feasibility: bool = False

    def __post_init__(self):
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise InvalidConfig("horizon must be a finite positive time")
        if self.warmup is None:
            object.__setattr__(self, "warmup", 0.1 * self.horizon)
        if not 0 <= self.warmup < self.horizon:
            raise InvalidConfig("warmup must satisfy 0 <= warmup < horizon")
        if self.batches < 1:
            raise InvalidConfig("batches must be at least 1")
        if not isinstance(self.mode, (Saturated, Relay)):
            raise InvalidConfig(f"unknown simulation mode {self.mode!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidConfig("seed must be a 64-bit unsigned integer")
        if any(not math.isfinite(float(r)) for r in self.network.rho()):
            raise InvalidConfig("activation rates must be finite")


def _batch_stats(samples: np.ndarray) -> tuple:
    """Mean, standard error and 95% half-width over axis 0."""
    b = samples.shape[0]
    mean = samples.mean(axis=0)
    if b < 2:
        nan = np.full_like(mean, np.nan)
        return mean, nan, nan
    se = samples.std(axis=0, ddof=1) / math.sqrt(b)
    return mean, se, stats.t.ppf(0.975, b - 1) * se


@dataclass(frozen=True)
class SimReport:
    """Estimates from one run (or several pooled runs).

    ``theta_batches`` has shape ``(batches, n)`` and ``departure_batches``
    shape ``(batches,)``; every interval estimate is derived from them.
    ``queue_mean``/``queue_max`` are NaN for saturated nodes.
    """

    n: int
    window: float
    theta_batches: np.ndarray
    departure_batches: np.ndarray
    queue_mean: np.ndarray
    queue_max: np.ndarray
    arrivals: int
    departures: int
    final_queues: tuple
    in_service: int
    events: int
    trace: Optional[list] = None
    trace_decimated: bool = False

    @property
    def theta_hat(self) -> np.ndarray:
        return _batch_stats(self.theta_batches)[0]

    @property
    def theta_se(self) -> np.ndarray:
        return _batch_stats(self.theta_batches)[1]

    @property
    def theta_ci(self) -> np.ndarray:
        return _batch_stats(self.theta_batches)[2]

    @property
    def end_to_end(self) -> float:
        return float(_batch_stats(self.departure_batches[:, None])[0][0])

    @property
    def end_to_end_se(self) -> float:
        return float(_batch_stats(self.departure_batches[:, None])[1][0])

    @property
    def end_to_end_ci(self) -> float:
        return float(_batch_stats(self.departure_batches[:, None])[2][0])

    def covers(self, values: Sequence[float], k: float = 3.0) -> np.ndarray:
        """Which ``values`` lie within ``k`` standard errors of ``theta_hat``."""
        return np.abs(self.theta_hat - np.asarray(values, dtype=float)) <= k * self.theta_se

    def to_dict(self) -> dict:
        def clean(xs):
            return [None if not math.isfinite(x) else float(x) for x in np.asarray(xs, dtype=float)]

        return {
            "n": self.n,
            "window": self.window,
            "batches": int(self.theta_batches.shape[0]),
            "theta_hat": clean(self.theta_hat),
            "theta_ci": clean(self.theta_ci),
            "theta_se": clean(self.theta_se),
            "end_to_end": self.end_to_end,
            "end_to_end_ci": clean([self.end_to_end_ci])[0],
            "end_to_end_se": clean([self.end_to_end_se])[0],
            "queue_mean": clean(self.queue_mean),
            "queue_max": clean(self.queue_max),
            "arrivals": self.arrivals,
            "departures": self.departures,
            "final_queues": list(self.final_queues),
            "in_service": self.in_service,
            "events": self.events,
            "trace_events": None if self.trace is None else len(self.trace),
            "trace_decimated": self.trace_decimated,
        }


class _ExpStream:
    """Unit-mean exponential variates drawn in blocks from one generator."""

    __slots__ = ("_gen", "_buf", "_pos")

    def __init__(self, seed_seq: np.random.SeedSequence):
        self._gen = np.random.Generator(np.random.PCG64(seed_seq))
        self._buf = []
        self._pos = 0

    def next(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.standard_exponential(_BUFFER).tolist()
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        return x


def _streams(seed: int, n: int) -> tuple:
    """Independent streams: backoff and service per node, plus arrivals."""
    root = np.random.SeedSequence(int(seed))
    children = root.spawn(2 * n + 1)
    backoff = [_ExpStream(children[i]) for i in range(n)]
    service = [_ExpStream(children[n + i]) for i in range(n)]
    return backoff, service, _ExpStream(children[2 * n])


def simulate(cfg: SimConfig) -> SimReport:
    """Run one simulation; dispatches on ``cfg.mode``."""
    net = cfg.network
    n, beta = net.n, net.beta
    rho = [float(r) for r in net.rho()]
    relay = isinstance(cfg.mode, Relay)
    horizon, warmup = float(cfg.horizon), float(cfg.warmup)
    nb = cfg.batches
    width = (horizon - warmup) / nb

    if relay:
        saturated = [cfg.mode.node1_saturated] + [False] * (n - 1)
        arrival_rate = cfg.mode.arrival_rate
    else:
        saturated = [True] * n
        arrival_rate = 0.0

    backoff, service, arrivals_stream = _streams(cfg.seed, n)
    neighbors = [
        [j for j in range(max(0, i - beta), min(n, i + beta + 1)) if j != i] for i in range(n)
    ]

    active = [False] * n
    blocked = [0] * n
    pending = [False] * n
    token = [0] * n
    queue = [0] * n
    started = [0.0] * n
    busy = np.zeros((nb, n))
    deps = np.zeros(nb)
    q_area = [0.0] * n
    q_last = [0.0] * n
    q_max = [0] * n
    arrived = 0
    departed = 0
    events = 0

    trace = [] if cfg.trace else None
    stride = 1
    tick = 0
    decimated = False
    cap = cfg.trace_cap

    heap = []
    seq = 0

    def add_busy(i, t0, t1):
        t0 = max(t0, warmup)
        if t1 <= t0:
            return
        b0 = min(int((t0 - warmup) / width), nb - 1)
        b1 = min(int((t1 - warmup) / width), nb - 1)
        if b0 == b1:
            busy[b0, i] += t1 - t0
            return
        edge = warmup + (b0 + 1) * width
        busy[b0, i] += edge - t0
        for b in range(b0 + 1, b1):
            busy[b, i] += width
        busy[b1, i] += t1 - (warmup + b1 * width)

    def touch_queue(i, t):
        lo = q_last[i] if q_last[i] > warmup else warmup
        if t > lo:
            q_area[i] += queue[i] * (t - lo)
        q_last[i] = t

    def record(t, i, kind):
        nonlocal trace, stride, tick, decimated
        tick += 1
        if tick % stride:
            return
        trace.append((t, i + 1, kind, -1 if saturated[i] else queue[i]))
        if len(trace) >= cap:
            trace = trace[::2]
            stride *= 2
            decimated = True

    def arm(i, t):
        nonlocal seq
        if active[i] or blocked[i] or pending[i]:
            return
        if not saturated[i] and queue[i] == 0:
            return
        pending[i] = True
        token[i] += 1
        seq += 1
        heapq.heappush(heap, (t + backoff[i].next() / rho[i], seq, _ACT, i, token[i]))

    t = 0.0
    for i in range(n):
        arm(i, t)
    if relay and arrival_rate > 0:
        seq += 1
        heapq.heappush(heap, (arrivals_stream.next() / arrival_rate, seq, _ARR, 0, 0))

    push = heapq.heappush
    pop = heapq.heappop
    while heap:
        t, _, kind, i, tok = pop(heap)
        if t > horizon:
            break
        if kind == _ACT:
            if tok != token[i] or not pending[i]:
                continue
            events += 1
            pending[i] = False
            if cfg.check_feasibility and (blocked[i] or active[i]):
                raise AssertionError(f"node {i + 1} activated while blocked at t={t}")
            active[i] = True
            started[i] = t
            if not saturated[i]:
                touch_queue(i, t)
                queue[i] -= 1
            elif relay and i == 0:
                arrived += 1
            for j in neighbors[i]:
                blocked[j] += 1
                if pending[j]:
                    pending[j] = False
                    token[j] += 1
            if cfg.check_feasibility and not is_feasible([int(a) for a in active], beta):
                raise AssertionError(f"infeasible active set at t={t}")
            seq += 1
            push(heap, (t + service[i].next(), seq, _END, i, 0))
            if trace is not None:
                record(t, i, "on")
        elif kind == _END:
            events += 1
            active[i] = False
            add_busy(i, started[i], t)
            if trace is not None:
                record(t, i, "off")
            if i + 1 < n:
                if relay:
                    touch_queue(i + 1, t)
                    queue[i + 1] += 1
                    if queue[i + 1] > q_max[i + 1]:
                        q_max[i + 1] = queue[i + 1]
                    if trace is not None:
                        record(t, i + 1, "arrive")
            else:
                departed += 1
                if t >= warmup:
                    deps[min(int((t - warmup) / width), nb - 1)] += 1
                if trace is not None:
                    record(t, i, "depart")
            for j in neighbors[i]:
                blocked[j] -= 1
            arm(i, t)
            for j in neighbors[i]:
                arm(j, t)
            if i + 1 < n and beta == 0:
                arm(i + 1, t)
        else:
            events += 1
            arrived += 1
            touch_queue(0, t)
            queue[0] += 1
            if queue[0] > q_max[0]:
                q_max[0] = queue[0]
            if trace is not None:
                record(t, 0, "arrive")
            arm(0, t)
            seq += 1
            push(heap, (t + arrivals_stream.next() / arrival_rate, seq, _ARR, 0, 0))

    in_service = 0
    for i in range(n):
        if active[i]:
            add_busy(i, started[i], horizon)
            in_service += 1
        if not saturated[i]:
            touch_queue(i, horizon)

    span = horizon - warmup
    q_mean = np.array([np.nan if saturated[i] else q_area[i] / span for i in range(n)])
    q_top = np.array([np.nan if saturated[i] else float(q_max[i]) for i in range(n)])
    final_queues = tuple(-1 if saturated[i] else queue[i] for i in range(n))
    return SimReport(
        n=n,
        window=width,
        theta_batches=busy / width,
        departure_batches=deps / width,
        queue_mean=q_mean,
        queue_max=q_top,
        arrivals=arrived if relay else 0,
        departures=departed,
        final_queues=final_queues,
        in_service=in_service if relay else 0,
        events=events,
        trace=trace,
        trace_decimated=decimated,
    )


def simulate_saturated(cfg: SimConfig) -> SimReport:
    if not isinstance(cfg.mode, Saturated):
        raise InvalidConfig("simulate_saturated needs mode=Saturated()")
    return simulate(cfg)


def simulate_relay(cfg: SimConfig) -> SimReport:
    if not isinstance(cfg.mode, Relay):
        raise InvalidConfig("simulate_relay needs mode=Relay(...)")
    return simulate(cfg)


def stability_threshold(alpha, beta: int):
    """Largest arrival rate a fair-rate relay line sustains: ``alpha / (1 + alpha (beta+1))``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return alpha / (1 + alpha * (beta + 1))


def combine_reports(reports: Iterable[SimReport]) -> SimReport:
    """Pool independent replications of the same configuration.

    Batches are put in a canonical order before pooling, so the result does
    not depend on the order (or grouping) in which reports are combined.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to combine")
    n = reports[0].n
    if any(r.n != n for r in reports):
        raise ValueError("reports describe different networks")
    rows = np.vstack([np.column_stack([r.theta_batches, r.departure_batches]) for r in reports])
    rows = rows[np.lexsort(rows.T[::-1])]
    weights = np.array([r.theta_batches.shape[0] for r in reports], dtype=float)

    def pooled(attr, how):
        vals = np.vstack([getattr(r, attr) for r in reports])
        if how == "max":
            return vals.max(axis=0)
        return np.sort(vals * weights[:, None], axis=0).sum(axis=0) / weights.sum()

    return SimReport(
        n=n,
        window=reports[0].window,
        theta_batches=rows[:, :n],
        departure_batches=rows[:, n],
        queue_mean=pooled("queue_mean", "mean"),
        queue_max=pooled("queue_max", "max"),
        arrivals=sum(r.arrivals for r in reports),
        departures=sum(r.departures for r in reports),
        final_queues=tuple(sum(q) for q in zip(*(r.final_queues for r in reports))),
        in_service=sum(r.in_service for r in reports),
        events=sum(r.events for r in reports),
    )


def replicate(cfg: SimConfig, seeds: Sequence[int], jobs: int = 1) -> SimReport:
    """Run one replication per seed (optionally in parallel) and pool them."""
    from dataclasses import replace

    cfgs = [replace(cfg, seed=s, trace=False) for s in seeds]
    if jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(simulate, cfgs))
    else:
        reports = [simulate(c) for c in cfgs]
    return combine_reports(reports)


def trace_rows(report: SimReport) -> list:
    """Trace records ``(t, node, event, queue_len)``; queue_len is -1 for saturated nodes."""
    if report.trace is None:
        raise ValueError("run was made with trace=False")
    return list(report.trace)
