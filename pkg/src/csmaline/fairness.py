"""Fair activation rates and the equal throughput they produce.

Node ``i`` gets rate ``alpha * (1 + alpha)**(gamma(i) - gamma(1))`` where
``gamma`` counts neighbors within ``beta`` hops. With these rates every
node's throughput equals ``alpha / (1 + (beta + 1) alpha)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import EnumerationTooLarge, InvalidConfig
from .exact import throughput_exact
from .model import (
    DEFAULT_MAX_NODES,
    Fair,
    LineNetworkConfig,
    is_exact_number,
    neighbor_counts,
)
from .recursion import throughput_recursive

__all__ = [
    "FairRateVector",
    "fair_rates",
    "fair_throughput",
    "traffic_expansions",
    "verify_fairness",
]


@dataclass(frozen=True)
class FairRateVector:
    """Fair rates for an ``n``-node line.

    ``exponents[i-1] = gamma(i) - gamma(1)``; ``log_rho`` stays finite when
    ``(1 + alpha)**exponent`` would overflow a float.
    """

    alpha: object
    beta: int
    exponents: tuple
    rho: tuple

    @property
    def log_rho(self) -> np.ndarray:
        a = float(self.alpha)
        return math.log(a) + np.asarray(self.exponents, dtype=float) * math.log1p(a)

    def __len__(self) -> int:
        return len(self.rho)


def fair_rates(n: int, beta: int, alpha) -> FairRateVector:
    """Neighbor-compensated rates; exact when ``alpha`` is rational."""
    if n < 1:
        raise InvalidConfig("n must be positive")
    if not alpha > 0:
        raise InvalidConfig("alpha must be positive")
    gamma = neighbor_counts(n, beta)
    exps = tuple(int(g - gamma[0]) for g in gamma)
    if is_exact_number(alpha):
        rho = tuple(alpha * (1 + alpha) ** k for k in exps)
    else:
        a = float(alpha)
        rho = tuple(a * (1.0 + a) ** k if k * math.log1p(a) < 700 else math.inf for k in exps)
    return FairRateVector(alpha, beta, exps, rho)


def fair_throughput(alpha, beta: int):
    """Common per-node throughput under fair rates, ``alpha / (1 + (beta+1) alpha)``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if is_exact_number(alpha):
        return Fraction(alpha) / (1 + (beta + 1) * alpha)
    return alpha / (1 + (beta + 1) * alpha)


def traffic_expansions(n: int, beta: int, alpha, i: int) -> tuple:
    """Light- and heavy-traffic behaviour of node ``i``'s fair rate.

    Returns
    -------
    light : number
        Two-term small-alpha expansion ``alpha + (gamma(i) - gamma(1)) alpha**2``.
    heavy_exponent : int
        Power of alpha in the leading large-alpha term, ``gamma(i) - gamma(1) + 1``.
    """
    if not 1 <= i <= n:
        raise ValueError(f"node index {i} outside 1..{n}")
    k = fair_rates(n, beta, alpha).exponents[i - 1]
    return alpha + k * alpha**2, k + 1


def verify_fairness(
    config: LineNetworkConfig,
    target: Optional[float] = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> float:
    """Largest deviation of any node's throughput from the common target.

    The throughput is computed by the recursion and, when the state space
    can be enumerated, also by brute force; the worse of the two is
    returned. ``target`` defaults to the fair throughput for fair configs
    (with the blocking range capped at ``n - 1``) and to the mean throughput
    otherwise, so equal-rate configs measure their own unfairness.
    """
    paths = [throughput_recursive(config)]
    try:
        paths.append(throughput_exact(config, max_nodes=max_nodes))
    except EnumerationTooLarge:
        pass
    if target is None:
        if isinstance(config.rates, Fair):
            # a range of n-1 or more already blocks every pair
            target = fair_throughput(config.rates.alpha, min(config.beta, config.n - 1))
        else:
            target = float(np.mean(paths[0].astype(float)))
    return max(float(max(abs(t - target) for t in theta)) for theta in paths)
