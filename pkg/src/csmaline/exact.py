"""Brute-force stationary distribution and throughput over the enumerated states.

This is the reference path every faster method is checked against. When all
rates are rational (ints or Fractions) and the state space is small enough,
everything is computed in exact rational arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .model import DEFAULT_MAX_NODES, LineNetworkConfig, StateSpace, enumerate_states

__all__ = [
    "EXACT_STATE_LIMIT",
    "StationaryDistribution",
    "stationary_distribution",
    "throughput_exact",
]

EXACT_STATE_LIMIT = 100_000


@dataclass(frozen=True)
class StationaryDistribution:
    """Product-form distribution over a :class:`StateSpace`.

    ``probs`` is a float array, or an object array of Fractions on the exact
    path. ``z`` is the normalization constant (``inf`` if it overflows a
    float; ``log_z`` is always finite).
    """

    space: StateSpace
    probs: np.ndarray
    z: object
    log_z: float

    @property
    def exact(self) -> bool:
        return self.probs.dtype == object


def _use_exact(config: LineNetworkConfig, space: StateSpace, exact: Optional[bool]) -> bool:
    if exact is None:
        return config.exact and space.size <= EXACT_STATE_LIMIT
    if exact and not config.exact:
        raise ValueError("exact arithmetic requested but rates are not rational")
    return exact


def stationary_distribution(
    config: LineNetworkConfig,
    exact: Optional[bool] = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> StationaryDistribution:
    """pi(w) proportional to prod_i rho_i**w_i over the feasible states.

    Parameters
    ----------
    exact : bool, optional
        Force (True) or forbid (False) rational arithmetic. By default the
        exact path is used whenever the rates are rational and the state
        count is at most ``EXACT_STATE_LIMIT``.
    """
    space = enumerate_states(config, max_nodes=max_nodes)
    rho = config.rho()
    if _use_exact(config, space, exact):
        rho = [Fraction(r) for r in rho]
        weights = []
        for mask in space.masks.tolist():
            w = Fraction(1)
            k = 0
            while mask:
                if mask & 1:
                    w *= rho[k]
                mask >>= 1
                k += 1
            weights.append(w)
        z = sum(weights, Fraction(0))
        probs = np.empty(len(weights), dtype=object)
        probs[:] = [w / z for w in weights]
        return StationaryDistribution(space, probs, z, math.log(z))

    log_rho = np.log(np.asarray(rho, dtype=float))
    log_w = space.incidence.T.astype(float) @ log_rho
    top = float(log_w.max())
    w = np.exp(log_w - top)
    # fsum gives a correctly rounded total independent of summation order
    total = math.fsum(w.tolist())
    probs = w / total
    log_z = top + math.log(total)
    z = math.exp(log_z) if log_z < 709.0 else math.inf
    return StationaryDistribution(space, probs, z, log_z)


def throughput_exact(
    config: LineNetworkConfig,
    exact: Optional[bool] = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> np.ndarray:
    """Per-node fraction of time active, ``theta = X @ Pi``.

    Returns a float array, or an object array of Fractions on the exact path.
    """
    dist = stationary_distribution(config, exact=exact, max_nodes=max_nodes)
    X = dist.space.incidence
    if dist.exact:
        theta = np.empty(config.n, dtype=object)
        for i in range(config.n):
            theta[i] = sum(dist.probs[X[i] == 1], Fraction(0))
        return theta
    return np.array([math.fsum(dist.probs[X[i] == 1].tolist()) for i in range(config.n)])
