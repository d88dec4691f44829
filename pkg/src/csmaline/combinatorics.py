"""Counts of feasible states by activity level and the throughput shape checks.

``a(i, l, n)`` is the number of feasible states of an ``n``-node line with
exactly ``l`` active nodes, one of which is node ``i``. For equal rates
``theta_i = sum_l a(i, l, n) sigma**l / Z_n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .model import DEFAULT_MAX_NODES, LineNetworkConfig, enumerate_states, is_exact_number

__all__ = [
    "ActiveCountTable",
    "active_count_table",
    "throughput_from_counts",
    "oscillation_check",
]


@dataclass(frozen=True)
class ActiveCountTable:
    """``counts[i-1][l] = a(i, l, n)`` and ``levels[l]`` = number of states with ``l`` active."""

    n: int
    beta: int
    counts: tuple
    levels: tuple

    def a(self, i: int, l: int) -> int:
        if not 1 <= i <= self.n or not 0 <= l < len(self.levels):
            return 0
        return self.counts[i - 1][l]

    @property
    def max_level(self) -> int:
        return len(self.levels) - 1

    def rows(self):
        """Yield ``(i, l, count)`` for every node and level 1..max_level."""
        for i in range(1, self.n + 1):
            for l in range(1, self.max_level + 1):
                yield i, l, self.counts[i - 1][l]


def _nearest_neighbor_table(n: int) -> list:
    # a(i, l, m) for every m <= n, built by conditioning on the end nodes:
    #   node 1 (i >= 2):   a(i, l, m) = a(i-2, l-1, m-2) + a(i-1, l, m-1)
    #   node m (i == 1):   a(1, l, m) = a(1, l-1, m-2)   + a(1, l, m-1)
    # with a(i, ., m) = 0 whenever node i does not exist.
    top = (n + 1) // 2
    tables = {0: {}}

    def get(i, l, m):
        if m <= 0 or not 1 <= i <= m or l < 0 or l > top:
            return 0
        return tables[m][i][l]

    for m in range(1, n + 1):
        tab = {}
        tables[m] = tab
        for i in range(1, m + 1):
            row = [0] * (top + 1)
            for l in range(1, top + 1):
                if m == 1:
                    row[l] = 1 if l == 1 else 0
                elif i == 1:
                    row[l] = get(1, l - 1, m - 2) + get(1, l, m - 1)
                else:
                    row[l] = get(i - 2, l - 1, m - 2) + get(i - 1, l, m - 1)
            tab[i] = row
    return [tables[n][i] for i in range(1, n + 1)]


def active_count_table(n: int, beta: int, max_nodes: int = DEFAULT_MAX_NODES) -> ActiveCountTable:
    """Build ``a(i, l, n)`` for all nodes and levels.

    Nearest-neighbor blocking (``beta == 1``) uses the end-node recursions;
    other blocking ranges count over the enumerated state space.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if beta == 1:
        rows = _nearest_neighbor_table(n)
    else:
        space = enumerate_states(LineNetworkConfig(n, beta), max_nodes=max_nodes)
        top = -(-n // (beta + 1))
        level = space.active_counts()
        rows = []
        for i in range(n):
            hits = np.bincount(level[space.incidence[i] == 1], minlength=top + 1)
            rows.append([int(c) for c in hits[: top + 1]])
    top = len(rows[0]) - 1
    levels = [1] + [sum(r[l] for r in rows) // l for l in range(1, top + 1)]
    return ActiveCountTable(n, beta, tuple(tuple(r) for r in rows), tuple(levels))


def throughput_from_counts(table: ActiveCountTable, sigma) -> np.ndarray:
    """Equal-rate throughput ``sum_l a(i, l, n) sigma**l / Z_n``.

    Exact (object array of Fractions) when ``sigma`` is rational.
    """
    powers = [sigma**l for l in range(table.max_level + 1)]
    if is_exact_number(sigma):
        z = sum(c * p for c, p in zip(table.levels, powers))
        out = np.empty(table.n, dtype=object)
        out[:] = [Fraction(sum(c * p for c, p in zip(row, powers)), z) for row in table.counts]
        return out
    powers = [float(p) for p in powers]
    z = math.fsum(c * p for c, p in zip(table.levels, powers))
    return np.array([math.fsum(c * p for c, p in zip(row, powers)) / z for row in table.counts])


def oscillation_check(theta: Sequence, tol: float = 1e-12) -> tuple:
    """Mirror symmetry and the alternating, shrinking first differences.

    Returns ``(symmetric, alternating_decreasing)``. The second flag requires
    ``d_i = (-1)**i (theta_{i+1} - theta_i)`` to be positive and strictly
    decreasing for ``i = 1 .. ceil(n/2) - 1``; for even ``n`` the middle
    difference vanishes by symmetry and is excluded. Differences below
    ``1e-14`` count as zero.
    """
    th = [float(t) for t in theta]
    n = len(th)
    symmetric = all(abs(th[i] - th[n - 1 - i]) <= tol for i in range(n))
    d = [(-1) ** i * (th[i] - th[i - 1]) for i in range(1, -(-n // 2))]
    alternating = all(x > 1e-14 for x in d) and all(b < a for a, b in zip(d, d[1:]))
    return symmetric, alternating
