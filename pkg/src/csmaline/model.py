"""Linear network configuration, feasibility and state enumeration.

Nodes are numbered ``1..n`` in every public function. A network state is
stored as an integer bitmask in which bit ``i - 1`` is set when node ``i``
is active, so ascending mask order lists ``000, 100, 010, 001, 101`` for a
three-node line (node 1 printed first).
"""
from __future__ import annotations

import json
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Any, Mapping, Sequence, Union

import numpy as np

from .errors import EnumerationTooLarge, InvalidConfig, InvalidRange

__all__ = [
    "Equal",
    "Fair",
    "Explicit",
    "RateAssignment",
    "LineNetworkConfig",
    "StateSpace",
    "CapacityMatrix",
    "DEFAULT_MAX_NODES",
    "neighbor_count",
    "neighbor_counts",
    "is_feasible",
    "count_states",
    "state_bound",
    "enumerate_states",
    "capacity_matrix",
    "mask_to_bits",
    "bits_to_mask",
    "is_exact_number",
    "parse_number",
    "load_config",
]

DEFAULT_MAX_NODES = 28

Number = Union[int, float, Fraction]


def is_exact_number(x: Any) -> bool:
    """True for ints and Fractions (bools excluded)."""
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def parse_number(value: Any) -> Number:
    """Coerce JSON/CLI input to a number, keeping ``"p/q"`` strings exact."""
    if isinstance(value, bool):
        raise InvalidConfig(f"expected a number, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return value
    if isinstance(value, numbers.Real):
        return float(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                return Fraction(text)
            return int(text)
        except ValueError:
            pass
        try:
            return float(text)
        except ValueError:
            raise InvalidConfig(f"cannot parse number from {value!r}") from None
    raise InvalidConfig(f"expected a number, got {value!r}")


def _check_positive(name: str, value: Any) -> Number:
    value = parse_number(value)
    if not value > 0 or value != value or value == float("inf"):
        raise InvalidConfig(f"{name} must be a finite positive number, got {value!r}")
    return value


@dataclass(frozen=True)
class Equal:
    """Every node activates at the same rate ``sigma``."""

    sigma: Number

    def __post_init__(self):
        object.__setattr__(self, "sigma", _check_positive("sigma", self.sigma))


@dataclass(frozen=True)
class Fair:
    """Neighbor-compensated rates ``alpha * (1 + alpha)**(gamma(i) - gamma(1))``."""

    alpha: Number

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_positive("alpha", self.alpha))


@dataclass(frozen=True)
class Explicit:
    """Arbitrary per-node activation rates."""

    rho: tuple

    def __post_init__(self):
        rho = tuple(_check_positive("rho_i", r) for r in self.rho)
        if not rho:
            raise InvalidConfig("explicit rate vector is empty")
        object.__setattr__(self, "rho", rho)


RateAssignment = Union[Equal, Fair, Explicit]


@dataclass(frozen=True)
class LineNetworkConfig:
    """``n`` nodes on a line with blocking range ``beta``.

    Parameters
    ----------
    n : int
        Number of nodes, at least 1.
    beta : int
        An active node silences the ``beta`` nodes on each side of it.
    rates : Equal, Fair or Explicit
        Activation rate assignment. Explicit vectors must have length ``n``.
    """

    n: int
    beta: int
    rates: RateAssignment = field(default_factory=lambda: Equal(1))

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, numbers.Integral) or self.n < 1:
            raise InvalidConfig(f"n must be a positive integer, got {self.n!r}")
        if isinstance(self.beta, bool) or not isinstance(self.beta, numbers.Integral) or self.beta < 0:
            raise InvalidConfig(f"beta must be a non-negative integer, got {self.beta!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "beta", int(self.beta))
        if not isinstance(self.rates, (Equal, Fair, Explicit)):
            raise InvalidConfig(f"unknown rate assignment {self.rates!r}")
        if isinstance(self.rates, Explicit) and len(self.rates.rho) != self.n:
            raise InvalidConfig(
                f"explicit rate vector has length {len(self.rates.rho)}, expected n={self.n}"
            )

    @classmethod
    def equal(cls, n: int, beta: int, sigma: Number) -> "LineNetworkConfig":
        return cls(n, beta, Equal(sigma))

    @classmethod
    def fair(cls, n: int, beta: int, alpha: Number) -> "LineNetworkConfig":
        return cls(n, beta, Fair(alpha))

    @classmethod
    def explicit(cls, rho: Sequence[Number], beta: int) -> "LineNetworkConfig":
        rho = tuple(rho)
        return cls(len(rho), beta, Explicit(rho))

    def rho(self) -> tuple:
        """Resolved per-node activation rates (exact types are preserved)."""
        if isinstance(self.rates, Equal):
            return (self.rates.sigma,) * self.n
        if isinstance(self.rates, Explicit):
            return self.rates.rho
        from .fairness import fair_rates

        return fair_rates(self.n, self.beta, self.rates.alpha).rho

    @property
    def exact(self) -> bool:
        """Whether all rates are rational (int or Fraction)."""
        if isinstance(self.rates, Equal):
            return is_exact_number(self.rates.sigma)
        if isinstance(self.rates, Fair):
            return is_exact_number(self.rates.alpha)
        return all(is_exact_number(r) for r in self.rates.rho)

    def to_dict(self) -> dict:
        def enc(x):
            return str(x) if isinstance(x, Fraction) else x

        if isinstance(self.rates, Equal):
            rates = {"mode": "equal", "sigma": enc(self.rates.sigma)}
        elif isinstance(self.rates, Fair):
            rates = {"mode": "fair", "alpha": enc(self.rates.alpha)}
        else:
            rates = {"mode": "explicit", "rho": [enc(r) for r in self.rates.rho]}
        return {"n": self.n, "beta": self.beta, "rates": rates}

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "LineNetworkConfig":
        """Build a config from ``{"n", "beta", "rates": {"mode", ...}}``."""
        try:
            n = doc["n"]
            beta = doc["beta"]
            rates_doc = doc["rates"]
            mode = rates_doc["mode"]
        except (KeyError, TypeError) as exc:
            raise InvalidConfig(f"config is missing field {exc}") from None
        if mode == "equal":
            rates = Equal(rates_doc.get("sigma"))
        elif mode == "fair":
            rates = Fair(rates_doc.get("alpha"))
        elif mode == "explicit":
            rho = rates_doc.get("rho")
            if not isinstance(rho, (list, tuple)):
                raise InvalidConfig("explicit mode needs a 'rho' list")
            rates = Explicit(tuple(rho))
        else:
            raise InvalidConfig(f"unknown rates mode {mode!r}")
        return cls(n, beta, rates)


def load_config(path: Union[str, Path]) -> LineNetworkConfig:
    with open(path) as fh:
        return LineNetworkConfig.from_dict(json.load(fh))


def neighbor_count(config: LineNetworkConfig, i: int) -> int:
    """Number of nodes within ``beta`` hops of node ``i`` (1-based)."""
    if not 1 <= i <= config.n:
        raise InvalidRange(f"node index {i} outside 1..{config.n}")
    b = config.beta
    return min(i - 1, b) + min(config.n - i, b)


def neighbor_counts(n: int, beta: int) -> np.ndarray:
    """gamma(1..n) as an integer array."""
    i = np.arange(1, n + 1)
    return np.minimum(i - 1, beta) + np.minimum(n - i, beta)


def mask_to_bits(mask: int, n: int) -> tuple:
    return tuple((mask >> k) & 1 for k in range(n))


def bits_to_mask(bits: Union[str, Sequence[int]]) -> int:
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    mask = 0
    for k, b in enumerate(bits):
        if b:
            mask |= 1 << k
    return mask


def is_feasible(state: Union[str, Sequence[int]], beta: int) -> bool:
    """True iff no two active nodes are ``beta`` or fewer positions apart.

    ``state`` is a bit sequence or a string such as ``"10010"``.
    """
    last = None
    for pos, bit in enumerate(state):
        if int(bit):
            if last is not None and pos - last <= beta:
                return False
            last = pos
    return True


def count_states(n: int, beta: int) -> int:
    """Number of feasible states, via K_i = K_{i-1} + K_{i-beta-1}."""
    k = [1] * (n + 1)
    for i in range(1, n + 1):
        j = i - beta - 1
        k[i] = k[i - 1] + (k[j] if j >= 0 else 1)
    return k[n]


def state_bound(max_nodes: int = DEFAULT_MAX_NODES) -> int:
    """Largest state count accepted for enumeration.

    Equals the state count of a ``max_nodes`` line under nearest-neighbor
    blocking, so any ``beta >= 1`` line of up to ``max_nodes`` nodes fits.
    """
    return count_states(max_nodes, 1)


@dataclass(frozen=True)
class StateSpace:
    """All feasible states of a line, in ascending bitmask order.

    Attributes
    ----------
    n, beta : int
    masks : ndarray of uint64, shape (K,)
    incidence : ndarray of uint8, shape (n, K)
        ``incidence[i-1, k] == 1`` iff node ``i`` is active in state ``k``.
    """

    n: int
    beta: int
    masks: np.ndarray
    incidence: np.ndarray

    @property
    def size(self) -> int:
        return int(self.masks.shape[0])

    def __len__(self) -> int:
        return self.size

    def bit_strings(self) -> list:
        return ["".join(map(str, mask_to_bits(int(m), self.n))) for m in self.masks]

    def active_counts(self) -> np.ndarray:
        """Number of active nodes in each state."""
        return self.incidence.sum(axis=0, dtype=np.int64)


def _feasible_masks(n: int, beta: int) -> list:
    out = []
    stack = [(0, 0)]  # (next free position, mask)
    while stack:
        pos, mask = stack.pop()
        out.append(mask)
        for p in range(pos, n):
            stack.append((p + beta + 1, mask | (1 << p)))
    out.sort()
    return out


def enumerate_states(config: LineNetworkConfig, max_nodes: int = DEFAULT_MAX_NODES) -> StateSpace:
    """Enumerate every feasible state exactly once.

    Raises
    ------
    EnumerationTooLarge
        When the predicted number of states exceeds ``state_bound(max_nodes)``.
    """
    n, beta = config.n, config.beta
    predicted = count_states(n, beta)
    bound = state_bound(max_nodes)
    if predicted > bound:
        raise EnumerationTooLarge(
            f"n={n}, beta={beta} has {predicted} feasible states (limit {bound})"
        )
    masks = np.array(_feasible_masks(n, beta), dtype=np.uint64)
    shifts = np.arange(n, dtype=np.uint64)
    incidence = ((masks[None, :] >> shifts[:, None]) & np.uint64(1)).astype(np.uint8)
    masks.setflags(write=False)
    incidence.setflags(write=False)
    return StateSpace(n, beta, masks, incidence)


@dataclass(frozen=True)
class CapacityMatrix:
    """Banded constraint matrix: state ``w`` is feasible iff ``rows @ w <= cap``."""

    rows: np.ndarray
    cap: np.ndarray

    def admits(self, bits: Sequence[int]) -> bool:
        w = np.asarray(bits, dtype=np.int64)
        return bool(np.all(self.rows @ w <= self.cap))

    def filter_states(self) -> list:
        """Brute-force ``{w in {0,1}^n : A w <= C}`` as sorted bitmasks."""
        n = self.rows.shape[1]
        return sorted(
            bits_to_mask(bits) for bits in product((0, 1), repeat=n) if self.admits(bits)
        )


def capacity_matrix(config: LineNetworkConfig) -> CapacityMatrix:
    """The ``(n - beta) x n`` matrix whose row ``r`` has ones at columns ``r..r+beta``."""
    n, beta = config.n, config.beta
    if beta > n - 1:
        raise InvalidRange(f"capacity matrix needs beta <= n-1 (n={n}, beta={beta})")
    rows = np.zeros((n - beta, n), dtype=np.int64)
    for r in range(n - beta):
        rows[r, r : r + beta + 1] = 1
    rows.setflags(write=False)
    cap = np.ones(n - beta, dtype=np.int64)
    cap.setflags(write=False)
    return CapacityMatrix(rows, cap)
