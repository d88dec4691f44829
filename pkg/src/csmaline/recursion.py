"""Linear-time throughput via the normalization-constant recursion.

Z_i is the normalization constant of the first ``i`` nodes of the line:

    Z_i = 1                          for i <= 0
    Z_i = Z_{i-1} + rho_i Z_{i-beta-1}  for i >= 1

(for ``i <= beta + 1`` this is ``1 + rho_1 + ... + rho_i``). Float sequences
are stored as binary mantissa/exponent pairs so that long lines with large
rates never overflow; throughput ratios are formed from the mantissas and
the exponents cancel exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .model import LineNetworkConfig, is_exact_number

__all__ = [
    "ZSequence",
    "z_sequence",
    "throughput_recursive",
    "z_closed_forms_beta1",
    "avg_throughput_equal",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ZSequence:
    """Z_0..Z_m, optionally with the derivative sequence.

    On the float path ``Z_i = mantissa[i] * 2**exponent[i]``; on the exact
    path mantissas are ints/Fractions and exponents are all zero. The
    derivative (when requested) is taken with respect to a common shift of
    all rates, i.e. ``d/dsigma`` for equal rates ``sigma``.
    """

    beta: int
    mantissa: tuple
    exponent: tuple
    d_mantissa: Optional[tuple] = None
    d_exponent: Optional[tuple] = None

    @property
    def exact(self) -> bool:
        return bool(self.mantissa) and is_exact_number(self.mantissa[0])

    def __len__(self) -> int:
        return len(self.mantissa)

    def scaled(self, i: int) -> tuple:
        """(mantissa, exponent) of Z_i; Z_i = 1 for negative i."""
        if i <= 0:
            return (1, 0)
        return self.mantissa[i], self.exponent[i]

    def value(self, i: int):
        """Z_i as a Python number (``inf`` if it exceeds the float range)."""
        m, e = self.scaled(i)
        if self.exact:
            return m
        try:
            return math.ldexp(m, e)
        except OverflowError:
            return math.inf

    def values(self) -> np.ndarray:
        if self.exact:
            out = np.empty(len(self), dtype=object)
            out[:] = list(self.mantissa)
            return out
        return np.array([self.value(i) for i in range(len(self))])

    @property
    def logscale(self) -> np.ndarray:
        """Accumulated log scaling factor per index (natural log)."""
        return np.asarray(self.exponent, dtype=float) * _LN2

    def log_value(self, i: int) -> float:
        m, e = self.scaled(i)
        return math.log(m) + e * _LN2

    def derivative(self, i: int):
        if self.d_mantissa is None:
            raise ValueError("sequence was built without derivative=True")
        if i <= 0:
            return 0
        m, e = self.d_mantissa[i], self.d_exponent[i]
        if self.exact:
            return m
        try:
            return math.ldexp(m, e)
        except OverflowError:
            return math.inf


def _add_scaled(m1: float, e1: int, m2: float, e2: int) -> tuple:
    """Normalized (m1 2^e1 + m2 2^e2)."""
    if m2 == 0.0 or m1 == 0.0:
        m, e = (m1, e1) if m2 == 0.0 else (m2, e2)
        f, k = math.frexp(m)
        return f, k + e
    e = max(e1, e2)
    s = math.ldexp(m1, e1 - e) + math.ldexp(m2, e2 - e)
    f, k = math.frexp(s)
    return f, k + e


def _z_exact(rates, beta, upto, derivative):
    z = [1] * (upto + 1)
    dz = [0] * (upto + 1) if derivative else None
    for i in range(1, upto + 1):
        j = i - beta - 1
        zj = z[j] if j >= 0 else 1
        z[i] = z[i - 1] + rates[i - 1] * zj
        if derivative:
            dzj = dz[j] if j >= 0 else 0
            dz[i] = dz[i - 1] + zj + rates[i - 1] * dzj
    if derivative:
        return ZSequence(beta, tuple(z), (0,) * len(z), tuple(dz), (0,) * len(z))
    return ZSequence(beta, tuple(z), (0,) * len(z))


def z_sequence(
    rates: Sequence,
    beta: int,
    upto: Optional[int] = None,
    derivative: bool = False,
) -> ZSequence:
    """Normalization constants Z_0..Z_upto for the given rate vector.

    Rational rates (ints/Fractions) give an exact sequence; anything else is
    carried in scaled floating point.
    """
    rates = list(rates)
    if upto is None:
        upto = len(rates)
    if upto > len(rates) or upto < 0:
        raise ValueError(f"upto={upto} must lie in 0..{len(rates)}")
    if all(is_exact_number(r) for r in rates[:upto]):
        return _z_exact(rates, beta, upto, derivative)

    rates = [float(r) for r in rates]
    zm, ze = [0.5], [1]  # Z_0 = 1
    dm, de = ([0.0], [0]) if derivative else (None, None)
    for i in range(1, upto + 1):
        j = i - beta - 1
        rho = rates[i - 1]
        mj, ej = (zm[j], ze[j]) if j >= 0 else (0.5, 1)
        m, e = _add_scaled(zm[i - 1], ze[i - 1], rho * mj, ej)
        zm.append(m)
        ze.append(e)
        if derivative:
            dmj, dej = (dm[j], de[j]) if j >= 0 else (0.0, 0)
            a, b = _add_scaled(dm[i - 1], de[i - 1], mj, ej)
            a, b = _add_scaled(a, b, rho * dmj, dej)
            dm.append(a)
            de.append(b)
    if derivative:
        return ZSequence(beta, tuple(zm), tuple(ze), tuple(dm), tuple(de))
    return ZSequence(beta, tuple(zm), tuple(ze))


def throughput_recursive(config: LineNetworkConfig) -> np.ndarray:
    """Per-node throughput from a forward (and, if needed, backward) pass.

    theta_i = rho_i Z_{1:i-beta-1} Z_{i+beta+1:n} / Z_{1:n}. For
    mirror-symmetric rates the right factor is read off the forward pass;
    otherwise a second pass over the reversed rates supplies it.
    """
    n, beta = config.n, config.beta
    rho = list(config.rho())
    fwd = z_sequence(rho, beta)
    bwd = fwd if rho == rho[::-1] else z_sequence(rho[::-1], beta)
    zn_m, zn_e = fwd.scaled(n)

    if fwd.exact:
        theta = np.empty(n, dtype=object)
        for i in range(1, n + 1):
            theta[i - 1] = Fraction(rho[i - 1] * fwd.scaled(i - beta - 1)[0] * bwd.scaled(n - i - beta)[0], zn_m)
        return theta

    theta = np.empty(n)
    for i in range(1, n + 1):
        lm, le = fwd.scaled(i - beta - 1)
        rm, re = bwd.scaled(n - i - beta)
        theta[i - 1] = math.ldexp(rho[i - 1] * lm * rm / zn_m, le + re - zn_e)
    return theta


def _chebyshev_form(sigma: float, i: int) -> float:
    # U_k(x) at x = sqrt(-1/(4 sigma)) is i^k V_k(y) with y = 1/(2 sqrt(sigma))
    # and V_{k+1} = 2y V_k + V_{k-1}; the branch of (-sigma)^(1/2) paired with
    # x (their product is 1/2) turns the prefactor into sigma^(k/2).
    y = 0.5 / math.sqrt(sigma)
    k = i + 1
    v_prev, v = 1.0, 2.0 * y  # V_0, V_1
    shift = 0
    for _ in range(1, k):
        v_prev, v = v, 2.0 * y * v + v_prev
        if abs(v) > 2.0**500:
            v_prev, v = math.ldexp(v_prev, -500), math.ldexp(v, -500)
            shift += 500
    return math.exp(math.log(v) + shift * _LN2 + 0.5 * k * math.log(sigma))


def _binomial_form(sigma, i: int):
    terms = [math.comb(i + 1 - j, j) * sigma**j for j in range((i + 1) // 2 + 1)]
    if is_exact_number(sigma):
        return sum(terms)
    return math.fsum(terms)


def z_closed_forms_beta1(sigma, i: int) -> tuple:
    """Z_i for equal rates and ``beta = 1`` from two closed forms.

    Returns
    -------
    chebyshev_value : float
        Via the Chebyshev polynomial of the second kind, evaluated with its
        three-term recurrence in real arithmetic.
    binomial_value : number
        ``sum_j C(i+1-j, j) sigma**j``; exact for rational ``sigma``.
    """
    if i < 0:
        raise ValueError("i must be non-negative")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return _chebyshev_form(float(sigma), i), _binomial_form(sigma, i)


def avg_throughput_equal(sigma, beta: int, n: int):
    """Network-average throughput for equal rates, ``(sigma/n) Z_n' / Z_n``.

    The derivative comes from differentiating the recursion term by term:
    ``Z'_i = Z'_{i-1} + Z_{i-beta-1} + sigma Z'_{i-beta-1}``. Exact (Fraction)
    for rational ``sigma``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if n < 1:
        raise ValueError("n must be positive")
    seq = z_sequence([sigma] * n, beta, derivative=True)
    if seq.exact:
        return Fraction(sigma * seq.d_mantissa[n], n * seq.mantissa[n])
    ratio = math.ldexp(seq.d_mantissa[n] / seq.mantissa[n], seq.d_exponent[n] - seq.exponent[n])
    return float(sigma) / n * ratio
