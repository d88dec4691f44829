"""Characteristic roots of the equal-rate recursion and what follows from them.

For equal rates ``sigma`` the normalization constants satisfy a linear
recursion with characteristic polynomial

    p(lam) = lam**(beta+1) - lam**beta - sigma,

so ``Z_i = sum_j c_j lam_j**i`` with ``c_j = lam_j**(beta+1) / ((beta+1) lam_j - beta)``.
The unique positive root ``lam_0 > 1`` dominates all others in modulus.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import ConvergenceFailure
from .recursion import avg_throughput_equal

__all__ = [
    "DIVERGENT",
    "RootSet",
    "SeriesExpansion",
    "SeriesRoots",
    "characteristic_roots",
    "z_spectral",
    "z_asymptote",
    "avg_throughput_finite",
    "avg_throughput_limit",
    "alpha_matching",
    "xi",
    "pochhammer",
    "series_roots",
]

#: Returned by :func:`alpha_matching` when no finite fair parameter matches.
DIVERGENT = math.inf

_MAX_ITER = 200


def _poly(beta: int, sigma: float) -> list:
    """Coefficients of the characteristic polynomial, highest degree first."""
    if beta == 0:
        return [1.0, -1.0 - sigma]
    return [1.0, -1.0] + [0.0] * (beta - 1) + [-sigma]


def _horner(coeffs, x):
    p = coeffs[0]
    dp = 0
    for c in coeffs[1:]:
        dp = dp * x + p
        p = p * x + c
    return p, dp


def _residual(lam, sigma: float, beta: int) -> float:
    return abs(lam ** (beta + 1) - lam**beta - sigma)


def _dominant_root(sigma: float, beta: int) -> float:
    """Safeguarded Newton for the positive root on [1, upper]."""
    f = lambda x: x**beta * (x - 1.0) - sigma
    df = lambda x: x ** (beta - 1) * ((beta + 1) * x - beta) if beta >= 1 else 1.0
    lo = 1.0
    # both are upper bounds: p(1 + sigma) >= 0 and p(sigma^(1/(beta+1)) + 1) >= 0
    hi = min(1.0 + sigma, sigma ** (1.0 / (beta + 1)) + 1.0)
    x = hi
    for _ in range(_MAX_ITER):
        fx = f(x)
        if fx > 0:
            hi = x
        elif fx < 0:
            lo = x
        else:
            return x
        step = fx / df(x)
        nxt = x - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= 4e-16 * abs(nxt):
            return nxt
        x = nxt
    if _residual(x, sigma, beta) < 1e-12 * (1 + sigma):
        return x
    raise ConvergenceFailure(f"dominant root did not converge (sigma={sigma}, beta={beta})")


def _deflate(coeffs, root):
    """Synthetic division by (x - root); drops the remainder."""
    out = [coeffs[0]]
    for c in coeffs[1:-1]:
        out.append(c + out[-1] * root)
    return out


def _newton(coeffs, x0, tol=1e-15, maxiter=_MAX_ITER):
    x = complex(x0)
    for _ in range(maxiter):
        p, dp = _horner(coeffs, x)
        if dp == 0:
            return None
        step = p / dp
        x -= step
        if abs(step) <= tol * max(1.0, abs(x)):
            return x
    return None


@dataclass(frozen=True)
class RootSet:
    """All ``beta + 1`` characteristic roots, dominant root first.

    Attributes
    ----------
    roots : complex ndarray
        ``roots[0]`` is the real dominant root.
    dominant : float
    coeffs : complex ndarray
        Partial-fraction coefficients ``c_j`` aligned with ``roots``.
    """

    sigma: float
    beta: int
    roots: np.ndarray
    dominant: float
    coeffs: np.ndarray

    def residuals(self) -> np.ndarray:
        return np.array([_residual(complex(r), self.sigma, self.beta) for r in self.roots])


def _seeds(sigma: float, beta: int):
    if sigma >= float(xi(beta)):
        s = sigma ** (1.0 / (beta + 1))
        return [s * cmath.exp(2j * math.pi * j / (beta + 1)) for j in range(1, beta + 1)]
    s = sigma ** (1.0 / beta)
    return [s * cmath.exp(2j * math.pi * (j - 0.5) / beta) for j in range(1, beta + 1)]


def characteristic_roots(sigma: float, beta: int) -> RootSet:
    """Roots of ``lam**(beta+1) - lam**beta - sigma`` and their coefficients.

    The dominant root comes from a bracketed Newton iteration. The others are
    found one at a time by Newton on the deflated polynomial and then
    polished by Newton on the full polynomial, since deflation alone lets
    rounding errors accumulate.

    Raises
    ------
    ConvergenceFailure
        If any root misses its residual tolerance, or the roots are not
        distinct and strictly dominated by ``lam_0``.
    """
    sigma = float(sigma)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    full = _poly(beta, sigma)
    lam0 = _dominant_root(sigma, beta)
    found = [complex(lam0)]
    work = _deflate(full, lam0)
    for seed in _seeds(sigma, beta) if beta else []:
        root = None
        for start in (seed, seed * 1.1 + 0.05j, -seed):
            root = _newton(work, start)
            if root is not None:
                break
        if root is None:
            # fall back to companion-matrix eigenvalues as a starting point
            candidates = np.roots(np.array(work, dtype=complex))
            root = _newton(work, candidates[np.argmin(abs(candidates - seed))])
            if root is None:
                raise ConvergenceFailure(f"deflated Newton failed (sigma={sigma}, beta={beta})")
        found.append(root)
        work = _deflate(work, root)

    polished = [found[0]]
    for r in found[1:]:
        p = _newton(full, r, maxiter=50)
        polished.append(p if p is not None else r)
    for k, r in enumerate(polished[1:], start=1):
        if abs(r.imag) < 1e-14 * max(1.0, abs(r)):
            polished[k] = complex(r.real, 0.0)

    tol = 1e-10 * (1.0 + sigma)
    bad = [r for r in polished if _residual(r, sigma, beta) >= tol]
    if bad:
        raise ConvergenceFailure(f"root residual above tolerance for {bad} (sigma={sigma}, beta={beta})")
    sub = sorted(polished[1:], key=lambda z: (-abs(z), cmath.phase(z)))
    roots = np.array([polished[0]] + sub, dtype=complex)
    for j in range(1, len(roots)):
        if not abs(roots[j]) < lam0:
            raise ConvergenceFailure(f"root {roots[j]} is not dominated by lam_0={lam0}")
    for a in range(len(roots)):
        for b in range(a + 1, len(roots)):
            if abs(roots[a] - roots[b]) <= 1e-8:
                raise ConvergenceFailure("characteristic roots are not distinct")

    coeffs = roots ** (beta + 1) / ((beta + 1) * roots - beta)
    for j, r in enumerate(roots):
        if abs(r.imag) > 0:
            k = int(np.argmin(abs(roots - np.conj(r))))
            if abs(coeffs[k] - np.conj(coeffs[j])) > 1e-9 * max(1.0, abs(coeffs[j])):
                raise ConvergenceFailure("coefficients break conjugate symmetry")
    roots.setflags(write=False)
    coeffs.setflags(write=False)
    return RootSet(sigma, beta, roots, float(lam0), coeffs)


def _as_real(value: complex, what: str) -> float:
    if abs(value.imag) > 1e-9 * max(abs(value.real), 1e-300):
        raise ConvergenceFailure(f"{what} has imaginary residue {value.imag!r}")
    return value.real


def z_spectral(sigma: float, beta: int, i: int, roots: Optional[RootSet] = None) -> float:
    """Z_i = sum_j c_j lam_j**i for equal rates."""
    if i < 0:
        raise ValueError("i must be non-negative")
    rs = roots or characteristic_roots(sigma, beta)
    total = complex(np.sum(rs.coeffs * rs.roots**i))
    return _as_real(total, "Z_i")


def z_asymptote(sigma: float, beta: int, i: int, roots: Optional[RootSet] = None) -> float:
    """One-term approximation ``c_0 lam_0**i``."""
    rs = roots or characteristic_roots(sigma, beta)
    return float(rs.coeffs[0].real) * rs.dominant**i


def avg_throughput_finite(sigma: float, beta: int, n: int, roots: Optional[RootSet] = None) -> float:
    """Average per-node throughput ``(sigma/n) P/Q`` written in the roots.

    ``Q = sum_j lam_j**(n+beta+1)/D_j`` and
    ``P = sum_j lam_j**(n+1)/D_j * ((n+beta+1)/D_j - (beta+1) lam_j/D_j**2)``
    with ``D_j = (beta+1) lam_j - beta``. Both sums are divided by
    ``lam_0**(n+1)`` before evaluation so large ``n`` cannot overflow.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rs = roots or characteristic_roots(sigma, beta)
    lam = rs.roots
    d = (beta + 1) * lam - beta
    r = (lam / rs.dominant) ** (n + 1)
    p = np.sum(r / d * ((n + beta + 1) / d - (beta + 1) * lam / d**2))
    q = np.sum(r * lam**beta / d)
    return float(sigma) / n * _as_real(complex(p / q), "P/Q")


def avg_throughput_limit(sigma: float, beta: int, roots: Optional[RootSet] = None) -> float:
    """Limit of the average throughput as ``n`` grows: ``(lam_0 - 1)/((beta+1) lam_0 - beta)``."""
    lam0 = (roots or characteristic_roots(sigma, beta)).dominant
    return (lam0 - 1.0) / ((beta + 1) * lam0 - beta)


def alpha_matching(sigma, beta: int, n: Optional[float] = None):
    """Fair parameter alpha giving the same average throughput as equal rates.

    For ``n`` None or infinite this is ``lam_0 - 1``. For finite ``n`` it
    solves ``alpha / (1 + (beta+1) alpha) = T`` with ``T`` the equal-rate
    average, i.e. ``alpha = T / (1 - (beta+1) T)``, and returns
    :data:`DIVERGENT` when ``T >= 1/(beta+1)``. Rational ``sigma`` with
    finite ``n`` yields a Fraction.
    """
    if n is None or n == math.inf:
        return characteristic_roots(sigma, beta).dominant - 1.0
    t = avg_throughput_equal(sigma, beta, int(n))
    denom = 1 - (beta + 1) * t
    if denom <= 0:
        return DIVERGENT
    return t / denom


def xi(beta: int) -> Fraction:
    """Boundary ``beta**beta / (beta+1)**(beta+1)`` between the two series regimes."""
    return Fraction(beta**beta, (beta + 1) ** (beta + 1))


def pochhammer(x: float, m: int) -> float:
    """Rising factorial ``x (x+1) ... (x+m-1)``."""
    out = 1.0
    for k in range(m):
        out *= x + k
    return out


def _poch_over_factorial(x: float, l: int) -> float:
    # (x)_{l-1} / l!, built as a running product of ratios to stay in range
    out = 1.0 / l
    for k in range(l - 1):
        out *= (x + k) / (k + 1)
    return out


@dataclass(frozen=True)
class SeriesExpansion:
    """A truncated series for one characteristic root.

    ``kind`` is ``"small"`` (power series in sigma or ``w_j``) or ``"large"``
    (series for ``1/lam_j`` in ``1/v_j``). ``terms`` holds the individual
    term values and ``value`` the resulting estimate of ``lam_j``.
    """

    kind: str
    j: int
    coefficients: tuple
    terms: tuple
    value: complex
    in_domain: bool

    @property
    def partial_sums(self) -> np.ndarray:
        return np.cumsum(np.array(self.terms, dtype=complex))


@dataclass(frozen=True)
class SeriesRoots:
    sigma: float
    beta: int
    xi: Fraction
    small: tuple
    large: tuple

    @property
    def small_in_domain(self) -> bool:
        return self.sigma <= self.xi

    @property
    def large_in_domain(self) -> bool:
        return self.sigma >= self.xi


def series_roots(sigma: float, beta: int, terms: int = 40) -> SeriesRoots:
    """Evaluate both series families for every root.

    Outside a family's convergence region the expansions are still
    evaluated but carry ``in_domain=False``.
    """
    if terms < 1:
        raise ValueError("terms must be at least 1")
    sigma = float(sigma)
    bound = xi(beta)
    small_ok = sigma <= bound
    large_ok = sigma >= bound
    ls = range(1, terms + 1)

    small = []
    coef0 = tuple((-1) ** (l - 1) * _poch_over_factorial(beta * l, l) for l in ls)
    t0 = tuple(complex(c * sigma**l) for c, l in zip(coef0, ls))
    small.append(SeriesExpansion("small", 0, coef0, t0, 1.0 + sum(t0), small_ok))
    for j in range(1, beta + 1):
        w = sigma ** (1.0 / beta) * cmath.exp(2j * math.pi * (j - 0.5) / beta)
        coef = tuple(_poch_over_factorial(l / beta, l) for l in ls)
        tj = tuple(c * w**l for c, l in zip(coef, ls))
        small.append(SeriesExpansion("small", j, coef, tj, sum(tj), small_ok))

    large = []
    for j in range(beta + 1):
        v = sigma ** (1.0 / (beta + 1)) * cmath.exp(2j * math.pi * j / (beta + 1))
        coef = tuple(_poch_over_factorial(-l / (beta + 1), l) for l in ls)
        tj = tuple(c * v ** (-l) for c, l in zip(coef, ls))
        inv = sum(tj)
        large.append(SeriesExpansion("large", j, coef, tj, 1.0 / inv, large_ok))

    return SeriesRoots(sigma, beta, bound, tuple(small), tuple(large))
