"""Dilogarithms and closed-form Mahler measures.

The complex dilogarithm uses its power series for ``|z| <= 1/2``; the
inversion ``z -> 1/z`` and reflection ``z -> 1 - z`` move other arguments
into the unit disc, and the remaining band (``1/2 < |z| <= 1``,
``Re z <= 1/2``) is covered by the Bernoulli series in ``-log(1 - z)``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Tuple

import numpy as np
from scipy import integrate, optimize

PI2_6 = math.pi ** 2 / 6


@lru_cache(maxsize=None)
def bernoulli_numbers(n: int) -> Tuple[Fraction, ...]:
    """B_0..B_n with the convention B_1 = -1/2."""
    B = [Fraction(0)] * (n + 1)
    B[0] = Fraction(1)
    for m in range(1, n + 1):
        B[m] = -sum(math.comb(m + 1, k) * B[k] for k in range(m)) / (m + 1)
    return tuple(B)


_BERN = [float(b) for b in bernoulli_numbers(60)]


def _li2_series(z: complex) -> complex:
    total = 0j
    zk = z
    for k in range(1, 200):
        term = zk / (k * k)
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300):
            break
        zk *= z
    return total


def _li2_bernoulli(z: complex) -> complex:
    u = -cmath.log(1 - z)
    total = 0j
    upow = u
    fact = 1.0
    for n in range(0, 60):
        # term B_n u^{n+1} / (n+1)!
        fact *= (n + 1)
        b = _BERN[n]
        if b:
            term = b * upow / fact
            total += term
            if n > 2 and abs(term) < 1e-18 * max(abs(total), 1e-300):
                break
        upow *= u
    return total


def li2(z: complex) -> complex:
    """Principal branch of the dilogarithm."""
    z = complex(z)
    if z == 0:
        return 0j
    if z == 1:
        return complex(PI2_6)
    if abs(z) > 1:
        w = 1 / z
        return -li2(w) - PI2_6 - 0.5 * cmath.log(-z) ** 2
    if abs(z) <= 0.5:
        return _li2_series(z)
    if z.real > 0.5:
        return PI2_6 - cmath.log(z) * cmath.log(1 - z) - li2(1 - z)
    return _li2_bernoulli(z)


def bloch_wigner(z: complex) -> float:
    """D(z) = Im Li2(z) + log|z| arg(1 - z); 0 at z in {0, 1}."""
    z = complex(z)
    if z == 0 or z == 1:
        return 0.0
    if abs(z) > 1:
        return -bloch_wigner(1 / z)
    return li2(z).imag + math.log(abs(z)) * cmath.phase(1 - z)


# ----------------------------------------------------------------------
# Clausen-type circle series
# ----------------------------------------------------------------------
_CLAUSEN_TERMS = 1_000_000
_N = np.arange(1, _CLAUSEN_TERMS + 1, dtype=np.float64)
_INV_N2 = 1.0 / (_N * _N)


def _principal(theta: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    t = math.fmod(theta, 2 * math.pi)
    if t > math.pi:
        t -= 2 * math.pi
    elif t <= -math.pi:
        t += 2 * math.pi
    return t


def clausen2(phi: float) -> float:
    """Sum_{n>=1} sin(n phi) / n^2 (equal to D(e^{i phi}))."""
    phi = _principal(float(phi))
    if phi == 0.0 or phi == math.pi:
        return 0.0
    if abs(phi) < 0.5:
        # small-angle expansion; the direct tail correction degrades as phi -> 0
        B = bernoulli_numbers(60)
        total = phi - phi * math.log(abs(phi))
        p = phi
        fact = 1.0
        for k in range(1, 30):
            p *= phi * phi
            fact_k = math.factorial(2 * k + 1)
            term = abs(float(B[2 * k])) * p / (2 * k * fact_k)
            total += term
            if abs(term) < 1e-18:
                break
        return total
    s = float(np.sum(np.sin(phi * _N) * _INV_N2))
    # tail sum_{n>N} e^{i n phi}/n^2 by two rounds of summation by parts
    N = _CLAUSEN_TERMS
    q = cmath.exp(1j * phi)
    c = q / (1 - q)
    f1 = 1.0 / (N + 1) ** 2
    df1 = f1 - 1.0 / (N + 2) ** 2
    tail = c * q ** N * f1 - c * c * q ** N * df1
    return s + tail.imag


def circle_dilog(theta: float) -> float:
    """D(e^{2 i theta}) = Sum sin(2 n theta)/n^2 = -2 * integral_0^theta log|2 sin t| dt."""
    return clausen2(2.0 * float(theta))


def log_sine_integral(theta: float) -> float:
    """integral_0^theta log|2 sin t| dt via the circle dilogarithm."""
    return -0.5 * circle_dilog(theta)


# ----------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------
def smyth_constant() -> float:
    """m(x1 + x2 + 1) = D(e^{i pi/3}) / pi."""
    return bloch_wigner(cmath.exp(1j * math.pi / 3)) / math.pi


def mx4_closed(r: int) -> float:
    if r < 1:
        raise ValueError("r must be a positive integer")
    return r * smyth_constant()


def markoff_x5_closed() -> float:
    return 2 * smyth_constant()


def somos_x6_closed() -> float:
    return smyth_constant()


@dataclass(frozen=True)
class ChebyshevPoly:
    """Chebyshev polynomial of the first kind, coefficients low degree first."""
    r: int
    coefficients: Tuple[int, ...]

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coefficients)


@lru_cache(maxsize=None)
def chebyshev_t(r: int) -> ChebyshevPoly:
    if r < 0:
        raise ValueError("r must be nonnegative")
    prev, cur = [1], [0, 1]
    if r == 0:
        return ChebyshevPoly(0, (1,))
    for _ in range(r - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return ChebyshevPoly(r, tuple(cur))


def pr_polynomial(r: int, X: float) -> float:
    """P_r(X) = (1 - T_r(X))^r / (2^{1-r} (1 - X)) - 1."""
    T = chebyshev_t(r)
    return (1 - T(X)) ** r / (2.0 ** (1 - r) * (1 - X)) - 1


def _pr_defining(r: int, t):
    return 2.0 ** (r - 1) * np.abs(np.sin(r * t / 2)) ** r - np.sin(t / 2)


class RootCountError(RuntimeError):
    pass


def pr_roots(r: int) -> List[float]:
    """The r solutions 0 < t_1 < ... < t_r < pi of 2^{r-1}|sin(rt/2)|^r = sin(t/2)."""
    if r < 2:
        raise ValueError("pr_roots needs r >= 2")
    grid = np.linspace(0.0, math.pi, 200 * r + 1)[1:-1]
    vals = _pr_defining(r, grid)
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(optimize.brentq(lambda t: _pr_defining(r, t), a, b,
                                         xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    if len(roots) != r:
        raise RootCountError(f"found {len(roots)} roots for r={r}, expected {r}")
    return roots


def mx5_closed(r: int) -> float:
    """Closed form of m(x_5) for the rank-2 family x_{n+2} x_n = x_{n+1}^r + 1."""
    if r < 1:
        raise ValueError("r must be a positive integer")
    if r == 1:
        return 0.0
    total = 0.0
    for j, t in enumerate(pr_roots(r), start=1):
        sign = 1 if j % 2 == 1 else -1
        total += sign * (bloch_wigner(cmath.exp(1j * r * t)) - bloch_wigner(cmath.exp(1j * t)))
    return r / math.pi * total


def rho_log_abs(r: int, t):
    """log|rho(e^{it})| with rho(z) = (1 - z)/(1 - z^r)^r."""
    return np.log(np.abs(2 * np.sin(t / 2))) - r * np.log(np.abs(2 * np.sin(r * t / 2)))


def mx5_subintervals(r: int) -> List[Tuple[float, float]]:
    """Intervals of (0, pi) where |rho| > 1, listed as [t_0, t_1], [t_2, t_3], ..."""
    ts = [0.0] + pr_roots(r)
    if r % 2 == 0:
        ts.append(math.pi)
    return [(ts[i], ts[i + 1]) for i in range(0, len(ts) - 1, 2)]


def mx5_quadrature(r: int) -> Tuple[float, bool]:
    """Direct adaptive quadrature of (r/pi) * int_{|rho|>1} log|rho| dt over (0, pi).

    Returns the value and whether the sign pattern of log|rho| matched the
    expected alternation on every subinterval (checked at midpoints).
    """
    if r == 1:
        return 0.0, True
    intervals = mx5_subintervals(r)
    total = 0.0
    consistent = True
    edges = [0.0] + pr_roots(r) + [math.pi]
    for a, b in zip(edges[:-1], edges[1:]):
        inside = any(abs(a - lo) < 1e-15 and abs(b - hi) < 1e-15 for lo, hi in intervals)
        mid = float(rho_log_abs(r, 0.5 * (a + b)))
        if (mid > 0) != inside:
            consistent = False
    for a, b in intervals:
        with warnings.catch_warnings():
            # endpoint log singularities are integrable
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(lambda t: float(rho_log_abs(r, t)), a, b,
                                    limit=400, epsabs=1e-13, epsrel=1e-13)
        total += val
    return r / math.pi * total, consistent


# ----------------------------------------------------------------------
# linear-growth constant for r = 2
# ----------------------------------------------------------------------
def cstar_constant(M: int, chunk_rows: int = 256) -> float:
    """Lattice average of |log|(K + sqrt(K^2 - 4))/2|| over M x M roots of unity.

    ``K = x1/x2 + x2/x1 + 1/(x1 x2)`` is the conserved quantity of the r=2 map.
    """
    if M < 25:
        raise ValueError("M must be at least 25")
    roots = np.exp(2j * np.pi * np.arange(M) / M)
    total = 0.0
    for start in range(0, M, chunk_rows):
        x1 = roots[start:start + chunk_rows, None]
        x2 = roots[None, :]
        K = x1 / x2 + x2 / x1 + 1.0 / (x1 * x2)
        w = 0.5 * (K + np.sqrt(K * K - 4))
        total += float(np.sum(np.abs(np.log(np.abs(w)))))
    return total / (M * M)
