"""Exact rational power series for the cubic interior equation.

The ansatz ``v = r^{-3/2} w(r)`` turns the interior equation into

    4 r^2 (r - 1) w'' + 4 r (2 - r) w' + 3 (r - 3) w + 9 w^3 = 0,

and ``w = sum w_k r^k`` with ``w_0 = 1`` is determined order by order.  The
order-``n`` equation is linear in ``w_n`` with coefficient
``-4 n^2 + 12 n + 18``, whose roots ``(3 +- 3 sqrt 3) / 2`` are irrational, so
the recurrence never stalls.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

ALPHA = Fraction(-3, 2)
PRINTED_W2 = Fraction(-165, 26 ** 2)


@dataclass(frozen=True)
class RationalSeries:
    coeffs: tuple
    alpha: Fraction = ALPHA

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def truncate(self, N: int) -> "RationalSeries":
        return RationalSeries(self.coeffs[:N + 1], self.alpha)

    def as_strings(self):
        return [f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator)
                for c in self.coeffs]

    def floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def __call__(self, r, deriv: int = 0):
        """Evaluate ``w`` (or its derivatives) in floating point."""
        c = self.floats()
        p = np.polynomial.Polynomial(c)
        for _ in range(deriv):
            p = p.deriv()
        return p(np.asarray(r, dtype=float))

    def v(self, r):
        r = np.asarray(r, dtype=float)
        return r ** float(self.alpha) * self(r)


def w_coefficient(n: int) -> int:
    """Coefficient of ``w_n`` in the order-``n`` equation."""
    return -4 * n * n + 12 * n + 18


def w_recurrence(N: int) -> RationalSeries:
    """Coefficients ``w_0 .. w_N`` as exact fractions."""
    if N < 0:
        raise ValueError("order must be non-negative")
    w = [Fraction(1)]
    sq = [Fraction(1)]  # coefficients of w^2
    cube = [Fraction(1)]  # coefficients of w^3
    for n in range(1, N + 1):
        a = w[n - 1]
        known = (4 * (n - 1) * (n - 2) - 4 * (n - 1) + 3) * a
        # w^2 and w^3 at order n without the w_n terms (2 w_n and 3 w_n)
        sq_n = sum((w[i] * w[n - i] for i in range(1, n)), Fraction(0))
        cube_n = sq_n + sum((sq[j] * w[n - j] for j in range(1, n)), Fraction(0))
        wn = -(known + 9 * cube_n) / w_coefficient(n)
        w.append(wn)
        sq.append(sq_n + 2 * wn)
        cube.append(cube_n + 3 * wn)
    return RationalSeries(tuple(w))


def _conv(a, b, K):
    out = [Fraction(0)] * (K + 1)
    for i, x in enumerate(a[:K + 1]):
        if x == 0:
            continue
        for j, y in enumerate(b[:K + 1 - i]):
            out[i + j] += x * y
    return out


def equation_coefficients(coeffs, K: int):
    """Coefficients up to order ``K`` of the w-equation applied to the
    polynomial with the given coefficients."""
    c = list(coeffs) + [Fraction(0)] * max(0, K + 1 - len(coeffs))
    out = [Fraction(0)] * (K + 1)
    for k in range(K + 1):
        # 4 r^3 w'' - 4 r^2 w'' + 8 r w' - 4 r^2 w' + 3 r w - 9 w
        if k >= 1:
            out[k] += (4 * (k - 1) * (k - 2) - 4 * (k - 1) + 3) * c[k - 1]
        out[k] += (-4 * k * (k - 1) + 8 * k - 9) * c[k]
    cube = _conv(_conv(c, c, K), c, K)
    for k in range(K + 1):
        out[k] += 9 * cube[k]
    return out


@dataclass(frozen=True)
class ResidualReport:
    order: int | None  # lowest order with a nonzero coefficient, None if identically 0
    coefficient: Fraction | None


def w_equation_residual(series) -> ResidualReport:
    """Substitute the truncated polynomial into the w-equation exactly."""
    coeffs = series.coeffs if isinstance(series, RationalSeries) else tuple(
        Fraction(x) for x in series)
    N = len(coeffs) - 1
    K = N + 1
    while True:
        out = equation_coefficients(coeffs, K)
        for k, val in enumerate(out):
            if val != 0:
                return ResidualReport(k, val)
        if K >= 3 * N + 1:
            return ResidualReport(None, None)
        K = 3 * N + 1


@dataclass(frozen=True)
class RadiusEstimate:
    radius: float
    exponent: float
    ratios: np.ndarray
    r_squared: float
    conclusive: bool
    note: str = ""


def radius_estimate(coeffs, kmin: int | None = None) -> RadiusEstimate:
    """Domb-Sykes fit ``c_k / c_{k-1} = (1/R)(1 - (1 + g)/k)``.

    ``R`` is the radius of convergence and ``g`` the exponent of the nearest
    singularity ``(1 - r/R)^g`` (``g = 0`` reads as a logarithm).  Coefficients
    whose ratios change sign irregularly give an inconclusive report.
    """
    c = np.array([float(x) for x in (coeffs.coeffs if isinstance(coeffs, RationalSeries)
                                     else coeffs)])
    N = c.size - 1
    if N < 20:
        raise ValueError("Domb-Sykes needs at least 20 coefficients")
    kmin = N // 2 if kmin is None else kmin
    k = np.arange(kmin, N + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = c[k] / c[k - 1]
    if not np.all(np.isfinite(ratios)) or np.any(np.sign(ratios) != np.sign(ratios[0])):
        return RadiusEstimate(np.nan, np.nan, ratios, 0.0, False, "sign changes in ratios")
    x = 1.0 / k
    y = np.abs(ratios)
    slope, icpt = np.polyfit(x, y, 1)
    fit = icpt + slope * x
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum((y - fit) ** 2) / ss if ss > 0 else 1.0
    R = 1.0 / icpt
    g = -slope * R - 1.0
    return RadiusEstimate(float(R), float(g), ratios, float(r2), True)


def ratio_sequence(coeffs) -> np.ndarray:
    """``|c_k / c_{k+1}|`` for the plain ratio test."""
    c = np.array([float(x) for x in (coeffs.coeffs if isinstance(coeffs, RationalSeries)
                                     else coeffs)])
    return np.abs(c[:-1] / c[1:])


def lower_bound_on(series: RationalSeries, r1: Fraction) -> Fraction:
    """Exact lower bound of the truncated ``w`` on ``[0, r1]``:
    ``1 - sum_{k>=1} |w_k| r1^k``."""
    r1 = Fraction(r1)
    return series.coeffs[0] - sum(abs(c) * r1 ** k for k, c in enumerate(series.coeffs)
                                  if k >= 1)
