"""Reissner-Nordstrom interior: harmonic factors, kinks and geodesics.

Radii are in units with ``G = c = 1``; ``q(r) = r^2 - 2 m r + e^2`` and the
interior band (region II) is ``m - D < r < m + D`` with ``D^2 = m^2 - e^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp

from .curvature import laplace_beltrami_radial, reduced_radial_operator
from .errors import DomainError, SupportError
from .metrics import RNParams

__all__ = [
    "RNParams", "QPoly", "q_poly", "HarmonicU", "harmonic_u", "ConformalProfile",
    "U_factor", "weak_delta_check", "p_eigenvalues", "p_determinant_roots",
    "radial_geodesic", "classical_proper_time", "lebesgue_class_report",
    "null_volume_check", "poly_bump",
]


@dataclass(frozen=True)
class QPoly:
    params: RNParams
    roots: tuple

    def __call__(self, r):
        return self.params.q(r)

    def region(self, r):
        """Region label per radius: ``"II"`` inside the band, ``"horizon"`` on a
        root, ``"outside"`` otherwise."""
        r = np.asarray(r, dtype=float)
        q = self.params.q(r)
        lab = np.where(q < 0, "II", "outside")
        lab = np.where(np.isclose(q, 0.0, atol=1e-14), "horizon", lab)
        return lab if lab.ndim else str(lab)


def q_poly(params: RNParams) -> QPoly:
    return QPoly(params, params.horizons)


def _off_horizon(params, r):
    r = np.asarray(r, dtype=float)
    lo, hi = params.horizons
    if np.any(np.isclose(r, lo, rtol=0, atol=1e-14)) or np.any(
            np.isclose(r, hi, rtol=0, atol=1e-14)):
        raise DomainError("evaluation at a horizon")
    return r


@dataclass(frozen=True)
class HarmonicU:
    """``u = c + (k / 2D) log|(r - m - D) / (r - m + D)|``, so ``u' = k/q``."""

    params: RNParams
    k: float
    c: float

    def __call__(self, r):
        p = self.params
        r = _off_horizon(p, r)
        D = p.D
        return self.c + self.k / (2 * D) * np.log(np.abs((r - p.m - D) / (r - p.m + D)))

    def d1(self, r):
        r = _off_horizon(self.params, r)
        return self.k / self.params.q(r)

    def d2(self, r):
        r = _off_horizon(self.params, r)
        q = self.params.q(r)
        return -self.k * self.params.dq(r) / q ** 2

    def laplacian(self, r):
        return laplace_beltrami_radial(self.params, self, r)


def harmonic_u(params: RNParams, k: float, c: float = 1.0) -> HarmonicU:
    return HarmonicU(params, float(k), float(c))


@dataclass(frozen=True)
class ConformalProfile:
    """Piecewise radial factor with a declared matching radius.

    ``d1`` is the piecewise derivative; ``left_slope``/``right_slope`` are the
    declared one-sided derivatives at the match.
    """

    factor: Callable
    d1: Callable
    match: float
    smoothness: str
    left_slope: float
    right_slope: float
    domain: tuple
    meta: dict = field(default_factory=dict)

    def __call__(self, r):
        return self.factor(r)

    @property
    def jump(self) -> float:
        return self.right_slope - self.left_slope

    def measured_slopes(self, h=1e-6):
        """One-sided second-order differences at the match."""
        m, f = self.match, self.factor
        left = (3 * f(m) - 4 * f(m - h) + f(m - 2 * h)) / (2 * h)
        right = (-3 * f(m) + 4 * f(m + h) - f(m + 2 * h)) / (2 * h)
        return float(left), float(right)


def U_factor(params: RNParams) -> ConformalProfile:
    """``1 + (D/m) log|(r-m-D)/(r-m+D)|`` below ``r = m`` and ``1`` above."""
    m, D = params.m, params.D
    inner = harmonic_u(params, 2 * D * D / m, 1.0)

    def factor(r):
        r = np.asarray(r, dtype=float)
        out = np.ones_like(r)
        below = r < m
        if np.any(below):
            out = np.where(below, inner(np.where(below, r, 0.5 * m)), 1.0)
        return out if out.ndim else float(out)

    def d1(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < m, inner.d1(np.where(r < m, r, 0.5 * m)), 0.0)

    return ConformalProfile(factor, d1, m, "C0", 2 * D * D / (m * params.q(m)), 0.0,
                            params.horizons, {"k": 2 * D * D / m, "harmonic": inner})


def poly_bump(center: float, width: float, power: int = 4):
    """``(1 - s^2)^power`` on ``|s| < 1`` with ``s = (r - center)/width``,
    returned with its first two derivatives."""

    def f(r):
        s = (np.asarray(r, dtype=float) - center) / width
        return np.where(np.abs(s) < 1, (1 - s * s) ** power, 0.0)

    def d1(r):
        s = (np.asarray(r, dtype=float) - center) / width
        return np.where(np.abs(s) < 1, -2 * power * s * (1 - s * s) ** (power - 1), 0.0) / width

    def d2(r):
        s = (np.asarray(r, dtype=float) - center) / width
        val = -2 * power * (1 - s * s) ** (power - 1) + 4 * power * (power - 1) * s * s * (
            1 - s * s) ** (power - 2)
        return np.where(np.abs(s) < 1, val, 0.0) / width ** 2

    f.d1, f.d2 = d1, d2
    return f


@dataclass(frozen=True)
class DeltaReport:
    coefficient: float        # delta mass of Delta U, Laplace-Beltrami normalization
    coefficient_reduced: float  # same with the operator 2 r^-2 (q f')'
    expected: float           # printed: 4 m^-3 D^2
    rbar_coefficient: float   # -6 x coefficient (n = 4 law, u(m) = 1)
    rbar_coefficient_reduced: float
    rbar_expected: float      # printed: -24 m^-3 D^2
    derived: float            # 2 m^-3 D^2 from integrating by parts by hand


def weak_delta_check(params: RNParams, profile: ConformalProfile | None = None,
                     width: float | None = None, nodes: int = 96) -> DeltaReport:
    """Delta coefficient of ``Delta U`` at ``r = m`` in weak form.

    ``int U Delta psi dvol / (psi(m) m^2)`` with ``dvol ~ r^2 dr`` (the time and
    angular factors cancel in the normalization).
    """
    m, D = params.m, params.D
    profile = U_factor(params) if profile is None else profile
    width = 0.25 * D if width is None else width
    lo, hi = params.horizons
    if m - width <= lo or m + width >= hi:
        raise SupportError("test function support reaches a horizon")
    psi = poly_bump(m, width)
    x, w = np.polynomial.legendre.leggauss(nodes)

    def integrate(op):
        total = 0.0
        for a, b in ((m - width, m), (m, m + width)):
            r = 0.5 * (b - a) * (x + 1) + a
            rr = np.clip(r, a + 1e-300, b - 1e-300)
            total += 0.5 * (b - a) * np.sum(w * profile(rr) * op(params, psi, rr) * rr ** 2)
        return total / (psi(m) * m * m)

    c_lb = integrate(laplace_beltrami_radial)
    c_red = integrate(reduced_radial_operator)
    return DeltaReport(float(c_lb), float(c_red), 4 * D * D / m ** 3, -6 * float(c_lb),
                       -6 * float(c_red), -24 * D * D / m ** 3, 2 * D * D / m ** 3)


def p_eigenvalues(params: RNParams, k: float, u, r) -> np.ndarray:
    """Diagonal of ``P`` in (t, r, theta, phi) order for ``u' = k/q``.

    ``u`` may be a number or a callable of ``r``.
    """
    r = _off_horizon(params, r)
    uv = u(r) if callable(u) else u
    q, dq = params.q(r), params.dq(r)
    a = np.array([1.0, -1.0, 0.0, 0.0])
    b = np.array([-1.0, -1.0, 1.0, 1.0])
    c = np.array([1.0, -3.0, 1.0, 1.0])
    r_, q_, dq_, u_ = (np.asarray(z, dtype=float)[..., None] for z in (r, q, dq, uv))
    out = (k * dq_ * u_ / (r_ ** 2 * q_) * a + 2 * k * u_ / r_ ** 3 * b
           + k * k / (r_ ** 2 * q_) * c)
    return out if out.ndim > 1 else out.reshape(4)


@dataclass(frozen=True)
class DeterminantRoots:
    roots: tuple
    claimed: float
    unique: bool
    note: str


def p_determinant_roots(params: RNParams, u_at_m: float = 1.0) -> DeterminantRoots:
    """Real roots in ``k`` of ``det P`` at ``r = m``.

    Each diagonal entry at ``r = m`` is a quadratic ``alpha k + beta k^2``; the
    determinant is their product, a degree-8 polynomial in ``k``.  The cutoff
    term (a delta mass) is excluded.
    """
    m, D = params.m, params.D
    q, dq = -D * D, 0.0
    a = np.array([1.0, -1.0, 0.0, 0.0])
    b = np.array([-1.0, -1.0, 1.0, 1.0])
    c = np.array([1.0, -3.0, 1.0, 1.0])
    lin = dq * u_at_m / (m * m * q) * a + 2 * u_at_m / m ** 3 * b
    quadc = c / (m * m * q)
    poly = np.polynomial.Polynomial([1.0])
    for i in range(4):
        poly = poly * np.polynomial.Polynomial([0.0, lin[i], quadc[i]])
    # roots of each factor, merged; cheaper and better conditioned than
    # rooting the degree-8 product
    roots = set()
    for i in range(4):
        f = np.polynomial.Polynomial([0.0, lin[i], quadc[i]])
        for z in f.roots():
            if abs(z.imag) < 1e-12:
                roots.add(round(float(z.real), 12))
    roots = tuple(sorted(roots))
    for z in roots:
        assert abs(poly(z)) <= 1e-8 * max(1.0, abs(poly(1.0)))
    claimed = 2 * D * D / m
    nonzero = [z for z in roots if z != 0.0]
    return DeterminantRoots(roots, claimed, len(nonzero) == 1,
                            "several nonzero k make det P vanish at r = m"
                            if len(nonzero) > 1 else "unique nonzero root")


@dataclass(frozen=True)
class GeodesicReport:
    proper_time: float
    r: np.ndarray
    tau: np.ndarray
    turning_point: float | None
    asymptotic_ratio: float
    monotone: bool


def _geodesic_rate(params, U, b, r):
    Uv = U(r)
    br = b * b + (2 * params.m / r - 1) * Uv * Uv
    return Uv, br


def radial_geodesic(params: RNParams, U, b: float, r_start: float | None = None,
                    r_end: float = 1e-10, rtol=1e-11) -> GeodesicReport:
    """Proper time along a radial timelike geodesic of ``U^2 g`` down to ``r_end``.

    ``dtau/dr = U^2 / (b^2 + (2m/r - 1) U^2)^{1/2}``, integrated in ``sigma``
    with ``r = sigma^2`` to absorb the ``r^{1/2}`` endpoint behaviour.  The
    piece below ``r_end`` is bounded by the small-``r`` law and added.
    """
    if params.e != 0:
        raise DomainError("radial geodesics are implemented for e = 0")
    U = (lambda r: np.ones_like(np.asarray(r, dtype=float))) if U is None else U
    m = params.m
    r_start = 1.9 * m if r_start is None else r_start

    def rhs(s, y):
        r = s * s
        Uv, br = _geodesic_rate(params, U, b, r)
        return [-2 * s * Uv * Uv / np.sqrt(max(br, 1e-300))]

    def turning(s, y):
        return _geodesic_rate(params, U, b, s * s)[1]

    turning.terminal = True
    s0, s1 = np.sqrt(r_start), np.sqrt(r_end)
    sol = solve_ivp(rhs, (s0, s1), [0.0], method="DOP853", rtol=rtol, atol=1e-14,
                    events=turning, dense_output=True)
    tp = None
    if sol.status == 1 and sol.t_events[0].size:
        tp = float(sol.t_events[0][0] ** 2)
    sig = sol.t
    tau = sol.y[0]
    r = sig * sig
    total = float(tau[-1])
    if tp is None:
        # tail below r_end: dtau ~ (2m)^{-1/2} r^{1/2} U dr with U ~ log growth
        total += (2 * m) ** -0.5 * (2.0 / 3.0) * r_end ** 1.5 * float(abs(U(r_end)))
    rr = np.array([1e-5, 3e-5, 1e-4]) if r_end < 1e-5 else np.array([2 * r_end])
    Uv, br = _geodesic_rate(params, U, b, rr)
    ratio = (Uv * Uv / np.sqrt(br)) / ((2 * m) ** -0.5 * np.sqrt(rr) * Uv)
    return GeodesicReport(total, r, tau, tp, float(np.max(np.abs(ratio - 1)) + 1),
                          bool(np.all(np.diff(r) < 0)))


def classical_proper_time(m: float, r0: float) -> float:
    """``int_0^{r0} (r/(2m - r))^{1/2} dr = 2m (theta - sin theta cos theta)``
    with ``sin^2 theta = r0 / 2m``."""
    th = np.arcsin(np.sqrt(r0 / (2 * m)))
    return 2 * m * (th - np.sin(th) * np.cos(th))


@dataclass(frozen=True)
class LebesgueReport:
    u_in_L4: bool
    grad_u_in_L2_globally: bool
    l4_values: tuple
    grad_values: tuple
    grad_log_slope: float
    expected_log_slope: float


def lebesgue_class_report(params: RNParams, k: float, cuts=(1e-3, 1e-4, 1e-5, 1e-6, 1e-7)):
    """Integrability of ``u`` and ``|du|`` over region II.

    Integrals are taken over ``(m - D + d, m + D - d)`` for shrinking ``d``.
    ``int |u|^4 r^2 dr`` settles; ``int |g^{rr}| u'^2 r^2 dr = k^2 int dr/|q|``
    grows like ``(k^2 / D) log(1/d)`` (both horizons), which is detected by a
    log-linear fit.
    """
    u = harmonic_u(params, k, 1.0)
    lo, hi = params.horizons
    m = params.m

    def l4(d):
        f = lambda r: np.abs(u(r)) ** 4 * r * r
        return quad(f, lo + d, m, limit=200)[0] + quad(f, m, hi - d, limit=200)[0]

    def grad(d):
        f = lambda r: np.abs(params.q(r)) / r ** 2 * u.d1(r) ** 2 * r * r
        return quad(f, lo + d, m, limit=200)[0] + quad(f, m, hi - d, limit=200)[0]

    L = tuple(l4(d) for d in cuts)
    G = tuple(grad(d) for d in cuts)
    x = np.log(1.0 / np.asarray(cuts))
    slope = float(np.polyfit(x, G, 1)[0])
    expected = k * k / params.D

    def settles(vals):
        inc = np.abs(np.diff(vals))
        if inc[-1] <= 1e-12 * max(1.0, abs(vals[-1])):
            return True
        # geometric shrinking of increments vs the constant steps of log growth
        return bool(np.all(inc[1:] <= 0.5 * inc[:-1]))

    return LebesgueReport(settles(L), settles(G), L, G, slope, expected)


def null_volume_check(params: RNParams, r_samples) -> float:
    """Compare ``|g|^{1/2} dv dw`` in null coordinates with ``r^2 dr dt``.

    ``t = (v + w)/2`` and ``(v - w)/2 = int r^2/q dr``.  The 4x4 metric in
    ``(v, w, theta, phi)`` has ``g_vw = q / (2 r^2)``; the Jacobian
    ``d(v, w)/d(r, t)`` is built from the same definitions.  Returns the max
    relative mismatch of the magnitudes (the sign records orientation).
    """
    r = _off_horizon(params, r_samples)
    worst = 0.0
    for ri in np.atleast_1d(r):
        q = params.q(ri)
        G = np.zeros((4, 4))
        G[0, 1] = G[1, 0] = 0.5 * q / ri ** 2
        G[2, 2] = -ri ** 2
        G[3, 3] = -ri ** 2  # at theta = pi/2
        sqrt_g = np.sqrt(abs(np.linalg.det(G)))
        ds_dr = ri * ri / q
        J = np.array([[ds_dr, 1.0], [-ds_dr, 1.0]])  # rows v, w; cols r, t
        lhs = sqrt_g * abs(np.linalg.det(J))
        worst = max(worst, abs(lhs - ri ** 2) / ri ** 2)
    return worst
