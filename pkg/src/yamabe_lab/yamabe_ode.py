"""Cubic Yamabe-type equation on the Schwarzschild interior.

Internal units put the horizon at ``r = 1`` (mass ``1/2``).  With
``t = log((1 - r)/r)`` the equation for ``v = 3^{-1} (2 Lambda)^{1/2} u``
becomes the autonomous-looking

    v_tt = (9/4) e^t (1 + e^t)^{-4} v^3 = (9/4) r^3 (1 - r) v^3,

which is integrated from a series seed near ``r = 0``.  Physical radii are
``2 m r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import quad, solve_ivp, trapezoid
from scipy.optimize import brentq

from .curvature import derivatives
from .errors import BlowUpError, CriticalPointError, DomainError
from .series import RationalSeries, lower_bound_on, w_recurrence

DEFAULT_ORDER = 40
DEFAULT_R0 = 0.1
DEFAULT_T_RANGE = (-8.0, np.log(99.0))  # r from about 3.4e-4 from the horizon down to 0.01


def t_of_r(r):
    r = np.asarray(r, dtype=float)
    return np.log((1.0 - r) / r)


def r_of_t(t):
    return 1.0 / (1.0 + np.exp(np.asarray(t, dtype=float)))


def coupling(t):
    """``e^t (1 + e^t)^{-4}`` evaluated without overflow."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-np.abs(t))
    return np.where(t > 0, e ** 3, e) / (1.0 + e) ** 4


def rhs(t, y):
    return np.array([y[1], 2.25 * coupling(t) * y[0] ** 3])


@dataclass(frozen=True)
class ODESolution:
    t: np.ndarray
    v: np.ndarray
    vt: np.ndarray
    order: int
    r0: float
    series: RationalSeries
    dense: object = field(repr=False, default=None)

    @property
    def r(self) -> np.ndarray:
        return r_of_t(self.t)

    def at_t(self, t):
        """``(v, v_t)`` from the dense interpolant."""
        return self.dense(np.asarray(t, dtype=float))

    def v_of_r(self, r):
        """``v`` by the series below the seed radius and the solution above."""
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        lo = r <= self.r0
        out[lo] = self.series.v(r[lo])
        if np.any(~lo):
            out[~lo] = self.at_t(t_of_r(r[~lo]))[0]
        return out

    def w_of_r(self, r):
        r = np.asarray(r, dtype=float)
        return r ** 1.5 * self.v_of_r(r)


def series_seed(series: RationalSeries, r0: float):
    """``(v, v_t)`` at ``t(r0)`` from the truncated series."""
    W, dW = series(r0), series(r0, 1)
    v = r0 ** -1.5 * W
    v_r = -1.5 * r0 ** -2.5 * W + r0 ** -1.5 * dW
    return float(v), float(-r0 * (1.0 - r0) * v_r)


def integrate_v(order: int = DEFAULT_ORDER, r0: float = DEFAULT_R0,
                t_range=DEFAULT_T_RANGE, rtol: float = 1e-13, max_step: float = np.inf,
                points: int = 2001, series: RationalSeries | None = None) -> ODESolution:
    """Seed at ``r0`` from the series and integrate both ways in ``t``."""
    if r0 > 0.2:
        raise DomainError("seed radius must be <= 0.2")
    if order < 20:
        raise DomainError("series order must be >= 20")
    series = w_recurrence(order) if series is None else series
    t0 = float(t_of_r(r0))
    y0 = series_seed(series, r0)
    lo, hi = t_range
    pieces = []
    for end in (lo, hi):
        if end == t0:
            continue

        def too_big(t, y):
            return 1e12 - abs(y[0])

        too_big.terminal = True
        sol = solve_ivp(rhs, (t0, end), y0, method="DOP853", rtol=rtol, atol=1e-14,
                        max_step=max_step, dense_output=True, events=too_big)
        if sol.status != 0:
            where = float(sol.t[-1])
            raise BlowUpError(f"solution blew up near t = {where:.6g} "
                              f"(r = {float(r_of_t(where)):.6g})", where)
        pieces.append((min(t0, end), max(t0, end), sol.sol))

    def dense(t):
        t = np.asarray(t, dtype=float)
        out = np.empty((2,) + t.shape)
        for a, b, f in pieces:
            m = (t >= a) & (t <= b)
            if np.any(m):
                out[:, m] = f(t[m])
        return out

    grid = np.linspace(lo, hi, points)
    v, vt = dense(grid)
    if np.any(v <= 0):
        raise BlowUpError("v lost positivity", float(grid[np.argmax(v <= 0)]))
    return ODESolution(grid, v, vt, order, r0, series, dense)


def residual(sol: ODESolution) -> float:
    """Max relative residual of ``v_tt = (9/4) e^t (1+e^t)^{-4} v^3`` with
    ``v_tt`` differentiated from the interpolant."""
    t = sol.t[5:-5]
    _, d1, _ = derivatives(lambda s: sol.at_t(s)[1], t, h=1e-3)
    rhs_v = 2.25 * coupling(t) * sol.at_t(t)[0] ** 3
    return float(np.max(np.abs(d1 - rhs_v) / np.maximum(np.abs(rhs_v), 1e-300)))


def convex(sol: ODESolution) -> bool:
    return bool(np.all(2.25 * coupling(sol.t) * sol.v ** 3 > 0))


def find_rho(sol: ODESolution, xtol: float = 1e-14) -> float:
    """The unique critical radius of ``v`` in ``(0, 1)``; ``xtol`` is in ``t``
    (the error in ``r`` is at most a quarter of it)."""
    s = np.sign(sol.vt)
    changes = np.flatnonzero(s[1:] * s[:-1] < 0)
    if changes.size == 0:
        raise CriticalPointError("v' has no sign change; extend the t-range", 0)
    if changes.size > 1:
        raise CriticalPointError("v' changes sign more than once", int(changes.size))
    i = changes[0]
    tr = brentq(lambda t: float(sol.at_t(t)[1]), sol.t[i], sol.t[i + 1], xtol=xtol)
    return float(r_of_t(tr))


def vtilde(r):
    r = np.asarray(r, dtype=float)
    return r ** -1.5 * (1.0 - r) ** -0.5 * (1.0 - 2.0 * r / 3.0)


def vtilde_prime(r):
    """Derivative of ``vtilde``; its sign is that of ``-(4 r^2 - 14 r + 9)``."""
    r = np.asarray(r, dtype=float)
    return -(4 * r * r - 14 * r + 9) / (6.0 * r ** 2.5 * (1.0 - r) ** 1.5)


RHO_TILDE = (7.0 - np.sqrt(13.0)) / 4.0


@dataclass(frozen=True)
class VtildeReport:
    rho_tilde: float
    rho_tilde_closed: float
    sup_rel_dev: float
    l2_rel_dev: float
    leading_ratio: float


def vtilde_compare(sol: ODESolution, r_lo: float = 0.1, r_hi: float = 0.9) -> VtildeReport:
    rt = brentq(vtilde_prime, 0.5, 0.99, xtol=1e-15)
    r = np.linspace(r_lo, r_hi, 801)
    v = sol.v_of_r(r)
    dev = np.abs(vtilde(r) - v) / v
    l2 = float(np.sqrt(trapezoid(dev ** 2, r) / (r_hi - r_lo)))
    lead = float(vtilde(1e-8) * 1e-12)
    return VtildeReport(float(rt), RHO_TILDE, float(dev.max()), l2, lead)


# deformation ---------------------------------------------------------------


@dataclass(frozen=True)
class Deformation:
    rho: float
    v_rho: float
    w_rho: float
    Lam: float
    Rbar: float               # 6 Lambda in internal units
    Rbar_closed: float        # 108 m^2 rho^-3 w(rho)^2
    Rbar_physical: float      # 27 v(rho)^2 (2m)^-2
    Rbar_laplace_beltrami: float  # -3 Lambda (2m)^-2 with the geometric Laplacian
    second_derivative_jump: float
    slopes: tuple             # V'(rho-) , V'(rho+)
    m: float
    profile: object = field(repr=False, default=None)


def V_deformation(sol: ODESolution, m: float = 0.5, rho: float | None = None) -> Deformation:
    """``V = v / v(rho)`` inside ``rho`` and ``1`` outside, in physical radius."""
    rho = find_rho(sol) if rho is None else rho
    tr = float(t_of_r(rho))
    v_rho, vt_rho = sol.at_t(tr)
    w_rho = rho ** 1.5 * v_rho
    Lam = 4.5 * v_rho ** 2
    vtt = 2.25 * float(coupling(tr)) * v_rho ** 3
    t_r = -1.0 / (rho * (1.0 - rho))
    v_rr = vtt * t_r ** 2 + vt_rho * (1.0 - 2.0 * rho) / (rho * (1.0 - rho)) ** 2
    scale = 2.0 * m

    def V(r_phys):
        r = np.asarray(r_phys, dtype=float) / scale
        out = np.ones_like(r)
        inside = r < rho
        if np.any(inside):
            out[inside] = sol.v_of_r(r[inside]) / v_rho
        return out

    left = float(vt_rho * t_r / v_rho / scale)
    return Deformation(rho, float(v_rho), float(w_rho), float(Lam), 6.0 * Lam,
                       108.0 * m * m * rho ** -3 * w_rho ** 2,
                       27.0 * v_rho ** 2 / scale ** 2, -3.0 * Lam / scale ** 2,
                       float(v_rr / v_rho / scale ** 2), (left, 0.0), m, V)


@dataclass(frozen=True)
class LogPoleReport:
    eps: np.ndarray
    tau: np.ndarray
    slope: float
    predicted: float
    rel_err: float


def proper_time_log_slope(sol: ODESolution, m: float = 0.5, b: float = 1.0,
                          eps=(1e-4, 1e-5, 1e-6, 1e-7, 1e-8)) -> LogPoleReport:
    """Proper time from ``eps`` to ``rho`` along a radial geodesic of ``V^2 g``.

    Integrated in ``log r``; the slope of ``tau`` against ``log(1/eps)`` is
    compared with ``(2m)^{-1/2} rho_phys^{3/2} / w(rho)`` (``w(0) = 1``).
    """
    d = V_deformation(sol, m)
    V = d.profile
    rho_p = 2.0 * m * d.rho

    def integrand(s):
        r = np.exp(s)
        Vv = V(np.array([r]))[0]
        return r * Vv * Vv / np.sqrt(b * b + (2 * m / r - 1) * Vv * Vv)

    eps = np.asarray(eps, dtype=float) * 2.0 * m
    bounds = np.concatenate([[rho_p], eps])
    pieces = [quad(integrand, np.log(lo), np.log(hi), epsabs=0, epsrel=1e-11, limit=200)[0]
              for hi, lo in zip(bounds[:-1], bounds[1:])]
    tau = np.cumsum(pieces)
    x = np.log(1.0 / eps)
    slope = float(np.polyfit(x[1:], tau[1:], 1)[0])
    pred = (2 * m) ** -0.5 * rho_p ** 1.5 / d.w_rho
    return LogPoleReport(eps, tau, slope, pred, abs(slope - pred) / pred)


# full equation ----------------------------------------------------------------


def u_scaled(sol_values, Lam: float):
    """``u = 3 (2 Lambda)^{-1/2} v``."""
    return (3.0 / np.sqrt(2.0 * Lam)) * np.asarray(sol_values)


@dataclass(frozen=True)
class FullCheck:
    Lam: float
    residual_ode: float
    residual_series: float
    prefactor: float


def full_solution_check(Lam: float, sol: ODESolution,
                        series: RationalSeries | None = None) -> FullCheck:
    """Relative residual of ``Delta u + Lambda u^3`` with ``Delta = 2 r^-2 (r (r-1) u')'``.

    Since ``r (r-1) u' = u_t``, ``Delta u = -2 u_tt / (r^3 (1 - r))`` on the
    integrated part.  On ``[0.02, r0]`` the (possibly different) series is
    differentiated in ``r`` directly.
    """
    if Lam <= 0:
        raise ValueError("Lambda must be positive")
    c = 3.0 / np.sqrt(2.0 * Lam)
    t = sol.t[5:-5]
    r = r_of_t(t)
    u = c * sol.at_t(t)[0]
    _, u_tt, _ = derivatives(lambda s: c * sol.at_t(s)[1], t, h=1e-3)
    lap = -2.0 * u_tt / (r ** 3 * (1.0 - r))
    res_ode = float(np.max(np.abs(lap + Lam * u ** 3) / (Lam * np.abs(u) ** 3)))

    series = sol.series if series is None else series
    rr = np.linspace(0.02, sol.r0, 200)
    W, W1, W2 = series(rr), series(rr, 1), series(rr, 2)
    v = rr ** -1.5 * W
    v1 = -1.5 * rr ** -2.5 * W + rr ** -1.5 * W1
    v2 = 3.75 * rr ** -3.5 * W - 3.0 * rr ** -2.5 * W1 + rr ** -1.5 * W2
    qq, dq = rr * (rr - 1.0), 2 * rr - 1.0
    lap_s = c * 2.0 * (dq * v1 + qq * v2) / rr ** 2
    us = c * v
    res_series = float(np.max(np.abs(lap_s + Lam * us ** 3) / (Lam * np.abs(us) ** 3)))
    return FullCheck(Lam, res_ode, res_series, c)


@dataclass(frozen=True)
class NonvanishingReport:
    series_bound: float
    series_interval: tuple
    min_w_solution: float
    holds: bool


def w_nonvanishing(sol: ODESolution, r_split: float = 0.3, r_max: float = 0.99):
    """Exact lower bound for the truncated series on ``[0, r_split]`` plus the
    minimum of ``w = r^{3/2} v`` from the solution on ``[r_split, r_max]``."""
    bound = float(lower_bound_on(sol.series, Fraction(r_split).limit_denominator(1000)))
    r = np.linspace(r_split, r_max, 4001)
    wmin = float(np.min(sol.w_of_r(r)))
    return NonvanishingReport(bound, (0.0, r_split), wmin, bound > 0 and wmin > 0)
