"""Closed Friedman model: expansion factor, conformal time, aeon volume.

The expansion factor obeys ``(dR/dt)^2 = (R0 - R)/R`` with ``R(0) = 0``.  In
conformal time ``dtau = dt / R`` this becomes ``(dR/dtau)^2 = (R0 - R) R``,
which is regular at the bang; we integrate the equivalent second-order system

    R'' = R0/2 - R,   t' = R,   R(0) = R'(0) = t(0) = 0

over ``tau in [0, pi]`` (bang to maximal expansion) and recover ``t(tau)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import make_interp_spline
from scipy.special import beta

from .grids import boole_weights

VOL_S3 = 2.0 * np.pi ** 2  # unit three-sphere

PRINTED_VOLUME_COEFF = 1.25 * np.pi ** 3  # printed closed form, times R0^4
# 2 Vol(S^3) R0^4 B(9/2, 1/2): the t-integral of R^3 with dt = R0 w^{1/2} (1-w)^{-1/2} dw
DERIVED_VOLUME_COEFF = 35.0 * np.pi ** 3 / 32.0


@dataclass(frozen=True)
class ExpansionCurve:
    R0: float
    tau: np.ndarray
    R: np.ndarray
    dR: np.ndarray
    t: np.ndarray

    @property
    def t0(self) -> float:
        return float(self.t[-1])


def _check_r0(R0):
    if not R0 > 0:
        raise ValueError("R0 must be positive")


def solve_expansion(R0: float = 1.0, N: int = 1025, rtol=1e-13) -> ExpansionCurve:
    """Expansion curve on a uniform conformal-time grid of ``N`` points."""
    _check_r0(R0)
    if N < 64:
        raise ValueError("needs N >= 64")
    if (N - 1) % 4:
        N = 4 * ((N - 1) // 4 + 1) + 1
    tau = np.linspace(0.0, np.pi, N)

    def rhs(_, y):
        return [y[1], 0.5 * R0 - y[0], y[0]]

    sol = solve_ivp(rhs, (0.0, np.pi), [0.0, 0.0, 0.0], method="DOP853",
                    t_eval=tau, rtol=rtol, atol=1e-15 * max(1.0, R0 ** 2))
    if not sol.success:
        raise RuntimeError(f"expansion solve failed: {sol.message}")
    R, dR, t = sol.y
    return ExpansionCurve(R0, tau, R, dR, t)


def analytic_R(R0, tau):
    return R0 * np.sin(0.5 * np.asarray(tau)) ** 2


def t0_closed_form(R0):
    return 0.5 * np.pi * R0


def t0_from_t_form(R0: float) -> float:
    """``int_0^{R0} (R/(R0-R))^{1/2} dR`` with the endpoint weight handled exactly."""
    val, _ = quad(lambda R: np.sqrt(R), 0.0, R0, weight="alg", wvar=(0.0, -0.5),
                  epsabs=0, epsrel=1e-12)
    return val


def beta_check() -> float:
    """``int_0^1 w^{5/2} (1-w)^{-1/2} dw``; equals ``5 pi / 16``."""
    val, _ = quad(lambda w: w ** 2.5, 0.0, 1.0, weight="alg", wvar=(0.0, -0.5),
                  epsabs=0, epsrel=1e-12)
    return val


def volume_beta_integral() -> float:
    """``int_0^1 w^{7/2} (1-w)^{-1/2} dw``; this is the integral of ``R^3 dt``
    per ``R0^4``."""
    val, _ = quad(lambda w: w ** 3.5, 0.0, 1.0, weight="alg", wvar=(0.0, -0.5),
                  epsabs=0, epsrel=1e-12)
    return val


@dataclass(frozen=True)
class VolumeReport:
    R0: float
    t0: float
    volume: float
    closed_form: float
    rel_gap: float
    derived_closed_form: float
    derived_rel_gap: float
    beta_value: float


def aeon_volume(R0: float = 1.0, N: int = 1025) -> VolumeReport:
    """``2 Vol(S^3) int_0^{t0} R^3 dt`` from the solved curve.

    With ``dt = R dtau`` the integrand becomes ``R^4`` in conformal time,
    which is smooth, and the composite Boole rule applies.
    """
    c = solve_expansion(R0, N)
    w = boole_weights(c.tau.size, c.tau[1] - c.tau[0])
    vol = 2.0 * VOL_S3 * float(np.sum(w * c.R ** 4))
    printed = PRINTED_VOLUME_COEFF * R0 ** 4
    derived = DERIVED_VOLUME_COEFF * R0 ** 4
    return VolumeReport(R0, c.t0, vol, printed, abs(vol - printed) / printed, derived,
                        abs(vol - derived) / derived, beta_check())


def derived_volume_by_beta(R0: float = 1.0) -> float:
    return 2.0 * VOL_S3 * R0 ** 4 * beta(4.5, 0.5)


@dataclass(frozen=True)
class ProfileCheck:
    chain_rule_residual: float
    dilaton_endpoints: tuple
    dilaton_slopes: tuple
    dilaton_mid: float
    ode_residual: float
    analytic_gap: float


def conformal_profile_check(R0: float = 1.0, N: int = 1025) -> ProfileCheck:
    c = solve_expansion(R0, N)
    # dt/dtau from an interpolant of the recovered t(tau), compared with R
    spl = make_interp_spline(c.tau, c.t, k=7)
    inner = slice(8, -8)
    chain = np.max(np.abs(spl.derivative()(c.tau)[inner] - c.R[inner])) / R0

    def dil(tau):
        return np.sin(0.5 * tau) ** 2

    def ddil(tau):
        return 0.5 * np.sin(tau)

    ends = (dil(0.0), dil(2 * np.pi))
    slopes = (ddil(0.0), ddil(2 * np.pi))
    Ra = analytic_R(R0, c.tau)
    dRa = 0.5 * R0 * np.sin(c.tau)
    ode_res = float(np.max(np.abs(dRa ** 2 - (R0 - Ra) * Ra))) / R0 ** 2
    gap = float(np.max(np.abs(c.R - Ra))) / R0
    return ProfileCheck(float(chain), ends, slopes, float(dil(np.pi)), ode_res, gap)

