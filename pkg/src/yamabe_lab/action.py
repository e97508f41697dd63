"""Yamabe functional, Einstein-Hilbert action and scale-invariant norms.

Functions of the axis coordinate are passed as callables so they can be
differentiated; integrals use the metric's reduced volume measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants as sc

from .curvature import gradient_norm2, scalar_curvature
from .errors import DivergenceError, NondegeneracyError
from .metrics import DiagonalMetric

# CODATA 2018 values as shipped with scipy
CONSTANTS = {
    "G": (sc.G, "m^3 kg^-1 s^-2"),
    "h": (sc.h, "J s"),
    "hbar": (sc.hbar, "J s"),
    "c": (sc.c, "m s^-1"),
}

# (m, kg, s) exponents
_DIMS = {"G": (3, -1, -2), "h": (2, 1, -1), "c": (1, 0, -1)}

# Overall constant between hbar^-1 E and Y[g, gamma].  With kappa = 8 pi G and
# hbar = h / 2 pi both legs equal int R / (8 G h); frozen by regression test.
DIAGRAM_CONSTANT = 1.0


def _weight_to_function(metric: DiagonalMetric, phi, s: float):
    """``f = phi / (sgn(det g) |det g|^{s/2n})`` as a callable of the axis."""
    n = metric.n

    def f(x):
        det = metric.det(x)
        if np.any(det == 0):
            raise NondegeneracyError("metric degenerate on the grid")
        return np.asarray(phi(x), dtype=float) / (np.sign(det) * np.abs(det) ** (s / (2.0 * n)))

    return f


@dataclass(frozen=True)
class ActionReport:
    value: float
    integrand: np.ndarray
    constants: dict = field(default_factory=dict)


def conformal_energy(metric: DiagonalMetric, f) -> ActionReport:
    """``1/2 int [|df|^2 + (n-2)/(4(n-1)) R f^2] dvol`` for a function ``f``."""
    n = metric.n
    x = metric.grid.points
    fv = np.asarray(f(x), dtype=float)
    R = scalar_curvature(metric).scalar
    dens = 0.5 * (gradient_norm2(metric, f) + 0.25 * (n - 2) / (n - 1) * R * fv ** 2)
    return ActionReport(metric.integrate(dens), dens)


def yamabe_functional(metric: DiagonalMetric, phi) -> float:
    """Yamabe's quadratic form evaluated on a weight ``n/2 - 1`` density.

    ``phi`` is a callable of the axis coordinate giving the density in the
    coordinate frame of ``metric``.
    """
    s = metric.n / 2.0 - 1.0
    return conformal_energy(metric, _weight_to_function(metric, phi, s)).value


def gamma_constant(n: int = 4, G: float = sc.G, h: float = sc.h) -> float:
    """The constant function corresponding to the scalar density gamma."""
    return ((n - 2) / (n - 1) * G * h) ** -0.5


@dataclass(frozen=True)
class DiagramReport:
    action_over_hbar: float
    yamabe_at_gamma: float
    rel_gap: float


def einstein_hilbert_equiv(metric: DiagonalMetric, G: float = sc.G,
                           h: float = sc.h) -> DiagramReport:
    """Both legs of the commuting square: ``hbar^-1 E(g)`` and ``Y[g, gamma(g)]``."""
    n = metric.n
    kappa = 8.0 * np.pi * G
    hbar = h / (2.0 * np.pi)
    R = scalar_curvature(metric).scalar
    E = 0.5 / kappa * metric.integrate(R)
    c = gamma_constant(n, G, h)
    s = (n - 2) / 2.0

    def gamma(x):
        d = metric.det(x)
        return c * np.sign(d) * np.abs(d) ** (s / (2.0 * n))

    Y = yamabe_functional(metric, gamma)
    left = DIAGRAM_CONSTANT * E / hbar
    gap = abs(left - Y) / max(1.0, abs(left))
    return DiagramReport(left, Y, gap)


def planck_frequency(G: float = sc.G, h: float = sc.h, c: float = sc.c) -> float:
    """``(3 c^5 / (2 G h))^{1/2}`` in Hz."""
    return float(np.sqrt(3.0 * c ** 5 / (2.0 * G * h)))


def planck_frequency_dimensions():
    """(m, kg, s) exponents of ``c^5 / (G h)``."""
    return tuple(5 * c - g - h for c, g, h in zip(_DIMS["c"], _DIMS["G"], _DIMS["h"]))


def _norm(metric, vals, p):
    return metric.integrate(np.abs(vals) ** p) ** (1.0 / p)


def curvature_norm(metric: DiagonalMetric, p: float | None = None, rtol=1e-6,
                   max_levels=3) -> float:
    """``||R(g)||_{L^p(g)}`` with ``p = n/2`` by default.

    The grid is refined until two successive values agree to ``rtol``;
    otherwise :class:`DivergenceError` is raised.
    """
    p = metric.n / 2.0 if p is None else p
    prev = _norm(metric, scalar_curvature(metric).scalar, p)
    g = metric
    for _ in range(max_levels):
        g = g.refine()
        cur = _norm(g, scalar_curvature(g).scalar, p)
        if abs(cur - prev) <= rtol * max(1.0, abs(cur)):
            return prev
        prev = cur
    raise DivergenceError("curvature norm does not settle under refinement")


def function_norm(metric: DiagonalMetric, f, p: float) -> float:
    return _norm(metric, np.asarray(f(metric.grid.points), dtype=float), p)


@dataclass(frozen=True)
class MachBound:
    lhs: float
    rhs: float
    holds: bool
    f_norm: float


def mach_bound_report(metric: DiagonalMetric, f, rtol=1e-12) -> MachBound:
    """``||R||_{n/2} >= ||R f^2||_1 ||f||_{2n/(n-2)}^{-2}`` for positive ``f``."""
    n = metric.n
    fv = np.asarray(f(metric.grid.points), dtype=float)
    if np.any(fv <= 0):
        raise ValueError("f must be positive")
    R = scalar_curvature(metric).scalar
    lhs = _norm(metric, R, n / 2.0)
    fn = _norm(metric, fv, 2.0 * n / (n - 2))
    rhs = metric.integrate(np.abs(R) * fv ** 2) / fn ** 2
    return MachBound(lhs, rhs, bool(lhs >= rhs * (1 - rtol)), fn)


def cosmological_estimate(lam_bound: float, age: float) -> float:
    """``Lambda * age^2``: curvature times the square root of a hypervolume."""
    if lam_bound < 0 or age <= 0:
        raise ValueError("needs Lambda >= 0 and age > 0")
    return lam_bound * age ** 2
