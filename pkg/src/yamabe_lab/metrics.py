"""Diagonal metrics sampled along one coordinate axis.

A :class:`DiagonalMetric` stores the diagonal components as a vectorized
callable ``components(X)`` where ``X`` has shape ``(n, ...)``.  Only the
coordinate ``axis`` varies along the sampling grid; the others are frozen at
``base``.  Derivatives in every direction are available by evaluating the
callable off the sampling line, so curvature can be computed for metrics that
depend on several coordinates (spheres in polar coordinates, for instance).

``measure(x)`` is the volume element already integrated over the transverse
coordinates, so ``grid.integrate(f * measure)`` is ``int f dvol`` for
functions of the axis coordinate alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import sympy as sp
from scipy.special import gamma

from .errors import DiscriminantError, NondegeneracyError
from .grids import RadialGrid


def sphere_volume(k: int, a: float = 1.0) -> float:
    """Volume of the round ``k``-sphere of radius ``a``."""
    return 2.0 * np.pi ** ((k + 1) / 2) / gamma((k + 1) / 2) * a ** k


@dataclass(frozen=True)
class DiagonalMetric:
    n: int
    components: Callable
    grid: RadialGrid
    axis: int = 0
    base: tuple = ()
    transverse_volume: float = 1.0
    symmetry: str = "none"
    measure_fn: Callable | None = None
    symbolic: tuple | None = None
    name: str = "metric"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        base = tuple(self.base) if self.base else (0.0,) * self.n
        if len(base) != self.n:
            raise ValueError("base point has the wrong dimension")
        object.__setattr__(self, "base", base)

    # evaluation -------------------------------------------------------------

    def coords(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        X = np.empty((self.n,) + x.shape)
        for i, b in enumerate(self.base):
            X[i] = b
        X[self.axis] = x
        return X

    def at(self, X) -> np.ndarray:
        return np.asarray(self.components(np.asarray(X, dtype=float)), dtype=float)

    def diag(self, x=None) -> np.ndarray:
        """Components on the sampling line, shape ``(n, N)``."""
        x = self.grid.points if x is None else x
        return self.at(self.coords(x))

    def det(self, x=None) -> np.ndarray:
        return np.prod(self.diag(x), axis=0)

    def measure(self, x=None) -> np.ndarray:
        x = self.grid.points if x is None else np.asarray(x, dtype=float)
        if self.measure_fn is not None:
            return np.asarray(self.measure_fn(x), dtype=float)
        return np.sqrt(np.abs(self.det(x))) * self.transverse_volume

    def signature(self, x=None) -> int:
        d = self.diag(x)
        if np.any(d == 0):
            idx = np.argwhere(d == 0)[0]
            raise NondegeneracyError(f"component {idx[0]} vanishes at sample {idx[1]}")
        pos = np.sum(d > 0, axis=0)
        sig = 2 * pos - self.n
        if np.any(sig != sig[0]):
            raise NondegeneracyError("signature changes along the grid")
        return int(sig[0])

    def integrate(self, f) -> float:
        """``int f dvol`` for samples ``f`` of an axis-only function."""
        return self.grid.integrate(np.asarray(f) * self.measure())

    # transformations ----------------------------------------------------------

    def with_grid(self, grid: RadialGrid) -> "DiagonalMetric":
        return replace(self, grid=grid)

    def refine(self) -> "DiagonalMetric":
        return self.with_grid(self.grid.refine())

    def conformal(self, u: Callable, power: float | None = None) -> "DiagonalMetric":
        """Metric ``u**power * g`` with ``u`` a function of the axis coordinate.

        The default power is ``4/(n-2)``.
        """
        n, axis = self.n, self.axis
        p = 4.0 / (n - 2) if power is None else float(power)
        comp, meas = self.components, self.measure

        def components(X):
            return np.abs(u(X[axis])) ** p * comp(X)

        def measure_fn(x):
            return np.abs(u(x)) ** (p * n / 2.0) * meas(x)

        sym = None
        if self.symbolic is not None and hasattr(u, "sympy"):
            xs, exprs = self.symbolic
            us = u.sympy(xs[axis])
            sym = (xs, [us ** sp.nsimplify(p) * e for e in exprs])
        return replace(self, components=components, measure_fn=measure_fn,
                       symbolic=sym, name=f"conformal({self.name})")

    def scaled(self, c: float) -> "DiagonalMetric":
        return self.conformal(lambda x: np.full_like(np.asarray(x, float), c), power=1.0)


# factories ---------------------------------------------------------------


def flat(n: int = 4, grid: RadialGrid | None = None, lorentzian=False) -> DiagonalMetric:
    grid = RadialGrid.uniform(0.0, 1.0, 129) if grid is None else grid
    signs = np.ones(n)
    if lorentzian:
        signs[1:] = -1.0

    def components(X):
        return signs.reshape((n,) + (1,) * (X.ndim - 1)) * np.ones_like(X)

    xs = sp.symbols(f"x0:{n}")
    return DiagonalMetric(n, components, grid, symmetry="flat",
                          symbolic=(xs, [sp.Integer(int(s)) for s in signs]),
                          name="minkowski" if lorentzian else "euclidean")


def minkowski(grid: RadialGrid | None = None) -> DiagonalMetric:
    return flat(4, grid, lorentzian=True)


def round_sphere(n: int = 4, a: float = 1.0, points: int = 48) -> DiagonalMetric:
    """Round ``S^n`` of radius ``a`` in polar angles, sampled along chi_1.

    The other angles sit at ``pi/2``.  The measure integrates them out, so
    integrals of functions of chi_1 are exact up to the Gauss rule.
    """
    grid = RadialGrid.gauss(0.0, np.pi, points, singular=(0.0, np.pi))

    def components(X):
        out = np.empty_like(X)
        acc = np.full(X.shape[1:], a * a)
        for i in range(n):
            out[i] = acc
            acc = acc * np.sin(X[i]) ** 2
        return out

    def measure_fn(x):
        return sphere_volume(n - 1) * a ** n * np.sin(x) ** (n - 1)

    xs = sp.symbols(f"chi1:{n + 1}")
    exprs, acc = [], sp.Integer(1)
    for i in range(n):
        exprs.append(sp.nsimplify(a) ** 2 * acc)
        acc = acc * sp.sin(xs[i]) ** 2
    return DiagonalMetric(n, components, grid, axis=0,
                          base=(0.0,) + (np.pi / 2,) * (n - 1),
                          symmetry="round sphere", measure_fn=measure_fn,
                          symbolic=(xs, exprs), name=f"S^{n}(a={a})",
                          meta={"radius": a})


def torus(n: int = 4, L: float = 2 * np.pi, points: int = 64,
          profile: Callable | None = None) -> DiagonalMetric:
    """Flat torus of side ``L``; ``profile`` rescales every component by a
    periodic function of ``x_0`` when given."""
    grid = RadialGrid.periodic(0.0, L, points)

    def components(X):
        c = np.ones_like(X)
        if profile is not None:
            c = c * profile(X[0])
        return c

    xs = sp.symbols(f"x0:{n}")
    return DiagonalMetric(n, components, grid, axis=0,
                          transverse_volume=L ** (n - 1), symmetry="torus",
                          symbolic=(xs, [sp.Integer(1)] * n),
                          name=f"T^{n}", meta={"L": L})


@dataclass(frozen=True)
class RNParams:
    m: float
    e: float = 0.0

    def __post_init__(self):
        if self.m <= 0:
            raise DiscriminantError("mass parameter must be positive")
        if self.e * self.e >= self.m * self.m:
            raise DiscriminantError("needs m^2 - e^2 > 0")

    @property
    def D(self) -> float:
        return float(np.sqrt(self.m * self.m - self.e * self.e))

    @property
    def horizons(self):
        return self.m - self.D, self.m + self.D

    def q(self, r):
        r = np.asarray(r, dtype=float)
        return r * r - 2.0 * self.m * r + self.e * self.e

    def dq(self, r):
        return 2.0 * np.asarray(r, dtype=float) - 2.0 * self.m


def reissner_nordstrom(params: RNParams, grid: RadialGrid | None = None,
                       theta: float = np.pi / 2) -> DiagonalMetric:
    """``diag(q/r^2, -r^2/q, -r^2, -r^2 sin^2 theta)`` in (t, r, theta, phi),
    sampled along ``r``.  The measure is ``4 pi r^2`` per unit coordinate time.
    """
    if grid is None:
        lo, hi = params.horizons
        pad = 0.05 * (hi - lo)
        grid = RadialGrid.uniform(lo + pad, hi - pad, 129, singular=(lo, hi))

    def components(X):
        r, th = X[1], X[2]
        q = params.q(r)
        return np.stack([q / r ** 2, -(r ** 2) / q, -(r ** 2),
                         -(r ** 2) * np.sin(th) ** 2])

    t, r, th, ph = sp.symbols("t r theta phi")
    m, e = sp.nsimplify(params.m), sp.nsimplify(params.e)
    q = r ** 2 - 2 * m * r + e ** 2
    exprs = [q / r ** 2, -r ** 2 / q, -r ** 2, -r ** 2 * sp.sin(th) ** 2]
    return DiagonalMetric(4, components, grid, axis=1, base=(0.0, 1.0, theta, 0.0),
                          symmetry="static spherical",
                          measure_fn=lambda x: 4.0 * np.pi * np.asarray(x) ** 2,
                          symbolic=((t, r, th, ph), exprs),
                          name=f"RN(m={params.m}, e={params.e})",
                          meta={"params": params, "poles": (0.0,) + tuple(params.horizons)})


def schwarzschild(m: float, grid: RadialGrid | None = None) -> DiagonalMetric:
    return reissner_nordstrom(RNParams(m, 0.0), grid)


def friedman_metric(R: Callable, grid: RadialGrid, x=(0.0, 0.0, 0.0)) -> DiagonalMetric:
    """``diag(1, -R^2 A^2, -R^2 A^2, -R^2 A^2)`` with ``A = (1 + r^2/4)^-1``,
    sampled along ``t`` at spatial point ``x``.  The spatial slices are unit
    3-spheres, hence the transverse volume ``2 pi^2``.
    """

    def components(X):
        t = X[0]
        A = 1.0 / (1.0 + 0.25 * (X[1] ** 2 + X[2] ** 2 + X[3] ** 2))
        s = -(R(t) * A) ** 2
        return np.stack([np.ones_like(t), s, s, s])

    return DiagonalMetric(4, components, grid, axis=0, base=(0.0,) + tuple(x),
                          symmetry="cosmological",
                          measure_fn=lambda t: 2.0 * np.pi ** 2 * np.abs(R(t)) ** 3,
                          name="friedman")
