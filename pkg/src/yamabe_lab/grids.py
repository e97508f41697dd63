"""One-dimensional sampling grids with quadrature weights.

Every computation in the package is reduced to a single varying coordinate
(a radius, an angle, or one period of a torus), so a grid is a strictly
increasing set of abscissae together with the weights of a quadrature rule.

Three spacing policies are supported:

``uniform``
    closed interval, composite Simpson rule with one Richardson step
    (equivalently composite Boole), so ``n - 1`` must be divisible by 4;
``periodic``
    one period ``[a, a + L)``, trapezoid rule (spectrally accurate for
    smooth periodic integrands);
``gauss``
    open interval, Gauss-Legendre nodes; used where the endpoints are
    coordinate singularities (poles of a sphere, horizons).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

MIN_POINTS = 8


def boole_weights(n: int, h: float) -> np.ndarray:
    """Weights of composite Simpson on ``n`` points refined by Richardson.

    ``(16 S_h - S_2h) / 15`` is again a linear rule; its weights are the
    composite Boole weights.
    """
    if n < 5 or (n - 1) % 4:
        raise GridError(f"Simpson/Richardson needs n = 4k + 1 points, got {n}")
    fine = np.zeros(n)
    fine[0:-1:2] += 1.0
    fine[1::2] += 4.0
    fine[2::2] += 1.0
    fine *= h / 3.0
    coarse = np.zeros(n)
    coarse_part = np.zeros((n + 1) // 2)
    coarse_part[0:-1:2] += 1.0
    coarse_part[1::2] += 4.0
    coarse_part[2::2] += 1.0
    coarse[::2] = coarse_part * (2.0 * h) / 3.0
    return (16.0 * fine - coarse) / 15.0


@dataclass(frozen=True)
class RadialGrid:
    points: np.ndarray
    weights: np.ndarray
    spacing: str = "uniform"
    period: float | None = None
    singular: tuple = ()
    tags: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < MIN_POINTS:
            raise GridError(f"grid needs at least {MIN_POINTS} points")
        if np.any(np.diff(pts) <= 0):
            raise GridError("grid points must be strictly increasing")
        for s in self.singular:
            if np.any(np.isclose(pts, s, rtol=0, atol=1e-14)):
                raise GridError(f"grid contains the singular radius {s}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    # constructors ---------------------------------------------------------

    @classmethod
    def uniform(cls, a, b, n=129, singular=()):
        n = int(n)
        pts = np.linspace(a, b, n)
        return cls(pts, boole_weights(n, (b - a) / (n - 1)), "uniform",
                   singular=tuple(singular), tags=("closed",))

    @classmethod
    def periodic(cls, a, length, n=64):
        n = int(n)
        h = length / n
        pts = a + h * np.arange(n)
        return cls(pts, np.full(n, h), "periodic", period=float(length),
                   tags=("periodic",))

    @classmethod
    def gauss(cls, a, b, n=64, singular=()):
        x, w = np.polynomial.legendre.leggauss(int(n))
        half = 0.5 * (b - a)
        return cls(a + half * (x + 1.0), half * w, "gauss",
                   singular=tuple(singular), tags=("open",))

    # ---------------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def is_periodic(self) -> bool:
        return self.spacing == "periodic"

    @property
    def bounds(self):
        if self.is_periodic:
            return self.points[0], self.points[0] + self.period
        if self.spacing == "gauss":
            # nodes are interior; recover the interval from the weights
            half = 0.5 * self.weights.sum()
            mid = 0.5 * (self.points[0] + self.points[-1])
            return mid - half, mid + half
        return self.points[0], self.points[-1]

    def refine(self) -> "RadialGrid":
        a, b = self.bounds
        if self.is_periodic:
            return RadialGrid.periodic(a, self.period, 2 * self.n)
        if self.spacing == "gauss":
            return RadialGrid.gauss(a, b, 2 * self.n, self.singular)
        return RadialGrid.uniform(a, b, 2 * self.n - 1, self.singular)

    def integrate(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.n:
            raise GridError("sample count does not match the grid")
        return float(np.sum(values * self.weights, axis=-1))

    def same_as(self, other: "RadialGrid") -> bool:
        return (self.spacing == other.spacing and self.n == other.n
                and np.array_equal(self.points, other.points))


def integrate_with_refinement(sample, grid: RadialGrid, rtol=1e-8, max_levels=6):
    """Integrate ``sample(grid)`` and refine until two levels agree.

    Returns ``(value, levels_used, converged)``.
    """
    prev = grid.integrate(sample(grid))
    for level in range(1, max_levels + 1):
        grid = grid.refine()
        cur = grid.integrate(sample(grid))
        if abs(cur - prev) <= rtol * max(1.0, abs(cur)):
            return cur, level, True
        prev = cur
    return prev, max_levels, False
