"""Blow-up of quadratic forms and weighted densities.

A nondegenerate symmetric form ``q`` in dimension ``n`` factors uniquely as
``q = phi**(4/(n-2)) * gbar`` with ``|det gbar| = 1`` and ``phi > 0``.  The
pair ``(gbar, phi)`` is a point of the blow-up; the multiplicative group acts
on pairs by ``u . (g, phi) = (|u|**(4/(n-2)) g, phi / u)`` and the
reconstructed tensor is invariant under that action.

Densities of weight ``s`` are sampled on a :class:`~yamabe_lab.grids.RadialGrid`
whose weights already contain the volume element, so the norm
``||phi||_s = (int |phi|**(n/s))**(s/n)`` is a weighted sum.

Exact arithmetic (sympy) is used whenever the matrix entries are rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
import sympy as sp

from .errors import (GaugeError, GridError, NondegeneracyError,
                     WeightRangeError)
from .grids import RadialGrid

FLOAT_RTOL = 1e-12


def _is_exact(entries) -> bool:
    if isinstance(entries, sp.MatrixBase):
        return all(e.is_rational for e in entries)
    arr = np.asarray(entries, dtype=object)
    return all(isinstance(e, (int, Rational, Fraction, sp.Rational))
               and not isinstance(e, bool) for e in arr.ravel())


def _to_sympy(entries) -> sp.Matrix:
    if isinstance(entries, sp.MatrixBase):
        return sp.Matrix(entries)
    arr = np.asarray(entries, dtype=object)
    return sp.Matrix(arr.shape[0], arr.shape[1],
                     [sp.nsimplify(sp.Rational(str(e)) if isinstance(e, Fraction) else e)
                      for e in arr.ravel()])


@dataclass(frozen=True)
class SymmetricForm:
    """A nondegenerate symmetric bilinear form.

    ``entries`` is a sympy ``Matrix`` when the input was exact, otherwise a
    float ndarray.  ``signature`` is ``n_plus - n_minus``.
    """

    entries: object
    exact: bool

    @classmethod
    def from_entries(cls, entries, exact: bool | None = None) -> "SymmetricForm":
        if exact is None:
            exact = _is_exact(entries)
        if exact:
            m = _to_sympy(entries)
            if m.rows != m.cols:
                raise NondegeneracyError("form must be square")
            if m != m.T:
                raise NondegeneracyError("form is not symmetric")
            if m.det() == 0:
                raise NondegeneracyError("form is degenerate (det = 0)")
            return cls(m, True)
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NondegeneracyError("form must be square")
        if not np.array_equal(a, a.T):
            raise NondegeneracyError("form is not symmetric")
        if np.linalg.det(a) == 0.0:
            raise NondegeneracyError("form is degenerate (det = 0)")
        return cls(a, False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def det(self):
        return self.entries.det() if self.exact else float(np.linalg.det(self.entries))

    @property
    def signature(self) -> int:
        a = np.array(self.entries.evalf(), dtype=float) if self.exact else self.entries
        ev = np.linalg.eigvalsh(a)
        return int(np.sum(ev > 0) - np.sum(ev < 0))

    def as_float(self) -> np.ndarray:
        if self.exact:
            return np.array(self.entries.evalf(30), dtype=float)
        return np.array(self.entries)

    def scaled(self, c) -> "SymmetricForm":
        if self.exact:
            return SymmetricForm(sp.simplify(sp.sympify(c) * self.entries), True)
        return SymmetricForm(float(c) * self.entries, False)

    def equals(self, other: "SymmetricForm", rtol=FLOAT_RTOL) -> bool:
        if self.exact and other.exact:
            return sp.simplify(self.entries - other.entries) == sp.zeros(self.n, self.n)
        a, b = self.as_float(), other.as_float()
        return bool(np.allclose(a, b, rtol=rtol, atol=rtol * np.abs(b).max()))


@dataclass(frozen=True)
class BlowupPoint:
    unimodular: SymmetricForm
    density: object

    def density_float(self) -> float:
        return float(self.density)


def _check_dim(n: int):
    if n < 3:
        raise WeightRangeError("the blow-up exponent 4/(n-2) needs n >= 3")


def decompose_form(q: SymmetricForm, n: int | None = None) -> BlowupPoint:
    """Split ``q`` into a unimodular form and a weight ``n/2 - 1`` density."""
    if not isinstance(q, SymmetricForm):
        q = SymmetricForm.from_entries(q)
    n = q.n if n is None else n
    _check_dim(n)
    if q.exact:
        d = sp.Abs(q.det())
        gbar = sp.simplify(d ** sp.Rational(-1, n) * q.entries)
        phi = sp.simplify(d ** sp.Rational(n - 2, 4 * n))
        return BlowupPoint(SymmetricForm(gbar, True), phi)
    d = abs(q.det())
    return BlowupPoint(SymmetricForm(d ** (-1.0 / n) * q.entries, False),
                       d ** ((n - 2) / (4.0 * n)))


def reconstruct(g: SymmetricForm, phi, n: int | None = None) -> SymmetricForm:
    """Return ``|phi|**(4/(n-2)) * g``."""
    n = g.n if n is None else n
    _check_dim(n)
    if g.exact and isinstance(phi, (sp.Basic, int, Fraction)):
        return SymmetricForm(sp.simplify(sp.Abs(sp.sympify(phi)) ** sp.Rational(4, n - 2)
                                         * g.entries), True)
    return SymmetricForm(abs(float(phi)) ** (4.0 / (n - 2)) * g.as_float(), False)


def gauge_act(u, g: SymmetricForm, phi, n: int | None = None):
    """Act by a nonvanishing scalar: ``(|u|**(4/(n-2)) g, phi / u)``."""
    n = g.n if n is None else n
    _check_dim(n)
    if u == 0:
        raise GaugeError("gauge parameter must be nonzero")
    if g.exact and isinstance(u, (int, Fraction, sp.Rational)) and isinstance(
            phi, (sp.Basic, int, Fraction)):
        uu = sp.sympify(u)
        return (SymmetricForm(sp.simplify(sp.Abs(uu) ** sp.Rational(4, n - 2) * g.entries),
                              True), sp.simplify(sp.sympify(phi) / uu))
    u = float(u)
    return (SymmetricForm(abs(u) ** (4.0 / (n - 2)) * g.as_float(), False),
            float(phi) / u)


def same_point(a: BlowupPoint, b: BlowupPoint, rtol=FLOAT_RTOL) -> bool:
    if not a.unimodular.equals(b.unimodular, rtol):
        return False
    if a.unimodular.exact and b.unimodular.exact:
        return sp.simplify(sp.sympify(a.density) - sp.sympify(b.density)) == 0
    return bool(np.isclose(float(a.density), float(b.density), rtol=rtol, atol=0))


# densities on grids ---------------------------------------------------------


@dataclass(frozen=True)
class DensityField:
    """Samples of a weight-``s`` density in dimension ``n``.

    The grid weights are the volume weights; the weight ``s`` is fixed at
    construction.
    """

    weight: float
    samples: np.ndarray
    grid: RadialGrid
    n: int = 4

    def __post_init__(self):
        smp = np.asarray(self.samples, dtype=float)
        if smp.shape != (self.grid.n,):
            raise GridError("samples must have one value per grid point")
        if np.any(self.grid.weights <= 0):
            raise GridError("volume weights must be positive")
        object.__setattr__(self, "samples", smp)

    def scaled(self, c: float) -> "DensityField":
        return DensityField(self.weight, c * self.samples, self.grid, self.n)


def density_norm(phi: DensityField) -> float:
    """``(int |phi|**(n/s))**(s/n)``; ``s = 0`` gives the max norm."""
    s, n = phi.weight, phi.n
    if s == 0:
        return float(np.max(np.abs(phi.samples)))
    if s < 0 or s > n:
        raise WeightRangeError(f"weight {s} outside (0, {n}]")
    p = n / s
    a = np.abs(phi.samples)
    scale = a.max()
    if scale == 0.0:
        return 0.0
    return float(scale * phi.grid.integrate((a / scale) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class PairingReport:
    product: DensityField
    integral: float
    bound: float
    holds: bool


def holder_pairing(phi: DensityField, psi: DensityField, rtol=1e-12) -> PairingReport:
    """Pointwise product of weights ``s`` and ``t`` with the Hoelder bound.

    The bound checked is ``||phi psi||_{s+t} <= ||phi||_s ||psi||_t``, which
    for ``t = n - s`` reads ``int |phi psi| <= ||phi||_s ||psi||_{n-s}``.
    """
    s, t, n = phi.weight, psi.weight, phi.n
    if psi.n != n:
        raise WeightRangeError("densities live in different dimensions")
    for w in (s, t, s + t):
        if w < 0 or w > n:
            raise WeightRangeError(f"weights s={s}, t={t} leave [0, {n}]")
    if not phi.grid.same_as(psi.grid):
        raise GridError("densities sampled on different grids")
    prod = DensityField(s + t, phi.samples * psi.samples, phi.grid, n)
    lhs = density_norm(prod)
    rhs = density_norm(phi) * density_norm(psi)
    return PairingReport(prod, lhs, rhs, bool(lhs <= rhs * (1 + rtol)))


def dual_norm_estimate(phi: DensityField) -> float:
    """``sup_psi int phi psi / ||psi||_{n-s}`` evaluated at the extremal psi.

    The supremum is attained by ``psi = sgn(phi) |phi|**(p-1)`` with
    ``p = n/s``; the result should reproduce ``density_norm(phi)``.
    """
    s, n = phi.weight, phi.n
    if not 0 < s < n:
        raise WeightRangeError("dual pairing needs 0 < s < n")
    p = n / s
    psi = DensityField(n - s, np.sign(phi.samples) * np.abs(phi.samples) ** (p - 1),
                       phi.grid, n)
    nrm = density_norm(psi)
    if nrm == 0:
        return 0.0
    return phi.grid.integrate(phi.samples * psi.samples) / nrm


def star_section(g, s: float, grid: RadialGrid | None = None) -> DensityField:
    """``sgn(det g) |det g|**(s/2n)`` sampled along the metric's grid."""
    grid = g.grid if grid is None else grid
    det = g.det(grid.points)
    bad = np.flatnonzero(det == 0)
    if bad.size:
        raise NondegeneracyError(
            f"metric degenerate at grid point x = {grid.points[bad[0]]}")
    vals = np.sign(det) * np.abs(det) ** (s / (2.0 * g.n))
    return DensityField(s, vals, _volume_grid(g, grid), g.n)


def _volume_grid(g, grid: RadialGrid) -> RadialGrid:
    """Copy of ``grid`` whose weights carry the metric volume element."""
    w = grid.weights * g.measure(grid.points)
    return RadialGrid(grid.points, w, grid.spacing, grid.period, grid.singular, grid.tags)
