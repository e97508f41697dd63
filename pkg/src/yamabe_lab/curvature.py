"""Curvature of diagonal metrics.

Derivatives of the metric components are taken with fourth-order central
differences of the component callable, in every coordinate direction, at the
points of the sampling line.  Christoffel symbols and the Ricci tensor are
then assembled with ``einsum``, so the same code serves every dimension and
signature.  A symbolic path (sympy) is available for metrics that carry
closed-form components and is used to cross-check the numerical one.

Sign conventions: ``R(unit round sphere) = n(n-1) > 0`` and
``Delta = |g|^{-1/2} d_i (|g|^{1/2} g^{ik} d_k)``, so that the conformal law
reads ``R(u^{4/(n-2)} g) = u^{-(n+2)/(n-2)} (-4 (n-1)/(n-2) Delta u + R u)``.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from .errors import (BoundaryError, PositivityError, SingularityError,
                     SymmetryError, YamabeLabError)
from .grids import RadialGrid
from .metrics import DiagonalMetric, RNParams

FD_STEP = 2e-3

# Bracket order of the first-order quadratic functional taken verbatim; with
# our Ricci convention it integrates to minus the Einstein-Hilbert integral.
WEYL_SIGN = -1.0

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFS = np.arange(-2, 3)


def _derivatives_at(f, x, h):
    vals = np.stack([np.asarray(f(x + k * h), dtype=float) for k in _OFFS])
    f0 = vals[2]
    d1 = np.tensordot(_D1, vals - f0, axes=1) / h
    d2 = np.tensordot(_D2, vals - f0, axes=1) / h ** 2
    return f0, d1, d2


def derivatives(f, x, h=FD_STEP):
    """First and second derivatives of a callable of one variable
    (fourth-order stencils plus one Richardson step)."""
    x = np.asarray(x, dtype=float)
    f0, a1, a2 = _derivatives_at(f, x, h)
    _, b1, b2 = _derivatives_at(f, x, 0.5 * h)
    return f0, (16.0 * b1 - a1) / 15.0, (16.0 * b2 - a2) / 15.0


@dataclass(frozen=True)
class Jet:
    """Diagonal components and their first two derivatives on the line.

    ``g[i]``, ``dg[a, i] = d_a g_ii``, ``ddg[a, b, i] = d_a d_b g_ii``.
    """

    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray


def _local_step(metric: DiagonalMetric, x, h):
    """Step for metrics whose components have poles (``meta["poles"]``): a
    hundredth of the distance to the nearest pole, so the stencil follows the
    local length scale.  Other metrics use ``h`` unchanged."""
    sing = metric.meta.get("poles", ()) if metric.meta else ()
    if not sing:
        return h
    d = np.min(np.abs(x[None, :] - np.asarray(sing, dtype=float)[:, None]), axis=0)
    return 0.01 * d


def metric_jet(metric: DiagonalMetric, x=None, h=FD_STEP) -> Jet:
    """Fourth-order differences at steps ``h`` and ``h/2`` combined by one
    Richardson step."""
    x = metric.grid.points if x is None else np.asarray(x, dtype=float)
    if np.ndim(h) == 0:
        h = np.reshape(_local_step(metric, np.atleast_1d(x), h), np.shape(x)) \
            if metric.meta and metric.meta.get("poles") else h
    a = _jet_at(metric, x, h)
    b = _jet_at(metric, x, 0.5 * h)
    return Jet(b.g, (16.0 * b.dg - a.dg) / 15.0, (16.0 * b.ddg - a.ddg) / 15.0)


def _jet_at(metric, x, h) -> Jet:
    n = metric.n
    X0 = metric.coords(x)

    def ev(shift):
        X = X0.copy()
        for a, s in shift:
            X[a] = X[a] + s
        return metric.at(X)

    g = metric.at(X0)
    dg = np.empty((n,) + g.shape)
    ddg = np.empty((n, n) + g.shape)
    for a in range(n):
        vals = [ev([(a, k * h)]) - g for k in _OFFS]
        dg[a] = sum(c * v for c, v in zip(_D1, vals)) / h
        ddg[a, a] = sum(c * v for c, v in zip(_D2, vals)) / h ** 2
    for a in range(n):
        for b in range(a + 1, n):
            acc = 0.0
            for ca, ka in zip(_D1, _OFFS):
                if ca == 0.0:
                    continue
                for cb, kb in zip(_D1, _OFFS):
                    if cb == 0.0:
                        continue
                    acc = acc + ca * cb * (ev([(a, ka * h), (b, kb * h)]) - g)
            ddg[a, b] = ddg[b, a] = acc / h ** 2
    if np.any(~np.isfinite(g)) or np.any(g == 0):
        bad = np.flatnonzero(~np.isfinite(g).all(0) | (g == 0).any(0))
        raise SingularityError(f"metric singular at x = {x[bad[0]]}")
    return Jet(g, dg, ddg)


def christoffel(jet: Jet):
    """``Gamma[k, i, j]`` and its derivative ``dGamma[a, k, i, j]``."""
    g, dg, ddg = jet.g, jet.dg, jet.ddg
    n = g.shape[0]
    eye = np.eye(n)
    ginv = 1.0 / g
    dginv = -dg / g ** 2
    # A[k,i,j] = delta_kj d_i g_kk + delta_ki d_j g_kk - delta_ij d_k g_ii
    dgT = np.swapaxes(dg, 0, 1)  # dgT[k, a] = d_a g_kk
    A = (np.einsum("kj,ki...->kij...", eye, dgT)
         + np.einsum("ki,kj...->kij...", eye, dgT)
         - np.einsum("ij,ki...->kij...", eye, dg))
    Gam = 0.5 * ginv[:, None, None] * A
    ddgT = np.moveaxis(ddg, 2, 0)  # ddgT[k, a, b] = d_a d_b g_kk
    dA = (np.einsum("kj,kai...->akij...", eye, ddgT)
          + np.einsum("ki,kaj...->akij...", eye, ddgT)
          - np.einsum("ij,aki...->akij...", eye, ddg))
    dGam = 0.5 * (dginv[:, :, None, None] * A[None] + ginv[None, :, None, None] * dA)
    return Gam, dGam


def ricci(jet: Jet) -> np.ndarray:
    """Covariant Ricci tensor ``R[i, j]`` on the line."""
    Gam, dGam = christoffel(jet)
    return (np.einsum("kkij...->ij...", dGam)
            - np.einsum("jkik...->ij...", dGam)
            + np.einsum("kkl...,lij...->ij...", Gam, Gam)
            - np.einsum("kjl...,lik...->ij...", Gam, Gam))


@dataclass(frozen=True)
class CurvatureReport:
    scalar: np.ndarray
    ricci_mixed: np.ndarray  # diagonal R^i_i, shape (n, N)
    method: str
    points: np.ndarray


def scalar_curvature(metric: DiagonalMetric, x=None, method="fd") -> CurvatureReport:
    x = metric.grid.points if x is None else np.asarray(x, dtype=float)
    if method == "analytic":
        return _scalar_curvature_symbolic(metric, x)
    jet = metric_jet(metric, x)
    Ric = ricci(jet)
    diag = np.einsum("ii...->i...", Ric) / jet.g
    R = diag.sum(axis=0)
    if not np.all(np.isfinite(R)):
        raise SingularityError("curvature not finite on the grid")
    return CurvatureReport(R, diag, "finite-difference", x)


@lru_cache(maxsize=32)
def _symbolic_ricci(xs, exprs):
    n = len(xs)
    g = [sp.sympify(e) for e in exprs]
    Gam = [[[sp.Integer(0)] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                t = 0
                if k == j:
                    t += sp.diff(g[k], xs[i])
                if k == i:
                    t += sp.diff(g[k], xs[j])
                if i == j:
                    t -= sp.diff(g[i], xs[k])
                Gam[k][i][j] = sp.together(t / (2 * g[k]))
    diag = []
    for i in range(n):
        r = 0
        for k in range(n):
            r += sp.diff(Gam[k][i][i], xs[k]) - sp.diff(Gam[k][i][k], xs[i])
            for l in range(n):
                r += Gam[k][k][l] * Gam[l][i][i] - Gam[k][i][l] * Gam[l][i][k]
        diag.append(sp.simplify(r / g[i]))
    return diag


def _scalar_curvature_symbolic(metric, x):
    if metric.symbolic is None:
        raise YamabeLabError("metric carries no closed form")
    xs, exprs = metric.symbolic
    diag = _symbolic_ricci(tuple(xs), tuple(sp.sympify(e) for e in exprs))
    X = metric.coords(x)
    vals = []
    for d in diag:
        f = sp.lambdify(xs, d, "numpy")
        vals.append(np.broadcast_to(np.asarray(f(*X), dtype=float), x.shape))
    vals = np.array(vals)
    return CurvatureReport(vals.sum(axis=0), vals, "analytic", x)


# Laplacians ------------------------------------------------------------------


def laplace_beltrami(metric: DiagonalMetric, f, x=None) -> np.ndarray:
    """``|g|^{-1/2} d_a(|g|^{1/2} g^{aa} d_a f)`` for ``f`` of the axis only."""
    x = metric.grid.points if x is None else np.asarray(x, dtype=float)
    a = metric.axis
    jet = metric_jet(metric, x)
    _, f1, f2 = derivatives(f, x)
    gaa = jet.g[a]
    dlog = 0.5 * np.sum(jet.dg[a] / jet.g, axis=0)
    ginv_prime = -jet.dg[a, a] / gaa ** 2
    return f2 / gaa + f1 * (ginv_prime + dlog / gaa)


def gradient_norm2(metric: DiagonalMetric, f, x=None) -> np.ndarray:
    x = metric.grid.points if x is None else np.asarray(x, dtype=float)
    _, f1, _ = derivatives(f, x)
    return f1 ** 2 / metric.diag(x)[metric.axis]


def _radial_callable(f):
    """Accept ``f(r)`` or ``f(t, r, theta, phi)``; reject the latter if it
    depends on anything but ``r``."""
    try:
        nparams = len(inspect.signature(f).parameters)
    except (TypeError, ValueError):
        nparams = 1
    if nparams != 4:
        return f
    probe = np.array([0.3, 0.7, 1.1])
    ref = np.asarray(f(0.0, probe, np.pi / 2, 0.0), dtype=float)
    for args in [(1.3, probe, np.pi / 2, 0.0), (0.0, probe, 1.0, 0.0),
                 (0.0, probe, np.pi / 2, 2.0)]:
        if not np.allclose(np.asarray(f(*args), dtype=float), ref, rtol=1e-12, atol=1e-12):
            raise SymmetryError("function depends on t, theta or phi")
    return lambda r: f(0.0, r, np.pi / 2, 0.0)


def _radial_derivs(f, r):
    f = _radial_callable(f)
    if hasattr(f, "d1") and hasattr(f, "d2"):
        return f.d1(r), f.d2(r)
    _, d1, d2 = derivatives(f, r)
    return d1, d2


def laplace_beltrami_radial(params: RNParams, f, r) -> np.ndarray:
    """Laplace-Beltrami of a radial function in the Reissner-Nordstrom metric.

    With ``|g|^{1/2} = r^2 sin(theta)`` and ``g^{rr} = -q/r^2`` this is
    ``-r^{-2} (q f')'``.
    """
    r = np.asarray(r, dtype=float)
    d1, d2 = _radial_derivs(f, r)
    return -(params.dq(r) * d1 + params.q(r) * d2) / r ** 2


def reduced_radial_operator(params: RNParams, f, r) -> np.ndarray:
    """``2 r^{-2} (q f')'``, the normalization used for the cubic interior
    equation (it is ``-2`` times :func:`laplace_beltrami_radial`)."""
    r = np.asarray(r, dtype=float)
    d1, d2 = _radial_derivs(f, r)
    return 2.0 * (params.dq(r) * d1 + params.q(r) * d2) / r ** 2


# conformal laws ----------------------------------------------------------------


def _check_positive(u, x):
    vals = np.asarray(u(x), dtype=float)
    if np.any(vals <= 0):
        i = int(np.flatnonzero(vals <= 0)[0])
        raise PositivityError(f"conformal factor not positive at x = {x[i]}")
    return vals


def conformal_scalar(u, metric: DiagonalMetric, n: int | None = None, x=None,
                     method="fd") -> CurvatureReport:
    """Scalar curvature of ``u^{4/(n-2)} g`` from the Yamabe transformation law."""
    n = metric.n if n is None else n
    x = metric.grid.points if x is None else np.asarray(x, dtype=float)
    uv = _check_positive(u, x)
    c = 4.0 * (n - 1) / (n - 2)
    base = scalar_curvature(metric, x, method=method)
    lap = laplace_beltrami(metric, u, x)
    R = uv ** (-(n + 2.0) / (n - 2)) * (-c * lap + base.scalar * uv)
    return CurvatureReport(R, np.full((n,) + x.shape, np.nan), "conformal law", x)


def hessian_mixed_diag(metric: DiagonalMetric, u, x):
    """Diagonal of ``nabla^i nabla_k u`` for ``u`` of the axis coordinate."""
    a = metric.axis
    jet = metric_jet(metric, x)
    Gam, _ = christoffel(jet)
    _, u1, u2 = derivatives(u, x)
    H = -Gam[a] * u1  # -Gamma^a_ik d_a u
    H[a, a] = H[a, a] + u2
    return np.einsum("ii...->i...", H) / jet.g, u1, jet


def conformal_ricci_P(u, metric: DiagonalMetric, n: int | None = None, x=None):
    """Diagonal of the tensor ``P`` in
    ``R^i_k(u^{4/(n-2)} g) = u^{-4/(n-2)} R^i_k(g) + u^{-2n/(n-2)} P^i_k``.
    """
    n = metric.n if n is None else n
    x = metric.grid.points if x is None else np.asarray(x, dtype=float)
    uv = np.asarray(u(x), dtype=float)
    Hd, u1, jet = hessian_mixed_diag(metric, u, x)
    a = metric.axis
    lap = Hd.sum(axis=0)
    grad2 = u1 ** 2 / jet.g[a]
    grad_mixed = np.zeros_like(Hd)
    grad_mixed[a] = grad2  # nabla^a u nabla_a u
    return (-2.0 * uv * (Hd + lap / (n - 2))
            + 2.0 / (n - 2) * (n * grad_mixed - grad2))


def conformal_ricci_check(u, metric: DiagonalMetric, x=None):
    """Max deviation between the P formula and finite-difference Ricci."""
    n = metric.n
    x = metric.grid.points if x is None else np.asarray(x, dtype=float)
    uv = np.asarray(u(x), dtype=float)
    bar = scalar_curvature(metric.conformal(u), x).ricci_mixed
    base = scalar_curvature(metric, x).ricci_mixed
    lhs = (bar - uv ** (-4.0 / (n - 2)) * base) * uv ** (2.0 * n / (n - 2))
    P = conformal_ricci_P(u, metric, n, x)
    scale = max(1.0, float(np.abs(P).max()))
    return float(np.abs(lhs - P).max() / scale), P, lhs


# functionals ------------------------------------------------------------------


def weyl_integrand(metric: DiagonalMetric, x=None) -> np.ndarray:
    """``g^{ik} (Gamma^s_ts Gamma^t_ik - Gamma^s_it Gamma^t_sk)`` on the line."""
    jet = metric_jet(metric, x)
    Gam, _ = christoffel(jet)
    ginv = 1.0 / jet.g
    t1 = np.einsum("i...,sts...,tii...->...", ginv, Gam, Gam)
    t2 = np.einsum("i...,sit...,tsi...->...", ginv, Gam, Gam)
    return t1 - t2


def weyl_action(metric: DiagonalMetric) -> float:
    if not metric.grid.is_periodic:
        raise BoundaryError("the quadratic functional needs a closed (periodic) grid")
    return metric.integrate(weyl_integrand(metric))


def einstein_hilbert_integral(metric: DiagonalMetric) -> float:
    return metric.integrate(scalar_curvature(metric).scalar)


def goldstone_check(chi, theta, metric: DiagonalMetric, x=None) -> float:
    """Max relative residual of ``|d(e^{i theta} chi)|^2 = chi^2 |d theta|^2 + |d chi|^2``."""
    x = metric.grid.points if x is None else np.asarray(x, dtype=float)
    c0, c1, _ = derivatives(chi, x)
    t0, t1, _ = derivatives(theta, x)
    ginv = 1.0 / metric.diag(x)[metric.axis]
    dpsi = np.exp(1j * t0) * (c1 + 1j * c0 * t1)  # product rule
    lhs = ginv * np.abs(dpsi) ** 2
    rhs = ginv * (c0 ** 2 * t1 ** 2 + c1 ** 2)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))))


def yamabe_integral_identity(metric: DiagonalMetric):
    """Both sides of ``int R(g) dvol_g = int [phi^2 R(gbar) + 4 (n-1)/(n-2) |d phi|^2_gbar] d^n x``
    with ``(gbar, phi)`` the blow-up of ``g``.  Needs a periodic grid."""
    if not metric.grid.is_periodic:
        raise BoundaryError("integration by parts needs a closed grid")
    n = metric.n
    comp = metric.components

    def absdet(X):
        return np.abs(np.prod(comp(X), axis=0))

    def gbar_components(X):
        return absdet(X) ** (-1.0 / n) * comp(X)

    gbar = DiagonalMetric(n, gbar_components, metric.grid, metric.axis, metric.base,
                          transverse_volume=metric.transverse_volume,
                          measure_fn=lambda x: np.full_like(np.asarray(x, float),
                                                            metric.transverse_volume))

    def phi(x):
        return absdet(metric.coords(x)) ** ((n - 2) / (4.0 * n))

    lhs = einstein_hilbert_integral(metric)
    Rbar = scalar_curvature(gbar).scalar
    pv = phi(metric.grid.points)
    dens = pv ** 2 * Rbar + 4.0 * (n - 1) / (n - 2) * gradient_norm2(gbar, phi)
    rhs = gbar.integrate(dens)
    return lhs, rhs
