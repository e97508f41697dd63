"""Duffing normal form of the interior equation and its asymptotic corrections.

With ``x = r^{3/2} (1 - r)^{1/2} v`` the interior equation becomes

    x'' + delta1 x' + delta0^2 x = (9/4) x^3,

where, writing ``s = expit(t)`` and ``sb = 1 - s``,

    delta1 = 4 s - 1,    delta0^2 = (1 + 8 s^2) / 4.

The operator ``L = delta0^-3 (d + delta1) d delta0`` has the expanded form
``delta0^-2 d^2 + delta0^-3 eps1 d + delta0^-3 eps0`` with
``eps1 = 2 delta0' + delta1 delta0`` and ``eps0 = delta0'' + delta1 delta0'``.

Asymptotic series ``y(n) = sum_k y_k t^-k`` are built by
``y_{n+1} = (2 - L)^{-1} E_{n+1}``.  The residual
``F(y) = L y + y - y^3`` of a truncated series is expanded formally as
``sum_j c_j(t) t^-j`` and ``E_{n+1} = sum_{j <= n+1} c_j t^{n+1-j}``, which
is smooth through ``t = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import expit

from .curvature import derivatives
from .errors import StepFailure

DEFAULT_T = 60.0
DEFAULT_POINTS = 4096


# closed forms ---------------------------------------------------------------


def _sig(t):
    t = np.asarray(t, dtype=float)
    return expit(t), expit(-t)


def delta1(t):
    s, _ = _sig(t)
    return 4.0 * s - 1.0


def delta0_sq(t):
    s, _ = _sig(t)
    return 0.25 * (1.0 + 8.0 * s * s)


def delta0(t):
    return np.sqrt(delta0_sq(t))


def delta0_d1(t):
    s, sb = _sig(t)
    return 4.0 * s * s * sb / np.sqrt(1.0 + 8.0 * s * s)


def delta0_d2(t):
    s, sb = _sig(t)
    S = np.sqrt(1.0 + 8.0 * s * s)
    return -4.0 * s * s * sb * (8 * s ** 3 - 8 * s * s * sb + s - 2 * sb) / S ** 3


def eps0(t):
    s, sb = _sig(t)
    S = np.sqrt(1.0 + 8.0 * s * s)
    return 4.0 * s * s * sb * (16 * s ** 3 + 2 * s + sb) / S ** 3


def eps1(t):
    s, sb = _sig(t)
    S = np.sqrt(1.0 + 8.0 * s * s)
    return (24 * s ** 3 + 8 * s * s * sb + 3 * s - sb) / (2.0 * S)


def delta1_printed(t):
    """``(3 e^t + 2 - e^-t) / (e^t + 2 + e^-t)`` divided through by the
    dominant exponential."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-np.abs(t))
    pos = (3 + 2 * e - e * e) / (1 + 2 * e + e * e)
    neg = (3 * e * e + 2 * e - 1) / (e * e + 2 * e + 1)
    return np.where(t >= 0, pos, neg)


def delta0_sq_printed(t):
    """``(9 e^t + 2 + e^-t) / (4 (e^t + 2 + e^-t))``, stably."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-np.abs(t))
    pos = (9 + 2 * e + e * e) / (4 * (1 + 2 * e + e * e))
    neg = (9 * e * e + 2 * e + 1) / (4 * (e * e + 2 * e + 1))
    return np.where(t >= 0, pos, neg)


def v0_closed(t):
    """``(1/3) (1 + 8 (1 + e^-t)^-2)^{1/2}``."""
    s, _ = _sig(t)
    return np.sqrt(1.0 + 8.0 * s * s) / 3.0


def v0_r_form(r):
    r = np.asarray(r, dtype=float)
    return np.sqrt(1.0 + 8.0 * (1.0 - r) ** 2) / 3.0


def transplant_factor(t):
    """``h = r^{3/2} (1-r)^{1/2} = e^{t/2} (1 + e^t)^{-2}`` and its
    logarithmic derivative ``1/2 - 2 s``."""
    s, sb = _sig(t)
    t = np.asarray(t, dtype=float)
    # r = sb, 1 - r = s
    h = sb ** 1.5 * s ** 0.5
    return h, 0.5 - 2.0 * s


# grid functions ---------------------------------------------------------------


@dataclass(frozen=True)
class ACFunction:
    """Samples on a symmetric grid with declared limits at both ends."""

    t: np.ndarray
    values: np.ndarray
    limits: tuple
    fn: object = field(default=None, repr=False)

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])

    def certificate(self, tol: float = 1e-6) -> dict:
        T = self.t[-1]
        outer = np.abs(self.t) >= 0.9 * T
        d = np.abs(d1_grid(self.values, self.h))
        left = outer & (self.t < 0)
        right = outer & (self.t > 0)
        edge_err = max(abs(self.values[0] - self.limits[0]),
                       abs(self.values[-1] - self.limits[1]))
        noise = 1e-12 * max(1.0, float(np.abs(self.values).max()))
        # derivative magnitude nonincreasing toward each end, up to rounding
        mono_right = bool(np.all(np.diff(d[right]) <= noise))
        mono_left = bool(np.all(np.diff(d[left][::-1]) <= noise))
        return {
            "edge_error": float(edge_err),
            "outer_derivative_sup": float(d[outer].max()),
            "monotone_decay": mono_left and mono_right,
            "passes": bool(edge_err <= tol and mono_left and mono_right),
        }


def make_grid(T: float = DEFAULT_T, points: int = DEFAULT_POINTS) -> np.ndarray:
    if T < 40:
        raise ValueError("the asymptotic grid needs T >= 40")
    return np.linspace(-T, T, points)


def _pad(y):
    # even reflection about both end points (zero slope)
    return np.concatenate([y[2:0:-1], y, y[-2:-4:-1]])


def d1_grid(y, h):
    p = _pad(y)
    return (p[:-4] - 8 * p[1:-3] + 8 * p[3:-1] - p[4:]) / (12 * h)


def d2_grid(y, h):
    p = _pad(y)
    c = p[2:-2]
    return (-(p[:-4] - c) + 16 * (p[1:-3] - c) + 16 * (p[3:-1] - c) - (p[4:] - c)) / (12 * h * h)


def duffing_coefficients(t):
    """``(delta1, delta0^2)`` as grid functions with their limits."""
    t = np.asarray(t, dtype=float)
    return (ACFunction(t, delta1(t), (-1.0, 3.0), delta1),
            ACFunction(t, delta0_sq(t), (0.25, 2.25), delta0_sq))


def v0_profile(t) -> ACFunction:
    t = np.asarray(t, dtype=float)
    return ACFunction(t, v0_closed(t), (1.0 / 3.0, 1.0), v0_closed)


def x0_stationary(d0sq: ACFunction) -> ACFunction:
    if np.any(d0sq.values <= 0):
        raise ValueError("delta0^2 must be positive")
    fn = None if d0sq.fn is None else (lambda s: (2.0 / 3.0) * np.sqrt(d0sq.fn(s)))
    lim = tuple((2.0 / 3.0) * np.sqrt(x) for x in d0sq.limits)
    return ACFunction(d0sq.t, (2.0 / 3.0) * np.sqrt(d0sq.values), lim, fn)


def duffing_residual(x, t):
    """``x'' + delta1 x' + delta0^2 x - (9/4) x^3`` for a callable ``x``."""
    x0, x1, x2 = derivatives(x, t, h=1e-3)
    return x2 + delta1(t) * x1 + delta0_sq(t) * x0 - 2.25 * x0 ** 3


class Operator:
    """``L`` on a uniform grid (expanded form, fourth-order stencils)."""

    def __init__(self, t):
        self.t = np.asarray(t, dtype=float)
        self.h = float(self.t[1] - self.t[0])
        d0 = delta0(self.t)
        self.a2 = d0 ** -2
        self.a1 = eps1(self.t) / d0 ** 3
        self.a0 = eps0(self.t) / d0 ** 3
        self._banded = self._second_order_matrix()

    def __call__(self, y):
        return self.a2 * d2_grid(y, self.h) + self.a1 * d1_grid(y, self.h) + self.a0 * y

    def _second_order_matrix(self):
        h, N = self.h, self.t.size
        lo = -self.a2 / h ** 2 + self.a1 / (2 * h)
        up = -self.a2 / h ** 2 - self.a1 / (2 * h)
        ab = np.zeros((3, N))
        ab[1] = 2.0 + 2.0 * self.a2 / h ** 2 - self.a0
        ab[0, 1:] = up[:-1]
        ab[2, :-1] = lo[1:]
        ab[0, 1] = up[0] + lo[0]  # ghost y_{-1} = y_1
        ab[2, N - 2] = lo[N - 1] + up[N - 1]
        return ab

    def solve_two_minus(self, E, tol=1e-12, max_iter=200):
        """Solve ``(2 - L) y = E`` with zero-slope ends.

        A second-order banded matrix preconditions a defect-correction
        iteration on the fourth-order operator.
        """
        E = np.asarray(E, dtype=float)
        y = solve_banded((1, 1), self._banded, E)
        scale = max(1.0, float(np.abs(E).max()))
        hist = []
        for _ in range(max_iter):
            r = E - (2.0 * y - self(y))
            hist.append(float(np.abs(r).max()))
            if hist[-1] <= tol * scale:
                return y, hist
            y = y + solve_banded((1, 1), self._banded, r)
        raise StepFailure("defect correction did not converge",
                          {"residual_history": hist[-5:]})


def L_apply(y, t=None, method="factored"):
    """``L y``.

    For a callable ``y`` (or an :class:`ACFunction` carrying one) the factored
    form is differentiated with Richardson-refined differences; for bare
    samples the grid stencils are used.  ``method="expanded"`` uses the
    closed-form coefficients ``eps0``, ``eps1``.
    """
    fn = y.fn if isinstance(y, ACFunction) else (y if callable(y) else None)
    if isinstance(y, ACFunction):
        t = y.t
    t = np.asarray(t, dtype=float)
    d0 = delta0(t)
    if fn is None:
        vals = np.asarray(y.values if isinstance(y, ACFunction) else y, dtype=float)
        if method == "expanded":
            return Operator(t)(vals)
        h = t[1] - t[0]
        inner = d1_grid(delta0(t) * vals, h)
        return d0 ** -3 * (d1_grid(inner, h) + delta1(t) * inner)
    if method == "expanded":
        y0, y1, y2 = derivatives(fn, t)
        return d0 ** -3 * (d0 * y2 + eps1(t) * y1 + eps0(t) * y0)

    def g(s):
        return delta0(s) * fn(s)

    def inner(s):
        return derivatives(g, s, h=1e-3)[1]

    _, di, _ = derivatives(inner, t, h=1e-3)
    return d0 ** -3 * (di + delta1(t) * inner(t))


# the induction ----------------------------------------------------------------


@dataclass
class AsymptoticSeries:
    t: np.ndarray
    coeffs: list  # y_1, y_2, ... as ACFunction; y_0 = 1 is implicit
    history: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def y0(self) -> ACFunction:
        return ACFunction(self.t, np.ones_like(self.t), (1.0, 1.0), lambda s: np.ones_like(s))

    def values(self):
        return [c.values for c in self.coeffs]

    def evaluate(self):
        out = np.ones_like(self.t)
        for k, y in enumerate(self.values(), start=1):
            out = out + y * self.t ** -k
        return out


def _cauchy(a, b, J):
    out = [np.zeros_like(a[0]) for _ in range(J)]
    for i, x in enumerate(a):
        for j, z in enumerate(b):
            if i + j < J:
                out[i + j] = out[i + j] + x * z
    return out


def residual_coefficients(series: AsymptoticSeries, op: Operator | None = None,
                          override=None):
    """``c_j`` with ``F(y(n)) = sum_j c_j t^-j``.

    ``y_0 = 1`` is handled in closed form: ``F(1) = L 1 = delta0^-3 eps0``.
    ``override`` replaces the list of ``y_k`` samples (for mutation tests).
    """
    op = Operator(series.t) if op is None else op
    ys = series.values() if override is None else override
    n = len(ys)
    J = 3 * n + 3
    N = series.t.size
    c = [np.zeros(N) for _ in range(J)]
    c[0] = c[0] + op.a0
    for k, yk in enumerate(ys, start=1):
        yp = d1_grid(yk, op.h)
        c[k] += op(yk) + yk
        c[k + 1] += op.a2 * (-2 * k) * yp + op.a1 * (-k) * yk
        c[k + 2] += op.a2 * k * (k + 1) * yk
    eta = [np.zeros(N)] + list(ys)
    e2 = _cauchy(eta, eta, J)
    e3 = _cauchy(e2, eta, J)
    for j in range(J):
        if j < len(eta):
            c[j] -= 3 * eta[j]
        c[j] -= 3 * e2[j] + e3[j]
    return c


def residual_values(c, t):
    return sum(cj * t ** -j for j, cj in enumerate(c))


def lifted_error(c, t, n):
    """``E_{n+1} = sum_{j <= n+1} c_j t^{n+1-j}``."""
    return sum(c[j] * t ** (n + 1 - j) for j in range(n + 2))


def correction_step(series: AsymptoticSeries, op: Operator | None = None,
                    tol=1e-12) -> AsymptoticSeries:
    """Append ``y_{n+1} = (2 - L)^{-1} E_{n+1}``."""
    op = Operator(series.t) if op is None else op
    n = series.n
    c = residual_coefficients(series, op)
    E = lifted_error(c, series.t, n)
    if not np.all(np.isfinite(E)):
        raise StepFailure("lifted error term is not finite", {"n": n})
    y, hist = op.solve_two_minus(E, tol=tol)
    lam = (op.a0[0], op.a0[-1])
    limits = (E[0] / (2.0 - lam[0]), E[-1] / (2.0 - lam[1]))
    new = ACFunction(series.t, y, limits)
    return AsymptoticSeries(series.t, series.coeffs + [new],
                            series.history + [{"n": n, "E": E, "solve_history": hist}])


def build_series(steps: int, T: float = DEFAULT_T, points: int = DEFAULT_POINTS):
    t = make_grid(T, points)
    op = Operator(t)
    s = AsymptoticSeries(t, [])
    for _ in range(steps):
        s = correction_step(s, op)
    return s, op


@dataclass(frozen=True)
class DecayFit:
    n: int
    slope_left: float
    slope_right: float
    r2_left: float
    r2_right: float
    rate_left: float   # exponential rate from a fit of log|F| against |t|
    rate_right: float
    conclusive: bool

    @property
    def slope(self) -> float:
        return max(self.slope_left, self.slope_right)


def _side_fit(t, F, mask):
    X = np.log(np.abs(t[mask]))
    Y = np.log(np.abs(F[mask]))
    p = np.polyfit(X, Y, 1)
    r2 = 1.0 - np.var(Y - np.polyval(p, X)) / np.var(Y)
    rate = np.polyfit(np.abs(t[mask]), Y, 1)[0]
    return float(p[0]), float(r2), float(rate)


def residual_decay(series: AsymptoticSeries, n: int | None = None,
                   op: Operator | None = None, override=None, edge_skip: int = 8) -> DecayFit:
    """Log-log slope of ``|F(y(n))|`` on the outer tenth of each side."""
    n = series.n if n is None else n
    trunc = AsymptoticSeries(series.t, series.coeffs[:n])
    c = residual_coefficients(trunc, op, override)
    F = residual_values(c, series.t)
    t = series.t
    T = t[-1]
    h = t[1] - t[0]
    right = (t > 0.9 * T) & (t < T - edge_skip * h)
    left = (t < -0.9 * T) & (t > -T + edge_skip * h)
    sl, r2l, kl = _side_fit(t, F, left)
    sr, r2r, kr = _side_fit(t, F, right)
    return DecayFit(n, sl, sr, r2l, r2r, kl, kr, bool(min(r2l, r2r) >= 0.95))


def window_residual(series: AsymptoticSeries, n: int, window=(10.0, 40.0),
                    op: Operator | None = None, override=None) -> float:
    """``sup |F(y(n))|`` over ``window[0] <= |t| <= window[1]``."""
    trunc = AsymptoticSeries(series.t, series.coeffs[:n])
    F = residual_values(residual_coefficients(trunc, op, override), series.t)
    a = np.abs(series.t)
    m = (a >= window[0]) & (a <= window[1])
    if not m.any():
        raise ValueError("window misses the grid")
    return float(np.abs(F[m]).max())


def e1_shape_report(t):
    """Compare the first lifted error with the printed ``t (delta0'' + delta1 delta0')``."""
    t = np.asarray(t, dtype=float)
    s = AsymptoticSeries(t, [])
    E1 = lifted_error(residual_coefficients(s), t, 0)
    with_pref = t * eps0(t) / delta0(t) ** 3
    without = t * (delta0_d2(t) + delta1(t) * delta0_d1(t))
    scale = float(np.abs(E1).max())
    return {
        "gap_with_prefactor": float(np.abs(E1 - with_pref).max() / scale),
        "gap_printed": float(np.abs(E1 - without).max() / scale),
    }


def transplant_residual(sol, t_window=(-6.0, 4.0)) -> float:
    """Relative Duffing residual of ``x = h v`` built from an interior solution.

    ``sol`` is a :class:`yamabe_lab.yamabe_ode.ODESolution`; derivatives of
    ``x`` are taken numerically from its dense output.
    """
    t = np.linspace(t_window[0], t_window[1], 201)

    def x(s):
        return transplant_factor(s)[0] * sol.at_t(s)[0]

    res = duffing_residual(x, t)
    x0, x1, x2 = derivatives(x, t, h=1e-3)
    scale = np.abs(x2) + np.abs(delta1(t) * x1) + np.abs(delta0_sq(t) * x0) + 2.25 * np.abs(x0) ** 3
    return float(np.max(np.abs(res) / scale))
