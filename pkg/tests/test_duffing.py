import numpy as np
import pytest
import sympy as sp

from yamabe_lab import duffing as du
from yamabe_lab import yamabe_ode as yo


@pytest.fixture(scope="module")
def grid():
    return du.make_grid()


def test_grid_precondition():
    with pytest.raises(ValueError):
        du.make_grid(T=20)


def test_coefficients_at_zero_and_limits(grid):
    assert du.delta1(0.0) == pytest.approx(1.0, abs=1e-15)
    assert du.delta0_sq(0.0) == pytest.approx(0.75, abs=1e-15)
    d1, d0sq = du.duffing_coefficients(grid)
    assert d1.limits == (-1.0, 3.0) and d0sq.limits == (0.25, 2.25)
    for f in (d1, d0sq):
        assert f.certificate()["passes"]
    assert abs(du.delta1(-700.0) + 1) < 1e-15 and abs(du.delta1(700.0) - 3) < 1e-15


def test_printed_forms_agree(grid):
    t = np.concatenate([grid, [-700.0, 700.0]])
    assert np.all(np.isfinite(du.delta1_printed(t)))
    assert np.max(np.abs(du.delta1_printed(t) - du.delta1(t))) < 1e-14
    assert np.max(np.abs(du.delta0_sq_printed(t) - du.delta0_sq(t))) < 1e-14


def test_closed_forms_against_sympy():
    t = sp.symbols("t", real=True)
    E = sp.exp(t)
    d1 = (3 * E + 2 - 1 / E) / (E + 2 + 1 / E)
    d0 = sp.sqrt((9 * E + 2 + 1 / E) / (4 * (E + 2 + 1 / E)))
    dd0 = sp.diff(d0, t)
    exprs = {
        "delta0_d1": dd0,
        "delta0_d2": sp.diff(d0, t, 2),
        "eps1": 2 * dd0 + d1 * d0,
        "eps0": sp.diff(d0, t, 2) + d1 * dd0,
    }
    pts = np.array([-7.0, -2.5, -0.3, 0.0, 0.8, 3.1, 9.0])
    for name, ex in exprs.items():
        f = sp.lambdify(t, ex, "numpy")
        assert np.allclose(getattr(du, name)(pts), f(pts), rtol=1e-12, atol=1e-15), name


def test_v0_profile(grid):
    v0 = du.v0_profile(grid)
    assert v0.limits == (1 / 3, 1.0)
    assert v0.certificate()["passes"]
    assert du.v0_closed(0.0) == pytest.approx(1 / np.sqrt(3), abs=1e-15)
    t = np.linspace(-9, 9, 20)
    r = 1 / (1 + np.exp(t))
    assert np.max(np.abs(du.v0_closed(t) - du.v0_r_form(r))) <= 1e-12


def test_x0_stationary(grid):
    _, d0sq = du.duffing_coefficients(grid)
    x0 = du.x0_stationary(d0sq)
    assert np.max(np.abs(d0sq.values * x0.values - 2.25 * x0.values ** 3)) <= 1e-14
    assert x0.limits == pytest.approx((1 / 3, 1.0), abs=1e-15)
    assert x0.limits == pytest.approx(du.v0_profile(grid).limits, abs=1e-15)
    assert np.max(np.abs(x0.values - du.v0_closed(grid))) < 1e-15
    t = np.linspace(-30, 30, 121)
    res = np.abs(du.duffing_residual(x0.fn, t))
    assert res[60] > 1e-3
    assert res[0] < 1e-8 and res[-1] < 1e-8
    with pytest.raises(ValueError):
        du.x0_stationary(du.ACFunction(grid, -d0sq.values, d0sq.limits))


def test_L_two_paths():
    t = np.linspace(-20, 20, 401)

    def y(s):
        return np.tanh(0.3 * s) + 0.5 * np.exp(-0.1 * s * s) * np.cos(s)

    a = du.L_apply(y, t, "factored")
    b = du.L_apply(y, t, "expanded")
    assert np.max(np.abs(a - b)) <= 1e-8


def test_L_of_constant(grid):
    c = 2.5
    got = du.L_apply(lambda s: c * np.ones_like(s), grid[::64])
    want = c * du.eps0(grid[::64]) / du.delta0(grid[::64]) ** 3
    # nested differences of a product leave about 1e-8 absolute
    assert np.max(np.abs(got - want)) < 5e-8
    op = du.Operator(grid)
    assert np.allclose(op(np.full(grid.size, c)), c * op.a0, rtol=0, atol=1e-12)


def test_eps_decay_at_both_ends(grid):
    # eps0 decays; eps1 tends to delta1 delta0 which is constant at the ends
    e0 = np.abs(du.eps0(grid))
    assert e0[0] < 1e-40 and e0[-1] < 1e-20
    e1 = du.eps1(grid)
    assert e1[0] == pytest.approx(-0.5, abs=1e-12) and e1[-1] == pytest.approx(4.5, abs=1e-12)


def test_two_minus_scalar_limit(grid):
    op = du.Operator(grid)
    y, hist = op.solve_two_minus(np.full(grid.size, 3.0))
    lam = op.a0[[0, -1]]
    assert y[0] == pytest.approx(3.0 / (2 - lam[0]), rel=1e-10)
    assert y[-1] == pytest.approx(3.0 / (2 - lam[1]), rel=1e-10)
    assert hist[-1] <= 1e-12 * 3.0


def test_e1_shape(grid):
    rep = du.e1_shape_report(grid)
    assert rep["gap_with_prefactor"] <= 1e-6
    # the form without the delta0^-3 factor does not match
    assert rep["gap_printed"] > 0.1


def test_certificates(duffing_series):
    series, _ = duffing_series
    for y in series.coeffs:
        cert = y.certificate()
        assert cert["passes"], cert


@pytest.mark.parametrize("n", [0, 1, 2])
def test_residual_slopes(duffing_series, n):
    series, op = duffing_series
    fit = du.residual_decay(series, n, op)
    assert fit.conclusive
    assert fit.slope <= -(n + 1) + 0.3


def test_residual_fit_inconclusive_is_reported(duffing_series):
    series, op = duffing_series
    fit = du.residual_decay(series, 3, op)
    assert not fit.conclusive


def test_step_improvement(duffing_series):
    series, op = duffing_series
    slopes = [du.residual_decay(series, n, op).slope for n in range(3)]
    assert all(b <= a - 0.7 for a, b in zip(slopes, slopes[1:])), slopes


def test_slope_stable_under_T_doubling(duffing_series):
    series, op = duffing_series
    big, op2 = du.build_series(2, T=120.0, points=8192)
    for n in range(3):
        a = du.residual_decay(series, n, op).slope
        b = du.residual_decay(big, n, op2).slope
        assert abs(a - b) <= 0.1, (n, a, b)


def test_window_residual_improves(duffing_series):
    series, op = duffing_series
    w = [du.window_residual(series, n, op=op) for n in range(2)]
    assert w[1] < 0.1 * w[0]


def test_window_residual_grid_robust(duffing_series):
    series, op = duffing_series
    big, op2 = du.build_series(1, T=120.0, points=8192)
    a = du.window_residual(series, 1, op=op)
    b = du.window_residual(big, 1, op=op2)
    assert abs(a - b) <= 0.01 * a


def test_mutation_detected(duffing_series):
    series, op = duffing_series
    good = du.window_residual(series, 1, op=op)
    bad = du.window_residual(series, 1, op=op, override=[1.01 * series.values()[0]])
    assert bad > 1.1 * good


def test_transplant(ode_solution):
    assert du.transplant_residual(ode_solution) <= 1e-6
    t = np.linspace(-5, 3, 9)
    r = yo.r_of_t(t)
    h, _ = du.transplant_factor(t)
    assert np.allclose(h, r ** 1.5 * (1 - r) ** 0.5, rtol=1e-14)
