from fractions import Fraction

import numpy as np
import pytest

from yamabe_lab import yamabe_ode as yo
from yamabe_lab.errors import BlowUpError, CriticalPointError, DomainError
from yamabe_lab.series import RationalSeries, w_recurrence


def test_solution_invariants(ode_solution):
    s = ode_solution
    assert np.all(s.v > 0)
    assert yo.residual(s) <= 1e-8
    assert yo.convex(s)
    assert (s.order, s.r0) == (yo.DEFAULT_ORDER, yo.DEFAULT_R0)


def test_change_of_variables_roundtrip():
    r = np.linspace(0.01, 0.99, 50)
    assert np.allclose(yo.r_of_t(yo.t_of_r(r)), r, rtol=1e-14)
    t = np.array([-700.0, -3.0, 0.0, 3.0, 700.0])
    direct = np.exp(t[1:4]) / (1 + np.exp(t[1:4])) ** 4
    assert np.allclose(yo.coupling(t)[1:4], direct, rtol=1e-14)
    assert np.all(np.isfinite(yo.coupling(t)))


def test_seed_order_robustness():
    a = yo.series_seed(w_recurrence(30), 0.1)
    b = yo.series_seed(w_recurrence(40), 0.1)
    assert np.max(np.abs(np.subtract(a, b))) < 1e-12
    s30 = yo.integrate_v(order=30)
    s40 = yo.integrate_v(order=40)
    assert np.max(np.abs(s30.v - s40.v)) < 1e-9


def test_leading_asymptote(ode_solution):
    # at r = 0.01 the series factor w is within 0.2% of 1
    v_end, r_end = ode_solution.v[-1], ode_solution.r[-1]
    assert v_end * r_end ** 1.5 == pytest.approx(1.0, abs=2e-3)
    assert np.all(np.diff(ode_solution.v[-200:]) > 0)


def test_rho_unique_and_near_vtilde(ode_solution):
    rho = yo.find_rho(ode_solution)
    assert 0 < rho < 1
    assert abs(rho - yo.RHO_TILDE) <= 0.10
    sign_changes = np.count_nonzero(np.diff(np.sign(ode_solution.vt)) != 0)
    assert sign_changes == 1
    assert abs(float(ode_solution.at_t(yo.t_of_r(rho))[1])) < 1e-10


def test_rho_step_halving():
    a = yo.find_rho(yo.integrate_v(max_step=0.02))
    b = yo.find_rho(yo.integrate_v(max_step=0.01))
    assert abs(a - b) < 1e-8


@pytest.mark.parametrize("kwargs", [dict(order=30), dict(r0=0.05), dict(r0=0.2),
                                    dict(max_step=0.05), dict(rtol=1e-11)])
def test_rho_stability(ode_solution, kwargs):
    base = yo.find_rho(ode_solution)
    assert abs(yo.find_rho(yo.integrate_v(**kwargs)) - base) < 1e-6


def test_vtilde_profile(ode_solution):
    rep = yo.vtilde_compare(ode_solution)
    assert rep.rho_tilde == pytest.approx((7 - np.sqrt(13)) / 4, abs=1e-10)
    assert rep.leading_ratio == pytest.approx(1.0, abs=1e-6)
    # regression values from the first run
    assert rep.sup_rel_dev == pytest.approx(0.33725, abs=1e-4)
    assert rep.l2_rel_dev == pytest.approx(0.08799, abs=1e-4)


def test_vtilde_prime_matches_numeric():
    r = np.linspace(0.1, 0.9, 9)
    h = 1e-6
    num = (yo.vtilde(r + h) - yo.vtilde(r - h)) / (2 * h)
    assert np.allclose(yo.vtilde_prime(r), num, rtol=1e-7)


def test_deformation(ode_solution):
    d = yo.V_deformation(ode_solution)
    assert d.Lam == pytest.approx(4.5 * d.v_rho ** 2, rel=1e-15)
    assert d.Rbar == pytest.approx(d.Rbar_closed, rel=1e-6)
    assert d.Rbar_physical == pytest.approx(d.Rbar, rel=1e-12)
    assert d.Rbar_laplace_beltrami == pytest.approx(-3 * d.Lam, rel=1e-15)
    assert abs(d.slopes[0]) < 1e-8 and d.slopes[1] == 0
    assert d.second_derivative_jump > 0
    rp = 2 * d.m * d.rho
    V = d.profile
    vals = V(np.array([rp * (1 - 1e-9), rp, rp * 1.5, 0.999]))
    assert vals[0] == pytest.approx(1.0, abs=1e-9)
    assert np.all(vals[1:] == 1.0)


def test_deformation_mass_scaling(ode_solution):
    d1 = yo.V_deformation(ode_solution, m=0.5)
    d2 = yo.V_deformation(ode_solution, m=2.0)
    assert d2.Rbar_physical == pytest.approx(d1.Rbar_physical / 16, rel=1e-12)
    assert d2.Rbar_closed == pytest.approx(108 * 4 * d1.rho ** -3 * d1.w_rho ** 2, rel=1e-12)
    r = np.linspace(0.1, 0.8, 7)
    assert np.allclose(d1.profile(r), d2.profile(4 * r), rtol=1e-14)


def test_log_pole(ode_solution):
    rep = yo.proper_time_log_slope(ode_solution)
    assert rep.rel_err < 0.02
    assert np.all(np.diff(rep.tau) > 0)
    inc = np.diff(rep.tau)
    assert np.allclose(inc, inc[-1], rtol=1e-2)


def test_full_solution_at_nine_halves(ode_solution):
    chk = yo.full_solution_check(4.5, ode_solution)
    assert chk.prefactor == 1.0
    assert chk.residual_ode <= 1e-8 and chk.residual_series <= 1e-8
    assert np.array_equal(yo.u_scaled(ode_solution.v, 4.5), ode_solution.v)


def test_lambda_scaling(ode_solution):
    c1 = yo.full_solution_check(1.0, ode_solution)
    c4 = yo.full_solution_check(4.0, ode_solution)
    assert max(c1.residual_ode, c4.residual_ode) <= 1e-8
    u1 = yo.u_scaled(ode_solution.v, 1.0)
    u4 = yo.u_scaled(ode_solution.v, 4.0)
    assert np.array_equal(u4, 0.5 * u1)
    with pytest.raises(ValueError):
        yo.full_solution_check(0.0, ode_solution)


def test_full_check_detects_corrupted_w1(ode_solution):
    c = list(ode_solution.series.coeffs)
    c[1] *= Fraction(101, 100)
    bad = yo.full_solution_check(4.5, ode_solution, RationalSeries(tuple(c)))
    good = yo.full_solution_check(4.5, ode_solution)
    assert bad.residual_series > 1e-5 > 1e3 * good.residual_series


def test_series_ode_agreement(ode_solution, series60):
    r = np.linspace(0.02, 0.3, 141)
    s = series60.v(r)
    v = ode_solution.at_t(yo.t_of_r(r))[0]
    assert np.max(np.abs(s - v) / s) < 1e-8


def test_w_nonvanishing(ode_solution):
    rep = yo.w_nonvanishing(ode_solution)
    assert rep.holds
    assert rep.series_bound > 0.9 and rep.min_w_solution > 0.9


def test_precondition_errors():
    with pytest.raises(DomainError):
        yo.integrate_v(r0=0.3)
    with pytest.raises(DomainError):
        yo.integrate_v(order=10)


def test_blow_up_reported():
    # w = 1 alone seeds v with the wrong slope and the cubic takes over
    flat = RationalSeries(tuple([Fraction(1)] + [Fraction(0)] * 40))
    with pytest.raises(BlowUpError) as info:
        yo.integrate_v(series=flat)
    assert 0 < info.value.location < yo.t_of_r(0.1)


def test_no_critical_point_in_range():
    sol = yo.integrate_v(t_range=(-0.1, np.log(99.0)))
    with pytest.raises(CriticalPointError):
        yo.find_rho(sol)
