import numpy as np
import pytest
from scipy.integrate import quad

from yamabe_lab import interior as it
from yamabe_lab.curvature import conformal_ricci_check, laplace_beltrami_radial
from yamabe_lab.errors import DiscriminantError, DomainError, SupportError
from yamabe_lab.grids import RadialGrid
from yamabe_lab.metrics import RNParams, reissner_nordstrom


def test_q_poly():
    q = it.q_poly(RNParams(1.0, 0.0))
    assert q.roots == (0.0, 2.0)
    assert q(np.array([0.5, 1.0, 1.5])).tolist() == [-0.75, -1.0, -0.75]
    p = RNParams(1.0, 0.6)
    assert p.D == pytest.approx(0.8)
    assert np.allclose(sorted(np.roots([1, -2, 0.36])), p.horizons)
    assert it.q_poly(p).region(1.0) == "II"
    assert it.q_poly(p).region(1.9) == "outside"
    assert p.q(p.m) == pytest.approx(-p.D ** 2)
    with pytest.raises(DiscriminantError):
        RNParams(1.0, 1.0)


def test_harmonic_family():
    p = RNParams(1.0, 0.0)
    r = np.linspace(0.1, 1.9, 19)
    assert np.all(it.harmonic_u(p, 0.0, 2.5)(r) == 2.5)
    u = it.harmonic_u(p, 2.0, 1.0)
    # partial fractions: u = c + log((2 - r)/r) for m = 1, e = 0, k = 2
    assert np.allclose(u(r), 1 + np.log((2 - r) / r), rtol=1e-14)
    assert np.abs(laplace_beltrami_radial(p, u, r)).max() <= 1e-8
    assert abs(u.d2(1.0)) <= 1e-15
    with pytest.raises(DomainError):
        u(2.0)


def test_U_factor():
    p = RNParams(1.0, 0.0)
    U = it.U_factor(p)
    r = np.linspace(1.0, 1.9, 10)
    assert np.all(U(r) == 1.0)
    assert float(U(2 / (1 + np.e))) == pytest.approx(2.0, rel=1e-14)
    left, right = U.measured_slopes()
    assert left == pytest.approx(U.left_slope, abs=1e-8)
    assert right == pytest.approx(0.0, abs=1e-8)
    assert U.left_slope == pytest.approx(-2.0 / p.m)
    inner = it.harmonic_u(p, 2 * p.D ** 2 / p.m, 1.0)
    rr = np.linspace(0.05, 0.95, 11)
    assert np.array_equal(U(rr), inner(rr))


def test_weak_delta_smooth_profile_has_no_mass():
    # for a smooth profile the weak pairing equals the classical Laplacian
    # against the bump, which shrinks with the support: no point mass
    p = RNParams(1.0, 0.6)
    f = lambda r: 1 + 0.1 * np.asarray(r) ** 2
    smooth = it.ConformalProfile(f, None, 1.0, "Cinf", 0.2, 0.2, p.horizons)
    vals = []
    for w in (0.2, 0.1, 0.05):
        rep = it.weak_delta_check(p, smooth, width=w)
        psi = it.poly_bump(1.0, w)
        ref = quad(lambda r: float(laplace_beltrami_radial(p, f, np.array([r]))[0])
                   * float(psi(r)) * r * r, 1 - w, 1 + w)[0]
        assert rep.coefficient == pytest.approx(ref, rel=1e-8)
        vals.append(rep.coefficient)
    assert abs(vals[2]) < 0.3 * abs(vals[0])


@pytest.mark.parametrize("m", [0.7, 1.0, 2.0])
@pytest.mark.parametrize("frac", [0.0, 0.3, 0.6])
def test_weak_delta_scaling(m, frac):
    p = RNParams(m, frac * m)
    rep = it.weak_delta_check(p)
    # integrating by parts by hand: 2 m^-3 D^2 for the Laplace-Beltrami operator
    assert rep.coefficient == pytest.approx(2 * p.D ** 2 / m ** 3, rel=1e-4)
    assert rep.coefficient_reduced == pytest.approx(-2 * rep.coefficient, rel=1e-10)
    assert rep.rbar_coefficient == pytest.approx(-6 * rep.coefficient, rel=1e-12)


def test_weak_delta_support_error():
    p = RNParams(1.0, 0.6)
    with pytest.raises(SupportError):
        it.weak_delta_check(p, width=p.D)


def test_p_eigenvalues():
    p = RNParams(1.0, 0.0)
    assert np.array_equal(it.p_eigenvalues(p, 0.0, 1.0, 0.7), np.zeros(4))
    assert it.p_eigenvalues(p, 2.0, 1.0, 1.0).tolist() == [-8.0, 8.0, 0.0, 0.0]
    with pytest.raises(DomainError):
        it.p_eigenvalues(p, 1.0, 1.0, 2.0)


@pytest.mark.parametrize("e", [0.0, 0.5])
def test_p_eigenvalues_match_fd_ricci(e):
    p = RNParams(1.0, e)
    lo, hi = p.horizons
    g = reissner_nordstrom(p, RadialGrid.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), 33))
    u = it.harmonic_u(p, 0.3, 3.0)
    _, _, lhs = conformal_ricci_check(u, g)
    pe = it.p_eigenvalues(p, 0.3, u, g.grid.points).T
    assert np.abs(pe - lhs).max() <= 1e-6 * np.abs(pe).max()


def test_determinant_roots():
    p = RNParams(1.0, 0.0)
    rep = it.p_determinant_roots(p)
    assert rep.roots == pytest.approx((-2.0, 0.0, 2.0 / 3.0, 2.0))
    assert rep.claimed == 2.0
    assert not rep.unique


def test_classical_geodesic():
    p = RNParams(1.0, 0.0)
    rep = it.radial_geodesic(p, None, 0.0, r_start=1.5)
    assert rep.proper_time == pytest.approx(it.classical_proper_time(1.0, 1.5), rel=1e-8)
    assert rep.monotone and rep.turning_point is None


def test_U_geodesic():
    p = RNParams(1.0, 0.0)
    U = it.U_factor(p)
    rep = it.radial_geodesic(p, U, 1.0)
    assert np.isfinite(rep.proper_time) and rep.proper_time > 0
    assert abs(rep.asymptotic_ratio - 1) <= 0.01
    assert rep.monotone
    big = it.radial_geodesic(p, U, 1e4)
    approx = quad(lambda r: float(U(r)) ** 2, 0.0, 1.9, points=[1.0], limit=200)[0] / 1e4
    assert big.proper_time == pytest.approx(approx, rel=1e-3)


def test_geodesic_needs_schwarzschild():
    with pytest.raises(DomainError):
        it.radial_geodesic(RNParams(1.0, 0.5), None, 1.0)


@pytest.mark.parametrize("e", [0.0, 0.6])
def test_lebesgue_classes(e):
    p = RNParams(1.0, e)
    rep = it.lebesgue_class_report(p, 1.0)
    assert rep.u_in_L4 and not rep.grad_u_in_L2_globally
    assert rep.grad_log_slope == pytest.approx(rep.expected_log_slope, rel=1e-2)
    triv = it.lebesgue_class_report(p, 0.0)
    assert triv.u_in_L4 and triv.grad_u_in_L2_globally


def test_null_volume():
    p = RNParams(1.0, 0.6)
    assert it.null_volume_check(p, np.linspace(0.3, 1.7, 9)) <= 1e-13
