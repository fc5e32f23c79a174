import numpy as np
import pytest
from hypothesis import given, strategies as st

from warped_ricci.geometry import (CurvaturePoint, WarpedProfile, curvatures_from_profile,
                                   curvatures_from_uvw, finite_difference_riemann,
                                   kappa_sq, lambda_rm_singly, second_fundamental_norm_sq)
from warped_ricci.scales import DomainError

FIELDS = ("L1", "L2", "K1", "K2", "Kmix", "ric_s", "ric_sph", "ric_fib", "R")


def test_cylinder_slice():
    c = curvatures_from_uvw(0.25, 0.0, w=2.0, q=2, p=1, Sec2=0.5)
    assert c.L1 == pytest.approx(4.0)
    assert c.K1 == 0 and c.K2 == 0 and c.Kmix == 0
    assert c.L2 == pytest.approx(0.25)


def test_sphere_uvw_convention():
    # phi = sin s at s = pi/4: u = 1/2, v = 4 cos^2 = 2, v = 4(1 - u) so v_u = -4
    c = curvatures_from_uvw(0.5, 2.0, du_v=-4.0, q=3)
    assert c.K1 == pytest.approx(1.0)
    assert c.L1 == pytest.approx(1.0)
    assert c.R == pytest.approx(4 * 3)


def test_flat_space():
    c = curvatures_from_uvw(np.array([0.1, 1.0, 9.0]), 4.0, q=2)
    assert np.allclose(c.L1, 0) and np.allclose(c.K1, 0)


def test_domain_errors():
    with pytest.raises(DomainError):
        curvatures_from_uvw(0.0, 1.0)
    with pytest.raises(DomainError):
        curvatures_from_uvw(1.0, 1.0, w=-1.0, p=1)
    with pytest.raises(DomainError):
        kappa_sq(1.0, 1.0, 0.0, 1.0, 1)


def test_ricci_trace():
    c = CurvaturePoint.assemble(0.3, 0.2, -0.1, 0.4, 0.05, q=3, p=2)
    assert c.R == pytest.approx(c.ric_s + 3 * c.ric_sph + 2 * c.ric_fib)


def test_second_fundamental_norm():
    assert second_fundamental_norm_sq(1.0, 0.0, 1.0, 0.0, 2, 1) == 0
    assert second_fundamental_norm_sq(1.0, 4.0, None, None, 2, 0) == pytest.approx(2.0)
    assert second_fundamental_norm_sq(0.5, 0.1, 2.0, 0.02, 2, 1) == pytest.approx(0.1025)


def test_kappa_sq_examples():
    assert kappa_sq(1.0, 0.1, 2.0, 0.0, 1) == 0
    assert kappa_sq(1.0, 0.1, 2.0, 0.5, 0) == 0
    # p u v w_u^2/(4 w^2) = 0.1 * 0.25/16
    assert kappa_sq(1.0, 0.1, 2.0, 0.5, 1) == pytest.approx(1.5625e-3)


@given(lam=st.floats(0.1, 10), u=st.floats(0.01, 1), v=st.floats(0, 4),
       w=st.floats(0.01, 1), wu=st.floats(-2, 2))
def test_parabolic_homogeneity(lam, u, v, w, wu):
    y = u * v * wu**2 / w
    a = second_fundamental_norm_sq(u, v, w, y, 2, 1)
    b = second_fundamental_norm_sq(lam * u, v, lam * w, y, 2, 1)
    assert b == pytest.approx(a / lam, rel=1e-12, abs=1e-300)
    # w_u is scale invariant when u and w scale together
    assert kappa_sq(lam * u, v, lam * w, wu, 1) == pytest.approx(kappa_sq(u, v, w, wu, 1) / lam,
                                                                 rel=1e-12, abs=1e-300)


def test_lambda_rm_limits():
    assert lambda_rm_singly(0.0, 0.7, 3) == pytest.approx(2 * 0.7)
    assert lambda_rm_singly(0.5, 0.5, 2) == pytest.approx(1.0)
    assert lambda_rm_singly(0.3, 0.0, 4) == pytest.approx(2 * 0.3)


def test_profile_sphere_and_flat():
    s = np.linspace(0.3, 1.3, 201)
    sph = WarpedProfile(s, np.sin(s), q=2)
    flat = WarpedProfile(s, s.copy(), q=2)
    i = 100
    c = curvatures_from_profile(sph, i)
    assert c.K1 == pytest.approx(1.0, abs=1e-4) and c.L1 == pytest.approx(1.0, abs=1e-4)
    c = curvatures_from_profile(flat, i)
    assert abs(c.K1) < 1e-8 and abs(c.L1) < 1e-8
    with pytest.raises(IndexError):
        curvatures_from_profile(sph, 0)


def test_profile_validation():
    with pytest.raises(ValueError):
        WarpedProfile(np.array([0.0, 0.0, 1.0]), np.ones(3), q=2)
    with pytest.raises(ValueError):
        WarpedProfile(np.linspace(0, 1, 3), np.ones(3), q=2, p=1)


def test_bryant_profile_positive_curvature(tables2):
    # in (u, v) form the soliton is u = sigma, v = V_Bry
    s = tables2.sigma_grid[1:-1:50]
    c = curvatures_from_uvw(s, tables2.V(s), du_v=tables2.V(s, 1), q=2)
    assert np.all(c.K1 > 0) and np.all(c.L1 > 0)


def test_oracle_round_sphere():
    s = np.linspace(0.5, 1.2, 29)
    h = s[1] - s[0]
    out, idx = finite_difference_riemann(WarpedProfile(s, np.sin(s), q=2))
    for c in out:
        assert c.K1 == pytest.approx(1.0, abs=10 * h * h)
        assert c.L1 == pytest.approx(1.0, abs=10 * h * h)


def test_oracle_flat():
    s = np.linspace(0.5, 1.2, 21)
    out, _ = finite_difference_riemann(WarpedProfile(s, s.copy(), q=2))
    assert max(abs(c.K1) + abs(c.L1) for c in out) < 1e-5


def _random_profile(rng, s):
    """phi, psi and their first two s-derivatives for sums of three sines."""
    def make():
        a = rng.uniform(-0.15, 0.15, 3)
        k = rng.uniform(0.5, 2.5, 3)
        c = rng.uniform(0, 2 * np.pi, 3)
        f = 1.0 + sum(a[j] * np.sin(k[j] * s + c[j]) for j in range(3))
        f1 = sum(a[j] * k[j] * np.cos(k[j] * s + c[j]) for j in range(3))
        f2 = -sum(a[j] * k[j] ** 2 * np.sin(k[j] * s + c[j]) for j in range(3))
        return f, f1, f2
    return make(), make()


def _exact(phi, psi, q, p, Sec2):
    (f, f1, f2), (g, g1, g2) = phi, psi
    L1 = (1 - f1**2) / f**2
    K1 = -f2 / f
    L2 = (Sec2 - g1**2) / g**2
    K2 = -g2 / g
    Kmix = -f1 * g1 / (f * g)
    return CurvaturePoint.assemble(L1, L2, K1, K2, Kmix, q, p)


def _oracle_error(seed, n):
    rng = np.random.default_rng(seed)
    s = np.linspace(0.5, 1.1, n)
    phi, psi = _random_profile(rng, s)
    prof = WarpedProfile(s, phi[0], q=2, psi=psi[0], p=2, Sec2=0.7)
    out, idx = finite_difference_riemann(prof, angle_step=1e-4)
    ex = _exact(tuple(x[idx] for x in phi), tuple(x[idx] for x in psi), 2, 2, 0.7)
    err = 0.0
    for f in FIELDS:
        a = np.array([getattr(c, f) for c in out])
        b = getattr(ex, f)
        err = max(err, np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))
    return err, s[1] - s[0]


@pytest.mark.parametrize("seed", range(20))
def test_oracle_self_convergence(seed):
    e1, h = _oracle_error(seed, 13)
    e2, _ = _oracle_error(seed, 25)
    assert e2 < 10 * h**2
    assert 2.5 < e1 / e2 < 6.0


def test_uvw_matches_arclength_forms():
    rng = np.random.default_rng(7)
    s = np.linspace(0.5, 1.1, 9)
    (f, f1, f2), (g, g1, g2) = _random_profile(rng, s)
    u, v, w = f**2, 4 * f1**2, g**2
    du = 2 * f * f1
    vu = 8 * f1 * f2 / du
    wu = 2 * g * g1 / du
    # d/du of w_u = (d/ds w_u) / (du/ds)
    dwu_ds = (2 * (g1**2 + g * g2) * du - 2 * g * g1 * 2 * (f1**2 + f * f2)) / du**2
    wuu = dwu_ds / du
    a = curvatures_from_uvw(u, v, w, vu, wu, wuu, q=2, p=2, Sec2=0.7)
    b = _exact((f, f1, f2), (g, g1, g2), 2, 2, 0.7)
    for name in FIELDS:
        assert np.allclose(getattr(a, name), getattr(b, name), rtol=1e-10, atol=1e-12)
