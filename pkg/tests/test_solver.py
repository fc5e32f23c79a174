import filecmp

import numpy as np
import pytest
from scipy.interpolate import PchipInterpolator

from warped_ricci import solver
from warped_ricci.barriers import params_for
from warped_ricci.pinch import v_prish, v_tip
from warped_ricci.scales import DomainError
from warped_ricci.solver import (CFLViolation, ConfigError, CoordinateBreakdown, GridSpec,
                                 ResolutionError)

SMALL = GridSpec(n_nodes=500, tip_nodes=40, n_uniform=80)


def test_eta_cutoff():
    x = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    e = solver.eta(x)
    assert np.all(e[:3] == 1.0) and np.all(e[-2:] == 0.0)
    assert e[3] == pytest.approx(0.5)
    xs = np.linspace(0.9, 2.1, 400)
    assert np.all(np.diff(solver.eta(xs)) <= 0)


def test_graded_grid():
    phi = solver.graded_grid(0.3, 1e-4, 600, 50)
    h = np.diff(phi)
    assert phi[0] == 0 and phi[-1] == 0.3 and phi.size == 600
    assert np.allclose(h[:50], 1e-4)
    assert np.all(np.diff(h[50:-1]) > 0)
    assert np.array_equal(solver.graded_grid(0.3, 0.1, 11, 50), np.linspace(0, 0.3, 11))
    with pytest.raises(ConfigError):
        solver.graded_grid(0.3, 1e-12, 60, 50)


def test_cylinder_harness():
    for p, mu_F in ((0, 0.0), (1, 0.0), (1, 0.5)):
        ts, u, w, u_ex, w_ex = solver.cylinder_harness(p=p, mu_F=mu_F)
        # v = 1e-6 is the only source of deviation from the flat reaction
        assert np.max(np.abs(u - u_ex) / u_ex) <= 1e-6
        assert np.max(np.abs(w - w_ex) / w_ex) <= 1e-6


@pytest.mark.parametrize("method", ["rk2", "imex"])
def test_round_sphere(method):
    q, r0 = 2, 1.0
    T = r0**2 / (4 * q)
    st = solver.sphere_state(q=q, r0=r0, n_nodes=200)
    tr = solver.run(st, T, output_times=np.linspace(T / 10, T, 10), method=method)
    for s in tr.snapshots:
        assert s.L[0] * (r0**2 - 2 * q * s.t) == pytest.approx(1.0, rel=5e-3)
    d = solver.diagnostics(tr.snapshots[-1])
    assert d.sup_rm == pytest.approx(1 / (r0**2 - 2 * q * T), rel=1e-2)


def test_bryant_drift_second_order(tables500):
    drifts = []
    for n in (100, 200, 400):
        st = solver.bryant_state(tables500[2], n_nodes=n)
        # the soliton is stationary, so the discrete rate is pure truncation
        trunc = np.max(np.abs(solver.rhs(st)[0]))
        T = 0.05
        s = solver.run(st, T, output_times=[T]).snapshots[-1]
        drift = np.max(np.abs(s.L - st.L)) / T
        drifts.append(drift)
        assert drift <= 10 * trunc
    assert 3 < drifts[0] / drifts[1] < 5 and 3 < drifts[1] / drifts[2] < 5


def test_equation_crosscheck():
    for seed in range(5):
        for p, mu_F in ((0, 0.0), (1, 0.0), (2, 1.0)):
            e = solver.equation_crosscheck(seed=seed, p=p, mu_F=mu_F)
            assert e["L"] < 1e-10 and e["w"] < 1e-10


def test_step_guards():
    st = solver.sphere_state(n_nodes=50)
    with pytest.raises(CFLViolation):
        solver.step(st, 1.0)
    bad = st.evolve(0.0, st.L * 1e6, None)
    with pytest.raises(CoordinateBreakdown):
        solver.step(bad, solver.cfl_dt(bad) * 0.5)
    with pytest.raises(ValueError):
        solver.run(st, 0.0)


def test_mollified_initial_pieces(ak, tables2):
    prm = params_for(ak)
    m, T1 = 1e-2, 1e-4
    st = solver.mollified_initial(ak, m, T1, GridSpec(), tables2, prm)
    u, v = st.u, st.v
    assert v[0] == 4.0
    far = u > 2 * m
    assert np.allclose(v[far], ak.V0(u[far]), rtol=1e-12)
    sc = ak.scales
    sigma = st.sigma
    zeta = np.sqrt(sc.nu(T1)) * sigma
    tip = (zeta < 2 * prm.zeta_star) & (u < m)
    assert np.allclose(v[tip], v_tip(sigma[tip], T1, ak, tables2), rtol=1e-6, atol=1e-9)
    mid = (zeta > 4 * prm.zeta_star) & (u < m)
    assert np.allclose(v[mid], v_prish(u[mid], T1, ak), rtol=1e-12)
    assert np.count_nonzero(sigma <= 4 * prm.zeta_star / np.sqrt(sc.nu(T1))) >= 0.3 * u.size
    assert np.count_nonzero(st.phi <= np.sqrt(sc.alpha(T1))) >= 20


def test_mollified_initial_errors(ak, tables2):
    with pytest.raises(ConfigError):
        solver.mollified_initial(ak, 1e-3, 1e-3, SMALL, tables2)
    with pytest.raises(ConfigError):
        solver.mollified_initial(ak, 1e-2, 1e-4, SMALL, None)
    with pytest.raises(ConfigError):
        solver.mollified_initial(ak, 1e-2, 1e-4, GridSpec(n_nodes=100, tip_nodes=2,
                                                          n_uniform=4), tables2)


def test_domain_guard(ak, tables2):
    st = solver.mollified_initial(ak, 1e-2, 1e-4, SMALL, tables2)
    with pytest.raises(DomainError):
        solver.run(st, 1.0)


def test_rescale_tip_roundtrip(pancake, tables2):
    st = solver.mollified_initial(pancake, 1e-2, 1e-4, GridSpec(), tables2)
    g, v, wbar = solver.rescale_tip(st)
    assert np.allclose(v, v_tip(g, 1e-4, pancake, tables2), atol=1e-6)
    assert np.all(wbar >= 1.0 - 1e-9)
    with pytest.raises(ResolutionError):
        solver.rescale_tip(st, sigma_view=1e9)


def test_snapshot_roundtrip_and_determinism(ak, tables2, tmp_path):
    prm = params_for(ak)
    paths = []
    for k in range(2):
        st = solver.mollified_initial(ak, 1e-2, 1e-4, SMALL, tables2, prm)
        tr = solver.run(st, 2e-4, output_times=[1e-4, 1.5e-4, 2e-4])
        p = tmp_path / f"s{k}.csv"
        solver.write_snapshots(tr, p)
        paths.append(p)
    assert filecmp.cmp(*paths, shallow=False)
    back = solver.read_snapshots(paths[0], pinch=ak, c_sub=st.c_sub)
    assert [b.t for b in back] == list(tr.times)
    for a, b in zip(tr.snapshots, back):
        assert np.allclose(b.v, a.v, rtol=0, atol=1e-14)
        assert np.array_equal(b.phi, a.phi)
    assert np.all(np.diff(tr.times) > 0)


def test_self_convergence(ak, tables2):
    prm = params_for(ak)
    Te = 3e-4
    res = []
    for k in (1, 2, 4):
        gs = GridSpec(n_nodes=500 * k, tip_nodes=40 * k, n_uniform=80 * k)
        st = solver.mollified_initial(ak, 1e-2, 1e-4, gs, tables2, prm)
        res.append(solver.run(st, Te, output_times=[Te], c_dt=0.1 / k).snapshots[-1])
    ref = res[0].phi
    on = [PchipInterpolator(s.phi, s.v)(ref) for s in res]
    d1 = np.max(np.abs(on[0] - on[1]))
    d2 = np.max(np.abs(on[1] - on[2]))
    assert d1 / d2 >= 3


def test_boundary_position_sensitivity(ak, tables2):
    # the truncated domain is pinned to the productish approximation; moving
    # the pin must change the tip much less than the tip's own deviation
    prm = params_for(ak)
    Te = 1e-3
    prof = {}
    for us in (0.05, 0.035):
        gs = GridSpec(n_nodes=1000, tip_nodes=80, n_uniform=160, u_star=us)
        st = solver.mollified_initial(ak, 1e-2, 1e-4, gs, tables2, prm)
        g, prof[us], _ = solver.rescale_tip(solver.run(st, Te, output_times=[Te]).snapshots[-1])
    d = np.max(np.abs(prof[0.05] - prof[0.035]))
    dev = np.max(np.abs(prof[0.05] - tables2.V(g)))
    assert d < 0.5 * dev
    assert d < ak.scales.nu(Te)


def test_headline_run_invariants(ak_runs):
    for m, tr in ak_runs.items():
        assert np.all(np.diff(tr.times) > 0)
        for s, rec in zip(tr.snapshots, tr.monitor):
            assert np.all(s.v[1:] > 0) and np.all(s.v <= 4 + 1e-9)
            assert rec["barricade"]["passed"]


def test_tip_curvature_bounded_along_run(ak_runs):
    tr = ak_runs[1e-2]
    sc = tr.snapshots[0].pinch.scales
    r = [solver.diagnostics(s).sup_rm * s.t * sc.nu(s.t) for s in tr.snapshots[1:]]
    assert max(r) / min(r) < 3


def test_pancake_wbar_flattens(pancake_run):
    devs = []
    for s in pancake_run.snapshots[-5:]:
        _, _, wbar = solver.rescale_tip(s)
        devs.append(np.max(np.abs(wbar - 1)))
    assert max(devs) < 0.1
