import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from warped_ricci.pinch import (ModelPinch, builtin_profiles, common_expansion,
                                degenerate_profile, get_pinch, load_pinch_file,
                                pinch_from_config, v_prish, v_tip, validate_model_pinch,
                                w_prish, wbar_tip, what_prish)
from warped_ricci.scales import DomainError, Profile, constant, log_profile, power


def test_pancake_validates():
    rep = validate_model_pinch(get_pinch("pancake"))
    for k in ("MP1", "MP3", "MP4", "RP2"):
        assert rep.conditions[k]["pass"], k
    assert rep.passed


def test_constant_fails_mp1():
    rep = validate_model_pinch(ModelPinch("c", 2, constant(0.5)))
    assert "MP1" in rep.failed()


def test_flat_exponential_fails_mp3():
    f = Profile(lambda u: u * u * np.exp(-2.0 / u))
    rep = validate_model_pinch(ModelPinch("x", 2, f), u_grid=np.geomspace(1e-2, 1e-1, 60))
    assert "MP3" in rep.failed()


def test_mp2_reported_for_positive_fiber_constant():
    p = ModelPinch("s2", 2, log_profile(0.01), p=2, W0=power(1.0, 1.0), mu_F=1.0,
                   fiber_flat=False)
    c = validate_model_pinch(p).conditions["MP2"]
    assert c["pass"] and c["c"] == pytest.approx(1.0)


def test_builtins():
    table = builtin_profiles()
    for name in ("ak-neckpinch", "pancake", "degenerate-1"):
        assert name in table
    assert table["pancake"].p == 1 and table["pancake"].mu_F == 0
    for p in table.values():
        rep = validate_model_pinch(p)
        # the degenerate profiles blow up at the pinch and are not model pinches
        assert rep.passed == p.is_model_pinch, p.name
    with pytest.raises(KeyError):
        get_pinch("nope")


def test_degenerate_profile_from_phi():
    b = 2 / 3
    prof = degenerate_profile(1)
    s = np.geomspace(1e-3, 0.5, 20)
    u = s ** (2 * b)
    # v = 4 phi_s^2 for phi = s^b
    assert np.allclose(prof(u), 4 * (b * s ** (b - 1)) ** 2, rtol=1e-12)


def test_pinch_validation_errors():
    with pytest.raises(ValueError):
        ModelPinch("x", 1, log_profile())
    with pytest.raises(ValueError):
        ModelPinch("x", 2, log_profile(), p=1)
    with pytest.raises(ValueError):
        ModelPinch("x", 2, log_profile(), p=1, W0=power(), mu_F=1.0)
    with pytest.raises(DomainError):
        validate_model_pinch(get_pinch("ak-neckpinch"), u_grid=[0.1, 0.01])


def test_prish_examples():
    p = ModelPinch("lin", 2, power(1.0, 1.0), p=1, W0=power(2.0, 1.0))
    assert v_prish(0.3, 0.1, p) == pytest.approx(5 / 6)
    assert v_prish(0.3, 0.0, p) == p.V0(0.3)
    assert w_prish(0.3, 0.0, p) == p.W0(0.3)
    with pytest.raises(DomainError):
        v_prish(0.0, 0.1, p)
    with pytest.raises(DomainError):
        what_prish(0.3, 0.1, get_pinch("ak-neckpinch"))


@given(u0=st.floats(0.01, 0.5), frac=st.floats(0.0, 0.9))
def test_prish_frozen_reaction(u0, frac):
    p = get_pinch("ak-neckpinch")
    t = frac * u0 / p.mu
    u = u0 - p.mu * t
    assert v_prish(u, t, p) == pytest.approx(p.V0(u0) * u0 / u, rel=1e-12)


@given(u=st.floats(1e-8, 0.5))
def test_prish_initial_identity(u):
    p = get_pinch("pancake")
    assert v_prish(u, 0.0, p) == p.V0(u)
    assert w_prish(u, 0.0, p) == p.W0(u)


def test_tip_limits(tables2):
    p = get_pinch("pancake")
    sigma = np.array([0.0, 1.0, 10.0])
    t = 1e-300
    assert np.allclose(v_tip(sigma, t, p, tables2), tables2.V(sigma), atol=1e-3)
    beta = p.scales.beta(1e-4)
    assert v_tip(0.0, 1e-4, p, tables2) == pytest.approx(4 + beta * tables2.P(0.0))
    w = wbar_tip(sigma, 1e-4, p, tables2)
    assert w[0] == 1.0 and np.all(w >= 1.0)


def test_tip_matches_common_expansion(tables2):
    p = get_pinch("ak-neckpinch")
    t = 1e-4
    nu = p.scales.nu(t)
    sigma = np.geomspace(200, 0.2 / nu, 40)
    vt = v_tip(sigma, t, p, tables2)
    vc, _ = common_expansion(sigma, t, p)
    rel = np.abs(vt - vc) / vt
    # closeness is controlled by (nu sigma)^2 + 1/sigma + nu
    bound = (nu * sigma) ** 2 + 1 / sigma + nu
    assert np.max(rel / bound) < 5


def test_common_expansion_constant_profile():
    p = ModelPinch("c", 2, constant(0.2))
    sigma = np.array([1.0, 2.0])
    v, w = common_expansion(sigma, 0.1, p)
    assert np.allclose(v, 2 / sigma * (1 + 0.2 * sigma / 2))
    assert w is None
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        common_expansion(np.array([10.0]), 0.1, p)
    assert rec


def test_prish_vs_common_second_order():
    p = get_pinch("ak-neckpinch")
    ratios = []
    for t in (1e-3, 1e-4, 1e-5):
        sc = p.scales
        nu = sc.nu(t)
        sigma = np.linspace(0.01, 0.3, 30) / nu
        u = sigma * sc.alpha(t)
        vp = v_prish(u, t, p)
        vc, _ = common_expansion(sigma, t, p)
        ratios.append(np.max(np.abs(vp - vc) / vp / (nu * sigma) ** 2))
    # the measured constant K stays bounded as t decreases
    assert max(ratios) < 5 and ratios[-1] <= 1.5 * ratios[0]


def test_config_roundtrip(tmp_path):
    sec = {"name": "mine", "q": "3", "p": "1", "V0": "log a=0.02", "W0": "power c=1 p=1",
           "mu_F": "0", "fiber_flat": "yes", "lambda_ratio": "0"}
    p = pinch_from_config(sec)
    assert p.q == 3 and p.p == 1 and p.V0.params == {"a": 0.02}
    f = tmp_path / "p.cfg"
    f.write_text("[pinch]\n" + "\n".join(f"{k} = {v}" for k, v in sec.items()))
    assert load_pinch_file(f).spec() == p.spec()
    assert pinch_from_config({"builtin": "pancake"}).name == "pancake"
    with pytest.raises(FileNotFoundError):
        load_pinch_file(tmp_path / "missing.cfg")
