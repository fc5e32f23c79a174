"""Model-pinch initial data and the two families of approximate solutions."""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import theilslopes

from .scales import DomainError, Profile, ScaleContext, make_profile, log_profile, power

#: slope tolerance for the flat-trend tests
TREND_TOL = 0.2


@dataclass(frozen=True)
class ModelPinch:
    name: str
    q: int
    V0: Profile
    p: int = 0
    W0: Optional[Profile] = None
    mu_F: float = 0.0
    fiber_flat: bool = True
    lambda_ratio: Optional[float] = None
    Sec2: float = 0.0
    u_star_hint: float = 0.05
    is_model_pinch: bool = True

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 2:
            raise ValueError("q must be an integer >= 2")
        if self.p > 0 and self.W0 is None:
            raise ValueError("a fiber (p > 0) needs a W0 profile")
        if self.p == 1 and self.mu_F != 0:
            raise ValueError("a one-dimensional fiber is flat, so mu_F must be 0")

    @property
    def mu(self) -> float:
        return 2.0 * (self.q - 1)

    @property
    def scales(self) -> ScaleContext:
        return ScaleContext(self.V0, self.q, self.mu_F, self.W0)

    def spec(self) -> dict:
        out = {"name": self.name, "q": self.q, "p": self.p, "mu_F": self.mu_F,
               "fiber_flat": self.fiber_flat, "V0": self.V0.spec()}
        if self.W0 is not None:
            out["W0"] = self.W0.spec()
        return out


# ---------------------------------------------------------------------------
# validation

@dataclass
class ValidationReport:
    pinch: str
    conditions: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.conditions.values() if c["pass"] is not None)

    def failed(self):
        return [k for k, c in self.conditions.items() if c["pass"] is False]

    def as_dict(self):
        return {"pinch": self.pinch, "passed": self.passed, "conditions": self.conditions}


def _trend(u, y):
    """Theil-Sen slope of ``log y`` against ``log u``."""
    res = theilslopes(np.log(y), np.log(u))
    return float(res[0])


def _mp3_ratio(prof: Profile, u):
    val = prof(u)
    return (np.abs(u * prof.d1(u)) + np.abs(u * u * prof.d2(u))) / val


def _mp3(prof, u):
    r = _mp3_ratio(prof, u)
    lower = u <= np.sqrt(u[0] * u[-1])
    slope = _trend(u[lower], np.maximum(r[lower], 1e-300))
    # the ratio may not grow as u decreases (positive slope means it shrinks)
    ok = bool(np.all(np.isfinite(r)) and slope > -TREND_TOL)
    return {"pass": ok, "C": float(np.max(r)), "trend_slope": slope}


def validate_model_pinch(pinch: ModelPinch, u_grid=None) -> ValidationReport:
    """Check the model-pinch conditions on a log-spaced grid.

    The asymptotic statements are turned into measured constants plus trend
    tests along ``u -> 0``.
    """
    u = np.geomspace(1e-12, 1e-1, 221) if u_grid is None else np.asarray(u_grid, float)
    if np.any(u <= 0) or np.any(np.diff(u) <= 0):
        raise DomainError("u_grid must be positive and increasing")
    rep = ValidationReport(pinch.name)
    V = pinch.V0(u)
    W = pinch.W0(u) if pinch.W0 is not None else None

    inc = bool(np.all(np.diff(V) > 0))
    ratio = float(V[0] / V[-1])
    rep.conditions["MP1"] = {"pass": inc and ratio < 0.5,
                             "monotone": inc, "V0_ratio_min_over_max": ratio}

    if pinch.mu_F > 0:
        c = float(np.min(W / u) * pinch.mu / pinch.mu_F - 1.0)
        rep.conditions["MP2"] = {"pass": c > 0, "c": c}
    else:
        rep.conditions["MP2"] = {"pass": None, "note": "mu_F <= 0, not required"}

    mp3 = {"V0": _mp3(pinch.V0, u)}
    if W is not None:
        mp3["W0"] = _mp3(pinch.W0, u)
    rep.conditions["MP3"] = {"pass": all(m["pass"] for m in mp3.values()), **mp3}

    pos = bool(np.all(V > 0) and np.all(np.isfinite(V)))
    if W is not None:
        pos = pos and bool(np.all(W > 0) and np.all(np.isfinite(W)))
    lower = u <= np.sqrt(u[0] * u[-1])
    vslope = _trend(u[lower], V[lower])
    bounded = bool(vslope > -TREND_TOL and np.max(V) < np.inf)
    rep.conditions["MP4"] = {"pass": pos and bounded, "positive": pos,
                             "V0_max": float(np.max(V)), "V0_trend_slope": vslope}

    if pinch.p > 0 and pinch.lambda_ratio is not None:
        m = float(np.min(W / u))
        rep.conditions["RP1"] = {"pass": m >= pinch.lambda_ratio,
                                 "min_W0_over_u": m, "lambda_ratio": pinch.lambda_ratio}
    else:
        rep.conditions["RP1"] = {"pass": None, "note": "no fiber curvature ratio given"}

    if pinch.p > 0 and pinch.mu_F == 0 and pinch.fiber_flat:
        r = W / (u * V)
        grows = bool(np.all(np.diff(r) < 0))
        rep.conditions["RP2"] = {"pass": grows and r[0] > 2 * r[-1],
                                 "ratio_at_min_u": float(r[0]),
                                 "ratio_at_max_u": float(r[-1])}
    else:
        rep.conditions["RP2"] = {"pass": None, "note": "only for flat fibers"}
    return rep


# ---------------------------------------------------------------------------
# profile library

def degenerate_profile(k: int) -> Profile:
    """``V0`` for ``phi = s**b``, ``b = 2/(2k+1)``: ``V0 = 4 b^2 u^((b-1)/b)``."""
    b = 2.0 / (2 * k + 1)
    prof = power(4 * b * b, (b - 1) / b)
    prof.name = "power"
    return prof


#: neckpinch amplitude used by the bundled profiles
AK_AMPLITUDE = 0.01


def builtin_profiles() -> dict:
    ak = ModelPinch("ak-neckpinch", q=2, V0=log_profile(AK_AMPLITUDE))
    pancake = ModelPinch("pancake", q=2, V0=log_profile(AK_AMPLITUDE), p=1,
                         W0=power(1.0, 1.0), mu_F=0.0, fiber_flat=True,
                         lambda_ratio=0.0)
    out = {ak.name: ak, pancake.name: pancake}
    for k in (1, 2):
        out[f"degenerate-{k}"] = ModelPinch(f"degenerate-{k}", q=2,
                                            V0=degenerate_profile(k),
                                            is_model_pinch=False)
    return out


def get_pinch(name: str) -> ModelPinch:
    table = builtin_profiles()
    if name not in table:
        raise KeyError(f"unknown pinch {name!r}; builtins are {sorted(table)}")
    return table[name]


def _parse_profile(text: str) -> Profile:
    # "log a=0.25" or "power c=1 p=1"
    parts = text.split()
    params = {}
    for item in parts[1:]:
        key, _, val = item.partition("=")
        params[key] = float(val)
    return make_profile(parts[0], **params)


def pinch_from_config(section) -> ModelPinch:
    """Build a pinch from a config section (mapping of strings)."""
    if "builtin" in section:
        return get_pinch(section["builtin"])
    q = int(section.get("q", 2))
    p = int(section.get("p", 0))
    V0 = _parse_profile(section["V0"])
    W0 = _parse_profile(section["W0"]) if "W0" in section else None
    flat = str(section.get("fiber_flat", "true")).lower() in ("1", "true", "yes")
    lr = section.get("lambda_ratio")
    return ModelPinch(section.get("name", "custom"), q=q, V0=V0, p=p, W0=W0,
                      mu_F=float(section.get("mu_F", 0.0)), fiber_flat=flat,
                      lambda_ratio=float(lr) if lr is not None else None,
                      Sec2=float(section.get("Sec2", 0.0)))


def load_pinch_file(path) -> ModelPinch:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)
    return pinch_from_config(cp["pinch"])


# ---------------------------------------------------------------------------
# approximate solutions

def v_prish(u, t, pinch: ModelPinch):
    """``(u + mu t)/u * V0(u + mu t)``."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(np.asarray(t) < 0):
        raise DomainError("v_prish needs u > 0 and t >= 0")
    uh = u + pinch.mu * np.asarray(t, dtype=float)
    return uh / u * pinch.V0(uh)


def what_prish(u, t, pinch: ModelPinch):
    """``W0(u + mu t)``, the shifted fiber size."""
    u = np.asarray(u, dtype=float)
    if pinch.W0 is None:
        raise DomainError("pinch has no fiber")
    return pinch.W0(u + pinch.mu * np.asarray(t, dtype=float))


def w_prish(u, t, pinch: ModelPinch):
    return what_prish(u, t, pinch) - pinch.mu_F * np.asarray(t, dtype=float)


def v_tip(sigma, t, pinch: ModelPinch, tables):
    """``V_Bry(sigma) + beta(t) V_Pert(sigma)``."""
    beta = pinch.scales.beta(t)
    return tables.V(sigma) + beta * tables.P(sigma)


def wbar_tip(sigma, t, pinch: ModelPinch, tables):
    """``1 + (log omega)_theta W_Pert(sigma)``."""
    lw = pinch.scales.log_omega_theta(t)
    return 1.0 + lw * tables.W(sigma)


def common_expansion(sigma, t, pinch: ModelPinch, warn: bool = True):
    """First-order expansions shared by the tip and productish forms."""
    sc = pinch.scales
    sigma = np.asarray(sigma, dtype=float)
    nu = sc.nu(t)
    ns = nu * sigma
    if warn and np.any(ns > 0.5):
        import warnings
        warnings.warn("common_expansion used with nu*sigma > 0.5", RuntimeWarning)
    mu = pinch.mu
    v = mu / sigma * (1 + (1 + sc.nu_log1(t)) * ns / mu)
    wbar = 1 + ns * sc.omega_log1(t) / mu if pinch.W0 is not None else None
    return v, wbar
