"""Barrier families for the productish and tip regions, and residual checks.

All functions are vectorised in their spatial argument.  The tip barriers use
the rescaled coordinate ``sigma = u / alpha(t)`` and the normalised fiber size
``wbar = (w + mu_F t) / omega(t)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, asdict, field, replace
from typing import Optional

import numpy as np

from .bryant import BryantTables, OutOfTable
from .pinch import ModelPinch, v_prish, what_prish
from .scales import DomainError, Profile, sigma_pow

#: relative step for centered differences in t
DT_REL = 1e-3


@dataclass(frozen=True)
class BarrierParams:
    D: float = 10.0
    u_star: float = 0.05
    sigma_star: float = 40.0
    zeta_star: float = 20.0
    eps_v: float = 0.1
    eps_w: float = 5.0
    delta: Optional[float] = None
    mu: float = 2.0
    T_star: float = 1e-2
    c_margin: float = 0.01
    c_ytip: float = 0.01

    def __post_init__(self):
        if self.delta is None:
            object.__setattr__(self, "delta", default_delta(self.eps_v, self.zeta_star,
                                                            self.D, self.mu))
        for name in ("D", "eps_v", "eps_w", "delta", "zeta_star", "sigma_star"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def with_(self, **kw) -> "BarrierParams":
        return replace(self, **kw)

    def as_dict(self):
        return asdict(self)


def default_delta(eps_v: float, zeta_star: float, D: float = 10.0,
                  mu: float = 2.0) -> float:
    """Half the largest delta for which the tip gap beats the productish gap.

    In ``sigma V`` units the tip barriers are ``eps_v nu^1/2 (mu/delta - zeta)``
    apart at ``zeta = nu^1/2 sigma`` while the productish ones are
    ``D mu^2 nu^1/2 / zeta`` apart; balancing at ``zeta = 2 zeta_*`` and
    ``zeta_*`` gives the bound.
    """
    return 0.5 * mu / (2.0 * zeta_star + D * mu * mu / (eps_v * zeta_star))


def legacy_delta(eps_v: float, zeta_star: float) -> float:
    """The rule ``min(0.1, eps_v zeta_* / 10)``; kept for comparison runs."""
    return min(0.1, eps_v * zeta_star / 10.0)


def params_for(pinch, **kw) -> "BarrierParams":
    """Defaults with ``mu`` taken from the pinch."""
    return BarrierParams(mu=pinch.mu, **kw)


# ---------------------------------------------------------------------------
# productish region

def prish_barriers(u, t, pinch: ModelPinch, params: BarrierParams):
    """``(V-, V+, W-, W+)``; the w-barriers are ``(1 -/+ D V) W_hat - mu_F t``.

    For a pinch without fiber the w entries are None.
    """
    V = v_prish(u, t, pinch)
    lo, hi = 1 - params.D * V, 1 + params.D * V
    if pinch.W0 is None:
        return lo * V, hi * V, None, None
    Wh = what_prish(u, t, pinch)
    shift = pinch.mu_F * np.asarray(t, dtype=float)
    return lo * V, hi * V, lo * Wh - shift, hi * Wh - shift


def prish_barriers_sigma(sigma, t, pinch, params):
    """Productish barriers in tip units: ``v`` and ``wbar``."""
    sc = pinch.scales
    u = np.asarray(sigma, dtype=float) * sc.alpha(t)
    Vm, Vp, Wm, Wp = prish_barriers(u, t, pinch, params)
    if Wm is None:
        return Vm, Vp, None, None
    om = sc.omega(t)
    shift = pinch.mu_F * t
    return Vm, Vp, (Wm + shift) / om, (Wp + shift) / om


# ---------------------------------------------------------------------------
# tip region

def k_pm(t, pinch, params):
    s = params.eps_v * np.sqrt(pinch.scales.nu(t)) / params.delta if params.delta > 0 else 0.0
    return 1.0 - s, 1.0 + s


def _vk(tables, sigma, k, der=0):
    """``V_kBry`` and its sigma-derivatives."""
    return k**der * tables.V(k * sigma, der)


def _pk(tables, sigma, k, der=0):
    """``V_kPert = k^-1 V_Pert(k sigma)`` and sigma-derivatives."""
    return k ** (der - 1) * tables.P(k * sigma, der)


def tip_v_barrier(sigma, t, pinch, params, tables, sign=+1, der=0):
    """``V^+`` (sign=+1) or ``V^-`` (sign=-1) and its sigma-derivatives."""
    sc = pinch.scales
    nu = sc.nu(t)
    k = 1.0 - sign * params.eps_v * np.sqrt(nu) / params.delta
    coef = sc.beta(t) - sign * params.eps_v * nu
    return _vk(tables, sigma, k, der) + coef * _pk(tables, sigma, k, der)


def tip_w_barrier(sigma, t, pinch, params, tables, sign=+1, der=0):
    sc = pinch.scales
    nu = sc.nu(t)
    lw = sc.log_omega_theta(t) if pinch.W0 is not None else 0.0
    coef = lw - sign * params.delta * params.eps_w * nu
    base = (1.0 + sign * params.eps_w * np.sqrt(nu)) if der == 0 else 0.0
    return base + coef * tables.W(sigma, der)


def tip_barriers(sigma, t, pinch: ModelPinch, params: BarrierParams, tables: BryantTables):
    """``(V-, V+, Wbar-, Wbar+)`` at ``(sigma, t)``."""
    Vm = tip_v_barrier(sigma, t, pinch, params, tables, -1)
    Vp = tip_v_barrier(sigma, t, pinch, params, tables, +1)
    Wm = tip_w_barrier(sigma, t, pinch, params, tables, -1)
    Wp = tip_w_barrier(sigma, t, pinch, params, tables, +1)
    return Vm, Vp, Wm, Wp


def separation_ratio(sigma, t, pinch, params, tables):
    """``(V+ - V-) / (delta^-1 eps_v nu^1/2 sigma^{1,-1})``."""
    Vm, Vp, _, _ = tip_barriers(sigma, t, pinch, params, tables)
    nu = pinch.scales.nu(t)
    scale = params.eps_v / params.delta * np.sqrt(nu) * sigma_pow(sigma, 1, -1)
    return (Vp - Vm) / scale


# ---------------------------------------------------------------------------
# buckling

@dataclass
class BucklingReport:
    t: float
    pinch: str
    inequalities: dict = field(default_factory=dict)
    outside_T_star: bool = False

    @property
    def passed(self) -> bool:
        return (not self.outside_T_star) and all(
            r["pass"] for r in self.inequalities.values())

    def worst(self):
        vals = [r["worst_margin"] for r in self.inequalities.values()]
        return max(vals) if vals else float("nan")

    def as_dict(self):
        return {"t": self.t, "pinch": self.pinch, "passed": self.passed,
                "outside_T_star": self.outside_T_star,
                "inequalities": self.inequalities}

    def to_json(self, **kw):
        return json.dumps(self.as_dict(), **kw)


def _record(report, name, sig, margin):
    # margin <= 0 means the inequality holds; we store the largest (worst)
    i = int(np.argmax(margin))
    report.inequalities[name] = {"worst_margin": float(margin[i]),
                                 "sigma": float(sig[i]),
                                 "pass": bool(margin[i] < 0)}


def check_buckling(t, pinch: ModelPinch, params: BarrierParams,
                   tables: BryantTables, n: int = 64) -> BucklingReport:
    """Evaluate the eight ordering inequalities on both bands.

    Margins are normalised by ``V_prish`` (or ``Wbar_prish``) so they are
    comparable across ``t``.
    """
    rep = BucklingReport(float(t), pinch.name)
    if t >= params.T_star:
        rep.outside_T_star = True
        return rep
    nu = pinch.scales.nu(t)
    z = params.zeta_star / np.sqrt(nu)
    band1 = np.linspace(z, 2 * z, n)
    band2 = np.linspace(0.5 * params.sigma_star, params.sigma_star, n)
    for label, sig, tip_outer in (("tip_band", band1, True), ("prish_band", band2, False)):
        pVm, pVp, pWm, pWp = prish_barriers_sigma(sig, t, pinch, params)
        tVm, tVp, tWm, tWp = tip_barriers(sig, t, pinch, params, tables)
        ref = v_prish(sig * pinch.scales.alpha(t), t, pinch)
        s = 1.0 if tip_outer else -1.0
        # tip_outer: tip+ > prish+ and tip- < prish-
        _record(rep, f"{label}:V+", sig, s * (pVp - tVp) / ref)
        _record(rep, f"{label}:V-", sig, s * (tVm - pVm) / ref)
        if pWm is not None:
            _record(rep, f"{label}:W+", sig, s * (pWp - tWp))
            _record(rep, f"{label}:W-", sig, s * (tWm - pWm))
    return rep


# ---------------------------------------------------------------------------
# generic frozen-reaction supersolutions

def generic_supersolution(Z0: Profile, a: float, D: float, u, t, pinch: ModelPinch):
    """``Z = Q^a Z0(u_hat)`` with ``Q = u_hat/u`` and ``Z+- = (1 +- D V) Z``."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise DomainError("u must be positive")
    uh = u + pinch.mu * np.asarray(t, dtype=float)
    Z = (uh / u) ** a * Z0(uh)
    V = v_prish(u, t, pinch)
    return (1 - D * V) * Z, Z, (1 + D * V) * Z


# ---------------------------------------------------------------------------
# tip-region sub/supersolution residuals

def F_sigma(v, dv, d2v, sigma, mu, kappa_sq=0.0):
    """``sigma^-1 Q[v,v] + sigma^-1 L[v] - 2 kappa^2 v`` in sigma units."""
    Q = v * sigma**2 * d2v - 0.5 * (sigma * dv) ** 2 - 0.25 * mu * v * v
    Lop = mu * v + mu * sigma * dv
    return Q / sigma + Lop / sigma - 2.0 * kappa_sq * v


def R_sigma(z1, z2, v, sigma, mu):
    """``sigma^-1 R[z, v] = sigma v z'' + (mu + v) z'``."""
    return sigma * v * z2 + (mu + v) * z1


def kappa_tilde_cap(sigma, t, pinch, params):
    """The tip-region cap ``c_ytip eps_v nu sigma^{1,0}`` (zero without fiber)."""
    if pinch.p == 0:
        return np.zeros_like(np.asarray(sigma, dtype=float))
    return params.c_ytip * params.eps_v * pinch.scales.nu(t) * sigma_pow(sigma, 1, 0)


def _dtheta_fd(fun, t, alpha):
    h = t * DT_REL
    return alpha * (fun(t + h) - fun(t - h)) / (2 * h)


def dtheta_v_barrier(sigma, t, pinch, params, tables, sign=+1, method="fd"):
    """``d/dtheta`` of the tip v-barrier at fixed sigma."""
    sc = pinch.scales
    alpha = sc.alpha(t)
    if method == "fd":
        return _dtheta_fd(lambda s: tip_v_barrier(sigma, s, pinch, params, tables, sign),
                          t, alpha)
    if method != "analytic":
        raise ValueError(method)
    nu = sc.nu(t)
    dnu = sc.nu_log1(t) * nu / t
    root = np.sqrt(nu)
    k = 1.0 - sign * params.eps_v * root / params.delta
    dk = -sign * params.eps_v / params.delta * 0.5 * dnu / root
    coef = sc.beta(t) - sign * params.eps_v * nu
    dcoef = sc.dbeta(t) - sign * params.eps_v * dnu
    ks = k * sigma
    dV = tables.V(ks, 1) * sigma * dk
    P, dP = tables.P(ks), tables.P(ks, 1)
    dpk = -dk / k**2 * P + dP * sigma * dk / k
    return alpha * (dV + dcoef * P / k + coef * dpk)


def dtheta_w_barrier(sigma, t, pinch, params, tables, sign=+1, method="fd"):
    sc = pinch.scales
    alpha = sc.alpha(t)
    if method == "fd":
        return _dtheta_fd(lambda s: tip_w_barrier(sigma, s, pinch, params, tables, sign),
                          t, alpha)
    if method != "analytic":
        raise ValueError(method)
    nu = sc.nu(t)
    dnu = sc.nu_log1(t) * nu / t
    # (log omega)_theta = <omega>_1 nu ; differentiate both factors
    om = sc.omega_profile
    tt = np.asarray(t, dtype=float)
    l1 = sc.omega_log1(t)
    dl1 = (om.d1(tt) + tt * om.d2(tt)) / om(tt) - tt * (om.d1(tt) / om(tt)) ** 2
    dlw = dl1 * nu + l1 * dnu
    base = sign * params.eps_w * 0.5 * dnu / np.sqrt(nu)
    return alpha * (base + (dlw - sign * params.delta * params.eps_w * dnu) * tables.W(sigma))


def vsupsoln_residual(sigma, t, pinch, params, tables, kappa_tilde_sq=None,
                      sign=+1, method="fd"):
    """``dV/dtheta - F_sigma[V, kappa] - beta sigma V' - sign c eps_v nu sigma^{1,-1}``.

    Nonnegative for the supersolution (sign=+1); for sign=-1 the mirror
    quantity (negated) is returned, so nonnegative again means success.
    """
    sigma = np.asarray(sigma, dtype=float)
    sc = pinch.scales
    if np.any(sigma >= params.zeta_star / np.sqrt(sc.nu(t))):
        raise DomainError("sigma outside the tip region")
    if kappa_tilde_sq is None:
        kappa_tilde_sq = kappa_tilde_cap(sigma, t, pinch, params)
    V = tip_v_barrier(sigma, t, pinch, params, tables, sign)
    dV = tip_v_barrier(sigma, t, pinch, params, tables, sign, der=1)
    d2V = tip_v_barrier(sigma, t, pinch, params, tables, sign, der=2)
    lhs = (dtheta_v_barrier(sigma, t, pinch, params, tables, sign, method)
           - F_sigma(V, dV, d2V, sigma, pinch.mu, kappa_tilde_sq)
           - sc.beta(t) * sigma * dV)
    margin = params.c_margin * params.eps_v * sc.nu(t) * sigma_pow(sigma, 1, -1)
    return sign * lhs - margin


def D_operator(wbar, dwbar, d2wbar, dtheta_wbar, v, sigma, t, pinch):
    sc = pinch.scales
    lw = sc.log_omega_theta(t) if pinch.W0 is not None else 0.0
    shift = pinch.mu_F * t / sc.omega(t) if pinch.W0 is not None else 0.0
    rhs = (R_sigma(dwbar, d2wbar, v, sigma, pinch.mu)
           - v * sigma * dwbar**2 / (wbar - shift)
           + sc.beta(t) * sigma * dwbar - lw * wbar)
    return dtheta_wbar - rhs


def wsupsoln_residual(sigma, t, pinch, params, tables, v_field=None,
                      sign=+1, method="fd"):
    """``sign * D(Wbar^sign, v) - 1/2 delta eps_w nu``.

    ``v_field(sigma, t)`` defaults to the tip approximation.
    """
    sigma = np.asarray(sigma, dtype=float)
    sc = pinch.scales
    if pinch.W0 is None:
        raise DomainError("wsupsoln_residual needs a fiber")
    if np.any(sigma >= params.zeta_star / np.sqrt(sc.nu(t))):
        raise DomainError("sigma outside the tip region")
    if v_field is None:
        v = tables.V(sigma) + sc.beta(t) * tables.P(sigma)
    else:
        v = v_field(sigma, t)
    W = tip_w_barrier(sigma, t, pinch, params, tables, sign)
    dW = tip_w_barrier(sigma, t, pinch, params, tables, sign, der=1)
    d2W = tip_w_barrier(sigma, t, pinch, params, tables, sign, der=2)
    dth = dtheta_w_barrier(sigma, t, pinch, params, tables, sign, method)
    Dval = D_operator(W, dW, d2W, dth, v, sigma, t, pinch)
    return sign * Dval - 0.5 * params.delta * params.eps_w * sc.nu(t)


def fiber_denominator_bound(sigma, t, pinch, params, tables):
    """``max 1/(Wbar^+- - mu_F t/omega)`` over the tip region grid."""
    sc = pinch.scales
    shift = pinch.mu_F * t / sc.omega(t)
    Wm = tip_w_barrier(sigma, t, pinch, params, tables, -1)
    Wp = tip_w_barrier(sigma, t, pinch, params, tables, +1)
    return float(np.max(1.0 / np.minimum(Wm - shift, Wp - shift)))


# ---------------------------------------------------------------------------
# barricade monitor

def _band_margin(x, lo, hi):
    """Largest normalised excursion: ``<= 0`` iff ``lo <= x <= hi``."""
    gap = np.maximum(hi - lo, 1e-300)
    m = np.maximum((x - hi) / gap, (lo - x) / gap)
    i = int(np.argmax(m))
    return float(m[i]), i, int(np.count_nonzero(m > 0))


def barricade_margins(u, v, w, t, pinch: ModelPinch, params: BarrierParams,
                      tables: BryantTables) -> dict:
    """Normalised distance of a solution slice from the barrier bands.

    Returns ``{"t", "scored", "margins": {name: {...}}}``.  A margin ``<= 0``
    means the slice lies between the barriers at every node of the region;
    snapshots after ``T_star`` are reported but not scored.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    sc = pinch.scales
    alpha, nu = float(sc.alpha(t)), float(sc.nu(t))
    sigma = u / alpha
    out = {"t": float(t), "scored": bool(t <= params.T_star), "margins": {}}
    prish = (u > 0) & (u + pinch.mu * t < params.u_star) & (sigma > params.sigma_star)
    tip = (sigma > 0) & (sigma < params.zeta_star / np.sqrt(nu))
    regions = {"prish": prish, "tip": tip}
    for name, mask in regions.items():
        if not np.any(mask):
            continue
        sig = sigma[mask]
        if name == "prish":
            Vm, Vp, Wm, Wp = prish_barriers(u[mask], t, pinch, params)
            wx = None if w is None or Wm is None else np.asarray(w)[mask]
        else:
            kmax = k_pm(t, pinch, params)[1]
            if np.max(sig) * kmax > tables.sigma_max:
                raise OutOfTable("tip region exceeds the Bryant table range")
            Vm, Vp, Wm, Wp = tip_barriers(sig, t, pinch, params, tables)
            wx = None
            if w is not None and pinch.W0 is not None:
                wx = (np.asarray(w)[mask] + pinch.mu_F * t) / sc.omega(t)
        m, i, nv = _band_margin(v[mask], Vm, Vp)
        out["margins"][f"{name}:v"] = {"margin": m, "sigma": float(sig[i]),
                                       "violations": nv, "pass": m <= 0}
        if wx is not None:
            m, i, nv = _band_margin(wx, Wm, Wp)
            out["margins"][f"{name}:w"] = {"margin": m, "sigma": float(sig[i]),
                                           "violations": nv, "pass": m <= 0}
    out["passed"] = all(r["pass"] for r in out["margins"].values())
    return out


__all__ = [
    "BarrierParams", "default_delta", "legacy_delta", "params_for", "prish_barriers", "prish_barriers_sigma",
    "tip_barriers", "tip_v_barrier", "tip_w_barrier", "separation_ratio",
    "BucklingReport", "check_buckling", "generic_supersolution",
    "F_sigma", "R_sigma", "kappa_tilde_cap", "vsupsoln_residual",
    "wsupsoln_residual", "D_operator", "fiber_denominator_bound", "OutOfTable",
    "barricade_margins",
]
