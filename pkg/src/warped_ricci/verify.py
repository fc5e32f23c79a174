"""Post-hoc checks of the quantitative predictions.

Every check is a pure function of trajectories (or of plain numbers) and
returns a :class:`CheckReport` whose JSON form is
``{check, status, margins, fit_constants}``.  "Bounded" statements are
turned into trend tests: a Theil-Sen slope on log-log axes within
``TREND_TOL`` of zero.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.stats import theilslopes

from .barriers import BarrierParams, barricade_margins
from .geometry import lambda_rm_singly
from .pinch import ModelPinch
from .scales import Profile
from .solver import ResolutionError, Trajectory, diagnostics, rescale_tip

TREND_TOL = 0.2


class MismatchedRuns(ValueError):
    pass


@dataclass
class CheckReport:
    check: str
    status: str = "pass"
    margins: dict = field(default_factory=dict)
    fit_constants: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self):
        return {"check": self.check, "status": self.status, "margins": self.margins,
                "fit_constants": self.fit_constants, "details": self.details}

    def to_json(self, **kw):
        return json.dumps(self.as_dict(), default=_jsonable, **kw)


class ViolationReport(CheckReport):
    pass


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if np.count_nonzero(ok) < 3:
        return float("nan")
    return float(theilslopes(np.log(y[ok]), np.log(x[ok]))[0])


# ---------------------------------------------------------------------------
# Anderson-Chow

def ac_quantity(alpha, q):
    """Normalised Anderson-Chow combination for a singly warped product."""
    alpha = np.asarray(alpha, dtype=float)
    root = np.sqrt(4 * q * alpha**2 + 1)
    return q * alpha**2 + (alpha + 1) ** 2 - 0.5 * (2 * alpha + 1) * (1 + root)


def sym2_operator(sectional: np.ndarray) -> np.ndarray:
    """Matrix of ``h -> R(e_i, e_k, e_l, e_j) h_kl`` on ``Sym^2``.

    ``sectional[i, j]`` is the curvature of the plane ``e_i ^ e_j`` for a
    curvature tensor that is diagonal in the frame.  The basis is
    ``e_ii`` followed by ``(e_ij + e_ji)/sqrt(2)``, which is orthonormal.
    """
    k = np.asarray(sectional, dtype=float)
    n = k.shape[0]
    pairs = list(itertools.combinations(range(n), 2))
    dim = n + len(pairs)
    M = np.zeros((dim, dim))
    kd = k.copy()
    np.fill_diagonal(kd, 0.0)
    M[:n, :n] = kd
    for a, (i, j) in enumerate(pairs):
        M[n + a, n + a] = -k[i, j]
    return M


def lambda_rm_bruteforce(K, L, q) -> float:
    """Oracle for :func:`lambda_rm_singly` via a symmetric eigensolve."""
    n = q + 1
    k = np.full((n, n), float(L))
    k[0, :] = k[:, 0] = float(K)
    return float(np.linalg.eigvalsh(sym2_operator(k))[-1])


def ac_report(q_values=range(2, 10), n_alpha=60) -> CheckReport:
    """Sign, zeros and q-monotonicity of the Anderson-Chow quantity.

    Monotonicity in ``q`` at fixed ``alpha`` only holds for ``alpha >= 1``
    (``sqrt(8 a^2 + 1) >= 2a + 1`` iff ``a >= 1``).  The form that holds
    everywhere keeps ``K/L`` fixed and undoes the ``q(q-1)^2`` scaling; both
    are scored, and the raw fixed-alpha minimum is reported for reference.
    """
    alphas = np.geomspace(1e-6, 1e6, n_alpha)
    rep = CheckReport("anderson_chow")
    qs = list(q_values)
    worst = min(float(np.min(ac_quantity(alphas, q))) for q in qs)
    zeros = max(max(abs(float(ac_quantity(1.0 / (q - 1), q))),
                    abs(float(ac_quantity(0.0, q)))) for q in qs)
    mono_big = mono_ratio = mono_raw = 0.0
    if len(qs) > 1:
        grid = np.array([ac_quantity(alphas, q) for q in qs])
        rel = np.diff(grid, axis=0) / (1 + np.abs(grid[1:]))
        mono_raw = float(np.min(rel))
        mono_big = float(np.min(rel[:, alphas >= 1]))
        scaled = np.array([q * (q - 1) ** 2 * ac_quantity(alphas / (q - 1), q) for q in qs])
        mono_ratio = float(np.min(np.diff(scaled, axis=0) / (1 + np.abs(scaled[1:]))))
    rep.margins = {"min_A": worst, "max_abs_at_zeros": zeros,
                   "min_dA_dq_alpha_ge_1": mono_big, "min_dA_dq_fixed_ratio": mono_ratio}
    rep.details = {"min_dA_dq_fixed_alpha_all": mono_raw}
    ok = worst >= -1e-12 and zeros <= 1e-10 and mono_big >= -1e-12 and mono_ratio >= -1e-12
    rep.status = "pass" if ok else "fail"
    return rep


# ---------------------------------------------------------------------------
# barricades and curvature

def barricade_monitor(traj: Trajectory, params: BarrierParams, tables) -> ViolationReport:
    """Recount barrier violations for every snapshot of a trajectory."""
    rep = ViolationReport("barricade")
    per = []
    worst: Dict[str, float] = {}
    n_viol = 0
    for s in traj.snapshots:
        b = barricade_margins(s.u, s.v, s.w, s.t, s.pinch, params, tables)
        row = {"t": s.t, "scored": b["scored"]}
        for k, r in b["margins"].items():
            row[k] = {"margin": r["margin"], "violations": r["violations"]}
            if b["scored"]:
                worst[k] = max(worst.get(k, -np.inf), r["margin"])
                n_viol += r["violations"]
        per.append(row)
    rep.margins = worst
    rep.details = {"snapshots": per, "violations": n_viol,
                   "unscored": sum(not r["scored"] for r in per)}
    rep.status = "pass" if n_viol == 0 and worst else "fail"
    return rep


def curvature_bound_check(traj: Trajectory, params: Optional[BarrierParams] = None) -> CheckReport:
    """Fit ``sup|Rm| t nu`` in the tip and ``sup|Rm| u`` in the productish region."""
    rep = CheckReport("curvature_bound")
    snaps = [s for s in traj.snapshots if s.t > 0]
    if not snaps:
        rep.status = "skipped"
        return rep
    t = np.array([s.t for s in snaps])
    tip_c, pr_c = [], []
    for s in snaps:
        d = diagnostics(s)
        if s.pinch is None:
            tip_c.append(d.sup_rm * s.alpha())
            continue
        p = params or BarrierParams(mu=s.pinch.mu)
        nu = float(s.pinch.scales.nu(s.t))
        tip = d.sigma < p.zeta_star / np.sqrt(nu)
        tip_c.append(float(np.max(d.sup_rm_nodes[tip])) * s.alpha())
        pr = (s.u + s.mu * s.t < p.u_star) & (d.sigma > p.sigma_star)
        if np.any(pr):
            pr_c.append(float(np.max(d.sup_rm_nodes[pr] * s.u[pr])))
    tip_c = np.array(tip_c)
    slope_tip = loglog_slope(t, tip_c)
    rep.fit_constants["C_tip"] = float(np.max(tip_c))
    rep.margins["tip_slope"] = slope_tip
    ok = abs(slope_tip) <= TREND_TOL
    if len(pr_c) == len(snaps):
        pr_c = np.array(pr_c)
        slope_pr = loglog_slope(t, pr_c)
        rep.fit_constants["C_prish"] = float(np.max(pr_c))
        rep.margins["prish_slope"] = slope_pr
        ok = ok and abs(slope_pr) <= TREND_TOL
    rep.details = {"t": t.tolist(), "tip": tip_c.tolist(),
                   "prish": list(map(float, pr_c))}
    rep.status = "pass" if ok else "fail"
    return rep


def tip_errors(traj: Trajectory, tables, sigma_view: float = 10.0):
    """``e(t) = sup_{sigma <= sigma_view} |v_rescaled - V_Bry|`` per snapshot."""
    t, e, nu = [], [], []
    for s in traj.snapshots:
        grid, v, _ = rescale_tip(s, sigma_view)
        t.append(s.t)
        e.append(float(np.max(np.abs(v - tables.V(grid)))))
        nu.append(float(s.pinch.scales.nu(s.t)))
    return np.array(t), np.array(e), np.array(nu)


def bryant_convergence_check(traj: Trajectory, tables, sigma_view: float = 10.0,
                             last: int = 5, ratio_bounds=(0.05, 20.0)) -> CheckReport:
    """Tip convergence to the soliton, measured against ``nu(t)``.

    Over the ``last`` snapshots, ``e`` must decrease as ``t`` decreases and
    ``e/nu`` must stay within ``ratio_bounds``.
    """
    rep = CheckReport("bryant_convergence")
    if any(s.pinch is None for s in traj.snapshots):
        rep.status = "skipped"
        rep.details["reason"] = "no pinch scales (exact-solution harness)"
        return rep
    if len(traj.snapshots) < 4:
        raise ResolutionError("need at least four snapshots")
    t, e, nu = tip_errors(traj, tables, sigma_view)
    sel = slice(-last, None)
    ts, es, r = t[sel], e[sel], (e / nu)[sel]
    dec = bool(np.all(np.diff(es) > 0))
    inside = bool(np.all((r >= ratio_bounds[0]) & (r <= ratio_bounds[1])))
    rep.margins = {"ratio_min": float(np.min(r)), "ratio_max": float(np.max(r)),
                   "monotone": dec}
    rep.fit_constants = {"e_over_nu_median": float(np.median(e / nu))}
    rep.details = {"t": t.tolist(), "e": e.tolist(), "nu": nu.tolist()}
    rep.status = "pass" if dec and inside else "fail"
    return rep


# ---------------------------------------------------------------------------
# reaction-diffusion approximation residual

def _z_fields(u, t, Z0: Profile, a: float, mu: float):
    uh = u + mu * t
    Q = uh / u
    z, z1, z2 = Z0(uh), Z0.d1(uh), Z0.d2(uh)
    Z = Q**a * z
    # d/du of Q^a = a Q^(a-1) (-mu t / u^2)
    dQ = -mu * t / (u * u)
    d2Q = 2 * mu * t / u**3
    Qa1 = a * Q ** (a - 1) * dQ
    Qa2 = a * (a - 1) * Q ** (a - 2) * dQ**2 + a * Q ** (a - 1) * d2Q
    Zu = Qa1 * z + Q**a * z1
    Zuu = Qa2 * z + 2 * Qa1 * z1 + Q**a * z2
    Zt = mu * (a * Q ** (a - 1) / u * z + Q**a * z1)
    brk = (1 + np.abs(uh * z1 / z) + np.abs(uh * uh * z2 / z))
    return Z, Zu, Zuu, Zt, brk


def approx_fields(u, v, t, Z0: Profile, a: float, mu: float):
    """``(res, E, cap_shape)`` for ``Z = Q^a Z0(u + mu t)``.

    ``res = (box - a mu/u) Z`` with ``box Z = Z_t - (mu + v) Z_u - u v Z_uu``
    and ``E = u res/(v Z)``.
    """
    u, v = np.asarray(u, float), np.asarray(v, float)
    Z, Zu, Zuu, Zt, brk = _z_fields(u, t, Z0, a, mu)
    res = Zt - (mu + v) * Zu - u * v * Zuu - a * mu * Z / u
    E = u * res / (v * Z)
    return res, E, brk


def approx_residual(traj: Trajectory, Z0: Profile, a: float,
                    params: Optional[BarrierParams] = None) -> CheckReport:
    """Estimate ``E`` on the productish region of every snapshot.

    The cap constant is ``C = sup |E|/(1 + |<Z0>_1| + |<Z0>_2|)``; the check
    passes if the per-snapshot constant has a flat trend as ``t`` decreases.
    """
    rep = CheckReport("approx_residual")
    t_list, c_list, e_list = [], [], []
    for s in traj.snapshots:
        if s.t <= 0:
            continue
        p = params or BarrierParams(mu=s.mu)
        mask = (s.u > 0) & (s.u + s.mu * s.t < p.u_star) & (s.sigma > p.sigma_star)
        if not np.any(mask):
            continue
        res, E, brk = approx_fields(s.u[mask], s.v[mask], s.t, Z0, a, s.mu)
        t_list.append(s.t)
        e_list.append(float(np.max(np.abs(E))))
        c_list.append(float(np.max(np.abs(E) / brk)))
    if len(t_list) < 3:
        rep.status = "skipped"
        return rep
    t_arr, c_arr = np.array(t_list), np.array(c_list)
    # a residual that vanishes identically has no trend to fit
    if np.max(c_arr) <= 1e-12:
        slope = 0.0
    else:
        slope = loglog_slope(t_arr, np.maximum(c_arr, 1e-300))
    rep.fit_constants = {"C": float(np.max(c_arr))}
    rep.margins = {"sup_E": float(np.max(e_list)), "trend_slope": slope}
    rep.details = {"t": t_list, "C_t": c_list, "sup_E_t": e_list}
    rep.status = "pass" if np.isfinite(rep.margins["sup_E"]) and abs(slope) <= TREND_TOL else "fail"
    return rep


# ---------------------------------------------------------------------------
# mollification and initial convergence

def mollification_convergence(runs: Dict[float, Trajectory], u_window=None,
                              n: int = 400, u_top: float = 0.04) -> CheckReport:
    """``d(m) = sup_u |v^(m) - v^(m/2)|`` at the common final time.

    The default window is ``[mu T_end / 2, u_top]``: below it the larger
    runs still carry material from their blending zone at ``T_end``.  The
    relative difference ``|dv|/v`` is reported alongside.
    """
    rep = CheckReport("mollification_convergence")
    ms = sorted(runs, reverse=True)
    if len(ms) < 2:
        raise MismatchedRuns("need at least two runs")
    finals = {m: runs[m].snapshots[-1] for m in ms}
    T = {round(s.t, 15) for s in finals.values()}
    names = {s.pinch.name if s.pinch is not None else None for s in finals.values()}
    if len(T) != 1 or len(names) != 1:
        raise MismatchedRuns("runs differ in final time or pinch")
    if u_window is None:
        s0 = finals[ms[0]]
        u_window = (0.5 * s0.mu * s0.t, u_top)
    ua, ub = u_window
    for s in finals.values():
        if not (s.u[0] <= ua < ub <= s.u[-1]):
            raise MismatchedRuns("u-window not inside every run's domain")
    uu = np.geomspace(ua, ub, n)
    vals = {m: PchipInterpolator(finals[m].u[1:], finals[m].v[1:])(uu) for m in ms}
    d, rel = [], []
    for m1, m2 in zip(ms[:-1], ms[1:]):
        diff = np.abs(vals[m1] - vals[m2])
        d.append(float(np.max(diff)))
        rel.append(float(np.max(diff / np.abs(vals[m2]))))
    dec = all(b < a for a, b in zip(d[:-1], d[1:])) if len(d) > 1 else True
    rep.margins = {f"d({m:g})": x for m, x in zip(ms[:-1], d)}
    rep.fit_constants = {f"rel({m:g})": x for m, x in zip(ms[:-1], rel)}
    rep.details = {"m": ms, "d": d, "relative": rel, "u_window": [float(ua), float(ub)]}
    rep.status = "pass" if dec else "fail"
    return rep


def _du_drift(u, v, vu, q, p=0, w=None, wu=None):
    """``d/dt (u + mu t)`` at a fixed point: ``Laplacian u - v``."""
    out = 0.5 * (q - 1) * v + 0.5 * u * vu
    if p > 0:
        out = out + 0.5 * p * u * v * wu / w
    return out


def initial_convergence_rate(traj: Trajectory, pinch: ModelPinch, u0_samples=(0.02,),
                             t_max: Optional[float] = None) -> CheckReport:
    """Early-time drift of the metric beyond the linear shrinking.

    For each label ``u0`` the point sits at ``u = u0 - mu t``; the drift of
    the sphere factor ``|d/dt(u + mu t)|/u`` is compared with ``v0/u0``.
    """
    rep = CheckReport("initial_convergence_rate")
    mu, q = pinch.mu, pinch.q
    rows = []
    for u0 in u0_samples:
        tm = t_max if t_max is not None else 0.05 * u0
        for s in traj.snapshots:
            if not (0 < s.t <= tm):
                continue
            u = u0 - mu * s.t
            vi = PchipInterpolator(s.u[1:], s.v[1:])
            v, vu = float(vi(u)), float(vi(u, 1))
            w = wu = None
            if s.w is not None:
                wi = PchipInterpolator(s.u[1:], s.w[1:])
                w, wu = float(wi(u)), float(wi(u, 1))
            dr = abs(_du_drift(u, v, vu, q, s.p, w, wu)) / u
            rows.append({"u0": u0, "t": s.t, "ratio": dr / (float(pinch.V0(u0)) / u0)})
    if len(rows) < 3:
        rep.status = "skipped"
        rep.details["rows"] = rows
        return rep
    ratios = np.array([r["ratio"] for r in rows])
    slope = loglog_slope([r["t"] for r in rows], ratios)
    rep.fit_constants = {"C0": float(np.max(ratios))}
    rep.margins = {"trend_slope": slope}
    rep.details = {"rows": rows}
    rep.status = "pass" if np.all(np.isfinite(ratios)) and abs(slope) <= TREND_TOL else "fail"
    return rep


def buckling_check(pinch: ModelPinch, params: BarrierParams, tables,
                   times: Sequence[float] = tuple(np.geomspace(1e-7, 1e-3, 20))) -> CheckReport:
    from .barriers import check_buckling

    rep = CheckReport("buckling")
    worst = -np.inf
    bad = []
    for t in times:
        r = check_buckling(t, pinch, params, tables)
        worst = max(worst, r.worst())
        if not r.passed:
            bad.append(float(t))
    rep.margins = {"worst": float(worst)}
    rep.details = {"failing_t": bad}
    rep.status = "pass" if not bad else "fail"
    return rep


__all__ = [
    "CheckReport", "ViolationReport", "MismatchedRuns", "ac_quantity",
    "lambda_rm_singly", "lambda_rm_bruteforce", "sym2_operator", "ac_report",
    "barricade_monitor", "curvature_bound_check", "tip_errors",
    "bryant_convergence_check", "approx_fields", "approx_residual",
    "mollification_convergence", "initial_convergence_rate", "buckling_check",
    "loglog_slope",
]
