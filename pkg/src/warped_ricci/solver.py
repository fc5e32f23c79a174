"""Reduced Ricci flow for warped products in the coordinate ``phi = sqrt(u)``.

The unknowns are ``L = (1 - v/4)/u`` and the fiber size ``w``.  With
``u = phi^2`` the equations read

    dL/dt = (1 - phi^2 L) L'' + 1/2 phi^2 L'^2 + (mu/2 + 3 - phi^2 L) L'/phi
            + (mu + 2) L^2 + 1/2 kappa^2 v / phi^2
    dw/dt = v/4 w'' + (mu/2 + v/4) w'/phi - mu_F - y

with ``y = v w'^2/(4w)`` and ``kappa^2 = p y/(4w)``.  At ``phi = 0`` the
``w'/phi`` terms become second derivatives (even reflection).

Two time integrators share the spatial operator: explicit midpoint RK2 with a
CFL bound, and a linearly implicit variable-step SBDF2 scheme whose step is
tied to the tip curvature rather than the smallest cell.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .barriers import BarrierParams, barricade_margins
from .geometry import CurvaturePoint, curvatures_from_uvw
from .pinch import ModelPinch, v_prish, w_prish
from .scales import DomainError

U_MAX = 1.0
#: fewest nodes allowed inside the tip scale sqrt(T1 nu(T1))
MIN_TIP_NODES = 20


class SolverError(RuntimeError):
    pass


class CoordinateBreakdown(SolverError):
    """``v`` left ``(0, 4]``: ``u`` is no longer monotone along the profile."""


class FiberCollapse(SolverError):
    pass


class CFLViolation(SolverError):
    pass


class ConfigError(ValueError):
    pass


class ResolutionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# grids and cutoffs

def _s(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    pos = y > 0
    out[pos] = np.exp(-1.0 / y[pos])
    return out


def eta(x):
    """Smooth cutoff: 1 for x < 1, 0 for x > 2."""
    x = np.asarray(x, dtype=float)
    a, b = _s(2.0 - x), _s(x - 1.0)
    return a / (a + b)


def graded_grid(phi_b: float, h0: float, n_nodes: int, n_uniform: int = 40) -> np.ndarray:
    """Uniform spacing ``h0`` for ``n_uniform`` cells, then geometric growth."""
    if n_uniform * h0 >= phi_b:
        return np.linspace(0.0, phi_b, n_nodes)
    n_geo = n_nodes - 1 - n_uniform
    if n_geo < 1:
        raise ConfigError("too few nodes for the graded grid")
    rest = phi_b - n_uniform * h0

    def total(r):
        return h0 * r * (r**n_geo - 1.0) / (r - 1.0) - rest

    if total(1.0 + 1e-12) > 0:
        raise ConfigError("grid cannot reach phi_b with this spacing")
    r_max = min(10.0, math.exp(600.0 / n_geo))
    if total(r_max) < 0:
        raise ConfigError("grid cannot reach phi_b with this many nodes")
    r = brentq(total, 1.0 + 1e-12, r_max, xtol=1e-14)
    steps = np.concatenate([np.full(n_uniform, h0), h0 * r ** np.arange(1, n_geo + 1)])
    phi = np.concatenate([[0.0], np.cumsum(steps)])
    phi[-1] = phi_b
    return phi


@dataclass(frozen=True)
class GridSpec:
    n_nodes: int = 4000
    tip_nodes: int = 320
    n_uniform: int = 640
    u_star: float = 0.05
    phi_b: Optional[float] = None

    def boundary(self) -> float:
        return self.phi_b if self.phi_b is not None else math.sqrt(2.0 * self.u_star)


class Stencil:
    """Three-point derivative weights on a nonuniform grid with even reflection."""

    def __init__(self, phi):
        phi = np.asarray(phi, dtype=float)
        if phi[0] != 0.0 or np.any(np.diff(phi) <= 0):
            raise ConfigError("phi grid must start at 0 and increase")
        self.phi = phi
        hm = np.diff(phi)[:-1]
        hp = np.diff(phi)[1:]
        s = hm + hp
        self.d2 = (2 / (hm * s), -2 / (hm * hp), 2 / (hp * s))
        self.d1 = (-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s))
        self.h1 = phi[1]
        self.hN = phi[-1] - phi[-2]

    def D1(self, f):
        out = np.empty_like(f)
        a, b, c = self.d1
        out[1:-1] = a * f[:-2] + b * f[1:-1] + c * f[2:]
        out[0] = 0.0
        out[-1] = (f[-1] - f[-2]) / self.hN
        return out

    def D2(self, f):
        out = np.empty_like(f)
        a, b, c = self.d2
        out[1:-1] = a * f[:-2] + b * f[1:-1] + c * f[2:]
        out[0] = 2.0 * (f[1] - f[0]) / self.h1**2
        out[-1] = out[-2]
        return out


class TipScale:
    """``c(t) = sqrt(alpha(t)/L_tip)``: ``1/(phi^2 + c^2)`` then matches the
    soliton at the origin and the cylinder ``1/u`` further out."""

    def __init__(self, pinch: ModelPinch, L_tip: float):
        self.scales = pinch.scales
        self.L_tip = float(L_tip)

    def __call__(self, t):
        return math.sqrt(float(self.scales.alpha(t)) / self.L_tip)


def _c_at(c_sub, t):
    return c_sub(t) if callable(c_sub) else c_sub


def _sub(phi, c):
    """``S = 1/(phi^2 + c^2)`` and two derivatives (zeros when c is None)."""
    if c is None:
        z = np.zeros_like(phi)
        return z, z, z
    d = phi * phi + c * c
    S = 1.0 / d
    S1 = -2.0 * phi / d**2
    S2 = (6.0 * phi * phi - 2.0 * c * c) / d**3
    return S, S1, S2


# ---------------------------------------------------------------------------
# state

@dataclass
class FlowState:
    t: float
    phi: np.ndarray
    L: np.ndarray
    w: Optional[np.ndarray] = None
    pinch: Optional[ModelPinch] = None
    m: Optional[float] = None
    T1: Optional[float] = None
    q: int = 2
    p: int = 0
    mu_F: float = 0.0
    c_sub: Optional[object] = None
    boundary: Optional[Callable] = field(default=None, repr=False)
    alpha_fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.pinch is not None:
            self.q, self.p, self.mu_F = self.pinch.q, self.pinch.p, self.pinch.mu_F
        if self.p > 0 and self.w is None:
            raise ConfigError("fiber dimension > 0 needs w")

    @property
    def mu(self):
        return 2.0 * (self.q - 1)

    @property
    def u(self):
        return self.phi**2

    @property
    def v(self):
        return 4.0 * (1.0 - self.u * self.L)

    def alpha(self, t=None):
        t = self.t if t is None else t
        if self.alpha_fn is not None:
            return float(self.alpha_fn(t))
        if self.pinch is None:
            raise DomainError("alpha needs a pinch")
        return float(self.pinch.scales.alpha(t))

    @property
    def sigma(self):
        return self.u / self.alpha()

    @property
    def y(self):
        if self.w is None:
            return np.zeros_like(self.phi)
        wp = Stencil(self.phi).D1(self.w)
        return self.v * wp**2 / (4.0 * self.w)

    def evolve(self, t, L, w) -> "FlowState":
        return replace(self, t=float(t), L=L, w=w)


# ---------------------------------------------------------------------------
# spatial operator

def _fiber_g(st: Stencil, w):
    """``w'/phi`` with its origin limit ``w''(0)``."""
    wp = st.D1(w)
    g = np.empty_like(w)
    g[1:] = wp[1:] / st.phi[1:]
    g[0] = 2.0 * (w[1] - w[0]) / st.h1**2
    return wp, g


def L_rate_phi(phi, L, Lp, Lpp, mu, p=0, w=None, g=None):
    """Pointwise ``dL/dt`` in the phi coordinate (``phi > 0``).

    ``g = w'/phi``; the fiber coupling is ``kappa^2 v/(2 phi^2) = p v^2 g^2/(32 w^2)``.
    """
    u = phi * phi
    A = 1.0 - u * L
    out = (A * Lpp + 0.5 * u * Lp**2 + (0.5 * mu + 3.0 - u * L) * Lp / phi
           + (mu + 2.0) * L**2)
    if p > 0:
        out = out + p * (4.0 * A) ** 2 * g * g / (32.0 * w * w)
    return out


def w_rate_phi(phi, v, w, wp, wpp, mu, mu_F=0.0):
    """Pointwise ``dw/dt`` in the phi coordinate (``phi > 0``)."""
    y = v * wp * wp / (4.0 * w)
    return 0.25 * v * wpp + (0.5 * mu + 0.25 * v) * wp / phi - mu_F - y


def v_rate_u(u, v, vu, vuu, mu, p=0, w=None, wu=None):
    """``dv/dt`` at fixed ``u``: ``u v v'' - u v'^2/2 + mu (1 - v/4) v/u + mu v' - 2 kappa^2 v``."""
    out = u * v * vuu - 0.5 * u * vu**2 + mu * (1.0 - 0.25 * v) * v / u + mu * vu
    if p > 0:
        out = out - 2.0 * (0.25 * p * u * v * wu * wu / (w * w)) * v
    return out


def w_rate_u(u, v, w, wu, wuu, mu, mu_F=0.0):
    """``dw/dt`` at fixed ``u``: ``u v w'' - mu_F - y + (mu + v) w'``."""
    y = u * v * wu * wu / w
    return u * v * wuu - mu_F - y + (mu + v) * wu


def rhs(state: FlowState, L=None, w=None, t=None, st: Optional[Stencil] = None):
    """Time derivatives ``(dL, dw)`` at every node (boundary node included)."""
    L = state.L if L is None else L
    w = state.w if w is None else w
    st = st or Stencil(state.phi)
    phi, mu, p = st.phi, state.mu, state.p
    u = phi * phi
    S, S1, S2 = _sub(phi, _c_at(state.c_sub, state.t if t is None else t))
    M = L - S
    Lp = S1 + st.D1(M)
    Lpp = S2 + st.D2(M)
    v = 4.0 * (1.0 - u * L)
    dL = np.empty_like(L)
    dw = None
    if p > 0:
        wp, g = _fiber_g(st, w)
        wpp = st.D2(w)
        dL[1:] = L_rate_phi(phi[1:], L[1:], Lp[1:], Lpp[1:], mu, p, w[1:], g[1:])
        dL[0] = ((0.5 * mu + 4.0) * Lpp[0] + (mu + 2.0) * L[0] ** 2
                 + p * v[0] ** 2 * g[0] ** 2 / (32.0 * w[0] ** 2))
        dw = np.empty_like(w)
        dw[1:] = w_rate_phi(phi[1:], v[1:], w[1:], wp[1:], wpp[1:], mu, state.mu_F)
        dw[0] = (0.5 * mu + 0.5 * v[0]) * wpp[0] - state.mu_F
    else:
        dL[1:] = L_rate_phi(phi[1:], L[1:], Lp[1:], Lpp[1:], mu)
        dL[0] = (0.5 * mu + 4.0) * Lpp[0] + (mu + 2.0) * L[0] ** 2
    return dL, dw


def equation_crosscheck(n=64, q=2, p=1, mu_F=0.0, seed=0, deg=5):
    """Compare the phi-form and u-form rates on random smooth fields.

    ``L`` and ``w`` are random polynomials in ``u``; their phi-derivatives
    follow from the chain rule, the u-form rate is mapped with
    ``dL = -dv/(4u)``.  Returns the largest relative discrepancies.
    """
    rng = np.random.default_rng(seed)
    mu = 2.0 * (q - 1)
    u = np.sort(rng.uniform(0.05, 0.2, n))
    cL = rng.normal(size=deg) / (1 + np.arange(deg))
    cw = rng.normal(size=deg) / (1 + np.arange(deg))
    cw[0] = abs(cw[0]) + 2.0
    PL = np.polynomial.Polynomial(cL)
    Pw = np.polynomial.Polynomial(cw)
    L, Lu, Luu = PL(u), PL.deriv()(u), PL.deriv(2)(u)
    w, wu, wuu = Pw(u), Pw.deriv()(u), Pw.deriv(2)(u)
    phi = np.sqrt(u)
    Lp, Lpp = 2 * phi * Lu, 2 * Lu + 4 * u * Luu
    wp, wpp = 2 * phi * wu, 2 * wu + 4 * u * wuu
    v = 4.0 * (1.0 - u * L)
    vu = -4.0 * (L + u * Lu)
    vuu = -4.0 * (2 * Lu + u * Luu)
    dL_phi = L_rate_phi(phi, L, Lp, Lpp, mu, p, w, wp / phi)
    dL_u = -v_rate_u(u, v, vu, vuu, mu, p, w, wu) / (4.0 * u)
    dw_phi = w_rate_phi(phi, v, w, wp, wpp, mu, mu_F)
    dw_u = w_rate_u(u, v, w, wu, wuu, mu, mu_F)
    eL = np.max(np.abs(dL_phi - dL_u)) / max(np.max(np.abs(dL_u)), 1e-300)
    ew = np.max(np.abs(dw_phi - dw_u)) / max(np.max(np.abs(dw_u)), 1e-300)
    return {"L": float(eL), "w": float(ew)}


def max_diffusion(state: FlowState) -> float:
    A = 1.0 - state.u * state.L
    return float(max(np.max(np.abs(A)), 0.5 * state.mu + 4.0))


def cfl_dt(state: FlowState, cfl: float = 0.4) -> float:
    h = np.diff(state.phi)
    return cfl * float(np.min(h)) ** 2 / (2.0 * max_diffusion(state))


def _apply_boundary(state: FlowState, t, L, w):
    if state.boundary is None:
        return L, w
    Lb, wb = state.boundary(t)
    L = L.copy()
    L[-1] = Lb
    if w is not None and wb is not None:
        w = w.copy()
        w[-1] = wb
    return L, w


def check_state(state: FlowState, L, w, t):
    v = 4.0 * (1.0 - state.u * L)
    if not np.all(np.isfinite(L)):
        raise CoordinateBreakdown(f"non-finite L at t={t:.6g}")
    bad = np.nonzero((v <= 0) | (v > 4.0 + 1e-9))[0]
    if bad.size:
        i = int(bad[0])
        raise CoordinateBreakdown(
            f"coordinate breakdown at t={t:.6g}: v={v[i]:.3g} at phi={state.phi[i]:.4g}")
    if w is not None and np.any(w <= 0):
        i = int(np.argmin(w))
        raise FiberCollapse(f"fiber collapse at t={t:.6g}, phi={state.phi[i]:.4g}")


def step(state: FlowState, dt: float, cfl: float = 0.4, st: Optional[Stencil] = None) -> FlowState:
    """One explicit midpoint RK2 step."""
    lim = cfl_dt(state, cfl)
    if dt > lim * (1 + 1e-12):
        raise CFLViolation(f"dt={dt:.3g} exceeds CFL bound {lim:.3g}")
    st = st or Stencil(state.phi)
    t = state.t
    k1L, k1w = rhs(state, st=st)
    Lm = state.L + 0.5 * dt * k1L
    wm = state.w + 0.5 * dt * k1w if state.p > 0 else None
    Lm, wm = _apply_boundary(state, t + 0.5 * dt, Lm, wm)
    k2L, k2w = rhs(state, Lm, wm, t + 0.5 * dt, st=st)
    L = state.L + dt * k2L
    w = state.w + dt * k2w if state.p > 0 else None
    L, w = _apply_boundary(state, t + dt, L, w)
    check_state(state, L, w, t + dt)
    return state.evolve(t + dt, L, w)


# ---------------------------------------------------------------------------
# linearly implicit SBDF2

class _Implicit:
    """Tridiagonal pieces of the linearly implicit scheme."""

    def __init__(self, state: FlowState):
        self.st = Stencil(state.phi)
        self.state = state

    def S_at(self, t):
        return _sub(self.st.phi, _c_at(self.state.c_sub, t))

    def _split_L(self, L, Ssub):
        st, phi, mu = self.st, self.st.phi, self.state.mu
        S, S1, S2 = Ssub
        u = phi * phi
        M = L - S
        Lp = S1 + st.D1(M)
        A = 1.0 - u * L
        B = np.zeros_like(L)
        B[1:] = (0.5 * mu + 3.0 - u[1:] * L[1:]) / phi[1:] + 0.5 * u[1:] * Lp[1:]
        # explicit remainder: analytic S terms and the reaction
        N = A * S2 + B * S1 + (mu + 2.0) * L * L
        N[0] = (0.5 * mu + 4.0) * S2[0] + (mu + 2.0) * L[0] ** 2
        A = A.copy()
        A[0] = 0.5 * mu + 4.0
        return A, B, N, 4.0 * A

    def _split_w(self, L, w):
        st, phi, mu = self.st, self.st.phi, self.state.mu
        u = phi * phi
        v = 4.0 * (1.0 - u * L)
        wp, g = _fiber_g(st, w)
        A = 0.25 * v
        B = np.zeros_like(w)
        B[1:] = (0.5 * mu + 0.25 * v[1:]) / phi[1:] - v[1:] * wp[1:] / (4.0 * w[1:])
        A = A.copy()
        A[0] = 0.5 * mu + 0.5 * v[0]
        N = np.full_like(w, -self.state.mu_F)
        kap = self.state.p * v * v * g * g / (32.0 * w * w)
        return A, B, N, kap

    def solve(self, A, B, rhs_vec, gamma, dt, bval):
        """Solve ``(gamma - dt (A D2 + B D1)) x = rhs`` with ``x[-1] = bval``."""
        st = self.st
        n = rhs_vec.size
        a2, b2, c2 = st.d2
        a1, b1, c1 = st.d1
        lo = np.zeros(n)
        di = np.full(n, float(gamma))
        up = np.zeros(n)
        Ai, Bi = A[1:-1], B[1:-1]
        lo[1:-1] = -dt * (Ai * a2 + Bi * a1)
        di[1:-1] = gamma - dt * (Ai * b2 + Bi * b1)
        up[1:-1] = -dt * (Ai * c2 + Bi * c1)
        di[0] = gamma + dt * A[0] * 2.0 / st.h1**2
        up[0] = -dt * A[0] * 2.0 / st.h1**2
        r = rhs_vec.copy()
        di[-1], lo[-1], r[-1] = 1.0, 0.0, bval
        ab = np.zeros((3, n))
        ab[0, 1:] = up[:-1]
        ab[1] = di
        ab[2, :-1] = lo[1:]
        return solve_banded((1, 1), ab, r)


def _imex_step(imp: _Implicit, state: FlowState, prev: Optional[FlowState], dt, dt_prev):
    """One SBDF2 step (first step: IMEX Euler).  Returns the new state."""
    t_new = state.t + dt
    if prev is None:
        om, gamma = 0.0, 1.0
        Lbar, wbar = state.L, state.w
        histL = state.L
        histw = state.w
    else:
        om = dt / dt_prev
        gamma = (1 + 2 * om) / (1 + om)
        Lbar = (1 + om) * state.L - om * prev.L
        histL = (1 + om) * state.L - om * om / (1 + om) * prev.L
        if state.p > 0:
            wbar = (1 + om) * state.w - om * prev.w
            histw = (1 + om) * state.w - om * om / (1 + om) * prev.w
    Ssub = imp.S_at(t_new)
    S = Ssub[0]
    Lb, wb = (state.boundary(t_new) if state.boundary is not None
              else (state.L[-1], state.w[-1] if state.w is not None else None))
    A, B, N, v = imp._split_L(Lbar, Ssub)
    w_new = None
    if state.p > 0:
        Aw, Bw, Nw, kap = imp._split_w(Lbar, wbar)
        N = N + kap
        w_new = imp.solve(Aw, Bw, histw + dt * Nw, gamma, dt, wb)
    # solve for M = L - S
    histM = histL - gamma * S
    M = imp.solve(A, B, histM + dt * N, gamma, dt, Lb - S[-1])
    L_new = M + S
    check_state(state, L_new, w_new, t_new)
    return state.evolve(t_new, L_new, w_new)


# ---------------------------------------------------------------------------
# initial data

def _tip_L(tables, sigma, t, pinch):
    """``L`` of the tip approximation: ``(L_Bry + beta Lam)/alpha``."""
    sc = pinch.scales
    s = np.asarray(sigma, dtype=float)
    return (tables.L_dense(s) + sc.beta(t) * tables.Lam_dense(s)) / sc.alpha(t)


def prish_boundary(pinch: ModelPinch, phi_b: float):
    u_b = phi_b * phi_b

    def bc(t):
        Lb = (1.0 - 0.25 * float(v_prish(u_b, t, pinch))) / u_b
        wb = float(w_prish(u_b, t, pinch)) if pinch.W0 is not None else None
        return Lb, wb

    return bc


def mollified_initial(pinch: ModelPinch, m: float, T1: float,
                      grid_spec: Optional[GridSpec] = None, tables=None,
                      params: Optional[BarrierParams] = None) -> FlowState:
    """Three-piece mollified data at ``t = T1`` on a graded ``phi`` grid."""
    gs = grid_spec or GridSpec()
    params = params or BarrierParams(mu=pinch.mu)
    if not (0 < T1 < m):
        raise ConfigError(f"need 0 < T1 < m, got T1={T1:g}, m={m:g}")
    if tables is None:
        raise ConfigError("mollified_initial needs Bryant tables")
    sc = pinch.scales
    nu, alpha = float(sc.nu(T1)), float(sc.alpha(T1))
    tip = math.sqrt(alpha)
    phi_b = gs.boundary()
    if phi_b**2 + pinch.mu * T1 > U_MAX:
        raise DomainError("boundary outside the profile domain")
    phi = graded_grid(phi_b, tip / gs.tip_nodes, gs.n_nodes, gs.n_uniform)
    if np.count_nonzero(phi <= tip) < max(gs.tip_nodes, MIN_TIP_NODES):
        raise ConfigError("grid too coarse to resolve the tip scale")
    u = phi * phi
    sigma = u / alpha
    zeta = math.sqrt(nu) * sigma
    zs = params.zeta_star
    if np.count_nonzero(sigma <= 4 * zs / math.sqrt(nu)) < 0.3 * phi.size:
        raise ConfigError("fewer than 30% of nodes in the tip window")
    if 4 * zs / math.sqrt(nu) > tables.sigma_max:
        raise ConfigError("Bryant tables too short for the tip window")

    L = np.empty_like(u)
    pos = u > 0
    Lpr = np.full_like(u, np.nan)
    Lpr[pos] = (1.0 - 0.25 * v_prish(u[pos], T1, pinch)) / u[pos]
    L0 = np.full_like(u, np.nan)
    L0[pos] = (1.0 - 0.25 * pinch.V0(u[pos])) / u[pos]
    e1 = eta(zeta / (2 * zs))
    e2 = eta(u / m)
    tipmask = zeta < 4 * zs
    Lin = Lpr.copy()
    Lt = _tip_L(tables, sigma[tipmask], T1, pinch)
    Lin[tipmask] = np.where(e1[tipmask] >= 1.0, Lt,
                            e1[tipmask] * Lt + (1 - e1[tipmask]) * np.nan_to_num(Lpr[tipmask]))
    L = np.where(e2 >= 1.0, Lin, e2 * np.nan_to_num(Lin) + (1 - e2) * np.nan_to_num(L0))

    w = None
    if pinch.p > 0:
        om = float(sc.omega(T1))
        wt = np.full_like(u, np.nan)
        lw = float(sc.log_omega_theta(T1))
        wt[tipmask] = om * (1.0 + lw * tables.W(sigma[tipmask])) - pinch.mu_F * T1
        wpr = np.full_like(u, np.nan)
        wpr[pos] = w_prish(u[pos], T1, pinch)
        w0 = np.full_like(u, np.nan)
        w0[pos] = pinch.W0(u[pos])
        win = wpr.copy()
        win[tipmask] = np.where(e1[tipmask] >= 1.0, wt[tipmask],
                                e1[tipmask] * wt[tipmask]
                                + (1 - e1[tipmask]) * np.nan_to_num(wpr[tipmask]))
        w = np.where(e2 >= 1.0, win, e2 * np.nan_to_num(win) + (1 - e2) * np.nan_to_num(w0))

    state = FlowState(T1, phi, L, w, pinch=pinch, m=m, T1=T1,
                      c_sub=TipScale(pinch, tables.L_bry[0]),
                      boundary=prish_boundary(pinch, phi_b))
    check_state(state, L, w, T1)
    return state


# ---------------------------------------------------------------------------
# diagnostics

@dataclass
class DiagnosticSlice:
    t: float
    u: np.ndarray
    v: np.ndarray
    w: Optional[np.ndarray]
    sigma: Optional[np.ndarray]
    y: np.ndarray
    curv: CurvaturePoint
    sup_rm: float
    sup_rm_nodes: np.ndarray

    def v_of_u(self):
        return PchipInterpolator(self.u, self.v)

    def w_of_u(self):
        if self.w is None:
            raise ValueError("no fiber")
        return PchipInterpolator(self.u, self.w)


def node_curvatures(state: FlowState) -> CurvaturePoint:
    st = Stencil(state.phi)
    phi, L = state.phi, state.L
    u, v = state.u, state.v
    S, S1, _ = _sub(phi, _c_at(state.c_sub, state.t))
    Lp = st.D1(L - S) + S1
    du_v = -4.0 * (L + 0.5 * phi * Lp)
    q, p = state.q, state.p
    uu = u.copy()
    uu[0] = u[1]
    if p > 0:
        wp, g = _fiber_g(st, state.w)
        du_w = 0.5 * g
        wpp = st.D2(state.w)
        d2u_w = np.empty_like(u)
        d2u_w[1:] = (wpp[1:] - g[1:]) / (4.0 * u[1:])
        d2u_w[0] = d2u_w[1]
        Sec2 = state.pinch.Sec2 if state.pinch is not None else 0.0
        cp = curvatures_from_uvw(uu, v, state.w, du_v, du_w, d2u_w, q=q, p=p, Sec2=Sec2)
    else:
        cp = curvatures_from_uvw(uu, v, du_v=du_v, q=q, p=0)
    # exact tip values: L1 = L, and the origin node uses the limit
    fields = cp.as_dict()
    fields["L1"] = np.asarray(L, dtype=float).copy()
    for k in ("K2", "Kmix", "L2"):
        arr = np.asarray(fields[k], dtype=float)
        if arr.ndim:
            arr[0] = arr[1]
    return CurvaturePoint.assemble(fields["L1"], fields["L2"], fields["K1"],
                                   fields["K2"], fields["Kmix"], q, p,
                                   fields.get("A_norm_sq", np.nan))


def diagnostics(state: FlowState) -> DiagnosticSlice:
    cp = node_curvatures(state)
    nodes = np.asarray(cp.sup_abs(state.q, state.p), dtype=float)
    sigma = state.sigma if (state.pinch is not None or state.alpha_fn is not None) else None
    return DiagnosticSlice(state.t, state.u, state.v, state.w, sigma, state.y,
                           cp, float(np.max(nodes)), nodes)


def rescale_tip(state: FlowState, sigma_view: float = 10.0, n: int = 201):
    """``v`` and ``wbar`` resampled on a uniform sigma grid."""
    sig = state.sigma
    k = int(np.searchsorted(sig, sigma_view))
    if k >= sig.size or k < 8:
        raise ResolutionError("state does not resolve the tip window")
    grid = np.linspace(0.0, sigma_view, n)
    v = PchipInterpolator(sig, state.v)(grid)
    wbar = None
    if state.w is not None:
        sc = state.pinch.scales
        wb = (state.w + state.mu_F * state.t) / float(sc.omega(state.t))
        wbar = PchipInterpolator(sig, wb)(grid)
    return grid, v, wbar


# ---------------------------------------------------------------------------
# driver

@dataclass
class Trajectory:
    snapshots: List[FlowState] = field(default_factory=list)
    monitor: List[dict] = field(default_factory=list)
    steps: int = 0
    method: str = "imex"
    meta: dict = field(default_factory=dict)

    @property
    def times(self):
        return np.array([s.t for s in self.snapshots])


def default_output_times(T1, T_end, n=12):
    return np.geomspace(T1, T_end, n)


def _tip_dt(state: FlowState, c_dt: float) -> float:
    Lmax = float(np.max(np.abs(state.L)))
    return c_dt / ((state.mu + 2.0) * max(Lmax, 1e-300))


def run(state: FlowState, T_end: float, output_times=None, params: Optional[BarrierParams] = None,
        tables=None, method: str = "imex", c_dt: float = 0.1, cfl: float = 0.4,
        dt_max: Optional[float] = None, max_steps: int = 5_000_000) -> Trajectory:
    """Integrate to ``T_end``, recording snapshots and barricade margins."""
    if not T_end > state.t:
        raise ValueError("T_end must exceed the current time")
    if state.pinch is not None:
        u_b = state.u[-1] + state.mu * T_end
        if u_b > U_MAX:
            raise DomainError(f"T_end={T_end:g} pushes the boundary past u_max={U_MAX:g}")
    outs = sorted(set(float(x) for x in (output_times if output_times is not None
                                         else default_output_times(state.t, T_end))))
    outs = [x for x in outs if state.t <= x <= T_end]
    if not outs or outs[-1] < T_end:
        outs.append(T_end)
    traj = Trajectory(method=method)
    st = Stencil(state.phi)
    imp = _Implicit(state) if method == "imex" else None
    prev, dt_prev = None, None

    def snap(s):
        traj.snapshots.append(s)
        rec = {"t": s.t, "steps": traj.steps, "min_v": float(np.min(s.v[1:])),
               "max_L": float(np.max(s.L))}
        if s.w is not None:
            rec["min_w"] = float(np.min(s.w))
        if params is not None and tables is not None and s.pinch is not None:
            rec["barricade"] = barricade_margins(s.u, s.v, s.w, s.t, s.pinch, params, tables)
        traj.monitor.append(rec)

    k = 0
    if abs(outs[0] - state.t) <= 1e-15 * max(1.0, state.t):
        snap(state)
        k = 1
    while k < len(outs):
        target = outs[k]
        while state.t < target * (1 - 1e-13):
            if method == "rk2":
                dt = cfl_dt(state, cfl)
            else:
                dt = _tip_dt(state, c_dt)
                if dt_prev is not None:
                    dt = min(dt, 2.0 * dt_prev)
            if dt_max is not None:
                dt = min(dt, dt_max)
            dt = min(dt, target - state.t)
            if method == "rk2":
                state = step(state, dt, cfl, st)
            else:
                new = _imex_step(imp, state, prev, dt, dt_prev)
                prev, dt_prev, state = state, dt, new
            traj.steps += 1
            if traj.steps > max_steps:
                raise SolverError("step budget exhausted")
        snap(state)
        k += 1
    return traj


# ---------------------------------------------------------------------------
# exact-solution harnesses

def cylinder_harness(q=2, p=1, mu_F=0.0, u0=1.0, w0=1.0, v_eps=1e-6, n_steps=2000):
    """Reaction-only evolution ``u' = -mu - v``, ``w' = -mu_F - y`` by RK2.

    Returns times, u, w and the exact linear solutions.
    """
    mu = 2.0 * (q - 1)
    T = u0 / (4 * mu)
    dt = T / n_steps

    def f(y):
        return np.array([-mu - v_eps, -mu_F])

    y = np.array([u0, w0], dtype=float)
    ts, us, ws = [0.0], [u0], [w0]
    for i in range(n_steps):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        y = y + dt * k2
        ts.append((i + 1) * dt)
        us.append(y[0])
        ws.append(y[1])
    ts = np.array(ts)
    return ts, np.array(us), np.array(ws), u0 - mu * ts, w0 - mu_F * ts


def sphere_state(q=2, r0=1.0, n_nodes=200, frac=0.6):
    """Round ``S^{q+1}`` of radius ``r0`` on ``phi in [0, frac r0]``.

    ``L = 1/r^2`` is spatially constant; the boundary follows the exact
    radius ``r^2 = r0^2 - 2 q t``.
    """
    phi = np.linspace(0.0, frac * r0, n_nodes)
    L = np.full_like(phi, 1.0 / r0**2)

    def bc(t):
        return 1.0 / (r0**2 - 2 * q * t), None

    return FlowState(0.0, phi, L, q=q, boundary=bc, alpha_fn=lambda t: 1.0)


def bryant_state(tables, phi_b=None, n_nodes=200):
    """Steady soliton at scale one: ``L(phi) = L_Bry(phi^2)``."""
    phi_b = phi_b or math.sqrt(min(tables.sigma_max, 25.0))
    phi = np.linspace(0.0, phi_b, n_nodes)
    L = tables.eval("L_bry", phi**2)
    Lb = float(L[-1])
    return FlowState(0.0, phi, L, q=tables.q, boundary=lambda t: (Lb, None),
                     alpha_fn=lambda t: 1.0)


# ---------------------------------------------------------------------------
# I/O

SNAPSHOT_COLUMNS = ["t", "phi", "u", "v", "w", "L", "sigma",
                    "L1", "L2", "K1", "K2", "Kmix", "R"]


def _fmt(x):
    return f"{x:.17g}"


def write_snapshots(traj: Trajectory, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(SNAPSHOT_COLUMNS)
        for s in traj.snapshots:
            cp = node_curvatures(s)
            sig = s.sigma if (s.pinch is not None or s.alpha_fn is not None) else np.full_like(s.u, np.nan)
            w = s.w if s.w is not None else np.full_like(s.u, np.nan)
            cols = [np.full_like(s.u, s.t), s.phi, s.u, s.v, w, s.L, sig,
                    *(np.broadcast_to(np.asarray(getattr(cp, c), dtype=float), s.u.shape)
                      for c in ("L1", "L2", "K1", "K2", "Kmix", "R"))]
            for row in zip(*cols):
                wr.writerow([_fmt(float(x)) for x in row])


def read_snapshots(path, pinch: Optional[ModelPinch] = None, c_sub=None) -> List[FlowState]:
    """Rebuild states from a snapshot CSV (grouped by ``t``).

    The ``v`` column is authoritative: ``L = (1 - v/4)/u`` away from the
    origin, and the stored ``L`` is used only at ``phi = 0``.
    """
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.size == 0:
        raise ValueError(f"{path}: no snapshot rows")
    missing = [c for c in SNAPSHOT_COLUMNS if c not in data.dtype.names]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    out = []
    for t in np.unique(data["t"]):
        rows = data[data["t"] == t]
        u, v = rows["u"], rows["v"]
        L = rows["L"].copy()
        pos = u > 0
        L[pos] = (1.0 - 0.25 * v[pos]) / u[pos]
        w = rows["w"] if not np.all(np.isnan(rows["w"])) else None
        out.append(FlowState(float(t), rows["phi"].copy(), L,
                             None if w is None else w.copy(), pinch=pinch, c_sub=c_sub))
    return out


def write_manifest(path, pinch: ModelPinch, params: Optional[BarrierParams], extra: dict):
    doc = {"pinch": pinch.spec() if pinch is not None else None,
           "params": params.as_dict() if params is not None else None, **extra}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=float)


__all__ = [
    "SolverError", "CoordinateBreakdown", "FiberCollapse", "CFLViolation",
    "ConfigError", "ResolutionError", "eta", "graded_grid", "GridSpec", "Stencil",
    "FlowState", "rhs", "L_rate_phi", "w_rate_phi", "v_rate_u",
    "w_rate_u", "equation_crosscheck", "step", "cfl_dt", "mollified_initial", "diagnostics",
    "DiagnosticSlice", "node_curvatures", "rescale_tip", "Trajectory", "run",
    "cylinder_harness", "sphere_state", "bryant_state", "write_snapshots",
    "read_snapshots", "write_manifest", "SNAPSHOT_COLUMNS", "prish_boundary",
]
