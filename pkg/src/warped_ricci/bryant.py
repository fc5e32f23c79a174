"""Bryant soliton profile and the tip perturbation functions.

The soliton is written as ``dsigma^2 / (sigma V) + sigma g_{S^q}``.  Rather
than integrating the singular equation for ``V`` directly, we integrate the
tip sectional curvature ``L = (1 - V/4) / sigma``, which satisfies

    4 s (1 - s L) L'' + 2 s^2 L'^2 + (mu + 8 - 4 s L) L' + (mu + 2) L^2 = 0

and is regular at ``s = 0`` with ``L'(0) = -(mu + 2) L(0)^2 / (mu + 8)``.
The one free constant ``L(0)`` is the scaling parameter of the family
``V(k s)``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .geometry import lambda_rm_singly


#: the perturbation equations are forced by the soliton and integrated over
#: many decades, so their step control runs tighter than the table tolerance
PERT_RTOL = 0.1

#: columns interpolated with their tabulated derivative, so that the
#: interpolant and its derivative column agree to high order
_HERMITE = {"v_bry": "dv_bry", "dv_bry": "d2v_bry", "v_pert": "dv_pert",
            "dv_pert": "d2v_pert", "w_pert": "dw_pert", "dw_pert": "d2w_pert"}


class NormalizationDrift(RuntimeError):
    pass


class ShootingFailure(RuntimeError):
    pass


class OutOfTable(ValueError):
    pass


def tip_curvature(q: int, normalization: str = "scalar") -> float:
    """Tip value ``L(0)`` of the normalised soliton.

    ``"scalar"`` fixes the tip scalar curvature to ``mu``, which is the
    normalisation for which ``sigma V -> mu``.  ``"slope"`` uses the tip
    slope ``V'(0) = -4 mu / (q (q - 1))``.
    """
    mu = 2.0 * (q - 1)
    if normalization == "scalar":
        return mu / (q * (q + 1))
    if normalization == "slope":
        return mu / (q * (q - 1))
    raise ValueError(f"unknown normalization {normalization!r}")


@dataclass
class BryantTables:
    q: int
    mu: float
    sigma_grid: np.ndarray
    L_bry: np.ndarray
    dL_bry: np.ndarray
    v_bry: np.ndarray
    dv_bry: np.ndarray
    d2v_bry: np.ndarray
    sigma0: float
    tol: float
    k: float = 1.0
    v_pert: Optional[np.ndarray] = None
    dv_pert: Optional[np.ndarray] = None
    d2v_pert: Optional[np.ndarray] = None
    w_pert: Optional[np.ndarray] = None
    dw_pert: Optional[np.ndarray] = None
    d2w_pert: Optional[np.ndarray] = None
    fbar: Optional[np.ndarray] = None
    dfbar: Optional[np.ndarray] = None
    R0: Optional[float] = None
    F_sup: Optional[np.ndarray] = None
    F_params: Optional[tuple] = None
    _interp: dict = field(default_factory=dict, repr=False)

    @property
    def sigma_max(self) -> float:
        return float(self.sigma_grid[-1])

    def column(self, name: str) -> np.ndarray:
        col = getattr(self, name)
        if col is None:
            raise ValueError(f"column {name!r} has not been computed")
        return col

    def eval(self, name: str, sigma):
        """Cubic interpolation of a column.

        Hermite through the tabulated derivative where one exists, monotone
        otherwise.
        """
        s = np.asarray(sigma, dtype=float)
        if np.any(s > self.sigma_max * (1 + 1e-12)) or np.any(s < 0):
            raise OutOfTable(f"sigma outside [0, {self.sigma_max:g}]")
        if name not in self._interp:
            d = _HERMITE.get(name)
            if d is not None and getattr(self, d) is not None:
                self._interp[name] = CubicHermiteSpline(self.sigma_grid, self.column(name),
                                                        self.column(d))
            else:
                self._interp[name] = PchipInterpolator(self.sigma_grid, self.column(name))
        return self._interp[name](s)

    def L_dense(self, sigma):
        """``L_Bry`` from the ODE's dense output (smooth to solver tolerance)."""
        s = np.asarray(sigma, dtype=float)
        if "_Lsol" not in self._interp:
            return self.eval("L_bry", s)
        if np.any(s > self.sigma_max * (1 + 1e-12)) or np.any(s < 0):
            raise OutOfTable(f"sigma outside [0, {self.sigma_max:g}]")
        L = self._interp["_Lsol"](np.maximum(s, self.sigma0))[0]
        return np.where(s < self.sigma0, self.L_bry[0] + self.dL_bry[0] * s, L)

    def Lam_dense(self, sigma):
        """``Lam = -V_Pert/(4 sigma)`` from the dense output."""
        s = np.asarray(sigma, dtype=float)
        if "_Lamsol" not in self._interp:
            out = np.empty_like(s)
            pos = s > 0
            out[pos] = -self.P(s[pos]) / (4.0 * s[pos])
            out[~pos] = -self.P(0.0, 1) / 4.0
            return out
        if np.any(s > self.sigma_max * (1 + 1e-12)) or np.any(s < 0):
            raise OutOfTable(f"sigma outside [0, {self.sigma_max:g}]")
        lam0, dlam0 = self._interp["_Lam0"]
        lam = self._interp["_Lamsol"](np.maximum(s, self.sigma0))[0]
        return np.where(s < self.sigma0, lam0 + dlam0 * s, lam)

    # convenience evaluators ------------------------------------------------
    def V(self, sigma, der=0):
        return self.eval(("v_bry", "dv_bry", "d2v_bry")[der], sigma)

    def P(self, sigma, der=0):
        return self.eval(("v_pert", "dv_pert", "d2v_pert")[der], sigma)

    def W(self, sigma, der=0):
        return self.eval(("w_pert", "dw_pert", "d2w_pert")[der], sigma)

    def to_csv(self, path):
        cols = ["v_bry", "v_pert", "w_pert", "fbar", "F_sup"]
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["sigma", "v_bry", "v_pert", "w_pert", "fbar", "F"])
            data = [self.sigma_grid] + [
                getattr(self, c) if getattr(self, c) is not None
                else np.full_like(self.sigma_grid, np.nan) for c in cols]
            for row in zip(*data):
                wr.writerow([f"{x:.17g}" for x in row])


def _table_grid(sigma0, sigma_max, per_decade):
    n = int(np.ceil(per_decade * np.log10(sigma_max / sigma0))) + 1
    return np.concatenate([[0.0], np.geomspace(sigma0, sigma_max, n)])


def _lbry_rhs(mu):
    def rhs(s, y):
        L, Lp = y
        Lpp = -(2 * s * s * Lp * Lp + (mu + 8 - 4 * s * L) * Lp + (mu + 2) * L * L) \
            / (4 * s * (1 - s * L))
        return [Lp, Lpp]
    return rhs


def _vbry_rhs(mu):
    # the stationary equation s V V'' - s V'^2/2 + mu V' + mu (1 - V/4) V/s = 0
    def rhs(s, y):
        V, Vp = y
        return [Vp, (0.5 * s * Vp * Vp - mu * Vp - mu * (1 - 0.25 * V) * V / s) / (s * V)]
    return rhs


class _SolitonSolution:
    """Dense ``(L, L')`` of the soliton, stitched from two integrations.

    Near the tip ``L`` is integrated; beyond ``s_switch`` ``V`` itself is,
    since recovering ``V = 4 (1 - s L)`` from ``L`` cancels catastrophically
    once ``s L`` is close to 1.
    """

    def __init__(self, inner, outer, s_switch):
        self.inner, self.outer, self.s_switch = inner, outer, s_switch

    def V(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        V, Vp = np.empty_like(s), np.empty_like(s)
        lo = s <= self.s_switch
        if np.any(lo):
            L, Lp = self.inner(s[lo])
            V[lo], Vp[lo] = 4 * (1 - s[lo] * L), -4 * (L + s[lo] * Lp)
        if np.any(~lo):
            V[~lo], Vp[~lo] = self.outer(s[~lo])
        return V, Vp

    def __call__(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        L, Lp = np.empty_like(s), np.empty_like(s)
        lo = s <= self.s_switch
        if np.any(lo):
            L[lo], Lp[lo] = self.inner(s[lo])
        if np.any(~lo):
            V, Vp = self.outer(s[~lo])
            sh = s[~lo]
            L[~lo] = (1 - 0.25 * V) / sh
            Lp[~lo] = (-0.25 * Vp * sh - (1 - 0.25 * V)) / sh**2
        return np.array([L, Lp])


def solve_vbry(q: int, sigma_max: float = 1e3, tol: float = 1e-10,
               sigma0: float = 1e-4, normalization: str = "scalar",
               k: float = 1.0, per_decade: int = 600,
               drift_tol: float = 0.05) -> BryantTables:
    """Integrate the soliton profile from the tip outwards.

    The launch at ``sigma0`` uses the two-term tip series of ``L``, which
    corresponds to ``V = 4 - 4 L(0) sigma0 + O(sigma0^2)``.  ``k`` rescales
    the tip curvature, producing ``V(k sigma)``.
    """
    if int(q) != q or q < 2:
        raise ValueError("q must be an integer >= 2")
    mu = 2.0 * (q - 1)
    L0 = k * tip_curvature(q, normalization)
    Lp0 = -(mu + 2) * L0**2 / (mu + 8)
    s_sw = min(1.0, sigma_max)
    inner = solve_ivp(_lbry_rhs(mu), [sigma0, s_sw], [L0 + Lp0 * sigma0, Lp0],
                      method="DOP853", rtol=tol, atol=tol * 1e-4, dense_output=True)
    if inner.status != 0:
        raise RuntimeError(f"soliton integration failed: {inner.message}")
    outer = None
    if sigma_max > s_sw:
        Ls, Lps = inner.sol(s_sw)
        V0 = [4 * (1 - s_sw * Ls), -4 * (Ls + s_sw * Lps)]
        outer = solve_ivp(_vbry_rhs(mu), [s_sw, sigma_max], V0, method="DOP853",
                          rtol=tol, atol=tol * 1e-4, dense_output=True)
        if outer.status != 0:
            raise RuntimeError(f"soliton integration failed: {outer.message}")
        outer = outer.sol
    sol = _SolitonSolution(inner.sol, outer, s_sw)
    s = _table_grid(sigma0, sigma_max, per_decade)
    L = np.empty_like(s)
    Lp = np.empty_like(s)
    L[0], Lp[0] = L0, Lp0
    L[1:], Lp[1:] = sol(s[1:])
    Lpp = np.empty_like(s)
    Lpp[1:] = np.array(_lbry_rhs(mu)(s[1:], [L[1:], Lp[1:]])[1])
    # tip value of L'' from the next series coefficient
    Lpp[0] = Lpp[1]
    v = np.empty_like(s)
    dv = np.empty_like(s)
    v[0], dv[0] = 4.0, -4 * L0
    v[1:], dv[1:] = sol.V(s[1:])
    d2v = np.empty_like(s)
    d2v[0] = -8 * Lp0
    d2v[1:] = np.array(_vbry_rhs(mu)(s[1:], [v[1:], dv[1:]])[1])
    drift = abs(sigma_max * v[-1] - mu) / mu
    if drift > drift_tol:
        raise NormalizationDrift(
            f"sigma*V(sigma_max)/mu = {sigma_max * v[-1] / mu:.4f}; the tip "
            f"normalisation does not give sigma V -> mu")
    tab = BryantTables(q=q, mu=mu, sigma_grid=s, L_bry=L, dL_bry=Lp,
                       v_bry=v, dv_bry=dv, d2v_bry=d2v, sigma0=sigma0, tol=tol,
                       k=k)
    tab._interp["_Lsol"] = sol
    return tab


def _bry_fields(tab: BryantTables, s):
    """``L, L', L''`` of the soliton at arbitrary ``s`` (dense ODE output)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    L, Lp = tab._interp["_Lsol"](np.maximum(s, tab.sigma0))
    small = s < tab.sigma0
    if np.any(small):
        L0, Lp0 = tab.L_bry[0], tab.dL_bry[0]
        L = np.where(small, L0 + Lp0 * s, L)
        Lp = np.where(small, Lp0, Lp)
    Lpp = np.array(_lbry_rhs(tab.mu)(np.maximum(s, tab.sigma0), [L, Lp])[1])
    return L, Lp, Lpp


def solve_vpert(tab: BryantTables, tol: Optional[float] = None,
                tip_slope: float = 0.0) -> BryantTables:
    """Linearised tip correction ``V_Pert``.

    ``V_Pert`` vanishes at the tip (the metric stays smooth), and its free
    datum is the tip slope, which only adds a multiple of the scaling mode
    ``sigma V_Bry'``.  We write ``V_Pert = -4 sigma Lam`` and integrate the
    linearisation of the ``L`` equation, forced by ``-(L + sigma L')``.
    The default slope 0 makes ``V_Pert`` even in ``sigma`` at the tip.
    """
    tol = tab.tol if tol is None else tol
    mu = tab.mu
    L0 = tab.L_bry[0]
    Lam0 = -tip_slope / 4.0
    # (mu + 8) Lam'(0) + 2 (mu + 2) L0 Lam(0) = -L0
    dLam0 = (-L0 - 2 * (mu + 2) * L0 * Lam0) / (mu + 8)

    def d2lam(s, lam, dlam):
        L, Lp, Lpp = _bry_fields(tab, s)
        forcing = -(L + s * Lp)
        rest = (-4 * s * s * lam * Lpp + 4 * s * s * Lp * dlam
                + (mu + 8 - 4 * s * L) * dlam - 4 * s * lam * Lp
                + 2 * (mu + 2) * L * lam)
        return (forcing - rest) / (4 * s * (1 - s * L))

    def rhs(s, y):
        return [y[1], d2lam(s, y[0], y[1])[0]]

    s0 = tab.sigma0
    sol = solve_ivp(rhs, [s0, tab.sigma_max], [Lam0 + dLam0 * s0, dLam0],
                    method="DOP853", rtol=PERT_RTOL * tol, atol=PERT_RTOL * tol * 1e-4, dense_output=True)
    if sol.status != 0 or not np.all(np.isfinite(sol.y)):
        raise ShootingFailure(f"V_Pert integration failed: {sol.message}")
    s = tab.sigma_grid
    lam = np.empty_like(s)
    dlam = np.empty_like(s)
    lam[0], dlam[0] = Lam0, dLam0
    lam[1:], dlam[1:] = sol.sol(s[1:])
    dd = np.empty_like(s)
    dd[1:] = d2lam(s[1:], lam[1:], dlam[1:])
    dd[0] = dd[1]
    P = -4 * s * lam
    if not np.all(np.isfinite(P)) or np.max(np.abs(P) / (1 + s)) > 1e6:
        raise ShootingFailure("no bounded V_Pert found")
    tab = replace(tab, v_pert=P, dv_pert=-4 * (lam + s * dlam),
                  d2v_pert=-4 * (2 * dlam + s * dd), _interp=dict(tab._interp))
    tab._interp.pop("v_pert", None)
    tab._interp["_Lamsol"] = sol.sol
    tab._interp["_Lam0"] = (Lam0, dLam0)
    return tab


def _drift_operator_coeffs(tab: BryantTables):
    """Coefficients of ``sigma^{-1} R[z, V] = s V z'' + (mu + V) z'``."""
    return tab.sigma_grid * tab.v_bry, tab.mu + tab.v_bry


def solve_wpert(tab: BryantTables, tol: Optional[float] = None) -> BryantTables:
    """``W_Pert`` from ``s V z'' + (mu + V) z' = 1`` with ``z(0) = 0``.

    Regularity at the tip forces ``z'(0) = 1/(mu + 4)``.
    """
    tol = tab.tol if tol is None else tol
    if np.any(tab.v_bry <= 0):
        raise ArithmeticError("V_Bry must stay positive")
    mu = tab.mu
    L0 = tab.L_bry[0]
    G0 = 1.0 / (mu + 4)
    G1 = 4 * L0 * G0 / (mu + 8)

    def rhs(s, y):
        z, g = y
        L = _bry_fields(tab, s)[0][0]
        V = 4 * (1 - s * L)
        return [g, (1 - (mu + V) * g) / (s * V)]

    s0 = tab.sigma0
    sol = solve_ivp(rhs, [s0, tab.sigma_max],
                    [G0 * s0 + 0.5 * G1 * s0**2, G0 + G1 * s0],
                    method="DOP853", rtol=PERT_RTOL * tol, atol=PERT_RTOL * tol * 1e-4, dense_output=True)
    if sol.status != 0:
        raise RuntimeError(f"W_Pert integration failed: {sol.message}")
    s = tab.sigma_grid
    z = np.empty_like(s)
    g = np.empty_like(s)
    z[0], g[0] = 0.0, G0
    z[1:], g[1:] = sol.sol(s[1:])
    V = tab.v_bry
    d2 = np.empty_like(s)
    d2[1:] = (1 - (mu + V[1:]) * g[1:]) / (s[1:] * V[1:])
    d2[0] = G1
    tab = replace(tab, w_pert=z, dw_pert=g, d2w_pert=d2, _interp=dict(tab._interp))
    return tab


def soliton_potential(tab: BryantTables, n_quad: int = 200001):
    """Normalised potential ``fbar`` with ``Delta_X fbar = 1`` and ``R0``.

    Independent of :func:`solve_wpert`: the first-order equation for
    ``g = fbar'`` is solved with its integrating factor
    ``s^c exp(H)``, ``c = (mu + 4)/4``, ``H' = mu L / V``, and the
    quadratures are done on a fine logarithmic grid.
    """
    mu = tab.mu
    c = (mu + 4) / 4.0
    lo = min(tab.sigma0, 1e-8)
    x = np.linspace(np.log(lo), np.log(tab.sigma_max), n_quad)
    s = np.exp(x)
    L = _bry_fields(tab, s)[0]
    V = 4 * (1 - s * L)
    # log of the integrating factor, E = c x + H with H' = mu L / V
    H = cumulative_simpson(mu * L / V * s, x=x, initial=0.0) + mu * L[0] / V[0] * s[0]
    E = c * x + H
    f = 1.0 / V
    # g_n = g_{n-1} e^{E_{n-1} - E_n} + int_{x_{n-1}}^{x_n} e^{E - E_n} f dx,
    # each cell integrated exactly for linear E and linear f
    dx = np.diff(x)
    b = E[:-1] - E[1:]
    small = np.abs(b) < 1e-4
    bs = np.where(small, 1.0, b)
    phi1 = np.where(small, 1 + b / 2 + b * b / 6, np.expm1(bs) / bs)
    phi2 = np.where(small, 0.5 + b / 3 + b * b / 8, (np.exp(bs) * (bs - 1) + 1) / bs**2)
    local = dx * (f[:-1] * phi2 + f[1:] * (phi1 - phi2))
    decay = np.exp(b)
    g = np.empty_like(s)
    g[0] = 1.0 / (c * V[0])
    for n in range(1, len(s)):
        g[n] = g[n - 1] * decay[n - 1] + local[n - 1]
    fb = cumulative_simpson(g * s, x=x, initial=0.0) + g[0] * s[0]
    grid = tab.sigma_grid
    fbar = np.interp(np.log(np.maximum(grid, lo)), x, fb)
    dfbar = np.interp(np.log(np.maximum(grid, lo)), x, g)
    fbar[0] = 0.0
    dfbar[0] = 1.0 / (mu + 4)
    R0 = tab.q * (tab.q + 1) * tab.L_bry[0]
    tab = replace(tab, fbar=fbar, dfbar=dfbar, R0=R0, _interp=dict(tab._interp))
    return tab


def soliton_curvatures(tab: BryantTables, sigma=None):
    """Sectionals ``K = -V'/4``, ``L`` and scalar curvature along the soliton."""
    s = tab.sigma_grid if sigma is None else np.asarray(sigma, dtype=float)
    L, Lp, _ = _bry_fields(tab, s)
    K = L + s * Lp
    R = 2 * tab.q * K + tab.q * (tab.q - 1) * L
    return K, L, R


def drift_laplacian(tab: BryantTables, f, df=None, d2f=None):
    """``Delta_X f = s V f'' + (mu + V) f'`` on the table grid.

    Derivatives default to nonuniform centered differences.
    """
    s = tab.sigma_grid
    if df is None or d2f is None:
        df, d2f = _grid_derivs(s, f)
    A, B = _drift_operator_coeffs(tab)
    return A * d2f + B * df


def _grid_derivs(x, f):
    d1 = np.gradient(f, x, edge_order=2)
    d2 = np.gradient(d1, x, edge_order=2)
    return d1, d2


def stability_supersolution_F(tab: BryantTables, a: Optional[float] = None,
                              B: float = 1.0) -> BryantTables:
    """``F = (fbar + a)^{-1} + B R`` with default ``a = 1/(4 Lambda_Rm(0))``."""
    if tab.fbar is None:
        raise ValueError("soliton_potential must run first")
    K, L, R = soliton_curvatures(tab)
    if a is None:
        a = 1.0 / (4 * float(lambda_rm_singly(K[0], L[0], tab.q)))
    if a <= 0 or B < 0:
        raise ValueError("need a > 0 and B >= 0")
    F = 1.0 / (tab.fbar + a) + B * R
    return replace(tab, F_sup=F, F_params=(a, B), _interp=dict(tab._interp))


def supersolution_margin(tab: BryantTables, a: float, B: float,
                         sigma_range=(1e-2, None)):
    """Best constant ``c`` in ``Delta_X F + 2 Lam F <= -c s^{0,-2} log(2+s) F``.

    Returns ``(c, worst_sigma)``; the inequality holds with ``c > 0`` iff
    the returned value is positive.  Derivatives of ``F`` are centered
    differences on the table grid, as the curvature ``R`` only exists in
    tabulated form.
    """
    K, L, R = soliton_curvatures(tab)
    s = tab.sigma_grid
    F = 1.0 / (tab.fbar + a) + B * R
    lap = drift_laplacian(tab, F)
    lam = lambda_rm_singly(K, L, tab.q)
    weight = s**0 / (1 + s) ** 2 * np.log(2 + s)
    ratio = -(lap + 2 * lam * F) / (weight * F)
    hi = sigma_range[1] or s[-1] / 2
    mask = (s >= sigma_range[0]) & (s <= hi)
    j = np.argmin(ratio[mask])
    return float(ratio[mask][j]), float(s[mask][j])


def search_B(tab: BryantTables, a: float, B0: float = 1.0, max_doublings: int = 20,
             sigma_range=(1e-2, None)):
    """Doubling search for a ``B`` with a positive supersolution margin."""
    B = B0
    history = []
    for _ in range(max_doublings):
        c, where = supersolution_margin(tab, a, B, sigma_range)
        history.append((B, c, where))
        if c > 0:
            return B, c, history
        B *= 2
    return None, None, history


def build_tables(q: int, sigma_max: float = 1e3, tol: float = 1e-10,
                 sigma0: float = 1e-4, normalization: str = "scalar",
                 k: float = 1.0, B: float = 1.0, per_decade: int = 600) -> BryantTables:
    """Full pipeline: soliton, perturbations, potential and ``F``."""
    tab = solve_vbry(q, sigma_max, tol, sigma0, normalization, k, per_decade)
    tab = solve_vpert(tab)
    tab = solve_wpert(tab)
    tab = soliton_potential(tab)
    tab = stability_supersolution_F(tab, B=B)
    return tab


def asymptotics_report(tab: BryantTables) -> dict:
    """Tail diagnostics used by the CLI and the acceptance suite."""
    s = tab.sigma_grid
    tail = s >= s[-1] / 10
    out = {
        "q": tab.q,
        "mu": tab.mu,
        "sigma_max": tab.sigma_max,
        "sigma_v_over_mu_tail": float(s[-1] * tab.v_bry[-1] / tab.mu),
        "v_bry_sigma0": float(tab.eval("v_bry", tab.sigma0)),
        "tip_curvature": float(tab.L_bry[0]),
    }
    if tab.v_pert is not None:
        out["v_pert_limit"] = float(tab.v_pert[-1])
    if tab.w_pert is not None:
        ratio = tab.w_pert[tail] / s[tail]
        out["w_pert_over_sigma_tail"] = [float(ratio.min()), float(ratio.max())]
    if tab.fbar is not None:
        u = s[tail]
        resid = tab.fbar[tail] - u / tab.mu
        slope = np.polyfit(np.log(u), resid, 1)[0]
        out["R0"] = float(tab.R0)
        out["fbar_log_slope"] = float(slope)
        out["fbar_log_slope_predicted"] = float(-0.25 * tab.q / tab.R0)
    return out
