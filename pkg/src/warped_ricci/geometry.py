"""Curvature of doubly warped products ``ds^2 + phi^2 g_{S^q} + psi^2 g_F``.

Two representations are supported: arclength profiles ``phi(s), psi(s)``
and the ``(u, v, w)`` variables with ``u = phi^2``, ``v = 4 phi_s^2`` and
``w = psi^2``, where derivatives are taken with respect to ``u``.  The
closed forms in ``(u, v, w)`` were obtained by the chain rule from the
arclength definitions and are checked against a coordinate oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .scales import DomainError


@dataclass(frozen=True)
class WarpedProfile:
    s_grid: np.ndarray
    phi: np.ndarray
    q: int
    psi: Optional[np.ndarray] = None
    p: int = 0
    Sec1: float = 1.0
    Sec2: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.s_grid, dtype=float)
        if s.ndim != 1 or np.any(np.diff(s) <= 0):
            raise ValueError("s_grid must be strictly increasing")
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if self.p > 0 and self.psi is None:
            raise ValueError("psi is required when p > 0")


@dataclass(frozen=True)
class CurvaturePoint:
    """Sectional curvatures and Ricci data; fields may be arrays."""

    L1: np.ndarray
    L2: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    Kmix: np.ndarray
    ric_s: np.ndarray
    ric_sph: np.ndarray
    ric_fib: np.ndarray
    R: np.ndarray
    A_norm_sq: np.ndarray

    @classmethod
    def assemble(cls, L1, L2, K1, K2, Kmix, q, p, A_norm_sq=np.nan):
        # each Ricci eigenvalue sums the sectionals of the planes through
        # that direction
        ric_s = q * K1 + p * K2
        ric_sph = K1 + (q - 1) * L1 + p * Kmix
        ric_fib = K2 + (p - 1) * L2 + q * Kmix if p > 0 else 0.0 * K1
        R = ric_s + q * ric_sph + p * ric_fib
        return cls(L1, L2, K1, K2, Kmix, ric_s, ric_sph, ric_fib, R, A_norm_sq)

    def sup_abs(self, q: int, p: int):
        """Largest sectional curvature magnitude over the plane types present."""
        parts = [np.abs(self.L1), np.abs(self.K1)]
        if p > 0:
            parts += [np.abs(self.K2), np.abs(self.Kmix)]
            if p > 1:
                parts.append(np.abs(self.L2))
        return np.max(np.stack(np.broadcast_arrays(*parts)), axis=0)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def curvatures_from_uvw(u, v, w=None, du_v=0.0, du_w=0.0, d2u_w=0.0, q=2, p=0,
                        Sec1=1.0, Sec2=0.0) -> CurvaturePoint:
    """Sectional curvatures from ``u, v, w`` and their ``u``-derivatives.

    ``K1 = -v_u/4``, ``L1 = (Sec1 - v/4)/u``, ``Kmix = -v w_u/(4w)``,
    ``L2 = Sec2/w - u v w_u^2/(4 w^2)`` and
    ``K2 = (u v w_u^2/w - 2 u v w_uu - u v_u w_u - v w_u) / (4 w)``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u <= 0):
        raise DomainError("u must be positive")
    du_v = np.asarray(du_v, dtype=float)
    K1 = -0.25 * du_v + 0.0 * u
    L1 = (Sec1 - 0.25 * v) / u
    if p > 0:
        w = np.asarray(w, dtype=float)
        if np.any(w <= 0):
            raise DomainError("w must be positive")
        wu = np.asarray(du_w, dtype=float)
        wuu = np.asarray(d2u_w, dtype=float)
        Kmix = -0.25 * v * wu / w
        L2 = Sec2 / w - 0.25 * u * v * wu**2 / w**2
        K2 = 0.25 * (u * v * wu**2 / w - 2 * u * v * wuu - u * du_v * wu - v * wu) / w
        y = u * v * wu**2 / w
        A = second_fundamental_norm_sq(u, v, w, y, q, p)
    else:
        Kmix = L2 = K2 = 0.0 * u
        A = 0.25 * q * v / u
    return CurvaturePoint.assemble(L1, L2, K1, K2, Kmix, q, p, A)


def lambda_rm_singly(K, L, q):
    """Top eigenvalue of the curvature operator on symmetric 2-tensors.

    ``K`` is the radial sectional curvature and ``L`` the tangential one.
    Written without dividing by ``L`` so that ``L -> 0`` gives ``sqrt(q) K``.
    """
    K = np.asarray(K, dtype=float)
    L = np.asarray(L, dtype=float)
    a = (q - 1) * L
    return 0.5 * (a + np.sqrt(a * a + 4 * q * K * K))


def second_fundamental_norm_sq(u, v, w, y, q, p):
    """``|A|^2 = q v/(4u) + p y/(4w)`` for the level sets of ``u``."""
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if np.any(u <= 0) or np.any(v < 0):
        raise DomainError("need u > 0 and v >= 0")
    out = 0.25 * q * v / u
    if p > 0:
        w, y = np.asarray(w, dtype=float), np.asarray(y, dtype=float)
        if np.any(w <= 0) or np.any(y < 0):
            raise DomainError("need w > 0 and y >= 0")
        out = out + 0.25 * p * y / w
    return out


def kappa_sq(u, v, w, du_w, p):
    """Squared fiber part of the level-set second fundamental form.

    ``kappa^2 = p u v w_u^2 / (4 w^2) = p y / (4 w)``; the ``v``-equation
    carries the reaction term ``-2 kappa^2 v``.
    """
    u, v, w = (np.asarray(x, dtype=float) for x in (u, v, w))
    if np.any(u <= 0) or np.any(w <= 0) or np.any(v < 0):
        raise DomainError("need u, w > 0 and v >= 0")
    return 0.25 * p * u * v * np.asarray(du_w, dtype=float) ** 2 / w**2


def _nonuniform_derivs(x, f, i):
    """First and second derivatives at interior node ``i`` (3-point stencil)."""
    h0 = x[i] - x[i - 1]
    h1 = x[i + 1] - x[i]
    d1 = (-h1 / (h0 * (h0 + h1)) * f[i - 1] + (h1 - h0) / (h0 * h1) * f[i]
          + h0 / (h1 * (h0 + h1)) * f[i + 1])
    d2 = 2 * (f[i - 1] / (h0 * (h0 + h1)) - f[i] / (h0 * h1)
              + f[i + 1] / (h1 * (h0 + h1)))
    return d1, d2


def curvatures_from_profile(profile: WarpedProfile, i: int) -> CurvaturePoint:
    """Sectional curvatures at an interior node by centered differences."""
    s = np.asarray(profile.s_grid, dtype=float)
    if not 0 < i < len(s) - 1:
        raise IndexError("curvatures_from_profile needs an interior index")
    phi = np.asarray(profile.phi, dtype=float)
    ph1, ph2 = _nonuniform_derivs(s, phi, i)
    L1 = (profile.Sec1 - ph1**2) / phi[i] ** 2
    K1 = -ph2 / phi[i]
    A = profile.q * ph1**2 / phi[i] ** 2
    if profile.p > 0:
        psi = np.asarray(profile.psi, dtype=float)
        ps1, ps2 = _nonuniform_derivs(s, psi, i)
        L2 = (profile.Sec2 - ps1**2) / psi[i] ** 2
        K2 = -ps2 / psi[i]
        Kmix = -ph1 * ps1 / (phi[i] * psi[i])
        A = A + profile.p * ps1**2 / psi[i] ** 2
    else:
        L2 = K2 = Kmix = 0.0
    return CurvaturePoint.assemble(L1, L2, K1, K2, Kmix, profile.q, profile.p, A)


# ---------------------------------------------------------------------------
# coordinate oracle

def _space_form_metric(angles, curvature):
    """Diagonal metric of a constant-curvature space in polar-type charts."""
    n = len(angles)
    diag = np.ones(n)
    if curvature > 0:
        r = 1.0 / np.sqrt(curvature)
        diag[:] = r**2
        for k in range(1, n):
            diag[k:] *= np.sin(angles[k - 1]) ** 2
    elif curvature < 0:
        # upper half-space style chart: exp(2 x_0) on the later coordinates
        r = 1.0 / np.sqrt(-curvature)
        diag[:] = r**2
        diag[1:] *= np.exp(2 * angles[0])
    return diag


class _BlockMetric:
    """Metric of ``ds^2 + phi^2 g_{S^q} + psi^2 g_F`` at grid node ``i``."""

    def __init__(self, profile: WarpedProfile):
        self.pr = profile
        self.q, self.p = profile.q, profile.p
        self.n = 1 + self.q + self.p

    def diag(self, i, y):
        pr = self.pr
        out = np.empty(self.n)
        out[0] = 1.0
        out[1:1 + self.q] = pr.phi[i] ** 2 * _space_form_metric(y[:self.q], pr.Sec1)
        if self.p:
            out[1 + self.q:] = pr.psi[i] ** 2 * _space_form_metric(y[self.q:], pr.Sec2)
        return out


def _christoffel(metric, i, y, ds, h):
    """Christoffel symbols ``G[a, b, c] = Gamma^a_{bc}`` of a diagonal metric."""
    n = metric.n
    g = metric.diag(i, y)
    dg = np.zeros((n, n))  # dg[c, a] = d_c g_aa
    dg[0] = (metric.diag(i + 1, y) - metric.diag(i - 1, y)) / (2 * ds)
    for c in range(1, n):
        e = np.zeros(n - 1)
        e[c - 1] = h
        dg[c] = (metric.diag(i, y + e) - metric.diag(i, y - e)) / (2 * h)
    G = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                val = 0.0
                if a == b:
                    val += dg[c, a]
                if a == c:
                    val += dg[b, a]
                if b == c:
                    val -= dg[a, b]
                G[a, b, c] = 0.5 * val / g[a]
    return G


def _riemann_at(metric, i, y, ds, h):
    """Covariant Riemann tensor ``R_{abcd}`` by differencing Christoffels."""
    n = metric.n
    G = _christoffel(metric, i, y, ds, h)
    dG = np.zeros((n, n, n, n))  # dG[m] = d_m Gamma
    dG[0] = (_christoffel(metric, i + 1, y, ds, h)
             - _christoffel(metric, i - 1, y, ds, h)) / (2 * ds)
    for m in range(1, n):
        e = np.zeros(n - 1)
        e[m - 1] = h
        dG[m] = (_christoffel(metric, i, y + e, ds, h)
                 - _christoffel(metric, i, y - e, ds, h)) / (2 * h)
    # R^r_{s m v} = d_m G^r_{v s} - d_v G^r_{m s} + G^r_{m l} G^l_{v s} - G^r_{v l} G^l_{m s}
    Rup = (np.einsum("mrvs->rsmv", dG) - np.einsum("vrms->rsmv", dG)
           + np.einsum("rml,lvs->rsmv", G, G) - np.einsum("rvl,lms->rsmv", G, G))
    g = metric.diag(i, y)
    return g[:, None, None, None] * Rup, g


def finite_difference_riemann(profile: WarpedProfile, angle_step: float = 1e-3):
    """Curvature table from a full coordinate computation of ``Rm``.

    The s-direction uses the grid spacing (uniform interior stencil, two
    nodes on each side are needed); angular directions use a small step at
    a generic chart point.  Returns a list of :class:`CurvaturePoint` for
    nodes ``2 .. N-3`` together with those node indices.
    """
    s = np.asarray(profile.s_grid, dtype=float)
    ds = np.diff(s)
    if not np.allclose(ds, ds[0], rtol=1e-9, atol=0):
        raise ValueError("finite_difference_riemann needs a uniform s grid")
    ds = ds[0]
    metric = _BlockMetric(profile)
    q, p = profile.q, profile.p
    y = np.full(q + p, 1.1)
    if p and profile.Sec2 < 0:
        y[q] = 0.3
    out, idx = [], []
    for i in range(2, len(s) - 2):
        R, g = _riemann_at(metric, i, y, ds, angle_step)

        def sec(a, b):
            return R[a, b, a, b] / (g[a] * g[b])

        K1 = sec(0, 1)
        L1 = sec(1, 2)
        if p:
            K2 = sec(0, q + 1)
            Kmix = sec(1, q + 1)
            L2 = sec(q + 1, q + 2) if p >= 2 else 0.0
        else:
            K2 = Kmix = L2 = 0.0
        # Rc_{bd} = g^{ac} R_{abcd}
        ric = np.einsum("abad->bd", R / g[:, None, None, None])
        ric_s = ric[0, 0] / g[0]
        ric_sph = ric[1, 1] / g[1]
        ric_fib = ric[q + 1, q + 1] / g[q + 1] if p else 0.0
        Rs = float(np.sum(np.diag(ric) / g))
        out.append(CurvaturePoint(K1=K1, K2=K2, Kmix=Kmix, L1=L1, L2=L2,
                                  ric_s=ric_s, ric_sph=ric_sph,
                                  ric_fib=ric_fib, R=Rs, A_norm_sq=np.nan))
        idx.append(i)
    return out, np.array(idx)
