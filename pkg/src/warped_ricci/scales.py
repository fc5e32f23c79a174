"""Time scales of a model pinch and small algebraic helpers.

Everything here is a pure function of immutable inputs.  Profiles are
functions of one positive variable that may carry analytic first and second
derivatives; when they do not, centered differences with relative step
1e-4 are used.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

FD_REL_STEP = 1e-4


class DomainError(ValueError):
    """Raised when a function is evaluated outside its validated domain."""


def _check_positive(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be positive and finite, got {x!r}")


class Profile:
    """A positive function of one variable with optional derivative oracles.

    Parameters
    ----------
    func : callable
        Vectorised evaluation ``f(x)``.
    d1, d2 : callable, optional
        Analytic first and second derivatives.  Missing ones fall back to
        centered differences with step ``x * 1e-4``.
    name : str
        Label used in reports and configs.
    params : dict
        Family parameters, kept for serialisation.
    """

    def __init__(self, func: Callable, d1: Optional[Callable] = None,
                 d2: Optional[Callable] = None, name: str = "custom",
                 params: Optional[dict] = None):
        self._f = func
        self._d1 = d1
        self._d2 = d2
        self.name = name
        self.params = dict(params or {})

    @property
    def analytic(self) -> bool:
        return self._d1 is not None and self._d2 is not None

    def __call__(self, x):
        _check_positive(x, "argument")
        return self._f(np.asarray(x, dtype=float))

    def d1(self, x):
        _check_positive(x, "argument")
        x = np.asarray(x, dtype=float)
        if self._d1 is not None:
            return self._d1(x)
        h = x * FD_REL_STEP
        return (self._f(x + h) - self._f(x - h)) / (2 * h)

    def d2(self, x):
        _check_positive(x, "argument")
        x = np.asarray(x, dtype=float)
        if self._d2 is not None:
            return self._d2(x)
        h = x * FD_REL_STEP
        return (self._f(x + h) - 2 * self._f(x) + self._f(x - h)) / h**2

    def rescaled(self, c: float) -> "Profile":
        """The profile ``x -> f(c x)`` with chain-rule derivatives."""
        f, g = self, float(c)
        return Profile(lambda x: f._f(g * x),
                       lambda x: g * f.d1(g * x),
                       lambda x: g * g * f.d2(g * x),
                       name=f"{self.name}(x*{g:g})", params=self.params)

    def spec(self) -> dict:
        return {"family": self.name, **self.params}

    def __repr__(self):
        return f"Profile({self.name}, {self.params})"


def _ell(u):
    return np.log(np.e + 1.0 / u)


def powerlog(c: float, p: float = 0.0, r: float = 0.0) -> Profile:
    """``c * u**p * log(e + 1/u)**r`` with analytic derivatives."""
    c, p, r = float(c), float(p), float(r)

    def f(u):
        return c * u**p * _ell(u) ** r

    def g(u):
        # logarithmic derivative f'/f
        return p / u - r / (u * (np.e * u + 1.0) * _ell(u))

    def g1(u):
        ell = _ell(u)
        e1 = -1.0 / (u * (np.e * u + 1.0))
        e2 = (2 * np.e * u + 1.0) / (u * (np.e * u + 1.0)) ** 2
        return -p / u**2 + r * (e2 / ell - (e1 / ell) ** 2)

    def d1(u):
        return f(u) * g(u)

    def d2(u):
        return f(u) * (g(u) ** 2 + g1(u))

    return Profile(f, d1, d2, name="powerlog", params={"c": c, "p": p, "r": r})


def log_profile(a: float = 1.0) -> Profile:
    """The neckpinch family ``a / log(e + 1/u)``."""
    prof = powerlog(a, 0.0, -1.0)
    prof.name, prof.params = "log", {"a": float(a)}
    return prof


def power(c: float = 1.0, p: float = 1.0) -> Profile:
    prof = powerlog(c, p, 0.0)
    prof.name, prof.params = "power", {"c": float(c), "p": float(p)}
    return prof


def constant(c: float = 1.0) -> Profile:
    c = float(c)
    return Profile(lambda u: c + 0.0 * u, lambda u: 0.0 * u, lambda u: 0.0 * u,
                   name="constant", params={"c": c})


PROFILE_FAMILIES = {
    "log": log_profile,
    "power": power,
    "powerlog": powerlog,
    "constant": constant,
}


def make_profile(family: str, **params) -> Profile:
    try:
        factory = PROFILE_FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown profile family {family!r}; "
                         f"choose from {sorted(PROFILE_FAMILIES)}") from None
    return factory(**params)


def log_deriv(f, k: int, t, tol: float = 1e-300):
    """``t**k f^(k)(t) / f(t)`` for ``k`` in {1, 2}.

    ``f`` may be a :class:`Profile` (analytic derivatives used when present)
    or a plain callable, in which case centered differences are used.
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    _check_positive(t, "t")
    t = np.asarray(t, dtype=float)
    if isinstance(f, Profile):
        val = f(t)
        der = f.d1(t) if k == 1 else f.d2(t)
    else:
        h = t * FD_REL_STEP
        val = np.asarray(f(t), dtype=float)
        if k == 1:
            der = (f(t + h) - f(t - h)) / (2 * h)
        else:
            der = (f(t + h) - 2 * val + f(t - h)) / h**2
    if np.any(np.abs(val) < tol):
        raise ZeroDivisionError("log_deriv: |f(t)| below tolerance")
    return t**k * der / val


def sigma_pow(x, a: float, b: float):
    """The interpolating power ``x**a (1 + x)**(b - a)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or (a < 0 and np.any(x == 0)):
        raise DomainError("sigma_pow needs x > 0 (x = 0 only when a >= 0)")
    return x**a * (1.0 + x) ** (b - a)


@dataclass(frozen=True)
class ScaleContext:
    """Time scales attached to a model pinch.

    ``V0`` and ``W0`` are the initial profiles in ``u``; ``W0`` may be None
    for singly warped data.
    """

    V0: Profile
    q: int
    mu_F: float = 0.0
    W0: Optional[Profile] = None

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 2:
            raise ValueError("q must be an integer >= 2")

    @classmethod
    def from_pinch(cls, pinch) -> "ScaleContext":
        return cls(pinch.V0, pinch.q, pinch.mu_F, pinch.W0)

    @property
    def mu(self) -> float:
        return 2.0 * (self.q - 1)

    @property
    def nu_profile(self) -> Profile:
        return self.V0.rescaled(self.mu)

    @property
    def omega_profile(self) -> Profile:
        if self.W0 is None:
            raise DomainError("omega needs a fiber profile W0")
        return self.W0.rescaled(self.mu)

    def nu(self, t):
        _check_positive(t, "t")
        return self.V0(self.mu * np.asarray(t, dtype=float))

    def omega(self, t):
        _check_positive(t, "t")
        return self.omega_profile(t)

    def alpha(self, t):
        return np.asarray(t, dtype=float) * self.nu(t)

    def nu_log1(self, t):
        return log_deriv(self.nu_profile, 1, t)

    def nu_log2(self, t):
        return log_deriv(self.nu_profile, 2, t)

    def omega_log1(self, t):
        return log_deriv(self.omega_profile, 1, t)

    def beta(self, t):
        return (1.0 + self.nu_log1(t)) * self.nu(t)

    def dbeta(self, t):
        """Time derivative of beta (from the second log-derivative)."""
        t = np.asarray(t, dtype=float)
        nu = self.nu(t)
        l1, l2 = self.nu_log1(t), self.nu_log2(t)
        # beta = nu + t nu'  =>  beta' = 2 nu' + t nu''
        return (2 * l1 + l2) * nu / t

    def log_omega_theta(self, t):
        """``alpha * d/dt log(omega) = <omega>_1 * nu``."""
        return self.omega_log1(t) * self.nu(t)

    def hat_u(self, u, t):
        _check_positive(u, "u")
        return np.asarray(u, dtype=float) + self.mu * np.asarray(t, dtype=float)

    def q_factor(self, u, t):
        return self.hat_u(u, t) / np.asarray(u, dtype=float)

    def sigma(self, u, t):
        return np.asarray(u, dtype=float) / self.alpha(t)


def hat_u(u, t, mu):
    _check_positive(u, "u")
    return np.asarray(u, dtype=float) + mu * np.asarray(t, dtype=float)


def q_factor(u, t, mu):
    return hat_u(u, t, mu) / np.asarray(u, dtype=float)


__all__ = [
    "DomainError", "Profile", "powerlog", "log_profile", "power", "constant",
    "make_profile", "PROFILE_FAMILIES", "log_deriv", "sigma_pow",
    "ScaleContext", "hat_u", "q_factor",
]
