"""Stationary periodic waves of the one-dimensional Cahn-Hilliard equation.

The double-well potential is the shifted quartic

    F(u) = (alpha/4) u^4 - (beta/2) u^2 + beta^2/(4 alpha)
         = (alpha/4) (u^2 - beta/alpha)^2,

so F >= 0 with minima at the binodal values +-sqrt(beta/alpha).  Every
zero-mean stationary profile with amplitude a in (0, binodal) is a scaled
Jacobi elliptic sine,

    phi(x; a) = a sn(h(a) x, m(a)),
    h(a) = sqrt((2 beta - alpha a^2) / (2 kappa)),
    m(a)^2 = alpha a^2 / (2 beta - alpha a^2),

with period p(a) = 4 K(m)/h(a), K the complete elliptic integral of the
first kind in the modulus convention.  Elliptic quantities are computed by
the arithmetic-geometric mean and the descending Landen transformation; no
lookup tables and no library special functions are involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

__all__ = [
    "Params",
    "ellip_k",
    "jacobi_sn",
    "sn_cn_dn",
    "WaveProfile",
    "periodic_wave",
    "period_of_amplitude",
    "amplitude_of_period",
    "period_derivative",
    "Spinodal",
    "spinodal",
    "Kink",
    "kink",
]


@dataclass(frozen=True)
class Params:
    """Physical parameters shared by the wave, energy and solver layers."""

    alpha: float = 1.0
    beta: float = 1.0
    kappa: float = 1e-3
    nu: float = 6e-3
    K: float = 1.0
    half_length: float = 1.0
    mobility: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "kappa", "half_length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.nu < 0 or self.K < 0:
            raise ValueError("nu and K must be nonnegative")
        if self.mobility != 1.0:
            raise ValueError("only unit mobility is supported")

    # potential and derivatives

    def f(self, u):
        """Double-well potential F(u), vectorized."""
        u = np.asarray(u, dtype=float)
        w = u * u - self.beta / self.alpha
        out = 0.25 * self.alpha * w * w
        return float(out) if out.ndim == 0 else out

    def df(self, u):
        u = np.asarray(u, dtype=float)
        out = self.alpha * u**3 - self.beta * u
        return float(out) if out.ndim == 0 else out

    def d2f(self, u):
        u = np.asarray(u, dtype=float)
        out = 3.0 * self.alpha * u**2 - self.beta
        return float(out) if out.ndim == 0 else out

    @property
    def binodal(self) -> float:
        return math.sqrt(self.beta / self.alpha)

    @property
    def p_min(self) -> float:
        """Shortest admissible wave period, 2 pi sqrt(kappa/beta)."""
        return 2.0 * math.pi * math.sqrt(self.kappa / self.beta)

    @property
    def xi_s(self) -> float:
        """Fastest-growing wavenumber of the homogeneous state."""
        return math.sqrt(self.beta / (2.0 * self.kappa))

    @property
    def p_s(self) -> float:
        """Spinodal period 2 pi / xi_s."""
        return 2.0 * math.pi * math.sqrt(2.0 * self.kappa / self.beta)

    @property
    def lambda_top(self) -> float:
        """Peak growth rate beta^2/(4 kappa) of the homogeneous state."""
        return self.beta**2 / (4.0 * self.kappa)

    @property
    def e_max(self) -> float:
        """Free energy of the zero state on [-L, L), 2 L F(0)."""
        return self.half_length * self.beta**2 / (2.0 * self.alpha)


_EPS = np.finfo(float).eps


def _agm(a0: float, b0: float) -> float:
    a, b = float(a0), float(b0)
    for _ in range(200):
        if abs(a - b) <= 4.0 * _EPS * abs(a):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def ellip_k(k: float | None = None, *, complement: float | None = None) -> float:
    """Complete elliptic integral K in the modulus convention.

    Pass either the modulus k in [0, 1) or its complement k' = sqrt(1-k^2)
    in (0, 1]; the complement form avoids cancellation near k = 1.
    """
    if (k is None) == (complement is None):
        raise ValueError("pass exactly one of k or complement")
    if complement is None:
        if not 0.0 <= k < 1.0:
            raise ValueError(f"modulus must lie in [0, 1), got {k}")
        complement = math.sqrt((1.0 - k) * (1.0 + k))
    if not 0.0 < complement <= 1.0:
        raise ValueError(f"complement must lie in (0, 1], got {complement}")
    return math.pi / (2.0 * _agm(1.0, complement))


def sn_cn_dn(u, k: float, *, complement: float | None = None):
    """Jacobi sn, cn, dn at argument u (scalar or array) and modulus k.

    Descending Landen recursion: run the AGM on (1, k'), set
    phi_N = 2^N a_N u, then fold back through
    phi_{n-1} = (phi_n + asin(c_n/a_n sin phi_n))/2 and read off
    sn = sin phi_0, cn = cos phi_0, dn = cos phi_0 / cos(phi_1 - phi_0).
    """
    u = np.asarray(u, dtype=float)
    if complement is None:
        if not 0.0 <= k <= 1.0:
            raise ValueError(f"modulus must lie in [0, 1], got {k}")
        complement = math.sqrt((1.0 - k) * (1.0 + k))
    if complement < 1e-12:
        sn = np.tanh(u)
        cn = 1.0 / np.cosh(u)
        return sn, cn, cn.copy()
    if k < 1e-12:
        sn = np.sin(u)
        cn = np.cos(u)
        return sn, cn, np.ones_like(u)

    a, b = 1.0, complement
    a_list, c_list = [1.0], [k]
    while len(a_list) < 64:
        an, bn = 0.5 * (a + b), math.sqrt(a * b)
        cn_ = 0.5 * (a - b)
        a_list.append(an)
        c_list.append(cn_)
        a, b = an, bn
        if cn_ <= 4.0 * _EPS * an:
            break
    n = len(a_list) - 1
    phi = (2.0**n) * a_list[n] * u
    phi_prev = phi
    for i in range(n, 0, -1):
        s = np.clip(c_list[i] / a_list[i] * np.sin(phi), -1.0, 1.0)
        phi_prev = phi
        phi = 0.5 * (phi + np.arcsin(s))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = cn / np.cos(phi_prev - phi)
    return sn, cn, dn


def jacobi_sn(u, k: float):
    return sn_cn_dn(u, k)[0]


def _modulus(a: float, params: Params) -> tuple[float, float]:
    """Squared modulus and complement for amplitude a, in cancellation-safe form."""
    al, be = params.alpha, params.beta
    denom = 2.0 * be - al * a * a
    m2 = al * a * a / denom
    mc2 = 2.0 * al * (params.binodal - a) * (params.binodal + a) / denom
    return m2, mc2


def _wave_scale(a: float, params: Params) -> float:
    return math.sqrt((2.0 * params.beta - params.alpha * a * a) / (2.0 * params.kappa))


@dataclass(frozen=True)
class WaveProfile:
    """Closed-form stationary wave phi(x) = a sn(h x, m) and its derivatives."""

    amplitude: float
    modulus: float
    complement: float
    scale: float
    period: float
    params: Params

    def __call__(self, x):
        sn, _, _ = sn_cn_dn(np.asarray(x, dtype=float) * self.scale, self.modulus, complement=self.complement)
        return self.amplitude * sn

    def with_derivatives(self, x):
        """Return (phi, phi_x, phi_xx) sampled at x, all in closed form.

        phi_x = a h cn dn and, via the stationary relation
        kappa phi_xx = F'(phi), phi_xx needs no further elliptic identities.
        """
        x = np.asarray(x, dtype=float)
        sn, cn, dn = sn_cn_dn(x * self.scale, self.modulus, complement=self.complement)
        phi = self.amplitude * sn
        phi_x = self.amplitude * self.scale * cn * dn
        phi_xx = self.params.df(phi) / self.params.kappa
        return phi, phi_x, phi_xx


def periodic_wave(a: float, params: Params) -> WaveProfile:
    """Stationary wave of amplitude a in (0, binodal)."""
    if not 0.0 < a < params.binodal:
        raise ValueError(f"amplitude must lie in (0, {params.binodal}), got {a}")
    m2, mc2 = _modulus(a, params)
    h = _wave_scale(a, params)
    mc = math.sqrt(mc2)
    p = 4.0 * ellip_k(complement=mc) / h
    return WaveProfile(
        amplitude=a,
        modulus=math.sqrt(m2),
        complement=mc,
        scale=h,
        period=p,
        params=params,
    )


def period_of_amplitude(a: float, params: Params) -> float:
    """Wave period p(a) = 4 K(m(a)) / h(a); increasing in a."""
    if not 0.0 < a < params.binodal:
        raise ValueError(f"amplitude must lie in (0, {params.binodal}), got {a}")
    _, mc2 = _modulus(a, params)
    return 4.0 * ellip_k(complement=math.sqrt(mc2)) / _wave_scale(a, params)


def amplitude_of_period(p: float, params: Params, rtol: float = 1e-13) -> float:
    """Invert p(a) by bisection.

    The bisection runs in the variable t with a = binodal (1 - exp(-t)),
    which keeps resolution uniform both at small amplitude and in the
    near-binodal tail where p depends on 1 - a/binodal logarithmically.
    """
    if p <= params.p_min:
        raise ValueError(f"period must exceed p_min = {params.p_min}, got {p}")
    binodal = params.binodal

    def period_at(t: float) -> float:
        return period_of_amplitude(binodal * (-math.expm1(-t)), params)

    # Beyond t ~ 36 the amplitude rounds to the binodal in double precision.
    t_lo, t_hi = 1e-12, 1.0
    while period_at(t_hi) < p:
        t_hi = min(2.0 * t_hi, 36.0)
        if t_hi == 36.0 and period_at(t_hi) < p:
            raise ValueError(f"period {p} is beyond double-precision amplitude resolution")
    for _ in range(200):
        t_mid = 0.5 * (t_lo + t_hi)
        if period_at(t_mid) < p:
            t_lo = t_mid
        else:
            t_hi = t_mid
        if t_hi - t_lo <= rtol * t_hi:
            break
    return binodal * (-math.expm1(-0.5 * (t_lo + t_hi)))


def period_derivative(a: float, params: Params) -> float:
    """dp/da evaluated from the regularized quadrature form.

    p'(a) = 2 sqrt(2 kappa)/sqrt(F(0) - F(a))
            - sqrt(2 kappa) * int_0^a (F'(y) - F'(a)) / (F(y) - F(a))^{3/2} dy,
    with the substitution y = a - u^2 removing the square-root endpoint
    singularity of the integrand.
    """
    if not 0.0 < a < params.binodal:
        raise ValueError(f"amplitude must lie in (0, {params.binodal}), got {a}")
    f0 = params.f(0.0)
    fa = params.f(a)
    dfa = params.df(a)

    def integrand(u: float) -> float:
        y = a - u * u
        gap = params.f(y) - fa
        if gap <= 0.0:
            # u -> 0 limit of the substituted integrand: -2 F''(a) / |F'(a)|^{3/2}.
            return -2.0 * params.d2f(a) / max(-dfa, 1e-300) ** 1.5
        return (params.df(y) - dfa) / gap**1.5 * 2.0 * u

    tail, _ = quad(integrand, 0.0, math.sqrt(a), limit=200, epsabs=1e-12, epsrel=1e-11)
    root = math.sqrt(2.0 * params.kappa)
    return 2.0 * root / math.sqrt(f0 - fa) - root * tail


@dataclass(frozen=True)
class Spinodal:
    """Linear-instability summary of the homogeneous zero state."""

    p_min: float
    xi_s: float
    p_s: float
    a_s: float
    lambda_top: float


def spinodal(params: Params) -> Spinodal:
    return Spinodal(
        p_min=params.p_min,
        xi_s=params.xi_s,
        p_s=params.p_s,
        a_s=amplitude_of_period(params.p_s, params),
        lambda_top=params.lambda_top,
    )


@dataclass(frozen=True)
class Kink:
    """Single transition layer connecting the binodal states."""

    profile: Callable[[np.ndarray], np.ndarray]
    e_min: float
    e_min_inf: float


def kink(params: Params) -> Kink:
    binodal = params.binodal
    rate = math.sqrt(params.beta / (2.0 * params.kappa))
    length = params.half_length

    def profile(x):
        return binodal * np.tanh(rate * np.asarray(x, dtype=float))

    k_l = binodal * math.tanh(rate * length)
    e_min = math.sqrt(2.0 * params.kappa * params.alpha) * k_l * (
        params.beta / params.alpha - k_l**2 / 3.0
    )
    e_min_inf = (2.0 / 3.0) * (params.beta**2 / params.alpha) * math.sqrt(
        2.0 * params.kappa / params.beta
    )
    return Kink(profile=profile, e_min=e_min, e_min_inf=e_min_inf)
