"""Free energy, the period-energy table, and coarseness measures.

The coarseness of a state is read off the window energy of the stationary
wave family: E(p) is the free energy on [-L, L) of the wave with period p,
shifted so a zero crossing sits at the origin.  E decreases from e_max =
2 L F(0) at the shortest period toward the single-kink energy e_min in a
staircase whose sharp drops line up with zero crossings leaving the window.
Because E is not invertible, periods are assigned to energies through the
infimum pseudoinverse p(e) = inf {p : E(p) <= e}; for time series we use
the interpolant built on the monotone envelope of the tabulated curve,
which realizes the same map up to table resolution.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .grid import Field, derivative, l2_norm
from .waves import Params, amplitude_of_period, periodic_wave

__all__ = [
    "free_energy",
    "EnergyScale",
    "energy_scale",
    "wave_window_energy",
    "energy_of_period",
    "plateau_slope_bound",
    "EnergyPeriodTable",
    "period_from_energy",
    "kohn_otto_length",
    "ClampWarning",
]


class ClampWarning(UserWarning):
    """An energy fell outside (e_min, e_max] and was clamped."""


def free_energy(phi: Field, params: Params) -> float:
    """E(phi) = int F(phi) + (kappa/2) phi_x^2 over [-L, L)."""
    if not np.all(np.isfinite(phi.values)):
        raise ValueError("field contains non-finite values")
    grad = l2_norm(derivative(phi, 1))
    bulk = phi.grid.dx * float(np.sum(params.f(phi.values)))
    return bulk + 0.5 * params.kappa * grad**2


@dataclass(frozen=True)
class EnergyScale:
    """Landmark energies of the wave family on the window [-L, L)."""

    e_max: float
    e_min: float
    e_spinodal: float


def _window_samples(a: float, params: Params) -> int:
    # Resolve the transition-layer scale h(a) ~ sqrt(beta/kappa); Simpson
    # error then sits near (dx*h)^4/180 of the layer contributions.
    h = math.sqrt((2.0 * params.beta - params.alpha * a * a) / (2.0 * params.kappa))
    n = max(4096, int(64.0 * h * params.half_length))
    return 1 << (n - 1).bit_length()


def wave_window_energy(a: float, params: Params) -> float:
    """Free energy on [-L, L) of the amplitude-a wave with phi(0) = 0.

    The first integral (kappa/2) phi_x^2 = F(phi) - F(a) turns the energy
    density into 2 F(phi) - F(a), so only profile values are integrated and
    no numerical derivative of a non-periodic window is needed.
    """
    if a == 0.0:
        return params.e_max
    wave = periodic_wave(a, params)
    n = _window_samples(a, params)
    x = np.linspace(-params.half_length, params.half_length, n + 1)
    density = 2.0 * params.f(wave(x)) - params.f(a)
    return float(simpson(density, x=x))


def energy_of_period(p: float, params: Params) -> float:
    """E(p), the window energy of the period-p wave."""
    if p < params.p_min:
        raise ValueError(f"period must be at least p_min = {params.p_min}, got {p}")
    if p == params.p_min:
        return params.e_max
    return wave_window_energy(amplitude_of_period(p, params), params)


def energy_scale(params: Params) -> EnergyScale:
    from .waves import kink, spinodal

    sp = spinodal(params)
    return EnergyScale(
        e_max=params.e_max,
        e_min=kink(params).e_min,
        e_spinodal=wave_window_energy(sp.a_s, params),
    )


def plateau_slope_bound(a: float, params: Params) -> float:
    """Upper bound on dE/dp wherever the slope is positive.

    bound = a^3 sqrt(alpha kappa) (1+delta)^{3/2} delta^3 (delta-1) / (2 L),
    delta = sqrt(2 beta/(alpha a^2) - 1).
    """
    delta = math.sqrt(2.0 * params.beta / (params.alpha * a * a) - 1.0)
    return (
        a**3
        * math.sqrt(params.alpha * params.kappa)
        * (1.0 + delta) ** 1.5
        * delta**3
        * (delta - 1.0)
        / (2.0 * params.half_length)
    )


@dataclass
class EnergyPeriodTable:
    """Tabulated E(p) along the amplitude family, plus its monotone envelope."""

    params: Params
    amplitudes: np.ndarray
    periods: np.ndarray
    energies: np.ndarray
    env_periods: np.ndarray
    env_energies: np.ndarray
    truncated: bool

    @classmethod
    def build(
        cls,
        params: Params,
        gap_fraction: float = 1.0 / 200.0,
        cap_fraction: float = 1e-4,
        max_nodes: int = 4000,
    ) -> "EnergyPeriodTable":
        """Tabulate E over amplitude, graded toward the binodal.

        The table ends once the energy is within cap_fraction of the full
        range above e_min, or at the last amplitude distinguishable from the
        binodal in double precision (then truncated=True).  Adjacent rows are
        refined until successive energy gaps drop below gap_fraction of the
        range; nodes are inserted at midpoints of u = log(1 - a/binodal) so
        refinement behaves in the near-binodal tail as well.
        """
        from .waves import kink

        binodal = params.binodal
        e_max = params.e_max
        e_min = kink(params).e_min
        e_cap = e_min + (e_max - e_min) * cap_fraction

        def u_of(a: float) -> float:
            return math.log(1.0 - a / binodal)

        def a_of(u: float) -> float:
            return binodal * (-math.expm1(u))

        us = [u_of(binodal * s) for s in np.linspace(0.005, 0.99, 120)]
        truncated = True
        for m in np.arange(2.25, 15.6, 0.25):
            u = math.log(10.0) * (-m)
            us.append(u)
            if wave_window_energy(a_of(u), params) <= e_cap:
                truncated = False
                break

        nodes = [(u, wave_window_energy(a_of(u), params)) for u in us]
        gap = gap_fraction * (e_max - e_min)
        # Leading cell against the analytic (p_min, e_max) row.
        while len(nodes) < max_nodes:
            refined = False
            if abs(nodes[0][1] - e_max) > gap:
                # Halve the leading amplitude; u = log(1 - a/binodal) ~ -a/binodal there.
                u = 0.5 * nodes[0][0]
                nodes.insert(0, (u, wave_window_energy(a_of(u), params)))
                refined = True
            out = [nodes[0]]
            for prev, cur in zip(nodes, nodes[1:]):
                if abs(cur[1] - prev[1]) > gap and abs(cur[0] - prev[0]) > 1e-6:
                    u = 0.5 * (prev[0] + cur[0])
                    out.append((u, wave_window_energy(a_of(u), params)))
                    refined = True
                out.append(cur)
            nodes = out
            if not refined:
                break

        amps = np.array([0.0] + [a_of(u) for u, _ in nodes])
        periods = np.array(
            [params.p_min]
            + [periodic_wave(a, params).period for a in amps[1:]]
        )
        energies = np.array([e_max] + [e for _, e in nodes])
        order = np.argsort(periods)
        amps, periods, energies = amps[order], periods[order], energies[order]

        env = np.minimum.accumulate(energies)
        keep = np.empty(env.size, dtype=bool)
        keep[0] = True
        keep[1:] = env[1:] < env[:-1]
        return cls(
            params=params,
            amplitudes=amps,
            periods=periods,
            energies=energies,
            env_periods=periods[keep],
            env_energies=env[keep],
            truncated=truncated,
        )

    @property
    def e_max(self) -> float:
        return float(self.env_energies[0])

    @property
    def e_floor(self) -> float:
        return float(self.env_energies[-1])

    @property
    def p_cap(self) -> float:
        return float(self.env_periods[-1])

    def period_of_energy(self, e) -> np.ndarray:
        """Envelope interpolant e -> p, clipped to the tabulated range."""
        e = np.asarray(e, dtype=float)
        ee = np.clip(e, self.e_floor, self.e_max)
        # np.interp needs ascending abscissae; envelope energies descend.
        out = np.interp(-ee, -self.env_energies, self.env_periods)
        return float(out) if out.ndim == 0 else out

    def energy_of_period_envelope(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        pp = np.clip(p, self.env_periods[0], self.env_periods[-1])
        out = np.interp(pp, self.env_periods, self.env_energies)
        return float(out) if out.ndim == 0 else out


def period_from_energy(e: float, table: EnergyPeriodTable, rtol: float = 1e-10) -> float:
    """Infimum pseudoinverse p = inf {p >= p_min : E(p) <= e}.

    Energies outside (e_min, e_max] are clamped to the table range with a
    ClampWarning.  The first table cell crossing e is refined by bisection
    on the continuous E(p).
    """
    params = table.params
    if e >= table.e_max:
        if e > table.e_max:
            warnings.warn(f"energy {e} above e_max; clamping to p_min", ClampWarning)
        return params.p_min
    if e <= table.e_floor:
        warnings.warn(f"energy {e} at or below the table floor; clamping to p_cap", ClampWarning)
        return table.p_cap

    idx = int(np.argmax(table.energies <= e))
    p_lo = table.periods[idx - 1]
    p_hi = table.periods[idx]
    for _ in range(80):
        p_mid = 0.5 * (p_lo + p_hi)
        if energy_of_period(p_mid, params) <= e:
            p_hi = p_mid
        else:
            p_lo = p_mid
        if p_hi - p_lo <= rtol * p_hi:
            break
    return float(p_hi)


def kohn_otto_length(phi: Field, mean_tol: float = 1e-10) -> float:
    """Interface-scale length sup {(1/2L) int phi zeta : zeta periodic, |zeta'| <= 1}.

    By duality the supremum equals (1/2L) min_c int |Phi - c| with Phi the
    periodic antiderivative of phi, minimized at the median of Phi.
    """
    if abs(phi.mean()) > mean_tol:
        raise ValueError(f"field mean {phi.mean():.3e} exceeds tolerance {mean_tol:.1e}")
    grid = phi.grid
    hat = np.fft.fft(phi.values)
    anti = np.zeros_like(hat)
    nonzero = grid.k != 0.0
    anti[nonzero] = hat[nonzero] / (1j * grid.k[nonzero])
    anti[grid.nyquist] = 0.0
    big_phi = np.fft.ifft(anti).real
    c = np.median(big_phi)
    return float(grid.dx * np.sum(np.abs(big_phi - c)) / (2.0 * grid.half_length))
