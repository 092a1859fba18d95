"""Floquet spectrum of the linearized interface dynamics about a periodic wave.

Perturbations psi of the wave phi(.; a) obey the fourth-order problem

    (-kappa psi'' + b(x) psi)'' = lambda psi,      b = F''(phi),

written as the first-order system y' = A(x; lambda) y with

    A = [[0, 1, 0, 0],
         [0, 0, 1, 0],
         [0, 0, 0, 1],
         [(b'' - lambda)/kappa, 2 b'/kappa, b/kappa, 0]].

A is traceless, so the monodromy M(lambda) over one period has unit
determinant.  lambda belongs to the spectrum exactly when the Evans
determinant D(lambda, xi) = det(M - e^{i xi p} I) vanishes for some real
Bloch frequency xi, i.e. when M carries a Floquet multiplier on the unit
circle.  The leading (largest real) spectrum point is located by bisecting
that membership test downward from a bracket hint, which amplitude
continuation supplies when tabulating.

b, b' and b'' come from the closed-form wave, so no numerical
differentiation enters the coefficients.  The RK4 transfer matrices of all
steps are built in one vectorized batch and multiplied pairwise, which is
algebraically the classical fixed-step RK4 for the matrix initial value
problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .waves import Params, WaveProfile, periodic_wave

__all__ = [
    "Monodromy",
    "monodromy",
    "evans",
    "floquet_multipliers",
    "LeadingEigenvalue",
    "leading_eigenvalue",
    "EigTable",
    "default_amplitudes",
    "build_eig_table",
    "rescale_table",
]

_UNIT_CIRCLE_TOL = 1e-5


@dataclass(frozen=True)
class Monodromy:
    """Period map of the linearized system at spectral parameter lam."""

    matrix: np.ndarray
    period: float
    lam: float
    rk_steps: int

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.matrix))


def _coefficients(wave: WaveProfile, x: np.ndarray, params: Params):
    phi, phi_x, phi_xx = wave.with_derivatives(x)
    b = 3.0 * params.alpha * phi**2 - params.beta
    bp = 6.0 * params.alpha * phi * phi_x
    bpp = 6.0 * params.alpha * (phi_x**2 + phi * phi_xx)
    return b, bp, bpp


def _step_propagators(
    wave: WaveProfile, lam: float, params: Params, rk_steps: int, x_end: float
) -> np.ndarray:
    """RK4 one-step transfer matrices for all rk_steps over [0, x_end]."""
    h = x_end / rk_steps
    x = 0.5 * h * np.arange(2 * rk_steps + 1)
    b, bp, bpp = _coefficients(wave, x, params)
    inv_kappa = 1.0 / params.kappa
    amat = np.zeros((x.size, 4, 4))
    amat[:, 0, 1] = 1.0
    amat[:, 1, 2] = 1.0
    amat[:, 2, 3] = 1.0
    amat[:, 3, 0] = (bpp - lam) * inv_kappa
    amat[:, 3, 1] = 2.0 * bp * inv_kappa
    amat[:, 3, 2] = b * inv_kappa

    a1 = amat[0:-1:2]
    a2 = amat[1::2]
    a4 = amat[2::2]
    eye = np.broadcast_to(np.eye(4), a1.shape)
    k1 = a1
    k2 = a2 @ (eye + 0.5 * h * k1)
    k3 = a2 @ (eye + 0.5 * h * k2)
    k4 = a4 @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """prod_{i = n-1..0} mats[i] by pairwise reduction."""
    while mats.shape[0] > 1:
        m = mats.shape[0] // 2
        head = np.matmul(mats[1 : 2 * m : 2], mats[0 : 2 * m : 2])
        if mats.shape[0] % 2:
            mats = np.concatenate([head, mats[-1:]])
        else:
            mats = head
    return mats[0]


def monodromy(lam: float, a: float, params: Params, rk_steps: int = 2048) -> Monodromy:
    """Transfer matrix over one wave period at spectral parameter lam."""
    if rk_steps < 256:
        raise ValueError(f"rk_steps must be at least 256, got {rk_steps}")
    wave = periodic_wave(a, params)
    props = _step_propagators(wave, lam, params, rk_steps, wave.period)
    mat = _ordered_product(props)
    return Monodromy(matrix=mat.astype(complex), period=wave.period, lam=lam, rk_steps=rk_steps)


def _half_monodromy(lam: float, a: float, params: Params, rk_steps: int) -> tuple[np.ndarray, float]:
    """Transfer matrix over half a period, where the coefficients already repeat.

    b = F''(phi) depends on phi only through phi^2, and phi(x + p/2) = -phi(x),
    so b, b', b'' all have period p/2.  The full monodromy is the square of
    this matrix; its norm is the square root, which roughly doubles the period
    range over which unit-circle multipliers stay resolvable.
    """
    wave = periodic_wave(a, params)
    steps = max(rk_steps // 2, 256)
    props = _step_propagators(wave, lam, params, steps, 0.5 * wave.period)
    return _ordered_product(props), wave.period


def floquet_multipliers(mono: Monodromy) -> np.ndarray:
    return np.linalg.eigvals(mono.matrix)


def evans(
    lam: float,
    xi: float,
    a: float,
    params: Params,
    rk_steps: int = 2048,
    mono: Monodromy | None = None,
) -> complex:
    """Evans determinant D(lam, xi) = det(M(lam) - e^{i xi p} I)."""
    if mono is None:
        mono = monodromy(lam, a, params, rk_steps)
    z = np.exp(1j * xi * mono.period)
    return complex(np.linalg.det(mono.matrix - z * np.eye(4)))


def _reciprocal_pair_w(matrix: np.ndarray) -> tuple[float, float] | None:
    """Roots of w^2 - c1 w + (c2 - 2) where multipliers pair as {z, 1/z}.

    The system is Hamiltonian, so the characteristic polynomial of any
    transfer matrix is self-reciprocal and w = z + 1/z reduces it to a real
    quadratic with c1 = tr M and c2 the sum of principal 2x2 minors.  A
    multiplier sits on the unit circle exactly when a real root has
    |w| <= 2.  Working with the invariants instead of eigvals keeps the
    near-circle multipliers accurate even when the hyperbolic interface
    multiplier dwarfs them: the error is about eps times that multiplier,
    while a direct eigensolve loses them entirely.

    Returns None when both roots are complex (all multipliers off circle).
    """
    c1 = float(np.trace(matrix).real)
    c2 = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            c2 += float((matrix[i, i] * matrix[j, j] - matrix[i, j] * matrix[j, i]).real)
    disc = c1 * c1 - 4.0 * (c2 - 2.0)
    if disc < 0.0:
        return None
    root = math.sqrt(disc)
    w_big = 0.5 * (c1 + math.copysign(root, c1))
    if w_big == 0.0:
        w_small = math.sqrt(max(2.0 - c2, 0.0))
        return -w_small, w_small
    return w_big, (c2 - 2.0) / w_big


def _in_spectrum(lam: float, a: float, params: Params, rk_steps: int) -> tuple[bool, float]:
    """Unit-circle membership through the half-period map.

    The coefficients repeat at half the wave period, the half map's
    multipliers are square roots of the full ones, and membership transfers
    verbatim while the Bloch phase doubles.
    """
    half, _ = _half_monodromy(lam, a, params, rk_steps)
    ws = _reciprocal_pair_w(half)
    if ws is None:
        return False, 0.0
    on_circle = [w for w in ws if abs(w) <= 2.0 + _UNIT_CIRCLE_TOL]
    if not on_circle:
        return False, 0.0
    w = min(on_circle, key=abs) if len(on_circle) == 2 else on_circle[0]
    half_phase = math.acos(min(max(w / 2.0, -1.0), 1.0))
    return True, 2.0 * half_phase


@dataclass(frozen=True)
class LeadingEigenvalue:
    value: float
    xi: float
    period: float


def leading_eigenvalue(
    a: float,
    params: Params,
    bracket_hint: float | None = None,
    rk_steps: int = 2048,
    rtol: float = 1e-6,
    full: bool = False,
):
    """Largest real spectrum point of the linearization about the a-wave.

    Membership of lam in the spectrum is tested through the Floquet
    multipliers of M(lam): lam is inside iff a multiplier sits on the unit
    circle, which is the zero set of min_xi |D(lam, xi)| in exact
    arithmetic but much better conditioned to evaluate.  Bisection runs
    between an inside point (found by halving downward from the hint) and
    an outside point just above the hint.
    """
    hint = params.lambda_top if bracket_hint is None else float(bracket_hint)
    if hint <= 0:
        raise ValueError("bracket hint must be positive")

    hi = hint * 1.05
    for _ in range(60):
        inside, _ = _in_spectrum(hi, a, params, rk_steps)
        if not inside:
            break
        hi *= 1.3
    else:
        raise RuntimeError(f"no upper spectral edge found above {hint} for a={a}")

    lo = min(hint, hi / 1.05)
    phase = 0.0
    for _ in range(60):
        inside, phase = _in_spectrum(lo, a, params, rk_steps)
        if inside:
            break
        lo *= 0.5
    else:
        raise RuntimeError(f"no spectrum found below {hint} for a={a} after 60 halvings")

    period = periodic_wave(a, params).period
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        inside, ph = _in_spectrum(mid, a, params, rk_steps)
        if inside:
            lo, phase = mid, ph
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    xi = (phase / period) % (2.0 * math.pi / period)
    if full:
        return LeadingEigenvalue(value=lam, xi=xi, period=period)
    return lam


@dataclass
class EigTable:
    """Leading eigenvalue along the amplitude family at one kappa."""

    amplitudes: np.ndarray
    periods: np.ndarray
    lambda_max: np.ndarray
    xi: np.ndarray
    kappa: float
    params: Params

    def lambda_of_period(self, p) -> np.ndarray:
        """Monotone interpolant p -> lambda_max, clamped to the table span."""
        p = np.asarray(p, dtype=float)
        pp = np.clip(p, self.periods[0], self.periods[-1])
        out = np.interp(pp, self.periods, self.lambda_max)
        return float(out) if out.ndim == 0 else out

    def to_csv(self, path) -> None:
        lines = ["amplitude,period,lambda_max,kappa"]
        for a, p, lam in zip(self.amplitudes, self.periods, self.lambda_max):
            lines.append(f"{float(a)!r},{float(p)!r},{float(lam)!r},{float(self.kappa)!r}")
        from pathlib import Path

        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path, params: Params) -> "EigTable":
        from pathlib import Path

        rows = [
            line.split(",")
            for line in Path(path).read_text().strip().splitlines()[1:]
            if line.strip()
        ]
        data = np.array([[float(v) for v in r] for r in rows])
        kappa = float(data[0, 3])
        if abs(kappa - params.kappa) > 1e-15 * kappa:
            raise ValueError(f"table kappa {kappa} does not match params kappa {params.kappa}")
        return cls(
            amplitudes=data[:, 0],
            periods=data[:, 1],
            lambda_max=data[:, 2],
            xi=np.full(data.shape[0], np.nan),
            kappa=kappa,
            params=params,
        )


def _default_p_max(params: Params) -> float:
    """Longest period the membership test resolves in double precision.

    The interface transfer grows like exp(sqrt(2 beta/kappa) p/2); the
    invariant-based circle test keeps about eps times that as absolute
    noise, which crosses the membership tolerance near p = 49 sqrt(kappa /
    (2 beta)).  Stay a little inside.
    """
    return 44.0 * math.sqrt(params.kappa / (2.0 * params.beta))


def default_amplitudes(params: Params, da: float = 0.01, p_max: float | None = None) -> np.ndarray:
    """Uniform amplitude grid plus a log-graded tail reaching period p_max."""
    from .waves import period_of_amplitude

    if p_max is None:
        p_max = _default_p_max(params)
    binodal = params.binodal
    amps = list(np.arange(da, 1.0, da) * binodal)
    m = 2.25
    while m < 15.1:
        a = binodal * (1.0 - 10.0 ** (-m))
        if a <= amps[-1]:
            m += 0.25
            continue
        amps.append(a)
        if period_of_amplitude(a, params) >= p_max:
            break
        m += 0.25
    return np.array(amps)


def build_eig_table(
    params: Params,
    amplitudes: np.ndarray | None = None,
    rk_steps: int = 2048,
    rtol: float = 1e-6,
    p_max: float | None = None,
    workers: int = 1,
) -> EigTable:
    """Tabulate the leading eigenvalue with amplitude continuation.

    A sequential coarse pass (every fourth amplitude) chains bracket hints;
    the remaining amplitudes inherit interpolated hints and can be filled
    in parallel since each bisection is then independent.
    """
    if amplitudes is None:
        amplitudes = default_amplitudes(params, p_max=p_max)
    amplitudes = np.asarray(amplitudes, dtype=float)
    n = amplitudes.size
    values = np.full(n, np.nan)
    xis = np.full(n, np.nan)
    periods = np.array([periodic_wave(a, params).period for a in amplitudes])

    coarse = list(range(0, n, 4))
    if coarse[-1] != n - 1:
        coarse.append(n - 1)
    hint = params.lambda_top
    for i in coarse:
        res = leading_eigenvalue(
            amplitudes[i], params, bracket_hint=hint, rk_steps=rk_steps, rtol=rtol, full=True
        )
        values[i], xis[i] = res.value, res.xi
        hint = res.value * 1.1

    remaining = [i for i in range(n) if math.isnan(values[i])]

    def hint_for(i: int) -> float:
        j = max(k for k in coarse if k < i)
        return values[j] * 1.1

    def solve(i: int):
        res = leading_eigenvalue(
            amplitudes[i], params, bracket_hint=hint_for(i), rk_steps=rk_steps, rtol=rtol, full=True
        )
        return i, res.value, res.xi

    if workers > 1 and remaining:
        from concurrent.futures import ProcessPoolExecutor

        jobs = [(i, params, float(amplitudes[i]), hint_for(i), rk_steps, rtol) for i in remaining]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, v, x in pool.map(_solve_entry, jobs):
                values[i], xis[i] = v, x
    else:
        for i in remaining:
            _, values[i], xis[i] = solve(i)

    return EigTable(
        amplitudes=amplitudes,
        periods=periods,
        lambda_max=values,
        xi=xis,
        kappa=params.kappa,
        params=params,
    )


def _solve_entry(job):
    i, params, a, hint, rk_steps, rtol = job
    res = leading_eigenvalue(a, params, bracket_hint=hint, rk_steps=rk_steps, rtol=rtol, full=True)
    return i, res.value, res.xi


def rescale_table(table: EigTable, kappa_new: float, params_new: Params | None = None) -> EigTable:
    """Exact kappa-rescaling: lambda scales as 1/kappa, periods as sqrt(kappa).

    Valid because the eigenvalue problem at equal amplitude maps onto itself
    under x -> x / sqrt(kappa); the potential parameters must be unchanged.
    """
    if kappa_new <= 0:
        raise ValueError("kappa_new must be positive")
    old = table.params
    if params_new is None:
        params_new = Params(
            alpha=old.alpha,
            beta=old.beta,
            kappa=kappa_new,
            nu=old.nu,
            K=old.K,
            half_length=old.half_length,
            mobility=old.mobility,
        )
    if (params_new.alpha, params_new.beta) != (old.alpha, old.beta):
        raise ValueError("rescaling requires identical potential parameters")
    ratio = table.kappa / kappa_new
    return EigTable(
        amplitudes=table.amplitudes.copy(),
        periods=table.periods * math.sqrt(kappa_new / table.kappa),
        lambda_max=table.lambda_max * ratio,
        xi=table.xi * math.sqrt(table.kappa / kappa_new),
        kappa=kappa_new,
        params=params_new,
    )
