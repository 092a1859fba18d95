"""Initial data protocols.

Phase field: dealiased normal noise at the grid points, then (for run
setup) pre-evolution of the uncoupled equation down to the energy surface
0.99 E_max, discarding and halving the step whenever it lands below
target - tol.  Velocity: zero, the unit-sup-norm compactly supported
bump, or random low-mode Fourier data.  All draws come from one generator
per run, phase first, so a seed pins the whole initialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import solver as _solver
from .config import SolverConfig
from .energy import free_energy
from .grid import Field, Grid, from_spectral, to_spectral
from .waves import Params

__all__ = [
    "InitRecipe",
    "DtUnderflowError",
    "random_phase_init",
    "pre_evolve_to_energy",
    "bump_profile",
    "bump_velocity",
    "random_fourier_velocity",
    "build_initial_fields",
]


@dataclass(frozen=True)
class InitRecipe:
    seed: int
    sigma: float = 0.1
    energy_target_frac: float = 0.99
    energy_tol: float = 1e-4
    fourier_cutoff: int = 32

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.energy_target_frac < 1.0:
            raise ValueError("energy_target_frac must sit in (0, 1)")
        if self.energy_tol <= 0:
            raise ValueError("energy_tol must be positive")
        if self.fourier_cutoff < 1:
            raise ValueError("fourier_cutoff must be at least 1")


class DtUnderflowError(RuntimeError):
    """Step halving hit the floor before reaching the target energy."""

    def __init__(self, message: str, best_energy: float):
        super().__init__(message)
        self.best_energy = best_energy


def random_phase_init(recipe: InitRecipe, grid: Grid,
                      rng: np.random.Generator | None = None) -> Field:
    """Mean-zero normal samples at the grid points with upper modes zeroed."""
    if rng is None:
        rng = np.random.default_rng(recipe.seed)
    noise = rng.normal(0.0, recipe.sigma, grid.n)
    hat = to_spectral(Field(grid, noise))
    hat[~grid.dealias_mask] = 0.0
    return from_spectral(grid, hat)


def pre_evolve_to_energy(phi: Field, recipe: InitRecipe, params: Params,
                         dt0: float = 1e-3, dt_min: float = 1e-12,
                         max_steps: int = 1_000_000) -> Field:
    """Evolve the uncoupled equation until E lands on the target surface.

    A step that falls below target - tol is thrown away and retried with
    half the step.  A field already within tol is returned as is; one
    already below the band cannot be raised by a gradient flow and is
    rejected.
    """
    grid = phi.grid
    target = recipe.energy_target_frac * params.e_max
    tol = recipe.energy_tol
    energy = free_energy(phi, params)
    if abs(energy - target) <= tol:
        return phi
    if energy < target - tol:
        raise ValueError(
            f"free energy {energy:g} is already below the target band "
            f"{target:g} +- {tol:g}"
        )

    dt = dt0
    stepper = _solver.Stepper(grid, params, dt, "uncoupled")
    phi_hat = stepper.spectral(phi.values)
    best = energy
    for _ in range(max_steps):
        cand_hat, _ = stepper.advance(phi_hat, None)
        cand = Field(grid, stepper.physical(cand_hat))
        cand_energy = free_energy(cand, params)
        if abs(cand_energy - target) <= tol:
            return cand
        if cand_energy < target - tol:
            dt *= 0.5
            if dt < dt_min:
                raise DtUnderflowError(
                    f"step underflow below {dt_min:g} at energy {best:g} "
                    f"(target {target:g} +- {tol:g})",
                    best_energy=best,
                )
            stepper = _solver.Stepper(grid, params, dt, "uncoupled")
            continue
        phi_hat = cand_hat
        best = cand_energy
    raise DtUnderflowError(
        f"no arrival at the target band within {max_steps} steps "
        f"(closest energy {best:g})",
        best_energy=best,
    )


_BUMP_PEAK = math.sqrt(2.0 - math.sqrt(3.0))
BUMP_C = 1.0 / (_BUMP_PEAK * math.exp(1.0 / (1.0 - math.sqrt(3.0))))


def bump_profile(x, half_length: float = 1.0) -> np.ndarray:
    """(C/L) x exp(1/((x/L)^2 - 1)) inside (-L, L), zero outside."""
    xi = np.asarray(x, dtype=float) / half_length
    values = np.zeros_like(xi)
    inside = np.abs(xi) < 1.0
    values[inside] = (BUMP_C * xi[inside]) * np.exp(1.0 / (xi[inside] ** 2 - 1.0))
    return values


def bump_velocity(grid: Grid) -> Field:
    """Odd compactly supported bump with unit sup norm, peaked at
    x = L sqrt(2 - sqrt(3))."""
    return Field(grid, bump_profile(grid.x, grid.half_length))


def random_fourier_velocity(recipe: InitRecipe, grid: Grid,
                            rng: np.random.Generator | None = None) -> Field:
    """Low-mode field with coefficients N(0,1) + i N(0,1), conjugate paired.

    The coefficients are used literally in the 1/n-normalized inverse
    transform, so the field amplitude scales like cutoff/n.
    """
    if rng is None:
        rng = np.random.default_rng(recipe.seed)
    cutoff = recipe.fourier_cutoff
    if cutoff >= grid.n // 4:
        raise ValueError(f"fourier_cutoff {cutoff} must stay below n/4 = {grid.n // 4}")
    re = rng.standard_normal(cutoff)
    im = rng.standard_normal(cutoff)
    hat = np.zeros(grid.n, dtype=complex)
    hat[1 : cutoff + 1] = re + 1j * im
    hat[-cutoff:] = np.conj(hat[1 : cutoff + 1][::-1])
    return from_spectral(grid, hat)


def _load_field_csv(path: str, column: str, grid: Grid) -> Field:
    text = Path(path).read_text().strip().splitlines()
    header = [h.strip() for h in text[0].split(",")]
    if column not in header:
        raise ValueError(f"{path}: no column {column!r} in header {header}")
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    if data.shape[0] != grid.n:
        raise ValueError(f"{path}: {data.shape[0]} rows, grid wants {grid.n}")
    return Field(grid, data[:, header.index(column)])


def _project(field: Field) -> Field:
    hat = to_spectral(field)
    hat[~field.grid.dealias_mask] = 0.0
    return from_spectral(field.grid, hat)


def build_initial_fields(cfg: SolverConfig, grid: Grid,
                         params: Params) -> tuple[Field, Field | None]:
    """Initial (phi, v) for a configured run, drawn from one generator.

    Random phase data includes the pre-evolution to the target energy
    surface; file-loaded fields are used as stored.  Both fields are
    projected onto the dealiased band on entry.
    """
    rng = np.random.default_rng(cfg.seed)
    recipe = InitRecipe(seed=cfg.seed, fourier_cutoff=cfg.fourier_cutoff)

    if cfg.init_phi == "random":
        phi = random_phase_init(recipe, grid, rng)
        phi = pre_evolve_to_energy(phi, recipe, params)
    else:
        phi = _project(_load_field_csv(cfg.init_phi[len("file:"):], "phi", grid))

    if not cfg.coupled:
        return phi, None
    if cfg.init_v == "none":
        v = Field(grid, np.zeros(grid.n))
    elif cfg.init_v == "bump":
        v = _project(bump_velocity(grid))
    elif cfg.init_v == "fourier":
        v = random_fourier_velocity(recipe, grid, rng)
    else:
        v = _project(_load_field_csv(cfg.init_v[len("file:"):], "v", grid))
    return phi, v
