"""Periodic grid and spectral operations on [-L, L).

Conventions: n uniform points x_i = -L + i*dx with dx = 2L/n, wavenumbers
k_j = pi*j/L in FFT order, forward transform unnormalized (the inverse
carries the 1/n factor).  Real fields are recovered from spectral data by
a symmetric inverse: transform back, check the imaginary residue, drop it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "to_spectral",
    "from_spectral",
    "derivative",
    "dealias",
    "l2_norm",
    "inner",
]


class Grid:
    """Uniform periodic grid with precomputed spectral machinery."""

    def __init__(self, n: int, half_length: float = 1.0):
        if n < 4 or (n & (n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 4, got {n}")
        if half_length <= 0:
            raise ValueError(f"half_length must be positive, got {half_length}")
        self.n = n
        self.half_length = float(half_length)
        self.dx = 2.0 * self.half_length / n
        self.x = -self.half_length + self.dx * np.arange(n)
        # k_j = pi*j/L in FFT order; fftfreq(n, d=dx) returns j/(n*dx).
        self.k = 2.0 * np.pi * np.fft.fftfreq(n, d=self.dx)
        self.modes = np.rint(np.fft.fftfreq(n) * n).astype(int)
        # Keep |j| < n/4; products of band-limited fields then stay alias-free
        # through cubic order.
        self.dealias_mask = np.abs(self.modes) < n // 4
        self.nyquist = n // 2

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Grid)
            and other.n == self.n
            and other.half_length == self.half_length
        )

    def __hash__(self):
        return hash((self.n, self.half_length))

    def __repr__(self):
        return f"Grid(n={self.n}, half_length={self.half_length})"


@dataclass
class Field:
    """Real scalar field sampled on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError(
                f"field shape {self.values.shape} does not match grid n={self.grid.n}"
            )

    def mean(self) -> float:
        return float(self.values.mean())


def to_spectral(f: Field) -> np.ndarray:
    return np.fft.fft(f.values)


def from_spectral(grid: Grid, hat: np.ndarray, rtol: float = 1e-10) -> Field:
    """Symmetric inverse transform; rejects spectra that are not conjugate
    symmetric within rtol of the field scale."""
    w = np.fft.ifft(hat)
    scale = max(float(np.abs(hat).max()) / grid.n, 1e-300)
    resid = float(np.abs(w.imag).max())
    if resid > rtol * scale:
        raise ValueError(
            f"spectrum is not conjugate symmetric: imag residue {resid:.3e} "
            f"exceeds {rtol:.1e} of field scale {scale:.3e}"
        )
    return Field(grid, w.real)


def derivative(f: Field, order: int) -> Field:
    """Spectral derivative of the given order (1 through 4)."""
    if order not in (1, 2, 3, 4):
        raise ValueError(f"derivative order must be 1..4, got {order}")
    grid = f.grid
    mult = (1j * grid.k) ** order
    if order % 2 == 1:
        # The Nyquist coefficient of a real field is real; an odd power of ik
        # would make it imaginary, so it is dropped.
        mult = mult.copy()
        mult[grid.nyquist] = 0.0
    hat = np.fft.fft(f.values) * mult
    return Field(grid, np.fft.ifft(hat).real)


def dealias(hat: np.ndarray, grid: Grid) -> np.ndarray:
    """Zero every mode with |j| >= n/4, returning a new spectrum."""
    if hat.shape != (grid.n,):
        raise ValueError("spectrum length does not match grid")
    out = hat.copy()
    out[~grid.dealias_mask] = 0.0
    return out


def l2_norm(f: Field) -> float:
    return float(np.sqrt(f.grid.dx * np.sum(f.values**2)))


def inner(f: Field, g: Field) -> float:
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    return float(f.grid.dx * np.sum(f.values * g.values))
