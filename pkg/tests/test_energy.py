import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from bchsim.energy import (
    ClampWarning,
    EnergyPeriodTable,
    energy_of_period,
    energy_scale,
    free_energy,
    kohn_otto_length,
    period_from_energy,
    plateau_slope_bound,
    wave_window_energy,
)
from bchsim.grid import Field, Grid, dealias, from_spectral, to_spectral
from bchsim.waves import Params, amplitude_of_period, kink, period_of_amplitude, periodic_wave

E_MAX = 0.5
E_SPINODAL = 0.4219061143562932
TWO_E_MIN = 0.0596284793999944


def test_free_energy_of_constants(params):
    g = Grid(64)
    assert free_energy(Field(g, np.zeros(64)), params) == pytest.approx(E_MAX, rel=1e-14)
    binodal = np.full(64, params.binodal)
    assert free_energy(Field(g, binodal), params) == pytest.approx(0.0, abs=1e-15)


def test_free_energy_of_sine_analytic(params):
    # For phi = c sin(kx) with whole wavelengths in the box, the gradient
    # term integrates to kappa c^2 k^2 L / 2 and the potential term follows
    # from the moments <sin^2> = 1/2, <sin^4> = 3/8.
    g = Grid(256)
    c, m = 0.3, 4
    k = m * math.pi / g.half_length
    phi = Field(g, c * np.sin(k * g.x))
    a, b = params.alpha, params.beta
    box = 2.0 * g.half_length
    grad = 0.5 * params.kappa * c**2 * k**2 * (box / 2.0)
    pot = box * (a / 4.0 * (c**4 * 3.0 / 8.0) - a / 2.0 * (b / a) * c**2 * 0.5
                 + a / 4.0 * (b / a) ** 2)
    assert free_energy(phi, params) == pytest.approx(grad + pot, rel=1e-12)


@pytest.mark.parametrize("a", [0.2, 0.7, 0.97])
def test_window_energy_against_quadrature(a, params):
    """Integrate the genuine gradient density of the profile over the box.

    The implementation integrates 2F(phi) - F(a) via the first integral;
    the oracle uses kappa/2 phi_x^2 + F(phi) directly, so the two agree
    only if the first-integral substitution is correct.
    """
    wave = periodic_wave(a, params)
    half = params.half_length
    x = np.linspace(-half, half, 400_001)
    phi, phi_x, _ = wave.with_derivatives(x)
    density = 0.5 * params.kappa * phi_x**2 + params.f(phi)
    from scipy.integrate import simpson

    oracle = simpson(density, x=x)
    assert wave_window_energy(a, params) == pytest.approx(oracle, rel=1e-8)


def test_window_energy_limits(params):
    assert wave_window_energy(1e-3, params) == pytest.approx(E_MAX, rel=1e-5)
    # deep in the kink-train regime the window energy approaches 2 e_min
    # per window pair, scaled to the box
    assert wave_window_energy(0.2, params) < wave_window_energy(0.05, params)


def test_energy_of_period_consistent(params):
    p = period_of_amplitude(0.6, params)
    assert energy_of_period(p, params) == pytest.approx(
        wave_window_energy(0.6, params), rel=1e-12)


def test_energy_scale_landmarks(params):
    sc = energy_scale(params)
    assert sc.e_max == pytest.approx(E_MAX, rel=1e-14)
    assert sc.e_spinodal == pytest.approx(E_SPINODAL, rel=1e-10)
    assert 2.0 * sc.e_min == pytest.approx(TWO_E_MIN, rel=1e-10)
    assert sc.e_min == pytest.approx(kink(params).e_min, rel=1e-14)


def test_table_envelope_invariants(params, energy_table):
    t = energy_table
    assert not t.truncated
    assert np.all(np.diff(t.env_periods) > 0)
    assert np.all(np.diff(t.env_energies) <= 0)
    assert t.env_periods[0] == pytest.approx(params.p_min, rel=1e-6)
    assert t.env_energies[0] == pytest.approx(E_MAX, rel=1e-3)
    # gap rule: adjacent energies differ by at most 1/200 of the range
    gap = np.max(-np.diff(t.env_energies))
    assert gap <= (t.e_max - t.e_floor) / 200.0 * (1.0 + 1e-9)


def test_table_matches_direct_evaluation(params, energy_table):
    mid = len(energy_table.amplitudes) // 2
    a = float(energy_table.amplitudes[mid])
    assert energy_table.energies[mid] == pytest.approx(
        wave_window_energy(a, params), rel=1e-10)
    assert energy_table.periods[mid] == pytest.approx(
        period_of_amplitude(a, params), rel=1e-12)


def test_period_of_energy_inverts_envelope(energy_table):
    e = energy_table.env_energies[1:-1:7]
    p = energy_table.period_of_energy(e)
    assert np.allclose(p, energy_table.env_periods[1:-1:7], rtol=1e-10)


def test_pseudoinverse_monotone(energy_table):
    energies = np.linspace(energy_table.e_floor * 1.01, energy_table.e_max, 40)
    periods = [period_from_energy(float(e), energy_table) for e in energies]
    assert np.all(np.diff(periods) <= 1e-12)


def test_pseudoinverse_at_e_max(params, energy_table):
    p = period_from_energy(energy_table.e_max, energy_table)
    assert p == pytest.approx(params.p_min, rel=1e-4)


def test_pseudoinverse_clamps_with_warning(energy_table):
    with pytest.warns(ClampWarning):
        p_hi = period_from_energy(energy_table.e_max * 1.5, energy_table)
    assert p_hi == pytest.approx(energy_table.env_periods[0])
    with pytest.warns(ClampWarning):
        p_lo = period_from_energy(energy_table.e_floor * 0.5, energy_table)
    assert p_lo == pytest.approx(energy_table.p_cap)


def test_pseudoinverse_inverts_interior_energies(params, energy_table):
    # inf{p : E(p) <= e} composed with E is the identity on the strictly
    # decreasing branch
    for e in (0.4, 0.25, 0.1):
        p = period_from_energy(e, energy_table)
        assert energy_of_period(p, params) == pytest.approx(e, rel=1e-8)


def test_plateau_bound_positive_denominator(params):
    # the bound is finite and positive across the admissible amplitudes
    for a in (0.2, 0.5, 0.9, 0.99):
        assert plateau_slope_bound(a, params) > 0.0


def test_plateau_bound_caps_positive_slopes(params, energy_table):
    p = energy_table.periods
    e = energy_table.energies
    slopes = np.diff(e) / np.diff(p)
    mids = 0.5 * (energy_table.amplitudes[1:] + energy_table.amplitudes[:-1])
    pos = slopes > 0
    assert pos.any()
    bounds = np.array([plateau_slope_bound(float(a), params) for a in mids[pos]])
    assert np.all(slopes[pos] <= bounds * (1.0 + 1e-6))


# Kohn-Otto interface length


def test_ko_length_of_sine_analytic():
    # phi = A sin(m pi x / L): the antiderivative has mean |cos| = 2/pi,
    # so the length is 2 A L / (pi^2 m).  The grid sum of |cos| carries an
    # O(dx^2) kink error, hence the tolerance.
    g = Grid(2048)
    for m, amp in ((1, 1.0), (2, 0.7)):
        phi = Field(g, amp * np.sin(m * math.pi * g.x / g.half_length))
        expected = 2.0 * amp * g.half_length / (math.pi**2 * m)
        assert kohn_otto_length(phi) == pytest.approx(expected, rel=1e-5)


def test_ko_length_rejects_nonzero_mean():
    g = Grid(32)
    with pytest.raises(ValueError):
        kohn_otto_length(Field(g, np.full(32, 0.2)))


def _random_zero_mean(g: Grid, seed: int) -> Field:
    rng = np.random.default_rng(seed)
    f = from_spectral(g, dealias(to_spectral(Field(g, rng.standard_normal(g.n))), g))
    return Field(g, f.values - f.mean())


def test_ko_length_against_linear_program():
    """Brute-force the variational definition on the grid.

    maximize (dx / 2L) sum(phi * zeta) subject to |zeta_{i+1} - zeta_i| <= dx
    cyclically; zeta_0 is pinned since the objective is shift-invariant for
    zero-mean phi.
    """
    g = Grid(64)
    phi = _random_zero_mean(g, 42)
    n, dx = g.n, g.dx
    rows = []
    for i in range(n):
        row = np.zeros(n)
        row[(i + 1) % n] = 1.0
        row[i] -= 1.0
        rows.append(row)
    a_ub = np.vstack(rows + [-r for r in rows])
    b_ub = np.full(2 * n, dx)
    a_eq = np.zeros((1, n))
    a_eq[0, 0] = 1.0
    res = linprog(-phi.values, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[0.0],
                  bounds=[(None, None)] * n, method="highs")
    assert res.success
    oracle = -res.fun * dx / (2.0 * g.half_length)
    assert kohn_otto_length(phi) == pytest.approx(oracle, rel=5e-3)


@given(scale=st.floats(0.1, 10.0), shift=st.integers(0, 63))
@settings(max_examples=20, deadline=None)
def test_ko_length_homogeneous_and_translation_invariant(scale, shift):
    g = Grid(64)
    phi = _random_zero_mean(g, 7)
    base = kohn_otto_length(phi)
    assert kohn_otto_length(Field(g, scale * phi.values)) == pytest.approx(
        scale * base, rel=1e-10)
    assert kohn_otto_length(Field(g, np.roll(phi.values, shift))) == pytest.approx(
        base, rel=1e-8)
