import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import ellipj, ellipk

from bchsim.waves import (
    Params,
    amplitude_of_period,
    ellip_k,
    kink,
    period_derivative,
    period_of_amplitude,
    periodic_wave,
    sn_cn_dn,
    spinodal,
)

# Landmark values for alpha = beta = 1, kappa = 1e-3, L = 1.
P_MIN = 0.198691765315922
P_S = 0.28099258924162906
A_S = 0.8007807756666083
LAMBDA_TOP = 250.0


def quarter_period_quadrature(a: float, params: Params) -> float:
    """Independent oracle: the period integral in angular form.

    Substituting phi = a sin(theta) into the first-integral form of the
    profile equation removes the turning-point singularity and leaves a
    smooth integrand for adaptive quadrature.
    """
    alpha, beta = params.alpha, params.beta

    def integrand(theta):
        s = math.sin(theta)
        return 1.0 / math.sqrt(2.0 * beta / alpha - a * a * (1.0 + s * s))

    val, err = quad(integrand, 0.0, math.pi / 2.0, epsabs=1e-14, epsrel=1e-13)
    assert err < 1e-10
    return 4.0 * math.sqrt(2.0 * params.kappa / alpha) * val


@pytest.mark.parametrize("k", [0.0, 0.1, 0.5, 0.9, 0.99, 0.9999])
def test_ellip_k_against_quadrature(k):
    def integrand(theta):
        return 1.0 / math.sqrt(1.0 - (k * math.sin(theta)) ** 2)

    val, _ = quad(integrand, 0.0, math.pi / 2.0, epsabs=1e-14, epsrel=1e-13)
    assert ellip_k(k) == pytest.approx(val, rel=1e-12)


def test_ellip_k_matches_scipy():
    for k in (0.2, 0.7, 0.95):
        assert ellip_k(k) == pytest.approx(float(ellipk(k * k)), rel=1e-12)


def test_ellip_k_rejects_unit_modulus():
    with pytest.raises(ValueError):
        ellip_k(1.0)


@given(u=st.floats(-8.0, 8.0), k=st.floats(0.0, 0.999))
@settings(max_examples=60, deadline=None)
def test_jacobi_identities(u, k):
    sn, cn, dn = sn_cn_dn(u, k)
    assert sn * sn + cn * cn == pytest.approx(1.0, abs=1e-12)
    assert dn * dn + (k * sn) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_jacobi_matches_scipy():
    for u in (-2.3, 0.4, 1.7):
        for k in (0.1, 0.6, 0.97):
            sn, cn, dn = sn_cn_dn(u, k)
            s, c, d, _ = ellipj(u, k * k)
            assert sn == pytest.approx(float(s), abs=1e-12)
            assert cn == pytest.approx(float(c), abs=1e-12)
            assert dn == pytest.approx(float(d), abs=1e-12)


def test_jacobi_periodicity():
    k = 0.8
    big_k = ellip_k(k)
    sn0, cn0, _ = sn_cn_dn(0.37, k)
    sn4, cn4, _ = sn_cn_dn(0.37 + 4.0 * big_k, k)
    assert sn4 == pytest.approx(sn0, abs=1e-11)
    assert cn4 == pytest.approx(cn0, abs=1e-11)


def test_landmarks(params):
    sp = spinodal(params)
    assert sp.p_min == pytest.approx(P_MIN, rel=1e-12)
    assert sp.p_s == pytest.approx(P_S, rel=1e-12)
    assert sp.a_s == pytest.approx(A_S, rel=1e-10)
    assert sp.lambda_top == pytest.approx(LAMBDA_TOP, rel=1e-14)
    assert sp.p_s == pytest.approx(math.sqrt(2.0) * sp.p_min, rel=1e-12)


@pytest.mark.parametrize("a", [0.05, 0.3, 0.7, 0.95, 0.999])
def test_period_matches_quadrature(a, params):
    assert period_of_amplitude(a, params) == pytest.approx(
        quarter_period_quadrature(a, params), rel=1e-10)


def test_period_monotone_in_amplitude(params):
    amps = np.linspace(0.01, 0.9999, 120)
    periods = [period_of_amplitude(float(a), params) for a in amps]
    assert np.all(np.diff(periods) > 0)


@given(a=st.floats(0.05, 0.995))
@settings(max_examples=30, deadline=None)
def test_amplitude_period_round_trip(a):
    params = Params()
    p = period_of_amplitude(a, params)
    assert amplitude_of_period(p, params) == pytest.approx(a, rel=1e-9)


def test_amplitude_of_period_rejects_below_p_min(params):
    with pytest.raises(ValueError):
        amplitude_of_period(0.9 * params.p_min, params)


@pytest.mark.parametrize("a", [0.3, 0.7, 0.95])
def test_period_derivative_matches_finite_difference(a, params):
    h = 1e-6
    fd = (period_of_amplitude(a + h, params) - period_of_amplitude(a - h, params)) / (2 * h)
    assert period_derivative(a, params) == pytest.approx(fd, rel=1e-5)


def test_period_derivative_positive(params):
    for a in (0.1, 0.5, 0.9, 0.99):
        assert period_derivative(a, params) > 0.0


def test_wave_profile_shape(params):
    a = 0.7
    wave = periodic_wave(a, params)
    p = wave.period
    x = np.linspace(-p, p, 2001)
    phi = wave(x)
    assert np.max(np.abs(phi)) == pytest.approx(a, rel=1e-9)
    assert wave(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-12)
    # odd symmetry and periodicity
    assert np.allclose(wave(-x), -phi, atol=1e-10)
    assert np.allclose(wave(x + p), phi, atol=1e-9)


def test_wave_satisfies_profile_equation(params):
    """kappa phi'' = F'(phi), checked with finite differences."""
    a = 0.85
    wave = periodic_wave(a, params)
    x = np.linspace(0.0, wave.period, 4001)
    h = x[1] - x[0]
    phi = wave(x)
    lap = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / h**2
    residual = params.kappa * lap - params.df(phi[1:-1])
    assert np.max(np.abs(residual)) < 5e-4 * np.max(np.abs(params.df(phi)))


def test_wave_derivatives_consistent(params):
    a = 0.6
    wave = periodic_wave(a, params)
    x = np.linspace(0.0, wave.period, 101)
    phi, phi_x, phi_xx = wave.with_derivatives(x)
    h = 1e-7
    fd_x = (wave(x + h) - wave(x - h)) / (2 * h)
    assert np.allclose(phi_x, fd_x, rtol=1e-5, atol=1e-5 * np.max(np.abs(phi_x)))
    assert np.allclose(params.kappa * phi_xx, params.df(phi), rtol=1e-12, atol=1e-14)


def test_kink_energy_values(params):
    k = kink(params)
    assert k.e_min_inf == pytest.approx(0.0298142396999972, rel=1e-12)
    # the finite-box correction at L = 1 is exponentially small
    assert k.e_min == pytest.approx(k.e_min_inf, rel=1e-10)
    assert k.profile(np.array([50.0]))[0] == pytest.approx(params.binodal, rel=1e-12)
    assert k.profile(np.array([0.0]))[0] == 0.0


def test_spinodal_closes_the_loop(params):
    sp = spinodal(params)
    assert period_of_amplitude(sp.a_s, params) == pytest.approx(sp.p_s, rel=1e-10)
