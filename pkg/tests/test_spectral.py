import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from collspec.errors import InstabilityError, InvalidParameterError
from collspec.model import ChainModel, build_standard_model
from collspec.oracle import harmonic_correlator
from collspec.renormalize import renormalize
from collspec.spectral import (
    BathModes,
    bath_modes,
    bath_modes_from_blocks,
    collective_spectrum,
    collective_spectrum_constant_kernel,
    default_epsilon,
    evaluate_chunked,
    fwhm,
    gamma_kernel,
    gamma_t_series,
    gamma_tilde,
    gamma_tilde_series,
    peak_positions,
    sigma_R,
    sigma_series,
)

from conftest import random_stable_model

EMPTY = BathModes(np.zeros(0), np.zeros(0), 1.0)


def one_mode(freq=1.0, weight=1.0, mass=1.0):
    return BathModes(np.array([freq]), np.array([weight]), mass)


def test_bath_modes_n1_empty():
    m = ChainModel(1, 1.0, 1.0, 0.01, [[0.0]], [[1.0]])
    assert len(bath_modes(renormalize(m)[1])) == 0


def test_bath_modes_decoupled_weights_vanish():
    m = build_standard_model("ring", 4, 1.0, 0.5, "uniform")
    modes = bath_modes(renormalize(m)[1])
    assert len(modes) == 3
    np.testing.assert_allclose(modes.weights, 0.0, atol=1e-26)


def test_bath_modes_invariants(rng):
    for n in (2, 5, 10):
        _, s = renormalize(random_stable_model(rng, n))
        modes = bath_modes(s)
        assert np.all(modes.frequencies > 0)
        assert np.all(modes.weights >= 0)
        assert modes.weights.sum() == pytest.approx(s.k_vec @ s.k_vec, rel=1e-12)


def test_bath_modes_reject_unstable_block():
    with pytest.raises(InstabilityError):
        bath_modes_from_blocks(np.array([[-1.0]]), np.array([0.1]), 1.0)


def test_sigma_empty_and_bad_epsilon():
    np.testing.assert_array_equal(sigma_R(EMPTY, np.linspace(0.1, 3, 7), 1e-3), 0.0)
    with pytest.raises(InvalidParameterError):
        sigma_R(EMPTY, 1.0, 0.0)
    with pytest.raises(InvalidParameterError):
        gamma_tilde(EMPTY, 1.0, -1.0)


def test_sigma_single_mode_integral():
    # with the kernel prefactor fixed by the equations of motion the
    # peak carries 2 w / (m omega)
    modes = one_mode()
    val = quad(lambda w: sigma_R(modes, w, 1e-3), 0.5, 1.5, points=[1.0], limit=400)[0]
    assert val == pytest.approx(2.0, rel=2e-3)


def test_gamma_kernel_examples():
    np.testing.assert_array_equal(gamma_kernel(EMPTY, np.linspace(0, 5, 4)), 0.0)
    assert gamma_kernel(one_mode(2.0, 4.0), 0.0) == pytest.approx(4.0, rel=1e-15)


def test_gamma_kernel_from_equations_of_motion():
    """Single bath mode: eliminate y from m y'' = -2 (kap y + k X) by hand."""
    kap, k, m = 0.8, 0.3, 1.3
    modes = bath_modes_from_blocks(np.array([[kap]]), np.array([k]), m)
    om2 = 2 * kap / m
    # y = -(k/kap) X + memory; coupling force on X is -2 k y / m
    expected = (2 * k / m) * (2 * k / m) / om2
    assert gamma_kernel(modes, 0.0) == pytest.approx(expected, rel=1e-14)


def test_gamma_tilde_empty_and_dc_limit():
    assert gamma_tilde(EMPTY, 1.0, 1e-3) == 0
    g = gamma_tilde(one_mode(1.5, 0.7), 1e-9, 1e-6)
    assert abs(g) < 1e-5


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(1e-4, 0.5))
def test_gamma_tilde_real_part_is_nonnegative(omega, eps):
    modes = BathModes(np.array([0.7, 1.9, 3.1]), np.array([0.2, 0.05, 0.4]), 1.0)
    assert gamma_tilde(modes, omega, eps).real >= 0


def test_gamma_tilde_is_damped_one_sided_transform():
    """Numeric int_0^T gamma(t) exp(i w t - eps t) dt against the closed form."""
    modes = BathModes(np.array([0.7, 1.9]), np.array([0.2, 0.4]), 1.0)
    eps, t_max = 0.05, 700.0
    for w in (0.3, 1.0, 2.5):
        re = quad(lambda t: gamma_kernel(modes, t) * np.cos(w * t) * np.exp(-eps * t),
                  0, t_max, limit=4000)[0]
        im = quad(lambda t: gamma_kernel(modes, t) * np.sin(w * t) * np.exp(-eps * t),
                  0, t_max, limit=4000)[0]
        g = gamma_tilde(modes, w, eps)
        assert g.real == pytest.approx(re, rel=1e-7, abs=1e-9)
        assert g.imag == pytest.approx(im, rel=1e-7, abs=1e-9)


def test_gamma0_from_sigma_integral():
    modes = BathModes(np.array([1.3, 2.1]), np.array([0.09, 0.04]), 1.0)
    eps = 1e-5
    pts = sorted([1.3, 2.1] + [w + s * 20 * eps for w in (1.3, 2.1) for s in (-1, 1)])
    integral = quad(lambda w: sigma_R(modes, w, eps) / w, 0.01, 100, points=pts,
                    limit=2000, epsabs=0, epsrel=1e-11)[0]
    assert 2 / modes.mass * integral == pytest.approx(float(gamma_kernel(modes, 0.0)), rel=1e-3)


def test_spectrum_no_bath_single_peak_weight():
    omega0 = 2.029778313018444
    grid = np.linspace(0.01, 4.0, 40000)
    s = collective_spectrum(omega0, EMPTY, grid)
    assert s.epsilon == pytest.approx(default_epsilon(omega0, grid))
    peaks = peak_positions(s)
    assert len(peaks) == 1
    assert abs(peaks[0] - omega0) <= grid[1] - grid[0]
    assert np.trapezoid(s.values, grid) == pytest.approx(1 / (2 * omega0), rel=1e-3)


def test_spectrum_rejects_bad_grid():
    with pytest.raises(InvalidParameterError):
        collective_spectrum(1.0, EMPTY, np.array([0.0, 1.0, 2.0]))
    with pytest.raises(InvalidParameterError):
        collective_spectrum(1.0, EMPTY, np.array([1.0, 0.5]))


def test_spectrum_peaks_sit_on_normal_modes(rng):
    for n in (3, 6):
        m = random_stable_model(rng, n)
        _, s = renormalize(m)
        mc = harmonic_correlator(s.full_potential, m.mass, m.hbar)
        grid = np.linspace(0.01, 1.2 * mc.mode_freqs.max(), 60000)
        spec = collective_spectrum(s.omega0_renorm, bath_modes(s), grid)
        tol = (grid[1] - grid[0]) + spec.epsilon
        for p in peak_positions(spec):
            assert np.min(np.abs(mc.mode_freqs - p)) <= tol
        strong = mc.weights > 1e-2 * mc.weights.max()
        for w in mc.mode_freqs[strong]:
            assert np.min(np.abs(peak_positions(spec) - w)) <= tol


@pytest.mark.parametrize("omega0, gamma0", [(2.0, 0.2), (1.0, 0.05)])
def test_constant_kernel_lorentzian(omega0, gamma0):
    grid = np.linspace(0.01, 2 * omega0, 80001)
    s = collective_spectrum_constant_kernel(omega0, gamma0, grid)
    peak = np.sqrt(omega0 ** 2 - (gamma0 / 2) ** 2)
    assert abs(grid[np.argmax(s.values)] - peak) <= grid[1] - grid[0]
    assert fwhm(s) == pytest.approx(gamma0, rel=0.05)
    half = collective_spectrum_constant_kernel(omega0, gamma0 / 2, grid)
    assert half.values.max() / s.values.max() == pytest.approx(2.0, rel=0.05)


def test_constant_kernel_example_peak_position():
    assert np.sqrt(4 - 0.01) == pytest.approx(1.99750, abs=1e-5)


def test_constant_kernel_zero_width_is_grid_limited():
    grid = np.linspace(0.01, 4.0, 4000)
    s = collective_spectrum_constant_kernel(2.0, 0.0, grid)
    assert s.epsilon == pytest.approx(3 * (grid[1] - grid[0]))
    assert abs(grid[np.argmax(s.values)] - 2.0) <= grid[1] - grid[0]
    with pytest.raises(InvalidParameterError):
        collective_spectrum_constant_kernel(2.0, -0.1, grid)


def test_chunked_evaluation_is_independent_of_jobs():
    modes = BathModes(np.array([0.7, 1.9, 3.1]), np.array([0.2, 0.05, 0.4]), 1.0)
    grid = np.linspace(0.01, 5.0, 10007)
    f = lambda w: sigma_R(modes, w, 1e-2)
    ref = evaluate_chunked(f, grid, jobs=1, chunk=333)
    np.testing.assert_array_equal(ref, evaluate_chunked(f, grid, jobs=4, chunk=333))
    np.testing.assert_array_equal(ref, sigma_R(modes, grid, 1e-2))
    a = collective_spectrum(2.0, modes, grid, 1e-2, jobs=1)
    b = collective_spectrum(2.0, modes, grid, 1e-2, jobs=3)
    np.testing.assert_array_equal(a.values, b.values)


def test_series_helpers():
    modes = one_mode(1.0, 0.5)
    grid = np.linspace(0.1, 3.0, 100)
    assert sigma_series(modes, grid, 0.05).kind == "sigma"
    re, im = gamma_tilde_series(modes, grid, 0.05)
    assert (re.kind, im.kind) == ("gamma_tilde_re", "gamma_tilde_im")
    g = gamma_t_series(modes, np.linspace(0, 10, 50))
    assert g.values[0] == pytest.approx(2.0)
    with pytest.raises(InvalidParameterError):
        gamma_t_series(modes, [1.0, 0.5])
