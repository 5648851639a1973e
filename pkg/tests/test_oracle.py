import numpy as np
import pytest

from collspec.errors import ConsistencyError, InvalidParameterError, ResourceError
from collspec.model import ChainModel, build_standard_model
from collspec.oracle import (
    FockSpace,
    beta_function,
    chi_kernel_check,
    fock_diagonalize,
    gauss_hermite_expectation,
    harmonic_correlator,
    internal_modes,
    model_full_potential,
    normal_modes,
)
from collspec.renormalize import renormalize

from conftest import random_stable_model

# lowest gap of the N=1 quartic benchmark; independently reproduced by a
# Richardson-extrapolated finite-difference grid in the relative coordinate
N1_QUARTIC_GAP = 2.0291516324


def n1(lam=0.0, coeffs=(1.0,)):
    return ChainModel(1, 1.0, 1.0, lam, [[0.0]], [[1.0]], coeffs)


def test_harmonic_correlator_n1():
    mc = harmonic_correlator(model_full_potential(n1()), 1.0, 1.0)
    np.testing.assert_allclose(mc.mode_freqs, [2.0], rtol=1e-14)
    np.testing.assert_allclose(mc.weights, [0.25], rtol=1e-14)


def test_harmonic_correlator_overlaps_are_normalized(rng):
    for n in (2, 5, 9):
        m = random_stable_model(rng, n)
        _, s = renormalize(m)
        mc = harmonic_correlator(s.full_potential, m.mass, m.hbar)
        assert np.sum(mc.collective_overlaps ** 2) == pytest.approx(1.0, rel=1e-12)
        assert np.all(mc.weights >= 0)


def test_uniform_ring_has_single_collective_stick():
    m = build_standard_model("ring", 5, 1.0, 0.7, "uniform")
    mc = harmonic_correlator(model_full_potential(m), 1.0, 1.0)
    assert np.count_nonzero(mc.weights > 1e-14) == 1


def test_harmonic_correlator_rejects_zero_mode_overlap():
    # zero mode along (1, -1): X itself is free
    with pytest.raises(ConsistencyError):
        harmonic_correlator(np.ones((2, 2)), 1.0, 1.0)


def test_broadening_kinds():
    mc = harmonic_correlator(model_full_potential(n1()), 1.0, 1.0)
    w = np.linspace(0.5, 3.5, 9)
    lor = mc.broadened(w, 0.1, "lorentzian")
    ret = mc.broadened(w, 0.1)
    assert np.all(ret < lor)
    with pytest.raises(InvalidParameterError):
        mc.broadened(w, 0.1, "gaussian")
    assert mc.correlator(0.0)[0] == pytest.approx(0.25)


def test_internal_modes_drop_translation(rng):
    m = random_stable_model(rng, 3)
    modes = internal_modes(m)
    assert len(modes.freqs) == 5
    freqs, _ = normal_modes(model_full_potential(m), m.mass)
    np.testing.assert_allclose(np.sort(modes.freqs), np.sort(freqs[freqs > 0]), rtol=1e-12)


def test_fock_space_basics():
    sp = FockSpace(2, 3)
    assert sp.dim == 16
    a = sp.lower(1).toarray()
    comm = a @ a.T - a.T @ a
    # canonical below the cap
    np.testing.assert_allclose(np.diag(comm)[sp.occupations()[:, 1] < 3], 1.0)


@pytest.mark.parametrize("model", [n1(), build_standard_model("open-chain", 2, 1.0, 0.8, "diagonal")])
def test_fock_harmonic_limit_matches_correlator(model):
    res = fock_diagonalize(model, 6, n_states=30, check_convergence=False)
    mc = harmonic_correlator(model_full_potential(model), model.mass, model.hbar)
    for w, wt in zip(mc.mode_freqs, mc.weights):
        k = np.argmin(np.abs(res.gaps - model.hbar * w))
        assert res.gaps[k] == pytest.approx(model.hbar * w, rel=1e-10)
        assert res.transition_strengths[k] == pytest.approx(wt, rel=1e-8)
    # one-quantum states only
    singles = set(np.argmin(np.abs(res.gaps - w)) for w in mc.mode_freqs)
    others = [j for j in range(1, len(res.gaps)) if j not in singles]
    assert np.all(res.transition_strengths[others] < 1e-8)


def test_fock_n1_quartic_benchmark():
    m = n1(lam=0.01)
    res = fock_diagonalize(m, 40)
    assert res.converged
    assert res.lowest_gap == pytest.approx(N1_QUARTIC_GAP, abs=1e-9)
    assert res.collective_gap == res.lowest_gap
    # first-order estimate 2 + 12 lam f2 alpha^2 = 2.03
    assert res.lowest_gap == pytest.approx(2.03, abs=1e-3)
    omega_r = renormalize(m)[1].omega0_renorm
    dev = abs(res.lowest_gap - omega_r)
    # the residual is the second-order shift, about 6.3e-4
    assert 6.0e-4 < dev < 6.6e-4


def test_fock_result_invariants():
    res = fock_diagonalize(n1(lam=0.02, coeffs=(1.0, 0.3)), 30, n_states=8)
    assert np.all(np.diff(res.energies) >= 0)
    assert np.all(res.transition_strengths >= 0)
    assert res.dim == 31
    assert set(res.to_dict()) == {"energies", "transition_strengths", "basis_cutoff", "converged", "dim"}


def test_fock_unconverged_is_flagged():
    res = fock_diagonalize(n1(lam=0.5), 2)
    assert not res.converged


def test_fock_resource_cap():
    m = build_standard_model("open-chain", 3, 1.0, 1.0, lam=0.01)
    with pytest.raises(ResourceError):
        fock_diagonalize(m, 20)
    with pytest.raises(InvalidParameterError):
        fock_diagonalize(n1(), 0)


@pytest.mark.parametrize("n", [1, 2])
def test_first_order_slope_matches_renormalized_frequency(n):
    def model(lam):
        return build_standard_model("open-chain", n, 1.0, 1.0, "uniform", lam=lam, coeffs=(1.0,))

    lam = 0.002
    cap = 30 if n == 1 else 8
    g = [fock_diagonalize(model(x), cap, 6, check_convergence=False).collective_gap for x in (0.0, lam)]
    r = [renormalize(model(x))[1].omega0_renorm for x in (0.0, lam)]
    assert (g[1] - g[0]) / lam == pytest.approx((r[1] - r[0]) / lam, rel=0.02)


def test_beta_basic_properties(rng):
    n = 4
    pot = model_full_potential(random_stable_model(rng, n))
    t = np.linspace(-3, 3, 13)
    for i, j in [(0, 0), (1, 3), (2, 1)]:
        assert beta_function(pot, 1.0, i, j, 0.0) == 0.0
        b = beta_function(pot, 1.0, i, j, t)
        np.testing.assert_allclose(b, -b[::-1], atol=1e-14)
        h = 1e-6
        slope = beta_function(pot, 1.0, i, j, h) / h
        assert slope == pytest.approx(-np.sqrt(2 / n), rel=1e-6)
    pot2 = model_full_potential(random_stable_model(rng, 2).replace(mass=2.5))
    assert beta_function(pot2, 2.5, 0, 1, 1e-6) / 1e-6 == pytest.approx(-1 / 2.5, rel=1e-6)


def test_chi_check_trivial_cases():
    lhs, rhs = chi_kernel_check(n1(coeffs=(0.0,)), 0, 0, 0.3, 0.7, n_max=8)
    assert lhs == 0 and rhs == 0
    lhs, rhs = chi_kernel_check(n1(), 0, 0, 0.0, 0.0, n_max=8)
    assert abs(lhs) < 1e-14 and rhs == 0


def test_chi_check_sextic_two_particles():
    m = build_standard_model("open-chain", 2, 1.0, 0.6, "diagonal", coeffs=(1.0, 0.2))
    lhs, rhs = chi_kernel_check(m, 0, 1, 0.4, 1.1, n_max=8)
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_gauss_hermite_moments():
    assert gauss_hermite_expectation(lambda z: z ** 4, 0.5) == pytest.approx(0.75, rel=1e-13)
    assert gauss_hermite_expectation(lambda z: z ** 2, np.array([1.0, 2.0]))[1] == pytest.approx(2.0)
