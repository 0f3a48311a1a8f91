import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from irhm_decoherence.dynamics_local import (
    Trajectory,
    check_markov_regime,
    coherence_norms,
    evolve_local_closed_form,
    evolve_local_tcl2_numeric,
    local_effective_spectrum,
    pure_state,
    random_density_matrix,
    rk4_propagate,
    validate_density_matrix,
)
from irhm_decoherence.effective import CouplingParams, RegimeWarning, build_h2, build_hs
from irhm_decoherence.errors import AccuracyError, ArgumentError
from irhm_decoherence.hilbert import SpinBasis
from irhm_decoherence.irhm import ModelParams


def cp(n, g=2.0, j_star=0.5, omega=1.0, delta=1.0):
    return CouplingParams(g, omega, ModelParams(j_star, delta, n))


def test_density_matrix_validation():
    with pytest.raises(ArgumentError):
        validate_density_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(ArgumentError):
        validate_density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(ArgumentError):
        validate_density_matrix(np.array([[0.5, 0.5], [0.1, 0.5]]))
    proj = pure_state([1, 1j])
    np.testing.assert_allclose(proj @ proj, proj, atol=1e-15)
    assert np.trace(proj).real == pytest.approx(1.0)


@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_random_density_matrices_are_valid(dim, seed):
    rho = random_density_matrix(dim, np.random.default_rng(seed))
    validate_density_matrix(rho)


def test_rk4_is_fourth_order():
    # y' = i y, exact e^{i t}
    y0 = np.array([1.0 + 0j])
    errs = []
    for n in (50, 100):
        _, ys = rk4_propagate(lambda t, y: 1j * y, y0, 5.0, n, 2)
        errs.append(abs(ys[-1, 0] - np.exp(5j)))
    assert 14 < errs[0] / errs[1] < 18


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_closed_form_matches_matrix_exponential(n, rng):
    basis = SpinBasis(n)
    p = cp(n)
    spec = local_effective_spectrum(basis, p)
    rho0 = random_density_matrix(2**n, rng)
    times = np.linspace(0, 50, 6)
    traj = evolve_local_closed_form(rho0, spec, times)
    h = build_hs(basis, p) + build_h2(basis, p)
    for t, rho in zip(times, traj.states):
        u = expm(-1j * h * t)
        np.testing.assert_allclose(rho, u @ rho0 @ u.conj().T, atol=1e-11)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_phase_only_evolution_preserves_coherence_magnitudes(n, rng):
    basis = SpinBasis(n)
    spec = local_effective_spectrum(basis, cp(n))
    rho0 = random_density_matrix(2**n, rng)
    traj = evolve_local_closed_form(rho0, spec, np.linspace(0, 100, 11))
    norms = coherence_norms(traj, spec)
    assert np.max(np.abs(norms - norms[0])) <= 1e-12
    np.testing.assert_allclose(traj.traces(), 1, atol=1e-12)
    np.testing.assert_allclose(traj.purities(), traj.purities()[0], atol=1e-12)


def test_numeric_tcl2_agrees_with_closed_form_at_fine_step(rng):
    basis = SpinBasis(2)
    p = cp(2)
    spec = local_effective_spectrum(basis, p)
    rho0 = random_density_matrix(4, rng)
    num = evolve_local_tcl2_numeric(rho0, basis, p, 100.0, 1e-3, 101, richardson_check=False)
    closed = evolve_local_closed_form(rho0, spec, num.times)
    assert np.max(np.abs(num.states - closed.states)) < 1e-10


def test_numeric_tcl2_with_step_halving(rng):
    n = 4
    basis = SpinBasis(n)
    p = cp(n)
    spec = local_effective_spectrum(basis, p)
    rho0 = random_density_matrix(2**n, rng)
    num = evolve_local_tcl2_numeric(rho0, basis, p, 20.0, 0.05, 41)
    closed = evolve_local_closed_form(rho0, spec, num.times)
    assert np.max(np.abs(num.states - closed.states)) < 1e-8


def test_numeric_step_bound_enforced(rng):
    basis = SpinBasis(3)
    p = cp(3, g=1.2, j_star=1.0)
    rho0 = random_density_matrix(8, rng)
    with pytest.raises(AccuracyError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            evolve_local_tcl2_numeric(rho0, basis, p, 10.0, 5.0, 3)


def test_zero_generator_gives_pure_hs_evolution(rng):
    basis = SpinBasis(3)
    p = cp(3)
    rho0 = random_density_matrix(8, rng)
    traj = evolve_local_tcl2_numeric(rho0, basis, p, 10.0, 0.1, 11, h2=np.zeros((8, 8)))
    u = expm(-1j * build_hs(basis, p) * 10.0)
    np.testing.assert_allclose(traj.states[-1], u @ rho0 @ u.conj().T, atol=1e-12)


def test_markov_regime_warning():
    assert check_markov_regime(cp(2, g=3.0, j_star=0.5))
    with pytest.warns(RegimeWarning):
        assert not check_markov_regime(cp(2, g=0.5, j_star=1.0))


def test_trajectory_element_matches_eigenbasis(rng):
    basis = SpinBasis(3)
    spec = local_effective_spectrum(basis, cp(3))
    rho0 = random_density_matrix(8, rng)
    traj = evolve_local_closed_form(rho0, spec, [0.0, 3.0])
    assert isinstance(traj, Trajectory)
    np.testing.assert_allclose(traj.element(spec, 1, 4), traj.in_eigenbasis(spec)[:, 1, 4])
    assert coherence_norms(traj, spec).shape == (2, 28)
