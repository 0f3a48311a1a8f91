import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irhm_decoherence.effective import (
    CLOSED_LOOP,
    IDENTITIES,
    CouplingParams,
    RegimeWarning,
    ThirdOrderCoefficients,
    appendix_a_identity,
    build_h2,
    build_h3,
    build_hs,
    build_spin_form_heff,
    f1,
    f2,
    hopping_excitation_gap,
    hopping_spectrum_identity,
    identity_lhs,
    second_order_couplings,
    spin_form_couplings,
    valid_site_pairs,
)
from irhm_decoherence.errors import ArgumentError
from irhm_decoherence.hilbert import SpinBasis, commutator, is_hermitian, max_abs
from irhm_decoherence.irhm import ModelParams, build_hirhm
from irhm_decoherence.polaron_frame import BosonFockSpace, build_total_hamiltonian

from oracles import f1_expi, f2_expi


def cp(g=2.0, omega=1.0, j_star=0.5, delta=1.0, n=4):
    return CouplingParams(g, omega, ModelParams(j_star, delta, n))


def test_coupling_validation_and_regime():
    with pytest.raises(ArgumentError):
        cp(g=-1.0)
    with pytest.raises(ArgumentError):
        cp(omega=0.0)
    assert cp().in_validity_regime
    with pytest.warns(RegimeWarning):
        cp(g=0.5).check_regime()
    with pytest.warns(RegimeWarning):
        cp(j_star=2.0).check_regime()


@pytest.mark.parametrize("g", [0.1, 0.5, 1.0, 2.0, 3.0, 4.0])
def test_series_against_exponential_integral(g):
    assert f1(g) == pytest.approx(f1_expi(g), rel=1e-13)
    assert f2(g) == pytest.approx(f2_expi(g), rel=1e-12)


def test_series_frozen_values():
    # explicit double sum sum_{m,n>=1} x^(m+n) / (m! n! (m+n)) at x = 1
    double = math.fsum(1 / (math.factorial(m) * math.factorial(n) * (m + n)) for m in range(1, 40) for n in range(1, 40))
    assert f2(1.0) == pytest.approx(double, rel=1e-15)
    assert f1(1.0) == pytest.approx(1.3179021514544038, rel=1e-15)
    assert f1(0.0) == 0.0 and f2(0.0) == 0.0


def test_series_overflow():
    with pytest.raises(OverflowError):
        f1(40.0)
    with pytest.raises(OverflowError):
        f2(30.0)
    with pytest.raises(ArgumentError):
        f1(-1.0)


@given(st.floats(0.01, 1.7))
def test_f2_bounded_by_f1_squared_at_moderate_coupling(g):
    assert f2(g) <= f1(g) ** 2


def test_f2_exceeds_f1_squared_at_strong_coupling():
    assert f2(2.0) > f1(2.0) ** 2


def test_second_order_couplings_formula():
    p = cp(g=2.0, omega=1.5, j_star=0.6, n=5)
    j = 0.6 / 4
    pref = j * j * math.exp(-8.0) / (2 * 1.5)
    j_perp, j_par = second_order_couplings(p)
    assert j_perp == pytest.approx(-3 * f1_expi(2.0) * pref, rel=1e-12)
    assert j_par == pytest.approx((2 * f1_expi(2.0) + f2_expi(2.0)) * pref, rel=1e-12)


@pytest.mark.parametrize("g,ok", [(3.5, True), (4.0, True), (5.0, True), (3.0, False)])
def test_longitudinal_coupling_asymptote(g, ok):
    p = cp(g=g)
    ratio = second_order_couplings(p)[1] / (p.model.j**2 / (4 * g * g * p.omega))
    assert (abs(ratio - 1) < 0.05) is ok


def test_perpendicular_coupling_vanishes_for_two_sites():
    assert second_order_couplings(cp(n=2))[0] == 0.0


def test_hs_reduces_to_hirhm_without_coupling():
    p = cp(g=0.0)
    basis = SpinBasis(4)
    np.testing.assert_allclose(build_hs(basis, p), build_hirhm(basis, p.model), atol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 5, 6])
def test_hopping_momentum_rewrite(n):
    assert hopping_spectrum_identity(SpinBasis(n), cp(n=n)) < 1e-12


def test_hopping_gap_single_particle():
    p = cp(g=2.0, j_star=0.5, n=6)
    gap = hopping_excitation_gap(SpinBasis(6), p)
    assert gap == pytest.approx(0.5 * 0.5 * 6 / 5 * math.exp(-4.0), rel=1e-12)
    assert gap == pytest.approx(0.005494691666620255, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_second_order_commutes_and_spin_form(n):
    basis = SpinBasis(n)
    p = cp(n=n, delta=0.7)
    hs, h2 = build_hs(basis, p), build_h2(basis, p)
    assert is_hermitian(h2)
    assert max_abs(commutator(h2, build_hirhm(basis, p.model))) < 1e-12
    assert max_abs(commutator(hs, h2)) < 1e-12
    _, _, shift = spin_form_couplings(p)
    np.testing.assert_allclose(build_spin_form_heff(basis, p) + shift * np.eye(2**n), hs + h2, atol=1e-14)


@pytest.mark.parametrize("j_star", [0.2, 0.1])
def test_second_order_gap_against_exact_spin_phonon_spectrum(j_star):
    # low-lying two-site levels of the full Hamiltonian vs the effective one
    p = cp(g=2.0, omega=1.0, j_star=j_star, n=2)
    basis = SpinBasis(2)
    exact = np.diff(np.linalg.eigvalsh(build_total_hamiltonian(p, BosonFockSpace(25)))[:4])
    zeroth = np.diff(np.linalg.eigvalsh(build_hs(basis, p)))
    second = np.diff(np.linalg.eigvalsh(build_hs(basis, p) + build_h2(basis, p)))
    correction = np.max(np.abs(exact - zeroth))
    assert correction > 1e-4
    assert np.max(np.abs(exact - second)) < 0.01 * correction


@pytest.mark.parametrize("n", [3, 4, 5])
def test_all_identities_hold(n):
    basis = SpinBasis(n)
    for which in IDENTITIES:
        for l, i in valid_site_pairs(basis, which):
            assert appendix_a_identity(basis, which, l, i)[2] <= 1e-12


@pytest.mark.parametrize("a,b", [("T3", "T2"), ("T5", "T4"), ("V3", "V2"), ("TC2", "TC1")])
def test_identity_pairs_coincide(a, b):
    basis = SpinBasis(4)
    for l, i in valid_site_pairs(basis, a):
        np.testing.assert_allclose(identity_lhs(basis, a, l, i), identity_lhs(basis, b, l, i), atol=0)


def test_identity_spot_check_single_hop():
    # T_C3 is a bare hop from i to l: (b_l^dag b_i)(b_i^dag b_l)(b_l^dag b_i) = b_l^dag b_i
    basis = SpinBasis(3)
    lhs, rhs, res = appendix_a_identity(basis, "TC3", 2, 0)
    state = np.zeros(8)
    state[basis.index((1, 0, 0))] = 1
    target = np.zeros(8)
    target[basis.index((0, 0, 1))] = 1
    np.testing.assert_allclose(lhs @ state, target, atol=0)
    assert res == 0


def test_identity_argument_errors():
    with pytest.raises(ArgumentError):
        appendix_a_identity(SpinBasis(4), "T9", 0, 1)
    with pytest.raises(ArgumentError):
        appendix_a_identity(SpinBasis(4), "T1", 1, 1)
    with pytest.raises(ArgumentError):
        appendix_a_identity(SpinBasis(2), "T1", 0, 1)
    for which in CLOSED_LOOP:
        appendix_a_identity(SpinBasis(3), which, 0, 0)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_third_order_commutes(n, rng):
    basis = SpinBasis(n)
    p = cp(n=n)
    h = build_hirhm(basis, p.model)
    for _ in range(3):
        coeffs = ThirdOrderCoefficients(*(tuple(rng.normal(size=k)) for k in (6, 3, 3)))
        h3 = build_h3(basis, p, coeffs)
        assert is_hermitian(h3)
        assert max_abs(commutator(h3, h)) < 1e-10
    assert max_abs(build_h3(basis, p, ThirdOrderCoefficients.zeros())) == 0


def test_third_order_scalings():
    p = cp(g=2.0)
    c = ThirdOrderCoefficients.from_scalings(p)
    assert c.v[0] > c.t_c[0] > c.t[0] > 0
    with pytest.raises(ArgumentError):
        ThirdOrderCoefficients((1.0,) * 5, (1.0,) * 3, (1.0,) * 3)
