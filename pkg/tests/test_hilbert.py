import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irhm_decoherence.errors import ArgumentError
from irhm_decoherence.hilbert import (
    SectorLabel,
    SpinBasis,
    build_hcb_operator,
    build_spin_operator,
    commutator,
    hopping,
    is_hermitian,
    number_operator,
    sector_dimension,
    sector_projector,
    total_s_squared,
    total_sz,
)

from oracles import SPLUS, SX, SY, SZ, site_op

sites = st.integers(min_value=1, max_value=6).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, n - 1), st.integers(0, n - 1))
)


def test_basis_dimension_and_bit_order():
    basis = SpinBasis(3)
    assert basis.dimension == 8
    assert basis.index((1, 0, 0)) == 1
    assert basis.occupations(4) == (0, 0, 1)


def test_basis_size_limits():
    with pytest.raises(ArgumentError):
        SpinBasis(0)
    with pytest.raises(ArgumentError):
        SpinBasis(13)
    assert SpinBasis(13, allow_large=True).dimension == 2**13
    with pytest.raises(ArgumentError):
        SpinBasis(15, allow_large=True)


def test_single_site_sz_acts_on_up_with_plus_half():
    basis = SpinBasis(1)
    sz = build_spin_operator(basis, 0, "Sz")
    up = np.zeros(2)
    up[basis.index((1,))] = 1
    np.testing.assert_allclose(sz @ up, 0.5 * up)
    # index order: bit 0 (down) first
    np.testing.assert_allclose(sz, np.diag([-0.5, 0.5]))


@given(sites)
def test_spin_operators_match_kronecker_oracle(args):
    n, site, _ = args
    basis = SpinBasis(n)
    for kind, ref in (("Sx", SX), ("Sy", SY), ("Sz", SZ), ("Splus", SPLUS), ("Sminus", SPLUS.T)):
        np.testing.assert_allclose(build_spin_operator(basis, site, kind), site_op(ref, site, n), atol=1e-14)


@given(sites)
def test_spin_algebra(args):
    n, i, j = args
    basis = SpinBasis(n)
    sp = build_spin_operator(basis, i, "Splus")
    sm = build_spin_operator(basis, i, "Sminus")
    sz = build_spin_operator(basis, i, "Sz")
    np.testing.assert_allclose(commutator(sp, sm), 2 * sz, atol=1e-14)
    sx, sy = build_spin_operator(basis, i, "Sx"), build_spin_operator(basis, i, "Sy")
    np.testing.assert_allclose(commutator(sx, sy), 1j * sz, atol=1e-14)
    if i != j:
        np.testing.assert_allclose(commutator(sp, build_spin_operator(basis, j, "Sminus")), 0, atol=1e-14)


@given(sites)
def test_hcb_algebra(args):
    n, i, j = args
    basis = SpinBasis(n)
    b, bd = build_hcb_operator(basis, i, "b"), build_hcb_operator(basis, i, "bdag")
    occ = build_hcb_operator(basis, i, "n")
    np.testing.assert_allclose(bd @ b, occ, atol=0)
    np.testing.assert_allclose(b @ b, 0, atol=0)
    # on-site hard-core anticommutator
    np.testing.assert_allclose(b @ bd + bd @ b, np.eye(basis.dimension), atol=0)
    # spin mapping
    np.testing.assert_allclose(bd, build_spin_operator(basis, i, "Splus"), atol=0)
    np.testing.assert_allclose(occ, build_spin_operator(basis, i, "Sz") + 0.5 * np.eye(basis.dimension), atol=0)
    if i != j:
        bj = build_hcb_operator(basis, j, "b")
        np.testing.assert_allclose(commutator(b, bj), 0, atol=0)
        np.testing.assert_allclose(hopping(basis, i, j), bd @ bj, atol=0)
    else:
        np.testing.assert_allclose(hopping(basis, i, i), occ, atol=0)


def test_invalid_kind_and_site():
    basis = SpinBasis(2)
    with pytest.raises(ArgumentError):
        build_spin_operator(basis, 0, "Sq")
    with pytest.raises(ArgumentError):
        build_hcb_operator(basis, 2, "b")


@pytest.mark.parametrize("n", range(1, 8))
def test_collective_operators(n):
    basis = SpinBasis(n)
    sz = total_sz(basis)
    s2 = total_s_squared(basis)
    ref_s = [sum(site_op(m, i, n) for i in range(n)) for m in (SX, SY, SZ)]
    np.testing.assert_allclose(s2, sum(m @ m for m in ref_s), atol=1e-12)
    np.testing.assert_allclose(sz, ref_s[2], atol=1e-14)
    np.testing.assert_allclose(number_operator(basis), sz + n / 2 * np.eye(2**n), atol=1e-14)
    assert is_hermitian(s2)
    vals = np.linalg.eigvalsh(s2)
    s = 0.5 * (-1 + np.sqrt(1 + 4 * vals))
    np.testing.assert_allclose(2 * s, np.round(2 * s), atol=1e-9)


@pytest.mark.parametrize("n", range(1, 9))
def test_sector_dimension_is_binomial(n):
    for n_up in range(n + 1):
        assert sector_dimension(n, n_up - n / 2) == math.comb(n, n_up)
    assert sum(sector_dimension(n, k - n / 2) for k in range(n + 1)) == 2**n


def test_sector_projector_properties():
    basis = SpinBasis(4)
    s2 = total_s_squared(basis)
    total = np.zeros((16, 16))
    for s, sz, dim in ((0, 0, 2), (1, 0, 3), (2, 0, 1), (1, 1, 3), (2, -2, 1)):
        p = sector_projector(basis, SectorLabel(sz, s))
        np.testing.assert_allclose(p @ p, p, atol=1e-12)
        assert np.isclose(np.trace(p).real, dim)
        np.testing.assert_allclose(s2 @ p, s * (s + 1) * p, atol=1e-12)
    for n_up in range(5):
        total = total + sector_projector(basis, SectorLabel(n_up - 2))
    np.testing.assert_allclose(total, np.eye(16), atol=0)


def test_sector_label_validation():
    with pytest.raises(ArgumentError):
        SectorLabel(0.5).validate(4)
    with pytest.raises(ArgumentError):
        SectorLabel(3).validate(4)
    with pytest.raises(ArgumentError):
        SectorLabel(1, 0.5).validate(4)
    with pytest.raises(ArgumentError):
        SectorLabel(2, 1).validate(4)
    assert SectorLabel(1, 2).validate(4).s_total == 2
