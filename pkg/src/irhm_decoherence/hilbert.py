"""Many-spin Hilbert space with spin and hard-core boson operators plus symmetry sectors.

Basis convention: basis index ``k`` encodes the occupation bitstring with site 0
as the least-significant bit. Bit value 1 means spin up, which is also an
occupied hard-core boson (HCB) site. All operators are dense complex
``numpy`` arrays.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from .errors import ArgumentError

DEFAULT_MAX_SITES = 12
HARD_MAX_SITES = 14

SPIN_KINDS = ("Sx", "Sy", "Sz", "Splus", "Sminus")
HCB_KINDS = ("b", "bdag", "n")


@dataclass(frozen=True)
class SpinBasis:
    """Computational basis of ``n_sites`` spin-1/2 sites.

    Sizes above ``DEFAULT_MAX_SITES`` need ``allow_large=True``; nothing above
    ``HARD_MAX_SITES`` is accepted since every operator is stored densely.
    """

    n_sites: int
    allow_large: bool = False

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ArgumentError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        cap = HARD_MAX_SITES if self.allow_large else DEFAULT_MAX_SITES
        if self.n_sites > cap:
            raise ArgumentError(
                f"n_sites={self.n_sites} exceeds the dense-storage cap of {cap}"
            )

    @property
    def dimension(self) -> int:
        return 1 << self.n_sites

    def bits(self) -> np.ndarray:
        """(dimension, n_sites) integer array of site occupations."""
        return _bit_table(self.n_sites)

    def index(self, occupations) -> int:
        """Basis index of an occupation sequence ordered by site."""
        occ = list(occupations)
        if len(occ) != self.n_sites or any(o not in (0, 1) for o in occ):
            raise ArgumentError(f"expected {self.n_sites} occupations in {{0, 1}}, got {occ}")
        return sum(o << i for i, o in enumerate(occ))

    def occupations(self, index: int) -> tuple:
        if not 0 <= index < self.dimension:
            raise ArgumentError(f"basis index {index} out of range")
        return tuple((index >> i) & 1 for i in range(self.n_sites))

    def _check_site(self, site: int):
        if not (isinstance(site, (int, np.integer)) and 0 <= site < self.n_sites):
            raise ArgumentError(f"site {site!r} out of range for N={self.n_sites}")


@dataclass(frozen=True)
class SectorLabel:
    """Total-spin quantum numbers; ``s_total`` may be left unset."""

    sz_total: float
    s_total: Optional[float] = None

    def validate(self, n_sites: int) -> "SectorLabel":
        half_n = n_sites / 2
        if not _is_half_step(self.sz_total - half_n) or abs(self.sz_total) > half_n + 1e-12:
            raise ArgumentError(f"sz_total={self.sz_total} invalid for N={n_sites}")
        if self.s_total is not None:
            if not _is_half_step(self.s_total - half_n) or self.s_total > half_n + 1e-12:
                raise ArgumentError(f"s_total={self.s_total} invalid for N={n_sites}")
            if self.s_total < abs(self.sz_total) - 1e-12:
                raise ArgumentError("s_total must be >= |sz_total|")
        return self


def _is_half_step(x: float) -> bool:
    """True when ``x`` is an integer (used on S - N/2)."""
    return abs(x - round(x)) < 1e-9


@functools.lru_cache(maxsize=None)
def _bit_table(n_sites: int) -> np.ndarray:
    idx = np.arange(1 << n_sites)
    table = (idx[:, None] >> np.arange(n_sites)[None, :]) & 1
    table.setflags(write=False)
    return table


def hop_indices(basis: SpinBasis, to_site: int, from_site: int):
    """(rows, cols) of the unit entries of ``b_to^dagger b_from`` for distinct sites."""
    bits = basis.bits()
    src = np.nonzero((bits[:, from_site] == 1) & (bits[:, to_site] == 0))[0]
    return src ^ ((1 << to_site) | (1 << from_site)), src


def hopping(basis: SpinBasis, to_site: int, from_site: int) -> np.ndarray:
    """Matrix of ``b_to^dagger b_from``; reduces to ``n_site`` when the sites coincide."""
    basis._check_site(to_site)
    basis._check_site(from_site)
    dim = basis.dimension
    out = np.zeros((dim, dim), dtype=complex)
    if to_site == from_site:
        out[np.diag_indices(dim)] = basis.bits()[:, to_site]
        return out
    out[hop_indices(basis, to_site, from_site)] = 1.0
    return out


def all_pairs_hopping(basis: SpinBasis) -> np.ndarray:
    """``sum_{i != j} b_i^dagger b_j``."""
    dim = basis.dimension
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(basis.n_sites):
        for j in range(basis.n_sites):
            if i != j:
                out[hop_indices(basis, i, j)] += 1.0
    return out


def build_hcb_operator(basis: SpinBasis, site: int, kind: str) -> np.ndarray:
    """Hard-core boson operator ``b``, ``bdag`` or ``n`` embedded at ``site``."""
    basis._check_site(site)
    if kind not in HCB_KINDS:
        raise ArgumentError(f"unknown HCB operator kind {kind!r}; expected one of {HCB_KINDS}")
    dim = basis.dimension
    bits = basis.bits()[:, site]
    out = np.zeros((dim, dim), dtype=complex)
    if kind == "n":
        out[np.diag_indices(dim)] = bits
        return out
    src = np.nonzero(bits == (0 if kind == "bdag" else 1))[0]
    out[src ^ (1 << site), src] = 1.0
    return out


def build_spin_operator(basis: SpinBasis, site: int, kind: str) -> np.ndarray:
    """Single-site spin-1/2 operator at ``site``, identity on every other site.

    Parameters
    ----------
    basis : SpinBasis
    site : int
        Site index, ``0 <= site < N``.
    kind : {'Sx', 'Sy', 'Sz', 'Splus', 'Sminus'}

    Returns
    -------
    numpy.ndarray
        Dense ``(2**N, 2**N)`` complex matrix.
    """
    basis._check_site(site)
    if kind not in SPIN_KINDS:
        raise ArgumentError(f"unknown spin operator kind {kind!r}; expected one of {SPIN_KINDS}")
    if kind == "Sz":
        return build_hcb_operator(basis, site, "n") - 0.5 * np.eye(basis.dimension)
    splus = build_hcb_operator(basis, site, "bdag")
    if kind == "Splus":
        return splus
    sminus = build_hcb_operator(basis, site, "b")
    if kind == "Sminus":
        return sminus
    if kind == "Sx":
        return 0.5 * (splus + sminus)
    return -0.5j * (splus - sminus)


def number_operator(basis: SpinBasis) -> np.ndarray:
    """Total HCB number ``sum_i n_i`` (diagonal)."""
    return np.diag(basis.bits().sum(axis=1).astype(complex))


def total_sz(basis: SpinBasis) -> np.ndarray:
    return np.diag(basis.bits().sum(axis=1) - 0.5 * basis.n_sites).astype(complex)


def total_s_squared(basis: SpinBasis) -> np.ndarray:
    """``(sum_i S_i)^2``, assembled as ``Sz^2 + Sz + S^- S^+``."""
    n = basis.n_sites
    sz = total_sz(basis)
    # S^- S^+ = sum_{i,j} b_i b_j^dagger = sum_i (1 - n_i) + sum_{i != j} b_j^dag b_i
    s2 = all_pairs_hopping(basis)
    m = np.diag(sz).real
    s2[np.diag_indices(basis.dimension)] += (n - basis.bits().sum(axis=1)) + m**2 + m
    return s2


def sector_dimension(n_sites: int, sz_total: float) -> int:
    up = sz_total + n_sites / 2
    if not _is_half_step(up) or up < -1e-12 or up > n_sites + 1e-12:
        return 0
    return comb(n_sites, int(round(up)))


def sz_sector_indices(basis: SpinBasis, sz_total: float) -> np.ndarray:
    """Basis indices whose total Sz equals ``sz_total``."""
    n_up = sz_total + basis.n_sites / 2
    return np.nonzero(basis.bits().sum(axis=1) == int(round(n_up)))[0]


def sector_projector(basis: SpinBasis, label: SectorLabel) -> np.ndarray:
    """Orthogonal projector onto the (S_T, S_T^z) sector; zero matrix if empty."""
    label.validate(basis.n_sites)
    dim = basis.dimension
    proj = np.zeros((dim, dim), dtype=complex)
    idx = sz_sector_indices(basis, label.sz_total)
    if idx.size == 0:
        return proj
    if label.s_total is None:
        proj[idx, idx] = 1.0
        return proj
    s2 = total_s_squared(basis)[np.ix_(idx, idx)]
    vals, vecs = np.linalg.eigh(s2)
    target = label.s_total * (label.s_total + 1)
    keep = vecs[:, np.abs(vals - target) < 1e-6]
    proj[np.ix_(idx, idx)] = keep @ keep.conj().T
    return proj


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def max_abs(a: np.ndarray) -> float:
    """Elementwise max-norm."""
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a: np.ndarray, atol: float = 1e-12) -> bool:
    return max_abs(a - a.conj().T) <= atol
