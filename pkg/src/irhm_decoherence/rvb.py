"""Valence-bond (VB) and homogenized resonating valence-bond (RVB) states.

Site indices are 0-based. A dimer ``(i, j)`` is ``(|up_i dn_j> - |dn_i up_j>)/sqrt(2)``,
positive on ``|up>`` at the first site of the pair. The RVB builders use
1-based polygon labels 1..N and orient every dimer from sub-lattice A (odd
labels) to sub-lattice B (even labels) before shifting to 0-based sites.
"""
from __future__ import annotations

from typing import Iterable, Sequence, Tuple

import numpy as np

from .errors import ArgumentError
from .hilbert import SpinBasis

Pairing = Sequence[Tuple[int, int]]

RVB4_PAIRINGS = (((1, 2), (3, 4)), ((1, 4), (2, 3)))
RVB6_PAIRINGS = (
    ((1, 2), (3, 6), (4, 5)),
    ((2, 3), (1, 4), (5, 6)),
    ((1, 6), (2, 5), (3, 4)),
)


def _validate_pairing(basis: SpinBasis, pairing: Pairing):
    n = basis.n_sites
    if n % 2:
        raise ArgumentError(f"VB states need an even number of sites, got N={n}")
    seen = [s for pair in pairing for s in pair]
    if any(len(pair) != 2 for pair in pairing) or sorted(seen) != list(range(n)):
        raise ArgumentError(f"pairing {list(pairing)} is not a perfect matching of {n} sites")


def build_vb_state(basis: SpinBasis, pairing: Pairing) -> np.ndarray:
    """Product of singlet dimers over a perfect matching of the sites."""
    _validate_pairing(basis, pairing)
    bits = basis.bits()
    amp = np.ones(basis.dimension, dtype=complex)
    for i, j in pairing:
        up_i, up_j = bits[:, i], bits[:, j]
        amp *= np.where(up_i != up_j, np.where(up_i == 1, 1.0, -1.0), 0.0) / np.sqrt(2)
    return amp


def _oriented(pairings: Iterable[Pairing]):
    """1-based pairs -> 0-based pairs with the odd (sub-lattice A) label first."""
    return [[(i - 1, j - 1) if i % 2 else (j - 1, i - 1) for i, j in p] for p in pairings]


def _rvb(basis: SpinBasis, pairings, root: complex, normalize: bool) -> np.ndarray:
    psi = sum(
        root ** (k + 1) * build_vb_state(basis, p) for k, p in enumerate(_oriented(pairings))
    )
    return psi / np.linalg.norm(psi) if normalize else psi


def build_rvb4(basis: SpinBasis, normalize: bool = True) -> np.ndarray:
    """``w3 Phi_12 Phi_34 + w3^2 Phi_14 Phi_23`` with ``w3 = exp(2 pi i / 3)``."""
    if basis.n_sites != 4:
        raise ArgumentError("the four-site RVB state needs N=4")
    return _rvb(basis, RVB4_PAIRINGS, np.exp(2j * np.pi / 3), normalize)


def build_rvb6(basis: SpinBasis, normalize: bool = True) -> np.ndarray:
    """Three-term six-site RVB state with phases ``i, i^2, i^3``."""
    if basis.n_sites != 6:
        raise ArgumentError("the six-site RVB state needs N=6")
    return _rvb(basis, RVB6_PAIRINGS, 1j, normalize)


def reduced_density_matrix(psi: np.ndarray, n_sites: int, part_a: Sequence[int]) -> np.ndarray:
    """``Tr_B |psi><psi|`` on the sites in ``part_a`` (ordered as given, first = most significant)."""
    part_a = list(part_a)
    rest = [s for s in range(n_sites) if s not in part_a]
    # reshape puts site N-1 on axis 0 (site 0 is the least-significant bit)
    tensor = np.asarray(psi).reshape((2,) * n_sites)
    axes = [n_sites - 1 - s for s in part_a] + [n_sites - 1 - s for s in rest]
    mat = tensor.transpose(axes).reshape(2 ** len(part_a), -1)
    return mat @ mat.conj().T


def entanglement_entropy(psi: np.ndarray, part_a: Sequence[int], base: float = 2.0) -> float:
    """Von Neumann entropy of the reduced state on ``part_a`` (bits by default; ``base=e`` for nats)."""
    psi = np.asarray(psi, dtype=complex)
    n_sites = int(round(np.log2(psi.size)))
    if 2**n_sites != psi.size:
        raise ArgumentError("state length is not a power of two")
    part_a = list(part_a)
    if (
        not part_a
        or len(set(part_a)) != len(part_a)
        or len(part_a) >= n_sites
        or any(not 0 <= s < n_sites for s in part_a)
    ):
        raise ArgumentError(f"part_a={part_a} must be a nonempty proper subset of the sites")
    psi = psi / np.linalg.norm(psi)
    evals = np.clip(np.linalg.eigvalsh(reduced_density_matrix(psi, n_sites, part_a)), 0.0, None)
    evals = evals[evals > 0]
    return float(-np.sum(evals * np.log(evals)) / np.log(base))
