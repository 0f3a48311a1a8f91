"""Infinite-range Heisenberg model (IRHM) and its labeled spectrum."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import ArgumentError, ContractViolation
from .hilbert import (
    SectorLabel,
    SpinBasis,
    _is_half_step,
    commutator,
    all_pairs_hopping,
    max_abs,
    sz_sector_indices,
    total_s_squared,
    total_sz,
)


@dataclass(frozen=True)
class ModelParams:
    """IRHM parameters. The pair coupling is ``J = j_star / (N - 1)``."""

    j_star: float
    delta: float
    n_sites: int

    def __post_init__(self):
        if not self.j_star > 0:
            raise ArgumentError(f"j_star must be > 0, got {self.j_star}")
        if not self.delta >= 0:
            raise ArgumentError(f"delta must be >= 0, got {self.delta}")
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ArgumentError(f"n_sites must be an integer >= 2, got {self.n_sites}")

    @property
    def j(self) -> float:
        return self.j_star / (self.n_sites - 1)

    def basis(self, allow_large: bool = False) -> SpinBasis:
        return SpinBasis(self.n_sites, allow_large=allow_large)


def _check_basis(basis: SpinBasis, params: ModelParams):
    if basis.n_sites != params.n_sites:
        raise ArgumentError(
            f"basis has N={basis.n_sites} but params have N={params.n_sites}"
        )


def xxz_pair_sum(basis: SpinBasis, j_tr: float, j_lng: float) -> np.ndarray:
    """``sum_{i<j} [j_tr (Sx Sx + Sy Sy) + j_lng Sz Sz]`` built from occupation bits."""
    n = basis.n_sites
    bits = basis.bits()
    sz = bits - 0.5
    diag = np.zeros(basis.dimension)
    for i in range(n):
        for k in range(i + 1, n):
            diag += sz[:, i] * sz[:, k]
    # Sx Sx + Sy Sy = (S+ S- + S- S+) / 2
    out = 0.5 * j_tr * all_pairs_hopping(basis)
    out[np.diag_indices_from(out)] += j_lng * diag
    return out


def build_hirhm(basis: SpinBasis, params: ModelParams) -> np.ndarray:
    """``J sum_{i<j} [S_i . S_j + (Delta - 1) Sz_i Sz_j]`` as a dense matrix."""
    _check_basis(basis, params)
    return xxz_pair_sum(basis, params.j, params.j * params.delta)


def build_hirhm_global_form(basis: SpinBasis, params: ModelParams) -> np.ndarray:
    """The same Hamiltonian written through the collective operators.

    ``(J/2) [S_T^2 - sum_i S_i^2 + (Delta - 1)(Sz_T^2 - sum_i Sz_i^2)]``
    with ``S_i^2 = 3/4`` and ``Sz_i^2 = 1/4`` for spin 1/2.
    """
    _check_basis(basis, params)
    n = basis.n_sites
    eye = np.eye(basis.dimension)
    sz = total_sz(basis)
    return 0.5 * params.j * (
        total_s_squared(basis) - 0.75 * n * eye + (params.delta - 1) * (sz @ sz - 0.25 * n * eye)
    )


def closed_form_energy(params: ModelParams, s_total: float, sz_total: float) -> float:
    """IRHM eigenenergy of the multiplet member with total spin ``s_total`` and ``sz_total``."""
    n = params.n_sites
    if not (_is_half_step(s_total - n / 2) and _is_half_step(sz_total - n / 2)):
        raise ArgumentError(f"quantum numbers ({s_total}, {sz_total}) incompatible with N={n}")
    if s_total < -1e-12 or s_total > n / 2 + 1e-12 or abs(sz_total) > s_total + 1e-12:
        raise ArgumentError(f"need |sz_total| <= s_total <= N/2, got ({s_total}, {sz_total})")
    return 0.5 * params.j * (
        s_total * (s_total + 1) - 0.75 * n + (params.delta - 1) * (sz_total**2 - 0.25 * n)
    )


@dataclass(frozen=True)
class LabeledSpectrum:
    """Eigenpairs of a Hamiltonian, each tagged with (S_T, S_T^z).

    ``vectors[:, k]`` is the eigenvector for ``energies[k]``; ordering is by
    ascending energy with ties broken by ``(s_total, sz_total)``.
    """

    energies: np.ndarray
    vectors: np.ndarray
    s_total: np.ndarray
    sz_total: np.ndarray
    labels: List[SectorLabel] = field(repr=False, default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.energies)

    def to_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ op @ self.vectors

    def from_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        return self.vectors @ op @ self.vectors.conj().T

    def multiplicities(self) -> dict:
        out: dict = {}
        for s, m in zip(self.s_total, self.sz_total):
            out[(float(s), float(m))] = out.get((float(s), float(m)), 0) + 1
        return out


def _spin_from_casimir(value: float) -> float:
    s = 0.5 * (-1 + np.sqrt(1 + 4 * max(value, 0.0)))
    return round(2 * s) / 2


def labeled_spectrum(h: np.ndarray, basis: SpinBasis, tol: float = 1e-10) -> LabeledSpectrum:
    """Simultaneous eigenbasis of ``h``, ``S_T^2`` and ``S_T^z``.

    The total-Sz blocks are exact in the computational basis. Inside each block
    ``S_T^2`` is diagonalised first (its eigenvalues are separated by at least 2),
    then ``h`` is diagonalised inside every ``S_T`` eigenspace, so degenerate
    levels of ``h`` never mix different labels.

    Raises
    ------
    ContractViolation
        If ``h`` does not commute with both collective operators to ``tol``
        (scaled by ``max(1, |h|_max)``).
    """
    dim = basis.dimension
    if h.shape != (dim, dim):
        raise ArgumentError(f"operator shape {h.shape} does not match basis dimension {dim}")
    s2 = total_s_squared(basis)
    sz = total_sz(basis)
    scale = max(1.0, max_abs(h))
    for name, op in (("S_T^z", sz), ("S_T^2", s2)):
        res = max_abs(commutator(h, op))
        if res > tol * scale:
            raise ContractViolation(f"H does not commute with {name} (residual {res:.3e})")

    n = basis.n_sites
    energies, vectors, s_labels, sz_labels = [], [], [], []
    for n_up in range(n + 1):
        m = n_up - n / 2
        idx = sz_sector_indices(basis, m)
        s2_vals, s2_vecs = np.linalg.eigh(s2[np.ix_(idx, idx)])
        spins = np.array([_spin_from_casimir(v) for v in s2_vals])
        h_block = h[np.ix_(idx, idx)]
        for s in np.unique(spins):
            sub = s2_vecs[:, spins == s]
            e, c = np.linalg.eigh(sub.conj().T @ h_block @ sub)
            full = np.zeros((dim, len(e)), dtype=complex)
            full[idx, :] = sub @ c
            energies.extend(e)
            vectors.append(full)
            s_labels.extend([s] * len(e))
            sz_labels.extend([m] * len(e))

    energies = np.asarray(energies)
    vectors = np.hstack(vectors)
    s_labels = np.asarray(s_labels)
    sz_labels = np.asarray(sz_labels)

    # group numerically tied energies before the lexicographic tie-break
    order = np.argsort(energies, kind="stable")
    cluster = np.zeros(len(energies), dtype=int)
    gap_tol = 1e-9 * scale
    for pos in range(1, len(order)):
        jump = energies[order[pos]] - energies[order[pos - 1]] > gap_tol
        cluster[order[pos]] = cluster[order[pos - 1]] + int(jump)
    order = np.lexsort((sz_labels, s_labels, cluster))

    return LabeledSpectrum(
        energies=energies[order],
        vectors=vectors[:, order],
        s_total=s_labels[order],
        sz_total=sz_labels[order],
        labels=[SectorLabel(float(m), float(s)) for s, m in zip(s_labels[order], sz_labels[order])],
    )


def spectrum_residuals(spec: LabeledSpectrum, params: ModelParams) -> np.ndarray:
    """``|E_numeric - E_closed_form|`` for every labeled eigenpair."""
    expected = np.array(
        [closed_form_energy(params, s, m) for s, m in zip(spec.s_total, spec.sz_total)]
    )
    return np.abs(spec.energies - expected)
