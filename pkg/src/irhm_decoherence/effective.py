"""Lang-Firsov effective Hamiltonians for IRHM spins on local optical phonons.

Everything is written in the hard-core boson (HCB) language, where
``b^dagger = S^+``, ``b = S^-`` and ``n = Sz + 1/2``.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import ArgumentError
from .hilbert import (
    SpinBasis,
    all_pairs_hopping,
    build_hcb_operator,
    commutator,
    max_abs,
    number_operator,
)
from .irhm import ModelParams, _check_basis, xxz_pair_sum

SERIES_RTOL = 1e-15
SERIES_MAX_TERMS = 300


class RegimeWarning(UserWarning):
    """Parameters lie outside the strong-coupling, non-adiabatic regime."""


@dataclass(frozen=True)
class CouplingParams:
    """Spin-phonon coupling ``g`` and optical phonon frequency ``omega``."""

    g: float
    omega: float
    model: ModelParams

    def __post_init__(self):
        if not self.g >= 0:
            raise ArgumentError(f"g must be >= 0, got {self.g}")
        if not self.omega > 0:
            raise ArgumentError(f"omega must be > 0, got {self.omega}")

    @property
    def in_validity_regime(self) -> bool:
        return self.g > 1 and self.model.j_star / self.omega <= 1

    def check_regime(self) -> bool:
        ok = self.in_validity_regime
        if not ok:
            warnings.warn(
                f"g={self.g}, J*/omega={self.model.j_star / self.omega:.3g} is outside "
                "the strong-coupling (g > 1) non-adiabatic (J*/omega <= 1) regime",
                RegimeWarning,
                stacklevel=2,
            )
        return ok

    @property
    def polaron_factor(self) -> float:
        return math.exp(-self.g**2)


# --------------------------------------------------------------------------- #
#                         LF-transformed system part                          #
# --------------------------------------------------------------------------- #

def build_hs(basis: SpinBasis, params: CouplingParams) -> np.ndarray:
    """System Hamiltonian with polaron-narrowed hopping ``0.5 J e^{-g^2}``."""
    model = params.model
    _check_basis(basis, model)
    # (0.5 t b_i^dag b_j + h.c.) = t (Sx Sx + Sy Sy);  Delta (n_i-1/2)(n_j-1/2) = Delta Sz Sz
    return xxz_pair_sum(basis, model.j * params.polaron_factor, model.j * model.delta)


def hopping_part(basis: SpinBasis, params: CouplingParams) -> np.ndarray:
    """``0.5 J e^{-g^2} sum_{i<j} (b_i^dag b_j + h.c.)``."""
    return 0.5 * params.model.j * params.polaron_factor * all_pairs_hopping(basis)


def momentum_operators(basis: SpinBasis):
    """``b_k`` for ``k = 2 pi m / N`` from ``b_k = N^{-1/2} sum_j e^{i k r_j} b_j``."""
    n = basis.n_sites
    b_sites = [build_hcb_operator(basis, j, "b") for j in range(n)]
    ks = 2 * np.pi * np.arange(n) / n
    return ks, [sum(np.exp(1j * k * j) * b_sites[j] for j in range(n)) / np.sqrt(n) for k in ks]


def hopping_spectrum_identity(basis: SpinBasis, params: CouplingParams) -> float:
    """Max-norm residual of the momentum-space rewriting of the hopping term.

    Compares ``hopping_part`` against
    ``0.5 J* N/(N-1) e^{-g^2} n_0 - 0.5 J e^{-g^2} N_p`` where ``n_0`` is the
    occupation of the ``k = 0`` mode and ``N_p`` the summed momentum occupations.
    """
    model = params.model
    n = basis.n_sites
    if n < 2:
        raise ArgumentError("need N >= 2")
    ks, b_k = momentum_operators(basis)
    n0 = b_k[0].conj().T @ b_k[0]
    n_p = sum(b.conj().T @ b for b in b_k)
    rhs = (
        0.5 * model.j_star * n / (n - 1) * params.polaron_factor * n0
        - 0.5 * model.j * params.polaron_factor * n_p
    )
    return max_abs(hopping_part(basis, params) - rhs)


def hopping_excitation_gap(basis: SpinBasis, params: CouplingParams, n_particles: int = 1) -> float:
    """Spread of hopping-part eigenvalues inside the sector with ``n_particles`` HCBs."""
    occ = basis.bits().sum(axis=1)
    idx = np.nonzero(occ == n_particles)[0]
    if idx.size == 0:
        raise ArgumentError(f"no states with {n_particles} particles for N={basis.n_sites}")
    vals = np.linalg.eigvalsh(hopping_part(basis, params)[np.ix_(idx, idx)])
    return float(vals[-1] - vals[0])


# --------------------------------------------------------------------------- #
#                           second-order couplings                            #
# --------------------------------------------------------------------------- #

def _exp_integral_series(x: float) -> float:
    """``sum_{n>=1} x^n / (n! n)`` accumulated exactly with ``math.fsum``."""
    terms = []
    term = x  # n = 1
    for n in range(1, SERIES_MAX_TERMS + 1):
        if not math.isfinite(term):
            raise OverflowError(f"series term overflowed at n={n} for x={x}")
        terms.append(term)
        # once past the peak, stop when the next term is negligible relative to the sum
        if n > x and term < SERIES_RTOL * math.fsum(terms):
            break
        term = term * x * n / (n + 1) ** 2
    else:
        raise OverflowError(f"series did not converge within {SERIES_MAX_TERMS} terms (x={x})")
    total = math.fsum(terms)
    if not math.isfinite(total):
        raise OverflowError(f"series sum overflowed for x={x}")
    return total


def f1(g: float) -> float:
    """``sum_{n>=1} g^{2n} / (n! n)``."""
    if not g >= 0:
        raise ArgumentError(f"g must be >= 0, got {g}")
    if g == 0:
        return 0.0
    return _exp_integral_series(g * g)


def f2(g: float) -> float:
    """``sum_{n,m>=1} g^{2(n+m)} / (n! m! (n+m))``.

    Collecting terms with ``s = n + m`` gives ``sum_s (2^s - 2) g^{2s} / (s s!)``,
    i.e. ``f1(sqrt(2) g) - 2 f1(g)``; the single series is summed directly so
    the subtraction never happens.
    """
    if not g >= 0:
        raise ArgumentError(f"g must be >= 0, got {g}")
    if g == 0:
        return 0.0
    x = g * g
    terms = []
    term = x  # x^s / (s s!) at s = 1
    for s in range(1, SERIES_MAX_TERMS + 1):
        if not math.isfinite(term):
            raise OverflowError(f"series term overflowed at s={s} for g={g}")
        weighted = term * (2.0**s - 2.0)
        terms.append(weighted)
        if s > 2 * x and weighted < SERIES_RTOL * math.fsum(terms):
            break
        term = term * x * s / (s + 1) ** 2
    else:
        raise OverflowError(f"series did not converge within {SERIES_MAX_TERMS} terms (g={g})")
    total = math.fsum(terms)
    if not math.isfinite(total):
        raise OverflowError(f"series sum overflowed for g={g}")
    return total


def second_order_couplings(params: CouplingParams) -> Tuple[float, float]:
    """``(J_perp2, J_par2)`` of the second-order effective Hamiltonian."""
    model = params.model
    g = params.g
    scale = model.j**2 * math.exp(-2 * g * g) / (2 * params.omega)
    a = f1(g)
    j_perp2 = -(model.n_sites - 2) * a * scale
    j_par2 = (2 * a + f2(g)) * scale
    return j_perp2, j_par2


def build_h2(basis: SpinBasis, params: CouplingParams) -> np.ndarray:
    """Second-order term: hopping ``0.5 J_perp2`` and pair interaction ``-0.5 J_par2``."""
    _check_basis(basis, params.model)
    j_perp2, j_par2 = second_order_couplings(params)
    n = basis.n_sites
    occ = basis.bits()
    out = 0.5 * j_perp2 * all_pairs_hopping(basis)
    diag = np.zeros(basis.dimension)
    for i in range(n):
        for j in range(i + 1, n):
            ni, nj = occ[:, i], occ[:, j]
            diag += ni * (1 - nj) + nj * (1 - ni)
    out[np.diag_indices_from(out)] += -0.5 * j_par2 * diag
    return out


def spin_form_couplings(params: CouplingParams) -> Tuple[float, float, float]:
    """``(J_tr, J_lng, shift)`` such that ``H_s + H2`` equals the XXZ pair sum plus ``shift``.

    ``shift`` is the constant ``-J_par2 N (N-1) / 8`` produced by
    ``n_i(1-n_j) + n_j(1-n_i) = 1/2 - 2 Sz_i Sz_j``.
    """
    model = params.model
    j_perp2, j_par2 = second_order_couplings(params)
    j_tr = model.j * params.polaron_factor + j_perp2
    j_lng = model.j * model.delta + j_par2
    n = model.n_sites
    return j_tr, j_lng, -j_par2 * n * (n - 1) / 8


def build_spin_form_heff(basis: SpinBasis, params: CouplingParams) -> np.ndarray:
    """``sum_{i<j} [J_tr (Sx Sx + Sy Sy) + J_lng Sz Sz]`` (constant shift dropped)."""
    _check_basis(basis, params.model)
    j_tr, j_lng, _ = spin_form_couplings(params)
    return xxz_pair_sum(basis, j_tr, j_lng)


# --------------------------------------------------------------------------- #
#                   third-order processes: operator identities                #
# --------------------------------------------------------------------------- #

OPEN_LOOP = ("T1", "T2", "T3", "T4", "T5", "T6")
CLOSED_LOOP = ("V1", "V2", "V3")
CLOSED_LOOP_HOPPING = ("TC1", "TC2", "TC3")
IDENTITIES = OPEN_LOOP + CLOSED_LOOP + CLOSED_LOOP_HOPPING


@dataclass(frozen=True)
class ThirdOrderCoefficients:
    """Coefficients ``t_1..t_6``, ``t_c1..t_c3`` and ``v_1..v_3``.

    Only order-of-magnitude scalings are known for these, so they are free
    inputs; :meth:`from_scalings` fills them with those scalings.
    """

    t: Tuple[float, ...]
    t_c: Tuple[float, ...]
    v: Tuple[float, ...]

    def __post_init__(self):
        if len(self.t) != 6 or len(self.t_c) != 3 or len(self.v) != 3:
            raise ArgumentError("need 6 t values, 3 t_c values and 3 v values")

    @classmethod
    def from_scalings(cls, params: CouplingParams) -> "ThirdOrderCoefficients":
        j, g, w = params.model.j, params.g, params.omega
        if g == 0:
            raise ArgumentError("the third-order scalings are singular at g = 0")
        t = j**3 * math.exp(-g * g) / (g * g * w) ** 2
        tc = j**3 * math.exp(-g * g) / (g * w) ** 2
        v = j**3 / (g * g * w) ** 2
        return cls((t,) * 6, (tc,) * 3, (v,) * 3)

    @classmethod
    def zeros(cls) -> "ThirdOrderCoefficients":
        return cls((0.0,) * 6, (0.0,) * 3, (0.0,) * 3)


class _Ops:
    """Per-basis cache of single-site HCB matrices."""

    def __init__(self, basis: SpinBasis):
        n = basis.n_sites
        self.basis = basis
        self.b = [build_hcb_operator(basis, i, "b") for i in range(n)]
        self.bd = [build_hcb_operator(basis, i, "bdag") for i in range(n)]
        self.n_tot = number_operator(basis)
        self.eye = np.eye(basis.dimension)


@functools.lru_cache(maxsize=16)
def _ops(n_sites: int) -> _Ops:
    return _Ops(SpinBasis(n_sites, allow_large=True))


def _chain(*mats):
    out = mats[0]
    for m in mats[1:]:
        out = out @ m
    return out


def identity_lhs(basis: SpinBasis, which: str, l: int, i: int) -> np.ndarray:
    """Literal multi-site operator-product sum for a third-order process.

    ``l`` is ignored for the closed-loop interactions ``V1..V3``.
    """
    o = _ops(basis.n_sites)
    b, bd = o.b, o.bd
    n = basis.n_sites
    out = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    others = [s for s in range(n) if s not in (i, l)]
    if which in OPEN_LOOP:
        for j in others:
            for k in others:
                if k == j:
                    continue
                if which == "T1":
                    out += _chain(bd[l], b[k], bd[k], b[j], bd[j], b[i])
                elif which == "T2":
                    out += _chain(bd[j], b[i], bd[l], b[k], bd[k], b[j])
                elif which == "T3":
                    out += _chain(bd[l], b[k], bd[j], b[i], bd[k], b[j])
                elif which == "T4":
                    out += _chain(bd[k], b[j], bd[j], b[i], bd[l], b[k])
                elif which == "T5":
                    out += _chain(bd[k], b[j], bd[l], b[k], bd[j], b[i])
                else:
                    out += _chain(bd[j], b[i], bd[k], b[j], bd[l], b[k])
        return out
    if which in CLOSED_LOOP:
        rest = [s for s in range(n) if s != i]
        for j in rest:
            for k in rest:
                if k == j:
                    continue
                if which == "V1":
                    out += _chain(bd[i], b[k], bd[k], b[j], bd[j], b[i])
                elif which == "V2":
                    out += _chain(bd[i], b[k], bd[j], b[i], bd[k], b[j])
                else:
                    out += _chain(bd[k], b[j], bd[i], b[k], bd[j], b[i])
        return out
    if which == "TC1":
        for j in others:
            out += _chain(bd[l], b[i], bd[i], b[j], bd[j], b[i])
        return out
    if which == "TC2":
        for k in others:
            out += _chain(bd[l], b[k], bd[k], b[l], bd[l], b[i])
        return out
    return _chain(bd[l], b[i], bd[i], b[l], bd[l], b[i])


def identity_rhs(basis: SpinBasis, which: str, l: int, i: int) -> np.ndarray:
    """Closed form of a third-order process as a function of the total number operator."""
    o = _ops(basis.n_sites)
    n = basis.n_sites
    big_n, eye = o.n_tot, o.eye
    hop = o.bd[l] @ o.b[i] if which not in CLOSED_LOOP else None
    n_i = o.bd[i] @ o.b[i]
    if which == "T1":
        return ((n - 1) * eye - big_n) @ ((n - 2) * eye - big_n) @ hop
    if which in ("T2", "T3", "T4", "T5"):
        return (big_n - eye) @ ((n - 1) * eye - big_n) @ hop
    if which == "T6":
        return (big_n - eye) @ (big_n - 2 * eye) @ hop
    if which == "V1":
        return (n * eye - big_n) @ ((n - 1) * eye - big_n) @ n_i
    if which in ("V2", "V3"):
        return (big_n - eye) @ (n * eye - big_n) @ n_i
    if which in ("TC1", "TC2"):
        return ((n - 1) * eye - big_n) @ hop
    return hop


def _validate_identity_args(basis: SpinBasis, which: str, l: int, i: int):
    if which not in IDENTITIES:
        raise ArgumentError(f"unknown identity {which!r}; expected one of {IDENTITIES}")
    if basis.n_sites < 3:
        raise ArgumentError("third-order identities need N >= 3")
    basis._check_site(i)
    if which not in CLOSED_LOOP:
        basis._check_site(l)
        if l == i:
            raise ArgumentError("hopping identities need l != i")


def appendix_a_identity(basis: SpinBasis, which: str, l: int, i: int):
    """Return ``(lhs, rhs, residual)`` for one third-order operator identity.

    ``lhs`` is the brute-force operator product sum, ``rhs`` the number-operator
    closed form and ``residual`` their elementwise max difference.
    """
    _validate_identity_args(basis, which, l, i)
    lhs = identity_lhs(basis, which, l, i)
    rhs = identity_rhs(basis, which, l, i)
    return lhs, rhs, max_abs(lhs - rhs)


def valid_site_pairs(basis: SpinBasis, which: str):
    n = basis.n_sites
    if which in CLOSED_LOOP:
        return [(i, i) for i in range(n)]
    return [(l, i) for l in range(n) for i in range(n) if l != i]


@functools.lru_cache(maxsize=8)
def _process_sums(n_sites: int) -> Dict[str, np.ndarray]:
    """Site-summed literal process operators, independent of the coefficients."""
    basis = SpinBasis(n_sites, allow_large=True)
    sums = {}
    for which in IDENTITIES:
        acc = np.zeros((basis.dimension, basis.dimension), dtype=complex)
        for l, i in valid_site_pairs(basis, which):
            acc += identity_lhs(basis, which, l, i)
        acc.setflags(write=False)
        sums[which] = acc
    return sums


def build_h3(
    basis: SpinBasis, params: CouplingParams, coeffs: ThirdOrderCoefficients = None
) -> np.ndarray:
    """Third-order effective term assembled from the literal process operators.

    Returns the Hermitian part ``(A + A^dagger) / 2`` of the coefficient-weighted
    sum; ``coeffs`` defaults to :meth:`ThirdOrderCoefficients.from_scalings`.
    """
    _check_basis(basis, params.model)
    if basis.n_sites < 3:
        raise ArgumentError("third-order term needs N >= 3")
    if coeffs is None:
        coeffs = ThirdOrderCoefficients.from_scalings(params)
    sums = _process_sums(basis.n_sites)
    a = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    for name, c in zip(OPEN_LOOP, coeffs.t):
        a += c * sums[name]
    for name, c in zip(CLOSED_LOOP_HOPPING, coeffs.t_c):
        a += c * sums[name]
    for name, c in zip(CLOSED_LOOP, coeffs.v):
        a += c * sums[name]
    return 0.5 * (a + a.conj().T)


def commutes(a: np.ndarray, b: np.ndarray, atol: float) -> bool:
    return max_abs(commutator(a, b)) <= atol
