"""Reduced dynamics for IRHM spins coupled to local optical phonons (T = 0, Markov).

In the Lang-Firsov frame the second-order master equation reduces to
``d rho~/dt = -i [H2, rho~]`` in the interaction picture of ``H_s``. Because
``H2`` and ``H_s`` commute, every eigenbasis coherence only acquires a phase.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .effective import CouplingParams, RegimeWarning, build_h2, build_hs
from .errors import AccuracyError, ArgumentError, ContractViolation
from .hilbert import SpinBasis, commutator, max_abs
from .irhm import LabeledSpectrum, labeled_spectrum

RICHARDSON_TOL = 1e-6


def validate_density_matrix(rho: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Return ``rho`` as a complex array after checking it is a valid density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ArgumentError(f"density matrix must be square, got shape {rho.shape}")
    if max_abs(rho - rho.conj().T) > atol:
        raise ArgumentError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise ArgumentError(f"density matrix trace is {np.trace(rho).real:.15g}, not 1")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ArgumentError("density matrix has a negative eigenvalue")
    return rho


def pure_state(psi: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_density_matrix(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Random full-rank (or ``rank``) density matrix from a complex Ginibre draw."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


@dataclass(frozen=True)
class Trajectory:
    """Density matrices in the computational basis at ascending ``times``."""

    times: np.ndarray
    states: np.ndarray  # (n_times, dim, dim)

    def __len__(self):
        return len(self.times)

    def in_eigenbasis(self, spec: LabeledSpectrum) -> np.ndarray:
        v = spec.vectors
        return np.einsum("ai,tab,bj->tij", v.conj(), self.states, v, optimize=True)

    def element(self, spec: LabeledSpectrum, bra: int, ket: int) -> np.ndarray:
        """Series of the eigenbasis matrix element ``<bra| rho(t) |ket>``."""
        v = spec.vectors
        return np.einsum("a,tab,b->t", v[:, bra].conj(), self.states, v[:, ket], optimize=True)

    def traces(self) -> np.ndarray:
        return np.einsum("tii->t", self.states)

    def purities(self) -> np.ndarray:
        return np.einsum("tij,tji->t", self.states, self.states).real


def phase_evolve(spec: LabeledSpectrum, rho0: np.ndarray, times, extra_phase=None, damping=None):
    """Apply per-element factors in the eigenbasis of ``spec`` and rotate back.

    ``rho_nm(t) = exp(-i (E_n - E_m) t) * exp(-i extra_phase_nm(t)) * exp(-damping_nm(t)) rho_nm(0)``
    where the optional callables return ``(dim, dim)`` arrays.
    """
    times = np.asarray(times, dtype=float)
    rho_eig = spec.to_eigenbasis(rho0)
    e = spec.energies
    gap = e[:, None] - e[None, :]
    v = spec.vectors
    out = np.empty((len(times),) + rho0.shape, dtype=complex)
    for k, t in enumerate(times):
        exponent = -1j * gap * t
        if extra_phase is not None:
            exponent = exponent - 1j * extra_phase(k, t)
        if damping is not None:
            exponent = exponent - damping(k, t)
        out[k] = v @ (np.exp(exponent) * rho_eig) @ v.conj().T
    return Trajectory(times, out)


def local_effective_spectrum(basis: SpinBasis, params: CouplingParams, tol: float = 1e-10) -> LabeledSpectrum:
    """Labeled joint eigenbasis of ``H_s + H2``, after checking ``[H_s, H2] = 0``."""
    hs = build_hs(basis, params)
    h2 = build_h2(basis, params)
    res = max_abs(commutator(hs, h2))
    if res > tol * max(1.0, max_abs(hs)):
        raise ContractViolation(f"[H_s, H2] does not vanish (residual {res:.3e})")
    return labeled_spectrum(hs + h2, basis)


def check_markov_regime(params: CouplingParams) -> bool:
    """Warn when ``J* e^{-g^2} << omega`` is not met (heuristic ``g^2 > ln(100 J*/omega)``)."""
    ratio = params.model.j_star / params.omega
    ok = params.g**2 > math.log(100 * ratio)
    if not ok:
        warnings.warn(
            f"J* e^(-g^2) / omega = {ratio * math.exp(-params.g**2):.3g} is not small; "
            "the Markov time-scale separation is questionable",
            RegimeWarning,
            stacklevel=2,
        )
    return ok


def evolve_local_closed_form(rho0: np.ndarray, spec: LabeledSpectrum, times) -> Trajectory:
    """Phase-only evolution ``rho_nm(t) = e^{-i(E_n - E_m) t} rho_nm(0)``.

    ``spec`` must be the labeled spectrum of ``H_s + H2`` (see
    :func:`local_effective_spectrum`); the result is in the computational basis.
    """
    rho0 = validate_density_matrix(rho0)
    if rho0.shape[0] != spec.dimension:
        raise ArgumentError("rho0 and spectrum dimensions differ")
    return phase_evolve(spec, rho0, times)


def rk4_propagate(rhs, y0: np.ndarray, t_end: float, n_steps: int, n_samples: int, t0: float = 0.0):
    """Classical fixed-step RK4, sampling ``n_samples`` evenly spaced points including both ends.

    ``rhs(t, y)`` returns ``dy/dt``. ``n_steps`` must be a multiple of ``n_samples - 1``.
    """
    if n_samples < 2 or n_steps % (n_samples - 1):
        raise ArgumentError("n_steps must be a positive multiple of n_samples - 1")
    h = (t_end - t0) / n_steps
    stride = n_steps // (n_samples - 1)
    out = np.empty((n_samples,) + y0.shape, dtype=complex)
    y = y0.astype(complex)
    out[0] = y
    t = t0
    for step in range(1, n_steps + 1):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + step * h
        if step % stride == 0:
            out[step // stride] = y
    return np.linspace(t0, t_end, n_samples), out


def _step_count(t_end: float, dt: float, n_samples: int) -> int:
    intervals = n_samples - 1
    per_interval = max(1, math.ceil(t_end / (dt * intervals) - 1e-9))
    return per_interval * intervals


def evolve_local_tcl2_numeric(
    rho0: np.ndarray,
    basis: SpinBasis,
    params: CouplingParams,
    t_end: float,
    dt: float,
    n_samples: int = 101,
    h2: Optional[np.ndarray] = None,
    richardson_check: bool = True,
) -> Trajectory:
    """Integrate ``d rho~/dt = -i [H2, rho~]`` with RK4 and rotate back with ``e^{-i H_s t}``.

    ``dt`` is shrunk so that the step count is a multiple of ``n_samples - 1``.
    With ``richardson_check`` the run is repeated at half the step and
    :class:`AccuracyError` is raised if the two disagree by more than 1e-6.
    Passing ``h2`` overrides the second-order generator (e.g. zero).
    """
    rho0 = validate_density_matrix(rho0)
    if rho0.shape[0] != basis.dimension:
        raise ArgumentError("rho0 and basis dimensions differ")
    hs = build_hs(basis, params)
    h2 = build_h2(basis, params) if h2 is None else np.asarray(h2, dtype=complex)
    scale = float(np.max(np.abs(np.linalg.eigvalsh(h2)))) if h2.any() else 0.0
    if scale > 0 and dt > 0.01 / scale * (1 + 1e-12):
        raise AccuracyError(f"dt={dt} exceeds the step bound 0.01/max|E(H2)| = {0.01 / scale:.3g}")
    check_markov_regime(params)

    def rhs(_t, y):
        return -1j * (h2 @ y - y @ h2)

    n_steps = _step_count(t_end, dt, n_samples)
    times, tilde = rk4_propagate(rhs, rho0, t_end, n_steps, n_samples)
    if richardson_check:
        _, fine = rk4_propagate(rhs, rho0, t_end, 2 * n_steps, n_samples)
        err = max_abs(fine - tilde)
        if err > RICHARDSON_TOL:
            raise AccuracyError(f"step-halving check failed: deviation {err:.3e} > {RICHARDSON_TOL}")

    e_s, v_s = np.linalg.eigh(hs)
    states = np.empty_like(tilde)
    for k, t in enumerate(times):
        u = (v_s * np.exp(-1j * e_s * t)) @ v_s.conj().T
        states[k] = u @ tilde[k] @ u.conj().T
    return Trajectory(times, states)


def coherence_norms(traj: Trajectory, spec: LabeledSpectrum) -> np.ndarray:
    """``|rho_nm(t)|`` for all ``n < m`` in the eigenbasis, shape ``(n_times, d(d-1)/2)``.

    Columns follow ``numpy.triu_indices(d, 1)`` order.
    """
    if traj.states.shape[1] != spec.dimension:
        raise ArgumentError("trajectory and spectrum dimensions differ")
    rows, cols = np.triu_indices(spec.dimension, 1)
    return np.abs(traj.in_eigenbasis(spec)[:, rows, cols])
