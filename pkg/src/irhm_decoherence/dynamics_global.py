"""Non-Markovian dephasing of the IRHM by a global phonon bath.

All spins couple through ``L = S_T^z``. The bath enters through
``alpha(tau) = eta(tau) + i nu(tau)`` and its integrals
``F(t) = int_0^t alpha``, ``X = int_0^t Re F`` and ``Y = int_0^t Im F``.

For a continuum bath the mode sum ``sum_k |g_k|^2 omega_k^2 (...)`` is replaced
by the Ohmic weight ``int d omega  lambda omega exp(-omega / omega_c) (...)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .dynamics_local import Trajectory, phase_evolve, rk4_propagate, validate_density_matrix
from .errors import AccuracyError, ArgumentError, ContractViolation
from .hilbert import SpinBasis, commutator, max_abs, total_sz
from .irhm import LabeledSpectrum, ModelParams, build_hirhm

KERNEL_TOL = 1e-9
MAX_REFINE = 64


class ModelMismatchWarning(UserWarning):
    """Integrated master equation and closed-form solution disagree."""


@dataclass(frozen=True)
class BathSpec:
    """Phonon environment: discrete modes or an Ohmic continuum, at temperature ``k_B T``."""

    kind: str
    modes: Tuple[Tuple[complex, float], ...] = ()
    ohmic_lambda: float = 0.0
    omega_c: float = 0.0
    temperature: float = 0.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ArgumentError(f"temperature must be >= 0, got {self.temperature}")
        if self.kind == "discrete_modes":
            if not self.modes:
                raise ArgumentError("a discrete bath needs at least one mode")
            for _, w in self.modes:
                if not w > 0:
                    raise ArgumentError(f"mode frequency must be > 0, got {w}")
        elif self.kind == "ohmic":
            if not self.ohmic_lambda > 0 or not self.omega_c > 0:
                raise ArgumentError("ohmic bath needs lambda > 0 and omega_c > 0")
        else:
            raise ArgumentError(f"unknown bath kind {self.kind!r}")

    @classmethod
    def single_mode(cls, g: complex = 1.0, omega: float = 1.0, temperature: float = 0.0):
        return cls("discrete_modes", modes=((complex(g), float(omega)),), temperature=temperature)

    @classmethod
    def discrete(cls, couplings: Sequence[complex], frequencies: Sequence[float], temperature: float = 0.0):
        if len(couplings) != len(frequencies):
            raise ArgumentError("couplings and frequencies differ in length")
        modes = tuple((complex(g), float(w)) for g, w in zip(couplings, frequencies))
        return cls("discrete_modes", modes=modes, temperature=temperature)

    @classmethod
    def ohmic(cls, ohmic_lambda: float, omega_c: float, temperature: float = 0.0):
        return cls("ohmic", ohmic_lambda=ohmic_lambda, omega_c=omega_c, temperature=temperature)


def thermal_factor(omega, temperature: float):
    """``coth(omega / 2 k_B T)``, equal to 1 at zero temperature."""
    omega = np.asarray(omega, dtype=float)
    if temperature == 0:
        return np.ones_like(omega)
    return 1.0 / np.tanh(omega / (2 * temperature))


def _ohmic_weight_times_coth(w, bath: BathSpec):
    # lambda w e^{-w/wc} coth(w/2T); finite limit 2 T lambda at w -> 0
    if bath.temperature == 0:
        return bath.ohmic_lambda * w * math.exp(-w / bath.omega_c)
    if w < 1e-12:
        return 2 * bath.temperature * bath.ohmic_lambda
    return bath.ohmic_lambda * w * math.exp(-w / bath.omega_c) / math.tanh(w / (2 * bath.temperature))


def _ohmic_cutoff(bath: BathSpec) -> float:
    # exp(-60) ~ 1e-26: the spectral weight is negligible beyond this frequency
    return 60.0 * bath.omega_c


def _ohmic_integral(func, tau: float, weight: str, upper: float, scale: float):
    """``int_0^upper func(w) cos|sin(w tau) dw`` by adaptive (QAWO) quadrature."""
    tol = dict(limit=400, epsabs=1e-13 * scale, epsrel=1e-11)
    if tau == 0:
        if weight == "sin":
            return 0.0
        val, _ = integrate.quad(func, 0, upper, **tol)
    else:
        val, _ = integrate.quad(func, 0, upper, weight=weight, wvar=tau, **tol)
    if not np.isfinite(val):
        raise AccuracyError("ohmic quadrature did not converge")
    return val


def bath_correlation(bath: BathSpec, tau: float) -> complex:
    """Bath correlation ``alpha(tau) = eta(tau) + i nu(tau)`` for ``tau >= 0``."""
    if tau < 0:
        raise ArgumentError(f"tau must be >= 0, got {tau}")
    if bath.kind == "discrete_modes":
        g2 = np.array([abs(g) ** 2 for g, _ in bath.modes])
        w = np.array([w for _, w in bath.modes])
        weight = g2 * w**2
        eta = np.sum(weight * thermal_factor(w, bath.temperature) * np.cos(w * tau))
        nu = -np.sum(weight * np.sin(w * tau))
        return complex(eta, nu)
    upper = _ohmic_cutoff(bath)
    scale = bath.ohmic_lambda * bath.omega_c**2
    eta = _ohmic_integral(lambda w: _ohmic_weight_times_coth(w, bath), tau, "cos", upper, scale)
    nu = -_ohmic_integral(
        lambda w: bath.ohmic_lambda * w * math.exp(-w / bath.omega_c), tau, "sin", upper, scale
    )
    return complex(eta, nu)


def memory_function(bath: BathSpec, t: float) -> complex:
    """``F(t) = int_0^t alpha(s) ds`` evaluated independently of the kernel grid.

    Discrete modes use the antiderivative; Ohmic baths integrate the spectral
    weight against ``sin(w t)/w`` and ``(1 - cos(w t))/w`` directly.
    """
    if t < 0:
        raise ArgumentError("t must be >= 0")
    if bath.kind == "discrete_modes":
        total = 0j
        for g, w in bath.modes:
            c = abs(g) ** 2 * w
            total += c * (thermal_factor(w, bath.temperature) * math.sin(w * t) - 1j * (1 - math.cos(w * t)))
        return complex(total)
    if t == 0:
        return 0j

    def re_part(w):
        return _ohmic_weight_times_coth(w, bath) * (np.sinc(w * t / np.pi) * t)

    def im_part(w):
        s = math.sin(w * t / 2)
        return -bath.ohmic_lambda * w * math.exp(-w / bath.omega_c) * (2 * s * s / w if w > 0 else 0.0)

    upper = _ohmic_cutoff(bath)
    tol = dict(limit=800, epsabs=1e-13 * bath.ohmic_lambda * bath.omega_c, epsrel=1e-11)
    re, _ = integrate.quad(re_part, 0, upper, **tol)
    im, _ = integrate.quad(im_part, 0, upper, **tol)
    return complex(re, im)


@dataclass(frozen=True)
class MemoryKernels:
    """``F``, ``X`` and ``Y`` sampled on a uniform time grid starting at 0."""

    times: np.ndarray
    f_real: np.ndarray
    f_imag: np.ndarray
    x: np.ndarray
    y: np.ndarray
    refinement: int = field(default=1)

    def index_of(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        spacing = self.times[1] - self.times[0] if len(self.times) > 1 else 1.0
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t), spacing):
            raise ArgumentError(f"time {t} is not on the kernel grid")
        return k


def _cumulative_simpson(values: np.ndarray, h: float) -> np.ndarray:
    return integrate.cumulative_simpson(values, dx=h, initial=0.0)


def _integrate_kernels(alpha: np.ndarray, h: float):
    f = _cumulative_simpson(alpha.real, h) + 1j * _cumulative_simpson(alpha.imag, h)
    return f, _cumulative_simpson(f.real, h), _cumulative_simpson(f.imag, h)


def memory_kernels(bath: BathSpec, t_end: float, n_grid: int) -> MemoryKernels:
    """Tabulate ``F``, ``X``, ``Y`` on ``n_grid`` uniform points over ``[0, t_end]``.

    Composite Simpson quadrature on a sub-grid that is doubled until ``X`` and
    ``Y`` change by less than 1e-9 (relative to ``max(1, |X|, |Y|)``) at the
    output points.

    Raises
    ------
    AccuracyError
        If the refinement factor would exceed 64 without converging.
    """
    if n_grid < 100:
        raise ArgumentError(f"n_grid must be >= 100, got {n_grid}")
    if not t_end > 0:
        raise ArgumentError("t_end must be > 0")

    def corr(ts):
        return np.array([bath_correlation(bath, tau) for tau in ts])

    factor = 1
    fine_t = np.linspace(0.0, t_end, n_grid)
    alpha = corr(fine_t)
    prev = _integrate_kernels(alpha, fine_t[1])
    while True:
        factor *= 2
        fine_t = np.linspace(0.0, t_end, (n_grid - 1) * factor + 1)
        refined = np.empty(len(fine_t), dtype=complex)
        refined[::2] = alpha
        refined[1::2] = corr(fine_t[1::2])
        alpha = refined
        f, x, y = (a[::factor] for a in _integrate_kernels(alpha, fine_t[1]))
        scale = max(1.0, float(np.max(np.abs(x))), float(np.max(np.abs(y))))
        diff = max(max_abs(x - prev[1]), max_abs(y - prev[2]))
        if diff <= KERNEL_TOL * scale:
            break
        if factor >= MAX_REFINE:
            raise AccuracyError(f"memory kernels did not converge (change {diff:.3e} at x{factor})")
        prev = (f, x, y)
    times = np.linspace(0.0, t_end, n_grid)
    return MemoryKernels(times, f.real.copy(), f.imag.copy(), x, y, refinement=factor)


def single_mode_kernels_exact(g: complex, omega: float, times) -> Tuple[np.ndarray, np.ndarray]:
    """Zero-temperature single-mode ``X(t) = |g|^2 (1 - cos wt)``, ``Y(t) = -|g|^2 (wt - sin wt)``."""
    times = np.asarray(times, dtype=float)
    g2 = abs(g) ** 2
    return g2 * (1 - np.cos(omega * times)), -g2 * (omega * times - np.sin(omega * times))


def _require_sz_labels(spec: LabeledSpectrum, basis_dim: int):
    if spec.sz_total is None or len(spec.sz_total) != spec.dimension or spec.dimension != basis_dim:
        raise ContractViolation("spectrum must carry an S_T^z label for every eigenvector")


def evolve_global_closed_form(
    rho0: np.ndarray, spec: LabeledSpectrum, kernels: MemoryKernels, times
) -> Trajectory:
    """Closed-form global-bath evolution in the labeled eigenbasis of ``H_IRHM``.

    ``rho_nm(t) = exp(-i[(E_n - E_m) t + (m_n^2 - m_m^2) Y(t)]) exp(-(m_n - m_m)^2 X(t)) rho_nm(0)``
    with ``m`` the ``S_T^z`` labels. ``times`` must lie on the kernel grid.
    """
    rho0 = validate_density_matrix(rho0)
    _require_sz_labels(spec, rho0.shape[0])
    times = np.asarray(times, dtype=float)
    idx = [kernels.index_of(t) for t in times]
    m = np.asarray(spec.sz_total, dtype=float)
    sq_diff = m[:, None] ** 2 - m[None, :] ** 2
    dist = (m[:, None] - m[None, :]) ** 2
    return phase_evolve(
        spec,
        rho0,
        times,
        extra_phase=lambda k, _t: sq_diff * kernels.y[idx[k]],
        damping=lambda k, _t: dist * kernels.x[idx[k]],
    )


def l_operator_check(basis: SpinBasis, params: ModelParams) -> float:
    """``|[S_T^z, H_IRHM]|_max``; the coupling operator must commute with the system."""
    return max_abs(commutator(total_sz(basis), build_hirhm(basis, params)))


def evolve_global_master_equation(
    rho0: np.ndarray,
    h_s: np.ndarray,
    coupling: np.ndarray,
    memory: Callable[[float], complex],
    t_end: float,
    dt: float,
    n_samples: int = 101,
) -> Trajectory:
    """RK4 integration of ``d rho/dt = -i[H, rho] + F(t)[L rho, L] + F*(t)[L, rho L]``."""
    rho0 = validate_density_matrix(rho0)
    lop = coupling

    def rhs(t, r):
        f = memory(t)
        lr = lop @ r
        rl = r @ lop
        return (
            -1j * (h_s @ r - r @ h_s)
            + f * (lr @ lop - lop @ lr)
            + np.conj(f) * (lop @ rl - rl @ lop)
        )

    intervals = n_samples - 1
    n_steps = max(1, math.ceil(t_end / (dt * intervals) - 1e-9)) * intervals
    times, states = rk4_propagate(rhs, rho0, t_end, n_steps, n_samples)
    return Trajectory(times, states)


@dataclass(frozen=True)
class CrossCheck:
    """Outcome of comparing the integrated master equation with the closed form."""

    max_deviation: float
    tolerance: float
    times: np.ndarray
    deviations: np.ndarray

    @property
    def consistent(self) -> bool:
        return self.max_deviation <= self.tolerance


def cross_check_master_equation(
    rho0: np.ndarray,
    basis: SpinBasis,
    params: ModelParams,
    spec: LabeledSpectrum,
    bath: BathSpec,
    t_end: float = 20.0,
    dt: float = 1e-3,
    n_samples: int = 201,
    tol: float = 1e-6,
) -> CrossCheck:
    """Integrate the master equation and compare with :func:`evolve_global_closed_form`.

    A deviation above ``tol`` emits :class:`ModelMismatchWarning`; neither
    result is silently preferred.
    """
    h = build_hirhm(basis, params)
    numeric = evolve_global_master_equation(
        rho0, h, total_sz(basis), lambda t: memory_function(bath, t), t_end, dt, n_samples
    )
    # the kernel grid must contain the sample times
    per = 10
    kernels = memory_kernels(bath, t_end, max(100, (n_samples - 1) * per + 1))
    closed = evolve_global_closed_form(rho0, spec, kernels, numeric.times)
    dev = np.max(np.abs(numeric.states - closed.states), axis=(1, 2))
    result = CrossCheck(float(dev.max()), tol, numeric.times, dev)
    if not result.consistent:
        warnings.warn(
            f"master-equation integration deviates from the closed form by {result.max_deviation:.3e} "
            f"(> {tol}); operator ordering or sign conventions disagree",
            ModelMismatchWarning,
            stacklevel=2,
        )
    return result
