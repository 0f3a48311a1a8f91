"""Decoherence of infinite-range Heisenberg spin systems coupled to optical phonons.

Exact-diagonalization tools for the infinite-range Heisenberg model (IRHM)
and its Lang-Firsov effective Hamiltonians. Dephasing by local and global
phonons is modelled in closed form and checked numerically.
"""
__version__ = "0.1.0"

from .errors import AccuracyError, ArgumentError, ContractViolation
from .hilbert import SectorLabel, SpinBasis, build_hcb_operator, build_spin_operator, sector_projector
from .irhm import (
    LabeledSpectrum,
    ModelParams,
    build_hirhm,
    build_hirhm_global_form,
    closed_form_energy,
    labeled_spectrum,
)
from .effective import (
    CouplingParams,
    ThirdOrderCoefficients,
    appendix_a_identity,
    build_h2,
    build_h3,
    build_hs,
    build_spin_form_heff,
    f1,
    f2,
    second_order_couplings,
)
from .dynamics_local import evolve_local_closed_form, evolve_local_tcl2_numeric, local_effective_spectrum
from .dynamics_global import (
    BathSpec,
    cross_check_master_equation,
    evolve_global_closed_form,
    evolve_global_master_equation,
    memory_kernels,
)
from .rvb import build_rvb4, build_rvb6, build_vb_state, entanglement_entropy
from .polaron_frame import BosonFockSpace, build_total_hamiltonian, lf_frame_operator, original_frame_coherence
from .config import ConfigError, RunConfig, parse_config
