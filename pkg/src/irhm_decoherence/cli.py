"""Command-line runner: ``irhm-deco <experiment> --config <path> [--out <path>]``.

Each experiment writes one CSV table preceded by a ``#`` metadata block. The
block echoes the resolved configuration along with version and tolerance
metadata. Floats are printed with 17 significant digits and nothing
time-dependent is written, so identical inputs give byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 accuracy error, 4 contract
violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import os
import sys
import warnings
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, parse_config
from .dynamics_global import KERNEL_TOL, memory_kernels, evolve_global_closed_form
from .dynamics_local import (
    RICHARDSON_TOL,
    evolve_local_closed_form,
    evolve_local_tcl2_numeric,
    local_effective_spectrum,
    pure_state,
)
from .effective import (
    IDENTITIES,
    appendix_a_identity,
    build_h2,
    build_hs,
    f1,
    f2,
    hopping_excitation_gap,
    second_order_couplings,
    spin_form_couplings,
    valid_site_pairs,
)
from .errors import AccuracyError, ArgumentError, ContractViolation
from .hilbert import commutator, max_abs, total_s_squared, total_sz
from .irhm import LabeledSpectrum, build_hirhm, closed_form_energy, labeled_spectrum, spectrum_residuals
from .polaron_frame import LEAK_TOL, SINGLET, TRIPLET0, BosonFockSpace, original_frame_coherence
from .rvb import build_rvb4, build_rvb6, entanglement_entropy

EXIT_OK, EXIT_CONFIG, EXIT_ACCURACY, EXIT_CONTRACT = 0, 2, 3, 4

Table = Tuple[List[str], List[Sequence], Dict[str, float]]


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def format_csv(config: RunConfig, header: List[str], rows: List[Sequence], tolerances: Dict[str, float]) -> str:
    """Render the metadata block and the table."""
    buf = io.StringIO()
    buf.write(f"# irhm-deco {__version__}\n")
    buf.write(f"# experiment: {config.experiment}\n")
    buf.write("# config:\n")
    for line in config.echo().splitlines():
        buf.write(f"#   {line}\n")
    buf.write("# tolerances:\n")
    for key in sorted(tolerances):
        buf.write(f"#   {key} = {_fmt(float(tolerances[key]))}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# --------------------------------------------------------------------------- #
#                               initial states                                #
# --------------------------------------------------------------------------- #


def _lowest_in_sector(spec: LabeledSpectrum, sz: float) -> int:
    hits = [k for k in range(spec.dimension) if abs(spec.sz_total[k] - sz) < 1e-9]
    if not hits:
        raise ArgumentError(f"sector S_z = {sz} is empty")
    return hits[0]


def resolve_state(config: RunConfig, spec: LabeledSpectrum) -> Tuple[np.ndarray, Tuple[int, int]]:
    """Initial density matrix and the eigenbasis element ``(n, m)`` to report."""
    st = config.state
    n_sites = config.model.n_sites
    sz0 = 0.5 * (n_sites % 2)
    if st.amplitudes is not None:
        psi = np.asarray(st.amplitudes, dtype=complex)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ArgumentError("state.amplitudes is the zero vector")
        return pure_state(psi / norm), st.element
    if st.preset == "singlet_triplet":
        psi = (SINGLET + 1j * TRIPLET0) / np.sqrt(2)
        n = int(np.argmax(np.abs(spec.vectors.conj().T @ SINGLET)))
        m = int(np.argmax(np.abs(spec.vectors.conj().T @ TRIPLET0)))
        return pure_state(psi), st.element or (n, m)
    if st.preset == "same_sector":
        n = _lowest_in_sector(spec, sz0)
        gap = 1e-9 * max(1.0, float(np.max(np.abs(spec.energies))))
        distinct = [
            k for k in range(spec.dimension)
            if abs(spec.sz_total[k] - sz0) < 1e-9 and abs(spec.energies[k] - spec.energies[n]) > gap
        ]
        if not distinct:
            raise ArgumentError(f"sector S_z = {sz0} has a single energy level")
        m = distinct[0]
    elif st.preset == "dsz1":
        n, m = _lowest_in_sector(spec, sz0), _lowest_in_sector(spec, sz0 + 1)
    else:  # pragma: no cover - rejected by parse_config
        raise ArgumentError(f"unknown preset {st.preset!r}")
    psi = (spec.vectors[:, n] + spec.vectors[:, m]) / np.sqrt(2)
    return pure_state(psi), st.element or (n, m)


def _time_grid(config: RunConfig) -> np.ndarray:
    t_end, n_samples = config.times
    return np.linspace(0.0, t_end, n_samples)


# --------------------------------------------------------------------------- #
#                                 experiments                                 #
# --------------------------------------------------------------------------- #


def _run_spectrum(config: RunConfig) -> Table:
    params = config.model
    basis = params.basis()
    spec = labeled_spectrum(build_hirhm(basis, params), basis)
    res = spectrum_residuals(spec, params)
    rows = []
    for k in range(spec.dimension):
        s, m = spec.s_total[k], spec.sz_total[k]
        rows.append((k, spec.energies[k], s, m, closed_form_energy(params, s, m), res[k]))
    header = ["index", "energy", "s_total", "sz_total", "closed_form", "residual"]
    return header, rows, {"label_tol": 1e-10}


def _run_effective(config: RunConfig) -> Table:
    cp = config.coupling
    params = config.model
    basis = params.basis()
    cp.check_regime()
    j_perp, j_par = second_order_couplings(cp)
    j_tr, j_lng, shift = spin_form_couplings(cp)
    h_irhm = build_hirhm(basis, params)
    rows = [
        ("polaron_factor", cp.polaron_factor),
        ("f1", f1(cp.g)),
        ("f2", f2(cp.g)),
        ("j_perp2", j_perp),
        ("j_par2", j_par),
        ("j_tr", j_tr),
        ("j_lng", j_lng),
        ("constant_shift", shift),
        ("hopping_gap", hopping_excitation_gap(basis, cp)),
        ("comm_hs_hirhm", max_abs(commutator(build_hs(basis, cp), h_irhm))),
        ("comm_h2_hirhm", max_abs(commutator(build_h2(basis, cp), h_irhm))),
    ]
    return ["quantity", "value"], rows, {"series_rtol": 1e-15}


def _run_appendix(config: RunConfig) -> Table:
    basis = config.model.basis()
    rows = []
    for name in IDENTITIES:
        worst = (-1.0, None)
        for l, i in valid_site_pairs(basis, name):
            res = appendix_a_identity(basis, name, l, i)[2]
            if res > worst[0]:
                worst = (res, (l, i))
        rows.append((name, worst[1][0], worst[1][1], worst[0]))
    return ["identity", "l", "i", "residual"], rows, {"identity_tol": 1e-12}


def _element_rows(times, traj, spec, element):
    n, m = element
    values = traj.in_eigenbasis(spec)[:, n, m]
    return [(t, v.real, v.imag, abs(v)) for t, v in zip(times, values)]


def _run_local(config: RunConfig) -> Table:
    cp = config.coupling
    basis = config.model.basis()
    spec = local_effective_spectrum(basis, cp)
    rho0, element = resolve_state(config, spec)
    t_end, n_samples = config.times
    tol = {"label_tol": 1e-10}
    if config.options.get("method", "closed") == "numeric":
        h2 = build_h2(basis, cp)
        scale = float(np.max(np.abs(np.linalg.eigvalsh(h2))))
        dt = config.options.get("dt") or min(0.05, 0.01 / scale if scale > 0 else 0.05)
        traj = evolve_local_tcl2_numeric(rho0, basis, cp, t_end, dt, n_samples, h2=h2)
        tol["richardson_tol"] = RICHARDSON_TOL
        tol["dt"] = dt
    else:
        traj = evolve_local_closed_form(rho0, spec, _time_grid(config))
    return ["t", "re", "im", "abs"], _element_rows(traj.times, traj, spec, element), tol


def _run_global(config: RunConfig) -> Table:
    params = config.model
    basis = params.basis()
    spec = labeled_spectrum(build_hirhm(basis, params), basis)
    rho0, element = resolve_state(config, spec)
    t_end, n_samples = config.times
    stride = -(-99 // (n_samples - 1))
    kernels = memory_kernels(config.bath, t_end, (n_samples - 1) * stride + 1)
    times = kernels.times[::stride]
    traj = evolve_global_closed_form(rho0, spec, kernels, times)
    return ["t", "re", "im", "abs"], _element_rows(times, traj, spec, element), {"kernel_tol": KERNEL_TOL}


def _run_rvb(config: RunConfig) -> Table:
    n = config.model.n_sites
    basis = config.model.basis()
    psi = build_rvb4(basis) if n == 4 else build_rvb6(basis)
    cuts = config.options.get("cuts") or tuple(
        (0,) + rest for rest in itertools.combinations(range(1, n), n // 2 - 1)
    )
    rows = [(" ".join(str(s) for s in cut), entanglement_entropy(psi, cut)) for cut in cuts]
    tol = {
        "s_squared_residual": max_abs(total_s_squared(basis) @ psi),
        "sz_residual": max_abs(total_sz(basis) @ psi),
    }
    return ["part_a", "entropy_bits"], rows, tol


def _run_polaron(config: RunConfig) -> Table:
    cp = config.coupling
    n_max = config.options.get("n_max")
    fock = BosonFockSpace(n_max) if n_max else BosonFockSpace.for_coupling(cp.g)
    st = config.state
    if st.amplitudes is not None:
        psi = np.asarray(st.amplitudes, dtype=complex)
        psi = psi / np.linalg.norm(psi)
    else:
        psi = (SINGLET + 1j * TRIPLET0) / np.sqrt(2)
    series = original_frame_coherence(
        cp, fock, pure_state(psi), _time_grid(config), initial_frame=config.options.get("initial_frame", "lf")
    )
    rows = [
        (t, d.real, d.imag, abs(d), b.real, b.imag, abs(b), p, e)
        for t, d, b, p, e in zip(series.times, series.dressed, series.bare, series.top_level_population, series.energy)
    ]
    header = ["t", "dressed_re", "dressed_im", "dressed_abs", "bare_re", "bare_im", "bare_abs",
              "top_level_population", "energy"]
    return header, rows, {"leak_tol": LEAK_TOL, "n_max": float(fock.n_max)}


_RUNNERS = {
    "spectrum": _run_spectrum,
    "effective": _run_effective,
    "verify-appendix-a": _run_appendix,
    "evolve-local": _run_local,
    "evolve-global": _run_global,
    "rvb": _run_rvb,
    "polaron": _run_polaron,
}


def render(config: RunConfig) -> str:
    """Run the experiment and return the CSV text."""
    header, rows, tol = _RUNNERS[config.experiment](config)
    return format_csv(config, header, rows, tol)


def run(config: RunConfig, out_path: Optional[str] = None, stderr=None) -> int:
    """Execute ``config`` and write its CSV; returns the process exit status."""
    stderr = stderr or sys.stderr
    try:
        text = render(config)
    except (ArgumentError, ConfigError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (AccuracyError, OverflowError) as exc:
        print(f"accuracy error: {exc}", file=stderr)
        return EXIT_ACCURACY
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=stderr)
        return EXIT_CONTRACT
    path = out_path or config.output_path
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _thread_limit() -> Optional[int]:
    value = os.environ.get("IRHM_THREADS")
    if value is None or value.strip() == "":
        return None
    n = int(value)
    if n < 1:
        raise ValueError
    return n


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="irhm-deco", description=__doc__.splitlines()[0])
    parser.add_argument("experiment", choices=sorted(_RUNNERS))
    parser.add_argument("--config", required=True, help="INI configuration file")
    parser.add_argument("--out", help="output CSV path (default: output.path or stdout)")
    args = parser.parse_args(argv)
    try:
        threads = _thread_limit()
    except ValueError:
        print("error: IRHM_THREADS must be a positive integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = parse_config(text, experiment=args.experiment)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    warnings.simplefilter("default")
    if threads is None:
        return run(config, args.out)
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=threads):
        return run(config, args.out)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
