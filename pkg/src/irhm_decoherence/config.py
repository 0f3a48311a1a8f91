"""Run configuration: an INI grammar parsed with :mod:`configparser`.

Every problem found in a file is collected into one :class:`ConfigError`.
Keys that are not part of the grammar are rejected with a close-match
suggestion. ``RunConfig.echo()`` renders the fully resolved configuration,
defaults included, so that a run can be reproduced from its output alone.

Grammar (sections and keys; ``*`` = required for the listed experiments)::

    [run]       experiment*
    [model]     n_sites*  j_star  delta
    [coupling]  g*  omega*
    [bath]      kind (single_mode | ohmic)  g  omega  lambda  omega_c  temperature
    [state]     preset  amplitudes  element
    [times]     t_end*  n_samples
    [local]     method (closed | numeric)  dt
    [polaron]   n_max  initial_frame (lf | original)
    [rvb]       cuts
    [output]    path
"""
from __future__ import annotations

import configparser
import difflib
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .dynamics_global import BathSpec
from .effective import CouplingParams
from .errors import ArgumentError
from .irhm import ModelParams

EXPERIMENTS = (
    "spectrum",
    "effective",
    "verify-appendix-a",
    "evolve-local",
    "evolve-global",
    "rvb",
    "polaron",
)

STATE_PRESETS = ("same_sector", "dsz1", "singlet_triplet")


class ConfigError(ValueError):
    """One or more problems in a run configuration."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))


def _positive(x):
    return x > 0


def _non_negative(x):
    return x >= 0


@dataclass(frozen=True)
class _Key:
    kind: Callable
    default: object = None
    check: Optional[Callable] = None
    rule: str = ""
    choices: Tuple[str, ...] = ()


_GRAMMAR: Dict[str, Dict[str, _Key]] = {
    "run": {"experiment": _Key(str, choices=EXPERIMENTS)},
    "model": {
        "n_sites": _Key(int, None, lambda n: n >= 2, ">= 2"),
        "j_star": _Key(float, 1.0, _positive, "> 0"),
        "delta": _Key(float, 1.0, _non_negative, ">= 0"),
    },
    "coupling": {
        "g": _Key(float, None, _non_negative, ">= 0"),
        "omega": _Key(float, None, _positive, "> 0"),
    },
    "bath": {
        "kind": _Key(str, "single_mode", choices=("single_mode", "ohmic")),
        "g": _Key(float, 1.0, _non_negative, ">= 0"),
        "omega": _Key(float, 1.0, _positive, "> 0"),
        "lambda": _Key(float, 0.5, _positive, "> 0"),
        "omega_c": _Key(float, 1.0, _positive, "> 0"),
        "temperature": _Key(float, 0.0, _non_negative, ">= 0"),
    },
    "state": {
        "preset": _Key(str, None, choices=STATE_PRESETS),
        "amplitudes": _Key(str, None),
        "element": _Key(str, None),
    },
    "times": {
        "t_end": _Key(float, None, _positive, "> 0"),
        "n_samples": _Key(int, 201, lambda n: n >= 2, ">= 2"),
    },
    "local": {
        "method": _Key(str, "closed", choices=("closed", "numeric")),
        "dt": _Key(float, None, _positive, "> 0"),
    },
    "polaron": {
        "n_max": _Key(int, None, lambda n: n >= 1, ">= 1"),
        "initial_frame": _Key(str, "lf", choices=("lf", "original")),
    },
    "rvb": {"cuts": _Key(str, None)},
    "output": {"path": _Key(str, None)},
}

# sections each experiment reads; required keys are those without defaults
_USES = {
    "spectrum": ("model",),
    "effective": ("model", "coupling"),
    "verify-appendix-a": ("model",),
    "evolve-local": ("model", "coupling", "state", "times", "local"),
    "evolve-global": ("model", "bath", "state", "times"),
    "rvb": ("model", "rvb"),
    "polaron": ("model", "coupling", "state", "times", "polaron"),
}
_OPTIONAL_SECTIONS = ("state", "local", "polaron", "rvb", "bath")
_OPTIONAL_KEYS = {("state", "preset"), ("state", "amplitudes"), ("state", "element"),
                  ("local", "dt"), ("polaron", "n_max"), ("rvb", "cuts"), ("output", "path")}


@dataclass(frozen=True)
class StateSpec:
    """Initial state: a named preset or explicit computational-basis amplitudes.

    ``element`` names the eigenbasis matrix element ``(n, m)`` to report.
    """

    preset: Optional[str] = None
    amplitudes: Optional[Tuple[complex, ...]] = None
    element: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    model: ModelParams
    coupling: Optional[CouplingParams] = None
    bath: Optional[BathSpec] = None
    state: StateSpec = field(default_factory=StateSpec)
    times: Optional[Tuple[float, int]] = None
    output_path: Optional[str] = None
    options: Dict[str, object] = field(default_factory=dict)
    resolved: Dict[str, Dict[str, object]] = field(default_factory=dict)

    def echo(self) -> str:
        """Resolved configuration as INI text (sorted, deterministic)."""
        lines = []
        for section in sorted(self.resolved):
            lines.append(f"[{section}]")
            for key in sorted(self.resolved[section]):
                value = self.resolved[section][key]
                lines.append(f"{key} = {_render(value)}")
        return "\n".join(lines)


def _render(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+.17g}j"
    if isinstance(value, (tuple, list)):
        return ", ".join(_render(v) for v in value)
    return str(value)


def _parse_complex_list(text: str) -> Tuple[complex, ...]:
    return tuple(complex(tok.strip().replace(" ", "")) for tok in text.split(",") if tok.strip())


def _parse_element(text: str) -> Tuple[int, int]:
    parts = [int(p) for p in text.replace(",", " ").split()]
    if len(parts) != 2 or min(parts) < 0:
        raise ValueError("need two non-negative indices")
    return parts[0], parts[1]


def parse_cuts(text: str) -> Tuple[Tuple[int, ...], ...]:
    """``"0 1; 0 2"`` -> ``((0, 1), (0, 2))``."""
    cuts = tuple(tuple(int(s) for s in chunk.replace(",", " ").split()) for chunk in text.split(";") if chunk.strip())
    if not cuts or any(not c for c in cuts):
        raise ValueError("empty cut")
    return cuts


def _suggest(name: str, options) -> str:
    close = difflib.get_close_matches(name, list(options), n=1, cutoff=0.6)
    return f" (did you mean {close[0]!r}?)" if close else ""


def parse_config(text: str, experiment: Optional[str] = None) -> RunConfig:
    """Parse and validate configuration text.

    Parameters
    ----------
    text : str
        INI-formatted configuration.
    experiment : str, optional
        Overrides (or supplies) ``[run] experiment``.

    Raises
    ------
    ConfigError
        Listing every problem found, not just the first.
    """
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    errors: List[str] = []
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"malformed configuration: {exc}"]) from None

    raw: Dict[str, Dict[str, str]] = {}
    for section in parser.sections():
        if section not in _GRAMMAR:
            errors.append(f"unknown section [{section}]{_suggest(section, _GRAMMAR)}")
            continue
        raw[section] = {}
        for key, value in parser.items(section):
            if key not in _GRAMMAR[section]:
                errors.append(f"unknown key {section}.{key}{_suggest(key, _GRAMMAR[section])}")
            else:
                raw[section][key] = value.strip()

    in_file = raw.get("run", {}).get("experiment")
    if experiment and in_file and experiment != in_file:
        errors.append(f"experiment {experiment!r} conflicts with run.experiment = {in_file!r}")
        raise ConfigError(errors)
    exp = experiment or in_file
    if exp is None:
        errors.append("missing required key run.experiment")
        raise ConfigError(errors)
    if exp not in EXPERIMENTS:
        errors.append(f"unknown experiment {exp!r}{_suggest(exp, EXPERIMENTS)}; choose from {', '.join(EXPERIMENTS)}")
        raise ConfigError(errors)

    values: Dict[str, Dict[str, object]] = {}
    for section in _USES[exp] + ("output",):
        spec = _GRAMMAR[section]
        given = raw.get(section, {})
        if section not in raw and section not in _OPTIONAL_SECTIONS and section != "output":
            if any(k.default is None and (section, name) not in _OPTIONAL_KEYS for name, k in spec.items()):
                errors.append(f"missing required section [{section}] for experiment {exp!r}")
                continue
        out: Dict[str, object] = {}
        for name, key in spec.items():
            if name not in given:
                if key.default is None and (section, name) not in _OPTIONAL_KEYS:
                    errors.append(f"missing required key {section}.{name}")
                elif key.default is not None:
                    out[name] = key.default
                continue
            text_value = given[name]
            if key.choices:
                if text_value not in key.choices:
                    errors.append(
                        f"{section}.{name} = {text_value!r} is not one of {', '.join(key.choices)}"
                        f"{_suggest(text_value, key.choices)}"
                    )
                    continue
                out[name] = text_value
                continue
            try:
                value = key.kind(text_value)
            except ValueError:
                errors.append(f"{section}.{name} = {text_value!r} is not a valid {key.kind.__name__}")
                continue
            if key.kind is float and not math.isfinite(value):
                errors.append(f"{section}.{name} must be finite")
                continue
            if key.check is not None and not key.check(value):
                errors.append(f"{section}.{name} = {text_value} is out of range (must be {key.rule})")
                continue
            out[name] = value
        values[section] = out

    state = StateSpec()
    if "state" in values:
        st = values["state"]
        amps = elem = None
        if "amplitudes" in st:
            try:
                amps = _parse_complex_list(st["amplitudes"])
                st["amplitudes"] = amps
            except ValueError:
                errors.append("state.amplitudes must be a comma-separated list of complex numbers")
        if "element" in st:
            try:
                elem = _parse_element(st["element"])
                st["element"] = elem
            except ValueError:
                errors.append("state.element must be two non-negative eigenbasis indices, e.g. '0, 1'")
        if "preset" in st and amps is not None:
            errors.append("state.preset and state.amplitudes are mutually exclusive")
        if "preset" not in st and amps is None:
            if exp == "polaron":
                st["preset"] = "singlet_triplet"
            else:
                errors.append("state needs either state.preset or state.amplitudes")
        if amps is not None and elem is None and exp != "polaron":
            errors.append("state.amplitudes requires state.element")
        state = StateSpec(st.get("preset"), amps, elem)
    if "rvb" in values and "cuts" in values["rvb"]:
        try:
            values["rvb"]["cuts"] = parse_cuts(values["rvb"]["cuts"])
        except ValueError:
            errors.append("rvb.cuts must look like '0 1; 0 2'")

    model = coupling = bath = None
    m = values.get("model", {})
    if {"n_sites", "j_star", "delta"} <= m.keys():
        try:
            model = ModelParams(m["j_star"], m["delta"], m["n_sites"])
        except ArgumentError as exc:
            errors.append(f"model: {exc}")
    if model is not None:
        n = model.n_sites
        if exp == "verify-appendix-a" and n < 3:
            errors.append("model.n_sites must be >= 3 for verify-appendix-a")
        if exp == "rvb" and n not in (4, 6):
            errors.append("model.n_sites must be 4 or 6 for rvb")
        if exp == "polaron" and n != 2:
            errors.append("model.n_sites must be 2 for polaron")
        if n > 12:
            errors.append("model.n_sites must be <= 12")
        if state.amplitudes is not None and len(state.amplitudes) != 2**n:
            errors.append(f"state.amplitudes has {len(state.amplitudes)} entries, expected 2^{n} = {2 ** n}")
        if state.preset == "singlet_triplet" and n != 2:
            errors.append("state.preset = singlet_triplet needs model.n_sites = 2")
        if state.element is not None and max(state.element) >= 2**n:
            errors.append(f"state.element indices must be < {2 ** n}")
        if "cuts" in values.get("rvb", {}):
            for cut in values["rvb"]["cuts"]:
                if len(set(cut)) != len(cut) or not all(0 <= s < n for s in cut):
                    errors.append(f"rvb.cuts entry {cut} must list distinct sites in 0..{n - 1}")
    c = values.get("coupling", {})
    if model is not None and {"g", "omega"} <= c.keys():
        coupling = CouplingParams(c["g"], c["omega"], model)
        if exp in ("effective", "evolve-local") and coupling.g == 0:
            errors.append("coupling.g must be > 0 for this experiment")
    b = values.get("bath")
    if b is not None and not errors:
        if b["kind"] == "single_mode":
            bath = BathSpec.single_mode(b["g"], b["omega"], b["temperature"])
            resolved_bath = {k: b[k] for k in ("kind", "g", "omega", "temperature")}
        else:
            bath = BathSpec.ohmic(b["lambda"], b["omega_c"], b["temperature"])
            resolved_bath = {k: b[k] for k in ("kind", "lambda", "omega_c", "temperature")}
        values["bath"] = resolved_bath

    if errors:
        raise ConfigError(errors)

    times = None
    if "times" in values:
        times = (values["times"]["t_end"], values["times"]["n_samples"])
    options = {}
    for section in ("local", "polaron", "rvb"):
        options.update(values.get(section, {}))
    resolved = {"run": {"experiment": exp}}
    resolved.update({k: v for k, v in values.items() if v})
    return RunConfig(
        experiment=exp,
        model=model,
        coupling=coupling,
        bath=bath,
        state=state,
        times=times,
        output_path=values.get("output", {}).get("path"),
        options=options,
        resolved=resolved,
    )
