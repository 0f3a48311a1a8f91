import subprocess
import sys
import textwrap

import numpy as np
import pytest

from irhm_decoherence.cli import main, render, run
from irhm_decoherence.config import ConfigError, parse_config


def ini(text):
    return textwrap.dedent(text).strip() + "\n"


SPECTRUM = ini(
    """
    [run]
    experiment = spectrum
    [model]
    n_sites = 4
    j_star = 1
    delta = 1
    """
)


def table(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    return header, [l.split(",") for l in lines[1:]]


def test_minimal_spectrum_config_is_valid():
    cfg = parse_config(SPECTRUM)
    assert cfg.experiment == "spectrum"
    assert cfg.model.n_sites == 4 and cfg.model.j_star == 1.0


def test_errors_are_collected_with_suggestions():
    text = ini(
        """
        [run]
        experiment = effective
        [model]
        n_sites = 4
        jstarr = 1
        [coupling]
        g = 2
        omega = -1
        """
    )
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    errors = info.value.errors
    assert any("jstarr" in e and "'j_star'" in e for e in errors)
    assert any("coupling.omega" in e for e in errors)
    assert len(errors) == 2


def test_unknown_experiment_and_missing_keys():
    with pytest.raises(ConfigError, match="did you mean 'spectrum'"):
        parse_config("[run]\nexperiment = spectra\n")
    with pytest.raises(ConfigError, match="missing required key model.n_sites"):
        parse_config("[run]\nexperiment = spectrum\n[model]\nj_star = 1\n")
    with pytest.raises(ConfigError, match="times"):
        parse_config("[run]\nexperiment = evolve-global\n[model]\nn_sites = 2\n[state]\npreset = dsz1\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(SPECTRUM + "[modle]\nx = 1\n")
    with pytest.raises(ConfigError, match="conflicts"):
        parse_config(SPECTRUM, experiment="rvb")


def test_state_rules():
    base = "[run]\nexperiment = evolve-global\n[model]\nn_sites = 2\n[times]\nt_end = 1\n"
    with pytest.raises(ConfigError, match="requires state.element"):
        parse_config(base + "[state]\namplitudes = 1, 0, 0, 0\n")
    with pytest.raises(ConfigError, match="expected 2"):
        parse_config(base + "[state]\namplitudes = 1, 0\nelement = 0 1\n")
    cfg = parse_config(base + "[state]\namplitudes = 1, 0, 1j, 0\nelement = 0, 1\n")
    assert cfg.state.amplitudes == (1, 0, 1j, 0) and cfg.state.element == (0, 1)


def test_spectrum_two_sites():
    cfg = parse_config(SPECTRUM.replace("n_sites = 4", "n_sites = 2"))
    header, rows = table(render(cfg))
    assert header == ["index", "energy", "s_total", "sz_total", "closed_form", "residual"]
    energies = sorted(float(r[1]) for r in rows)
    np.testing.assert_allclose(energies, [-0.75, 0.25, 0.25, 0.25], atol=1e-14)


def test_verify_appendix_rows():
    cfg = parse_config("[run]\nexperiment = verify-appendix-a\n[model]\nn_sites = 4\n")
    header, rows = table(render(cfg))
    assert header == ["identity", "l", "i", "residual"]
    assert len(rows) == 12
    assert max(float(r[3]) for r in rows) <= 1e-12


def test_evolve_global_envelope():
    cfg = parse_config(
        ini(
            """
            [run]
            experiment = evolve-global
            [model]
            n_sites = 4
            [bath]
            kind = single_mode
            g = 1
            omega = 1
            [state]
            preset = dsz1
            [times]
            t_end = 6.283185307179586
            n_samples = 101
            """
        )
    )
    header, rows = table(render(cfg))
    assert header == ["t", "re", "im", "abs"]
    t = np.array([float(r[0]) for r in rows])
    magnitude = np.array([float(r[3]) for r in rows])
    np.testing.assert_allclose(magnitude, 0.5 * np.exp(-(1 - np.cos(t))), atol=1e-8)


def test_output_is_deterministic_and_full_precision(tmp_path):
    cfg = parse_config(SPECTRUM)
    a, b = render(cfg), render(cfg)
    assert a == b
    assert "#   delta = 1.0" in a and "# irhm-deco" in a
    out = tmp_path / "x.csv"
    assert run(cfg, str(out)) == 0
    assert out.read_text() == a
    _, rows = table(a)
    assert float(rows[0][1]) == float(repr(float(rows[0][1])))


@pytest.mark.parametrize(
    "experiment,body",
    [
        ("effective", "[model]\nn_sites = 3\nj_star = 0.5\n[coupling]\ng = 2\nomega = 1\n"),
        ("rvb", "[model]\nn_sites = 4\n"),
        ("evolve-local", "[model]\nn_sites = 3\nj_star = 0.5\n[coupling]\ng = 2\nomega = 1\n"
                         "[state]\npreset = same_sector\n[times]\nt_end = 5\nn_samples = 3\n"),
        ("polaron", "[model]\nn_sites = 2\nj_star = 0.2\n[coupling]\ng = 1\nomega = 1\n"
                    "[times]\nt_end = 2\nn_samples = 3\n"),
    ],
)
def test_every_experiment_runs(experiment, body, tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(body)
    out = tmp_path / "o.csv"
    assert main([experiment, "--config", str(path), "--out", str(out)]) == 0
    header, rows = table(out.read_text())
    assert rows and all(len(r) == len(header) for r in rows)


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[model]\nn_sites = 4\njstarr = 1\n")
    assert main(["spectrum", "--config", str(bad)]) == 2
    assert "j_star" in capsys.readouterr().err
    # truncation too small for the coupling -> accuracy error
    leak = tmp_path / "leak.ini"
    leak.write_text(
        "[model]\nn_sites = 2\n[coupling]\ng = 2\nomega = 1\n[times]\nt_end = 5\nn_samples = 3\n[polaron]\nn_max = 6\n"
    )
    with pytest.warns(UserWarning):
        assert main(["polaron", "--config", str(leak)]) == 3
    assert main(["spectrum", "--config", str(tmp_path / "missing.ini")]) == 2


def test_thread_variable_and_module_entry(tmp_path):
    cfg = tmp_path / "s.ini"
    cfg.write_text(SPECTRUM.replace("n_sites = 4", "n_sites = 2"))
    env = {"IRHM_THREADS": "1", "PATH": ""}
    proc = subprocess.run(
        [sys.executable, "-m", "irhm_decoherence", "spectrum", "--config", str(cfg)],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.count("\n") > 5
    env["IRHM_THREADS"] = "zero"
    proc = subprocess.run(
        [sys.executable, "-m", "irhm_decoherence", "spectrum", "--config", str(cfg)],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 2


def test_contract_violation_exit_code(monkeypatch, capsys):
    from irhm_decoherence import cli
    from irhm_decoherence.errors import ContractViolation

    def broken(_config):
        raise ContractViolation("does not commute")

    monkeypatch.setitem(cli._RUNNERS, "spectrum", broken)
    assert run(parse_config(SPECTRUM)) == 4
    assert "contract violation" in capsys.readouterr().err
