import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from parametric_dipole import __version__
from parametric_dipole.estimators import Scenario
from parametric_dipole.quantities import DipoleTransition, GratingKinematics, MediumPair, ResonanceSpec
from parametric_dipole.runner import (
    KEYS,
    ConfigError,
    main,
    parse_config,
    resolve_scenario,
    run,
    run_sweep,
    sweep_csv,
)

ROOT = Path(__file__).resolve().parents[1]
BASELINE = (ROOT / "configs" / "baseline.cfg").read_text()
SWEEP = (ROOT / "configs" / "strong_coupling_sweep.cfg").read_text()

MINIMAL = """\
command = estimate
transition.omega0_rad_per_s = 1e11
grating.R0_um = 0.1
grating.a = 0.1
grating.v_km_per_s = 1
"""


def _with(text, **overrides):
    overrides = {k.replace("__", "."): v for k, v in overrides.items()}
    lines = []
    for line in text.splitlines():
        key = line.split("=", 1)[0].strip()
        if key in overrides:
            continue
        lines.append(line)
    lines += [f"{k} = {v}" for k, v in overrides.items()]
    return "\n".join(lines) + "\n"


def _run(text, tmp_path, command=None):
    cfg = parse_config(_with(text, output__directory=tmp_path), command)
    out = io.StringIO()
    code = run(cfg, out)
    return code, out.getvalue(), cfg


def _data_rows(path):
    rows = [l for l in path.read_bytes().decode().split("\r\n") if l and not l.startswith("#")]
    return list(csv.reader(rows))


# ----------------------------------------------------------------- parsing


def test_minimal_config_takes_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.command == "estimate"
    for key, (_, default, _) in KEYS.items():
        if default is not None and key not in MINIMAL:
            expected = default.split(",") if KEYS[key][0] == "list" else default
            assert cfg.values[key] == expected, key
    s = resolve_scenario(cfg)
    assert s.transition.d == pytest.approx(1e-18)
    assert s.grating.nu == pytest.approx(2e11)


def test_corrugation_at_or_above_one_is_a_hard_error():
    with pytest.raises(ConfigError, match="corrugation amplitude must be < 1") as info:
        parse_config(_with(MINIMAL, grating__a=1.5))
    assert info.value.line == 5


@pytest.mark.parametrize("extra, pattern, line", [
    ("beam.colour = red", "unknown key", 6),
    ("beam.density_per_cm3 = lots", "cannot parse", 6),
    ("plate.width_cm = 1 m", "unit mismatch", 6),
    ("grating.a = 0.2", "duplicate key", 6),
    ("just some words", "key = value", 6),
    ("medium.orientation = sideways", "must be one of", 6),
    ("bloch.delta_n = 1e17", r"must lie in \[-1, 1\]", 6),
])
def test_parse_errors_carry_line_numbers(extra, pattern, line):
    with pytest.raises(ConfigError, match=pattern) as info:
        parse_config(MINIMAL + extra + "\n")
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_missing_required_key():
    text = "\n".join(l for l in MINIMAL.splitlines() if not l.startswith("grating.R0_um")) + "\n"
    with pytest.raises(ConfigError, match="missing required key 'grating.R0_um'"):
        parse_config(text)


def test_comments_and_blank_lines_are_ignored():
    cfg = parse_config("# header\n\n" + MINIMAL.replace("grating.a = 0.1", "grating.a = 0.1   # depth"))
    assert cfg.values["grating.a"] == 0.1


def test_baseline_file_is_the_reference_scenario():
    s = resolve_scenario(parse_config(BASELINE))
    w0, v = 1e11, 1e5
    expected = Scenario(
        transition=DipoleTransition.two_level(w0, 1e-18),
        grating=GratingKinematics(1e-5, 0.1, math.pi * v / w0, v),
        medium=MediumPair(1.0, None, "perpendicular"),
        resonance=ResonanceSpec(1),
        beam_density=1e17,
        plate=(1.0, 10.0),
        delta_n=1.0,
    )
    for name in ("transition", "medium", "resonance", "beam_density", "plate", "delta_n", "bunch_wavelength"):
        assert getattr(s, name) == getattr(expected, name), name
    for name in ("R0", "a", "L", "v"):
        assert getattr(s.grating, name) == pytest.approx(getattr(expected.grating, name), rel=1e-15)
    assert s.grating.nu == pytest.approx(2 * w0, rel=1e-15)


def test_auto_shifted_period_tunes_to_image_shifted_frequency():
    s = resolve_scenario(parse_config(SWEEP))
    from parametric_dipole.boundary_fields import effective_coefficients

    shift = effective_coefficients(s.transition, s.grating.R0, s.medium).freq_shift_sq
    assert shift / 1e22 == pytest.approx(0.05, rel=1e-6)
    assert s.grating.nu == pytest.approx(2 * math.sqrt(1e22 - shift), rel=1e-12)


# ---------------------------------------------------------------- commands


def test_estimate_writes_report(tmp_path):
    code, out, cfg = _run(BASELINE, tmp_path)
    assert code == 0
    assert out.startswith("estimate: unstable")
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["report"]["verdict"] == "unstable"
    assert doc["provenance"] == {"config_sha256": cfg.config_hash(), "seed": 0, "version": __version__}
    assert "verdict: unstable" in (tmp_path / "report.txt").read_text()


def test_threshold_command_on_baseline(tmp_path):
    code, out, _ = _run(BASELINE, tmp_path, "threshold")
    assert code == 0
    doc = json.loads((tmp_path / "threshold.json").read_text())
    assert doc["threshold_lhs"] == pytest.approx(7.58e11, rel=1e-3)
    assert doc["A_th_formula"] == pytest.approx(4 * 4.692e-8 / 1e11, rel=1e-3)
    # gamma/w0 ~ 5e-19 is below what bisection on the exponent sign can resolve
    assert doc["A_th_floquet"] is None and "below" in doc["floquet_note"]


def test_threshold_command_with_resolvable_damping(tmp_path):
    code, _, _ = _run(_with(BASELINE, floquet__gamma_over_omega0=1e-3), tmp_path, "threshold")
    assert code == 0
    doc = json.loads((tmp_path / "threshold.json").read_text())
    assert doc["A_th_floquet"] == pytest.approx(4e-3, rel=0.01)
    assert doc["A_th_formula"] == pytest.approx(4e-3, rel=1e-12)


def test_floquet_map_without_drive_is_minus_gamma(tmp_path):
    text = _with(BASELINE, floquet__gamma_over_omega0=2e-3, floquet__A_min=0, floquet__A_max=0,
                 floquet__n_nu=8, floquet__n_A=8)
    code, _, _ = _run(text, tmp_path, "floquet-map")
    assert code == 0
    rows = _data_rows(tmp_path / "stability_map.csv")
    assert rows[0] == ["nu_ratio", "A", "exponent"]
    assert len(rows) == 65
    for row in rows[1:]:
        assert float(row[2]) == pytest.approx(-2e-3, rel=1e-9)
    svg = (tmp_path / "stability_map.svg").read_text()
    assert "config_sha256=" in svg and "<script" not in svg


@pytest.mark.parametrize("model, extra", [
    ("mathieu", {"simulate__A": 0.01, "simulate__gamma_over_omega0": 1e-3, "simulate__nu_over_omega0": 2}),
    ("exact", {}),
    ("expanded", {}),
    ("retarded", {"grating__R0_um": 188.0}),
    ("bloch", {"bloch__relaxation_rate_per_s": 1e8}),
])
def test_simulate_models(tmp_path, model, extra):
    text = _with(BASELINE, simulate__model=model, simulate__periods=20, **extra)
    code, out, _ = _run(text, tmp_path, "simulate")
    assert code == 0, out
    rows = _data_rows(tmp_path / "trajectory.csv")
    assert rows[0][:3] == ["tau", "p", "p_dot"]
    assert len(rows) == 20 * 256 + 2
    doc = json.loads((tmp_path / "run.json").read_text())
    assert doc["n_samples"] == 20 * 256 + 1
    assert doc["meta"]["omega0"] == 1e11


def test_simulate_fits_growth(tmp_path):
    text = _with(BASELINE, simulate__model="mathieu", simulate__periods=400, simulate__A=0.01,
                 simulate__gamma_over_omega0=1e-3, simulate__nu_over_omega0=2, output__formats="json")
    assert _run(text, tmp_path, "simulate")[0] == 0
    fit = json.loads((tmp_path / "run.json").read_text())["growth_fit"]
    assert fit["omega_pp"] == pytest.approx(1.5e-3 * 1e11, rel=0.05)
    assert fit["low_confidence"] is False


def test_simulate_reports_unresolved_delay_as_config_error(tmp_path, capsys):
    code, _, _ = _run(_with(BASELINE, simulate__model="retarded", simulate__periods=2), tmp_path, "simulate")
    assert code == 2
    assert "steps_per_period" in capsys.readouterr().err


def test_sweep_ratio_tends_to_one(tmp_path):
    code, _, cfg = _run(SWEEP, tmp_path)
    assert code == 0
    rows = _data_rows(tmp_path / "sweep.csv")
    header = rows[0]
    assert header[:4] == ["grating.a", "A", "omega_pp_measured", "omega_pp_formula"]
    table = np.array([[float(x) for x in r] for r in rows[1:]])
    assert len(table) == 11
    a, ratio = table[:, 0], table[:, header.index("ratio")]
    assert a[0] == 0 and a[-1] == pytest.approx(0.05)
    # a = 0: only the damping remains and the measured decay equals it
    assert ratio[0] == pytest.approx(1.0, rel=1e-3)
    assert np.all(np.abs(ratio[1:] - 1) < 0.05)
    # what is left is the image-shift factor 1/sqrt(1 - s) of the tuned oscillator
    assert np.all(np.abs(ratio[1:] * math.sqrt(1 - 0.05) - 1) < 0.01)


# ---------------------------------------------------------- reproducibility


def _small_sweep(tmp_path, workers):
    text = _with(SWEEP, sweep__count=4, sweep__stop=0.04, sweep__start=0.01, sweep__max_periods=400,
                 run__workers=workers)
    code, _, _ = _run(text, tmp_path)
    assert code == 0
    return (tmp_path / "sweep.csv").read_bytes(), (tmp_path / "sweep.json").read_bytes()


def test_sweep_independent_of_worker_count(tmp_path):
    one = _small_sweep(tmp_path / "w1", 1)
    two = _small_sweep(tmp_path / "w2", 2)
    assert one == two


def test_identical_runs_are_byte_identical(tmp_path):
    text = _with(BASELINE, simulate__periods=10, simulate__random_phase="true", run__seed=11)
    for sub in ("a", "b"):
        assert _run(text, tmp_path / sub, "simulate")[0] == 0
        assert _run(text, tmp_path / sub, "estimate")[0] == 0
    for name in ("trajectory.csv", "run.json", "trajectory.svg", "report.json", "report.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    other = _with(text, run__seed=12)
    _run(other, tmp_path / "c", "simulate")
    assert (tmp_path / "c" / "trajectory.csv").read_bytes() != (tmp_path / "a" / "trajectory.csv").read_bytes()


def test_every_file_carries_provenance(tmp_path):
    _run(_with(BASELINE, simulate__periods=5), tmp_path, "simulate")
    _run(BASELINE, tmp_path, "estimate")
    _run(BASELINE, tmp_path, "threshold")
    for path in tmp_path.iterdir():
        text = path.read_text()
        assert "config_sha256" in text and __version__ in text, path.name


def test_json_round_trips_floats(tmp_path):
    _run(BASELINE, tmp_path, "estimate")
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["report"]["drive"]["A"] == pytest.approx(1.4223782343700932e-06, rel=0, abs=0)


def test_format_selection(tmp_path):
    _run(_with(BASELINE, simulate__periods=5, output__formats="json"), tmp_path, "simulate")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["run.json"]


def test_sweep_csv_orders_columns():
    rows = [{"value": 0.1, "A": 1.0, "omega_pp_measured": 2.0, "omega_pp_formula": 3.0,
             "omega_pp_formula_net": 2.5, "ratio": 0.8, "periods": 10.0, "r_squared": 1.0}]
    text = sweep_csv(rows, "grating.a")
    assert text.split("\r\n")[0].startswith("grating.a,A,omega_pp_measured")


# ---------------------------------------------------------------------- CLI


def test_cli_end_to_end(tmp_path, capsys):
    cfg_path = tmp_path / "base.cfg"
    cfg_path.write_text(BASELINE)
    out = tmp_path / "out"
    assert main(["estimate", "--config", str(cfg_path), "--out", str(out), "--seed", "3",
                 "--workers", "2", "--format", "json"]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["provenance"]["seed"] == 3
    assert "estimate:" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(_with(BASELINE, grating__a=1.5))
    assert main(["estimate", "--config", str(bad)]) == 2
    assert "corrugation amplitude must be < 1" in capsys.readouterr().err
    assert main(["estimate", "--config", str(tmp_path / "missing.cfg")]) == 3
    blocker = tmp_path / "file"
    blocker.write_text("")
    good = tmp_path / "good.cfg"
    good.write_text(BASELINE)
    assert main(["estimate", "--config", str(good), "--out", str(blocker / "sub")]) == 3
    assert main(["estimate", "--config", str(good), "--format", "pdf"]) == 2
    with pytest.raises(SystemExit):
        main(["estimate"])
