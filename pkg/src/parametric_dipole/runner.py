"""Configuration files, command execution and parameter sweeps.

Config format: one ``key = value`` per line, dotted section prefixes,
``#`` starts a comment.  Unknown keys are rejected.  See ``KEYS`` for the
full list with defaults and units.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    InsufficientDataError,
    measure_growth_rate,
    simulate_bloch,
    simulate_exact_modulation,
    simulate_expanded,
    simulate_mathieu,
    simulate_retarded,
    BlochState,
)
from .estimators import Scenario, drive_amplitude, growth_rate, report_text, scenario_report, threshold_lhs
from .boundary_fields import effective_coefficients
from .floquet import stability_map, threshold_amplitude
from .quantities import (
    CONSTANTS,
    ConfigurationError,
    DipoleTransition,
    GratingKinematics,
    MediumPair,
    ResonanceSpec,
    TransitionMode,
    from_si,
)
from .serialize import dumps_json, fmt, lineplot_svg

__all__ = ["RunConfig", "KEYS", "parse_config", "resolve_scenario", "run", "main"]

COMMANDS = ("simulate", "floquet-map", "threshold", "estimate", "sweep")
FORMATS = ("csv", "json", "svg")

# key: (type, default, unit for from_si or None); default None means required
# and "auto" means derived from the rest of the scenario
KEYS: dict[str, tuple[str, object, str | None]] = {
    "transition.mode": ("choice:two-level,classical", "two-level", None),
    "transition.omega0_rad_per_s": ("float", None, "Hz_angular"),
    "transition.dipole_debye": ("float", 1.0, "Debye"),
    "transition.charge_esu": ("float", CONSTANTS.e_electron, None),
    "transition.mass_g": ("float", CONSTANTS.m_electron, None),
    "transition.coupling_esu2_per_g": ("float", "auto", None),
    "grating.R0_um": ("float", None, "micrometer"),
    "grating.a": ("float", None, None),
    "grating.L_um": ("float|auto|auto-shifted", "auto", "micrometer"),
    "grating.v_km_per_s": ("float", None, "km_per_s"),
    "medium.eps1": ("float", 1.0, None),
    "medium.surface": ("choice:perfect-conductor,dielectric", "perfect-conductor", None),
    "medium.eps2_real": ("float", 1.0, None),
    "medium.eps2_imag": ("float", 0.0, None),
    "medium.orientation": ("choice:perpendicular,parallel", "perpendicular", None),
    "resonance.order": ("int", 1, None),
    "beam.density_per_cm3": ("float", 0.0, "per_cm3"),
    "beam.bunch_wavelength_cm": ("float", "auto", "cm"),
    "plate.width_cm": ("float", 1.0, "cm"),
    "plate.length_cm": ("float", 10.0, "cm"),
    "bloch.delta_n": ("float", 1.0, None),
    "bloch.delta_n_pump": ("float", "auto", None),
    "bloch.relaxation_rate_per_s": ("float", "auto", None),
    "simulate.model": ("choice:exact,mathieu,expanded,retarded,bloch", "exact", None),
    "simulate.periods": ("float", 200.0, None),
    "simulate.steps_per_period": ("int", 256, None),
    "simulate.random_phase": ("bool", False, None),
    "simulate.A": ("float", "auto", None),
    "simulate.gamma_over_omega0": ("float", "auto", None),
    "simulate.nu_over_omega0": ("float", "auto", None),
    "simulate.fit_window": ("float", 0.8, None),
    "floquet.gamma_over_omega0": ("float", "auto", None),
    "floquet.nu_min": ("float", 0.5, None),
    "floquet.nu_max": ("float", 2.5, None),
    "floquet.A_min": ("float", 0.0, None),
    "floquet.A_max": ("float", 0.5, None),
    "floquet.n_nu": ("int", 64, None),
    "floquet.n_A": ("int", 64, None),
    "floquet.steps_per_period": ("int", 1024, None),
    "threshold.nu_over_omega0": ("float", "auto", None),
    "sweep.parameter": ("str", "grating.a", None),
    "sweep.start": ("float", 0.0, None),
    "sweep.stop": ("float", 0.05, None),
    "sweep.count": ("int", 11, None),
    "sweep.scale": ("choice:linear,log", "linear", None),
    "sweep.efolds": ("float", 6.0, None),
    "sweep.min_periods": ("float", 100.0, None),
    "sweep.max_periods": ("float", 4000.0, None),
    "output.directory": ("str", "out", None),
    "output.formats": ("list", "csv,json,svg", None),
    "run.seed": ("int", 0, None),
    "run.workers": ("int", 1, None),
}

# these keys never change the numbers written, so they stay out of the
# embedded config and its hash
RESULT_NEUTRAL_KEYS = ("output.directory", "run.workers")

# below this gamma/w0 the sign of the Floquet exponent near threshold is
# lost in the RK4 round-off of the monodromy matrix
FLOQUET_RESOLVABLE_GAMMA = 1e-9


@dataclass(frozen=True)
class RunConfig:
    """Parsed config: ``values`` holds typed raw values (input units, or "auto")."""

    command: str | None
    values: dict
    source_lines: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.values["run.seed"]

    @property
    def workers(self) -> int:
        return self.values["run.workers"]

    @property
    def out_dir(self) -> Path:
        return Path(self.values["output.directory"])

    @property
    def formats(self) -> tuple[str, ...]:
        return tuple(self.values["output.formats"])

    def resolved(self) -> dict:
        """Values that determine the results (output location and worker count excluded)."""
        return {k: v for k, v in self.values.items() if k not in RESULT_NEUTRAL_KEYS}

    def canonical_text(self) -> str:
        lines = [f"command = {self.command}"]
        resolved = self.resolved()
        for key in sorted(resolved):
            v = resolved[key]
            if isinstance(v, float):
                v = fmt(v)
            elif isinstance(v, (list, tuple)):
                v = ",".join(v)
            lines.append(f"{key} = {v}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    def with_value(self, key: str, value) -> "RunConfig":
        vals = dict(self.values)
        vals[key] = value
        return RunConfig(self.command, vals, self.source_lines)

    def provenance(self) -> dict:
        return {"config_sha256": self.config_hash(), "seed": self.seed, "version": __version__}



class ConfigError(ConfigurationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _convert(key: str, kind: str, raw: str, line: int):
    raw = raw.strip()
    try:
        if kind.startswith("choice:"):
            choices = kind.split(":", 1)[1].split(",")
            if raw not in choices:
                raise ConfigError(f"{key} must be one of {choices}, got {raw!r}", line)
            return raw
        if kind == "str":
            return raw
        if kind == "list":
            items = [x.strip() for x in raw.split(",") if x.strip()]
            return items
        if kind == "bool":
            if raw.lower() in ("true", "yes", "1"):
                return True
            if raw.lower() in ("false", "no", "0"):
                return False
            raise ConfigError(f"{key} expects true/false, got {raw!r}", line)
        if kind == "int":
            return int(raw)
        if raw == "auto" or raw == "auto-shifted" and "auto-shifted" in kind:
            return raw
        return float(raw)
    except ConfigError:
        raise
    except ValueError:
        parts = raw.split()
        if len(parts) == 2 and _is_number(parts[0]):
            unit = KEYS[key][2] or "a dimensionless number"
            raise ConfigError(f"unit mismatch for {key}: value is taken in {unit}, got {parts[1]!r}; "
                              "drop the suffix", line) from None
        raise ConfigError(f"cannot parse {key} = {raw!r} as {kind.split(':')[0]}", line) from None


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse the line-oriented config, apply defaults and validate."""
    values: dict = {}
    lines: dict = {}
    for n, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", n)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key == "command":
            if raw not in COMMANDS:
                raise ConfigError(f"unknown command {raw!r}", n)
            command = command or raw
            continue
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", n)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", n)
        kind = KEYS[key][0]
        value = _convert(key, kind, raw, n)
        if value == "auto" and KEYS[key][1] != "auto" and not kind.startswith("float|auto"):
            raise ConfigError(f"{key} has no automatic value", n)
        values[key] = value
        lines[key] = n
    for key, (_, default, _) in KEYS.items():
        if key not in values:
            if default is None:
                raise ConfigError(f"missing required key {key!r}")
            values[key] = list(default.split(",")) if KEYS[key][0] == "list" else default
    cfg = RunConfig(command, values, lines)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    v = cfg.values

    def err(key, msg):
        raise ConfigError(f"{key}: {msg}", cfg.source_lines.get(key))

    if not 0 <= v["grating.a"] < 1:
        err("grating.a", "corrugation amplitude must be < 1" if v["grating.a"] >= 1 else "must be >= 0")
    for key in ("transition.omega0_rad_per_s", "grating.R0_um", "transition.dipole_debye"):
        if not v[key] > 0:
            err(key, "must be positive")
    if v["grating.v_km_per_s"] < 0:
        err("grating.v_km_per_s", "must be non-negative")
    if v["resonance.order"] < 1:
        err("resonance.order", "must be >= 1")
    if v["run.workers"] < 1:
        err("run.workers", "must be >= 1")
    bad = [f for f in v["output.formats"] if f not in FORMATS]
    if bad:
        err("output.formats", f"unknown formats {bad}")
    if v["sweep.parameter"] not in KEYS or not KEYS[v["sweep.parameter"]][0].startswith("float"):
        err("sweep.parameter", "must name a numeric config key")
    if v["sweep.count"] < 1:
        err("sweep.count", "must be >= 1")
    # population differences are fractions of the molecules, not densities
    for key in ("bloch.delta_n", "bloch.delta_n_pump"):
        if not isinstance(v[key], str) and abs(v[key]) > 1:
            err(key, "population difference must lie in [-1, 1]")


def _cgs(cfg: RunConfig, key: str):
    value = cfg.values[key]
    if isinstance(value, str):
        return value
    unit = KEYS[key][2]
    return from_si(value, unit) if unit else value


def resolve_scenario(cfg: RunConfig) -> Scenario:
    """Build the physical scenario (CGS) from a parsed config."""
    v = cfg.values
    w0 = _cgs(cfg, "transition.omega0_rad_per_s")
    if v["transition.mode"] == "two-level":
        transition = DipoleTransition.two_level(w0, _cgs(cfg, "transition.dipole_debye"))
    elif v["transition.coupling_esu2_per_g"] != "auto":
        transition = DipoleTransition.classical_with_coupling(w0, v["transition.coupling_esu2_per_g"])
    else:
        transition = DipoleTransition.classical(w0, v["transition.charge_esu"], v["transition.mass_g"])
    if v["medium.surface"] == "perfect-conductor":
        eps2 = None
    else:
        eps2 = complex(v["medium.eps2_real"], v["medium.eps2_imag"])
    medium = MediumPair(v["medium.eps1"], eps2, v["medium.orientation"])
    order = v["resonance.order"]
    R0 = _cgs(cfg, "grating.R0_um")
    speed = _cgs(cfg, "grating.v_km_per_s")
    dn = v["bloch.delta_n"] if transition.mode is TransitionMode.TWO_LEVEL else None
    L = _cgs(cfg, "grating.L_um")
    if isinstance(L, str):
        if speed == 0:
            raise ConfigError("grating.L_um = auto needs a non-zero speed", cfg.source_lines.get("grating.L_um"))
        w_target = w0
        if L == "auto-shifted":
            shift = effective_coefficients(transition, R0, medium).freq_shift_sq * (dn or 1.0)
            w_target = math.sqrt(w0**2 - shift)
        L = math.pi * speed * order / w_target  # nu = 2 pi v / L = 2 w / N
    grating = GratingKinematics(R0, v["grating.a"], L, speed)
    bunch = _cgs(cfg, "beam.bunch_wavelength_cm")
    return Scenario(
        transition=transition,
        grating=grating,
        medium=medium,
        resonance=ResonanceSpec(order),
        beam_density=_cgs(cfg, "beam.density_per_cm3"),
        plate=(_cgs(cfg, "plate.width_cm"), _cgs(cfg, "plate.length_cm")),
        delta_n=dn,
        bunch_wavelength=None if bunch == "auto" else bunch,
    )


# ---------------------------------------------------------------- commands


def _csv_with_provenance(body: str, prov: dict) -> str:
    head = "".join(f"# {k}: {prov[k]}\r\n" for k in sorted(prov))
    return head + body


def _svg_with_provenance(svg: str, prov: dict) -> str:
    head, rest = svg.split("\n", 1)
    note = " ".join(f"{k}={prov[k]}" for k in sorted(prov))
    return f"{head}\n<!-- {note} -->\n{rest}"


def _damping_ratio(s: Scenario) -> float:
    eff = effective_coefficients(s.transition, s.grating.R0, s.medium)
    return eff.damping_rate / 2 / s.transition.omega0


def _simulate(cfg: RunConfig, s: Scenario, periods: float | None = None):
    v = cfg.values
    model = v["simulate.model"]
    periods = v["simulate.periods"] if periods is None else periods
    steps = v["simulate.steps_per_period"]
    t, g, m = s.transition, s.grating, s.medium
    if model == "mathieu":
        A = drive_amplitude(t, g, m, s.delta_n).A if v["simulate.A"] == "auto" else v["simulate.A"]
        gr = _damping_ratio(s) if v["simulate.gamma_over_omega0"] == "auto" else v["simulate.gamma_over_omega0"]
        nr = g.nu / t.omega0 if v["simulate.nu_over_omega0"] == "auto" else v["simulate.nu_over_omega0"]
        w0 = t.omega0
        return simulate_mathieu(w0, gr * w0, A, nr * w0, (t.zero_point_dipole, 0.0), periods, steps)
    kwargs = dict(periods=periods, steps_per_period=steps)
    if model == "exact":
        return simulate_exact_modulation(t, g, m, seed=cfg.seed, random_phase=v["simulate.random_phase"], **kwargs)
    if model == "expanded":
        return simulate_expanded(t, g.R0, m, **kwargs)
    if model == "retarded":
        return simulate_retarded(t, g, m, seed=cfg.seed, random_phase=v["simulate.random_phase"], **kwargs)
    dn = s.delta_n if s.delta_n is not None else 1.0
    pump = dn if v["bloch.delta_n_pump"] == "auto" else v["bloch.delta_n_pump"]
    relax = None if v["bloch.relaxation_rate_per_s"] == "auto" else v["bloch.relaxation_rate_per_s"]
    ic = BlochState(p=t.zero_point_dipole, delta_n=dn, delta_n_pump=pump)
    return simulate_bloch(t, g, m, pump=pump, ic=ic, relaxation_rate=relax, **kwargs)


def _fit(traj, window):
    try:
        fit = measure_growth_rate(traj, window)
    except InsufficientDataError as exc:
        return {"error": str(exc)}
    return {"omega_pp": fit.omega_pp, "r_squared": fit.r_squared, "n_extrema": fit.n_extrema,
            "low_confidence": fit.low_confidence}


def _cmd_simulate(cfg, s):
    traj = _simulate(cfg, s)
    record = {"command": "simulate", "config": cfg.resolved(), "provenance": cfg.provenance(),
              "meta": traj.meta, "growth_fit": _fit(traj, cfg.values["simulate.fit_window"]),
              "n_samples": len(traj.times)}
    files = {
        "csv": ("trajectory.csv", lambda: _csv_with_provenance(traj.to_csv(), cfg.provenance())),
        "json": ("run.json", lambda: dumps_json(record)),
        "svg": ("trajectory.svg", lambda: _svg_with_provenance(
            lineplot_svg(traj.times, traj.p_samples, title=traj.meta["model"], xlabel="w0 t", ylabel="p"),
            cfg.provenance())),
    }
    fit = record["growth_fit"]
    summary = f"simulate {traj.meta['model']}: {len(traj.times)} samples, growth fit " + (
        f"{fit['omega_pp']:.4g} 1/s" if "omega_pp" in fit else fit["error"])
    return files, [summary]


def _floquet_gamma(cfg, s):
    g = cfg.values["floquet.gamma_over_omega0"]
    return _damping_ratio(s) if g == "auto" else g


def _cmd_floquet_map(cfg, s):
    v = cfg.values
    w0 = s.transition.omega0
    gr = _floquet_gamma(cfg, s)
    smap = stability_map(w0, gr * w0, (v["floquet.nu_min"], v["floquet.nu_max"]),
                         (v["floquet.A_min"], v["floquet.A_max"]), (v["floquet.n_nu"], v["floquet.n_A"]),
                         v["floquet.steps_per_period"])
    record = {"command": "floquet-map", "config": cfg.resolved(), "provenance": cfg.provenance(), **smap.record()}
    files = {
        "csv": ("stability_map.csv", lambda: _csv_with_provenance(smap.to_csv(), cfg.provenance())),
        "json": ("stability_map.json", lambda: dumps_json(record)),
        "svg": ("stability_map.svg", lambda: _svg_with_provenance(smap.to_svg(), cfg.provenance())),
    }
    return files, [f"floquet-map: {smap.exponents.size} cells, max exponent {smap.exponents.max():.4g} w0, "
                   f"{len(smap.tongue_tips())} tongue tips"]


def _cmd_threshold(cfg, s):
    v = cfg.values
    t, g, m = s.transition, s.grating, s.medium
    w0 = t.omega0
    gr = _floquet_gamma(cfg, s)
    nr = 2.0 / s.resonance.order if v["threshold.nu_over_omega0"] == "auto" else v["threshold.nu_over_omega0"]
    result = {"command": "threshold", "config": cfg.resolved(), "provenance": cfg.provenance(),
              "gamma_over_omega0": gr, "nu_over_omega0": nr,
              "A_th_formula": 4 * gr, "threshold_lhs": threshold_lhs(t, g, m),
              "A_scenario": drive_amplitude(t, g, m, s.delta_n).A}
    if gr >= FLOQUET_RESOLVABLE_GAMMA:
        th = threshold_amplitude(w0, gr * w0, nr * w0, v["floquet.steps_per_period"])
        result.update(A_th_floquet=th.A_th, stable_up_to_one=th.stable_up_to_one, floquet_note=None)
    else:
        result.update(A_th_floquet=None, stable_up_to_one=None,
                      floquet_note=f"gamma/w0 = {gr:.3g} is below {FLOQUET_RESOLVABLE_GAMMA:g}; "
                                   "set floquet.gamma_over_omega0 to bisect numerically")
    files = {"json": ("threshold.json", lambda: dumps_json(result))}
    ath = result["A_th_floquet"]
    return files, [f"threshold: A_th(formula) = {4 * gr:.4g}, A_th(Floquet) = "
                   f"{'n/a' if ath is None else format(ath, '.4g')}, lhs = {result['threshold_lhs']:.4g}"]


def _cmd_estimate(cfg, s):
    report = scenario_report(s)
    record = {"command": "estimate", "config": cfg.resolved(), "provenance": cfg.provenance(), "report": report}
    files = {
        "json": ("report.json", lambda: dumps_json(record)),
        "txt": ("report.txt", lambda: _csv_with_provenance(report_text(report), cfg.provenance())),
    }
    return files, [f"estimate: {report['verdict']}, growth {report['growth']['omega_pp']:.4g} 1/s"]


def sweep_values(cfg: RunConfig) -> np.ndarray:
    v = cfg.values
    if v["sweep.scale"] == "log":
        return np.geomspace(v["sweep.start"], v["sweep.stop"], v["sweep.count"])
    return np.linspace(v["sweep.start"], v["sweep.stop"], v["sweep.count"])


def sweep_cell(cfg: RunConfig, value: float) -> dict:
    """Simulate one sweep point and compare the measured growth with w0 A / 4.

    The horizon adapts to the predicted rate so that roughly ``sweep.efolds``
    e-foldings are covered, within [min_periods, max_periods].
    """
    v = cfg.values
    cell = cfg.with_value(v["sweep.parameter"], float(value))
    s = resolve_scenario(cell)
    est = growth_rate(s.transition, s.grating, s.medium, s.delta_n)
    w0 = s.transition.omega0
    rate = abs(est.net_growth) / w0
    periods = v["sweep.max_periods"] if rate == 0 else v["sweep.efolds"] / (rate * 2 * math.pi)
    periods = float(min(v["sweep.max_periods"], max(v["sweep.min_periods"], periods)))
    traj = _simulate(cell, s, periods)
    fit = _fit(traj, v["simulate.fit_window"])
    measured = fit.get("omega_pp", math.nan)
    net = est.net_growth
    return {
        "value": float(value),
        "A": drive_amplitude(s.transition, s.grating, s.medium, s.delta_n).A,
        "omega_pp_measured": measured,
        "omega_pp_formula": est.omega_pp,
        "omega_pp_formula_net": net,
        "ratio": measured / net if net != 0 else math.nan,
        "periods": periods,
        "r_squared": fit.get("r_squared", math.nan),
    }


def run_sweep(cfg: RunConfig, workers: int | None = None) -> list[dict]:
    """Evaluate every sweep cell; results are ordered by cell index."""
    values = sweep_values(cfg)
    workers = cfg.workers if workers is None else workers
    if workers == 1:
        return [sweep_cell(cfg, x) for x in values]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(sweep_cell, [cfg] * len(values), values))


SWEEP_COLUMNS = ("value", "A", "omega_pp_measured", "omega_pp_formula", "omega_pp_formula_net", "ratio",
                 "periods", "r_squared")


def sweep_csv(rows: list[dict], parameter: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow([parameter if c == "value" else c for c in SWEEP_COLUMNS])
    for row in rows:
        writer.writerow([fmt(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def _cmd_sweep(cfg, s):
    rows = run_sweep(cfg)
    param = cfg.values["sweep.parameter"]
    record = {"command": "sweep", "config": cfg.resolved(), "provenance": cfg.provenance(), "parameter": param,
              "rows": rows}
    files = {
        "csv": ("sweep.csv", lambda: _csv_with_provenance(sweep_csv(rows, param), cfg.provenance())),
        "json": ("sweep.json", lambda: dumps_json(record)),
        "svg": ("sweep.svg", lambda: _svg_with_provenance(
            lineplot_svg([r["value"] for r in rows], [r["omega_pp_measured"] for r in rows],
                         title="measured growth rate", xlabel=param, ylabel="1/s"),
            cfg.provenance())),
    }
    return files, [f"sweep {param}: {len(rows)} cells"]


_DISPATCH = {
    "simulate": _cmd_simulate,
    "floquet-map": _cmd_floquet_map,
    "threshold": _cmd_threshold,
    "estimate": _cmd_estimate,
    "sweep": _cmd_sweep,
}

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_COMPUTE = 0, 2, 3, 4


def run(cfg: RunConfig, out=None) -> int:
    """Execute ``cfg.command`` and write its artifacts; returns an exit status."""
    out = sys.stdout if out is None else out
    if cfg.command not in _DISPATCH:
        print(f"error: unknown command {cfg.command!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        scenario = resolve_scenario(cfg)
        files, summary = _DISPATCH[cfg.command](cfg, scenario)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError) as exc:
        print(f"{cfg.command} failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    try:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        chosen = [f for f in files if f in cfg.formats or f == "txt"]
        if not any(f in cfg.formats for f in files):
            # commands without a requested format still write their JSON record
            chosen.append("json")
        for fmt_name in chosen:
            name, render = files[fmt_name]
            (cfg.out_dir / name).write_text(render(), encoding="utf-8", newline="")
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for line in summary:
        print(line, file=out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="parametric-dipole",
                                     description="Parametric self-excitation of a dipole above a grating.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, type=Path, help="line-oriented key = value config file")
    parser.add_argument("--out", type=Path, help="output directory (overrides output.directory)")
    parser.add_argument("--seed", type=int, help="RNG seed (overrides run.seed)")
    parser.add_argument("--workers", type=int, help="parallel sweep workers (overrides run.workers)")
    parser.add_argument("--format", help="comma-separated subset of csv,json,svg")
    args = parser.parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    overrides = []
    if args.out is not None:
        overrides.append(f"output.directory = {args.out}")
    if args.seed is not None:
        overrides.append(f"run.seed = {args.seed}")
    if args.workers is not None:
        overrides.append(f"run.workers = {args.workers}")
    if args.format is not None:
        overrides.append(f"output.formats = {args.format}")
    try:
        cfg = parse_config(text, args.command)
        if overrides:
            extra = parse_config("\n".join(overrides) + "\n" + _required_stub(cfg), args.command)
            vals = dict(cfg.values)
            for line in overrides:
                key = line.split("=", 1)[0].strip()
                vals[key] = extra.values[key]
            cfg = RunConfig(cfg.command, vals, cfg.source_lines)
            _validate(cfg)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


def _required_stub(cfg: RunConfig) -> str:
    # minimal set of required keys so override lines parse on their own
    keys = [k for k, (_, d, _) in KEYS.items() if d is None]
    return "\n".join(f"{k} = {cfg.values[k]!r}" for k in keys) + "\n"
