"""Flat ``key = value`` experiment files with [pump], [phasematch], [source],
[detectors] and [run] sections. Absent keys take the built-in defaults;
unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .montecarlo import DetectorModel, RunConfig, SourceModel
from .spectral import GridSpec, PhaseMatchSpec, PumpSpec


@dataclass(frozen=True)
class Key:
    kind: type
    default: object
    unit: str
    help: str


KEYS: dict[str, dict[str, Key]] = {
    "pump": {
        "center_wavelength_nm": Key(float, 792.0, "nm", "pump centre wavelength"),
        "fwhm_bandwidth_nm": Key(float, 0.4, "nm", "intensity FWHM; inf = flat"),
        "repetition_rate_hz": Key(float, 8.0e7, "Hz", "pulse repetition rate"),
        "envelope_shape": Key(str, "gaussian", "-", "gaussian | flat"),
        "power_mw": Key(float, 50.0, "mW", "average pump power"),
        "pair_rate_per_mw_s": Key(float, 48000.0, "pairs/(mW s)", "pair production rate"),
    },
    "phasematch": {
        "crystal_length_mm": Key(float, 30.0, "mm", "PPKTP length"),
        "poling_period_um": Key(float, 46.1, "um", "poling period"),
        "group_delay_signal_ps_per_mm": Key(float, PhaseMatchSpec().group_delay_signal_ps_per_mm,
                                            "ps/mm", "signal inverse group velocity"),
        "group_delay_idler_ps_per_mm": Key(float, PhaseMatchSpec().group_delay_idler_ps_per_mm,
                                           "ps/mm", "idler inverse group velocity"),
        "group_delay_pump_ps_per_mm": Key(float, PhaseMatchSpec().group_delay_pump_ps_per_mm,
                                          "ps/mm", "pump inverse group velocity"),
        "degenerate_wavelength_nm": Key(float, 1584.0, "nm", "degenerate signal/idler wavelength"),
        "signal_idler_offset_nm": Key(float, 0.0, "nm", "signal/idler centre offset"),
        "beam_waist_um": Key(float, 50.0, "um", "pump waist (recorded only)"),
    },
    "source": {
        "mean_pairs_per_pulse": Key(float, 0.03, "pairs/pulse", "mean pair number mu"),
        "purity": Key(float, 0.83, "-", "single-photon spectral purity P"),
        "pair_number_statistics": Key(str, "thermal", "-", "thermal | poissonian"),
        "max_pairs": Key(int, 4, "pairs", "pair-number truncation"),
    },
    "detectors": {
        "efficiency": Key(float, 1.0, "-", "per-detector efficiency eta"),
        "dark_count_probability": Key(float, 0.0, "1/gate", "dark count per gate"),
        "h_fanout": Key(int, 3, "detectors", "threshold detectors behind H''"),
        "twofold_v_veto": Key(bool, False, "-", "require V'' dark for twofolds"),
    },
    "run": {
        "pulses_per_phase": Key(int, 100000, "pulses", "pulses simulated per phase"),
        "phase_points": Key(int, 16, "points", "phase grid size"),
        "phase_min_rad": Key(float, 0.0, "rad", "first phase"),
        "phase_max_rad": Key(float, 2 * math.pi, "rad", "grid end (excluded)"),
        "seed": Key(int, 20101101, "-", "unsigned 64-bit RNG seed"),
        "postselect_pairs": Key(bool, False, "-", "condition pulses on the target pair number"),
        "workers": Key(int, 1, "threads", "worker threads (results are identical)"),
        "grid_size": Key(int, 256, "points", "JSA grid points per axis"),
        "grid_span": Key(float, 8.0, "pump FWHMs", "JSA half-width"),
    },
}


def keys_help() -> str:
    lines = ["configuration keys (section.key [unit] default: meaning):"]
    for section, keys in KEYS.items():
        for name, k in keys.items():
            lines.append(f"  {section}.{name} [{k.unit}] {k.default!r}: {k.help}")
    return "\n".join(lines)


@dataclass
class ExperimentConfig:
    values: dict[str, dict[str, object]]
    raw_text: str = ""
    overrides: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, section):
        return self.values[section]

    def pump(self) -> PumpSpec:
        p = self["pump"]
        return PumpSpec(p["center_wavelength_nm"], p["fwhm_bandwidth_nm"],
                        p["repetition_rate_hz"], p["envelope_shape"])

    def phasematch(self) -> PhaseMatchSpec:
        return PhaseMatchSpec(**self["phasematch"])

    def grid(self) -> GridSpec:
        r = self["run"]
        return GridSpec(r["grid_size"], r["grid_size"], r["grid_span"])

    def source(self) -> SourceModel:
        return SourceModel(**self["source"])

    def detectors(self) -> DetectorModel:
        return DetectorModel(**self["detectors"])

    def phase_grid(self) -> np.ndarray:
        r = self["run"]
        if r["phase_points"] < 1:
            raise ConfigurationError("run.phase_points must be >= 1")
        k = np.arange(r["phase_points"])
        return r["phase_min_rad"] + (r["phase_max_rad"] - r["phase_min_rad"]) * k / r["phase_points"]

    def run(self) -> RunConfig:
        r = self["run"]
        return RunConfig(pulses_per_phase=r["pulses_per_phase"],
                         phase_grid=tuple(self.phase_grid()), seed=r["seed"],
                         source=self.source(), detectors=self.detectors(),
                         postselect_pairs=r["postselect_pairs"])

    def echo(self) -> str:
        """Verbatim input followed by every effective value."""
        lines = ["config (verbatim):"]
        lines += [f"  {line}" for line in self.raw_text.splitlines()] or ["  <defaults>"]
        if self.overrides:
            lines.append("overrides: " + ", ".join(f"{k}={v}" for k, v in self.overrides.items()))
        lines.append("effective:")
        for section, keys in self.values.items():
            for name, value in keys.items():
                lines.append(f"  {section}.{name} = {value!r}")
        return "\n".join(lines)


def _convert(section: str, name: str, text: str, key: Key):
    text = text.strip()
    try:
        if key.kind is bool:
            lowered = text.lower()
            if lowered not in configparser.ConfigParser.BOOLEAN_STATES:
                raise ValueError(text)
            return configparser.ConfigParser.BOOLEAN_STATES[lowered]
        if key.kind is int:
            return int(text, 0)
        return key.kind(text)
    except ValueError:
        raise ConfigurationError(
            f"{section}.{name}: cannot read {text!r} as {key.kind.__name__}") from None


def parse_config(text: str = "") -> ExperimentConfig:
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       delimiters=("=",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(" ".join(str(exc).split())) from None
    values = {s: {n: k.default for n, k in keys.items()} for s, keys in KEYS.items()}
    for section in parser.sections():
        if section not in KEYS:
            raise ConfigurationError(f"unknown section [{section}]")
        for name, raw in parser.items(section):
            if name not in KEYS[section]:
                raise ConfigurationError(f"unknown key {section}.{name}")
            values[section][name] = _convert(section, name, raw, KEYS[section][name])
    return ExperimentConfig(values=values, raw_text=text)


def load_config(path=None) -> ExperimentConfig:
    if path is None:
        return parse_config("")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
