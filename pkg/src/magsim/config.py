"""Experiment configuration: INI-style files with strict validation.

Grammar: configparser sections of ``key = value`` pairs. Recognized
sections are [system], [field], [readout], [decay] and [run]; unknown
sections or keys are rejected by name. Every key has a default, so the
empty file is the stock nitrogen-ancilla system. ``delta_mhz`` may be given
instead of ``b_z_g`` and is converted; the derived detuning is echoed in
run metadata either way.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field as dfield

from .errors import ParseError, ValidationError
from .metrology import CsrConfig, DecayModel, ReadoutModel
from .spin_core import AncillaKind, FieldConfig, SpinSystemParams

ENV_CONFIG_DIR = "MAGSIM_CONFIG_DIR"

MODES = ("xy8_fringe", "tau_scan", "field_sweep", "filter_map",
         "sensitivity_table", "maytag", "spinlock", "vector", "interp_demo")

_SYSTEM_KEYS = {
    "ancilla": ("nitrogen14", str),
    "delta0_mhz": (2870.0, float),
    "gamma_e_mhz_per_g": (2.8, float),
    "gamma_n_mhz_per_g": (-3.077e-4, float),
    "q0_mhz": (-4.95, float),
    "a_par_mhz": (-2.16, float),
    "a_perp_mhz": (-2.62, float),
}

_FIELD_KEYS = {
    "b_z_g": (974.642857142857, float),
    "delta_mhz": (None, float),
    "b_e_g": (0.0, float),
    "b_i_g": (0.0, float),
    "beta_rad": (0.0, float),
}

_READOUT_KEYS = {
    "signal_noise_over_c": (17.27, float),
    "dead_time_us": (1.3, float),
    "csr_c_multiplier": (None, float),
    "csr_dead_time_us": (None, float),
}

_DECAY_KEYS = {
    "t2_us": (350.0, float),
    "t2_star_us": (1.16, float),
    "p_exp": (1.0, float),
}

_RUN_KEYS = {
    "mode": ("xy8_fringe", str),
    "seed": (12345, int),
    "out": ("", str),
    # sweep knobs; each mode reads the ones it needs
    "n_max_cycles": (40, int),
    "cycle_step": (1, int),
    "n_probe_pulses": (56, int),
    "tau_window": (0.06, float),
    "tau_points": (201, int),
    "b_e_max_g": (0.5, float),
    "b_e_points": (26, int),
    "n_pulses": (56, int),
    "freq_min_mhz": (0.005, float),
    "freq_max_mhz": (2.0, float),
    "freq_points": (40, int),
    "delta_list_mhz": ("139,141,150,153,165,174.5", str),
    "t_us": (60.0, float),
    "maytag_omega_lf_mhz": (0.05, float),
    "maytag_delta_amp_mhz": (100.0, float),
    "maytag_cycles": (16, int),
    "tone_amplitude_g": (0.05, float),
    "rabi_min_mhz": (3.0, float),
    "rabi_max_mhz": (5.2, float),
    "rabi_points": (45, int),
    "lock_time_us": (60.0, float),
    "b_par_g": (1.0, float),
    "b_perp_g": (0.8185, float),
    "b_perp_with_bias_g": (1.5, float),
    "bias_g": (0.8, float),
    "interp_n_blocks": (16, int),
    "interp_dtau_ns": (1.0, float),
    "interp_cycles": (8, int),
}

_SECTIONS = {
    "system": _SYSTEM_KEYS,
    "field": _FIELD_KEYS,
    "readout": _READOUT_KEYS,
    "decay": _DECAY_KEYS,
    "run": _RUN_KEYS,
}


@dataclass
class ExperimentConfig:
    system: SpinSystemParams
    field: FieldConfig
    readout: ReadoutModel
    decay: DecayModel
    run: dict
    raw: dict = dfield(default_factory=dict)

    @property
    def mode(self) -> str:
        return self.run["mode"]

    @property
    def seed(self) -> int:
        return self.run["seed"]


def _coerce(section: str, key: str, text: str):
    default, typ = _SECTIONS[section][key]
    try:
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        return text
    except ValueError:
        raise ValidationError(
            f"{section}.{key}: cannot parse {text!r} as {typ.__name__}") from None


def _assemble(values: dict) -> ExperimentConfig:
    sysv = values["system"]
    kind_text = sysv["ancilla"]
    try:
        kind = AncillaKind(kind_text)
    except ValueError:
        raise ValidationError(
            f"system.ancilla: unknown ancilla {kind_text!r}") from None
    q0 = sysv["q0_mhz"]
    if kind is AncillaKind.CARBON13:
        q0 = 0.0
    try:
        params = SpinSystemParams(
            delta0=sysv["delta0_mhz"], gamma_e=sysv["gamma_e_mhz_per_g"],
            gamma_n=sysv["gamma_n_mhz_per_g"], q0=q0,
            a_par=sysv["a_par_mhz"], a_perp=sysv["a_perp_mhz"],
            ancilla_kind=kind)
    except ValueError as exc:
        raise ValidationError(f"system: {exc}") from None

    fv = values["field"]
    b_z = fv["b_z_g"]
    if fv["delta_mhz"] is not None:
        b_z = (params.delta0 - fv["delta_mhz"]) / params.gamma_e
    try:
        field = FieldConfig(b_z=b_z, b_e=fv["b_e_g"], b_i=fv["b_i_g"],
                            beta=fv["beta_rad"])
    except ValueError as exc:
        raise ValidationError(f"field: {exc}") from None

    rv = values["readout"]
    csr = None
    if rv["csr_c_multiplier"] is not None:
        csr = CsrConfig(rv["csr_c_multiplier"],
                        rv["csr_dead_time_us"] if rv["csr_dead_time_us"]
                        is not None else rv["dead_time_us"])
    try:
        readout = ReadoutModel.from_signal_noise(
            rv["signal_noise_over_c"], rv["dead_time_us"], csr)
        decay = DecayModel(t2=values["decay"]["t2_us"],
                           p_exp=values["decay"]["p_exp"],
                           t2_star=values["decay"]["t2_star_us"])
    except ValueError as exc:
        raise ValidationError(str(exc)) from None

    run = dict(values["run"])
    if run["mode"] not in MODES:
        raise ValidationError(f"run.mode: unknown mode {run['mode']!r}; "
                              f"choose from {', '.join(MODES)}")
    flat = {f"{s}.{k}": v for s, kv in values.items() for k, v in kv.items()
            if v is not None}
    return ExperimentConfig(params, field, readout, decay, run, flat)


def default_config() -> ExperimentConfig:
    values = {s: {k: d for k, (d, _) in kv.items()}
              for s, kv in _SECTIONS.items()}
    return _assemble(values)


def load_config(path: str | None = None, overrides=()) -> ExperimentConfig:
    """Parse, override (section.key=value) and validate a config file.

    ``path`` may be None (all defaults). Relative paths are also resolved
    against $MAGSIM_CONFIG_DIR when not found directly.
    """
    values = {s: {k: d for k, (d, _) in kv.items()}
              for s, kv in _SECTIONS.items()}

    if path is not None:
        resolved = path
        if not os.path.exists(resolved):
            env_dir = os.environ.get(ENV_CONFIG_DIR)
            if env_dir and os.path.exists(os.path.join(env_dir, path)):
                resolved = os.path.join(env_dir, path)
            else:
                raise ParseError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(resolved) as fh:
                parser.read_file(fh, source=resolved)
        except configparser.ParsingError as exc:
            line = exc.errors[0][0] if getattr(exc, "errors", None) else None
            raise ParseError(f"malformed config: {exc}", line=line) from None
        except configparser.Error as exc:
            raise ParseError(f"malformed config: {exc}") from None
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ValidationError(f"unknown section [{section}]")
            for key, text in parser.items(section):
                if key not in _SECTIONS[section]:
                    raise ValidationError(f"unknown key {section}.{key}")
                values[section][key] = _coerce(section, key, text)

    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ParseError(f"override must be section.key=value: {item!r}")
        target, text = item.split("=", 1)
        section, _, key = target.strip().partition(".")
        if section not in _SECTIONS or key not in _SECTIONS[section]:
            raise ValidationError(f"unknown key {section}.{key}")
        values[section][key] = _coerce(section, key, text.strip())

    return _assemble(values)
