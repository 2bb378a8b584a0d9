"""Experiment orchestration: one runner per CLI mode, all emitting ResultTable."""

from __future__ import annotations

import math

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .filters import NoiseTone, filter_cutoff, ramsey_cutoff, transfer_kernel
from .metrology import ramsey_sensitivity, sensitivity
from .modes import (MaytagConfig, maytag_response, spinlock_match,
                    spinlock_resonance_curve)
from .oracle import InitialState, find_resonance, run_fringe, scan_delay
from .sequences import InterpolationPlan, interpolated_sequence
from .signal_model import linear_regime_flags, overlap_signal
from .spin_core import derive_effective, field_for_delta, total_transverse
from .tables import ResultTable, config_hash


def _base_metadata(cfg: ExperimentConfig) -> dict:
    model = derive_effective(cfg.system, cfg.field)
    return {
        "artifact_version": __version__,
        "mode": cfg.mode,
        "seed": cfg.seed,
        "config_hash": config_hash(cfg.raw),
        "delta_mhz": repr(model.delta),
        "omega0_mhz": repr(model.omega0),
    }


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    try:
        runner = _RUNNERS[cfg.mode]
    except KeyError:
        raise ValueError(f"unknown mode {cfg.mode!r}") from None
    table = runner(cfg)
    table.metadata.update(_base_metadata(cfg))
    return table


def _run_xy8_fringe(cfg: ExperimentConfig) -> ResultTable:
    params, field = cfg.system, cfg.field
    model = derive_effective(params, field)
    tau = find_resonance(params, field, n_probe=cfg.run["n_probe_pulses"])
    cycles = np.arange(1, cfg.run["n_max_cycles"] + 1, cfg.run["cycle_step"])
    n_pulses = 8 * cycles
    s_oracle = run_fringe(params, field, tau, n_pulses, InitialState("mixed"))
    s_analytic = overlap_signal(model, n_pulses)
    return ResultTable(
        {"n_pulses": n_pulses, "s_analytic": s_analytic, "s_oracle": s_oracle},
        {"tau_us": repr(tau)})


def _run_tau_scan(cfg: ExperimentConfig) -> ResultTable:
    params, field = cfg.system, cfg.field
    model = derive_effective(params, field)
    tau0 = model.resonance_delay()
    w = cfg.run["tau_window"]
    taus = np.linspace((1 - w) * tau0, (1 + w) * tau0, cfg.run["tau_points"])
    sig = scan_delay(params, field, taus, cfg.run["n_probe_pulses"])
    return ResultTable({"tau_us": taus, "signal": sig},
                       {"tau_half_period_us": repr(tau0)})


def _run_field_sweep(cfg: ExperimentConfig) -> ResultTable:
    params, field = cfg.system, cfg.field
    b_e = np.linspace(0.0, cfg.run["b_e_max_g"], cfg.run["b_e_points"])
    n = cfg.run["n_pulses"]
    b_perp = np.empty_like(b_e)
    rate = np.empty_like(b_e)
    sig = np.empty_like(b_e)
    for i, be in enumerate(b_e):
        f = field.with_(b_e=float(be))
        b_perp[i], _ = total_transverse(f)
        if b_perp[i] == 0.0:
            rate[i], sig[i] = 0.0, 1.0
        else:
            m = derive_effective(params, f)
            rate[i] = m.fringe_rate_per_pulse
            sig[i] = overlap_signal(m, n)
    flags = linear_regime_flags(field, b_e).astype(int)
    return ResultTable({"b_e_g": b_e, "b_perp_g": b_perp,
                        "rate_rad_per_pulse": rate, "signal": sig,
                        "linear_regime": flags})


def _run_filter_map(cfg: ExperimentConfig) -> ResultTable:
    params, field = cfg.system, cfg.field
    model = derive_effective(params, field)
    n = cfg.run["n_pulses"]
    block_time = 2.0 * model.resonance_delay()
    n_blocks = n // 2
    freqs = np.linspace(cfg.run["freq_min_mhz"], cfg.run["freq_max_mhz"],
                        cfg.run["freq_points"])
    resp = transfer_kernel(freqs, n_blocks, block_time)
    cut = filter_cutoff(n_blocks * block_time, n_blocks)
    return ResultTable(
        {"freq_mhz": freqs, "response": resp},
        {"cutoff_mhz": repr(cut),
         "ramsey_cutoff_mhz": repr(ramsey_cutoff(cfg.decay.t2_star))})


def _run_sensitivity_table(cfg: ExperimentConfig) -> ResultTable:
    params, field = cfg.system, cfg.field
    deltas = [float(tok) for tok in
              str(cfg.run["delta_list_mhz"]).split(",") if tok.strip()]
    t = cfg.run["t_us"]
    eta = np.empty(len(deltas))
    eta_r = np.empty(len(deltas))
    rwa = np.empty(len(deltas), dtype=int)
    for i, d in enumerate(deltas):
        f = field_for_delta(d, params, b_e=field.b_e, b_i=field.b_i,
                            beta=field.beta)
        m = derive_effective(params, f)
        eta[i] = sensitivity(m, cfg.decay, cfg.readout, t)
        eta_r[i] = ramsey_sensitivity(cfg.readout, cfg.decay.t2_star, cfg.decay)
        rwa[i] = int(abs(m.omega0) < abs(d) / 5.0)
    return ResultTable(
        {"delta_mhz": np.array(deltas), "t_us": np.full(len(deltas), t),
         "eta_ut_sqrt_hz": eta, "eta_ramsey_ut_sqrt_hz": eta_r,
         "rwa_ok": rwa})


def _run_maytag(cfg: ExperimentConfig) -> ResultTable:
    params, field = cfg.system, cfg.field
    f_delta = field_for_delta(cfg.run["maytag_delta_amp_mhz"], params,
                              b_e=field.b_e, b_i=field.b_i, beta=field.beta)
    model = derive_effective(params, f_delta)
    om_lf = cfg.run["maytag_omega_lf_mhz"]
    block_time = 2.0 * model.resonance_delay()
    blocks_per_cycle = max(int(round(1.0 / (om_lf * block_time))), 2)
    n_blocks = blocks_per_cycle * cfg.run["maytag_cycles"]
    amp = cfg.run["tone_amplitude_g"]
    tone = NoiseTone(amp, om_lf)
    mcfg = MaytagConfig(om_lf, cfg.run["maytag_delta_amp_mhz"], tone)
    freqs = np.linspace(0.0, 3.0 * om_lf, cfg.run["freq_points"])
    resp = maytag_response(mcfg, freqs, n_blocks, block_time,
                           model.rate_per_gauss)
    return ResultTable(
        {"freq_mhz": freqs, "response_rad": resp},
        {"omega_lf_mhz": repr(om_lf), "n_blocks": n_blocks,
         "block_time_us": repr(block_time)})


def _run_spinlock(cfg: ExperimentConfig) -> ResultTable:
    params, field = cfg.system, cfg.field
    model = derive_effective(params, field)
    rabis = np.linspace(cfg.run["rabi_min_mhz"], cfg.run["rabi_max_mhz"],
                        cfg.run["rabi_points"])
    times = np.linspace(2.0, cfg.run["lock_time_us"], 30)
    depth = spinlock_resonance_curve(model, rabis, times)
    om_match, rate = spinlock_match(model)
    return ResultTable(
        {"rabi_mhz": rabis, "transfer_depth": depth},
        {"omega_match_mhz": repr(om_match), "exchange_rate_mhz": repr(rate),
         "omega0_abs_mhz": repr(model.omega0_abs)})


def _run_vector(cfg: ExperimentConfig) -> ResultTable:
    from .modes import vector_reconstruct

    theta, phi = vector_reconstruct(
        cfg.run["b_par_g"], cfg.run["b_perp_g"],
        cfg.run["b_perp_with_bias_g"], cfg.run["bias_g"])
    phi_val = math.nan if phi is None else phi
    return ResultTable(
        {"theta_rad": np.array([theta]), "phi_rad": np.array([phi_val])},
        {"phi_ambiguity": "azimuth sign is unresolved (+/- phi)"})


def _run_interp_demo(cfg: ExperimentConfig) -> ResultTable:
    params, field = cfg.system, cfg.field
    from .oracle import run_sequence

    tau_star = find_resonance(params, field,
                              n_probe=8 * cfg.run["interp_cycles"])
    dtau = cfg.run["interp_dtau_ns"] * 1e-3
    tau_grid = math.floor(tau_star / dtau) * dtau
    n_sub = cfg.run["interp_n_blocks"]
    n_pulses = 8 * cfg.run["interp_cycles"]
    init = InitialState("mixed")
    tau_eff = np.empty(n_sub + 1)
    s_interp = np.empty(n_sub + 1)
    s_ideal = np.empty(n_sub + 1)
    for p in range(n_sub + 1):
        plan = InterpolationPlan(p, n_sub)
        seq = interpolated_sequence(plan, tau_grid, dtau)
        # repeat the supersampled word to reach the requested pulse count
        reps = max(n_pulses // n_sub, 1)
        if reps > 1:
            body = seq.elements[1:-1] * reps
            seq = type(seq)((seq.elements[0],) + body + (seq.elements[-1],),
                            plan.n * reps, seq.tau, seq.label)
        tau_eff[p] = tau_grid + plan.fraction * dtau
        s_interp[p] = run_sequence(seq, params, field, init, level="truncated")
        s_ideal[p] = run_fringe(params, field, tau_eff[p],
                                np.array([plan.n * reps]), init,
                                level="truncated")[0]
    return ResultTable(
        {"tau_eff_us": tau_eff, "s_interp": s_interp, "s_ideal": s_ideal},
        {"tau_grid_us": repr(tau_grid), "dtau_us": repr(dtau),
         "n_pulses": n_pulses})


_RUNNERS = {
    "xy8_fringe": _run_xy8_fringe,
    "tau_scan": _run_tau_scan,
    "field_sweep": _run_field_sweep,
    "filter_map": _run_filter_map,
    "sensitivity_table": _run_sensitivity_table,
    "maytag": _run_maytag,
    "spinlock": _run_spinlock,
    "vector": _run_vector,
    "interp_demo": _run_interp_demo,
}
