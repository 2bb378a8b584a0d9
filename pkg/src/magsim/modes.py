"""Extended operating modes: maytag demodulation, spin locking, vector fields.

Maytagging alternates the sign of the sensor detuning at a chosen rate so
that only tone components at that rate accumulate conditional phase; all
others (including DC) hit the same grating rejection that filters signal
noise. Spin locking replaces the pulse train with a continuous drive whose
dressed splitting is matched to the ancilla line, exchanging polarization at
the transverse-coupling rate. Vector reconstruction combines a longitudinal
measurement with two transverse magnitudes taken with and without a known
bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentMeasurements
from .filters import NoiseTone, tone_angles
from .oracle import propagator_factory
from .spin_core import EffectiveModel

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2)


@dataclass(frozen=True)
class MaytagConfig:
    """Square-wave detuning reversal at omega_lf (MHz) with amplitude
    delta_amp (MHz), demodulating the given tone."""

    omega_lf: float
    delta_amp: float
    signal_tone: NoiseTone

    def __post_init__(self):
        if self.omega_lf <= 0:
            raise ValueError("omega_lf must be positive")


@dataclass(frozen=True)
class SpinLockConfig:
    rabi: float
    lock_time: float
    detuning_db: float = 0.0

    def __post_init__(self):
        if self.rabi <= 0:
            raise ValueError("rabi must be positive")


def maytag_block_signs(n_blocks: int, omega_lf: float,
                       block_time: float) -> np.ndarray:
    """Sign of the detuning during each block (ideal square wave)."""
    j = np.arange(1, n_blocks + 1, dtype=float)
    return np.sign(np.cos(2.0 * math.pi * omega_lf * j * block_time))


def maytag_accumulated_angle(cfg: MaytagConfig, n_blocks: int,
                             block_time: float,
                             alpha_per_gauss: float = 1.0) -> float:
    """Total conditional phase 2*sum(s_j*alpha_j) under maytag demodulation."""
    aj = tone_angles(cfg.signal_tone, n_blocks, block_time, alpha_per_gauss)
    sj = maytag_block_signs(n_blocks, cfg.omega_lf, block_time)
    return 2.0 * float(np.sum(sj * aj))


def maytag_response(cfg: MaytagConfig, freqs, n_blocks: int, block_time: float,
                    alpha_per_gauss: float = 1.0,
                    n_phases: int = 32) -> np.ndarray:
    """Worst-case (phase-maximized) demodulated phase versus tone frequency.

    DC is evaluated at its single phase; finite frequencies report the
    maximum accumulated phase over a uniform phase grid, so rejection
    figures are conservative.
    """
    out = np.empty(len(freqs))
    for i, f in enumerate(np.asarray(freqs, float)):
        phases = [0.0] if f == 0.0 else list(np.linspace(
            0.0, 2.0 * math.pi, n_phases, endpoint=False))
        best = 0.0
        for ph in phases:
            tone = NoiseTone(cfg.signal_tone.amplitude, float(f), ph)
            c2 = MaytagConfig(cfg.omega_lf, cfg.delta_amp, tone)
            best = max(best, abs(maytag_accumulated_angle(
                c2, n_blocks, block_time, alpha_per_gauss)))
        out[i] = best
    return out


def maytag_signal_oracle(params, field, cfg: MaytagConfig, n_blocks: int,
                         tau: float) -> float:
    """Exact signal with the detuning square wave and the tone injected.

    Blocks of two pi pulses are propagated with piecewise-constant fields:
    the longitudinal field alternates between the two values symmetric about
    the anti-crossing and the transverse field takes the tone's per-block
    value. Truncated (4-level) propagation, ideal pulses.
    """
    from .oracle import sensor_rotation, truncate_hamiltonian, build_hamiltonian

    block_time = 2.0 * tau
    signs = maytag_block_signs(n_blocks, cfg.omega_lf, block_time)
    j = np.arange(1, n_blocks + 1, dtype=float)
    tone_vals = cfg.signal_tone.amplitude * np.cos(
        2.0 * math.pi * cfg.signal_tone.freq * j * block_time
        + cfg.signal_tone.phase)

    bz_plus = (params.delta0 - cfg.delta_amp) / params.gamma_e
    bz_minus = (params.delta0 + cfg.delta_amp) / params.gamma_e
    from .sequences import XY8_PHASES

    pulses = {ax: sensor_rotation(ax, math.pi, 2, 2) for ax in ("x", "y")}
    prep = sensor_rotation("x", math.pi / 2.0, 2, 2)
    read = sensor_rotation("-x", math.pi / 2.0, 2, 2)

    cache = {}

    def block_u(sign, b_val, j):
        # two pulses per block, phases walking the XY8 pattern
        ax1, ax2 = XY8_PHASES[(2 * j) % 8], XY8_PHASES[(2 * j + 1) % 8]
        key = (sign, round(float(b_val), 12), ax1, ax2)
        if key not in cache:
            f = field.with_(b_z=bz_plus if sign >= 0 else bz_minus, b_e=0.0,
                            b_i=0.0)
            h = build_hamiltonian(params, f, b_perp_signed=float(b_val))
            h = truncate_hamiltonian(h, params)
            u_of_t = propagator_factory(h)
            uh, uf = u_of_t(tau / 2.0), u_of_t(tau)
            cache[key] = uh @ pulses[ax2] @ uf @ pulses[ax1] @ uh
        return cache[key]

    u = np.eye(4, dtype=complex)
    for j, (s, b) in enumerate(zip(signs, tone_vals)):
        u = block_u(s, b, j) @ u
    u = read @ u @ prep
    psi0 = np.zeros(4, complex)
    s_val = 0.0
    for a in range(2):
        psi0[:] = 0.0
        psi0[a] = 1.0
        psi = u @ psi0
        s_val += float(np.real(psi.conj() @ (np.kron(np.diag([1.0, 0.0]), I2)
                                             @ psi)))
    return s_val / 2.0


def spinlock_match(model: EffectiveModel) -> tuple[float, float]:
    """(drive amplitude at resonance, exchange rate there), both MHz.

    The carrier sits on the polarized hyperfine line, which shifts the
    matching condition to omega0 - a_par^2/(4*omega0); the exchange rate is
    the transverse-coupling difference of the conditional axes.
    """
    w0 = model.omega0_abs
    om = w0 - model.params.a_par ** 2 / (4.0 * w0)
    return om, model.x_coupling


def spinlock_signal(model: EffectiveModel, t, rate: float | None = None,
                    t1rho: float | None = 350.0) -> np.ndarray | float:
    """Analytic locked signal 0.5*(1 + cos(2*pi*rate*t)) with T1rho decay."""
    r = model.x_coupling if rate is None else rate
    t = np.asarray(t, float)
    env = np.exp(-t / t1rho) if t1rho else 1.0
    out = 0.5 * (1.0 + env * np.cos(2.0 * math.pi * r * t))
    return float(out) if out.ndim == 0 else out


def _lock_hamiltonian(model: EffectiveModel, rabi: float,
                      carrier_offset: float = 0.0) -> np.ndarray:
    """Rotating-frame two-manifold Hamiltonian with the drive, 4 levels.

    Basis: sensor {0,-1} (x) ancilla manifold; blocks are the conditional
    Hamiltonians; the carrier sits on the polarized line plus the offset.
    """
    p = model.params
    shift = model.n0[2] + model.n1[2] - (model.q - p.a_par / 2.0)  # A-perp^2 term
    n0, n1 = model.n0, model.n1
    blk0 = 0.5 * (model.q - shift) * I2 + n0[0] * SX + n0[2] * SZ
    det = -carrier_offset  # line carrier: (0,+1)->(-1,+1) detuning
    blk1 = ((det + 0.5 * (model.q - p.a_par + shift)) * I2
            + n1[0] * SX + n1[2] * SZ)
    h = np.zeros((4, 4), complex)
    h[0:2, 0:2] = blk0
    h[2:4, 2:4] = blk1
    return h + 0.5 * rabi * np.kron(SX, I2)


def spinlock_signal_oracle(model: EffectiveModel, cfg: SpinLockConfig,
                           times=None) -> np.ndarray:
    """Locked-sensor population from the effective rotating-frame model.

    Prepares the sensor along the drive, evolves for each lock time and
    reads out along the preparation axis; the ancilla starts polarized.
    ``detuning_db`` rescales the drive away from the matched amplitude.
    """
    om_match, _ = spinlock_match(model)
    rabi = cfg.rabi * 10.0 ** (cfg.detuning_db / 20.0)
    h = _lock_hamiltonian(model, rabi)
    u_of_t = propagator_factory(h)
    c, s = math.cos(math.pi / 4.0), math.sin(math.pi / 4.0)
    prep = np.kron(np.array([[c, -s], [s, c]]), I2)
    read = np.kron(np.array([[c, s], [-s, c]]), I2)
    ts = np.asarray([cfg.lock_time] if times is None else times, float)
    psi0 = np.zeros(4, complex)
    psi0[0] = 1.0
    proj = np.kron(np.diag([1.0, 0.0]), I2)
    out = np.empty(len(ts))
    for i, t in enumerate(ts):
        psi = (read @ u_of_t(float(t)) @ prep) @ psi0
        out[i] = float(np.real(psi.conj() @ (proj @ psi)))
    return out


def spinlock_resonance_curve(model: EffectiveModel, rabis,
                             lock_times) -> np.ndarray:
    """Time-averaged transfer depth versus drive amplitude."""
    ts = np.asarray(lock_times, float)
    out = np.empty(len(rabis))
    for i, om in enumerate(np.asarray(rabis, float)):
        cfg = SpinLockConfig(rabi=float(om), lock_time=float(ts[-1]))
        s = spinlock_signal_oracle(model, cfg, ts)
        out[i] = float(np.mean(1.0 - s))
    return out


def vector_reconstruct(b_par: float, b_perp: float, b_perp_with_bias: float,
                       bias_magnitude: float, bias_direction: float = 0.0,
                       tol: float = 1e-6) -> tuple[float, float | None]:
    """Polar and azimuthal angles of the unknown field.

    ``theta = arctan(B_perp/B_par)``; the azimuth relative to the bias
    direction follows from the law of cosines applied to the two transverse
    magnitudes. The sign of the azimuth is not determined by magnitudes
    alone, so the returned phi is the non-negative branch (None when the
    transverse component vanishes).
    """
    if b_par == 0.0:
        raise ValueError("b_par must be nonzero")
    if bias_magnitude <= 0.0:
        raise ValueError("bias magnitude must be positive")
    theta = math.atan2(b_perp, b_par)
    if b_perp == 0.0:
        return theta, None
    cos_phi = ((b_perp_with_bias ** 2 - b_perp ** 2 - bias_magnitude ** 2)
               / (2.0 * b_perp * bias_magnitude))
    if abs(cos_phi) > 1.0 + tol:
        raise InconsistentMeasurements(
            f"no azimuth satisfies the measurements (cos phi = {cos_phi:g})")
    phi = math.acos(min(max(cos_phi, -1.0), 1.0))
    return theta, bias_direction + phi


def forward_transverse_sum(b_perp: float, phi: float,
                           bias_magnitude: float) -> float:
    """Magnitude of the vector sum of the unknown transverse field and the bias."""
    return math.sqrt(b_perp ** 2 + bias_magnitude ** 2
                     + 2.0 * b_perp * bias_magnitude * math.cos(phi))
