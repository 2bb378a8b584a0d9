"""Noise filtering of the lock-in protocol and the free-evolution reference.

A slow tone riding on the transverse field contributes a per-block angle
proportional to its instantaneous value; blocks interfere destructively
unless the tone is slower than the inverse sequence time. The signed,
normalized transfer kernel is a Dirichlet (Bragg-grating) factor whose
first zero defines the filter cutoff; the phase-averaged signal depth is
what an unsynchronized experiment measures.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NoZeroFound, RegimeWarning


@dataclass(frozen=True)
class NoiseTone:
    """Single transverse tone: amplitude (G), frequency (MHz), phase (rad)."""

    amplitude: float
    freq: float
    phase: float = 0.0

    def __post_init__(self):
        if self.freq < 0:
            raise ValueError("freq must be non-negative")


@dataclass
class FilterCurve:
    """Normalized signed response on a frequency grid, with its first zero."""

    freqs: np.ndarray
    response: np.ndarray
    cutoff: float

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# cutoff_mhz = {self.cutoff!r}\n")
            fh.write("freq_mhz,response\n")
            for f, r in zip(self.freqs, self.response):
                fh.write(f"{f!r},{r!r}\n")


def tone_angles(tone: NoiseTone, n_blocks: int, block_time: float,
                alpha_per_gauss: float = 1.0, omega0: float | None = None,
                t2: float | None = None) -> np.ndarray:
    """Per-block conditional angles alpha_j for a slow tone.

    Samples the tone at the block boundaries j*block_time (j = 1..L), the
    discretization under which the closed-form grating response is exact.
    Warns when the tone is outside the 1/T2 < f < omega0/2 validity band.
    """
    if omega0 is not None and tone.freq > abs(omega0) / 2.0:
        warnings.warn("tone frequency is not slow compared to the ancilla "
                      "line; piecewise treatment degrades", RegimeWarning,
                      stacklevel=2)
    if t2 is not None and tone.freq > 0 and tone.freq < 1.0 / t2:
        warnings.warn("tone is slower than 1/T2; it is effectively DC over "
                      "one sequence", RegimeWarning, stacklevel=2)
    j = np.arange(1, n_blocks + 1, dtype=float)
    alpha = alpha_per_gauss * tone.amplitude
    return alpha * np.cos(2.0 * math.pi * tone.freq * j * block_time + tone.phase)


def filter_response(alpha: float, n_blocks: int, l_p: float,
                    phase: float = 0.0) -> float:
    """Closed-form signal for a tone completing a half oscillation in l_p blocks.

    Evaluates cos(2*alpha*cos(pi(L+1)/2Lp + phase) * sin(pi L/2Lp)/sin(pi/2Lp)),
    identical to cos(2*sum alpha_j) for the sampled tone.
    """
    if n_blocks < 1 or l_p <= 0:
        raise ValueError("need n_blocks >= 1 and l_p > 0")
    a = math.pi / (2.0 * l_p)
    grating = math.sin(n_blocks * a) / math.sin(a)
    envelope = math.cos((n_blocks + 1) * a + phase)
    return math.cos(2.0 * alpha * envelope * grating)


def blocks_per_half_period(freq: float, block_time: float) -> float:
    """l_p such that a tone at ``freq`` advances pi/l_p per block."""
    if freq <= 0:
        raise ValueError("freq must be positive")
    return 1.0 / (2.0 * freq * block_time)


def phase_averaged_depth(alpha: float, n_blocks: int, l_p: float,
                         n_phases: int = 64) -> float:
    """Fringe depth 1 - <S>_phase, averaged over uniform tone phases."""
    phases = np.arange(n_phases) * (2.0 * math.pi / n_phases)
    vals = [filter_response(alpha, n_blocks, l_p, p) for p in phases]
    return 1.0 - float(np.mean(vals))


def transfer_kernel(freqs, n_blocks: int, block_time: float) -> np.ndarray:
    """Signed normalized transfer of the block-sampled tone (Dirichlet kernel).

    Equals sum_j cos(...)/L at the symmetric phase; response(0) = 1, first
    zero at 1/(L*block_time), sign-alternating side lobes.
    """
    f = np.asarray(freqs, float)
    a = 2.0 * math.pi * f * block_time  # phase step per block
    out = np.ones_like(f)
    nz = a != 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        out[nz] = (np.sin(n_blocks * a[nz] / 2.0)
                   / (n_blocks * np.sin(a[nz] / 2.0)))
    return out


def filter_curve(freqs, n_blocks: int, block_time: float) -> FilterCurve:
    f = np.asarray(freqs, float)
    resp = transfer_kernel(f, n_blocks, block_time)
    cut = filter_cutoff(n_blocks * block_time, n_blocks)
    return FilterCurve(f, resp, cut)


def filter_cutoff(total_time: float, n_blocks: int = 64,
                  band_factor: float = 4.0) -> float:
    """First zero crossing of the transfer kernel, by sign-change bisection."""
    if total_time <= 0:
        raise ValueError("total_time must be positive")
    block_time = total_time / n_blocks
    grid = np.linspace(0.0, band_factor / total_time, 512)
    resp = transfer_kernel(grid, n_blocks, block_time)
    sign_change = np.nonzero(np.diff(np.sign(resp)) != 0)[0]
    if len(sign_change) == 0:
        raise NoZeroFound("no zero crossing in the scanned band")
    lo, hi = grid[sign_change[0]], grid[sign_change[0] + 1]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if transfer_kernel([lo], n_blocks, block_time)[0] * \
           transfer_kernel([mid], n_blocks, block_time)[0] <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def ramsey_filter(omega: float, t2_star: float, normalized: bool = False) -> float:
    """Free-evolution noise filter [sin(pi*omega*T2*)/omega]^2."""
    if omega <= 0:
        lim = (math.pi * t2_star) ** 2
        return 1.0 if normalized else lim
    val = (math.sin(math.pi * omega * t2_star) / omega) ** 2
    return val / (math.pi * t2_star) ** 2 if normalized else val


def ramsey_cutoff(t2_star: float) -> float:
    """First zero of the free-evolution filter: 1/T2* (MHz)."""
    if t2_star <= 0:
        raise ValueError("t2_star must be positive")
    return 1.0 / t2_star
