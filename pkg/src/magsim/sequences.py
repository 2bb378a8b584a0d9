"""Pulse-sequence timelines: CPMG/XY8 builders and delay supersampling.

A sequence is an ordered tuple of delays and pulses acting on the sensor.
``tau`` always denotes the inter-pulse period (pulse center to pulse center);
free-evolution segments are shortened by the pulse duration so the period is
kept. Half-periods pad both ends, and preparation/readout pi/2 pulses are
included so a sequence is a complete experiment.

Supersampling: hardware delay grids quantize ``tau``. Concatenating blocks
that alternate between two adjacent grid delays realizes an effective delay
in between; the long blocks are spread as evenly as possible, which keeps
the construction error quadratic in the grid step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

from .errors import InvalidPlan, InvalidTiming

XY8_PHASES = ("x", "y", "x", "y", "y", "x", "y", "x")


@dataclass(frozen=True)
class Delay:
    duration: float


@dataclass(frozen=True)
class Pulse:
    axis: str
    angle: float
    duration: float = 0.0
    rabi: float | None = None


@dataclass(frozen=True)
class PulseSequence:
    elements: tuple
    n_pi: int
    tau: float
    label: str = ""

    @property
    def total_time(self) -> float:
        return sum(e.duration for e in self.elements)

    @property
    def duty_cycle(self) -> float:
        """Ratio of pi-pulse duration to the inter-pulse period."""
        t_pi = max((e.duration for e in self.elements
                    if isinstance(e, Pulse) and abs(e.angle - math.pi) < 1e-12),
                   default=0.0)
        return t_pi / self.tau if self.tau > 0 else 0.0

    def to_csv(self, path):
        """Write the timeline as CSV (t_start_us, kind, axis, angle_rad, duration_us)."""
        lines = ["t_start_us,kind,axis,angle_rad,duration_us"]
        t = 0.0
        for e in self.elements:
            if isinstance(e, Delay):
                lines.append(f"{t!r},delay,,,{e.duration!r}")
            else:
                lines.append(f"{t!r},pulse,{e.axis},{e.angle!r},{e.duration!r}")
            t += e.duration
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")


def _pi_train(phases, tau, t_pi, rabi):
    """Delays and pi pulses with period tau and half-period padding."""
    if tau <= t_pi:
        raise InvalidTiming(f"tau={tau} must exceed the pulse duration {t_pi}")
    if t_pi < 0:
        raise InvalidTiming("pulse duration must be non-negative")
    gap_half = tau / 2.0 - t_pi / 2.0
    gap_full = tau - t_pi
    elems = [Delay(gap_half)]
    for i, ax in enumerate(phases):
        elems.append(Pulse(ax, math.pi, t_pi, rabi))
        elems.append(Delay(gap_full if i < len(phases) - 1 else gap_half))
    return elems


def _wrap_projection(elems, t_pi2=0.0, rabi=None):
    prep = Pulse("x", math.pi / 2.0, t_pi2, rabi)
    read = Pulse("-x", math.pi / 2.0, t_pi2, rabi)
    return [prep] + elems + [read]


def build_cpmg(n_pulses: int, tau: float, t_pi: float = 0.0,
               rabi: float | None = None, projection: bool = True,
               label: str = "") -> PulseSequence:
    """CPMG train of ``n_pulses`` pi pulses about y, spaced by ``tau``."""
    if n_pulses < 1:
        raise InvalidTiming("need at least one pulse")
    elems = _pi_train(["y"] * n_pulses, tau, t_pi, rabi)
    if projection:
        elems = _wrap_projection(elems, 0.0 if t_pi == 0 else t_pi / 2.0, rabi)
    return PulseSequence(tuple(elems), n_pulses, tau,
                         label or f"cpmg-{n_pulses}")


def build_xy8(cycles: int, tau: float, t_pi: float = 0.0,
              rabi: float | None = None, projection: bool = True) -> PulseSequence:
    """XY8-N sequence: N cycles of the 8-pulse x/y phase pattern."""
    if cycles < 1:
        raise InvalidTiming("need at least one cycle")
    phases = XY8_PHASES * cycles
    elems = _pi_train(phases, tau, t_pi, rabi)
    if projection:
        elems = _wrap_projection(elems, 0.0 if t_pi == 0 else t_pi / 2.0, rabi)
    return PulseSequence(tuple(elems), 8 * cycles, tau, f"xy8-{cycles}")


def bresenham_pattern(p: int, n: int) -> tuple:
    """Binary word of length n with p ones spread as evenly as possible."""
    if not 0 <= p <= n or n < 1:
        raise InvalidPlan(f"need 0 <= p <= n, got p={p}, n={n}")
    word = []
    acc = 0
    for j in range(1, n + 1):
        nxt = j * p // n
        word.append(1 if nxt > acc else 0)
        acc = nxt
    return tuple(word)


@dataclass(frozen=True)
class InterpolationPlan:
    """Choice of p long blocks among n for delay supersampling."""

    p: int
    n: int
    pattern: tuple = dfield(default=())

    def __post_init__(self):
        if not 0 <= self.p <= self.n or self.n < 1:
            raise InvalidPlan(f"need 0 <= p <= n, got p={self.p}, n={self.n}")
        if not self.pattern:
            object.__setattr__(self, "pattern", bresenham_pattern(self.p, self.n))
        if len(self.pattern) != self.n or sum(self.pattern) != self.p:
            raise InvalidPlan("pattern must have length n with exactly p ones")

    @property
    def fraction(self) -> float:
        return self.p / self.n


def interpolated_sequence(plan: InterpolationPlan, base_tau: float, dtau: float,
                          t_pi: float = 0.0, rabi: float | None = None,
                          projection: bool = True) -> PulseSequence:
    """Concatenate n single-pulse blocks at base_tau or base_tau + dtau.

    Each block is (tau/2, pi, tau/2) with the pulse axes cycling through
    the XY8 pattern; the realized mean delay is ``base_tau + (p/n) * dtau``.
    """
    taus = [base_tau + (dtau if bit else 0.0) for bit in plan.pattern]
    for t in taus:
        if t <= t_pi:
            raise InvalidTiming(f"block delay {t} not above pulse duration {t_pi}")
    elems = []
    for j, t in enumerate(taus):
        gap = (t - t_pi) / 2.0
        axis = XY8_PHASES[j % 8]
        elems += [Delay(gap), Pulse(axis, math.pi, t_pi, rabi), Delay(gap)]
    if projection:
        elems = _wrap_projection(elems, 0.0 if t_pi == 0 else t_pi / 2.0, rabi)
    tau_eff = base_tau + plan.fraction * dtau
    return PulseSequence(tuple(elems), plan.n, tau_eff,
                         f"interp-{plan.p}/{plan.n}")


def interpolation_error(n_pulses: int, alpha: float, dtau: float) -> float:
    """Upper-bound scale for the supersampling error.

    ``(n_pulses*alpha)^2 * dtau^2 * (2 - alpha^2/2)^2 / 4`` with ``dtau``
    expressed as a fraction of the delay; only the quadratic scalings in
    pulse number and grid step are load-bearing.
    """
    return 0.25 * (n_pulses * alpha) ** 2 * dtau ** 2 * (2.0 - alpha ** 2 / 2.0) ** 2
