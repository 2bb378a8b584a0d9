"""Shot-noise sensitivity, readout models and dynamic-range bookkeeping.

The readout noise is injected as the measured ratio (spin projection noise
over C-factor); with projection noise 1/2 at the half-fringe bias this fixes
the effective C without inventing separately unpublished quantities.
Sensitivities are quoted in uT/sqrt(Hz); internally Gauss*sqrt(us) is used
(1 G*sqrt(us) = 0.1 uT/sqrt(Hz)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CsrNotConfigured, DegenerateFrame
from .spin_core import EffectiveModel

G_SQRT_US_TO_UT_SQRT_HZ = 0.1
PROJECTION_NOISE = 0.5  # sqrt(S(1-S)) at the S = 1/2 bias


@dataclass(frozen=True)
class CsrConfig:
    """Spin-to-charge readout: C multiplier and its dead time (us)."""

    c_multiplier: float
    dead_time: float


@dataclass(frozen=True)
class ReadoutModel:
    c_factor: float = PROJECTION_NOISE / 17.27
    dead_time: float = 1.3
    csr: CsrConfig | None = None

    def __post_init__(self):
        if self.c_factor <= 0:
            raise ValueError("c_factor must be positive")
        if self.dead_time < 0:
            raise ValueError("dead_time must be non-negative")

    @classmethod
    def from_signal_noise(cls, noise_over_c: float, dead_time: float = 1.3,
                          csr: CsrConfig | None = None) -> "ReadoutModel":
        """Build from the measured projection-noise-to-C ratio."""
        return cls(PROJECTION_NOISE / noise_over_c, dead_time, csr)


@dataclass(frozen=True)
class DecayModel:
    """Coherence times (us) and the stretching exponent of the decay envelope."""

    t2: float = 350.0
    p_exp: float = 1.0
    t2_star: float = 1.16

    def __post_init__(self):
        if not self.t2 > self.t2_star > 0:
            raise ValueError("need t2 > t2_star > 0")
        if self.p_exp <= 0:
            raise ValueError("p_exp must be positive")

    def envelope(self, t: float, coherence_time: float | None = None) -> float:
        tc = self.t2 if coherence_time is None else coherence_time
        return math.exp(-((t / tc) ** self.p_exp))


def sensitivity(model: EffectiveModel, decay: DecayModel, readout: ReadoutModel,
                t: float) -> float:
    """Lock-in DC sensitivity, uT/sqrt(Hz).

    ``pi*Delta*exp((t/T2)^p)*sqrt(t + t_d) / (C*gamma_e*A_perp*F*t)``; the
    interrogation time t is in us.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    p = model.params
    eta = (math.pi * abs(model.delta) * math.exp((t / decay.t2) ** decay.p_exp)
           * math.sqrt(t + readout.dead_time)
           / (readout.c_factor * p.gamma_e * abs(p.a_perp)
              * abs(model.f_factor) * t))
    return eta * G_SQRT_US_TO_UT_SQRT_HZ


def optimal_time(model: EffectiveModel, decay: DecayModel,
                 readout: ReadoutModel, tol: float = 1e-4) -> float:
    """Interrogation time minimizing the sensitivity (golden section)."""
    lo, hi = decay.t2 / 10.0, 3.0 * decay.t2
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc = sensitivity(model, decay, readout, c)
    fd = sensitivity(model, decay, readout, d)
    while (b - a) > tol * decay.t2:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = sensitivity(model, decay, readout, c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = sensitivity(model, decay, readout, d)
    return 0.5 * (a + b)


def ramsey_sensitivity(readout: ReadoutModel, t: float,
                       decay: DecayModel | None = None) -> float:
    """Free-evolution DC sensitivity, uT/sqrt(Hz).

    Without a decay model this is the textbook ``1/(C*gamma_e*sqrt(t))``.
    With one, the same dead-time and dephasing bookkeeping as the lock-in
    formula applies: ``exp((t/T2*)^p)*sqrt(t + t_d)/(C*gamma_e*t)``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    gamma_e = 2.8
    if decay is None:
        eta = 1.0 / (readout.c_factor * gamma_e * math.sqrt(t))
    else:
        eta = (math.exp((t / decay.t2_star) ** decay.p_exp)
               * math.sqrt(t + readout.dead_time)
               / (readout.c_factor * gamma_e * t))
    return eta * G_SQRT_US_TO_UT_SQRT_HZ


def min_field(eta: float, m: int, t: float, t_d: float = 0.0) -> float:
    """Smallest detectable field (uT) after m repetitions of duration t+t_d (us)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    seconds = m * (t + t_d) * 1e-6
    return eta / math.sqrt(seconds)


def noise_rejection_gain(t2: float, omega_n: float, t2_star: float) -> float:
    """Shot-noise-repetition gain sqrt(T2*omega_n), capped at sqrt(T2/T2*)."""
    return min(math.sqrt(t2 * omega_n), math.sqrt(t2 / t2_star))


def csr_gain(model: EffectiveModel, decay: DecayModel, readout: ReadoutModel,
             t: float) -> float:
    """Sensitivity ratio (new/old) when switching to charge-state readout."""
    if readout.csr is None:
        raise CsrNotConfigured("readout.csr is not set")
    base = sensitivity(model, decay, readout, t)
    boosted = ReadoutModel(readout.c_factor * readout.csr.c_multiplier,
                           readout.csr.dead_time)
    return sensitivity(model, decay, boosted, t) / base


@dataclass(frozen=True)
class DynamicRangeReport:
    tilt_loss: float
    pulse_infidelity: float
    rwa_ok: bool
    b_t: float | None = None
    b_t_sigma: float | None = None


def dynamic_range(model: EffectiveModel, b_perp: float, rabi: float,
                  contrast_data=None, seed: int = 0) -> DynamicRangeReport:
    """Contrast-loss budget at an operating field, optionally fitting data.

    Tilt loss is Delta^2/(Delta^2 + (gamma_e*B)^2); pulse infidelity is
    (gamma_e*B)^2/(2*rabi^2); the drive obeys the rotating-wave bound when
    rabi < |Delta|/5. If a contrast-vs-field series is supplied its sigmoid
    turning point is extracted.
    """
    if rabi <= 0:
        raise ValueError("rabi must be positive")
    gb = model.params.gamma_e * b_perp
    tilt = model.delta ** 2 / (model.delta ** 2 + gb ** 2)
    infid = gb ** 2 / (2.0 * rabi ** 2)
    rwa_ok = rabi < abs(model.delta) / 5.0
    b_t = b_t_sigma = None
    if contrast_data is not None:
        from .analysis import chi2_fit

        x = np.asarray(contrast_data.x, float)
        y = np.asarray(contrast_data.s, float)
        init = [float(y.max()), float(x[len(x) // 2]),
                max(float(x[-1] - x[0]) / 10.0, 1e-3)]
        fit = chi2_fit(x, y, "sigmoid", init)
        b_t = float(fit.params_opt[1])
        if fit.param_sigmas is not None:
            b_t_sigma = float(fit.param_sigmas[1])
    return DynamicRangeReport(tilt, infid, rwa_ok, b_t, b_t_sigma)


def compensated_preparation(b0_perp: float, delta: float,
                            gamma_e: float = 2.8) -> float:
    """Preparation flip angle pi/2 - arctan(gamma_e*B0/Delta) absorbing the tilt."""
    if abs(delta) < 1e-9:
        raise DegenerateFrame("delta is degenerate")
    return math.pi / 2.0 - math.atan(gamma_e * b0_perp / delta)
