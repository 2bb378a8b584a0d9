"""Closed-form magnetometry fringes versus pulse number and applied field."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

import numpy as np

from .spin_core import (EffectiveModel, FieldConfig, SpinSystemParams,
                        derive_effective, in_linear_regime, total_transverse)


@dataclass
class FringeSeries:
    """Labeled sweep of signal values in [0, 1]."""

    x: np.ndarray
    s: np.ndarray
    x_label: str = "x"
    s_label: str = "signal"

    def __post_init__(self):
        self.x = np.asarray(self.x, float)
        self.s = np.asarray(self.s, float)
        if self.x.shape != self.s.shape:
            raise ValueError("x and s must have equal length")
        if len(self.x) > 1 and not np.all(np.diff(self.x) > 0):
            raise ValueError("x must be strictly increasing")
        if len(self.s) and (self.s.min() < -1e-9 or self.s.max() > 1 + 1e-9):
            raise ValueError("signal values must lie in [0, 1]")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"{self.x_label},{self.s_label}\n")
            for xv, sv in zip(self.x, self.s):
                fh.write(f"{xv!r},{sv!r}\n")


def analytic_signal(alpha: float, n_pulses) -> np.ndarray | float:
    """Leading-order fringe 0.5*(1 + cos(N*alpha))."""
    n = np.asarray(n_pulses, float)
    out = 0.5 * (1.0 + np.cos(n * alpha))
    return float(out) if out.ndim == 0 else out


def overlap_signal(model: EffectiveModel, n_pulses,
                   per_pulse: float | None = None) -> np.ndarray | float:
    """Propagator-overlap fringe 1 - sin^2(N a/2) cos^2(a/2).

    ``a`` defaults to the model's per-pulse fringe rate, the quantity the
    exact propagation realizes at the dip; it reduces to ``analytic_signal``
    for small angles, differing by at most a^2/4.
    """
    a = model.fringe_rate_per_pulse if per_pulse is None else per_pulse
    n = np.asarray(n_pulses, float)
    out = 1.0 - np.sin(n * a / 2.0) ** 2 * math.cos(a / 2.0) ** 2
    return float(out) if out.ndim == 0 else out


def fringe_vs_field(params: SpinSystemParams, field: FieldConfig,
                    b_e_values, n_pulses: int) -> FringeSeries:
    """Overlap-form signal at fixed pulse number versus the applied field.

    Each point recombines the applied field with the configured intrinsic
    misalignment before deriving the effective model.
    """
    b_e = np.asarray(b_e_values, float)
    s = np.empty(len(b_e))
    for i, be in enumerate(b_e):
        f = field.with_(b_e=float(be))
        if total_transverse(f)[0] == 0.0:
            s[i] = 1.0
        else:
            s[i] = overlap_signal(derive_effective(params, f), n_pulses)
    return FringeSeries(b_e, s, x_label="b_e_G", s_label="signal")


def field_response_slope(params: SpinSystemParams, field: FieldConfig,
                         n_pulses: int, db: float = 1e-4) -> float:
    """Numerical dS/dB_e at the configured operating point."""
    lo = fringe_vs_field(params, field, [field.b_e - db, field.b_e + db],
                         n_pulses)
    return float((lo.s[1] - lo.s[0]) / (2.0 * db))


def linear_regime_flags(field: FieldConfig, b_e_values) -> np.ndarray:
    """Linear-regime flag for each applied-field value."""
    return np.array([in_linear_regime(field.with_(b_e=float(b)))
                     for b in np.asarray(b_e_values, float)])
