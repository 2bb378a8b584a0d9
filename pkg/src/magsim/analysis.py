"""Fringe analysis and the chi-square + Monte-Carlo fit pipeline.

Fringe frequencies and contrasts come from a zero-padded Fourier transform
with a Lorentzian peak fit. Nonlinear fits minimize the usual chi-square via
damped least squares; the point noise sigma_y is estimated from residuals
and parameter uncertainties follow from refitting Gaussian-resampled
synthetic data sets, all driven by one explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

import numpy as np
from scipy.optimize import least_squares

from .errors import FitDiverged, NoPeak

ZERO_PAD = 4
PEAK_SNR = 5.0


# ---------------------------------------------------------------- models

def _model_linear(x, p):
    return p[0] + p[1] * x


def _model_sigmoid(x, p):
    # amplitude / (1 + exp((x - turning_point)/width))
    return p[0] / (1.0 + np.exp((x - p[1]) / p[2]))


def _model_lorentzian(x, p):
    # amplitude, center, half-width, offset
    return p[0] / (1.0 + ((x - p[1]) / p[2]) ** 2) + p[3]


def _model_cosine_decay(x, p):
    # amplitude, angular frequency, phase, decay rate, offset
    return p[0] * np.cos(p[1] * x + p[2]) * np.exp(-p[3] * x) + p[4]


def _model_cosine(x, p):
    # amplitude, angular frequency, phase, offset
    return p[0] * np.cos(p[1] * x + p[2]) + p[3]


MODELS = {
    "linear": _model_linear,
    "sigmoid": _model_sigmoid,
    "lorentzian": _model_lorentzian,
    "cosine_decay": _model_cosine_decay,
    "cosine": _model_cosine,
}


@dataclass
class FitResult:
    model_id: str
    params_opt: np.ndarray
    sigma_y: float
    param_sigmas: np.ndarray | None = None
    param_samples: np.ndarray | None = None
    n_diverged: int = 0

    def interval(self, index: int, level: float = 0.95) -> tuple[float, float]:
        """Percentile interval of a parameter from the Monte-Carlo samples."""
        if self.param_samples is None:
            raise ValueError("run monte_carlo_uncertainty first")
        lo = 100.0 * (1.0 - level) / 2.0
        vals = self.param_samples[:, index]
        return (float(np.percentile(vals, lo)),
                float(np.percentile(vals, 100.0 - lo)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("parameter,estimate,sigma\n")
            for i, v in enumerate(self.params_opt):
                s = "" if self.param_sigmas is None else repr(
                    float(self.param_sigmas[i]))
                fh.write(f"p{i},{float(v)!r},{s}\n")


def chi2_fit(x, y, model_id: str, init, max_nfev: int = 2000) -> FitResult:
    """Least-squares point estimate for a registered model.

    sigma_y is estimated from the optimal residuals as
    sqrt(sum r^2 / (N - 1)).
    """
    if model_id not in MODELS:
        raise KeyError(f"unknown model {model_id!r}; have {sorted(MODELS)}")
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    fn = MODELS[model_id]

    res = least_squares(lambda p: fn(x, p) - y, np.asarray(init, float),
                        method="lm", max_nfev=max_nfev)
    if not res.success:
        raise FitDiverged(f"{model_id} fit failed: {res.message}")
    resid = fn(x, res.x) - y
    sigma_y = float(np.sqrt(np.sum(resid ** 2) / max(len(x) - 1, 1)))
    return FitResult(model_id, res.x, sigma_y)


def monte_carlo_uncertainty(x, y, fit: FitResult, trials: int = 500,
                            seed: int = 0,
                            max_diverged_fraction: float = 0.05) -> FitResult:
    """Parameter spread from refitting Gaussian-resampled data sets.

    Synthetic y values are drawn around the fitted curve with sigma_y;
    each trial uses an independent substream of the master seed, so results
    are reproducible and order-independent.
    """
    x = np.asarray(x, float)
    fn = MODELS[fit.model_id]
    base = fn(x, fit.params_opt)
    streams = np.random.SeedSequence(seed).spawn(trials)
    samples = []
    diverged = 0
    for ss in streams:
        rng = np.random.default_rng(ss)
        y_synth = base + fit.sigma_y * rng.standard_normal(len(x))
        try:
            samples.append(chi2_fit(x, y_synth, fit.model_id,
                                    fit.params_opt).params_opt)
        except FitDiverged:
            diverged += 1
    if diverged > max_diverged_fraction * trials:
        raise FitDiverged(f"{diverged}/{trials} Monte-Carlo refits diverged")
    arr = np.array(samples)
    sig = arr.std(axis=0, ddof=1) if len(arr) > 1 else np.zeros_like(fit.params_opt)
    return FitResult(fit.model_id, fit.params_opt, fit.sigma_y,
                     sig, arr, diverged)


def linear_fit_analytic(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Normal-equations solution and analytic parameter sigmas for y = a + b x."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    dm = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(dm, y, rcond=None)
    resid = y - dm @ coef
    dof = max(len(x) - 2, 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(dm.T @ dm)
    return coef, np.sqrt(np.diag(cov))


def fringe_extract(series) -> tuple[float, float, float, float]:
    """Dominant fringe frequency and contrast of a uniformly sampled series.

    Returns ``(freq_per_x, contrast, freq_sigma, contrast_sigma)``. The
    spectrum is zero-padded fourfold and the dominant non-DC peak is fit
    with a Lorentzian; NoPeak is raised when nothing clears the noise floor.
    """
    x = np.asarray(series.x, float)
    y = np.asarray(series.s, float)
    if len(x) < 8:
        raise ValueError("need at least 8 points")
    dx = np.diff(x)
    if not np.allclose(dx, dx[0], rtol=1e-6, atol=1e-12):
        raise ValueError("series must be uniformly spaced")
    n = len(y)
    yc = y - y.mean()
    spec = np.abs(np.fft.rfft(yc, ZERO_PAD * n)) * 2.0 / n
    freqs = np.fft.rfftfreq(ZERO_PAD * n, d=float(dx[0]))
    guard = 2 * ZERO_PAD  # skip the broadened DC bin
    body = spec[guard:]
    floor = np.median(body)
    k = int(np.argmax(body)) + guard
    if floor > 0 and spec[k] < PEAK_SNR * floor:
        raise NoPeak("no fringe peak above the noise floor")
    if spec[k] < 1e-12:
        raise NoPeak("spectrum is empty")

    half = max(3 * ZERO_PAD, 6)
    lo, hi = max(k - half, 1), min(k + half, len(spec) - 1)
    fw, sw = freqs[lo:hi], spec[lo:hi]
    init = [float(spec[k]), float(freqs[k]),
            max(float(freqs[1] - freqs[0]) * ZERO_PAD, 1e-9), 0.0]
    try:
        fit = chi2_fit(fw, sw, "lorentzian", init)
        mc = monte_carlo_uncertainty(fw, sw, fit, trials=64, seed=1)
        freq = float(fit.params_opt[1])
        contrast = float(abs(fit.params_opt[0]))
        return freq, contrast, float(mc.param_sigmas[1]), float(mc.param_sigmas[0])
    except FitDiverged:
        # parabolic refinement of the raw peak as a fallback
        df = freqs[1] - freqs[0]
        y0, y1, y2 = spec[k - 1], spec[k], spec[k + 1]
        denom = y0 - 2.0 * y1 + y2
        dk = 0.5 * (y0 - y2) / denom if abs(denom) > 1e-30 else 0.0
        return float(freqs[k] + dk * df), float(y1), float(df), 0.0


def fringe_rate_from_signal(n_values, signal) -> float:
    """Angular fringe rate (rad per x-unit) of S(N) data via the spectrum."""
    from .signal_model import FringeSeries

    series = FringeSeries(np.asarray(n_values, float),
                          np.clip(np.asarray(signal, float), 0.0, 1.0))
    freq, _, _, _ = fringe_extract(series)
    return 2.0 * math.pi * freq
