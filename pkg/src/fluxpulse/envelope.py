"""Decoherence-time extraction from the envelope of two-pulse oscillations.

The envelope extrema are fitted with ``a1 + a2 * exp(-t / t_d)``.  For fixed
t_d the model is linear in (a1, a2), so the fit reduces to a one-dimensional
search over t_d: a log-spaced scan followed by bounded Brent refinement on
log t_d.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks

from .errors import FitError

SCAN_POINTS = 200
SCAN_SPAN = 100.0
MIN_EXTREMA = 3


@dataclass(frozen=True)
class OscillationSeries:
    t_values: np.ndarray
    y_values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_values, dtype=float)
        y = np.asarray(self.y_values, dtype=float)
        if t.shape != y.shape or t.ndim != 1:
            raise ValueError("t_values and y_values must be 1D arrays of equal length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
            raise FitError("series contains non-finite values")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("t_values must be strictly increasing")
        object.__setattr__(self, "t_values", t)
        object.__setattr__(self, "y_values", y)

    def __len__(self):
        return self.t_values.size


@dataclass(frozen=True)
class EnvelopeFit:
    a1: float
    a2: float
    t_d: float
    rms_residual: float
    n_extrema_used: int
    identifiable: bool = True
    bracket: tuple[float, float] = (math.nan, math.nan)

    def __call__(self, t):
        return exponential_model(np.asarray(t, dtype=float), self.a1, self.a2, self.t_d)


def exponential_model(t, a1, a2, t_d):
    return a1 + a2 * np.exp(-t / t_d)


def extract_envelope(series: OscillationSeries, side: str = "upper",
                     min_separation: float | None = None) -> OscillationSeries:
    """Interior local maxima (``upper``) or minima (``lower``) of the series.

    A flat extremum contributes its middle sample.  ``min_separation`` (in
    units of t, uniform sampling assumed) keeps only the most extreme point
    within that distance, which suppresses noise-induced extrema.
    """
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    y = series.y_values if side == "upper" else -series.y_values
    if y.size < 3:
        raise FitError("series too short to contain interior extrema")
    distance = None
    if min_separation is not None:
        step = float(np.median(np.diff(series.t_values)))
        distance = max(1, int(min_separation / step))
    idx, _ = find_peaks(y, distance=distance)
    if idx.size < MIN_EXTREMA:
        raise FitError(f"found {idx.size} {side} extrema, need at least {MIN_EXTREMA}")
    return OscillationSeries(series.t_values[idx], series.y_values[idx])


def dominant_frequency(t, y, oversample: int = 16) -> float:
    """Angular frequency of the largest periodogram peak of a uniformly sampled series."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 4:
        raise ValueError("need at least 4 samples")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=0):
        raise ValueError("dominant_frequency expects uniform sampling")
    y = (y - y.mean()) * np.hanning(y.size)
    n_fft = oversample * y.size
    power = np.abs(np.fft.rfft(y, n_fft)) ** 2
    freqs = 2.0 * np.pi * np.fft.rfftfreq(n_fft, dt[0])
    power[0] = 0.0
    return float(freqs[int(np.argmax(power))])


def _linear_fit(t, y, t_d):
    basis = np.column_stack([np.ones_like(t), np.exp(-t / t_d)])
    coef, _, _, _ = np.linalg.lstsq(basis, y, rcond=None)
    resid = y - basis @ coef
    return coef, float(resid @ resid)


def fit_exponential(envelope: OscillationSeries, bracket: tuple[float, float] | None = None,
                    n_scan: int = SCAN_POINTS) -> EnvelopeFit:
    t, y = envelope.t_values, envelope.y_values
    if t.size < 3:
        raise FitError(f"need at least 3 envelope points, got {t.size}")
    span = float(t.max() - t.min())
    if not span > 0:
        raise FitError("all envelope times are equal")
    if bracket is None:
        bracket = (float(np.min(np.diff(t))), SCAN_SPAN * span)
    lo, hi = bracket
    # shifting t by its first value only rescales a2, which keeps the design well conditioned
    t0 = float(t[0])
    ts = t - t0
    log_grid = np.linspace(math.log(lo), math.log(hi), n_scan)
    sse = np.array([_linear_fit(ts, y, math.exp(g))[1] for g in log_grid])
    best = int(np.argmin(sse))
    scale = float(np.sum((y - y.mean()) ** 2))
    flat = sse.max() - sse.min() <= 1e-12 * scale + 1e-20 * float(y @ y)
    edge = best in (0, n_scan - 1)
    if flat:
        g_lo, g_hi = log_grid[0], log_grid[-1]
        g_best = log_grid[best]
    else:
        g_lo = log_grid[max(best - 1, 0)]
        g_hi = log_grid[min(best + 1, n_scan - 1)]
        res = minimize_scalar(lambda g: _linear_fit(ts, y, math.exp(g))[1], bounds=(g_lo, g_hi),
                              method="bounded", options={"xatol": 1e-12, "maxiter": 500})
        g_best = float(res.x) if res.fun <= sse[best] else float(log_grid[best])
    t_d = math.exp(g_best)
    (a1, a2_shifted), sse_best = _linear_fit(ts, y, t_d)
    a2 = a2_shifted * math.exp(t0 / t_d)
    return EnvelopeFit(
        a1=float(a1),
        a2=float(a2),
        t_d=t_d,
        rms_residual=math.sqrt(sse_best / t.size),
        n_extrema_used=int(t.size),
        identifiable=not (flat or edge),
        bracket=(math.exp(g_lo), math.exp(g_hi)),
    )


def synth_decohered_signal(omega: float, t_d: float, baseline: float, amplitude: float,
                           t_values) -> OscillationSeries:
    """baseline + amplitude * exp(-t / t_d) * cos(omega t); t_d = inf gives a pure cosine."""
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    if baseline + amplitude > 1.0 or baseline - amplitude < 0.0:
        raise ValueError("signal must stay inside [0, 1]: need baseline +- amplitude in [0, 1]")
    if not t_d > 0:
        raise ValueError("t_d must be positive")
    t = np.asarray(t_values, dtype=float)
    decay = np.ones_like(t) if math.isinf(t_d) else np.exp(-t / t_d)
    return OscillationSeries(t, baseline + amplitude * decay * np.cos(omega * t))


def _is_uniform(t) -> bool:
    dt = np.diff(t)
    return dt.size > 0 and bool(np.allclose(dt, dt[0], rtol=1e-6, atol=0))


def fit_decoherence(series: OscillationSeries, side: str = "upper",
                    min_separation: float | str | None = "auto") -> EnvelopeFit:
    """Envelope extraction followed by the exponential fit.

    With ``min_separation="auto"`` extrema closer than 3/4 of the dominant
    oscillation period are merged (uniformly sampled series only).
    """
    if min_separation == "auto":
        min_separation = None
        if len(series) >= 4 and _is_uniform(series.t_values):
            omega = dominant_frequency(series.t_values, series.y_values)
            if omega > 0:
                min_separation = 0.75 * 2.0 * math.pi / omega
    return fit_exponential(extract_envelope(series, side, min_separation))
