"""Extraction of relaxation quantities from magnetization time series:
long-time averages, 1/e relaxation times, exponential fits, regime labels,
the critical coupling and the golden-rule constant."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

E_INV = 1.0 / np.e

# regime thresholds (grey-line threshold and non-Markovian boundary)
STUCK_THRESHOLD = -0.04
LAMBDA_NON_MARKOVIAN = 0.3


class AnalysisError(ValueError):
    pass


@dataclass
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.times) != len(self.values):
            raise AnalysisError("times and values differ in length")
        if len(self.times) and self.times[0] != 0:
            raise AnalysisError("series must start at t=0")


@dataclass
class DecayFit:
    tau_rel: float
    eq_value: float
    amplitude: float
    residual: float  # rms in original units over the fit window


@dataclass
class RegimeLabel:
    label: str  # "nonMarkovian" | "Markovian" | "superweak"
    longtime_avg: float
    fit_residual: float | None
    tau_lambda2: float | None


def long_time_average(series: TimeSeries, tail_fraction: float = 0.5,
                      min_samples: int = 100) -> float:
    t_end = series.times[-1]
    cut = t_end * (1.0 - tail_fraction)
    tail = series.values[series.times >= cut]
    if len(tail) < min_samples:
        raise AnalysisError(
            f"tail window has {len(tail)} samples, needs >= {min_samples}")
    return float(tail.mean())


def relaxation_time(series: TimeSeries, eq_value: float):
    """First time the signal crosses eq + (v0 - eq)/e, linearly
    interpolated. Returns (tau, censored); censored tau is the final time."""
    v0 = series.values[0]
    if abs(v0 - eq_value) <= 1e-12 * max(1.0, abs(v0)):
        return float(series.times[-1]), True  # nothing to decay
    level = eq_value + (v0 - eq_value) * E_INV
    below = series.values <= level if v0 > eq_value else series.values >= level
    hits = np.nonzero(below)[0]
    if len(hits) == 0 or hits[0] == 0:
        if len(hits) == 0:
            return float(series.times[-1]), True
        return 0.0, False
    k = hits[0]
    t0, t1 = series.times[k - 1], series.times[k]
    y0, y1 = series.values[k - 1], series.values[k]
    tau = t0 + (level - y0) * (t1 - t0) / (y1 - y0)
    return float(tau), False


def fit_exponential(series: TimeSeries, eq_value: float,
                    window=(0.05, 0.9)) -> DecayFit:
    """Least-squares fit of log(deviation from equilibrium) where the
    deviation lies in the given fraction window of its initial value."""
    dev = series.values - eq_value
    d0 = dev[0]
    if d0 == 0:
        raise AnalysisError("no initial deviation to fit")
    rel = dev / d0
    mask = (rel <= window[1]) & (rel >= window[0])
    if np.count_nonzero(mask) < 20:
        raise AnalysisError(
            f"only {np.count_nonzero(mask)} samples in the fit window, "
            "needs >= 20")
    if np.any(rel[mask] <= 0):
        warnings.warn("non-positive deviations in fit window; shrinking")
        mask &= rel > 0
    t = series.times[mask]
    y = np.log(np.abs(dev[mask]))
    slope, intercept = np.polyfit(t, y, 1)
    if slope >= 0:
        raise AnalysisError("deviation is not decaying in the fit window")
    tau = -1.0 / slope
    amp = np.sign(d0) * np.exp(intercept)
    model_vals = amp * np.exp(-t / tau) + eq_value
    residual = float(np.sqrt(np.mean((series.values[mask] - model_vals) ** 2)))
    return DecayFit(tau_rel=float(tau), eq_value=eq_value,
                    amplitude=float(amp), residual=residual)


def classify_regime(series: TimeSeries, lam: float,
                    stuck_threshold: float = STUCK_THRESHOLD,
                    lambda_non_markovian: float = LAMBDA_NON_MARKOVIAN,
                    tail_fraction: float = 0.5,
                    min_samples: int = 100) -> RegimeLabel:
    avg = long_time_average(series, tail_fraction, min_samples=min_samples)
    residual = None
    tau_l2 = None
    try:
        fit = fit_exponential(series, avg)
        residual = fit.residual
        tau_l2 = fit.tau_rel * lam ** 2
    except AnalysisError:
        pass
    if avg > stuck_threshold:
        label = "superweak"
    elif lam > lambda_non_markovian:
        label = "nonMarkovian"
    else:
        label = "Markovian"
    return RegimeLabel(label=label, longtime_avg=avg, fit_residual=residual,
                       tau_lambda2=tau_l2)


def find_lambda_crit(curve, threshold: float = STUCK_THRESHOLD) -> float:
    """Coupling at which the long-time average crosses the threshold,
    interpolated linearly in log(lambda)."""
    pts = sorted(curve)
    if len(pts) < 2:
        raise AnalysisError("need at least 2 (lambda, avg) points")
    lams = np.array([p[0] for p in pts])
    avgs = np.array([p[1] for p in pts])
    above = avgs > threshold  # stuck side
    for k in range(len(pts) - 1):
        if above[k] != above[k + 1]:
            x0, x1 = np.log(lams[k]), np.log(lams[k + 1])
            y0, y1 = avgs[k], avgs[k + 1]
            x = x0 + (threshold - y0) * (x1 - x0) / (y1 - y0)
            return float(np.exp(x))
    nearest = lams[np.argmin(np.abs(avgs - threshold))]
    raise AnalysisError(
        f"no pair of points straddles threshold {threshold}; nearest "
        f"lambda {nearest}")


def fit_fgr_constant(points) -> tuple[float, np.ndarray]:
    """Least-squares r in tau_rel = r / lambda^2; returns (r, per-point
    tau * lambda^2 ratios)."""
    if len(points) < 3:
        raise AnalysisError("need at least 3 (lambda, tau_rel) points")
    lams = np.array([p[0] for p in points])
    taus = np.array([p[1] for p in points])
    x = lams ** -2.0
    r = float(np.dot(x, taus) / np.dot(x, x))
    ratios = taus * lams ** 2
    if ratios.max() / ratios.min() > 1.5:
        warnings.warn(
            "tau * lambda^2 spread exceeds 1.5; points likely span regimes: "
            f"{ratios}")
    return r, ratios
