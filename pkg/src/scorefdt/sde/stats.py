"""Autocorrelation estimates used for stride and block-length choices."""

from __future__ import annotations

import numpy as np
import scipy.fft


def autocovariance(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased FFT autocovariance of a 1-D series, lags 0..max_lag."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    xd = np.zeros(2 * n)
    xd[:n] = x - x.mean()
    spec = scipy.fft.rfft(xd)
    acov = scipy.fft.irfft(spec.real**2 + spec.imag**2)[: max_lag + 1] / n
    return acov


def autocorrelation(x: np.ndarray, max_lag: int) -> np.ndarray:
    acov = autocovariance(x, max_lag)
    if acov[0] <= 0:
        raise ValueError("zero-variance series")
    return acov / acov[0]


def decorrelation_lag(states: np.ndarray, threshold: float = 0.2, max_lag: int | None = None) -> int:
    """Smallest lag with max-over-dimensions |autocorrelation| below threshold."""
    states = np.atleast_2d(states)
    if states.shape[0] < 4:
        return 1
    if max_lag is None:
        max_lag = states.shape[0] // 2
    acf = np.stack([np.abs(autocorrelation(states[:, j], max_lag)) for j in range(states.shape[1])])
    below = np.all(acf < threshold, axis=0)
    hits = np.nonzero(below)[0]
    if hits.size == 0:
        return max_lag
    return max(1, int(hits[0]))


def integrated_autocorrelation_time(x: np.ndarray, window: float = 5.0) -> float:
    """Self-consistent-window estimate of the integrated autocorrelation time."""
    acf = autocorrelation(x, max_lag=min(len(x) // 2, 100_000))
    tau = 1.0
    for lag in range(1, acf.size):
        if lag > window * tau:
            break
        tau += 2.0 * acf[lag]
    return max(tau, 1.0)
