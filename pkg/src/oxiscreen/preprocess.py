"""Two-stage SpO2 preprocessing: physiological range filter, then median smoothing."""

import numpy as np

from .records import OximetryRecording
from .validation import as_signal

SPO2_MIN = 50.0
SPO2_MAX = 100.0
MEDIAN_WINDOW = 9


def range_filter(samples, lo=SPO2_MIN, hi=SPO2_MAX) -> np.ndarray:
    """Drop non-physiological samples (outside [lo, hi]) and close up the series.

    The time axis is treated as contiguous afterwards; downstream biomarkers
    see no gaps.
    """
    x = as_signal(samples)
    kept = x[(x >= lo) & (x <= hi)]
    if kept.size == 0:
        raise ValueError("empty after preprocessing: no samples in physiological range")
    return kept


def median_smooth(samples, k=MEDIAN_WINDOW) -> np.ndarray:
    """Centered running median of odd length *k*; windows shrink symmetrically
    at the edges so the output length equals the input length."""
    if k < 1 or k % 2 == 0:
        raise ValueError(f"median window must be odd and >= 1, got {k}")
    x = as_signal(samples)
    n = x.size
    if k == 1 or n == 1:
        return x.copy()
    half = (k - 1) // 2
    out = np.empty(n)
    interior = n - 2 * half
    if interior > 0:
        windows = np.lib.stride_tricks.sliding_window_view(x, k)
        out[half:half + interior] = np.median(windows, axis=1)
    for i in range(min(half, n)):
        w = min(i, n - 1 - i, half)
        out[i] = np.median(x[i - w:i + w + 1])
        j = n - 1 - i
        w = min(j, n - 1 - j, half)
        out[j] = np.median(x[j - w:j + w + 1])
    return out


def preprocess_signal(samples, k=MEDIAN_WINDOW, lo=SPO2_MIN, hi=SPO2_MAX) -> np.ndarray:
    return median_smooth(range_filter(samples, lo=lo, hi=hi), k=k)


def preprocess(recording: OximetryRecording, k=MEDIAN_WINDOW) -> OximetryRecording:
    """Apply the range filter then the length-k median filter to a recording."""
    return recording.with_samples(preprocess_signal(recording.samples, k=k))
