"""General saturation statistics of a scope (window or full recording)."""

import warnings
from dataclasses import dataclass

import numpy as np

from ..validation import as_signal, check_fs

PERCENTILE = 1.0
BELOW_MEDIAN_DROP = 2.0
DELTA_WINDOW_S = 12.0


@dataclass(frozen=True)
class StatBiomarkers:
    mean: float
    median: float
    minimum: float
    std: float
    value_range: float
    percentile: float
    below_median_pct: float
    crossings: float
    delta_index: float

    def as_features(self) -> dict:
        return {
            "mean": self.mean,
            "median": self.median,
            "minimum": self.minimum,
            "std": self.std,
            "range": self.value_range,
            "percentile": self.percentile,
            "below_median_pct": self.below_median_pct,
            "crossings": self.crossings,
            "delta_index": self.delta_index,
        }


def level_crossings(signal, level) -> int:
    """Count index pairs whose samples sit on strictly opposite sides of *level*.

    Samples exactly on the level are not crossings.
    """
    d = as_signal(signal) - level
    return int(np.sum((d[:-1] > 0) & (d[1:] < 0)) + np.sum((d[:-1] < 0) & (d[1:] > 0)))


def delta_index(signal, fs=1.0, window_s=DELTA_WINDOW_S) -> float:
    """Mean absolute difference of consecutive non-overlapping segment means.

    A partial tail segment is dropped.  Signals shorter than two segments
    yield 0 with a warning.
    """
    x = as_signal(signal)
    fs = check_fs(fs)
    seg = int(round(window_s * fs))
    if seg < 1:
        raise ValueError(f"segment of {window_s}s is shorter than one sample")
    k = x.size // seg
    if k < 2:
        warnings.warn(f"signal too short for delta index over {window_s}s segments",
                      stacklevel=2)
        return 0.0
    means = x[:k * seg].reshape(k, seg).mean(axis=1)
    return float(np.mean(np.abs(np.diff(means))))


def stat_biomarkers(signal, fs=1.0, percentile=PERCENTILE,
                    below_median_drop=BELOW_MEDIAN_DROP, crossing_level=None,
                    delta_window_s=DELTA_WINDOW_S) -> StatBiomarkers:
    x = as_signal(signal)
    fs = check_fs(fs)
    med = float(np.median(x))
    level = med if crossing_level is None else float(crossing_level)
    return StatBiomarkers(
        mean=float(x.mean()),
        median=med,
        minimum=float(x.min()),
        std=float(x.std()),  # population SD, consistent with the desat stats
        value_range=float(x.max() - x.min()),
        percentile=float(np.percentile(x, percentile)),
        below_median_pct=float(100.0 * np.mean(x <= med - below_median_drop)),
        crossings=float(level_crossings(x, level)),
        delta_index=delta_index(x, fs, delta_window_s),
    )
