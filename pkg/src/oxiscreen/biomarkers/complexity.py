"""Complexity biomarkers: entropies, Lempel-Ziv, central tendency, DFA.

The entropy kernels count Chebyshev template matches.  Oximetry traces are
heavily quantised (integer percent after median smoothing), so counting is
done on a value histogram whenever the signal has few distinct levels; the
general case falls back to a KD-tree.  Both paths are exact and agree with
the naive O(n^2) definition.
"""

import math
import warnings

import numpy as np
from scipy.spatial import cKDTree

from ..validation import as_signal

ENTROPY_M = 1
ENTROPY_R_FACTOR = 0.25
CTM_RADIUS = 0.25
DFA_SCALE = 20

_HIST_MAX_LEVELS = 256


def _counts_hist_m1(x, r):
    vals, inv, cnt = np.unique(x, return_inverse=True, return_counts=True)
    lo = np.searchsorted(vals, vals - r, side="left")
    hi = np.searchsorted(vals, vals + r, side="right")
    csum = np.concatenate([[0], np.cumsum(cnt)])
    return (csum[hi] - csum[lo])[inv]

def _counts_hist_m2(x, r):
    a, b = x[:-1], x[1:]
    vals = np.unique(x)
    n_levels = vals.size
    ia = np.searchsorted(vals, a)
    ib = np.searchsorted(vals, b)
    hist = np.zeros((n_levels, n_levels))
    np.add.at(hist, (ia, ib), 1)
    lo = np.searchsorted(vals, vals - r, side="left")
    hi = np.searchsorted(vals, vals + r, side="right")
    prefix = np.zeros((n_levels + 1, n_levels + 1))
    prefix[1:, 1:] = hist.cumsum(axis=0).cumsum(axis=1)
    window_sum = (prefix[hi[:, None], hi[None, :]]
                  - prefix[lo[:, None], hi[None, :]]
                  - prefix[hi[:, None], lo[None, :]]
                  + prefix[lo[:, None], lo[None, :]])
    return window_sum[ia, ib]

def _match_counts(x, m, r):
    """Per-template counts of Chebyshev matches (distance <= r, self included)
    among the length-m templates of x."""
    if m == 1:
        counts = _counts_hist_m1 if np.unique(x).size <= _HIST_MAX_LEVELS else None
        if counts is not None:
            return counts(x, r)
    elif m == 2 and np.unique(x).size <= _HIST_MAX_LEVELS:
        return _counts_hist_m2(x, r)
    emb = np.lib.stride_tricks.sliding_window_view(x, m)
    tree = cKDTree(emb)
    return tree.query_ball_point(emb, r, p=np.inf, return_length=True)


def approx_entropy(signal, m=ENTROPY_M, r=None, r_factor=ENTROPY_R_FACTOR) -> float:
    """Approximate entropy with Chebyshev distance and self-matches included.

    *r* defaults to ``r_factor`` times the signal's (population) SD; a constant
    signal returns 0 by convention.
    """
    x = as_signal(signal)
    n = x.size
    if n < m + 2:
        raise ValueError(f"need at least {m + 2} samples for m={m}, got {n}")
    if r is None:
        sd = x.std()
        if sd == 0:
            return 0.0
        r = r_factor * sd
    phi = []
    for mm in (m, m + 1):
        counts = _match_counts(x, mm, r)
        phi.append(np.mean(np.log(counts / (n - mm + 1))))
    return float(phi[0] - phi[1])


def sample_entropy(signal, m=ENTROPY_M, r=None, r_factor=ENTROPY_R_FACTOR) -> float:
    """Sample entropy -ln(A/B) with self-matches excluded.

    When no template pair matches, returns the capped estimator
    ``ln(n-m) + ln(n-m-1) - ln 2`` and emits a warning.
    """
    x = as_signal(signal)
    n = x.size
    if n < m + 2:
        raise ValueError(f"need at least {m + 2} samples for m={m}, got {n}")
    if r is None:
        sd = x.std()
        if sd == 0:
            return 0.0
        r = r_factor * sd
    # both template sets run over i = 0..n-m-1 so the A/B ratio is comparable
    b_total = int(np.sum(_match_counts(x[:n - 1], m, r)) - (n - m))
    a_total = int(np.sum(_match_counts(x, m + 1, r)) - (n - m))
    if a_total == 0 or b_total == 0:
        warnings.warn("no template matches; returning capped sample entropy",
                      stacklevel=2)
        return math.log(n - m) + math.log(n - m - 1) - math.log(2)
    return float(-math.log(a_total / b_total))


def lz76_phrases(symbols) -> int:
    """Phrase count of the LZ76 exhaustive-history parsing of a symbol string."""
    bits = bytes(symbols)
    n = len(bits)
    if n == 0:
        raise ValueError("need at least one symbol")
    count = 1
    i = 1
    while i < n:
        # longest prefix of bits[i:] already seen starting before i
        # (overlap into the phrase allowed); gallop then binary search
        k = 1
        while i + k <= n and bits.find(bits[i:i + k], 0, i + k - 1) != -1:
            k *= 2
        lo, hi = k // 2, min(k, n - i)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if bits.find(bits[i:i + mid], 0, i + mid - 1) != -1:
                lo = mid
            else:
                hi = mid - 1
        i += lo + 1  # novel phrase = seen prefix plus one symbol (or the tail)
        count += 1
    return count


def lempel_ziv(signal) -> int:
    """LZ76 phrase count of the median-binarised signal.

    Samples at or above the median map to 1, the rest to 0; the binarisation
    is rank-based, so the count is invariant to monotone rescaling.
    """
    x = as_signal(signal)
    return lz76_phrases((x >= np.median(x)).astype(np.uint8).tobytes())


def central_tendency(signal, radius=CTM_RADIUS) -> float:
    """Fraction of consecutive first-difference pairs within *radius* of the
    origin of the second-order difference plot (strict inequality)."""
    x = as_signal(signal, min_len=3)
    d = np.diff(x)
    return float(np.mean(d[:-1] ** 2 + d[1:] ** 2 < radius ** 2))


def dfa_fluctuation(signal, scale=DFA_SCALE) -> float:
    """Detrended fluctuation F(scale): RMS residual of per-box linear detrends
    of the integrated, mean-centered signal.  Needs >= 4*scale samples."""
    x = as_signal(signal)
    if scale < 2:
        raise ValueError(f"scale must be >= 2, got {scale}")
    if x.size < 4 * scale:
        raise ValueError(f"need at least {4 * scale} samples for scale {scale}, "
                         f"got {x.size}")
    profile = np.cumsum(x - x.mean())
    k = profile.size // scale
    boxes = profile[:k * scale].reshape(k, scale)
    t = np.arange(scale, dtype=float)
    coeffs = np.polyfit(t, boxes.T, 1)  # one linear fit per box
    residuals = boxes - (np.outer(coeffs[0], t) + coeffs[1][:, None])
    return float(np.sqrt(np.mean(residuals ** 2)))
