"""Naive reference implementations used as independent oracles.

Everything here is written directly from the defining formulas with no reuse
of package internals, trading speed for obviousness.
"""

import itertools
import math

import numpy as np


def naive_median_smooth(x, k):
    x = np.asarray(x, dtype=float)
    n = len(x)
    half = (k - 1) // 2
    out = np.empty(n)
    for i in range(n):
        w = min(half, i, n - 1 - i)
        out[i] = np.median(x[i - w:i + w + 1])
    return out


def naive_apen(x, m, r):
    x = np.asarray(x, dtype=float)
    n = len(x)

    def phi(mm):
        templates = [x[i:i + mm] for i in range(n - mm + 1)]
        total = 0.0
        for a in templates:
            count = sum(1 for b in templates if np.max(np.abs(a - b)) <= r)
            total += math.log(count / len(templates))
        return total / len(templates)

    return phi(m) - phi(m + 1)


def naive_sampen(x, m, r):
    x = np.asarray(x, dtype=float)
    n = len(x)

    def matches(mm):
        templates = [x[i:i + mm] for i in range(n - m)]
        count = 0
        for i in range(len(templates)):
            for j in range(len(templates)):
                if i != j and np.max(np.abs(templates[i] - templates[j])) <= r:
                    count += 1
        return count

    b = matches(m)
    a = matches(m + 1)
    if a == 0 or b == 0:
        return math.log(n - m) + math.log(n - m - 1) - math.log(2)
    return -math.log(a / b)


def reference_lz76(symbols):
    """Phrase count of the exhaustive-history parsing, by direct definition:
    the next phrase is the shortest prefix of the remainder that never occurs
    starting earlier (overlap allowed)."""
    s = list(symbols)
    n = len(s)
    if n == 0:
        return 0
    count = 1
    i = 1
    while i < n:
        k = 1
        while i + k <= n:
            sub = s[i:i + k]
            found = any(s[p:p + k] == sub for p in range(0, i))
            if not found:
                break
            k += 1
        i += k
        count += 1
    return count


def naive_ctm(x, rho):
    x = np.asarray(x, dtype=float)
    d = np.diff(x)
    hits = sum(1 for i in range(len(d) - 1)
               if math.sqrt(d[i] ** 2 + d[i + 1] ** 2) < rho)
    return hits / (len(d) - 1)


def naive_crossings(x, level):
    x = np.asarray(x, dtype=float)
    count = 0
    for a, b in zip(x[:-1], x[1:]):
        if (a - level) * (b - level) < 0:
            count += 1
    return count


def naive_delta_index(x, fs, window_s):
    x = np.asarray(x, dtype=float)
    seg = int(round(window_s * fs))
    means = [x[i:i + seg].mean() for i in range(0, len(x) - seg + 1, seg)]
    if len(means) < 2:
        return 0.0
    return float(np.mean([abs(means[i + 1] - means[i])
                          for i in range(len(means) - 1)]))


def exact_rank_sum_p(a, b):
    """Exact two-sided rank-sum p-value by full enumeration of group splits."""
    a = list(a)
    b = list(b)
    pooled = a + b
    ranks = _average_ranks(pooled)
    n_a = len(a)
    observed = sum(ranks[:n_a])
    stats = []
    for combo in itertools.combinations(range(len(pooled)), n_a):
        stats.append(sum(ranks[i] for i in combo))
    mean = np.mean(stats)
    observed_dev = abs(observed - mean)
    extreme = sum(1 for s in stats if abs(s - mean) >= observed_dev - 1e-12)
    return extreme / len(stats)


def _average_ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def hand_mutual_information(joint_counts):
    """MI in nats from a joint count table (rows x cols)."""
    joint = np.asarray(joint_counts, dtype=float)
    p = joint / joint.sum()
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    info = 0.0
    for i in range(p.shape[0]):
        for j in range(p.shape[1]):
            if p[i, j] > 0:
                info += p[i, j] * math.log(p[i, j] / (px[i] * py[j]))
    return info


def auroc_by_pairs(y, scores):
    """Concordant-pair counting with ties worth one half."""
    pos = [s for s, label in zip(scores, y) if label == 1]
    neg = [s for s, label in zip(scores, y) if label == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def dfa_alpha(fluctuation_fn, signal, scales):
    """Scaling exponent from log-log regression of F(scale) on scale."""
    fs = [fluctuation_fn(signal, scale) for scale in scales]
    return float(np.polyfit(np.log(scales), np.log(fs), 1)[0])
