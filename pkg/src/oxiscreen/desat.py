"""Desaturation detectors and event-derived biomarkers.

Two detectors are provided:

* ``detect_relative`` finds transient drops of at least ``drop_threshold``
  percent below a local-maximum baseline, the convention behind the oxygen
  desaturation index (ODI).  Event length is capped.
* ``detect_hard`` finds maximal runs strictly below a constant level
  (default: the median of the scope being analysed), with no length cap.
  These capture the long hypoxic excursions typical of chronic disease.

Events are half-open index ranges [start_idx, end_idx): ``end_idx`` is the
first recovered/at-level sample, so ``duration_s = (end_idx - start_idx)/fs``
equals the event's sample count times the sample period.
"""

from dataclasses import dataclass

import numpy as np

from .validation import as_signal, check_fs

RELATIVE_DROP_THRESHOLD = 3.0
RELATIVE_MAX_LEN_S = 120.0
HARD_MIN_SAMPLES = 2  # single-sample crossings are treated as noise
CT_LEVEL = 90.0


@dataclass(frozen=True)
class DesaturationEvent:
    start_idx: int
    min_idx: int
    end_idx: int
    baseline: float
    min_value: float
    duration_s: float
    depth_max: float
    depth_100: float
    slope: float
    area_max: float
    area_100: float


def event_from_range(signal, fs, start, end, baseline) -> DesaturationEvent:
    """Build an event's geometry from its half-open sample range [start, end)."""
    seg = np.asarray(signal, dtype=float)[start:end]
    rel_min = int(np.argmin(seg))  # first minimum on ties
    min_idx = start + rel_min
    min_value = float(seg[rel_min])
    depth_max = float(baseline - min_value)
    fall_s = (min_idx - start) / fs
    # zero time-to-minimum: treat as a one-sample fall, never divide by zero
    slope = depth_max * fs if fall_s == 0 else depth_max / fall_s
    return DesaturationEvent(
        start_idx=int(start),
        min_idx=min_idx,
        end_idx=int(end),
        baseline=float(baseline),
        min_value=min_value,
        duration_s=(end - start) / fs,
        depth_max=depth_max,
        depth_100=100.0 - min_value,
        slope=slope,
        area_max=float(np.sum(baseline - seg) / fs),
        area_100=float(np.sum(100.0 - seg) / fs),
    )


def _forward_min(x, width) -> np.ndarray:
    """Minimum of x over [i, i+width) for each i (tail windows shrink)."""
    padded = np.concatenate([x, np.full(width - 1, np.inf)])
    return np.min(np.lib.stride_tricks.sliding_window_view(padded, width), axis=1)


def detect_relative(signal, fs=1.0, drop_threshold=RELATIVE_DROP_THRESHOLD,
                    max_len_s=RELATIVE_MAX_LEN_S):
    """Left-to-right scan for relative desaturations.

    An event opens at a local-maximum baseline ``b``, requires a subsequent
    sample at or below ``b - drop_threshold``, and closes at the first sample
    recovering to >= ``b - drop_threshold`` or when the duration reaches
    ``max_len_s`` (truncated, not discarded).  A sample rising above ``b``
    before the drop qualifies abandons the baseline in favour of the later,
    higher one.  Returns disjoint events sorted by start index.
    """
    x = as_signal(signal)
    fs = check_fs(fs)
    if drop_threshold <= 0:
        raise ValueError(f"drop_threshold must be positive, got {drop_threshold}")
    n = x.size
    cap = max(1, int(round(max_len_s * fs)))
    if n < 2:
        return []

    # candidate baselines: local maxima whose forward window (length cap)
    # reaches drop_threshold below them; everything else cannot open an event
    local_max = np.empty(n, dtype=bool)
    local_max[0] = x[0] >= x[1]
    local_max[-1] = False  # cannot open an event at the last sample
    if n > 2:
        local_max[1:-1] = (x[1:-1] >= x[2:]) & (x[1:-1] >= x[:-2])
    reachable = (x - _forward_min(x, cap)) >= drop_threshold
    candidates = np.nonzero(local_max & reachable)[0]

    events = []
    pos = 0  # scan resumes here after each event/abandon
    for i in candidates:
        if i < pos:
            continue
        b = x[i]
        run_min = b
        qualified = False
        j = i + 1
        end = None
        while True:
            if j >= n:
                end = n if qualified else None
                break
            v = x[j]
            if qualified and (v >= b - drop_threshold or j - i >= cap):
                end = j
                break
            if not qualified and v > b:
                break  # higher baseline ahead; abandon
            if not qualified and j - i >= cap:
                break  # cannot qualify within the length cap
            if v < run_min:
                run_min = v
                if b - run_min >= drop_threshold:
                    qualified = True
            j += 1
        if end is not None:
            events.append(event_from_range(x, fs, i, end, b))
            pos = end
        else:
            pos = j
    return events


def detect_hard(signal, fs=1.0, level=None, min_samples=HARD_MIN_SAMPLES):
    """Maximal runs of consecutive samples strictly below *level*.

    *level* defaults to the median of the analysed scope.  Runs shorter than
    *min_samples* are ignored; there is no upper length constraint.
    """
    x = as_signal(signal)
    fs = check_fs(fs)
    if level is None:
        level = float(np.median(x))
    below = x < level
    boundaries = np.diff(below.astype(np.int8))
    starts = np.nonzero(boundaries == 1)[0] + 1
    ends = np.nonzero(boundaries == -1)[0] + 1
    if below[0]:
        starts = np.concatenate([[0], starts])
    if below[-1]:
        ends = np.concatenate([ends, [x.size]])
    return [event_from_range(x, fs, s, e, level)
            for s, e in zip(starts, ends) if e - s >= min_samples]


@dataclass(frozen=True)
class DesatBiomarkers:
    odi: float
    length_mean: float
    length_std: float
    depth_mean: float
    depth_std: float
    depth100_mean: float
    depth100_std: float
    slope_mean: float
    slope_std: float
    area_mean: float
    area_std: float
    area100_mean: float
    area100_std: float
    gap_mean: float
    gap_std: float

    def as_features(self, suffix: str) -> dict:
        return {
            f"odi_{suffix}": self.odi,
            f"desat_len_mean_{suffix}": self.length_mean,
            f"desat_len_std_{suffix}": self.length_std,
            f"desat_depth_mean_{suffix}": self.depth_mean,
            f"desat_depth_std_{suffix}": self.depth_std,
            f"desat_depth100_mean_{suffix}": self.depth100_mean,
            f"desat_depth100_std_{suffix}": self.depth100_std,
            f"desat_slope_mean_{suffix}": self.slope_mean,
            f"desat_slope_std_{suffix}": self.slope_std,
            f"desat_area_mean_{suffix}": self.area_mean,
            f"desat_area_std_{suffix}": self.area_std,
            f"desat_area100_mean_{suffix}": self.area100_mean,
            f"desat_area100_std_{suffix}": self.area100_std,
            f"desat_gap_mean_{suffix}": self.gap_mean,
            f"desat_gap_std_{suffix}": self.gap_std,
        }


def _stats(values) -> tuple:
    if len(values) == 0:
        return 0.0, 0.0
    arr = np.asarray(values, dtype=float)
    # population (divide-by-N) standard deviation: sigma of one event is 0
    return float(arr.mean()), float(arr.std())


def desat_biomarkers(events, signal, fs=1.0) -> DesatBiomarkers:
    """Summary statistics of a scope's desaturation events."""
    x = as_signal(signal)
    fs = check_fs(fs)
    hours = x.size / fs / 3600.0
    odi = len(events) / hours
    length = _stats([e.duration_s for e in events])
    depth = _stats([e.depth_max for e in events])
    depth100 = _stats([e.depth_100 for e in events])
    slope = _stats([e.slope for e in events])
    area = _stats([e.area_max for e in events])
    area100 = _stats([e.area_100 for e in events])
    gaps = [(nxt.start_idx - cur.end_idx) / fs
            for cur, nxt in zip(events, events[1:])]
    gap = _stats(gaps)
    return DesatBiomarkers(
        odi=odi,
        length_mean=length[0], length_std=length[1],
        depth_mean=depth[0], depth_std=depth[1],
        depth100_mean=depth100[0], depth100_std=depth100[1],
        slope_mean=slope[0], slope_std=slope[1],
        area_mean=area[0], area_std=area[1],
        area100_mean=area100[0], area100_std=area100[1],
        gap_mean=gap[0], gap_std=gap[1],
    )


@dataclass(frozen=True)
class HypoxicBurden:
    desat_time_frac: float
    desat_area_rate: float
    desat_area100_rate: float
    time_below_level: float
    deficit_below_level: float

    def as_features(self) -> dict:
        return {
            "desat_time_frac": self.desat_time_frac,
            "desat_area_rate": self.desat_area_rate,
            "desat_area100_rate": self.desat_area100_rate,
            "time_below_level": self.time_below_level,
            "deficit_below_level": self.deficit_below_level,
        }


def hypoxic_burden(signal, fs=1.0, events=(), level=CT_LEVEL) -> HypoxicBurden:
    """Time- and area-based hypoxic load of a scope.

    ``desat_time_frac`` is the fraction of recording time spent inside the
    supplied events; the area rates normalise the event areas by total
    recording time; ``time_below_level``/``deficit_below_level`` are the
    percentage of samples below *level* and the mean SpO2 deficit below it.
    """
    x = as_signal(signal)
    fs = check_fs(fs)
    total_s = x.size / fs
    return HypoxicBurden(
        desat_time_frac=float(sum(e.duration_s for e in events) / total_s),
        desat_area_rate=float(sum(e.area_max for e in events) / total_s),
        desat_area100_rate=float(sum(e.area_100 for e in events) / total_s),
        time_below_level=float(100.0 * np.mean(x < level)),
        deficit_below_level=float(np.sum(np.maximum(0.0, level - x)) / x.size),
    )


EVENT_DUMP_HEADER = ("start_idx,min_idx,end_idx,baseline,min_value,"
                     "depth_max,slope,area_max,area_100")


def dump_events(events, path) -> None:
    """Write events as CSV for debugging and oracle tests."""
    with open(path, "w") as fh:
        fh.write(EVENT_DUMP_HEADER + "\n")
        for e in events:
            fh.write(f"{e.start_idx},{e.min_idx},{e.end_idx},{e.baseline!r},"
                     f"{e.min_value!r},{e.depth_max!r},{e.slope!r},"
                     f"{e.area_max!r},{e.area_100!r}\n")
