import numpy as np
import pytest

from oxiscreen.desat import (desat_biomarkers, detect_hard, detect_relative,
                             dump_events, event_from_range, hypoxic_burden)


def _fuzz_signal(rng, n=1800):
    # quantized plateau-and-dip signal resembling preprocessed SpO2
    base = np.full(n, 95.0)
    for _ in range(rng.integers(2, 12)):
        start = int(rng.integers(0, n - 80))
        length = int(rng.integers(10, 80))
        depth = rng.uniform(1, 9)
        base[start:start + length] -= depth
    return np.round(base + rng.normal(0, 0.3, n))


# --- relative detector -------------------------------------------------------

def test_relative_basic_event():
    events = detect_relative([96, 96, 92, 92, 96, 96], fs=1, drop_threshold=3)
    assert len(events) == 1
    e = events[0]
    assert e.baseline == 96
    assert e.min_value == 92
    assert e.depth_max == 4
    assert e.start_idx == 0 and e.end_idx == 4
    assert e.min_idx == 2


def test_relative_constant_no_events():
    assert detect_relative(np.full(600, 95.0), fs=1) == []


def test_relative_truncated_at_cap():
    # 200 s monotone 10% drop then recovery: truncated at 120 s, not discarded
    drop = np.linspace(98, 88, 201)
    recover = np.linspace(88, 98, 101)[1:]
    signal = np.concatenate([[98] * 10, drop, recover, [98] * 10])
    events = detect_relative(signal, fs=1, drop_threshold=3, max_len_s=120)
    assert len(events) >= 1
    assert events[0].duration_s == 120.0
    assert all(e.duration_s <= 120.0 for e in events)


def test_relative_duration_cap_and_disjoint_fuzz():
    rng = np.random.default_rng(11)
    for _ in range(25):
        signal = _fuzz_signal(rng)
        events = detect_relative(signal, fs=1)
        for e in events:
            assert e.duration_s <= 120.0
            assert e.start_idx <= e.min_idx < e.end_idx
            assert e.depth_max >= 3.0
        for cur, nxt in zip(events, events[1:]):
            assert nxt.start_idx >= cur.end_idx


def test_relative_threshold_monotonicity_isolated_dips():
    # monotonicity holds for isolated, fully recovering dips (one event per
    # sufficiently deep dip); nested plateau-plus-dip morphologies can split
    # into more events at a higher threshold because recovery to
    # baseline - threshold arrives sooner, so no universal claim is made
    rng = np.random.default_rng(5)
    for _ in range(25):
        n = 2400
        signal = np.full(n, 96.0)
        n_dips = int(rng.integers(3, 15))
        for k in range(n_dips):
            start = 60 + k * (n - 120) // n_dips
            depth = rng.uniform(1.0, 9.0)
            width = int(rng.integers(6, 40))
            signal[start:start + width] -= depth
        counts = [len(detect_relative(signal, fs=1, drop_threshold=t))
                  for t in (2.0, 3.0, 4.0, 5.0, 6.0)]
        assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_relative_respects_fs():
    # same morphology sampled twice as fast gives the same duration in seconds
    signal = np.array([96, 96, 92, 92, 96, 96], dtype=float)
    events_1 = detect_relative(signal, fs=1, drop_threshold=3)
    events_2 = detect_relative(np.repeat(signal, 2), fs=2, drop_threshold=3)
    assert len(events_1) == len(events_2) == 1
    assert events_2[0].duration_s == events_1[0].duration_s == 4.0


# --- hard detector -----------------------------------------------------------

def test_hard_single_run_duration():
    signal = np.full(1000, 95.0)
    signal[100:400] = 90.0
    events = detect_hard(signal, fs=1)  # level = median = 95
    assert len(events) == 1
    assert events[0].start_idx == 100
    assert events[0].end_idx == 400
    assert events[0].duration_s == 300.0
    assert events[0].baseline == 95.0


def test_hard_constant_no_events():
    assert detect_hard(np.full(100, 94.0), fs=1) == []


def test_hard_single_sample_run_suppressed():
    signal = np.full(100, 95.0)
    signal[50] = 90.0
    assert detect_hard(signal, fs=1) == []
    signal[51] = 90.0
    assert len(detect_hard(signal, fs=1)) == 1


def test_hard_no_length_cap():
    signal = np.full(2000, 95.0)
    signal[100:1000] = 92.0
    events = detect_hard(signal, fs=1)
    assert len(events) == 1
    assert events[0].duration_s == 900.0


def test_embedded_short_desats_one_hard_event():
    # four short dips riding one long sub-median excursion: the relative
    # detector sees the dips, the hard detector sees one long event
    signal = np.full(1200, 96.0)
    excursion = np.full(400, 93.5)
    for k in range(4):
        dip = 60 + k * 80
        excursion[dip:dip + 12] = 89.5
    signal[400:800] = excursion
    relative = detect_relative(signal, fs=1, drop_threshold=3)
    hard = detect_hard(signal, fs=1)
    assert len(relative) == 4
    assert len(hard) == 1
    assert hard[0].start_idx == 400 and hard[0].end_idx == 800


# --- event biomarkers --------------------------------------------------------

def test_odi_rate():
    signal = np.full(7200, 95.0)
    events = []
    for k in range(6):
        start = 500 + k * 1000
        signal[start:start + 20] = 91.0
        events.append(event_from_range(signal, 1.0, start, start + 20, 95.0))
    bm = desat_biomarkers(events, signal, fs=1)
    assert bm.odi == pytest.approx(3.0)  # 6 events in 2 h


def test_triangular_event_statistics():
    signal = np.array([96.0, 94.0, 92.0, 94.0, 96.0])
    event = event_from_range(signal, 1.0, 0, 4, 96.0)
    bm = desat_biomarkers([event], signal, fs=1)
    assert bm.length_mean == 4.0
    assert bm.depth_mean == 4.0
    assert bm.slope_mean == pytest.approx(2.0)  # 4% over the 2 s fall
    # hand rectangle sum over [0, 4): (100-96)+(100-94)+(100-92)+(100-94)
    assert bm.area100_mean == pytest.approx(24.0)
    assert bm.length_std == 0.0 and bm.gap_mean == 0.0 and bm.gap_std == 0.0


def test_no_events_all_zero():
    signal = np.full(600, 95.0)
    bm = desat_biomarkers([], signal, fs=1)
    assert all(v == 0.0 for v in vars(bm).values())


def test_zero_time_to_minimum_slope():
    signal = np.array([96.0, 90.0, 92.0, 96.0])
    event = event_from_range(signal, 2.0, 1, 3, 96.0)
    assert event.min_idx == event.start_idx
    assert event.slope == pytest.approx(6.0 * 2.0)  # depth * fs


def test_biomarkers_match_naive_recomputation():
    rng = np.random.default_rng(3)
    for _ in range(15):
        signal = _fuzz_signal(rng)
        events = detect_relative(signal, fs=1)
        bm = desat_biomarkers(events, signal, fs=1)
        if not events:
            assert bm.odi == 0.0
            continue
        durations = [e.duration_s for e in events]
        assert bm.odi == pytest.approx(len(events) / (len(signal) / 3600))
        assert bm.length_mean == pytest.approx(np.mean(durations))
        assert bm.length_std == pytest.approx(np.std(durations))
        assert bm.depth_mean == pytest.approx(np.mean([e.depth_max for e in events]))
        assert bm.area_mean == pytest.approx(np.mean([e.area_max for e in events]))
        gaps = [events[i + 1].start_idx - events[i].end_idx
                for i in range(len(events) - 1)]
        if gaps:
            assert bm.gap_mean == pytest.approx(np.mean(gaps))
            assert bm.gap_std == pytest.approx(np.std(gaps))


def test_event_areas_match_rectangle_sums():
    rng = np.random.default_rng(9)
    for _ in range(10):
        signal = _fuzz_signal(rng)
        for e in detect_relative(signal, fs=1):
            seg = signal[e.start_idx:e.end_idx]
            assert e.area_max == pytest.approx(np.sum(e.baseline - seg))
            assert e.area_100 == pytest.approx(np.sum(100.0 - seg))


# --- hypoxic burden ----------------------------------------------------------

def test_ct90_half_below():
    signal = np.array([88.0] * 500 + [95.0] * 500)
    hb = hypoxic_burden(signal, fs=1, events=[], level=90)
    assert hb.time_below_level == pytest.approx(50.0)


def test_constant_signal_zero_burden():
    hb = hypoxic_burden(np.full(1000, 95.0), fs=1, events=[], level=90)
    assert hb.desat_time_frac == 0.0
    assert hb.time_below_level == 0.0
    assert hb.deficit_below_level == 0.0


def test_single_event_pod_and_area_rate():
    signal = np.full(3000, 93.0)
    signal[1000:1300] = 88.0
    event = event_from_range(signal, 1.0, 1000, 1300, 93.0)
    hb = hypoxic_burden(signal, fs=1, events=[event], level=90)
    assert hb.desat_time_frac == pytest.approx(0.1)
    assert hb.desat_area_rate == pytest.approx(0.5)  # 5% * 300 s / 3000 s


def test_ct_ca_monotone_in_level():
    rng = np.random.default_rng(21)
    signal = _fuzz_signal(rng)
    levels = [80, 85, 88, 90, 92, 95, 99]
    cts = [hypoxic_burden(signal, 1, [], level=x).time_below_level for x in levels]
    cas = [hypoxic_burden(signal, 1, [], level=x).deficit_below_level for x in levels]
    assert all(a <= b for a, b in zip(cts, cts[1:]))
    assert all(a <= b for a, b in zip(cas, cas[1:]))


def test_event_dump_format(tmp_path):
    signal = np.array([96.0, 94.0, 92.0, 94.0, 96.0, 96.0])
    events = detect_relative(signal, fs=1)
    path = tmp_path / "events.csv"
    dump_events(events, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == ("start_idx,min_idx,end_idx,baseline,min_value,"
                        "depth_max,slope,area_max,area_100")
    assert len(lines) == 1 + len(events)
    first = lines[1].split(",")
    assert int(first[0]) == events[0].start_idx
    assert float(first[5]) == events[0].depth_max
