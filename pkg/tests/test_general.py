import numpy as np
import pytest

from oxiscreen.biomarkers.general import (delta_index, level_crossings,
                                          stat_biomarkers)

from oracles import naive_crossings, naive_delta_index


def test_constant_signal():
    bm = stat_biomarkers(np.full(100, 95.0), fs=1)
    assert bm.mean == bm.median == bm.minimum == 95.0
    assert bm.std == 0.0
    assert bm.value_range == 0.0
    assert bm.below_median_pct == 0.0
    assert bm.crossings == 0.0
    assert bm.delta_index == 0.0


def test_alternating_signal_crossings():
    x = np.tile([90.0, 96.0], 30)
    bm = stat_biomarkers(x, fs=1)
    assert bm.median == 93.0
    # every adjacent pair crosses the median level
    assert bm.crossings == len(x) - 1
    assert bm.crossings == naive_crossings(x, 93.0)


def test_crossings_on_level_not_counted():
    assert level_crossings([94.0, 93.0, 92.0], 93.0) == 0
    assert level_crossings([94.0, 92.0], 93.0) == 1
    assert level_crossings([94.0, 93.0, 94.0], 93.0) == 0


def test_delta_index_block_signal():
    # 12 s blocks alternating 96/92: consecutive segment means differ by 4
    x = np.concatenate([np.full(12, 96.0) if i % 2 == 0 else np.full(12, 92.0)
                        for i in range(10)])
    assert delta_index(x, fs=1, window_s=12) == pytest.approx(4.0)
    assert delta_index(x, fs=1, window_s=12) == pytest.approx(
        naive_delta_index(x, 1, 12))


def test_delta_index_short_signal_warns():
    with pytest.warns(UserWarning, match="too short"):
        assert delta_index(np.full(15, 95.0), fs=1, window_s=12) == 0.0


def test_delta_index_drops_partial_tail():
    x = np.concatenate([np.full(12, 96.0), np.full(12, 92.0), np.full(5, 50.0)])
    assert delta_index(x, fs=1, window_s=12) == pytest.approx(4.0)


def test_percentile_extremes():
    rng = np.random.default_rng(0)
    x = rng.uniform(60, 99, 500)
    assert stat_biomarkers(x, 1, percentile=0).percentile == x.min()
    assert stat_biomarkers(x, 1, percentile=100).percentile == x.max()


def test_shift_equivariance():
    rng = np.random.default_rng(1)
    x = np.round(rng.uniform(70, 99, 600))
    shift = 3.0
    a = stat_biomarkers(x, 1)
    b = stat_biomarkers(x + shift, 1)
    assert b.mean == pytest.approx(a.mean + shift)
    assert b.median == pytest.approx(a.median + shift)
    assert b.minimum == pytest.approx(a.minimum + shift)
    assert b.percentile == pytest.approx(a.percentile + shift)
    assert b.std == pytest.approx(a.std)
    assert b.value_range == pytest.approx(a.value_range)
    assert b.below_median_pct == pytest.approx(a.below_median_pct)
    assert b.delta_index == pytest.approx(a.delta_index)
    assert b.crossings == a.crossings  # level follows the median


def test_below_median_fraction_counts_at_or_below():
    x = np.array([95.0] * 6 + [93.0] * 2 + [90.0] * 2)
    with pytest.warns(UserWarning):  # 10 samples: too short for delta index
        bm = stat_biomarkers(x, 1, below_median_drop=2.0)
    # median 95; samples <= 93: four of ten
    assert bm.below_median_pct == pytest.approx(40.0)


def test_all_outputs_finite_fuzz():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.uniform(50, 100, rng.integers(30, 500))
        bm = stat_biomarkers(x, 1)
        assert all(np.isfinite(v) for v in vars(bm).values())
