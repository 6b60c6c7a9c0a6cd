import numpy as np
import pytest

from oxiscreen.desat import detect_relative, hypoxic_burden
from oxiscreen.io import load_manifest
from oxiscreen.preprocess import preprocess_signal
from oxiscreen.synth import (CohortSpec, default_profile, generate, make_cohort,
                             plant_log, read_plant_log)
from dataclasses import replace


def test_healthy_zero_noise_constant():
    profile = replace(default_profile("healthy"), noise_sd=0.0)
    rec = generate(profile, duration_h=1.0)
    assert np.all(rec.samples == rec.samples[0])
    assert rec.samples[0] == 96.0
    assert plant_log(profile, 1.0) == []


def test_same_seed_identical():
    profile = default_profile("osa_severe", seed=11)
    a = generate(profile, 2.0)
    b = generate(profile, 2.0)
    assert np.array_equal(a.samples, b.samples)
    assert plant_log(profile, 2.0) == plant_log(profile, 2.0)
    other = generate(default_profile("osa_severe", seed=12), 2.0)
    assert not np.array_equal(a.samples, other.samples)


def test_samples_in_physiological_range():
    for kind in ("healthy", "osa_severe", "copd_like", "ovs_like"):
        rec = generate(default_profile(kind, seed=3), 2.0)
        assert rec.samples.min() >= 50.0
        assert rec.samples.max() <= 100.0


def test_planted_rate_recovered_by_detector():
    profile = replace(default_profile("osa_severe", seed=21), desat_depth=3.5,
                      desat_rate=30.0)
    rec = generate(profile, 8.0)
    clean = preprocess_signal(rec.samples)
    events = detect_relative(clean, fs=1.0, drop_threshold=3.0)
    rate = len(events) / 8.0
    assert rate == pytest.approx(30.0, abs=3.0)


def test_planted_duty_cycle_matches_ct90():
    profile = replace(default_profile("copd_like", seed=22),
                      plateau_fraction=0.20)
    rec = generate(profile, 8.0)
    clean = preprocess_signal(rec.samples)
    burden = hypoxic_burden(clean, fs=1.0, events=[], level=90.0)
    assert burden.time_below_level == pytest.approx(20.0, abs=2.0)


def test_plant_log_poisson_count_and_union():
    profile = default_profile("osa_mild", seed=23)
    log = plant_log(profile, 6.0)
    desats = [ev for ev in log if ev.kind == "desat"]
    assert len(desats) > 0
    # events are disjoint, so the union fraction is the duration sum
    ordered = sorted(desats, key=lambda ev: ev.start_s)
    for cur, nxt in zip(ordered, ordered[1:]):
        assert nxt.start_s >= cur.end_s
    union = sum(ev.end_s - ev.start_s for ev in desats)
    pod = union / (6.0 * 3600.0)
    assert pod == pytest.approx(
        len(desats) * profile.desat_duration_s / (6.0 * 3600.0))


def test_copd_cohort_lower_median_higher_ct90():
    meds, cts = {"copd_like": [], "healthy": []}, {"copd_like": [], "healthy": []}
    for kind in ("copd_like", "healthy"):
        for seed in range(50):
            rec = generate(default_profile(kind, seed=seed), 1.0)
            clean = preprocess_signal(rec.samples)
            meds[kind].append(np.median(clean))
            cts[kind].append(hypoxic_burden(clean, 1.0, [], 90.0).time_below_level)
    assert np.median(meds["copd_like"]) < np.median(meds["healthy"])
    assert np.median(cts["copd_like"]) > np.median(cts["healthy"])


def test_cohort_counts_largest_remainder():
    spec = CohortSpec(n=10)
    assert spec.counts() == {"healthy": 4, "osa_mild": 2, "osa_severe": 1,
                             "copd_like": 2, "ovs_like": 1}
    assert sum(CohortSpec(n=97).counts().values()) == 97


def test_make_cohort_round_trip(tmp_path):
    spec = CohortSpec(n=6, duration_h=0.2, seed=5)
    recordings = make_cohort(spec, tmp_path)
    assert len(recordings) == 6
    assert len(list((tmp_path / "signals").glob("*.txt"))) == 6
    loaded = load_manifest(tmp_path / "manifest.csv")
    assert [r.patient_id for r in loaded] == [r.patient_id for r in recordings]
    for a, b in zip(loaded, recordings):
        assert np.array_equal(a.samples, b.samples)
        assert a.label == b.label
        assert a.psg is not None
    log = read_plant_log(tmp_path / "plant_log.csv")
    assert set(log) <= {r.patient_id for r in recordings}


def test_make_cohort_deterministic_bytes(tmp_path):
    spec = CohortSpec(n=4, duration_h=0.1, seed=9)
    make_cohort(spec, tmp_path / "a")
    make_cohort(spec, tmp_path / "b")
    for name in ("manifest.csv", "plant_log.csv", "signals/p0000.txt"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_bad_profile_kind():
    with pytest.raises(ValueError, match="kind"):
        default_profile("narcolepsy")
    with pytest.raises(ValueError, match="duration"):
        generate(default_profile("healthy"), 0.0)
