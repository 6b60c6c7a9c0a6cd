"""Synthetic overnight SpO2 cohort generator with ground-truth event logs.

Profiles compose three ingredients on top of a noisy baseline: short
V-shaped desaturations arriving at a target hourly rate (apneic pattern),
long shallow hypoxemic plateaus clustered into simulated REM periods
(chronic pattern), or both.  Every planted event is logged, so detector
recall/precision can be scored exactly.  Signals are clipped to [50, 100]
and quantised to integer percent like real oximeter output (disable with
``quantize=False``).
"""

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .io import write_manifest, write_signal
from .records import CopdLabel, Demographics, OximetryRecording, PsgFeatures

KINDS = ("healthy", "osa_mild", "osa_severe", "copd_like", "ovs_like")

#: GOLD grade mix for generated COPD-like patients (grade: probability)
GOLD_MIX = ((1, 0.200), (2, 0.657), (3, 0.129), (4, 0.014))

_REM_CYCLE_S = 90 * 60.0
_DESAT_GAP_S = 25.0  # clearance between planted desaturations
_RAMP_S = 30.0       # plateau edge ramp


@dataclass(frozen=True)
class SynthProfile:
    kind: str
    baseline: float
    desat_rate: float          # events/h
    desat_depth: float         # %
    desat_duration_s: float
    plateau_depth: float       # sustained hypoxemia below baseline, %
    plateau_fraction: float    # fraction of recording spent in plateaus
    noise_sd: float
    quantize: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 50.0 < self.baseline <= 100.0:
            raise ValueError(f"baseline must be in (50, 100], got {self.baseline}")
        for name in ("desat_rate", "desat_depth", "desat_duration_s",
                     "plateau_depth", "plateau_fraction", "noise_sd"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def default_profile(kind: str, seed: int = 0) -> SynthProfile:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    presets = {
        "healthy": dict(baseline=96.0, desat_rate=0.0, desat_depth=0.0,
                        desat_duration_s=0.0, plateau_depth=0.0,
                        plateau_fraction=0.0, noise_sd=0.3),
        "osa_mild": dict(baseline=95.0, desat_rate=10.0, desat_depth=4.0,
                         desat_duration_s=40.0, plateau_depth=0.0,
                         plateau_fraction=0.0, noise_sd=0.3),
        "osa_severe": dict(baseline=94.0, desat_rate=30.0, desat_depth=5.0,
                           desat_duration_s=45.0, plateau_depth=0.0,
                           plateau_fraction=0.0, noise_sd=0.3),
        "copd_like": dict(baseline=92.0, desat_rate=0.0, desat_depth=0.0,
                          desat_duration_s=0.0, plateau_depth=4.5,
                          plateau_fraction=0.25, noise_sd=0.3),
        "ovs_like": dict(baseline=92.0, desat_rate=22.0, desat_depth=4.5,
                         desat_duration_s=45.0, plateau_depth=4.5,
                         plateau_fraction=0.25, noise_sd=0.3),
    }
    return SynthProfile(kind=kind, seed=seed, **presets[kind])


@dataclass(frozen=True)
class PlantedEvent:
    start_s: float
    end_s: float
    kind: str  # "desat" or "plateau"


def _plateau_schedule(rng, n, fs, fraction):
    """One plateau per simulated REM cycle, jittered inside the cycle, whose
    total length tracks fraction * recording time."""
    if fraction <= 0:
        return []
    cycle = int(round(_REM_CYCLE_S * fs))
    events = []
    start = 0
    while start < n:
        span = min(cycle, n - start)
        length = int(round(fraction * span))
        if length >= int(2 * _RAMP_S * fs) + 2:
            slack = span - length
            offset = int(rng.integers(0, slack + 1))
            events.append((start + offset, start + offset + length))
        start += cycle
    return events


def _desat_schedule(rng, n, fs, rate_per_h, duration_s):
    """Poisson count of non-overlapping events placed uniformly with a
    minimum clearance; returns (start, end) sample index pairs."""
    if rate_per_h <= 0 or duration_s <= 0:
        return []
    hours = n / fs / 3600.0
    count = int(rng.poisson(rate_per_h * hours))
    if count == 0:
        return []
    slot = int(round((duration_s + _DESAT_GAP_S) * fs))
    free = n - count * slot
    if free < 0:
        count = n // slot
        free = n - count * slot
    offsets = np.sort(rng.uniform(0, free, count)) if count else []
    dur = int(round(duration_s * fs))
    return [(int(off) + i * slot, int(off) + i * slot + dur)
            for i, off in enumerate(offsets)]


def _synthesize(profile: SynthProfile, duration_h: float, fs: float = 1.0):
    if duration_h <= 0:
        raise ValueError(f"duration_h must be positive, got {duration_h}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(profile.seed)))
    n = int(round(duration_h * 3600.0 * fs))
    delta = np.zeros(n)
    log = []

    for start, end in _plateau_schedule(rng, n, fs, profile.plateau_fraction):
        ramp = min(int(_RAMP_S * fs), (end - start) // 2)
        shape = np.ones(end - start)
        edge = 0.5 - 0.5 * np.cos(np.linspace(0.0, np.pi, ramp))
        shape[:ramp] = edge
        shape[-ramp:] = edge[::-1]
        delta[start:end] -= profile.plateau_depth * shape
        log.append(PlantedEvent(start / fs, end / fs, "plateau"))

    for start, end in _desat_schedule(rng, n, fs, profile.desat_rate,
                                      profile.desat_duration_s):
        length = end - start
        fall = max(1, int(round(0.45 * length)))
        depth = profile.desat_depth * rng.uniform(0.95, 1.15)
        shape = np.empty(length)
        shape[:fall] = np.linspace(0.0, 1.0, fall)
        shape[fall:] = np.linspace(1.0, 0.0, length - fall)
        delta[start:end] -= depth * shape
        log.append(PlantedEvent(start / fs, end / fs, "desat"))

    signal = profile.baseline + delta + rng.normal(0.0, profile.noise_sd, n)
    signal = np.clip(signal, 50.0, 100.0)
    if profile.quantize:
        signal = np.round(signal)

    is_copd = profile.kind in ("copd_like", "ovs_like")
    if is_copd:
        grades, probs = zip(*GOLD_MIX)
        gold = int(rng.choice(grades, p=np.array(probs) / sum(probs)))
        label = CopdLabel(is_copd=True, gold=gold)
        age = float(np.clip(np.round(rng.normal(66, 8)), 40, 90))
        smoking = int(rng.choice([1, 2], p=[0.4, 0.6]))
        gender = "male" if rng.random() < 0.85 else "female"
    else:
        label = CopdLabel(is_copd=False)
        age = float(np.clip(np.round(rng.normal(54, 10)), 25, 85))
        smoking = int(rng.choice([0, 1, 2], p=[0.35, 0.45, 0.2]))
        gender = "male" if rng.random() < 0.72 else "female"
    demographics = Demographics(
        gender=gender, age=age,
        weight=float(np.clip(np.round(rng.normal(84, 12)), 45, 140)),
        height=float(np.clip(np.round(rng.normal(168, 9)), 145, 195)),
        smoking=smoking,
    )
    ahi_mean = {"healthy": 4.0, "osa_mild": 12.0, "osa_severe": 45.0,
                "copd_like": 8.0, "ovs_like": 40.0}[profile.kind]
    ahi = float(np.clip(rng.normal(ahi_mean, ahi_mean * 0.2 + 1.0), 0, 120))
    ai = float(ahi * rng.uniform(0.3, 0.7))
    stages = rng.normal([14.0, 33.0, 34.0, 14.0], 4.0).clip(1.0)
    stages = stages / stages.sum() * rng.uniform(85.0, 99.0)
    psg = PsgFeatures(
        ahi=ahi, ai=ai, hi=float(ahi - ai),
        n1=float(stages[0]), n2=float(stages[1]), n3=float(stages[2]),
        rem=float(stages[3]),
        arousal=float(np.clip(rng.normal(25 + 0.3 * ahi, 6), 0, 120)),
        se=float(rng.uniform(65.0, 95.0)),
    )
    return signal, log, label, demographics, psg


def generate(profile: SynthProfile, duration_h: float, fs: float = 1.0,
             patient_id: str = "synthetic") -> OximetryRecording:
    """Deterministically generate one overnight recording for *profile*."""
    signal, _, label, demographics, psg = _synthesize(profile, duration_h, fs)
    return OximetryRecording(patient_id=patient_id, samples=signal, fs=fs,
                             label=label, demographics=demographics, psg=psg)


def plant_log(profile: SynthProfile, duration_h: float, fs: float = 1.0) -> list:
    """Ground-truth annotations matching ``generate`` for the same profile."""
    _, log, *_ = _synthesize(profile, duration_h, fs)
    return log


@dataclass(frozen=True)
class CohortSpec:
    n: int
    duration_h: float = 8.0
    fractions: tuple = (("healthy", 0.40), ("osa_mild", 0.15),
                        ("osa_severe", 0.15), ("copd_like", 0.20),
                        ("ovs_like", 0.10))
    seed: int = 0

    def counts(self) -> dict:
        """Largest-remainder apportionment of n across kinds (ties resolved
        in declaration order)."""
        quotas = [(kind, self.n * frac) for kind, frac in self.fractions]
        counts = {kind: int(q) for kind, q in quotas}
        leftover = self.n - sum(counts.values())
        remainders = sorted(
            ((q - int(q), -i, kind) for i, (kind, q) in enumerate(quotas)),
            reverse=True)
        for _, _, kind in remainders[:leftover]:
            counts[kind] += 1
        return counts


def make_cohort(spec: CohortSpec, out_dir) -> list:
    """Write signal files, a manifest and the plant log; return recordings."""
    out_dir = Path(out_dir)
    signals_dir = out_dir / "signals"
    signals_dir.mkdir(parents=True, exist_ok=True)
    counts = spec.counts()
    kinds = [kind for kind, _ in spec.fractions for _ in range(counts[kind])]

    recordings = []
    manifest_rows = []
    log_rows = []
    for index, kind in enumerate(kinds):
        patient_id = f"p{index:04d}"
        seed = int(np.random.SeedSequence(entropy=spec.seed,
                                          spawn_key=(index,)).generate_state(1)[0])
        profile = replace(default_profile(kind), seed=seed)
        signal, log, label, demographics, psg = _synthesize(profile, spec.duration_h)
        rec = OximetryRecording(patient_id=patient_id, samples=signal, fs=1.0,
                                label=label, demographics=demographics, psg=psg)
        recordings.append(rec)
        rel_path = f"signals/{patient_id}.txt"
        write_signal(out_dir / rel_path, signal)
        row = {
            "patient_id": patient_id, "signal_path": rel_path, "fs": "1",
            "is_copd": int(label.is_copd),
            "gold": label.gold if label.gold is not None else None,
            "gender": demographics.gender, "age": f"{demographics.age:g}",
            "weight": f"{demographics.weight:g}",
            "height": f"{demographics.height:g}",
            "smoking": demographics.smoking,
        }
        row.update({k: repr(v) for k, v in psg.as_features().items()})
        manifest_rows.append(row)
        log_rows.extend((patient_id, ev.start_s, ev.end_s, ev.kind) for ev in log)

    write_manifest(out_dir / "manifest.csv", manifest_rows)
    with open(out_dir / "plant_log.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("patient_id", "start_s", "end_s", "kind"))
        writer.writerows(log_rows)
    return recordings


def read_plant_log(path) -> dict:
    """Plant log grouped by patient id."""
    events = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            events.setdefault(row["patient_id"], []).append(PlantedEvent(
                start_s=float(row["start_s"]), end_s=float(row["end_s"]),
                kind=row["kind"]))
    return events
