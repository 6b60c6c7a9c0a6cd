"""Data model for oximetry recordings, labels, demographics and PSG features."""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .validation import as_signal, check_fs

SMOKING_CODES = (0, 1, 2)  # non-smoker, smoker, ex-smoker
GENDERS = ("male", "female")

# Airflow-limitation grade bands from % of predicted FEV1 (post-bronchodilator).
_GOLD_BANDS = ((80.0, 1), (50.0, 2), (30.0, 3))


def gold_from_fev1(fev1_percent: float) -> int:
    """Grade airflow limitation 1-4 from % of predicted FEV1."""
    fev1 = float(fev1_percent)
    if fev1 <= 0:
        raise ValueError(f"FEV1 percent must be positive, got {fev1}")
    for floor, grade in _GOLD_BANDS:
        if fev1 >= floor:
            return grade
    return 4


@dataclass(frozen=True)
class CopdLabel:
    is_copd: bool
    gold: Optional[int] = None

    def __post_init__(self):
        if self.gold is not None:
            if not self.is_copd:
                raise ValueError("gold grade present on a non-COPD label")
            if self.gold not in (1, 2, 3, 4):
                raise ValueError(f"gold grade must be 1..4, got {self.gold}")


@dataclass(frozen=True)
class Demographics:
    gender: str
    age: float
    weight: float
    height: float
    smoking: int

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise ValueError(f"gender must be one of {GENDERS}, got {self.gender!r}")
        for field in ("age", "weight", "height"):
            if not getattr(self, field) > 0:
                raise ValueError(f"{field} must be positive, got {getattr(self, field)}")
        if self.smoking not in SMOKING_CODES:
            raise ValueError(f"smoking must be in {SMOKING_CODES}, got {self.smoking}")

    def as_features(self) -> dict:
        # gender encoded male=1/female=0
        return {
            "gender": 1.0 if self.gender == "male" else 0.0,
            "age": float(self.age),
            "weight": float(self.weight),
            "height": float(self.height),
            "smoking": float(self.smoking),
        }


#: Sleep-stage fractions may exceed 100% by this much (scorer rounding).
STAGE_SUM_TOLERANCE = 0.5


@dataclass(frozen=True)
class PsgFeatures:
    ahi: float
    ai: float
    hi: float
    n1: float
    n2: float
    n3: float
    rem: float
    arousal: float
    se: float

    def __post_init__(self):
        for field in ("ahi", "ai", "hi", "n1", "n2", "n3", "rem", "arousal", "se"):
            if getattr(self, field) < 0:
                raise ValueError(f"{field} must be >= 0, got {getattr(self, field)}")
        stage_sum = self.n1 + self.n2 + self.n3 + self.rem
        if stage_sum > 100.0 + STAGE_SUM_TOLERANCE:
            raise ValueError(f"sleep stages sum to {stage_sum:.2f}% > 100%")

    def as_features(self) -> dict:
        return {f: float(getattr(self, f))
                for f in ("ahi", "ai", "hi", "n1", "n2", "n3", "rem", "arousal", "se")}


@dataclass(frozen=True)
class OximetryRecording:
    """One patient's SpO2 series with label, demographics and optional PSG numbers."""

    patient_id: str
    samples: np.ndarray
    fs: float
    label: CopdLabel
    demographics: Demographics
    psg: Optional[PsgFeatures] = None

    def __post_init__(self):
        object.__setattr__(self, "samples", as_signal(self.samples, "samples"))
        object.__setattr__(self, "fs", check_fs(self.fs))
        if not self.patient_id:
            raise ValueError("patient_id must be non-empty")

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.fs

    def with_samples(self, samples) -> "OximetryRecording":
        return replace(self, samples=as_signal(samples, "samples"))
