"""Windowing and feature-matrix assembly.

Each scope (a 2-hour window or the whole recording) yields 59 oximetry
biomarkers: 24 shape/complexity/periodicity statistics, the 15 desaturation
statistics once per detector (suffixes ``_rel`` and ``_hard``), and 5 hypoxic
burden values.  Window rows carry the window-scope values plus the whole-
recording values suffixed ``_overall`` (118 oximetry columns), then
demographics and PSG columns depending on the model kind:

* model1: demographics only (5 columns)
* model2: oximetry biomarkers (118)
* model3: oximetry + demographics (123)
* model4: oximetry + demographics + PSG (132)
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .biomarkers import prsa, spectral, stat_biomarkers
from .biomarkers.complexity import (approx_entropy, central_tendency,
                                    dfa_fluctuation, lempel_ziv, sample_entropy)
from .config import RunConfig
from .desat import desat_biomarkers, detect_hard, detect_relative, hypoxic_burden
from .preprocess import preprocess
from .records import OximetryRecording
from .validation import ParamMixin

DEMOGRAPHIC_COLUMNS = ("gender", "age", "weight", "height", "smoking")
PSG_COLUMNS = ("ahi", "ai", "hi", "n1", "n2", "n3", "rem", "arousal", "se")
ID_COLUMNS = ("patient_id", "window_index", "label")


@dataclass(frozen=True)
class Window:
    patient_id: str
    index: int
    start_s: float
    end_s: float
    samples: np.ndarray


def make_windows(recording: OximetryRecording, is_training: bool,
                 window_s=7200.0, hop_s=3600.0) -> list:
    """Cut full-length windows from a preprocessed recording.

    Training COPD recordings are augmented with ``hop_s`` overlap steps; all
    other cases tile the recording with non-overlapping windows.  Trailing
    partial windows are dropped.
    """
    n_win = int(round(window_s * recording.fs))
    if recording.n_samples < n_win:
        raise ValueError(
            f"recording {recording.patient_id} is shorter than one window "
            f"({recording.n_samples} samples < {n_win})")
    hop = hop_s if (is_training and recording.label.is_copd) else window_s
    n_hop = int(round(hop * recording.fs))
    windows = []
    index = 0
    start = 0
    while start + n_win <= recording.n_samples:
        windows.append(Window(
            patient_id=recording.patient_id,
            index=index,
            start_s=start / recording.fs,
            end_s=(start + n_win) / recording.fs,
            samples=recording.samples[start:start + n_win],
        ))
        index += 1
        start += n_hop
    return windows


def biomarker_vector(signal, fs, config: RunConfig) -> dict:
    """Compute the 59 per-scope oximetry biomarkers, keyed by feature name."""
    values = {}
    values.update(stat_biomarkers(
        signal, fs, percentile=config.percentile,
        below_median_drop=config.below_median_drop,
        delta_window_s=config.delta_window_s).as_features())
    values["approx_entropy"] = approx_entropy(
        signal, m=config.entropy_m, r_factor=config.entropy_r_factor)
    values["lempel_ziv"] = float(lempel_ziv(signal))
    values["central_tendency"] = central_tendency(signal, radius=config.ctm_radius)
    values["sample_entropy"] = sample_entropy(
        signal, m=config.entropy_m, r_factor=config.entropy_r_factor)
    values["dfa_fluct"] = dfa_fluctuation(signal, scale=config.dfa_scale)
    values.update(prsa(signal, fs, halfwidth=config.prsa_halfwidth).as_features())
    values.update(spectral(
        signal, fs, band=(config.psd_band_low, config.psd_band_high),
        method=config.psd_method, segment=config.psd_segment,
        overlap=config.psd_overlap).as_features())

    relative = detect_relative(signal, fs, drop_threshold=config.relative_threshold,
                               max_len_s=config.relative_max_len_s)
    hard = detect_hard(signal, fs)
    values.update(desat_biomarkers(relative, signal, fs).as_features("rel"))
    values.update(desat_biomarkers(hard, signal, fs).as_features("hard"))
    burden_events = relative if config.hypoxic_detector == "relative" else hard
    values.update(hypoxic_burden(signal, fs, burden_events,
                                 level=config.ct_level).as_features())
    return values


_DESAT_NAMES = (
    "odi", "desat_len_mean", "desat_len_std", "desat_depth_mean",
    "desat_depth_std", "desat_depth100_mean", "desat_depth100_std",
    "desat_slope_mean", "desat_slope_std", "desat_area_mean", "desat_area_std",
    "desat_area100_mean", "desat_area100_std", "desat_gap_mean", "desat_gap_std",
)

#: The 59 per-scope oximetry biomarker names, in canonical column order.
SCOPE_COLUMNS = (
    "mean", "median", "minimum", "std", "range", "percentile",
    "below_median_pct", "crossings", "delta_index",
    "approx_entropy", "lempel_ziv", "central_tendency", "sample_entropy",
    "dfa_fluct",
    "prsa_capacity", "prsa_amplitude", "prsa_slope", "prsa_slope_before",
    "prsa_slope_after",
    "autocorr_lag1", "psd_total", "psd_band", "psd_ratio", "psd_peak",
) + tuple(f"{name}_rel" for name in _DESAT_NAMES) \
  + tuple(f"{name}_hard" for name in _DESAT_NAMES) \
  + ("desat_time_frac", "desat_area_rate", "desat_area100_rate",
     "time_below_level", "deficit_below_level")


def oximetry_columns() -> list:
    """Canonical order of the 118 oximetry feature names (window + overall)."""
    base = list(SCOPE_COLUMNS)
    return base + [f"{name}_overall" for name in base]


def model_columns(model_kind: str) -> list:
    if model_kind == "model1":
        return list(DEMOGRAPHIC_COLUMNS)
    columns = oximetry_columns()
    if model_kind == "model2":
        return columns
    if model_kind == "model3":
        return columns + list(DEMOGRAPHIC_COLUMNS)
    if model_kind == "model4":
        return columns + list(DEMOGRAPHIC_COLUMNS) + list(PSG_COLUMNS)
    raise ValueError(f"unknown model kind {model_kind!r}")


@dataclass(frozen=True)
class FeatureRow:
    patient_id: str
    window_index: int
    start_s: float
    label: int
    values: np.ndarray


@dataclass
class FeatureMatrix:
    model_kind: str
    columns: tuple
    rows: list

    @property
    def X(self) -> np.ndarray:
        return np.vstack([r.values for r in self.rows])

    @property
    def y(self) -> np.ndarray:
        return np.array([r.label for r in self.rows], dtype=int)

    @property
    def patients(self) -> list:
        return [r.patient_id for r in self.rows]

    def __len__(self):
        return len(self.rows)

    def subset(self, row_filter) -> "FeatureMatrix":
        return FeatureMatrix(self.model_kind, self.columns,
                             [r for r in self.rows if row_filter(r)])

    def validate(self):
        width = len(self.columns)
        for row in self.rows:
            if row.values.size != width:
                raise ValueError(f"row for {row.patient_id} has {row.values.size} "
                                 f"values, expected {width}")
            if not np.all(np.isfinite(row.values)):
                raise ValueError(f"non-finite feature for {row.patient_id} "
                                 f"window {row.window_index}")
        return self


def featurize_window(window: Window, overall: dict, recording: OximetryRecording,
                     model_kind: str, config: RunConfig) -> FeatureRow:
    """Assemble one window's feature row for the requested model kind."""
    values = {}
    if model_kind != "model1":
        values.update(biomarker_vector(window.samples, recording.fs, config))
        values.update({f"{k}_overall": v for k, v in overall.items()})
    if model_kind in ("model1", "model3", "model4"):
        values.update(recording.demographics.as_features())
    if model_kind == "model4":
        if recording.psg is None:
            raise ValueError(f"model4 requires PSG features but recording "
                             f"{recording.patient_id} has none")
        values.update(recording.psg.as_features())
    ordered = np.array([values[c] for c in model_columns(model_kind)])
    return FeatureRow(
        patient_id=window.patient_id,
        window_index=window.index,
        start_s=window.start_s,
        label=int(recording.label.is_copd),
        values=ordered,
    )


def featurize_recording(recording: OximetryRecording, model_kind: str,
                        is_training: bool, config: RunConfig) -> list:
    """Preprocess one recording and featurize all of its windows."""
    clean = preprocess(recording, k=config.median_window)
    windows = make_windows(clean, is_training,
                           window_s=config.window_s, hop_s=config.hop_s)
    overall = (biomarker_vector(clean.samples, clean.fs, config)
               if model_kind != "model1" else {})
    return [featurize_window(w, overall, clean, model_kind, config)
            for w in windows]


def build_matrix(recordings, model_kind: str, is_training: bool,
                 config: RunConfig, jobs: int = 1) -> FeatureMatrix:
    """Featurize a list of recordings into one matrix (rows in manifest order)."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_recording = list(pool.map(
                lambda rec: featurize_recording(rec, model_kind, is_training, config),
                recordings))
    else:
        per_recording = [featurize_recording(rec, model_kind, is_training, config)
                         for rec in recordings]
    rows = [row for rec_rows in per_recording for row in rec_rows]
    matrix = FeatureMatrix(model_kind=model_kind,
                           columns=tuple(model_columns(model_kind)),
                           rows=rows)
    return matrix.validate()


class FeatureExtractor(ParamMixin):
    """Transformer from recordings to a feature matrix.

    ``augment=True`` applies the training-set window overlap for COPD
    recordings; leave it off for evaluation-style extraction.
    """

    def __init__(self, model_kind="model2", augment=False, config=None, jobs=1):
        self.model_kind = model_kind
        self.augment = augment
        self.config = config
        self.jobs = jobs

    def transform(self, recordings) -> FeatureMatrix:
        config = self.config or RunConfig()
        return build_matrix(recordings, self.model_kind, self.augment,
                            config, jobs=self.jobs)


def write_feature_table(matrix: FeatureMatrix, path) -> None:
    """CSV with patient_id,window_index,label then the ordered feature columns.

    Floats are written with repr so values round-trip bit-exactly.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(ID_COLUMNS) + list(matrix.columns))
        for row in matrix.rows:
            writer.writerow([row.patient_id, row.window_index, row.label]
                            + [repr(float(v)) for v in row.values])


def read_feature_table(path, model_kind="model2") -> FeatureMatrix:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header[:3]) != ID_COLUMNS:
            raise ValueError(f"feature table must start with {ID_COLUMNS}")
        columns = tuple(header[3:])
        rows = []
        for record in reader:
            rows.append(FeatureRow(
                patient_id=record[0],
                window_index=int(record[1]),
                start_s=float("nan"),
                label=int(record[2]),
                values=np.array([float(v) for v in record[3:]]),
            ))
    return FeatureMatrix(model_kind=model_kind, columns=columns, rows=rows)


def write_sidecar(path, config: RunConfig) -> None:
    """Record every biomarker parameter next to a feature table."""
    config.write(path)
