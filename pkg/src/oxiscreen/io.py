"""Manifest and signal-file ingestion.

Signal files are plain text, one SpO2 sample per line, no header.
The manifest is CSV with one recording per row; empty cells mean "absent".
"""

import csv
from pathlib import Path

import numpy as np

from .records import CopdLabel, Demographics, OximetryRecording, PsgFeatures

MANIFEST_COLUMNS = (
    "patient_id", "signal_path", "fs", "is_copd", "gold",
    "gender", "age", "weight", "height", "smoking",
    "ahi", "ai", "hi", "n1", "n2", "n3", "rem", "arousal", "se",
)

_PSG_COLUMNS = ("ahi", "ai", "hi", "n1", "n2", "n3", "rem", "arousal", "se")
_TRUE = {"1", "true", "yes"}
_FALSE = {"0", "false", "no"}


class ManifestError(ValueError):
    """A manifest row (or the file itself) could not be ingested."""


def read_signal(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"signal file not found: {path}")
    try:
        samples = np.loadtxt(path, dtype=float, ndmin=1)
    except ValueError as exc:
        raise ValueError(f"non-numeric sample in {path}: {exc}") from exc
    if samples.ndim != 1:
        raise ValueError(f"signal file {path} must hold one sample per line")
    if samples.size == 0:
        raise ValueError(f"signal file {path} is empty")
    if not np.all(np.isfinite(samples)):
        raise ValueError(f"signal file {path} contains non-finite samples")
    return samples


def write_signal(path, samples) -> None:
    np.savetxt(path, np.asarray(samples, dtype=float), fmt="%.10g")


def _parse_bool(cell: str, column: str) -> bool:
    low = cell.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"{column} must be boolean-like, got {cell!r}")


def _parse_row(row: dict, base_dir: Path) -> OximetryRecording:
    def cell(name):
        value = row.get(name)
        return value.strip() if value is not None else ""

    patient_id = cell("patient_id")
    if not patient_id:
        raise ValueError("patient_id is empty")

    signal_path = Path(cell("signal_path"))
    if not signal_path.is_absolute():
        signal_path = base_dir / signal_path
    samples = read_signal(signal_path)

    fs = float(cell("fs")) if cell("fs") else 1.0

    is_copd = _parse_bool(cell("is_copd"), "is_copd")
    gold = int(cell("gold")) if cell("gold") else None
    label = CopdLabel(is_copd=is_copd, gold=gold)

    demographics = Demographics(
        gender=cell("gender"),
        age=float(cell("age")),
        weight=float(cell("weight")),
        height=float(cell("height")),
        smoking=int(cell("smoking")),
    )

    psg_cells = [cell(c) for c in _PSG_COLUMNS]
    if all(psg_cells):
        psg = PsgFeatures(**{c: float(v) for c, v in zip(_PSG_COLUMNS, psg_cells)})
    elif any(psg_cells):
        missing = [c for c, v in zip(_PSG_COLUMNS, psg_cells) if not v]
        raise ValueError(f"partial PSG features, missing {missing}")
    else:
        psg = None

    return OximetryRecording(
        patient_id=patient_id, samples=samples, fs=fs,
        label=label, demographics=demographics, psg=psg,
    )


def load_manifest(path) -> list:
    """Load all recordings named by a manifest file.

    Any defective row aborts the load with a ManifestError naming the row.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None or tuple(header) != MANIFEST_COLUMNS:
            raise ManifestError(
                f"manifest header must be {','.join(MANIFEST_COLUMNS)}")
        recordings = []
        for index, row in enumerate(reader, start=1):
            try:
                recordings.append(_parse_row(row, path.parent))
            except (ValueError, FileNotFoundError) as exc:
                raise ManifestError(f"row {index}: {exc}") from exc
    if not recordings:
        raise ManifestError(f"manifest {path} has no data rows")
    return recordings


def write_manifest(path, rows) -> None:
    """Write manifest rows (dicts keyed by MANIFEST_COLUMNS; None means empty)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for row in rows:
            writer.writerow(["" if row.get(c) is None else row[c]
                             for c in MANIFEST_COLUMNS])
