"""Classification metrics: ROC/AUROC, confusion-matrix rates, Cohen's kappa."""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats


def confusion(y_true, y_pred) -> tuple:
    """Return (tn, fp, fn, tp)."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.size != y_pred.size:
        raise ValueError("y_true and y_pred length mismatch")
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    return tn, fp, fn, tp


def _safe_div(num, den):
    return num / den if den else 0.0


def rates_from_confusion(tn, fp, fn, tp) -> dict:
    """Sensitivity, specificity, predictive values, F1 and kappa from counts."""
    se = _safe_div(tp, tp + fn)
    sp = _safe_div(tn, tn + fp)
    ppv = _safe_div(tp, tp + fp)
    npv = _safe_div(tn, tn + fn)
    f1 = _safe_div(2.0 * ppv * se, ppv + se)
    n = tn + fp + fn + tp
    po = _safe_div(tp + tn, n)
    pe = _safe_div((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn), n * n)
    if 1.0 - pe == 0.0:
        kappa = 1.0 if po == 1.0 else 0.0
    else:
        kappa = (po - pe) / (1.0 - pe)
    return {"se": se, "sp": sp, "ppv": ppv, "npv": npv, "f1": f1,
            "kappa": kappa, "accuracy": po}


def auroc(y_true, y_score) -> float:
    """Area under the ROC curve via the rank (Mann-Whitney) statistic, which
    equals trapezoidal integration over all thresholds with ties averaged."""
    y_true = np.asarray(y_true, dtype=int)
    y_score = np.asarray(y_score, dtype=float)
    n_pos = int(np.sum(y_true == 1))
    n_neg = y_true.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC undefined: y_true contains a single class")
    ranks = stats.rankdata(y_score)
    return float((ranks[y_true == 1].sum() - n_pos * (n_pos + 1) / 2.0)
                 / (n_pos * n_neg))


def roc_points(y_true, y_score):
    """ROC curve as (fpr, tpr, thresholds), thresholds descending from +inf."""
    y_true = np.asarray(y_true, dtype=int)
    y_score = np.asarray(y_score, dtype=float)
    order = np.argsort(-y_score, kind="stable")
    sorted_true = y_true[order]
    sorted_score = y_score[order]
    n_pos = int(np.sum(y_true == 1))
    n_neg = y_true.size - n_pos
    distinct = np.nonzero(np.diff(sorted_score))[0]
    cut = np.concatenate([distinct, [y_true.size - 1]])
    tps = np.cumsum(sorted_true)[cut]
    fps = 1 + cut - tps
    fpr = np.concatenate([[0.0], fps / max(n_neg, 1)])
    tpr = np.concatenate([[0.0], tps / max(n_pos, 1)])
    thresholds = np.concatenate([[np.inf], sorted_score[cut]])
    return fpr, tpr, thresholds


def sensitivity_per_gold(y_true, y_pred, gold) -> dict:
    """Sensitivity restricted to each airflow-limitation grade present."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    out = {}
    for grade in (1, 2, 3, 4):
        mask = np.array([g == grade for g in gold]) & (y_true == 1)
        if np.any(mask):
            out[grade] = float(np.mean(y_pred[mask] == 1))
    return out


@dataclass
class MetricsFragment:
    """Metrics of one evaluated population (per-window or per-patient)."""

    auroc: float
    confusion_matrix: tuple  # (tn, fp, fn, tp)
    rates: dict
    roc: tuple  # (fpr, tpr, thresholds)
    se_per_gold: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"auroc": self.auroc}
        out.update(self.rates)
        for grade, value in sorted(self.se_per_gold.items()):
            out[f"se_gold{grade}"] = value
        return out


def evaluate_predictions(y_true, y_score, y_pred, gold=None) -> MetricsFragment:
    tn, fp, fn, tp = confusion(y_true, y_pred)
    return MetricsFragment(
        auroc=auroc(y_true, y_score),
        confusion_matrix=(tn, fp, fn, tp),
        rates=rates_from_confusion(tn, fp, fn, tp),
        roc=roc_points(y_true, y_score),
        se_per_gold=sensitivity_per_gold(y_true, y_pred, gold) if gold is not None else {},
    )


def write_roc(roc, path) -> None:
    fpr, tpr, thresholds = roc
    with open(path, "w") as fh:
        fh.write("fpr,tpr,threshold\n")
        for f, t, thr in zip(fpr, tpr, thresholds):
            fh.write(f"{float(f)!r},{float(t)!r},{float(thr)!r}\n")
