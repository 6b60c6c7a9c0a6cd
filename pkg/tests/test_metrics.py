from fractions import Fraction

import numpy as np
import pytest

from oxiscreen.metrics import (auroc, confusion, evaluate_predictions,
                               rates_from_confusion, roc_points,
                               sensitivity_per_gold, write_roc)

from oracles import auroc_by_pairs


def test_auroc_concordant_pairs_example():
    # one of the two positive-negative pairs is concordant
    assert auroc([1, 0, 1], [0.9, 0.8, 0.3]) == 0.5
    assert auroc_by_pairs([1, 0, 1], [0.9, 0.8, 0.3]) == 0.5


def test_auroc_matches_pair_counting_with_ties():
    rng = np.random.default_rng(0)
    for _ in range(20):
        y = rng.integers(0, 2, 30)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        scores = np.round(rng.uniform(0, 1, 30), 1)  # coarse: forces ties
        assert auroc(y, scores) == pytest.approx(auroc_by_pairs(y, scores))


def test_auroc_monotone_transform_invariant():
    rng = np.random.default_rng(1)
    y = rng.integers(0, 2, 50)
    y[0], y[1] = 0, 1
    scores = rng.uniform(0, 1, 50)
    base = auroc(y, scores)
    assert auroc(y, np.exp(4 * scores)) == pytest.approx(base)
    assert auroc(y, 2 * scores - 3) == pytest.approx(base)


def test_auroc_single_class_error():
    with pytest.raises(ValueError, match="single class"):
        auroc([1, 1, 1], [0.5, 0.6, 0.7])


def test_perfect_separation():
    y = [0, 0, 1, 1]
    scores = [0.1, 0.2, 0.8, 0.9]
    preds = [0, 0, 1, 1]
    frag = evaluate_predictions(y, scores, preds)
    assert frag.auroc == 1.0
    assert frag.rates["f1"] == 1.0
    assert frag.rates["kappa"] == 1.0


def test_majority_class_prediction_zero_kappa():
    y = [0, 0, 1, 1]
    preds = [0, 0, 0, 0]
    tn, fp, fn, tp = confusion(y, preds)
    rates = rates_from_confusion(tn, fp, fn, tp)
    assert rates["kappa"] == 0.0


def test_confusion_counts():
    assert confusion([0, 1, 0, 1, 1], [0, 1, 1, 0, 1]) == (1, 1, 1, 2)


def test_reported_window_confusion_rates_exact():
    # PPV and Se from the published per-window confusion counts, checked in
    # exact rational arithmetic
    rates = rates_from_confusion(tn=1046, fp=72, fn=42, tp=469)
    assert rates["ppv"] == 469 / 541
    assert rates["se"] == 469 / 511
    assert abs(Fraction(rates["ppv"]) - Fraction(469, 541)) < Fraction(1, 10 ** 12)
    assert abs(Fraction(rates["se"]) - Fraction(469, 511)) < Fraction(1, 10 ** 12)
    assert abs(rates["ppv"] - 0.8669) < 1e-4
    assert abs(rates["se"] - 0.9178) < 1e-4


def test_kappa_degenerate_agreement():
    assert rates_from_confusion(0, 0, 0, 10)["kappa"] == 1.0
    assert rates_from_confusion(0, 10, 0, 0)["kappa"] == 0.0


def test_roc_points_shape_and_trapezoid_equals_rank_auroc():
    rng = np.random.default_rng(2)
    for _ in range(10):
        y = rng.integers(0, 2, 40)
        y[0], y[1] = 0, 1
        scores = np.round(rng.uniform(0, 1, 40), 1)
        fpr, tpr, thresholds = roc_points(y, scores)
        assert fpr[0] == 0.0 and tpr[0] == 0.0
        assert fpr[-1] == 1.0 and tpr[-1] == 1.0
        assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)
        assert thresholds[0] == np.inf
        area = np.trapezoid(tpr, fpr)
        assert area == pytest.approx(auroc(y, scores))


def test_sensitivity_per_gold():
    y = [1, 1, 1, 1, 0]
    preds = [1, 0, 1, 1, 0]
    gold = [1, 1, 2, 3, None]
    per = sensitivity_per_gold(y, preds, gold)
    assert per[1] == 0.5
    assert per[2] == 1.0
    assert per[3] == 1.0
    assert 4 not in per


def test_evaluate_predictions_fragment():
    y = [0, 1, 0, 1, 1, 0]
    scores = [0.2, 0.9, 0.4, 0.7, 0.3, 0.1]
    preds = [0, 1, 0, 1, 0, 0]
    frag = evaluate_predictions(y, scores, preds, gold=[None, 2, None, 3, 1, None])
    assert frag.confusion_matrix == (3, 0, 1, 2)
    assert sum(frag.confusion_matrix) == len(y)
    d = frag.as_dict()
    assert d["se_gold2"] == 1.0
    assert d["se_gold1"] == 0.0
    assert 0 <= d["auroc"] <= 1


def test_write_roc(tmp_path):
    y = [0, 1, 0, 1]
    scores = [0.1, 0.9, 0.4, 0.6]
    frag = evaluate_predictions(y, scores, [0, 1, 0, 1])
    path = tmp_path / "roc.csv"
    write_roc(frag.roc, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "fpr,tpr,threshold"
    assert len(lines) == len(frag.roc[0]) + 1
