"""Hyperparameter search, nested cross-validation and report/model files.

The evaluation protocol: several outer repetitions of a stratified
patient-level 80/20 split; inside each repetition the training windows are
built with training-only augmentation, features are selected on training
windows, a random sample of the hyperparameter grid is scored by
patient-stratified inner cross-validation, the best point is refit on the
full training split, and test patients are classified by majority vote over
their windows.  All randomness flows from counter-based generators keyed by
(seed, role, outer index, ...), so results are independent of execution
order and of the worker count.
"""

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifiers import LogisticRegressionGD, RandomForestClassifier
from .config import RunConfig
from .features import FeatureMatrix, featurize_recording, model_columns
from .metrics import MetricsFragment, evaluate_predictions
from .selection import MrmrSelector

MODEL_FORMAT = "oxiscreen-model"
MODEL_FORMAT_VERSION = 1

# spawn-key roles for the counter-based RNG tree
_ROLE_OUTER, _ROLE_INNER, _ROLE_SEARCH, _ROLE_FIT = 1, 2, 3, 4


def majority_vote(window_predictions) -> int:
    """Patient-level label from window votes; ties go to the positive class
    (a screening tool prefers sensitivity)."""
    votes = list(window_predictions)
    if not votes:
        raise ValueError("majority vote needs at least one window prediction")
    positive = sum(1 for v in votes if v == 1)
    return int(positive >= len(votes) - positive)


def rf_grid() -> list:
    """Full random-forest hyperparameter grid."""
    grid = []
    for n_estimators, max_features, max_depth, min_split, min_leaf, bootstrap in \
            itertools.product((100, 110, 120, 150, 200, 250, 300),
                              ("all", "sqrt"),
                              tuple(range(10, 120, 10)),
                              (2, 5, 10), (1, 2, 4), (True, False)):
        grid.append({
            "n_estimators": n_estimators, "max_features": max_features,
            "max_depth": max_depth, "min_samples_split": min_split,
            "min_samples_leaf": min_leaf, "bootstrap": bootstrap,
        })
    return grid


def lr_grid() -> list:
    """Learning-rate / L2 grid spanning 1e-7..1e-1 logarithmically."""
    rates = np.logspace(-7, -1, 13)
    l2s = (0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)
    return [{"learning_rate": float(lr), "l2": float(l2)}
            for lr in rates for l2 in l2s]


def default_grid(classifier: str) -> list:
    return rf_grid() if classifier == "rf" else lr_grid()


def _fit_classifier(classifier, hyper, X, y, config: RunConfig, seed):
    if classifier == "rf":
        model = RandomForestClassifier(seed=seed, **hyper)
    elif classifier == "lr":
        model = LogisticRegressionGD(max_epochs=config.lr_epochs,
                                     tol=config.lr_tol, **hyper)
    else:
        raise ValueError(f"unknown classifier {classifier!r}")
    return model.fit(X, y)


def _derive_seed(base, *key) -> int:
    return int(np.random.SeedSequence(entropy=base, spawn_key=key).generate_state(1)[0])


def _rng(base, *key):
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=base, spawn_key=key)))


def stratified_split(patient_ids, labels, test_fraction, rng):
    """Patient-level split preserving the class ratio; every class keeps at
    least one patient on each side."""
    train, test = [], []
    for cls in (0, 1):
        ids = [pid for pid in patient_ids if labels[pid] == cls]
        if not ids:
            continue
        n_test = int(round(test_fraction * len(ids)))
        n_test = min(max(n_test, 1), len(ids) - 1)
        perm = rng.permutation(len(ids))
        picked = set(perm[:n_test].tolist())
        test.extend(ids[i] for i in sorted(picked))
        train.extend(ids[i] for i in range(len(ids)) if i not in picked)
    return train, test


def stratified_folds(patient_ids, labels, n_folds, rng):
    """Deal patients of each class round-robin into n_folds groups."""
    folds = [[] for _ in range(n_folds)]
    for cls in (0, 1):
        ids = [pid for pid in patient_ids if labels[pid] == cls]
        perm = rng.permutation(len(ids))
        for slot, idx in enumerate(perm):
            folds[slot % n_folds].append(ids[idx])
    return folds


@dataclass
class ModelBundle:
    """Self-describing trained model: enough to score a new feature table."""

    classifier: str
    model_kind: str
    hyper: dict
    features: list
    model: object

    def predict_proba(self, X, columns) -> np.ndarray:
        if list(columns) != list(self.features):
            raise ValueError("feature columns do not match the stored model")
        return self.model.predict_proba(np.asarray(X, dtype=float))

    def save(self, path) -> None:
        payload = {
            "format": MODEL_FORMAT,
            "version": MODEL_FORMAT_VERSION,
            "classifier": self.classifier,
            "model_kind": self.model_kind,
            "hyper": self.hyper,
            "features": list(self.features),
        }
        if self.classifier == "lr":
            payload["lr"] = {
                "mean": self.model.mean_.tolist(),
                "scale": self.model.scale_.tolist(),
                "weights": self.model.weights_.tolist(),
                "bias": self.model.bias_,
            }
        else:
            payload["rf"] = {
                "seed": self.model.seed,
                "trees": [{
                    "feature": tree.feature.tolist(),
                    "threshold": tree.threshold.tolist(),
                    "left": tree.left.tolist(),
                    "right": tree.right.tolist(),
                    "value": tree.value.tolist(),
                } for tree in self.model.trees_],
            }
        with open(path, "w") as fh:
            json.dump(payload, fh)


def load_model(path) -> ModelBundle:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path} is not a stored model")
    if payload.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version {payload.get('version')}")
    classifier = payload["classifier"]
    if classifier == "lr":
        model = LogisticRegressionGD(**payload["hyper"])
        blob = payload["lr"]
        model.mean_ = np.array(blob["mean"])
        model.scale_ = np.array(blob["scale"])
        model.weights_ = np.array(blob["weights"])
        model.bias_ = float(blob["bias"])
    else:
        from .classifiers import _Tree
        model = RandomForestClassifier(seed=payload["rf"]["seed"], **payload["hyper"])
        trees = []
        for blob in payload["rf"]["trees"]:
            tree = _Tree(0)
            tree.feature = np.array(blob["feature"], dtype=int)
            tree.threshold = np.array(blob["threshold"])
            tree.left = np.array(blob["left"], dtype=int)
            tree.right = np.array(blob["right"], dtype=int)
            tree.value = np.array(blob["value"])
            trees.append(tree)
        model.trees_ = trees
    return ModelBundle(classifier=classifier, model_kind=payload["model_kind"],
                       hyper=payload["hyper"], features=payload["features"],
                       model=model)


@dataclass
class OuterFoldResult:
    fold: int
    train_patients: list
    test_patients: list
    inner_folds: list
    selected_features: list
    selection_trajectory: list
    best_hyper: dict
    best_inner_score: float
    window_metrics: MetricsFragment
    patient_metrics: MetricsFragment
    train_window_meta: list  # (patient_id, window_index, start_s)
    test_window_meta: list
    bundle: ModelBundle


@dataclass
class EvaluationReport:
    model_kind: str
    classifier: str
    folds: list
    aggregates: dict = field(default_factory=dict)

    def metric_values(self, level, metric) -> list:
        fragments = [(f.patient_metrics if level == "patient" else f.window_metrics)
                     for f in self.folds]
        return [frag.as_dict().get(metric) for frag in fragments]

    def aggregate(self) -> dict:
        """Median/IQR and mean/SD of every metric across the outer folds."""
        out = {}
        for level in ("window", "patient"):
            keys = set()
            for fold in self.folds:
                frag = fold.patient_metrics if level == "patient" else fold.window_metrics
                keys.update(frag.as_dict())
            for metric in sorted(keys):
                values = [v for v in self.metric_values(level, metric) if v is not None]
                arr = np.array(values, dtype=float)
                q1, q3 = np.percentile(arr, [25, 75])
                out[(level, metric)] = {
                    "median": float(np.median(arr)),
                    "iqr": float(q3 - q1),
                    "mean": float(arr.mean()),
                    "sd": float(arr.std()),
                }
        self.aggregates = out
        return out


def _eval_subset(rows, window_s):
    """Evaluation windows: the non-overlapping tiling (starts at multiples of
    the window length), augmentation-free."""
    return [r for r in rows if r.start_s % window_s == 0]


def _patient_scores(model, rows_by_patient, patients, sel_idx, window_s):
    """Per-patient continuous score (mean window probability), majority-vote
    prediction and label, plus the pooled window-level arrays."""
    p_labels, p_scores, p_preds = [], [], []
    w_labels, w_scores, w_preds = [], [], []
    for pid in patients:
        rows = _eval_subset(rows_by_patient[pid], window_s)
        X = np.vstack([r.values for r in rows])[:, sel_idx]
        probs = model.predict_proba(X)
        preds = (probs >= 0.5).astype(int)
        p_labels.append(rows[0].label)
        p_scores.append(float(probs.mean()))
        p_preds.append(majority_vote(preds))
        w_labels.extend(r.label for r in rows)
        w_scores.extend(float(p) for p in probs)
        w_preds.extend(int(p) for p in preds)
    return (np.array(p_labels), np.array(p_scores), np.array(p_preds),
            np.array(w_labels), np.array(w_scores), np.array(w_preds))


def nested_cv(recordings, config: RunConfig, grid=None) -> EvaluationReport:
    """Run the full nested cross-validation protocol on a cohort."""
    model_kind = config.model_kind
    classifier = config.classifier
    patient_ids = [rec.patient_id for rec in recordings]
    if len(set(patient_ids)) != len(patient_ids):
        raise ValueError("duplicate patient ids in cohort")
    labels = {rec.patient_id: int(rec.label.is_copd) for rec in recordings}
    golds = {rec.patient_id: rec.label.gold for rec in recordings}
    for cls in (0, 1):
        count = sum(1 for v in labels.values() if v == cls)
        if count < config.n_outer:
            raise ValueError(f"need at least {config.n_outer} patients of class "
                             f"{cls}, got {count}")

    if grid is None:
        grid = default_grid(classifier)

    def _featurize(rec):
        return featurize_recording(rec, model_kind, is_training=True, config=config)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            featurized = list(pool.map(_featurize, recordings))
    else:
        featurized = [_featurize(rec) for rec in recordings]
    rows_by_patient = {rec.patient_id: rows
                       for rec, rows in zip(recordings, featurized)}
    columns = model_columns(model_kind)

    folds = []
    for k in range(config.n_outer):
        split_rng = _rng(config.seed, _ROLE_OUTER, k)
        train_ids, test_ids = stratified_split(patient_ids, labels,
                                               config.test_fraction, split_rng)
        train_rows = [row for pid in train_ids for row in rows_by_patient[pid]]
        X_train = np.vstack([r.values for r in train_rows])
        y_train = np.array([r.label for r in train_rows])

        select_k = config.select_k(model_kind)
        if select_k > 0:
            selector = MrmrSelector(k=select_k, bins=config.mi_bins)
            selector.fit(X_train, y_train, feature_names=columns)
            sel_idx = selector.selected_idx_
            sel_names = selector.selected_names_
            trajectory = selector.trajectory_
        else:
            sel_idx = np.arange(len(columns))
            sel_names = list(columns)
            trajectory = []

        inner_rng = _rng(config.seed, _ROLE_INNER, k)
        inner_folds = stratified_folds(train_ids, labels, config.n_inner, inner_rng)
        for fold_ids in inner_folds:
            if len({labels[pid] for pid in fold_ids}) < 2:
                raise ValueError(f"stratification failure: inner fold of outer "
                                 f"repetition {k} lacks a class")

        search_rng = _rng(config.seed, _ROLE_SEARCH, k)
        budget = min(config.search_budget, len(grid))
        sampled = [grid[i] for i in search_rng.permutation(len(grid))[:budget]]

        def _score_point(args):
            point_index, hyper = args
            scores = []
            for fold_index, val_ids in enumerate(inner_folds):
                fit_ids = [pid for pid in train_ids if pid not in set(val_ids)]
                rows = [row for pid in fit_ids for row in rows_by_patient[pid]]
                X = np.vstack([r.values for r in rows])[:, sel_idx]
                y = np.array([r.label for r in rows])
                seed = _derive_seed(config.seed, _ROLE_FIT, k, point_index, fold_index)
                model = _fit_classifier(classifier, hyper, X, y, config, seed)
                p_lab, p_sco, _, _, _, _ = _patient_scores(
                    model, rows_by_patient, val_ids, sel_idx, config.window_s)
                scores.append(_auroc_or_raise(p_lab, p_sco, k))
            return float(np.mean(scores))

        tasks = list(enumerate(sampled))
        if config.jobs > 1:
            with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                point_scores = list(pool.map(_score_point, tasks))
        else:
            point_scores = [_score_point(t) for t in tasks]

        best_index = int(np.argmax(point_scores))  # first wins ties
        best_hyper = sampled[best_index]

        refit_seed = _derive_seed(config.seed, _ROLE_FIT, k, -1, -1)
        final_model = _fit_classifier(classifier, best_hyper,
                                      X_train[:, sel_idx], y_train, config,
                                      refit_seed)
        p_lab, p_sco, p_pre, w_lab, w_sco, w_pre = _patient_scores(
            final_model, rows_by_patient, test_ids, sel_idx, config.window_s)
        gold_list = [golds[pid] for pid in test_ids]
        patient_metrics = evaluate_predictions(p_lab, p_sco, p_pre, gold=gold_list)
        window_metrics = evaluate_predictions(w_lab, w_sco, w_pre)

        bundle = ModelBundle(classifier=classifier, model_kind=model_kind,
                             hyper=best_hyper, features=sel_names,
                             model=final_model)
        test_meta = [(r.patient_id, r.window_index, r.start_s)
                     for pid in test_ids
                     for r in _eval_subset(rows_by_patient[pid], config.window_s)]
        folds.append(OuterFoldResult(
            fold=k,
            train_patients=train_ids,
            test_patients=test_ids,
            inner_folds=inner_folds,
            selected_features=sel_names,
            selection_trajectory=trajectory,
            best_hyper=best_hyper,
            best_inner_score=point_scores[best_index],
            window_metrics=window_metrics,
            patient_metrics=patient_metrics,
            train_window_meta=[(r.patient_id, r.window_index, r.start_s)
                               for r in train_rows],
            test_window_meta=test_meta,
            bundle=bundle,
        ))

    report = EvaluationReport(model_kind=model_kind, classifier=classifier,
                              folds=folds)
    report.aggregate()
    return report


def _auroc_or_raise(labels, scores, fold):
    from .metrics import auroc
    if np.unique(labels).size < 2:
        raise ValueError(f"stratification failure: validation fold of outer "
                         f"repetition {fold} lacks a class")
    return auroc(labels, scores)


HEADLINE_METRICS = ("auroc", "f1", "kappa", "se", "sp", "npv", "ppv")


def write_summary(report: EvaluationReport, path) -> None:
    """Headline per-patient metrics: model,classifier,metric,median,sd."""
    agg = report.aggregates or report.aggregate()
    with open(path, "w") as fh:
        fh.write("model,classifier,metric,median,sd\n")
        for metric in HEADLINE_METRICS:
            stats = agg.get(("patient", metric))
            if stats is None:
                continue
            fh.write(f"{report.model_kind},{report.classifier},{metric},"
                     f"{stats['median']!r},{stats['sd']!r}\n")


def write_summary_extended(report: EvaluationReport, path) -> None:
    """All metrics at both levels, median+-IQR and mean+-SD, labeled."""
    agg = report.aggregates or report.aggregate()
    with open(path, "w") as fh:
        fh.write("level,metric,median,iqr,mean,sd\n")
        for (level, metric), stats in sorted(agg.items()):
            fh.write(f"{level},{metric},{stats['median']!r},{stats['iqr']!r},"
                     f"{stats['mean']!r},{stats['sd']!r}\n")


def write_fold_metrics(report: EvaluationReport, path) -> None:
    with open(path, "w") as fh:
        fh.write("fold,level,metric,value\n")
        for fold in report.folds:
            for level, frag in (("window", fold.window_metrics),
                                ("patient", fold.patient_metrics)):
                for metric, value in sorted(frag.as_dict().items()):
                    fh.write(f"{fold.fold},{level},{metric},{value!r}\n")
