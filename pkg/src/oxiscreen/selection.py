"""Univariate screening and greedy minimum-redundancy feature selection."""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .features import FeatureMatrix
from .validation import ParamMixin, check_matrix


def rank_sum_test(group_a, group_b) -> float:
    """Two-sided Wilcoxon rank-sum p-value (normal approximation with tie and
    continuity corrections)."""
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both groups must be non-empty")
    result = stats.mannwhitneyu(a, b, alternative="two-sided",
                                use_continuity=True, method="asymptotic")
    return float(min(result.pvalue, 1.0))


def _discretize(values, bins):
    """Equal-frequency binning for continuous variables; variables with at
    most *bins* distinct values (labels, categorical codes) pass through."""
    values = np.asarray(values)
    distinct = np.unique(values)
    if distinct.size <= bins:
        return np.searchsorted(distinct, values)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.int64)
    ranks[order] = np.arange(values.size)
    return np.minimum(ranks * bins // values.size, bins - 1)


def mutual_information(x, y, bins=10) -> float:
    """Plug-in mutual information (nats) of the binned joint histogram."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("need at least 2 observations")
    cx = _discretize(x, bins)
    cy = _discretize(y, bins)
    nx = cx.max() + 1
    ny = cy.max() + 1
    joint = np.bincount(cx * ny + cy, minlength=nx * ny).reshape(nx, ny)
    joint = joint / joint.sum()
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    nonzero = joint > 0
    info = np.sum(joint[nonzero]
                  * np.log(joint[nonzero] / np.outer(px, py)[nonzero]))
    return float(max(info, 0.0))


@dataclass(frozen=True)
class SelectionStep:
    step: int
    feature: str
    phi: float
    relevance: float


class MrmrSelector(ParamMixin):
    """Greedy forward selection maximizing class relevance minus the mean
    pairwise redundancy (mutual information), the standard incremental
    surrogate of the set objective.

    Ties break toward the earlier column.  Fitted attributes:
    ``selected_idx_``, ``selected_names_``, ``trajectory_``.
    """

    def __init__(self, k, bins=10):
        self.k = k
        self.bins = bins

    def fit(self, X, y, feature_names=None):
        X, y = check_matrix(X, y)
        n_features = X.shape[1]
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.k > n_features:
            raise ValueError(f"k={self.k} exceeds {n_features} features")
        names = (list(feature_names) if feature_names is not None
                 else [f"f{i}" for i in range(n_features)])
        if len(names) != n_features:
            raise ValueError("feature_names length mismatch")

        relevance = np.array([mutual_information(X[:, i], y, self.bins)
                              for i in range(n_features)])
        pairwise = {}

        def redundancy(i, j):
            key = (min(i, j), max(i, j))
            if key not in pairwise:
                pairwise[key] = mutual_information(X[:, key[0]], X[:, key[1]],
                                                   self.bins)
            return pairwise[key]

        selected = []
        trajectory = []
        remaining = list(range(n_features))
        while len(selected) < self.k:
            scores = []
            for i in remaining:
                penalty = (np.mean([redundancy(i, j) for j in selected])
                           if selected else 0.0)
                scores.append(relevance[i] - penalty)
            best = int(np.argmax(scores))  # first index wins ties
            chosen = remaining.pop(best)
            selected.append(chosen)
            trajectory.append(SelectionStep(
                step=len(selected), feature=names[chosen],
                phi=float(scores[best]), relevance=float(relevance[chosen])))
        self.feature_names_ = names
        self.selected_idx_ = np.array(selected)
        self.selected_names_ = [names[i] for i in selected]
        self.trajectory_ = trajectory
        self.relevance_ = relevance
        return self

    def transform(self, X):
        X = check_matrix(X)
        if not hasattr(self, "selected_idx_"):
            raise ValueError("selector is not fitted")
        return X[:, self.selected_idx_]

    def fit_transform(self, X, y, feature_names=None):
        return self.fit(X, y, feature_names).transform(X)


@dataclass(frozen=True)
class FeatureScreen:
    feature: str
    p_value: float
    rank: int
    median_pos: float
    iqr_pos: float
    median_neg: float
    iqr_neg: float


def screen_features(matrix: FeatureMatrix) -> list:
    """Rank-sum screening of every feature, COPD windows vs the rest.

    The unit of analysis is the window; windows of one patient are treated
    as independent samples, as noted in the emitted metadata.
    """
    y = matrix.y
    if np.unique(y).size < 2:
        raise ValueError("screening needs both classes present")
    X = matrix.X
    pos = X[y == 1]
    neg = X[y == 0]

    def iqr(v):
        q1, q3 = np.percentile(v, [25, 75])
        return float(q3 - q1)

    scored = []
    for idx, name in enumerate(matrix.columns):
        scored.append((rank_sum_test(pos[:, idx], neg[:, idx]), idx, name))
    scored.sort(key=lambda item: (item[0], item[1]))
    report = []
    for rank, (p_value, idx, name) in enumerate(scored, start=1):
        report.append(FeatureScreen(
            feature=name, p_value=p_value, rank=rank,
            median_pos=float(np.median(pos[:, idx])), iqr_pos=iqr(pos[:, idx]),
            median_neg=float(np.median(neg[:, idx])), iqr_neg=iqr(neg[:, idx]),
        ))
    return report


def write_screening(report, path) -> None:
    with open(path, "w") as fh:
        fh.write("feature,p_value,rank\n")
        for row in report:
            fh.write(f"{row.feature},{row.p_value!r},{row.rank}\n")


def write_screening_describe(report, path) -> None:
    with open(path, "w") as fh:
        fh.write("feature,p_value,rank,median_copd,iqr_copd,"
                 "median_non_copd,iqr_non_copd\n")
        for row in report:
            fh.write(f"{row.feature},{row.p_value!r},{row.rank},"
                     f"{row.median_pos!r},{row.iqr_pos!r},"
                     f"{row.median_neg!r},{row.iqr_neg!r}\n")


def write_trajectory(trajectory, path) -> None:
    with open(path, "w") as fh:
        fh.write("step,feature,phi,relevance\n")
        for step in trajectory:
            fh.write(f"{step.step},{step.feature},{step.phi!r},{step.relevance!r}\n")
