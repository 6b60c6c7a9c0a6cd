"""Binary classifiers: full-batch gradient-descent logistic regression and a
bagged CART random forest.

Both follow the fit/predict_proba/predict estimator convention.  The forest
is seed-reproducible: every tree draws its bootstrap sample and per-split
feature subsets from a counter-based generator keyed by (seed, tree index),
so results do not depend on execution order.
"""

import numpy as np

from .validation import ParamMixin, check_matrix


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LogisticRegressionGD(ParamMixin):
    """L2-regularized logistic regression trained by full-batch gradient
    descent on z-scored features.

    The loss is mean cross-entropy plus ``l2 * ||w||^2`` (bias excluded);
    standardization statistics are computed from the training data and reused
    at prediction time.
    """

    def __init__(self, learning_rate=0.01, l2=0.0, max_epochs=500, tol=1e-9):
        self.learning_rate = learning_rate
        self.l2 = l2
        self.max_epochs = max_epochs
        self.tol = tol

    def _loss_grad(self, Xs, y, w, b):
        z = Xs @ w + b
        p = _sigmoid(z)
        # log(1+e^z) - y*z, computed stably; overflow surfaces as inf and is
        # reported by fit rather than warned about
        with np.errstate(over="ignore"):
            loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + self.l2 * w @ w)
        err = p - y
        grad_w = Xs.T @ err / y.size + 2.0 * self.l2 * w
        grad_b = float(err.mean())
        return loss, grad_w, grad_b

    def fit(self, X, y):
        X, y = check_matrix(X, y)
        y = y.astype(float)
        if np.unique(y).size < 2:
            raise ValueError("training data contains a single class")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        self.scale_ = scale
        Xs = (X - self.mean_) / self.scale_

        w = np.zeros(X.shape[1])
        b = 0.0
        history = []
        prev = None
        for _ in range(self.max_epochs):
            loss, grad_w, grad_b = self._loss_grad(Xs, y, w, b)
            if not np.isfinite(loss):
                raise ValueError(
                    f"non-finite loss (learning_rate={self.learning_rate}, "
                    f"l2={self.l2}); lower the learning rate")
            history.append(loss)
            w = w - self.learning_rate * grad_w
            b = b - self.learning_rate * grad_b
            if prev is not None and abs(prev - loss) <= self.tol * max(1.0, abs(prev)):
                break
            prev = loss
        self.weights_ = w
        self.bias_ = b
        self.loss_history_ = history
        return self

    def predict_proba(self, X):
        X = check_matrix(X)
        if not hasattr(self, "weights_"):
            raise ValueError("model is not fitted")
        Xs = (X - self.mean_) / self.scale_
        return _sigmoid(Xs @ self.weights_ + self.bias_)

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(int)


def _gini_pair(n1, n0):
    n = n1 + n0
    return 1.0 - (n1 / n) ** 2 - (n0 / n) ** 2


class _Tree:
    """Array-backed CART tree (Gini impurity, midpoint thresholds)."""

    __slots__ = ("feature", "threshold", "left", "right", "value", "importance")

    def __init__(self, n_features):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []
        self.importance = np.zeros(n_features)

    def _new_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def build(self, X, y, idx, rng, max_depth, min_split, min_leaf, n_sub):
        n_root = idx.size
        stack = [(self._new_node(), idx, 0)]
        while stack:
            node, rows, depth = stack.pop()
            labels = y[rows]
            n = rows.size
            n1 = int(labels.sum())
            self.value[node] = n1 / n
            if (n1 == 0 or n1 == n or n < min_split
                    or (max_depth is not None and depth >= max_depth)):
                continue
            gini_node = _gini_pair(n1, n - n1)
            features = (np.arange(X.shape[1]) if n_sub >= X.shape[1]
                        else rng.permutation(X.shape[1])[:n_sub])
            best = None  # (weighted, feature, threshold, order, pos)
            for f in features:
                col = X[rows, f]
                order = np.argsort(col, kind="stable")
                vs = col[order]
                cum1 = np.cumsum(y[rows][order])
                pos = np.arange(1, n)  # left takes the first pos samples
                valid = (vs[1:] > vs[:-1]) & (pos >= min_leaf) & (n - pos >= min_leaf)
                if not np.any(valid):
                    continue
                n_left = pos[valid]
                n1_left = cum1[:-1][valid]
                n_right = n - n_left
                n1_right = n1 - n1_left
                gini_left = 1.0 - (n1_left / n_left) ** 2 - ((n_left - n1_left) / n_left) ** 2
                gini_right = 1.0 - (n1_right / n_right) ** 2 - ((n_right - n1_right) / n_right) ** 2
                weighted = (n_left * gini_left + n_right * gini_right) / n
                k = int(np.argmin(weighted))
                if best is None or weighted[k] < best[0]:
                    split_at = n_left[k]
                    threshold = 0.5 * (vs[split_at - 1] + vs[split_at])
                    best = (float(weighted[k]), int(f), threshold, rows[order], split_at)
            if best is None:
                continue
            weighted, f, threshold, ordered_rows, split_at = best
            self.importance[f] += (n / n_root) * (gini_node - weighted)
            self.feature[node] = f
            self.threshold[node] = threshold
            left = self._new_node()
            right = self._new_node()
            self.left[node] = left
            self.right[node] = right
            stack.append((left, ordered_rows[:split_at], depth + 1))
            stack.append((right, ordered_rows[split_at:], depth + 1))
        self.feature = np.array(self.feature)
        self.threshold = np.array(self.threshold)
        self.left = np.array(self.left)
        self.right = np.array(self.right)
        self.value = np.array(self.value)

    def predict_proba(self, X):
        node = np.zeros(X.shape[0], dtype=int)
        active = self.feature[node] >= 0
        while np.any(active):
            rows = np.nonzero(active)[0]
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return self.value[node]


class DecisionTreeClassifier(ParamMixin):
    """Single CART tree with Gini impurity; the forest's building block."""

    def __init__(self, max_depth=None, min_samples_split=2, min_samples_leaf=1,
                 max_features="all", seed=0):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.seed = seed

    def _n_sub(self, n_features):
        if self.max_features == "all":
            return n_features
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(n_features)))
        raise ValueError(f"max_features must be 'all' or 'sqrt', "
                         f"got {self.max_features!r}")

    def fit(self, X, y, rng=None):
        X, y = check_matrix(X, y)
        y = y.astype(int)
        if rng is None:
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(self.seed)))
        tree = _Tree(X.shape[1])
        tree.build(X, y, np.arange(X.shape[0]), rng, self.max_depth,
                   self.min_samples_split, self.min_samples_leaf,
                   self._n_sub(X.shape[1]))
        self.tree_ = tree
        return self

    def predict_proba(self, X):
        X = check_matrix(X)
        if not hasattr(self, "tree_"):
            raise ValueError("model is not fitted")
        return self.tree_.predict_proba(X)

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(int)


class RandomForestClassifier(ParamMixin):
    """Bagged CART trees; predicted probability is the mean of tree votes."""

    def __init__(self, n_estimators=100, max_features="sqrt", max_depth=None,
                 min_samples_split=2, min_samples_leaf=1, bootstrap=True,
                 seed=0):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, X, y):
        X, y = check_matrix(X, y)
        y = y.astype(int)
        if np.unique(y).size < 2:
            raise ValueError("training data contains a single class")
        template = DecisionTreeClassifier(
            max_depth=self.max_depth, min_samples_split=self.min_samples_split,
            min_samples_leaf=self.min_samples_leaf, max_features=self.max_features)
        n_sub = template._n_sub(X.shape[1])
        trees = []
        for t in range(self.n_estimators):
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(t,))
            rng = np.random.Generator(np.random.Philox(ss))
            rows = (rng.integers(0, X.shape[0], X.shape[0]) if self.bootstrap
                    else np.arange(X.shape[0]))
            tree = _Tree(X.shape[1])
            tree.build(X, y, rows, rng, self.max_depth, self.min_samples_split,
                       self.min_samples_leaf, n_sub)
            trees.append(tree)
        self.trees_ = trees
        self.n_features_ = X.shape[1]
        return self

    def predict_proba(self, X):
        X = check_matrix(X)
        if not hasattr(self, "trees_"):
            raise ValueError("model is not fitted")
        votes = np.zeros(X.shape[0])
        for tree in self.trees_:
            votes += tree.predict_proba(X) >= 0.5
        return votes / len(self.trees_)

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(int)

    @property
    def feature_importances_(self):
        """Mean impurity decrease per feature, normalized to sum to 1."""
        if not hasattr(self, "trees_"):
            raise ValueError("model is not fitted")
        total = np.mean([tree.importance for tree in self.trees_], axis=0)
        norm = total.sum()
        return total / norm if norm > 0 else total


def feature_importance(model: RandomForestClassifier, feature_names) -> list:
    """Ranked (feature, score) pairs from a trained forest, scores sum to 1."""
    scores = model.feature_importances_
    if len(feature_names) != scores.size:
        raise ValueError("feature_names length mismatch")
    order = np.argsort(-scores, kind="stable")
    return [(feature_names[i], float(scores[i])) for i in order]
