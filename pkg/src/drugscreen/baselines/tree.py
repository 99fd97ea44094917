import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_features, check_features_labels

__all__ = ["CartClassifier", "train_tree"]


def _gini(counts, n):
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float(p @ p)


def _best_split(X, y, idx, min_leaf):
    """Lowest weighted Gini split of ``idx``; ties keep the lowest feature, then threshold."""
    n = idx.size
    best = None
    for j in range(X.shape[1]):
        xs = X[idx, j]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        pos = np.cumsum(y[idx][order])
        # candidate cut after position i (left gets i+1 rows)
        cut = np.nonzero(xs[:-1] < xs[1:])[0]
        cut = cut[(cut + 1 >= min_leaf) & (n - cut - 1 >= min_leaf)]
        if cut.size == 0:
            continue
        nl = cut + 1.0
        nr = n - nl
        pl = pos[cut]
        pr = pos[-1] - pl
        gl = 1.0 - (pl / nl) ** 2 - (1.0 - pl / nl) ** 2
        gr = 1.0 - (pr / nr) ** 2 - (1.0 - pr / nr) ** 2
        score = (nl * gl + nr * gr) / n
        i = int(np.argmin(score))
        if best is None or score[i] < best[0] - 1e-15:
            thr = 0.5 * (xs[cut[i]] + xs[cut[i] + 1])
            best = (float(score[i]), j, thr)
    return best


class CartClassifier(ClassifierMixin, BaseEstimator):
    """Binary CART tree on Gini impurity with axis-aligned thresholds.

    A node is split while it is impure, shallower than ``max_depth`` and a
    split leaving ``min_samples_leaf`` rows on each side exists. Zero-gain
    splits are allowed, which lets depth-2 trees solve XOR.

    Attributes
    ----------
    feature_, threshold_, left_, right_ : ndarray
        Node arrays; leaves have ``feature_ == -1``.
    value_ : ndarray of shape (n_nodes, 2)
        Class counts per node.
    """

    def __init__(self, max_depth=None, min_samples_leaf=1):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf

    def fit(self, X, y):
        X, y = check_features_labels(X, y, require_both=False)
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        max_depth = np.inf if self.max_depth is None else self.max_depth
        feature, threshold, left, right, value = [], [], [], [], []

        def node(idx, depth):
            nid = len(feature)
            counts = np.bincount(y[idx], minlength=2)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(counts)
            if depth >= max_depth or _gini(counts, idx.size) == 0.0:
                return nid
            split = _best_split(X, y, idx, self.min_samples_leaf)
            if split is None:
                return nid
            _, j, thr = split
            go_left = X[idx, j] <= thr
            feature[nid] = j
            threshold[nid] = thr
            left[nid] = node(idx[go_left], depth + 1)
            right[nid] = node(idx[~go_left], depth + 1)
            return nid

        node(np.arange(X.shape[0]), 0)
        self.feature_ = np.array(feature)
        self.threshold_ = np.array(threshold)
        self.left_ = np.array(left)
        self.right_ = np.array(right)
        self.value_ = np.array(value)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    @property
    def n_leaves_(self):
        return int(np.sum(self.feature_ == -1))

    @property
    def depth_(self):
        def depth(i):
            if self.feature_[i] == -1:
                return 0
            return 1 + max(depth(self.left_[i]), depth(self.right_[i]))
        return depth(0)

    def apply(self, X):
        check_is_fitted(self, "feature_")
        X = check_features(X)
        out = np.zeros(X.shape[0], dtype=int)
        for r in range(X.shape[0]):
            i = 0
            while self.feature_[i] != -1:
                i = self.left_[i] if X[r, self.feature_[i]] <= self.threshold_[i] else self.right_[i]
            out[r] = i
        return out

    def predict_proba(self, X):
        v = self.value_[self.apply(X)].astype(float)
        return v / v.sum(axis=1, keepdims=True)

    def predict(self, X):
        v = self.value_[self.apply(X)]
        # majority class; ties go to 0
        return (v[:, 1] > v[:, 0]).astype(int)


def train_tree(features, labels, max_depth=None, min_leaf=1):
    return CartClassifier(max_depth=max_depth, min_samples_leaf=min_leaf).fit(features, labels)
