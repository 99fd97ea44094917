"""L2-regularised linear classifiers trained by full-batch (sub)gradient descent.

Full-batch updates make the fit independent of row order, so no random
state is involved.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_features, check_features_labels

__all__ = [
    "HingeSVM",
    "LogisticClassifier",
    "hinge_objective",
    "logistic_loss_grad",
    "train_linear",
]


def hinge_objective(X, y, coef, intercept, alpha):
    """``alpha/2 |w|^2 + mean(max(0, 1 - s * (Xw + b)))`` with ``s = 2y - 1``."""
    s = 2.0 * y - 1.0
    margins = 1.0 - s * (X @ coef + intercept)
    return 0.5 * alpha * coef @ coef + np.maximum(margins, 0.0).mean()


def logistic_loss_grad(X, y, coef, intercept, alpha):
    """Regularised mean log-loss and its gradient ``(d_coef, d_intercept)``."""
    z = X @ coef + intercept
    # log(1 + exp(z)) - y*z, computed stably
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * alpha * coef @ coef
    p = 0.5 * (1.0 + np.tanh(0.5 * z))
    r = (p - y) / X.shape[0]
    return loss, X.T @ r + alpha * coef, r.sum()


class _LinearClassifier(ClassifierMixin, BaseEstimator):
    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        return check_features(X) @ self.coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_function(X) >= 0).astype(int)


class HingeSVM(_LinearClassifier):
    """Linear SVM: hinge loss plus ``alpha/2 |w|^2``.

    Subgradient steps of size ``learning_rate / sqrt(t)``; the iterate with
    the lowest objective seen is kept.
    """

    def __init__(self, alpha=1e-3, learning_rate=0.5, max_iter=3000):
        self.alpha = alpha
        self.learning_rate = learning_rate
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_features_labels(X, y)
        n, k = X.shape
        s = 2.0 * y - 1.0
        w, b = np.zeros(k), 0.0
        best = (hinge_objective(X, y, w, b, self.alpha), w.copy(), b)
        for t in range(1, self.max_iter + 1):
            active = s * (X @ w + b) < 1.0
            gw = self.alpha * w - (s[active] @ X[active]) / n
            gb = -s[active].sum() / n
            step = self.learning_rate / np.sqrt(t)
            w = w - step * gw
            b = b - step * gb
            obj = hinge_objective(X, y, w, b, self.alpha)
            if obj < best[0]:
                best = (obj, w.copy(), b)
        self.objective_, self.coef_, self.intercept_ = best[0], best[1], float(best[2])
        self.classes_ = np.array([0, 1])
        return self


class LogisticClassifier(_LinearClassifier):
    """Logistic regression with ``alpha/2 |w|^2``, by gradient descent.

    The step defaults to ``1/L`` for the loss's Lipschitz constant ``L``;
    iteration stops when the gradient norm drops below ``tol``.
    """

    def __init__(self, alpha=1e-3, learning_rate=None, max_iter=5000, tol=1e-8):
        self.alpha = alpha
        self.learning_rate = learning_rate
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        X, y = check_features_labels(X, y)
        n, k = X.shape
        step = self.learning_rate
        if step is None:
            xa = np.column_stack([X, np.ones(n)])
            lip = 0.25 * np.linalg.norm(xa, 2) ** 2 / n + self.alpha
            step = 1.0 / lip
        w, b = np.zeros(k), 0.0
        self.n_iter_ = self.max_iter
        for it in range(self.max_iter):
            loss, gw, gb = logistic_loss_grad(X, y, w, b, self.alpha)
            if np.sqrt(gw @ gw + gb * gb) < self.tol:
                self.n_iter_ = it
                break
            w = w - step * gw
            b = b - step * gb
        self.loss_ = logistic_loss_grad(X, y, w, b, self.alpha)[0]
        self.coef_, self.intercept_ = w, float(b)
        self.classes_ = np.array([0, 1])
        return self

    def predict_proba(self, X):
        z = self.decision_function(X)
        p = 0.5 * (1.0 + np.tanh(0.5 * z))
        return np.column_stack([1.0 - p, p])


def train_linear(features, labels, kind="svm", **config):
    """Fit a ``"svm"`` (hinge) or ``"logistic"`` model."""
    if kind == "svm":
        return HingeSVM(**config).fit(features, labels)
    if kind == "logistic":
        return LogisticClassifier(**config).fit(features, labels)
    raise ValueError(f"kind must be 'svm' or 'logistic', got {kind!r}")
