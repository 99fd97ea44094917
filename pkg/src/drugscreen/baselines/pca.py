import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_features

__all__ = ["WordVectorPCA", "pca_fit"]


class WordVectorPCA(TransformerMixin, BaseEstimator):
    """Principal components by exact eigendecomposition of the sample covariance.

    Parameters
    ----------
    n_components : int
        Number of retained directions ``d``.
    rank_tol : float, default=1e-10
        Eigenvalues below ``rank_tol`` times the largest count as zero.

    Attributes
    ----------
    mean_ : ndarray of shape (K,)
    components_ : ndarray of shape (K, d)
        Orthonormal columns, by descending explained variance. Each column
        is signed so its largest-magnitude entry is positive.
    explained_variance_ : ndarray of shape (d,)
    spectrum_ : ndarray of shape (K,)
        All covariance eigenvalues, descending.
    """

    def __init__(self, n_components=100, rank_tol=1e-10):
        self.n_components = n_components
        self.rank_tol = rank_tol

    def fit(self, X, y=None):
        X = check_features(X)
        n, k = X.shape
        d = self.n_components
        if d < 1 or d > k:
            raise ValueError(f"n_components={d} must lie in [1, {k}] for {k}-dimensional vectors")
        if n < 2:
            raise ValueError("need at least two vectors to estimate a covariance")
        self.mean_ = X.mean(axis=0)
        xc = X - self.mean_
        cov = xc.T @ xc / (n - 1)
        vals, vecs = np.linalg.eigh(cov)
        order = np.argsort(-vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
        vals = np.clip(vals, 0.0, None)
        top = vals[0] if vals[0] > 0 else 1.0
        rank = int(np.sum(vals > self.rank_tol * top)) if vals[0] > 0 else 0
        if rank < d:
            raise ValueError(
                f"degenerate covariance: rank {rank} < n_components={d} "
                f"({n} vectors, {k} dimensions)"
            )
        comps = vecs[:, :d]
        flip = np.sign(comps[np.abs(comps).argmax(axis=0), np.arange(d)])
        self.components_ = comps * flip
        self.explained_variance_ = vals[:d]
        self.spectrum_ = vals
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_features(X)
        return (X - self.mean_) @ self.components_

    def inverse_transform(self, Z):
        check_is_fitted(self, "components_")
        return np.asarray(Z) @ self.components_.T + self.mean_


def pca_fit(vectors, d):
    return WordVectorPCA(n_components=d).fit(vectors)
