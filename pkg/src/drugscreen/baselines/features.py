import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_texts
from ..embed import OOV_HIGH, OOV_LOW
from .pca import WordVectorPCA

__all__ = ["MeanEmbeddingVectorizer", "featurize"]


def _project(tokens, table, pca, rng):
    rows = np.empty((len(tokens), table.dim))
    oov = []
    for i, t in enumerate(tokens):
        j = table.index.get(t)
        if j is None:
            oov.append(i)
        else:
            rows[i] = table.vectors[j]
    if oov:
        rows[oov] = rng.uniform(OOV_LOW, OOV_HIGH, size=(len(oov), table.dim))
    return rows if pca is None else pca.transform(rows)


def featurize(tokens, table, pca=None, rng=None):
    """Mean of the (projected) word vectors of one text.

    Out-of-vocabulary words get uniform [-0.5, 0.5] vectors, as in the CNN
    input. An empty text maps to the zero vector.
    """
    d = table.dim if pca is None else pca.components_.shape[1]
    if not tokens:
        warnings.warn("empty text featurized as the zero vector", stacklevel=2)
        return np.zeros(d)
    if rng is None:
        rng = np.random.default_rng(0)
    return _project(tokens, table, pca, rng).mean(axis=0)


class MeanEmbeddingVectorizer(TransformerMixin, BaseEstimator):
    """Fixed-length text features from PCA-reduced word vectors.

    ``fit`` learns the PCA on the word-vector table itself (texts are
    ignored). ``pooling="mean"`` averages a text's projected vectors;
    ``pooling="flatten"`` concatenates the first ``window_length`` of them,
    zero-padded, into ``window_length * d`` values.

    Parameters
    ----------
    vectors : EmbeddingTable
    n_components : int or None, default=100
        ``None`` skips the PCA.
    pooling : {"mean", "flatten"}, default="mean"
    window_length : int, default=50
    random_state : int, default=0
        Seeds out-of-vocabulary draws; each ``transform`` call restarts it.
    """

    def __init__(self, vectors=None, n_components=100, pooling="mean", window_length=50,
                 random_state=0):
        self.vectors = vectors
        self.n_components = n_components
        self.pooling = pooling
        self.window_length = window_length
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.vectors is None:
            raise ValueError("MeanEmbeddingVectorizer needs vectors=...")
        if self.pooling not in ("mean", "flatten"):
            raise ValueError(f"pooling must be 'mean' or 'flatten', got {self.pooling!r}")
        self.pca_ = None if self.n_components is None else \
            WordVectorPCA(self.n_components).fit(self.vectors.vectors)
        self.n_features_out_ = self._dim() * (1 if self.pooling == "mean" else self.window_length)
        return self

    def _dim(self):
        return self.vectors.dim if self.n_components is None else self.n_components

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        texts = check_texts(X)
        rng = np.random.default_rng(self.random_state)
        out = np.zeros((len(texts), self.n_features_out_))
        empty = 0
        for i, tokens in enumerate(texts):
            if not tokens:
                empty += 1
                continue
            if self.pooling == "mean":
                out[i] = _project(tokens, self.vectors, self.pca_, rng).mean(axis=0)
            else:
                z = _project(tokens[:self.window_length], self.vectors, self.pca_, rng)
                out[i, :z.size] = z.ravel()
        if empty:
            warnings.warn(f"{empty} empty text(s) featurized as zero vectors", stacklevel=2)
        return out
