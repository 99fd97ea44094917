"""scikit-learn compatible wrapper around the text CNN."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_binary_labels, check_texts
from .model import CnnConfig
from .training import load_checkpoint, predict_texts, save_checkpoint, train

__all__ = ["TextCNNClassifier"]


class TextCNNClassifier(ClassifierMixin, BaseEstimator):
    """Convolutional classifier for cleaned short texts.

    ``X`` is a sequence of token lists (or whitespace-joined strings). A text
    longer than ``window_length`` is scored window by window and is positive
    when any window is.

    Parameters
    ----------
    vectors : EmbeddingTable
        Pre-trained word vectors; their dimension fixes the filter width.
    window_length : int, default=50
    filter_heights : tuple of int, default=(3, 4, 5, 6, 7)
    n_filters : int, default=64
        Filters per height.
    pos_weight : float or "balanced", default="balanced"
        Weight of the positive class in the loss. ``"balanced"`` uses
        ``n_negative / n_positive`` of the training labels.
    learning_rate : float, default=1e-4
    batch_size : int, default=64
    epochs : int, default=10
    threshold : float, default=0.5
    stride : int, default=25
        Step between sliding windows at prediction time.
    pad : {"zero", "random"}, default="zero"
    validation_fraction : float, default=0.0
        If positive, hold out this share of the training data and keep the
        epoch with the best held-out accuracy.
    dtype : {"float64", "float32"}, default="float64"
    random_state : int, default=0

    Attributes
    ----------
    params_ : dict of ndarray
    config_ : CnnConfig
    trace_ : list of EpochStats
    classes_ : ndarray, [0, 1]
    """

    def __init__(self, vectors=None, window_length=50, filter_heights=(3, 4, 5, 6, 7),
                 n_filters=64, pos_weight="balanced", learning_rate=1e-4, batch_size=64,
                 epochs=10, threshold=0.5, stride=25, pad="zero", validation_fraction=0.0,
                 dtype="float64", random_state=0):
        self.vectors = vectors
        self.window_length = window_length
        self.filter_heights = filter_heights
        self.n_filters = n_filters
        self.pos_weight = pos_weight
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.threshold = threshold
        self.stride = stride
        self.pad = pad
        self.validation_fraction = validation_fraction
        self.dtype = dtype
        self.random_state = random_state

    def _config(self, y):
        if self.pos_weight == "balanced":
            pos = int(y.sum())
            w = (len(y) - pos) / pos if pos else 1.0
        else:
            w = float(self.pos_weight)
        return CnnConfig(
            window_length=self.window_length,
            embedding_dim=self.vectors.dim,
            filter_heights=tuple(self.filter_heights),
            filters_per_height=self.n_filters,
            pos_weight=w,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            seed=self.random_state,
            threshold=self.threshold,
            stride=self.stride,
            pad=self.pad,
            dtype=self.dtype,
        )

    def fit(self, X, y):
        if self.vectors is None:
            raise ValueError("TextCNNClassifier needs a word-vector table (vectors=...)")
        X = check_texts(X)
        y = check_binary_labels(y, len(X))
        config = self._config(y)
        validation = None
        if self.validation_fraction:
            if not 0 < self.validation_fraction < 1:
                raise ValueError("validation_fraction must lie in (0, 1)")
            rng = np.random.default_rng(np.random.SeedSequence(self.random_state).spawn(5)[4])
            order = rng.permutation(len(X))
            n_val = max(1, int(round(self.validation_fraction * len(X))))
            val, tr = order[:n_val], order[n_val:]
            validation = ([X[i] for i in val], y[val])
            X, y = [X[i] for i in tr], y[tr]
        result = train(X, y, self.vectors, config, validation=validation)
        self.params_ = result.params
        self.config_ = config
        self.trace_ = result.trace
        self.best_epoch_ = result.best_epoch
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X):
        """Largest window probability of the positive class per text."""
        check_is_fitted(self, "params_")
        _, scores = predict_texts(check_texts(X), self.params_, self.vectors, self.config_)
        return scores

    def predict_proba(self, X):
        s = self.decision_function(X)
        return np.column_stack([1.0 - s, s])

    def predict(self, X):
        return (self.decision_function(X) >= self.config_.threshold).astype(int)

    def save(self, path):
        check_is_fitted(self, "params_")
        save_checkpoint(path, self.params_, self.config_)

    @classmethod
    def load(cls, path, vectors):
        """Rebuild a fitted classifier from a checkpoint and its vector table."""
        config, params = load_checkpoint(path)
        if vectors.dim != config.embedding_dim:
            raise ValueError(f"checkpoint expects K={config.embedding_dim}, vectors have K={vectors.dim}")
        est = cls(vectors=vectors, window_length=config.window_length,
                  filter_heights=config.filter_heights, n_filters=config.filters_per_height,
                  pos_weight=config.pos_weight, learning_rate=config.learning_rate,
                  batch_size=config.batch_size, epochs=config.epochs,
                  threshold=config.threshold, stride=config.stride, pad=config.pad,
                  dtype=config.dtype, random_state=config.seed)
        est.params_ = params
        est.config_ = config
        est.trace_ = []
        est.best_epoch_ = None
        est.classes_ = np.array([0, 1])
        return est
