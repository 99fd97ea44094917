"""Input checks shared by the estimators."""

import numpy as np
from sklearn.utils.validation import check_array

__all__ = ["check_texts", "check_binary_labels", "check_features", "check_features_labels"]


def check_texts(X):
    """Return a list of token lists.

    Accepts an iterable of strings (split on whitespace; expected to be
    cleaned already) or of token sequences.
    """
    if isinstance(X, (str, bytes)):
        raise TypeError("expected a collection of texts, got a single string")
    if isinstance(X, np.ndarray) and X.dtype.kind in "biufc":
        raise TypeError("expected texts, got a numeric array")
    out = []
    for i, x in enumerate(X):
        if isinstance(x, str):
            out.append(x.split())
        elif isinstance(x, (list, tuple, np.ndarray)):
            toks = [str(t) for t in x]
            out.append(toks)
        else:
            raise TypeError(f"text {i} has unsupported type {type(x).__name__}")
    return out


def check_binary_labels(y, n_samples=None, require_both=False):
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {y.shape}")
    if n_samples is not None and y.shape[0] != n_samples:
        raise ValueError(f"got {y.shape[0]} labels for {n_samples} samples")
    if y.size and not np.isin(y, (0, 1)).all():
        raise ValueError(f"labels must be 0/1, got {sorted(set(y.tolist()))[:5]}")
    y = y.astype(int)
    if require_both and np.unique(y).size < 2:
        raise ValueError("training labels contain a single class")
    return y


def check_features(X):
    return check_array(X, dtype=np.float64, ensure_all_finite=True)


def check_features_labels(X, y, require_both=True):
    X = check_features(X)
    return X, check_binary_labels(y, X.shape[0], require_both=require_both)
