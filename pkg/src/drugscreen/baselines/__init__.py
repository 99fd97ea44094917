"""Classical comparison models over pooled word-vector features."""

import numpy as np

from ..container import ContainerError, read_container, write_container
from .features import MeanEmbeddingVectorizer, featurize
from .linear import HingeSVM, LogisticClassifier, logistic_loss_grad, train_linear
from .pca import WordVectorPCA, pca_fit
from .tree import CartClassifier, train_tree

__all__ = [
    "BASELINE_MAGIC",
    "CartClassifier",
    "HingeSVM",
    "LogisticClassifier",
    "MeanEmbeddingVectorizer",
    "WordVectorPCA",
    "featurize",
    "load_baseline",
    "logistic_loss_grad",
    "pca_fit",
    "save_baseline",
    "train_linear",
    "train_tree",
]

BASELINE_MAGIC = "DRUGSCREEN-BASELINE"

_KINDS = {HingeSVM: "svm", LogisticClassifier: "logistic", CartClassifier: "tree"}
_TREE_ARRAYS = ("feature_", "threshold_", "left_", "right_", "value_")


def save_baseline(path, vectorizer, model):
    """Store a fitted vectorizer and classifier in one container (64-bit tensors)."""
    kind = _KINDS.get(type(model))
    if kind is None:
        raise TypeError(f"cannot save model of type {type(model).__name__}")
    meta = [("kind", kind)]
    meta += [(f"vec.{k}", v) for k, v in sorted(vectorizer.get_params().items()) if k != "vectors"]
    meta += [(f"model.{k}", v) for k, v in sorted(model.get_params().items())]
    tensors = []
    if vectorizer.pca_ is not None:
        tensors += [("pca.mean", vectorizer.pca_.mean_),
                    ("pca.components", vectorizer.pca_.components_)]
    if kind == "tree":
        tensors += [(f"tree.{a.rstrip('_')}", getattr(model, a)) for a in _TREE_ARRAYS]
    else:
        tensors += [("coef", model.coef_), ("intercept", np.array(model.intercept_))]
    write_container(path, BASELINE_MAGIC, meta, tensors, dtype="f8")


def _parse(value):
    if value == "None":
        return None
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def load_baseline(path, vectors):
    """Inverse of :func:`save_baseline`; returns ``(vectorizer, model, kind)``."""
    meta, tensors = read_container(path, BASELINE_MAGIC)
    meta = dict(meta)
    kind = meta.get("kind")
    cls = {v: k for k, v in _KINDS.items()}.get(kind)
    if cls is None:
        raise ContainerError(f"{path}: unknown baseline kind {kind!r}")
    vec_params = {k[4:]: _parse(v) for k, v in meta.items() if k.startswith("vec.")}
    model_params = {k[6:]: _parse(v) for k, v in meta.items() if k.startswith("model.")}
    if "pooling" in vec_params:
        vec_params["pooling"] = str(vec_params["pooling"])

    vec = MeanEmbeddingVectorizer(vectors=vectors, **vec_params)
    vec.pca_ = None
    if "pca.components" in tensors:
        pca = WordVectorPCA(n_components=tensors["pca.components"].shape[1])
        pca.mean_ = tensors["pca.mean"]
        pca.components_ = tensors["pca.components"]
        vec.pca_ = pca
        if pca.mean_.shape[0] != vectors.dim:
            raise ContainerError(
                f"{path}: model expects {pca.mean_.shape[0]}-dim vectors, got {vectors.dim}")
    vec.n_features_out_ = vec._dim() * (1 if vec.pooling == "mean" else vec.window_length)

    model = cls(**model_params)
    if kind == "tree":
        for a in _TREE_ARRAYS:
            arr = tensors[f"tree.{a.rstrip('_')}"]
            setattr(model, a, arr if a == "threshold_" else arr.astype(int))
        model.n_features_in_ = vec.n_features_out_
    else:
        model.coef_ = tensors["coef"]
        model.intercept_ = float(tensors["intercept"])
    model.classes_ = np.array([0, 1])
    return vec, model, kind
