"""Epoch training, windowed inference and checkpoint I/O for the text CNN."""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..container import ContainerError, read_container, write_container
from ..embed import embed_batch, embed_tokens
from .model import Adam, CnnConfig, backward, forward, init_params, param_names, weighted_cross_entropy

__all__ = [
    "TrainingError",
    "EpochStats",
    "TrainResult",
    "train",
    "predict",
    "predict_texts",
    "save_checkpoint",
    "load_checkpoint",
    "CHECKPOINT_MAGIC",
]

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = "DRUGSCREEN-CNN"


class TrainingError(RuntimeError):
    """Raised when training hits a non-finite loss or receives no data."""


@dataclass
class EpochStats:
    epoch: int
    loss: float
    accuracy: float
    val_accuracy: float = None


@dataclass
class TrainResult:
    params: dict
    trace: list = field(default_factory=list)
    best_epoch: int = None


def _streams(seed):
    init_ss, order_ss, embed_ss = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(init_ss), np.random.default_rng(order_ss),
            np.random.default_rng(embed_ss))


def train(texts, labels, table, config, validation=None):
    """Fit network parameters with mini-batch Adam.

    ``texts`` are cleaned token lists; only the first ``window_length``
    tokens of each are used for training. Embedding (including fresh
    out-of-vocabulary draws) happens per batch, every epoch. The last,
    possibly smaller batch is kept.

    With ``validation=(texts, labels)`` the parameters from the epoch with
    the best held-out accuracy (earliest on ties) are returned.
    """
    labels = np.asarray(labels, dtype=int)
    n = len(texts)
    if n == 0:
        raise TrainingError("empty training set")
    if labels.shape != (n,):
        raise TrainingError(f"{labels.shape[0]} labels for {n} texts")
    if table.dim != config.embedding_dim:
        raise TrainingError(f"vector table has K={table.dim}, config expects {config.embedding_dim}")
    init_rng, order_rng, embed_rng = _streams(config.seed)
    params = init_params(config, init_rng)
    result = TrainResult(params)
    if config.epochs == 0:
        return result
    dtype = np.dtype(config.dtype)
    opt = Adam(config.learning_rate, config.beta1, config.beta2, config.adam_eps)
    best = (-1.0, None)
    for epoch in range(config.epochs):
        order = order_rng.permutation(n) if config.shuffle else np.arange(n)
        losses, correct = [], 0
        for s in range(0, n, config.batch_size):
            idx = order[s:s + config.batch_size]
            xb = embed_batch([texts[i] for i in idx], table, config.window_length, embed_rng,
                             pad=config.pad, dtype=dtype)
            yb = labels[idx]
            res = forward(xb, params, config)
            batch_loss = float(weighted_cross_entropy(yb, res.yhat, config.pos_weight).mean())
            if not np.isfinite(batch_loss):
                bad = [k for k, v in params.items() if not np.all(np.isfinite(v))]
                fin = res.logits[np.isfinite(res.logits)]
                span = f"[{fin.min():.3g}, {fin.max():.3g}]" if fin.size else "all non-finite"
                raise TrainingError(
                    f"non-finite loss at epoch {epoch + 1}, batch {s // config.batch_size + 1}; "
                    f"non-finite parameters: {bad or 'none'}; "
                    f"finite logit range {span}"
                )
            correct += int(((res.yhat >= config.threshold).astype(int) == yb).sum())
            losses.append(batch_loss)
            opt.step(params, backward(res.cache, yb, params, config))
        stats = EpochStats(epoch + 1, float(np.mean(losses)), correct / n)
        if validation is not None:
            vt, vy = validation
            _, scores = predict_texts(vt, params, table, config)
            stats.val_accuracy = float(np.mean((scores >= config.threshold).astype(int) == np.asarray(vy)))
            if stats.val_accuracy > best[0]:
                best = (stats.val_accuracy, {k: v.copy() for k, v in params.items()})
                result.best_epoch = epoch + 1
        result.trace.append(stats)
        logger.info("epoch %d loss=%.5f acc=%.4f val=%s", stats.epoch, stats.loss,
                    stats.accuracy, stats.val_accuracy)
    if best[1] is not None:
        result.params = best[1]
    return result


def predict_texts(texts, params, table, config, rng=None, chunk=256):
    """Score texts by their most positive window.

    Returns ``(labels, scores)`` as arrays. Empty texts get label 0 and
    score 0.0. ``rng`` drives out-of-vocabulary draws and defaults to one
    seeded from ``config.seed``.
    """
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(4)[3])
    dtype = np.dtype(config.dtype)
    scores = np.zeros(len(texts))
    owner, mats = [], []
    for i, tokens in enumerate(texts):
        if not tokens:
            continue
        for w in embed_tokens(tokens, table, config.window_length, rng, config.stride,
                              config.pad, dtype=dtype):
            owner.append(i)
            mats.append(w.matrix)
    owner = np.asarray(owner, dtype=int)
    for s in range(0, len(mats), chunk):
        yhat = forward(np.stack(mats[s:s + chunk]), params, config).yhat
        np.maximum.at(scores, owner[s:s + chunk], yhat)
    labels = (scores >= config.threshold).astype(int)
    labels[[i for i, t in enumerate(texts) if not t]] = 0
    return labels, scores


def predict(tokens, params, table, config, rng=None):
    """Classify one text: positive iff any window reaches the threshold.

    Returns ``(label, score)`` with ``score`` the largest window probability.
    """
    if not tokens:
        warnings.warn("empty token list classified as negative", stacklevel=2)
        return 0, 0.0
    labels, scores = predict_texts([tokens], params, table, config, rng)
    return int(labels[0]), float(scores[0])


def save_checkpoint(path, params, config):
    """Write config and 32-bit weights; tensors follow :func:`param_names`."""
    tensors = [(name, params[name]) for name in param_names(config)]
    write_container(path, CHECKPOINT_MAGIC, config.to_items(), tensors, dtype="f4")


def load_checkpoint(path):
    meta, tensors = read_container(path, CHECKPOINT_MAGIC)
    config = CnnConfig.from_items(meta)
    dtype = np.dtype(config.dtype)
    missing = [n for n in param_names(config) if n not in tensors]
    if missing:
        raise ContainerError(f"{path}: missing tensors {missing}")
    params = {n: tensors[n].astype(dtype) for n in param_names(config)}
    return config, params
