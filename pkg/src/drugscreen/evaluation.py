"""Confusion matrices, threshold metrics, ROC/AUC and Fleiss' kappa."""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import check_binary_labels

__all__ = [
    "METRIC_FIELDS",
    "ConfusionMatrix",
    "KappaResult",
    "RocCurve",
    "confusion_from_predictions",
    "f1_score",
    "fleiss_kappa",
    "metrics",
    "rating_counts",
    "read_metrics_csv",
    "roc_auc",
    "roc_curve",
    "write_metrics_csv",
    "write_roc_csv",
]

METRIC_FIELDS = ("accuracy", "precision", "recall", "specificity", "f1", "auc")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with drug-positive as the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def per_class(self):
        """Per-class "labelled correctly / mislabelled" table.

        Keys are the true classes; a mislabelled positive is a false negative.
        """
        return {
            "positive": {"correct": self.tp, "mislabelled": self.fn},
            "negative": {"correct": self.tn, "mislabelled": self.fp},
        }


def confusion_from_predictions(labels, predictions):
    labels = check_binary_labels(labels)
    predictions = check_binary_labels(predictions)
    if labels.shape != predictions.shape:
        raise ValueError(f"{labels.size} labels but {predictions.size} predictions")
    tp = int(np.sum((labels == 1) & (predictions == 1)))
    fp = int(np.sum((labels == 0) & (predictions == 1)))
    tn = int(np.sum((labels == 0) & (predictions == 0)))
    return ConfusionMatrix(tp, fp, tn, labels.size - tp - fp - tn)


def _ratio(num, den):
    return num / den if den else None


def f1_score(precision, recall):
    """Harmonic mean; ``None`` when either input is missing or both are zero."""
    if precision is None or recall is None or precision + recall == 0:
        return None
    return 2 * precision * recall / (precision + recall)


def metrics(cm):
    """Accuracy, precision, recall, specificity and F1.

    A ratio whose denominator is zero is reported as ``None``.
    """
    if cm.total == 0:
        raise ValueError("confusion matrix is empty")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    return {
        "accuracy": (cm.tp + cm.tn) / cm.total,
        "precision": precision,
        "recall": recall,
        "specificity": _ratio(cm.tn, cm.tn + cm.fp),
        "f1": f1_score(precision, recall),
    }


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray


def roc_curve(scores, labels):
    """ROC points for ``score >= threshold`` rules.

    Thresholds run from ``+inf`` through each distinct score (descending)
    to ``-inf``, so the curve starts at (0, 0) and ends at (1, 1).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = check_binary_labels(labels, scores.shape[0] if scores.ndim == 1 else None)
    if scores.ndim != 1:
        raise ValueError("scores must be 1-D")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes in the labels")
    order = np.lexsort((labels, -scores))
    s, y = scores[order], labels[order]
    # last index of each run of equal scores
    last = np.r_[np.nonzero(s[1:] != s[:-1])[0], s.size - 1]
    tps = np.cumsum(y)[last]
    fps = (last + 1) - tps
    thresholds = np.r_[np.inf, s[last], -np.inf]
    tpr = np.r_[0.0, tps / n_pos, 1.0]
    fpr = np.r_[0.0, fps / n_neg, 1.0]
    return RocCurve(thresholds, fpr, tpr)


def roc_auc(scores, labels):
    """``(curve, auc)`` with the area by the trapezoid rule."""
    curve = roc_curve(scores, labels)
    auc = float(np.sum(np.diff(curve.fpr) * (curve.tpr[1:] + curve.tpr[:-1]) / 2.0))
    return curve, auc


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    p_bar: float
    p_e: float
    perfect_single_category: bool = False


def rating_counts(ratings, categories=None):
    """Turn an items x raters table of labels into the items x categories count matrix."""
    ratings = np.asarray(ratings, dtype=object)
    if ratings.ndim != 2:
        raise ValueError("ratings must be a 2-D items x raters table")
    if categories is None:
        categories = sorted(set(ratings.ravel().tolist()), key=str)
    index = {c: j for j, c in enumerate(categories)}
    counts = np.zeros((ratings.shape[0], len(categories)), dtype=np.int64)
    for i, row in enumerate(ratings):
        for label in row:
            if label not in index:
                raise ValueError(f"item {i}: unknown category {label!r}")
            counts[i, index[label]] += 1
    return counts


def fleiss_kappa(counts):
    """Fleiss' kappa from an N x k matrix of per-item category counts.

    Every row must sum to the same number of raters ``r >= 2``. When all
    ratings fall in one category the chance agreement is 1 and kappa is
    undefined; the result then reports ``kappa = 1.0`` with
    ``perfect_single_category=True``.
    """
    n = np.asarray(counts)
    if n.ndim != 2 or n.shape[0] < 1 or n.shape[1] < 1:
        raise ValueError("counts must be a non-empty items x categories matrix")
    if (n < 0).any() or not np.issubdtype(n.dtype, np.integer):
        raise ValueError("counts must be non-negative integers")
    r = n.sum(axis=1)
    if not (r == r[0]).all():
        raise ValueError("every item needs the same number of ratings")
    r = int(r[0])
    if r < 2:
        raise ValueError("need at least two raters per item")
    n = n.astype(np.float64)
    p_i = (np.sum(n * n, axis=1) - r) / (r * (r - 1))
    p_bar = float(p_i.mean())
    p_j = n.sum(axis=0) / (n.shape[0] * r)
    p_e = float(p_j @ p_j)
    if np.isclose(p_e, 1.0, rtol=0, atol=1e-15):
        return KappaResult(1.0, p_bar, p_e, True)
    return KappaResult((p_bar - p_e) / (1.0 - p_e), p_bar, p_e)


def _fmt(x):
    return "" if x is None else repr(float(x))


def write_metrics_csv(path, rows):
    """``rows`` is an iterable of ``(model_name, metrics_dict)``; absent values are blank."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("model",) + METRIC_FIELDS)
        for name, m in rows:
            w.writerow([name] + [_fmt(m.get(k)) for k in METRIC_FIELDS])


def read_metrics_csv(path):
    out = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(("model",) + METRIC_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            out.append((row["model"], {k: float(row[k]) if row[k] else None for k in METRIC_FIELDS}))
    return out


def write_roc_csv(path, curve):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("threshold", "fpr", "tpr"))
        for t, f, p in zip(curve.thresholds, curve.fpr, curve.tpr):
            w.writerow((repr(float(t)), repr(float(f)), repr(float(p))))
