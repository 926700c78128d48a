"""ROC/PR curves, AUC, single-threshold classification measures and squared-error risk."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UndefinedMetricError


@dataclass
class MetricsReport:
    auc: float
    balanced_accuracy: float
    precision: float
    recall: float
    f1: float
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    roc_points: list = field(default_factory=list)
    pr_points: list = field(default_factory=list)

    def measures(self) -> dict:
        """The single-number measures, in reporting order."""
        return {
            "auc": self.auc,
            "balanced_accuracy": self.balanced_accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def _prepare(scores, labels):
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape:
        raise ValueError(f"scores and labels differ in length: {s.size} vs {y.size}")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores contain non-finite values")
    y = (y == 1)
    pos = int(y.sum())
    neg = y.size - pos
    if pos == 0 or neg == 0:
        raise UndefinedMetricError("labels contain a single class; ROC/PR undefined")
    return s, y, pos, neg


def _threshold_counts(s, y):
    """Cumulative (tp, fp) at each distinct score, scanning thresholds downwards."""
    order = np.argsort(-s, kind="mergesort")
    s_sorted = s[order]
    y_sorted = y[order]
    tps = np.cumsum(y_sorted)
    fps = np.cumsum(~y_sorted)
    # last index of each run of equal scores
    ends = np.r_[np.nonzero(np.diff(s_sorted))[0], s.size - 1]
    return s_sorted[ends], tps[ends], fps[ends]


def roc_curve(scores, labels):
    """ROC as ``(thresholds, fpr, tpr)``; anchors use +inf and -inf thresholds."""
    s, y, pos, neg = _prepare(scores, labels)
    thr, tp, fp = _threshold_counts(s, y)
    thresholds = np.r_[np.inf, thr]
    fpr = np.r_[0.0, fp / neg]
    tpr = np.r_[0.0, tp / pos]
    return thresholds, fpr, tpr


def roc_points(scores, labels) -> list:
    """``(threshold, fpr, tpr)`` triples: the (0, 0) anchor, one point per
    distinct score in descending order, then the (1, 1) anchor."""
    thr, fpr, tpr = roc_curve(scores, labels)
    pts = [(float(t), float(x), float(y)) for t, x, y in zip(thr, fpr, tpr)]
    pts.append((-np.inf, 1.0, 1.0))
    return pts


def pr_points(scores, labels) -> list:
    """``(threshold, recall, precision)`` triples ordered by increasing recall."""
    s, y, pos, _ = _prepare(scores, labels)
    thr, tp, fp = _threshold_counts(s, y)
    recall = tp / pos
    precision = tp / (tp + fp)
    return [(float(t), float(r), float(p)) for t, r, p in zip(thr, recall, precision)]


def trapezoid_area(xs, ys) -> float:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    return float(np.sum(np.diff(xs) * (ys[1:] + ys[:-1]) / 2.0))


def auc(scores, labels) -> float:
    """Trapezoidal area under the ROC curve; tied pos/neg pairs count one half."""
    _, fpr, tpr = roc_curve(scores, labels)
    return trapezoid_area(fpr, tpr)


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def classification_summary(scores, labels, threshold: float = 0.5, curves: bool = True) -> MetricsReport:
    """Confusion-based measures at ``threshold`` (score >= threshold is positive).

    AUC and curves are filled when both classes are present, else left at 0
    and empty.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel() == 1
    pred = s >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    tn = int(np.sum(~pred & ~y))
    fn = int(np.sum(~pred & y))
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    tnr = _ratio(tn, tn + fp)
    f1 = _ratio(2 * precision * recall, precision + recall)
    area = 0.0
    roc, pr = [], []
    if 0 < y.sum() < y.size:
        area = auc(s, y)
        if curves:
            roc = roc_points(s, y)
            pr = pr_points(s, y)
    return MetricsReport(
        auc=area,
        balanced_accuracy=(recall + tnr) / 2,
        precision=precision,
        recall=recall,
        f1=f1,
        threshold=threshold,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        roc_points=roc,
        pr_points=pr,
    )


def mse_risk(predictions, y) -> float:
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(y, dtype=float).ravel()
    if p.size == 0:
        raise ValueError("mse_risk of empty input")
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    return float(np.mean((p - t) ** 2))
