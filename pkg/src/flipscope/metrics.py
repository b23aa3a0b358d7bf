"""Statistical summary computations: confusion counts, score histograms, ROC/AUC."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class UndefinedAUCError(ValueError):
    """ROC/AUC need at least one positive and one negative item."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "predicted_positive": self.tp + self.fp,
            "predicted_negative": self.tn + self.fn,
            "truth_positive": self.tp + self.fn,
            "truth_negative": self.fp + self.tn,
            "total": self.total,
        }


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float, float], ...]  # (fpr, tpr, threshold)
    auc: float


def confusion(predictions) -> ConfusionMatrix:
    c = {"TP": 0, "FP": 0, "TN": 0, "FN": 0}
    for p in predictions:
        c[p.outcome] += 1
    return ConfusionMatrix(tp=c["TP"], fp=c["FP"], tn=c["TN"], fn=c["FN"])


def accuracy(predictions) -> float:
    if not predictions:
        raise UndefinedAUCError("accuracy undefined without predictions")
    return sum(p.correct for p in predictions) / len(predictions)


def roc_curve(predictions) -> RocCurve:
    """Threshold sweep over distinct scores, descending; tied scores move
    both rates at once (diagonal segments); AUC by the trapezoid rule.

    Each point after the (0, 0) anchor reports the rates of predicting
    positive for scores >= its threshold; the anchor carries +inf.
    """
    scores = np.array([p.score for p in predictions], dtype=np.float64)
    truths = np.array([p.truth for p in predictions], dtype=bool)
    n_pos = int(np.count_nonzero(truths))
    n_neg = truths.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("need at least one positive and one negative item")
    order = np.argsort(-scores, kind="stable")
    scores, truths = scores[order], truths[order]
    distinct = np.flatnonzero(np.diff(scores)) if scores.size > 1 else np.array([], dtype=int)
    last = np.concatenate((distinct, [scores.size - 1]))
    tps = np.cumsum(truths)[last]
    fps = (last + 1) - tps
    fpr = np.concatenate(([0.0], fps / n_neg))
    tpr = np.concatenate(([0.0], tps / n_pos))
    thresholds = np.concatenate(([math.inf], scores[last]))
    auc = float(np.trapezoid(tpr, fpr))
    points = tuple((float(f), float(t), float(th)) for f, t, th in zip(fpr, tpr, thresholds))
    return RocCurve(points=points, auc=auc)


def operating_point(predictions) -> tuple[float, float]:
    """(fpr, tpr) at the predictions' own labels, i.e. the calibrated threshold."""
    c = confusion(predictions)
    if c.fp + c.tn == 0 or c.tp + c.fn == 0:
        raise UndefinedAUCError("operating point needs both classes")
    return c.fp / (c.fp + c.tn), c.tp / (c.tp + c.fn)


def histogram(predictions, bins: int = 50) -> dict:
    """Per-bin counts of the four outcome categories over [0, 1] scores.

    Bin i covers [i/B, (i+1)/B); the last bin is closed at 1.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    edges = [i / bins for i in range(bins + 1)]
    counts = {k: [0] * bins for k in ("tp", "fp", "tn", "fn")}
    for p in predictions:
        b = min(int(p.score * bins), bins - 1)
        counts[p.outcome.lower()][b] += 1
    return {"edges": edges, "counts": counts}


def mann_whitney_auc(scores, truths) -> float:
    """Pairwise concordance statistic with ties counted 1/2.

    Independent reference for the trapezoidal AUC; quadratic, test-sized
    inputs only.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truths = np.asarray(truths, dtype=bool)
    pos = scores[truths]
    neg = scores[~truths]
    if pos.size == 0 or neg.size == 0:
        raise UndefinedAUCError("need both classes")
    gt = (pos[:, None] > neg[None, :]).sum()
    eq = (pos[:, None] == neg[None, :]).sum()
    return float((gt + 0.5 * eq) / (pos.size * neg.size))


def summary_report(model, dataset, predictions_by_split, bins: int = 50) -> dict:
    """Summary JSON for the service: confusion, ROC (train and test AUC),
    histogram, and accuracy. Computed on the test split; an unsplit dataset
    falls back to all items for both sides.
    """
    train_preds = predictions_by_split.get("train") or []
    test_preds = predictions_by_split.get("test") or []
    main = test_preds if test_preds else train_preds
    side = train_preds if train_preds else test_preds
    curve = roc_curve(main)
    auc_train = roc_curve(side).auc if side else None
    op = operating_point(main)
    points = [[f, t, None if math.isinf(th) else th] for f, t, th in curve.points]
    return {
        "confusion": confusion(main).as_dict(),
        "roc": {
            "points": points,
            "auc_train": auc_train,
            "auc_test": curve.auc,
            "threshold": model.threshold,
            "operating_point": [op[0], op[1]],
        },
        "histogram": histogram(main, bins=bins),
        "accuracy": accuracy(main),
    }
