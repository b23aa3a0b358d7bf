import math

import numpy as np
import pytest

from flipscope.metrics import (ConfusionMatrix, UndefinedAUCError, accuracy, confusion,
                               histogram, mann_whitney_auc, operating_point, roc_curve,
                               summary_report)
from flipscope.models import FunctionModel, PredictionRecord


def pred(score, predicted, truth, i=0):
    return PredictionRecord(item_id=i, score=score, predicted=predicted,
                            correct=predicted == truth)


def preds_from(scores, truths, threshold):
    return [pred(s, s > threshold, t, i) for i, (s, t) in enumerate(zip(scores, truths))]


def test_confusion_counts():
    ps = [pred(0.9, True, True), pred(0.8, True, True)]
    c = confusion(ps)
    assert (c.tp, c.fp, c.tn, c.fn) == (2, 0, 0, 0)


def test_confusion_perfect_classifier():
    ps = preds_from([0.9, 0.8, 0.1, 0.2], [True, True, False, False], 0.5)
    c = confusion(ps)
    assert c.fp == 0 and c.fn == 0


def test_confusion_all_negative_predictor():
    n = 10
    truths = [i < 3 for i in range(n)]  # 30% positive
    ps = preds_from([0.0] * n, truths, 0.5)
    c = confusion(ps)
    assert c.fn == 3 and c.tn == 7 and c.tp == 0 and c.fp == 0
    assert c.as_dict()["predicted_negative"] == n


def test_roc_perfect_separation():
    ps = preds_from([0.9, 0.8, 0.2, 0.1], [True, True, False, False], 0.5)
    assert roc_curve(ps).auc == 1.0


def test_roc_four_item_hand_curve():
    # scores .9(+) .8(+) .7(-) .6(+): concordant pos>neg pairs are 2 of 3
    ps = preds_from([0.9, 0.8, 0.7, 0.6], [True, True, False, True], 0.5)
    curve = roc_curve(ps)
    oracle = mann_whitney_auc([0.9, 0.8, 0.7, 0.6], [True, True, False, True])
    assert oracle == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert curve.auc == pytest.approx(oracle, abs=1e-12)


def test_roc_label_shuffle_is_chance():
    rng = np.random.default_rng(5)
    scores = rng.random(10_000)
    truths = rng.random(10_000) < 0.4
    ps = preds_from(scores, truths, 0.5)
    assert abs(roc_curve(ps).auc - 0.5) <= 0.05


def test_roc_single_class_errors():
    ps = preds_from([0.9, 0.1], [True, True], 0.5)
    with pytest.raises(UndefinedAUCError):
        roc_curve(ps)


def test_roc_matches_mann_whitney_with_ties():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(4, 200))
        scores = np.round(rng.random(n), 2)  # duplicates force tie handling
        truths = rng.random(n) < 0.5
        if truths.all() or (~truths).all():
            truths[0] = not truths[0]
        ps = preds_from(scores, truths, 0.5)
        assert roc_curve(ps).auc == pytest.approx(mann_whitney_auc(scores, truths),
                                                  abs=1e-12)


def test_roc_points_monotone_and_anchored():
    rng = np.random.default_rng(9)
    scores = rng.random(200)
    truths = rng.random(200) < 0.3
    ps = preds_from(scores, truths, 0.5)
    curve = roc_curve(ps)
    fprs = [p[0] for p in curve.points]
    tprs = [p[1] for p in curve.points]
    assert fprs[0] == 0.0 and tprs[0] == 0.0
    assert fprs[-1] == 1.0 and tprs[-1] == 1.0
    assert all(a <= b for a, b in zip(fprs, fprs[1:]))
    assert all(a <= b for a, b in zip(tprs, tprs[1:]))


def test_operating_point_lies_on_curve():
    rng = np.random.default_rng(13)
    scores = np.round(rng.random(300), 2)
    truths = rng.random(300) < 0.4
    t = 0.37
    ps = preds_from(scores, truths, t)
    op = operating_point(ps)
    curve = roc_curve(ps)
    assert any(p[0] == op[0] and p[1] == op[1] for p in curve.points)


def test_histogram_all_zero_scores():
    ps = preds_from([0.0, 0.0, 0.0], [True, False, True], 0.5)
    h = histogram(ps, bins=10)
    assert sum(h["counts"][k][0] for k in h["counts"]) == 3


def test_histogram_two_bins():
    ps = preds_from([0.25, 0.75], [False, True], 0.5)
    h = histogram(ps, bins=2)
    per_bin = [sum(h["counts"][k][b] for k in h["counts"]) for b in range(2)]
    assert per_bin == [1, 1]


def test_histogram_partitions():
    rng = np.random.default_rng(2)
    scores = rng.random(500)
    truths = rng.random(500) < 0.5
    ps = preds_from(scores, truths, 0.5)
    h = histogram(ps, bins=50)
    total = sum(sum(v) for v in h["counts"].values())
    assert total == 500
    assert h["counts"]["tp"][len(h["counts"]["tp"]) - 1] == sum(
        1 for p in ps if p.score >= 0.98 and p.outcome == "TP")


def test_histogram_last_bin_closed():
    ps = preds_from([1.0], [True], 0.5)
    h = histogram(ps, bins=4)
    assert h["counts"]["tp"][3] == 1


def test_accuracy():
    ps = preds_from([0.9, 0.1, 0.8, 0.4], [True, False, False, True], 0.5)
    assert accuracy(ps) == 0.5


def test_summary_report_shape():
    rng = np.random.default_rng(21)
    scores = rng.random(200)
    truths = scores + rng.normal(0, 0.3, 200) > 0.5
    model = FunctionModel(lambda s: 0.0, threshold=0.5)
    preds = preds_from(scores, truths, 0.5)
    by_split = {"train": preds[:100], "test": preds[100:]}
    rep = summary_report(model, None, by_split, bins=20)
    assert set(rep) == {"confusion", "roc", "histogram", "accuracy"}
    assert rep["roc"]["threshold"] == 0.5
    assert rep["roc"]["auc_train"] is not None and rep["roc"]["auc_test"] is not None
    assert rep["confusion"]["total"] == 100
    assert rep["roc"]["points"][0][2] is None  # anchor threshold serialized as null
    assert 0.0 <= rep["accuracy"] <= 1.0
