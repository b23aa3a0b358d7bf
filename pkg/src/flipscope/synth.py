"""Seeded synthetic corpora with planted model behavior.

The generator plants a logistic ground truth plus a deliberately flawed
scoring model: the model leans on one frequent feature (the "weak" signal)
that the ground truth ignores, while model and truth agree on a strong
feature and a few medium ones. Item lengths are skewed: a slice of the
population receives almost nothing beyond the weak feature. That reproduces
the diagnostic shape the engine exists to expose: the weak feature forms a
high-frequency decision group mixing predicted-positive items (where it was
pivotal) with unflippable weak-only negatives, so its truth odds sit near
the background rate (odds-ratio CI crossing 1), while the strong feature's
group is significantly positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import TRAIN, Feature, Item, SparseDataset
from .models import LinearModel


@dataclass(frozen=True)
class PlantedCorpus:
    dataset: SparseDataset
    model: LinearModel
    weak_feature: int
    strong_feature: int


def planted_corpus(n_items: int = 5000, n_features: int = 400, avg_active: float = 10.0,
                   positive_rate: float = 0.28, seed: int = 23,
                   light_fraction: float = 0.42) -> PlantedCorpus:
    """Deterministic sparse corpus with a planted truth and a flawed model.

    Feature 0 ("weak") is frequent in light and heavy items alike and carries
    model weight but no truth weight; feature 1 ("strong") carries both;
    features 2..6 are shared medium signals, 7..10 truth-only. The positive
    count is exactly round(positive_rate * n_items).
    """
    if n_features < 24:
        raise ValueError("need at least 24 features for the planted layout")
    rng = np.random.default_rng(seed)
    weak, strong = 0, 1

    probs = np.empty(n_features)
    probs[weak] = 0.32
    probs[strong] = 0.04
    probs[2:7] = [0.12, 0.10, 0.10, 0.08, 0.06]   # mediums
    probs[7:11] = [0.10, 0.08, 0.08, 0.06]        # truth-only
    tail = 1.0 / (np.arange(11, n_features) + 6.0)
    budget = max(avg_active / (1.0 - light_fraction / 2.0) - probs[:11].sum(), 0.5)
    probs[11:] = np.clip(tail * (budget / tail.sum()), 0.002, 0.30)

    # Light items model short medication lists; the weak feature is handed
    # out at full rate regardless (a supporting treatment, not a signal).
    scale = np.where(rng.random(n_items) < light_fraction, 0.08, 1.0)
    eff = probs[None, :] * scale[:, None]
    eff[:, weak] = probs[weak]
    present = rng.random((n_items, n_features)) < eff
    active_sets = [tuple(int(j) for j in np.flatnonzero(row)) for row in present]

    truth_w = np.zeros(n_features)
    truth_w[strong] = 2.4
    truth_w[2:7] = [0.7, 0.6, -0.6, 0.5, -0.8]
    truth_w[7:11] = [0.6, -0.5, 0.5, -0.6]
    t_sprinkle = rng.random(n_features) < 0.20
    t_sprinkle[:11] = False
    truth_w[t_sprinkle] = rng.normal(0.0, 0.10, int(t_sprinkle.sum()))

    # The model's flaws: it trusts the weak feature, overrates the mediums,
    # and cannot see the truth-only features.
    model_w = np.zeros(n_features)
    model_w[weak] = 2.4
    model_w[strong] = 3.2
    model_w[2:7] = [1.6, 1.4, -1.3, 1.2, -1.7]
    m_sprinkle = rng.random(n_features) < 0.25
    m_sprinkle[:11] = False
    model_w[m_sprinkle] = rng.normal(0.0, 0.12, int(m_sprinkle.sum()))
    bias = -2.0

    # Labels: logistic truth realized by rank, so the positive count is exact.
    margins = present @ truth_w
    z = margins + rng.logistic(0.0, 1.0, n_items)
    n_pos = round(n_items * positive_rate)
    if n_pos >= n_items:
        labels = np.ones(n_items, dtype=bool)
    else:
        cut = np.partition(z, n_items - n_pos - 1)[n_items - n_pos - 1]
        labels = z > cut

    features = tuple(Feature(index=i, name=f"med-{i:04d}") for i in range(n_features))
    items = tuple(Item(id=i, active=active_sets[i], label=bool(labels[i]))
                  for i in range(n_items))
    dataset = SparseDataset(features=features, items=items, split=(TRAIN,) * n_items)
    model = LinearModel(model_w, bias, name="planted-logistic")
    return PlantedCorpus(dataset=dataset, model=model, weak_feature=weak,
                         strong_feature=strong)
