"""Scored models: the black-box prediction contract and built-in reference models.

A model maps a bag of active feature indices to a score in [0, 1]; the
predicted label is ``score > threshold`` (strictly), with the threshold
calibrated to maximize correct predictions on training items. Built-in
models exist so the pipeline runs without external dependencies; anything
else plugs in through :mod:`flipscope.bridge`.
"""

from __future__ import annotations

import abc
import json
from dataclasses import dataclass

import numpy as np

from . import _kernels


class TrainingError(RuntimeError):
    """Training could not produce a usable model."""


class ScoredModel(abc.ABC):
    """Scoring capability plus a classification threshold.

    Scoring must be deterministic: the same active set always yields the
    same score. ``threshold`` defaults to 0.5 until calibrated.
    """

    name: str = "model"
    threshold: float = 0.5

    @abc.abstractmethod
    def score_batch(self, sets) -> np.ndarray:
        """Scores in [0, 1] for a sequence of active-index bags."""

    def score(self, active) -> float:
        return float(self.score_batch([tuple(active)])[0])

    def label(self, active) -> bool:
        return self.score(active) > self.threshold


class LinearModel(ScoredModel):
    """Logistic-form scorer: sigmoid(bias + sum of weights over active features).

    Covers the built-in logistic and Bernoulli naive Bayes models (the NB
    posterior is exactly a logistic form in the active set) as well as
    planted models in fixtures.
    """

    def __init__(self, weights, bias: float, name: str = "linear", threshold: float = 0.5):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = float(bias)
        self.name = name
        self.threshold = float(threshold)

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def score_batch(self, sets) -> np.ndarray:
        flat, offsets = _kernels.pack_sets(sets)
        if flat.size and (flat.min() < 0 or flat.max() >= self.n_features):
            raise IndexError(f"feature index out of range for a {self.n_features}-feature model")
        return _kernels.linear_scores(flat, offsets, self.weights, self.bias)

    def to_dict(self) -> dict:
        return {
            "type": "linear",
            "name": self.name,
            "threshold": self.threshold,
            "bias": self.bias,
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        if d.get("type") != "linear":
            raise ValueError(f"unsupported model artifact type {d.get('type')!r}")
        return cls(d["weights"], d["bias"], name=d["name"], threshold=d["threshold"])


class FunctionModel(ScoredModel):
    """Wraps an arbitrary deterministic scoring function over active-index tuples."""

    def __init__(self, fn, name: str = "function", threshold: float = 0.5):
        self._fn = fn
        self.name = name
        self.threshold = float(threshold)

    def score_batch(self, sets) -> np.ndarray:
        return np.array([self._fn(tuple(s)) for s in sets], dtype=np.float64)


@dataclass(frozen=True)
class PredictionRecord:
    item_id: int
    score: float
    predicted: bool
    correct: bool

    @property
    def truth(self) -> bool:
        return self.predicted if self.correct else not self.predicted

    @property
    def outcome(self) -> str:
        if self.predicted:
            return "TP" if self.correct else "FP"
        return "TN" if self.correct else "FN"


def predict_items(model: ScoredModel, items) -> list[PredictionRecord]:
    """Score items in one batch and label them against the model threshold."""
    if not items:
        return []
    scores = model.score_batch([it.active for it in items])
    out = []
    for it, s in zip(items, scores):
        predicted = bool(s > model.threshold)
        out.append(PredictionRecord(item_id=it.id, score=float(s), predicted=predicted,
                                    correct=predicted == it.label))
    return out


def threshold_candidates(scores: np.ndarray) -> np.ndarray:
    """Midpoints between consecutive distinct scores, plus the endpoints 0 and 1."""
    distinct = np.unique(scores)
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    return np.unique(np.concatenate(([0.0, 1.0], mids)))


def calibrate_threshold(model: ScoredModel, train_items) -> float:
    """Pick the threshold maximizing correct predictions on the training items.

    Candidates are the midpoints between consecutive distinct scores plus
    {0, 1}. Ties prefer the candidate closest to 0.5, then the smaller one.
    Sets ``model.threshold`` and returns it.
    """
    if not train_items:
        raise TrainingError("cannot calibrate a threshold on an empty training split")
    scores = model.score_batch([it.active for it in train_items])
    labels = np.array([it.label for it in train_items], dtype=bool)
    best_t, best_correct = None, -1
    for t in threshold_candidates(scores):
        correct = int(np.count_nonzero((scores > t) == labels))
        if correct > best_correct:
            best_t, best_correct = float(t), correct
        elif correct == best_correct:
            # tie: closest to 0.5, then smaller
            if (abs(t - 0.5), t) < (abs(best_t - 0.5), best_t):
                best_t = float(t)
    model.threshold = best_t
    return best_t


def train_logistic(train_items, n_features: int, learning_rate: float = 0.1,
                   epochs: int = 100, l2: float = 1e-4, seed: int = 0) -> LinearModel:
    """SGD logistic regression over sparse bags; deterministic for a fixed seed.

    Items are sorted by id before the seeded shuffle, so the result does not
    depend on the incoming item order.
    """
    if not train_items:
        raise TrainingError("empty training split")
    items = sorted(train_items, key=lambda it: it.id)
    flat, offsets = _kernels.pack_sets([it.active for it in items])
    labels = np.array([1.0 if it.label else 0.0 for it in items])
    rng = np.random.default_rng(seed)
    order = np.stack([rng.permutation(len(items)) for _ in range(epochs)]).astype(np.int64)
    w, b, losses = _kernels.sgd_logistic(flat, offsets, labels, order,
                                         float(learning_rate), float(l2), n_features)
    if not np.all(np.isfinite(losses)):
        bad = int(np.flatnonzero(~np.isfinite(losses))[0])
        raise TrainingError(f"non-finite training loss at epoch {bad}; "
                            f"lr={learning_rate}, l2={l2}")
    return LinearModel(w, b, name="logistic")


def train_naive_bayes(train_items, n_features: int, smoothing: float = 1.0) -> LinearModel:
    """Bernoulli naive Bayes for binary bags, in closed form.

    Per-class feature probabilities use Laplace smoothing
    (count + a) / (class size + 2a); class priors are unsmoothed. The
    posterior P(positive | item) is computed exactly through its logistic
    form in the active set.
    """
    if smoothing <= 0.0:
        raise TrainingError("smoothing must be positive")
    if not train_items:
        raise TrainingError("empty training split")
    pos = [it for it in train_items if it.label]
    neg = [it for it in train_items if not it.label]
    if not pos or not neg:
        raise TrainingError("training split must contain both classes")

    def thetas(items):
        counts = np.zeros(n_features)
        for it in items:
            counts[list(it.active)] += 1.0
        return (counts + smoothing) / (len(items) + 2.0 * smoothing)

    tp, tn = thetas(pos), thetas(neg)
    weights = (np.log(tp) - np.log1p(-tp)) - (np.log(tn) - np.log1p(-tn))
    bias = np.log(len(pos) / len(neg)) + float(np.sum(np.log1p(-tp) - np.log1p(-tn)))
    return LinearModel(weights, bias, name="bernoulli-nb")


def save_model(model: LinearModel, path, dataset_hash: str | None = None,
               extra: dict | None = None) -> None:
    d = model.to_dict()
    if dataset_hash is not None:
        d["dataset_hash"] = dataset_hash
    if extra:
        d.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(d, fh, indent=2)
        fh.write("\n")


def load_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    model = LinearModel.from_dict(d)
    model.artifact = d
    return model
