import numpy as np
import pytest

from flipscope.data import TRAIN, Feature, Item, SparseDataset
from flipscope.models import FunctionModel, LinearModel


def make_dataset(rows, n_features, names=None):
    """rows: list of (active tuple, label bool)."""
    feats = tuple(Feature(index=i, name=names[i] if names else f"f{i}")
                  for i in range(n_features))
    items = tuple(Item(id=i, active=tuple(act), label=bool(lab))
                  for i, (act, lab) in enumerate(rows))
    return SparseDataset(features=feats, items=items, split=(TRAIN,) * len(items))


@pytest.fixture
def single_decisive_model():
    """Positive iff feature 0 present: weight(f0)=+4, bias=-2, t=0.5."""
    w = np.zeros(6)
    w[0] = 4.0
    return LinearModel(w, -2.0, name="decisive", threshold=0.5)


def plateau_score(active):
    """0.9 when at least 2 of {0,1,2} are present, else 0.1."""
    return 0.9 if len(set(active) & {0, 1, 2}) >= 2 else 0.1


@pytest.fixture
def plateau_model():
    return FunctionModel(plateau_score, name="plateau", threshold=0.5)


@pytest.fixture(scope="session")
def planted():
    """Full-scale planted corpus shared by the acceptance suite."""
    from flipscope.data import split_dataset
    from flipscope.models import calibrate_threshold
    from flipscope.synth import planted_corpus

    corpus = planted_corpus(seed=23)
    dataset = split_dataset(corpus.dataset, 0.2, 23)
    calibrate_threshold(corpus.model, dataset.train_items)
    return corpus, dataset
