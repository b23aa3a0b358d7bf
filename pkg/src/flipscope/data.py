"""Sparse binary datasets: canonical text format, CSV import, seeded splits.

Items are bags of active feature indices with a boolean ground-truth label.
The canonical interchange format is a UTF-8 text file::

    #features <F>
    #f <index> <name>        (F lines, indices 0..F-1 in order)
    <label> <i>:1 <i>:1 ...  (one line per item, indices ascending)

Datasets are immutable after load and safe to share across workers.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, replace

import numpy as np

TRAIN = "train"
TEST = "test"


class DatasetError(ValueError):
    """Malformed dataset file or violated dataset invariant."""


@dataclass(frozen=True)
class Feature:
    index: int
    name: str


@dataclass(frozen=True)
class Item:
    id: int
    active: tuple[int, ...]
    label: bool


@dataclass(frozen=True)
class SparseDataset:
    features: tuple[Feature, ...]
    items: tuple[Item, ...]
    split: tuple[str, ...]

    def __post_init__(self):
        f = self.features
        if [x.index for x in f] != list(range(len(f))):
            raise DatasetError("feature indices must be dense 0..F-1 in order")
        names = [x.name.strip() for x in f]
        if any(not n for n in names):
            raise DatasetError("feature names must be nonempty")
        if len(set(names)) != len(names):
            raise DatasetError("feature names must be unique after trimming")
        seen = set()
        for it in self.items:
            if it.id in seen:
                raise DatasetError(f"duplicate item id {it.id}")
            seen.add(it.id)
            if list(it.active) != sorted(set(it.active)):
                raise DatasetError(f"item {it.id}: active set must be sorted and unique")
            if it.active and (it.active[0] < 0 or it.active[-1] >= len(f)):
                raise DatasetError(f"item {it.id}: feature index out of range")
        if len(self.split) != len(self.items):
            raise DatasetError("split tags must cover every item")
        if any(tag not in (TRAIN, TEST) for tag in self.split):
            raise DatasetError("split tags must be 'train' or 'test'")

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(x.name for x in self.features)

    def items_for(self, split: str | None = None) -> tuple[Item, ...]:
        if split is None:
            return self.items
        return tuple(it for it, tag in zip(self.items, self.split) if tag == split)

    @property
    def train_items(self) -> tuple[Item, ...]:
        return self.items_for(TRAIN)

    @property
    def test_items(self) -> tuple[Item, ...]:
        return self.items_for(TEST)

    def positive_rate(self, split: str | None = None) -> float:
        items = self.items_for(split)
        if not items:
            raise DatasetError("positive rate undefined on an empty split")
        return sum(it.label for it in items) / len(items)

    def to_text(self) -> str:
        """Canonical serialization; split tags are runtime state and not stored."""
        lines = [f"#features {self.n_features}"]
        lines.extend(f"#f {x.index} {x.name.strip()}" for x in self.features)
        for it in self.items:
            tokens = [str(int(it.label))]
            tokens.extend(f"{i}:1" for i in it.active)
            lines.append(" ".join(tokens))
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _make(features, rows) -> SparseDataset:
    items = tuple(Item(id=i, active=tuple(act), label=lab) for i, (act, lab) in enumerate(rows))
    return SparseDataset(features=tuple(features), items=items, split=(TRAIN,) * len(items))


def parse_sparse_text(text: str) -> SparseDataset:
    lines = text.split("\n")
    if not lines or not lines[0].startswith("#features "):
        raise DatasetError("line 1: expected '#features <F>' header")
    try:
        n_features = int(lines[0].split(" ", 1)[1])
    except (IndexError, ValueError):
        raise DatasetError("line 1: expected '#features <F>' header") from None
    features = []
    for k in range(n_features):
        lineno = k + 2
        if k + 1 >= len(lines):
            raise DatasetError(f"line {lineno}: missing feature declaration")
        parts = lines[k + 1].split(" ", 2)
        if len(parts) != 3 or parts[0] != "#f":
            raise DatasetError(f"line {lineno}: expected '#f <index> <name>'")
        try:
            idx = int(parts[1])
        except ValueError:
            raise DatasetError(f"line {lineno}: feature index is not an integer") from None
        if idx != k:
            raise DatasetError(f"line {lineno}: feature index {idx} out of order (expected {k})")
        features.append(Feature(index=idx, name=parts[2].strip()))

    rows = []
    for off, raw in enumerate(lines[n_features + 1:]):
        lineno = n_features + 2 + off
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] not in ("0", "1"):
            raise DatasetError(f"line {lineno}: label must be 0 or 1")
        label = tokens[0] == "1"
        active = []
        for tok in tokens[1:]:
            idx_s, sep, val = tok.partition(":")
            if sep != ":" or val != "1":
                raise DatasetError(f"line {lineno}: bad token {tok!r}, expected '<index>:1'")
            try:
                idx = int(idx_s)
            except ValueError:
                raise DatasetError(f"line {lineno}: bad feature index in {tok!r}") from None
            if idx < 0 or idx >= n_features:
                raise DatasetError(f"line {lineno}: feature index {idx} out of range")
            if active and idx <= active[-1]:
                raise DatasetError(f"line {lineno}: indices must be strictly ascending")
            active.append(idx)
        rows.append((active, label))
    return _make(features, rows)


def parse_dense_csv(text: str) -> SparseDataset:
    """Convenience importer: header `label,<name>,...`, cells strictly 0/1."""
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("line 1: empty CSV") from None
    if not header or header[0].strip().lower() != "label":
        raise DatasetError("line 1: first CSV column must be 'label'")
    features = [Feature(index=i, name=n.strip()) for i, n in enumerate(header[1:])]
    rows = []
    for off, cells in enumerate(reader):
        lineno = off + 2
        if not cells:
            continue
        if len(cells) != len(features) + 1:
            raise DatasetError(f"line {lineno}: expected {len(features) + 1} cells")
        for c in cells:
            if c.strip() not in ("0", "1"):
                raise DatasetError(f"line {lineno}: cell {c!r} not in {{0,1}}")
        label = cells[0].strip() == "1"
        active = [i for i, c in enumerate(cells[1:]) if c.strip() == "1"]
        rows.append((active, label))
    return _make(features, rows)


def load_dataset(path, format: str = "sparse") -> SparseDataset:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if format == "sparse":
        return parse_sparse_text(text)
    if format == "csv":
        return parse_dense_csv(text)
    raise DatasetError(f"unknown dataset format {format!r}")


def save_dataset(dataset: SparseDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dataset.to_text())


def split_dataset(dataset: SparseDataset, train_fraction: float, seed: int) -> SparseDataset:
    """Tag items train/test by a seeded unstratified shuffle.

    Deterministic for fixed (dataset, fraction, seed); the train size is
    round(N * fraction), so the realized fraction is within one item of the
    request.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError("train_fraction must be strictly between 0 and 1")
    n = len(dataset.items)
    n_train = round(n * train_fraction)
    perm = np.random.default_rng(seed).permutation(n)
    tags = [TEST] * n
    for i in perm[:n_train]:
        tags[i] = TRAIN
    return replace(dataset, split=tuple(tags))
