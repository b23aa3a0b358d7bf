"""Item-level inspection: unique feature-vector matrix for a group of items.

Rows aggregate items with identical active sets AND identical outcome
category (same vector, different outcome stays on separate rows). Columns
are the features present in at least one of the group's items, annotated
with frequency and a relative importance: the gini impurity decrease of a
one-level presence split against the four outcome categories, computed over
the group's items.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

OUTCOMES = ("TP", "FP", "TN", "FN")
ROW_MODES = ("feature-order", "count")
COLUMN_MODES = ("importance", "frequency", "lexicographic")


@dataclass(frozen=True)
class MatrixRow:
    active: tuple[int, ...]
    outcome: str
    count: int
    ids: tuple[int, ...]


@dataclass(frozen=True)
class MatrixColumn:
    feature: int
    name: str
    frequency: int
    importance: float
    hidden: bool = False


@dataclass(frozen=True)
class ItemMatrix:
    rows: tuple[MatrixRow, ...]
    columns: tuple[MatrixColumn, ...]

    def as_dict(self) -> dict:
        return {
            "columns": [{"feature": c.feature, "name": c.name, "frequency": c.frequency,
                         "importance": c.importance, "hidden": c.hidden}
                        for c in self.columns],
            "rows": [{"active": list(r.active), "outcome": r.outcome, "count": r.count,
                      "ids": list(r.ids)} for r in self.rows],
        }


def _gini(counts) -> float:
    total = sum(counts)
    if total == 0:
        return 0.0
    return 1.0 - sum((c / total) ** 2 for c in counts)


def build_matrix(items, predictions_by_id, feature_names) -> ItemMatrix:
    """Aggregate a group's items into unique (vector, outcome) rows.

    Importances are computed eagerly; constant columns get exactly 0.
    """
    if not items:
        raise ValueError("cannot build a matrix for an empty group")
    buckets: dict[tuple[tuple[int, ...], str], list[int]] = {}
    outcome_by_id = {}
    for it in items:
        out = predictions_by_id[it.id].outcome
        outcome_by_id[it.id] = out
        buckets.setdefault((it.active, out), []).append(it.id)
    rows = [MatrixRow(active=vec, outcome=out, count=len(ids), ids=tuple(sorted(ids)))
            for (vec, out), ids in buckets.items()]
    rows.sort(key=lambda r: r.ids[0])

    present: dict[int, int] = {}
    for it in items:
        for f in it.active:
            present[f] = present.get(f, 0) + 1

    total_counts = [0, 0, 0, 0]
    for it in items:
        total_counts[OUTCOMES.index(outcome_by_id[it.id])] += 1
    parent_gini = _gini(total_counts)
    n = len(items)

    columns = []
    for f in sorted(present):
        with_counts = [0, 0, 0, 0]
        for it in items:
            if f in it.active:
                with_counts[OUTCOMES.index(outcome_by_id[it.id])] += 1
        without_counts = [t - w for t, w in zip(total_counts, with_counts)]
        n_with = sum(with_counts)
        n_without = n - n_with
        if n_with == 0 or n_without == 0:
            importance = 0.0
        else:
            child = (n_with / n) * _gini(with_counts) + (n_without / n) * _gini(without_counts)
            importance = parent_gini - child
        columns.append(MatrixColumn(feature=f, name=feature_names[f],
                                    frequency=present[f], importance=importance))
    return ItemMatrix(rows=tuple(rows), columns=tuple(columns))


def order_matrix(matrix: ItemMatrix, row_mode: str = "feature-order",
                 column_mode: str = "importance") -> ItemMatrix:
    """Reorder columns first, then rows.

    Row mode "feature-order" reads each row's presence pattern along the
    column order, present before absent, like a lexicographic sort on the
    bitstring; ties fall back to the first item id. Column ties fall back to
    the feature index.
    """
    if row_mode not in ROW_MODES:
        raise ValueError(f"unknown row mode {row_mode!r}")
    if column_mode not in COLUMN_MODES:
        raise ValueError(f"unknown column mode {column_mode!r}")

    cols = list(matrix.columns)
    if column_mode == "importance":
        cols.sort(key=lambda c: (-c.importance, c.feature))
    elif column_mode == "frequency":
        cols.sort(key=lambda c: (-c.frequency, c.feature))
    else:
        cols.sort(key=lambda c: c.name)

    rows = list(matrix.rows)
    if row_mode == "feature-order":
        col_feats = [c.feature for c in cols]

        def row_key(r):
            have = set(r.active)
            bits = tuple(0 if f in have else 1 for f in col_feats)
            return (bits, r.ids[0])

        rows.sort(key=row_key)
    else:
        rows.sort(key=lambda r: (-r.count, r.ids[0]))
    return ItemMatrix(rows=tuple(rows), columns=tuple(cols))


def hide_nondiscriminative(matrix: ItemMatrix, threshold: float = 0.0) -> ItemMatrix:
    """Flag columns with importance <= threshold as hidden; rows are untouched
    and the operation is reversible (flags only)."""
    cols = tuple(replace(c, hidden=c.importance <= threshold) for c in matrix.columns)
    return ItemMatrix(rows=matrix.rows, columns=cols)


def unhide_all(matrix: ItemMatrix) -> ItemMatrix:
    cols = tuple(replace(c, hidden=False) for c in matrix.columns)
    return ItemMatrix(rows=matrix.rows, columns=cols)


def expand_rows(matrix: ItemMatrix) -> ItemMatrix:
    """One row per item; loses no information relative to the aggregate form."""
    rows = []
    for r in matrix.rows:
        for i in r.ids:
            rows.append(MatrixRow(active=r.active, outcome=r.outcome, count=1, ids=(i,)))
    rows.sort(key=lambda r: r.ids[0])
    return ItemMatrix(rows=tuple(rows), columns=matrix.columns)
