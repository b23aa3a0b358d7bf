"""Decision groups: items sharing one explanation set, with significance stats.

A group's odds ratio compares ground-truth odds inside the group against the
remaining items of the current filter. The 95% interval uses the normal
approximation on the log odds ratio; when any of the four counts is zero,
all four get the +0.5 continuity correction and the group is flagged
``corrected``. A group whose complement is empty has no defined odds ratio
and carries a sentinel (None) that sorts after every finite value.

The module also owns the session filter stack: an ordered list of item-set
refinements whose entry 0 is always the full dataset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

Z95 = 1.96

METRICS = ("total", "positive_truth", "predicted_positive", "incorrect_count",
           "odds_ratio", "uncertainty", "lexicographic")
CONDITION_OPS = {
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "==": lambda a, b: a == b,
}


class IntegrityError(RuntimeError):
    """Explanations, predictions, and items out of sync."""


class FilterError(ValueError):
    """Malformed or unsatisfiable filter specification."""


@dataclass(frozen=True)
class GroupStats:
    key: tuple[int, ...]
    item_ids: tuple[int, ...]
    tp: int
    fp: int
    tn: int
    fn: int
    odds_ratio: float | None
    ci_low: float | None
    ci_high: float | None
    uncertain: bool
    corrected: bool

    @property
    def size(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def positive_truth(self) -> int:
        return self.tp + self.fn

    @property
    def predicted_positive(self) -> int:
        return self.tp + self.fp

    @property
    def incorrect_count(self) -> int:
        return self.fp + self.fn

    @property
    def uncertainty(self) -> float:
        """Closeness of the odds ratio to one: -|ln OR|; -inf for sentinel ORs."""
        if self.odds_ratio is None:
            return -math.inf
        return -abs(math.log(self.odds_ratio))

    def as_dict(self, feature_names) -> dict:
        return {
            "key": list(self.key),
            "names": [feature_names[i] for i in self.key],
            "counts": {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn},
            "or": self.odds_ratio,
            "ci": [self.ci_low, self.ci_high],
            "uncertain": self.uncertain,
            "corrected": self.corrected,
        }


def odds_ratio_stats(p_e: int, n_e: int, p_t: int, n_t: int):
    """(odds ratio, ci_low, ci_high, uncertain, corrected) for a 2x2 count table.

    ``e`` is the group, ``t`` the remaining items of the current filter. An
    empty complement yields the sentinel (None bounds, uncertain).
    """
    if p_t + n_t == 0:
        return None, None, None, True, False
    corrected = 0 in (p_e, n_e, p_t, n_t)
    if corrected:
        pe, ne, pt, nt = p_e + 0.5, n_e + 0.5, p_t + 0.5, n_t + 0.5
    else:
        pe, ne, pt, nt = float(p_e), float(n_e), float(p_t), float(n_t)
    or_ = (pe / ne) / (pt / nt)
    half = Z95 * math.sqrt(1.0 / pe + 1.0 / ne + 1.0 / pt + 1.0 / nt)
    lo = math.exp(math.log(or_) - half)
    hi = math.exp(math.log(or_) + half)
    return or_, lo, hi, lo <= 1.0 <= hi, corrected


def group_explanations(explanations_by_id, predictions_by_id, item_ids) -> list[GroupStats]:
    """Partition the given items into groups keyed by their explanation set.

    Items with the same removal set stay in one group even when their
    predicted outcomes differ. Groups come back in lexicographic key order;
    use :func:`sort_groups` for display orders.
    """
    buckets: dict[tuple[int, ...], list[int]] = {}
    for i in item_ids:
        e = explanations_by_id.get(i)
        if e is None:
            raise IntegrityError(f"item {i} has no explanation")
        buckets.setdefault(e.removed, []).append(i)

    totals = {"TP": 0, "FP": 0, "TN": 0, "FN": 0}
    per_key: dict[tuple[int, ...], dict] = {}
    for key, ids in buckets.items():
        c = {"TP": 0, "FP": 0, "TN": 0, "FN": 0}
        for i in ids:
            p = predictions_by_id.get(i)
            if p is None:
                raise IntegrityError(f"item {i} has no prediction")
            c[p.outcome] += 1
            totals[p.outcome] += 1
        per_key[key] = c

    pos_all = totals["TP"] + totals["FN"]
    neg_all = totals["FP"] + totals["TN"]
    groups = []
    for key in sorted(per_key):
        c = per_key[key]
        p_e = c["TP"] + c["FN"]
        n_e = c["FP"] + c["TN"]
        or_, lo, hi, uncertain, corrected = odds_ratio_stats(
            p_e, n_e, pos_all - p_e, neg_all - n_e)
        groups.append(GroupStats(key=key, item_ids=tuple(sorted(buckets[key])),
                                 tp=c["TP"], fp=c["FP"], tn=c["TN"], fn=c["FN"],
                                 odds_ratio=or_, ci_low=lo, ci_high=hi,
                                 uncertain=uncertain, corrected=corrected))
    return groups


def metric_value(group: GroupStats, metric: str, feature_names=None):
    """Sortable value of a metric for one group; None marks a sentinel."""
    if metric == "total":
        return group.size
    if metric == "positive_truth":
        return group.positive_truth
    if metric == "predicted_positive":
        return group.predicted_positive
    if metric == "incorrect_count":
        return group.incorrect_count
    if metric == "odds_ratio":
        return group.odds_ratio
    if metric == "uncertainty":
        return None if group.odds_ratio is None else group.uncertainty
    if metric == "lexicographic":
        if feature_names is None:
            raise FilterError("lexicographic metric needs feature names")
        return tuple(feature_names[i] for i in group.key)
    raise FilterError(f"unknown metric {metric!r}")


def sort_groups(groups, sort_spec, feature_names=None) -> list[GroupStats]:
    """Stable multi-key ordering; sentinel metric values sort after all finite ones.

    ``sort_spec`` is an ordered list of (metric, "asc"|"desc"); ties resolve
    by lexicographic group key.
    """
    ordered = sorted(groups, key=lambda g: g.key)
    for metric, direction in reversed(list(sort_spec)):
        if direction not in ("asc", "desc"):
            raise FilterError(f"unknown sort direction {direction!r}")
        if metric == "lexicographic":
            ordered = sorted(ordered, key=lambda g: metric_value(g, metric, feature_names),
                             reverse=direction == "desc")
            continue
        sign = 1.0 if direction == "asc" else -1.0

        def key(g, metric=metric, sign=sign):
            v = metric_value(g, metric)
            if v is None:
                return (1, 0.0)
            return (0, sign * v)

        ordered = sorted(ordered, key=key)
    return ordered


# --- filters and the session stack -----------------------------------------

@dataclass(frozen=True)
class ScoreRange:
    lo: float
    hi: float
    kind: str = field(default="score-range", init=False)


@dataclass(frozen=True)
class GroupSelection:
    keys: tuple[tuple[int, ...], ...]
    kind: str = field(default="selection", init=False)


@dataclass(frozen=True)
class FeatureSearch:
    features: tuple[int, ...]
    query: str = ""
    kind: str = field(default="search", init=False)


@dataclass(frozen=True)
class MetricCondition:
    metric: str
    op: str
    value: float
    kind: str = field(default="condition", init=False)


@dataclass(frozen=True)
class StackEntry:
    filter: object | None
    item_ids: frozenset[int]


@dataclass
class SessionState:
    entries: list[StackEntry]
    sort_spec: list[tuple[str, str]]

    @property
    def current_ids(self) -> frozenset[int]:
        return self.entries[-1].item_ids


def initial_state(item_ids) -> SessionState:
    return SessionState(entries=[StackEntry(filter=None, item_ids=frozenset(item_ids))],
                        sort_spec=[("total", "desc")])


def parse_search_query(query: str, feature_names) -> FeatureSearch:
    """Comma-separated feature names, all of which must appear in a group key."""
    by_name = {n: i for i, n in enumerate(feature_names)}
    feats = []
    for part in query.split(","):
        name = part.strip()
        if not name:
            continue
        if name not in by_name:
            raise FilterError(f"unknown feature name {name!r}")
        feats.append(by_name[name])
    return FeatureSearch(features=tuple(sorted(set(feats))), query=query)


def filter_items(parent_ids, filt, explanations_by_id, predictions_by_id) -> frozenset[int]:
    if isinstance(filt, ScoreRange):
        if not (0.0 <= filt.lo <= filt.hi <= 1.0):
            raise FilterError("score range must satisfy 0 <= lo <= hi <= 1")
        return frozenset(i for i in parent_ids
                         if filt.lo <= predictions_by_id[i].score <= filt.hi)
    if isinstance(filt, GroupSelection):
        keys = set(filt.keys)
        return frozenset(i for i in parent_ids if explanations_by_id[i].removed in keys)
    if isinstance(filt, FeatureSearch):
        want = set(filt.features)
        return frozenset(i for i in parent_ids
                         if want.issubset(explanations_by_id[i].removed))
    if isinstance(filt, MetricCondition):
        if filt.metric not in METRICS or filt.metric == "lexicographic":
            raise FilterError(f"cannot condition on metric {filt.metric!r}")
        if filt.op not in CONDITION_OPS:
            raise FilterError(f"unknown condition operator {filt.op!r}")
        op = CONDITION_OPS[filt.op]
        kept: set[int] = set()
        for g in group_explanations(explanations_by_id, predictions_by_id, parent_ids):
            v = metric_value(g, filt.metric)
            if v is not None and op(v, filt.value):
                kept.update(g.item_ids)
        return frozenset(kept)
    raise FilterError(f"unknown filter {filt!r}")


def apply_filter(state: SessionState, filt, explanations_by_id,
                 predictions_by_id) -> SessionState:
    """Push a refinement onto the stack; the new entry is a subset of its parent."""
    ids = filter_items(state.current_ids, filt, explanations_by_id, predictions_by_id)
    entries = state.entries + [StackEntry(filter=filt, item_ids=ids)]
    return SessionState(entries=entries, sort_spec=list(state.sort_spec))


def pop_to(state: SessionState, depth: int) -> SessionState:
    """Drop stack entries above ``depth``; entry 0 (the full dataset) always stays."""
    if depth < 0 or depth >= len(state.entries):
        raise FilterError(f"stack depth {depth} out of range")
    return SessionState(entries=state.entries[:depth + 1], sort_spec=list(state.sort_spec))
