"""Removal-based explanations of classifier decisions.

For each item the search removes active features one at a time, always the
removal that moves the prediction score furthest toward the decision
boundary, until the predicted label flips. Score plateaus (no removal moves
the score beyond a tolerance) are escaped by removing a seeded-random
remaining feature. After a flip, a clean-up pass re-adds removed features
that turn out not to be needed, iterated to a fixpoint so the surviving
removal set is irredundant: putting any single one of its features back
restores the original label. Items whose label never flips keep their full
active set as the explanation, marked ``flipped=False``.

All model access goes through a :class:`ScoringSession`, which counts real
model invocations and can interpose a shared transparent score cache. An
explanation's ``queries`` field counts the score *requests* the search
issued, which is a pure function of (model, item, seed) and therefore
independent of the cache and of scheduling; the session's ``model_calls``
counter reports how many requests actually reached the model.
"""

from __future__ import annotations

import itertools
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

PLATEAU_EPS = 1e-12
BRUTE_FORCE_CAP = 20


class ExplainError(RuntimeError):
    pass


@dataclass(frozen=True)
class Explanation:
    item_id: int
    removed: tuple[int, ...]
    flipped: bool
    score: float
    queries: int


class ScoreCache:
    """Shared map from canonical active-set keys to model scores.

    Transparent by construction: entries are only ever the model's own
    output, so hits reproduce exactly what the model would return.
    Concurrent insertion of the same key is idempotent.
    """

    def __init__(self):
        self.data: dict[tuple[int, ...], float] = {}

    def __len__(self) -> int:
        return len(self.data)


class ScoringSession:
    """Routes score requests to a model, through an optional shared cache."""

    def __init__(self, model, cache: ScoreCache | None = None):
        self.model = model
        self.cache = cache
        self.model_calls = 0
        self._lock = threading.Lock()

    def scores(self, sets: list[tuple[int, ...]]) -> list[float]:
        if self.cache is None:
            out = [float(s) for s in self.model.score_batch(sets)]
            with self._lock:
                self.model_calls += len(sets)
            return out
        data = self.cache.data
        out: list[float | None] = [data.get(s) for s in sets]
        miss = [i for i, v in enumerate(out) if v is None]
        if miss:
            fresh = self.model.score_batch([sets[i] for i in miss])
            for i, v in zip(miss, fresh):
                out[i] = float(v)
                data[sets[i]] = float(v)
            with self._lock:
                self.model_calls += len(miss)
        return out


def _item_rng(seed: int, item_id: int) -> np.random.Generator:
    # Stable per-item stream: parallel scheduling cannot change results.
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(item_id)]))


def explain_item(model, item, session: ScoringSession | None = None, seed: int = 0,
                 plateau_eps: float = PLATEAU_EPS) -> Explanation:
    if session is None:
        session = ScoringSession(model)
    t = model.threshold
    queries = 0

    def ask(sets):
        nonlocal queries
        queries += len(sets)
        return session.scores(sets)

    orig_score = ask([tuple(item.active)])[0]
    orig_label = orig_score > t
    if not item.active:
        return Explanation(item.id, (), False, orig_score, queries)

    rng = _item_rng(seed, item.id)
    current = list(item.active)
    cur_score = orig_score
    removal_order: list[int] = []
    flipped = False
    while current:
        candidates = [tuple(current[:i]) + tuple(current[i + 1:]) for i in range(len(current))]
        scores = ask(candidates)
        deltas = [abs(s - cur_score) for s in scores]
        if max(deltas) <= plateau_eps:
            pick = int(rng.integers(len(current)))
        elif orig_label:
            # positive item: the flip needs the score to drop
            pick = min(range(len(current)), key=lambda i: scores[i])
        else:
            pick = max(range(len(current)), key=lambda i: scores[i])
        # min/max keep the first best candidate, i.e. the lowest feature index
        removal_order.append(current[pick])
        cur_score = scores[pick]
        del current[pick]
        if (cur_score > t) != orig_label:
            flipped = True
            break

    if not flipped:
        return Explanation(item.id, tuple(item.active), False, orig_score, queries)

    # Clean-up: re-add removals that are not needed for the flip, most recent
    # first, repeated until stable so the result is irredundant even for
    # non-monotone models.
    kept_out = set(removal_order)
    changed = True
    while changed:
        changed = False
        for f in reversed(removal_order):
            if f not in kept_out:
                continue
            trial = tuple(sorted(current + [f]))
            s = ask([trial])[0]
            if (s > t) != orig_label:
                current.append(f)
                kept_out.discard(f)
                changed = True
    return Explanation(item.id, tuple(sorted(kept_out)), True, orig_score, queries)


@dataclass
class ExplanationRun:
    explanations: list[Explanation]
    manifest: dict
    failures: list[dict]


def explain_all(model, dataset, seed: int = 0, parallelism: int = 1,
                cache: bool = True, plateau_eps: float = PLATEAU_EPS) -> ExplanationRun:
    """Explain every item of the dataset; output is independent of parallelism.

    Per-item seeds derive from (seed, item id); the score cache is shared
    across items. Per-item failures are collected rather than aborting the
    run, so partial results can still be persisted with a failure manifest.
    """
    t0 = time.perf_counter()
    session = ScoringSession(model, ScoreCache() if cache else None)

    def run_one(item):
        return explain_item(model, item, session, seed, plateau_eps=plateau_eps)

    failures: list[dict] = []
    results: list[Explanation | None] = [None] * len(dataset.items)
    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            for i, res in enumerate(pool.map(lambda it: _guard(run_one, it), dataset.items)):
                results[i] = res
    else:
        for i, item in enumerate(dataset.items):
            results[i] = _guard(run_one, item)
    explanations = []
    for item, res in zip(dataset.items, results):
        if isinstance(res, Explanation):
            explanations.append(res)
        else:
            failures.append({"item": item.id, "error": str(res)})
    wall = time.perf_counter() - t0
    manifest = {
        "model": model.name,
        "threshold": model.threshold,
        "seed": int(seed),
        "dataset_hash": dataset.content_hash(),
        "items": len(dataset.items),
        "features": dataset.n_features,
        "wall_time_s": wall,
        "requests": sum(e.queries for e in explanations),
        "model_calls": session.model_calls,
        "cache": cache,
        "failures": len(failures),
    }
    return ExplanationRun(explanations=explanations, manifest=manifest, failures=failures)


def _guard(fn, item):
    try:
        return fn(item)
    except Exception as exc:  # noqa: BLE001 - per-item failures are aggregated
        return exc


def brute_force_min_explanation(model, item, cap: int = BRUTE_FORCE_CAP):
    """Exhaustive smallest-first scan for a minimum flipping removal set.

    Test oracle: independent of the greedy path. Returns the first
    minimum-cardinality subset (in index order) whose removal flips the
    label, or None when no subset does. Refuses items with more than
    ``cap`` active features.
    """
    n = len(item.active)
    if n > cap:
        raise ExplainError(f"brute force capped at {cap} active features, item has {n}")
    t = model.threshold
    orig_label = model.score(item.active) > t
    active = tuple(item.active)
    for size in range(1, n + 1):
        combos = list(itertools.combinations(active, size))
        remainders = [tuple(f for f in active if f not in set(c)) for c in combos]
        for start in range(0, len(combos), 4096):
            chunk = remainders[start:start + 4096]
            scores = model.score_batch(chunk)
            for c, s in zip(combos[start:start + 4096], scores):
                if (s > t) != orig_label:
                    return c
    return None


def write_run(run: ExplanationRun, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "explanations.jsonl"), "w", encoding="utf-8",
              newline="\n") as fh:
        for e in run.explanations:
            fh.write(json.dumps({"item": e.item_id, "removed": list(e.removed),
                                 "flipped": e.flipped, "score": e.score,
                                 "queries": e.queries}) + "\n")
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(run.manifest, fh, indent=2)
        fh.write("\n")
    if run.failures:
        with open(os.path.join(out_dir, "failures.json"), "w", encoding="utf-8") as fh:
            json.dump(run.failures, fh, indent=2)
            fh.write("\n")


def read_run(run_dir) -> ExplanationRun:
    with open(os.path.join(run_dir, "manifest.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    explanations = []
    with open(os.path.join(run_dir, "explanations.jsonl"), encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            explanations.append(Explanation(d["item"], tuple(d["removed"]), d["flipped"],
                                            d["score"], d["queries"]))
    failures_path = os.path.join(run_dir, "failures.json")
    failures = []
    if os.path.exists(failures_path):
        with open(failures_path, encoding="utf-8") as fh:
            failures = json.load(fh)
    return ExplanationRun(explanations=explanations, manifest=manifest, failures=failures)
