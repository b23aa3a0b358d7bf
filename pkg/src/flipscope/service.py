"""REST facade over datasets, models, explanation runs, and analysis sessions.

Explanations are precomputed offline and loaded read-only; sessions hold the
filter stack and sort order so a client reload restores the analysis. All
analytics are pure recomputations over the session's current item set.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import groups as G
from . import inspector, metrics
from .data import SparseDataset
from .explain import ExplanationRun
from .models import ScoredModel, predict_items

DEFAULT_PAGE_SIZE = 50


class ServiceError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class Registry:
    datasets: dict[str, SparseDataset] = field(default_factory=dict)
    models: dict[str, ScoredModel] = field(default_factory=dict)
    runs: dict[str, ExplanationRun] = field(default_factory=dict)

    def add_dataset(self, name: str, dataset: SparseDataset):
        self.datasets[name] = dataset

    def add_model(self, name: str, model: ScoredModel):
        self.models[name] = model

    def add_run(self, name: str, run: ExplanationRun):
        self.runs[name] = run


class Session:
    def __init__(self, sid: str, dataset: SparseDataset, model: ScoredModel,
                 run: ExplanationRun):
        self.id = sid
        self.dataset = dataset
        self.model = model
        self.run = run
        self.lock = threading.Lock()
        preds = predict_items(model, dataset.items)
        self.predictions = {p.item_id: p for p in preds}
        self.explanations = {e.item_id: e for e in run.explanations}
        self.state = G.initial_state(it.id for it in dataset.items)
        self.items_by_id = {it.id: it for it in dataset.items}

    def groups(self, ids=None):
        ids = self.state.current_ids if ids is None else ids
        return G.group_explanations(self.explanations, self.predictions, ids)


def _key_to_path(key) -> str:
    return ",".join(str(i) for i in key) if key else "-"


def _path_to_key(path: str) -> tuple[int, ...]:
    if path == "-":
        return ()
    try:
        return tuple(int(p) for p in path.split(","))
    except ValueError:
        raise ServiceError(400, f"malformed group key {path!r}") from None


def _parse_filter(body: dict, session: Session):
    kind = body.get("kind")
    try:
        if kind == "score-range":
            return G.ScoreRange(lo=float(body["lo"]), hi=float(body["hi"]))
        if kind == "selection":
            keys = tuple(tuple(int(i) for i in k) for k in body["keys"])
            return G.GroupSelection(keys=keys)
        if kind == "search":
            return G.parse_search_query(str(body["query"]), session.dataset.feature_names)
        if kind == "condition":
            return G.MetricCondition(metric=str(body["metric"]), op=str(body["op"]),
                                     value=float(body["value"]))
    except G.FilterError as exc:
        raise ServiceError(400, str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ServiceError(400, f"malformed filter body: {exc}") from exc
    raise ServiceError(400, f"unknown filter kind {kind!r}")


def _filter_payload(entry: G.StackEntry) -> dict | None:
    f = entry.filter
    if f is None:
        return None
    d = {"kind": f.kind}
    if isinstance(f, G.ScoreRange):
        d.update(lo=f.lo, hi=f.hi)
    elif isinstance(f, G.GroupSelection):
        d.update(keys=[list(k) for k in f.keys])
    elif isinstance(f, G.FeatureSearch):
        d.update(query=f.query, features=list(f.features))
    elif isinstance(f, G.MetricCondition):
        d.update(metric=f.metric, op=f.op, value=f.value)
    return d


def _stack_payload(state: G.SessionState) -> list[dict]:
    return [{"depth": i, "size": len(e.item_ids), "filter": _filter_payload(e)}
            for i, e in enumerate(state.entries)]


def create_app(registry: Registry) -> FastAPI:
    app = FastAPI(title="flipscope service")
    sessions: dict[str, Session] = {}

    @app.exception_handler(ServiceError)
    async def on_service_error(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.status, "message": exc.message})

    def get_session(sid: str) -> Session:
        try:
            return sessions[sid]
        except KeyError:
            raise ServiceError(401, "invalid session token") from None

    @app.get("/datasets")
    def list_datasets():
        return [{"name": n, "items": len(d.items), "features": d.n_features,
                 "hash": d.content_hash()} for n, d in registry.datasets.items()]

    @app.get("/models")
    def list_models():
        return [{"name": n, "model": m.name, "threshold": m.threshold}
                for n, m in registry.models.items()]

    @app.get("/runs")
    def list_runs():
        return [{"name": n, "manifest": r.manifest} for n, r in registry.runs.items()]

    @app.post("/sessions", status_code=200)
    def create_session(body: dict):
        for field_name in ("dataset", "model", "run"):
            if field_name not in body:
                raise ServiceError(400, f"missing field {field_name!r}")
        dataset = registry.datasets.get(body["dataset"])
        if dataset is None:
            raise ServiceError(404, f"unknown dataset {body['dataset']!r}")
        model = registry.models.get(body["model"])
        if model is None:
            raise ServiceError(404, f"unknown model {body['model']!r}")
        run = registry.runs.get(body["run"])
        if run is None:
            raise ServiceError(404, f"unknown run {body['run']!r}")
        manifest = run.manifest
        if manifest.get("dataset_hash") != dataset.content_hash():
            raise ServiceError(409, "explanation run was generated for a different dataset")
        if manifest.get("model") != model.name or \
                abs(manifest.get("threshold", -1) - model.threshold) > 1e-12:
            raise ServiceError(409, "explanation run was generated for a different model")
        sid = uuid.uuid4().hex
        sessions[sid] = Session(sid, dataset, model, run)
        return {"session": sid, "stack": _stack_payload(sessions[sid].state)}

    @app.get("/sessions/{sid}/summary")
    def get_summary(sid: str):
        s = get_session(sid)
        by_split = {
            "train": [s.predictions[it.id] for it in s.dataset.train_items],
            "test": [s.predictions[it.id] for it in s.dataset.test_items],
        }
        try:
            return metrics.summary_report(s.model, s.dataset, by_split)
        except metrics.UndefinedAUCError as exc:
            raise ServiceError(422, str(exc)) from exc

    @app.get("/sessions/{sid}/groups")
    def list_groups(sid: str, sort: str | None = None, dir: str | None = None,
                    page: int = 0, page_size: int = DEFAULT_PAGE_SIZE):
        s = get_session(sid)
        with s.lock:
            if sort is not None:
                if sort not in G.METRICS:
                    raise ServiceError(400, f"unknown sort metric {sort!r}")
                direction = dir or ("asc" if sort == "lexicographic" else "desc")
                if direction not in ("asc", "desc"):
                    raise ServiceError(400, f"unknown sort direction {direction!r}")
                spec = [(sort, direction)]
                spec.extend(x for x in s.state.sort_spec if x[0] != sort)
                s.state.sort_spec = spec
            names = s.dataset.feature_names
            ordered = G.sort_groups(s.groups(), s.state.sort_spec, names)
            if page < 0 or page_size < 1:
                raise ServiceError(400, "bad pagination")
            start = page * page_size
            items = [dict(g.as_dict(names), size=g.size,
                          positive_truth=g.positive_truth,
                          key_path=_key_to_path(g.key))
                     for g in ordered[start:start + page_size]]
            return {"groups": items, "total_groups": len(ordered), "page": page,
                    "page_size": page_size, "sort": [list(x) for x in s.state.sort_spec],
                    "stack": _stack_payload(s.state)}

    @app.get("/sessions/{sid}/features")
    def list_features(sid: str, limit: int = 0):
        """Per-feature frequency within current explanations, for search suggestions."""
        s = get_session(sid)
        with s.lock:
            counts: dict[int, int] = {}
            for i in s.state.current_ids:
                for f in s.explanations[i].removed:
                    counts[f] = counts.get(f, 0) + 1
            names = s.dataset.feature_names
            out = [{"feature": f, "name": names[f], "count": c}
                   for f, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]
            return out[:limit] if limit > 0 else out

    @app.post("/sessions/{sid}/filters")
    def push_filter(sid: str, body: dict):
        s = get_session(sid)
        with s.lock:
            filt = _parse_filter(body, s)
            try:
                s.state = G.apply_filter(s.state, filt, s.explanations, s.predictions)
            except G.FilterError as exc:
                raise ServiceError(400, str(exc)) from exc
            return {"stack": _stack_payload(s.state)}

    @app.post("/sessions/{sid}/filters/pop")
    def pop_filters(sid: str, body: dict):
        s = get_session(sid)
        with s.lock:
            try:
                depth = int(body["depth"])
            except (KeyError, TypeError, ValueError):
                raise ServiceError(400, "body must carry an integer depth") from None
            try:
                s.state = G.pop_to(s.state, depth)
            except G.FilterError as exc:
                raise ServiceError(400, str(exc)) from exc
            return {"stack": _stack_payload(s.state)}

    @app.get("/sessions/{sid}/groups/{key_path}/matrix")
    def get_matrix(sid: str, key_path: str, rows: str = "feature-order",
                   cols: str = "importance", hide: float | None = None,
                   page: int = 0, page_size: int = 0):
        s = get_session(sid)
        with s.lock:
            key = _path_to_key(key_path)
            match = [g for g in s.groups() if g.key == key]
            if not match:
                raise ServiceError(404, f"no group with key {key_path!r} in the current filter")
            items = [s.items_by_id[i] for i in match[0].item_ids]
            try:
                m = inspector.build_matrix(items, s.predictions, s.dataset.feature_names)
                m = inspector.order_matrix(m, row_mode=rows, column_mode=cols)
            except ValueError as exc:
                raise ServiceError(400, str(exc)) from exc
            if hide is not None:
                m = inspector.hide_nondiscriminative(m, threshold=hide)
            payload = m.as_dict()
            payload["group"] = {"key": list(key), "size": match[0].size}
            total_rows = len(payload["rows"])
            if page_size > 0:
                payload["rows"] = payload["rows"][page * page_size:(page + 1) * page_size]
            payload["total_rows"] = total_rows
            return payload

    return app
