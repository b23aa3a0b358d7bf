"""Record real service payloads as fixtures for the frontend contract tests.

Run from the repository root (or anywhere with flipscope installed):

    python frontend/tools/record_fixtures.py

Regenerates frontend/tests/fixtures/*.json and asserts the properties the
tests rely on (an uncertain group, a certain one, a >3-feature key, a matrix
row aggregating 3+ items).
"""

import json
import pathlib

from fastapi.testclient import TestClient

from flipscope.data import split_dataset
from flipscope.explain import explain_all
from flipscope.models import calibrate_threshold
from flipscope.service import Registry, create_app
from flipscope.synth import planted_corpus

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    corpus = planted_corpus(n_items=400, n_features=40, seed=5)
    dataset = split_dataset(corpus.dataset, 0.25, 5)
    calibrate_threshold(corpus.model, dataset.train_items)
    run = explain_all(corpus.model, dataset, seed=5)
    registry = Registry()
    registry.add_dataset("demo", dataset)
    registry.add_model("planted", corpus.model)
    registry.add_run("run1", run)
    client = TestClient(create_app(registry))

    sid = client.post("/sessions", json={"dataset": "demo", "model": "planted",
                                         "run": "run1"}).json()["session"]
    summary = client.get(f"/sessions/{sid}/summary").json()
    groups = client.get(f"/sessions/{sid}/groups", params={"page_size": 60}).json()
    features = client.get(f"/sessions/{sid}/features").json()

    finite = [g for g in groups["groups"] if g["or"] is not None]
    assert any(g["uncertain"] for g in finite), "need an uncertain group"
    assert any(not g["uncertain"] for g in finite), "need a certain group"
    assert any(len(g["key"]) > 3 for g in groups["groups"]), "need a >3-feature key"

    matrix = None
    for g in groups["groups"]:
        if not g["key"]:
            continue
        m = client.get(f"/sessions/{sid}/groups/{g['key_path']}/matrix").json()
        if any(r["count"] >= 3 for r in m["rows"]) and len(m["columns"]) >= 2:
            matrix = m
            break
    assert matrix is not None, "need a matrix with an aggregate row of 3+ items"

    OUT.mkdir(parents=True, exist_ok=True)
    for name, payload in (("summary", summary), ("groups", groups),
                          ("features", features), ("matrix", matrix)):
        (OUT / f"{name}.json").write_text(json.dumps(payload, indent=1) + "\n",
                                          encoding="utf-8")
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()
