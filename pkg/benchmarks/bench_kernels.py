"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each backend in a subprocess (the backend is chosen at import time via
FLIPSCOPE_NO_NUMBA) and compares wall times for the three hot paths: batch
scoring, SGD training, and a full explanation run.

    python benchmarks/bench_kernels.py [--items 5000] [--features 400]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def workload(items, features):
    import numpy as np

    from flipscope import _kernels
    from flipscope.data import split_dataset
    from flipscope.explain import explain_all
    from flipscope.models import calibrate_threshold, train_logistic
    from flipscope.synth import planted_corpus

    out = {"backend": _kernels.backend()}
    corpus = planted_corpus(n_items=items, n_features=features, seed=23)
    dataset = split_dataset(corpus.dataset, 0.2, 23)

    # batch scoring: every item's active set, many times over
    sets = [it.active for it in dataset.items]
    flat, offsets = _kernels.pack_sets(sets)
    w, b = corpus.model.weights, corpus.model.bias
    _kernels.linear_scores(flat, offsets, w, b)  # warm the JIT before timing
    t0 = time.perf_counter()
    reps = 50
    for _ in range(reps):
        scores = _kernels.linear_scores(flat, offsets, w, b)
    out["score_s"] = (time.perf_counter() - t0) / reps
    out["score_checksum"] = float(np.sum(scores))

    # SGD training on the train split
    train = dataset.train_items
    t0 = time.perf_counter()
    model = train_logistic(train, dataset.n_features, epochs=150, seed=23)
    out["train_s"] = time.perf_counter() - t0
    out["train_checksum"] = float(np.sum(model.weights) + model.bias)

    # end-to-end explanation run (the product hot path)
    calibrate_threshold(corpus.model, train)
    t0 = time.perf_counter()
    run = explain_all(corpus.model, dataset, seed=23, parallelism=8, cache=True)
    out["explain_s"] = time.perf_counter() - t0
    out["model_calls"] = run.manifest["model_calls"]
    return out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--items", type=int, default=5000)
    parser.add_argument("--features", type=int, default=400)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        print(json.dumps(workload(args.items, args.features)))
        return

    results = {}
    for backend, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, FLIPSCOPE_NO_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker",
             "--items", str(args.items), "--features", str(args.features)],
            env=env, capture_output=True, text=True, check=True)
        results[backend] = json.loads(proc.stdout.strip().splitlines()[-1])
        assert results[backend]["backend"] == backend, results[backend]

    nb, np_ = results["numba"], results["numpy"]
    drift = abs(nb["score_checksum"] - np_["score_checksum"])
    assert drift < 1e-6, f"backends disagree on scores (drift {drift})"

    print(f"\nworkload: {args.items} items x {args.features} features\n")
    print(f"{'kernel':<22}{'numba':>14}{'numpy':>14}{'speedup':>10}")
    for label, key in (("batch scoring", "score_s"), ("sgd training", "train_s"),
                       ("explanation run", "explain_s")):
        a, b = nb[key], np_[key]
        print(f"{label:<22}{a * 1e3:>12.2f}ms{b * 1e3:>12.2f}ms{b / a:>9.1f}x")
    print(f"\nscore checksum drift: {drift:.2e}")
    print(f"model calls (cached run): numba {nb['model_calls']}, numpy {np_['model_calls']}")


if __name__ == "__main__":
    main()
