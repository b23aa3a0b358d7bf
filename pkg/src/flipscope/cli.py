"""Operator entry points: train, explain, report, serve, synth.

Every command is deterministic given identical inputs and seeds, writes
machine-readable results to stdout or to ``--out``, and logs to stderr.
A ``key = value`` config file can preset any flag; explicit flags win.
Manifest/hash mismatches exit with code 2, other failures with 1.
"""

from __future__ import annotations

import json
import sys

import click

from . import bridge as bridge_mod
from . import explain as explain_mod
from . import metrics as metrics_mod
from . import models as models_mod
from .data import load_dataset, save_dataset, split_dataset
from .groups import group_explanations, sort_groups
from .models import PredictionRecord

EXIT_MISMATCH = 2


def _fail(code: int, message: str):
    click.echo(json.dumps({"error": {"code": code, "message": message}}), err=True)
    sys.exit(code)


def load_config(path) -> dict:
    """Flat key=value file; '#' starts a comment; keys map to flag names."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise click.ClickException(f"{path}:{lineno}: expected key = value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(ctx, param, value):
    if value:
        cfg = load_config(value)
        ctx.default_map = ctx.default_map or {}
        for sub in ("train", "explain", "report", "serve", "synth"):
            ctx.default_map.setdefault(sub, {}).update(cfg)
    return value


@click.group()
@click.option("--config", type=click.Path(exists=True), callback=_apply_config,
              expose_value=False, is_eager=True, help="key=value config file")
def main():
    """Diagnostics pipeline for binary classifiers on sparse binary data."""


data_opts = [
    click.option("--data", required=True, type=click.Path(exists=True)),
    click.option("--format", "fmt", type=click.Choice(["sparse", "csv"]), default="sparse",
                 show_default=True),
]


def _with(opts):
    def deco(f):
        for opt in reversed(opts):
            f = opt(f)
        return f
    return deco


@main.command()
@_with(data_opts)
@click.option("--split", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--model", "kind", type=click.Choice(["logistic", "naive-bayes"]),
              default="logistic", show_default=True)
@click.option("--learning-rate", type=float, default=0.1, show_default=True)
@click.option("--epochs", type=int, default=100, show_default=True)
@click.option("--l2", type=float, default=1e-4, show_default=True)
@click.option("--smoothing", type=float, default=1.0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def train(data, fmt, split, seed, kind, learning_rate, epochs, l2, smoothing, out):
    """Train a reference model and calibrate its threshold on the train split."""
    try:
        dataset = split_dataset(load_dataset(data, fmt), split, seed)
        train_items = dataset.train_items
        if kind == "logistic":
            model = models_mod.train_logistic(train_items, dataset.n_features,
                                              learning_rate=learning_rate, epochs=epochs,
                                              l2=l2, seed=seed)
        else:
            model = models_mod.train_naive_bayes(train_items, dataset.n_features,
                                                 smoothing=smoothing)
        models_mod.calibrate_threshold(model, train_items)
        preds = models_mod.predict_items(model, train_items)
        acc = metrics_mod.accuracy(preds)
        models_mod.save_model(model, out, dataset_hash=dataset.content_hash(),
                              extra={"split_fraction": split, "split_seed": seed,
                                     "train_accuracy": acc})
    except Exception as exc:  # noqa: BLE001
        _fail(1, str(exc))
    click.echo(json.dumps({"model": model.name, "threshold": model.threshold,
                           "train_accuracy": acc, "out": out}))


def _resolve_model(model_path, bridge_cmd, bridge_url, threshold, dataset,
                   calibrate, split, seed):
    given = [x for x in (model_path, bridge_cmd, bridge_url) if x]
    if len(given) != 1:
        _fail(1, "pass exactly one of --model, --bridge-cmd, --bridge-url")
    if model_path:
        model = models_mod.load_model(model_path)
        artifact_hash = model.artifact.get("dataset_hash")
        if artifact_hash and artifact_hash != dataset.content_hash():
            _fail(EXIT_MISMATCH, "model artifact was trained on a different dataset")
        return model, model.artifact
    model = bridge_mod.connect_external_model(command=bridge_cmd, url=bridge_url,
                                              threshold=threshold if threshold is not None else 0.5)
    if calibrate:
        d = split_dataset(dataset, split, seed)
        models_mod.calibrate_threshold(model, d.train_items)
    elif threshold is None:
        _fail(1, "bridge models need --threshold or --calibrate")
    return model, {}


@main.command()
@_with(data_opts)
@click.option("--model", "model_path", type=click.Path(exists=True))
@click.option("--bridge-cmd", help="external model command speaking the stdio protocol")
@click.option("--bridge-url", help="external model endpoint exposing POST /score")
@click.option("--threshold", type=float, default=None, help="threshold for bridge models")
@click.option("--calibrate", is_flag=True, help="calibrate bridge threshold on the train split")
@click.option("--split", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--parallelism", type=int, default=1, show_default=True)
@click.option("--cache/--no-cache", default=True, show_default=True)
@click.option("--out", required=True, type=click.Path())
def explain(data, fmt, model_path, bridge_cmd, bridge_url, threshold, calibrate,
            split, seed, parallelism, cache, out):
    """Generate one explanation per item, offline, into OUT/explanations.jsonl."""
    try:
        dataset = load_dataset(data, fmt)
        model, artifact = _resolve_model(model_path, bridge_cmd, bridge_url, threshold,
                                         dataset, calibrate, split, seed)
        run = explain_mod.explain_all(model, dataset, seed=seed,
                                      parallelism=parallelism, cache=cache)
        if "split_fraction" in artifact:
            run.manifest["split"] = {"fraction": artifact["split_fraction"],
                                     "seed": artifact["split_seed"]}
        explain_mod.write_run(run, out)
        if hasattr(model, "close"):
            model.close()
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001
        _fail(1, str(exc))
    if run.failures:
        _fail(1, f"{len(run.failures)} items failed; partial results written to {out}")
    click.echo(json.dumps({"items": len(run.explanations),
                           "model_calls": run.manifest["model_calls"],
                           "requests": run.manifest["requests"],
                           "wall_time_s": run.manifest["wall_time_s"], "out": out}))


def _predictions_from_run(run, dataset):
    threshold = run.manifest["threshold"]
    by_id = {e.item_id: e for e in run.explanations}
    preds = []
    for it in dataset.items:
        s = by_id[it.id].score
        predicted = s > threshold
        preds.append(PredictionRecord(item_id=it.id, score=s, predicted=predicted,
                                      correct=predicted == it.label))
    return preds


@main.command()
@_with(data_opts)
@click.option("--model", "model_path", type=click.Path(exists=True),
              help="model artifact; omitted = reuse scores stored in the run")
@click.option("--explanations", "run_dir", required=True, type=click.Path(exists=True))
@click.option("--top", type=int, default=20, show_default=True)
@click.option("--bins", type=int, default=50, show_default=True)
@click.option("--out", required=True, type=click.Path())
def report(data, fmt, model_path, run_dir, top, bins, out):
    """Emit a static JSON report: summary plus the largest explanation groups."""
    try:
        dataset = load_dataset(data, fmt)
        run = explain_mod.read_run(run_dir)
        manifest = run.manifest
        if manifest.get("dataset_hash") != dataset.content_hash():
            _fail(EXIT_MISMATCH, "explanation run was generated for a different dataset")
        if "split" in manifest:
            dataset = split_dataset(dataset, manifest["split"]["fraction"],
                                    manifest["split"]["seed"])
        if model_path:
            model = models_mod.load_model(model_path)
            if model.name != manifest.get("model") or \
                    abs(model.threshold - manifest.get("threshold", -1)) > 1e-12:
                _fail(EXIT_MISMATCH, "explanation run was generated for a different model")
            preds = models_mod.predict_items(model, dataset.items)
        else:
            model = models_mod.FunctionModel(lambda s: 0.0, name=manifest["model"],
                                             threshold=manifest["threshold"])
            preds = _predictions_from_run(run, dataset)
        by_id = {p.item_id: p for p in preds}
        by_split = {
            "train": [by_id[it.id] for it in dataset.train_items],
            "test": [by_id[it.id] for it in dataset.test_items],
        }
        summary = metrics_mod.summary_report(model, dataset, by_split, bins=bins)
        explanations = {e.item_id: e for e in run.explanations}
        grouped = group_explanations(explanations, by_id, [it.id for it in dataset.items])
        ordered = sort_groups(grouped, [("total", "desc")], dataset.feature_names)
        payload = {
            "manifest": manifest,
            "summary": summary,
            "groups": [g.as_dict(dataset.feature_names) for g in ordered[:top]],
            "total_groups": len(ordered),
        }
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001
        _fail(1, str(exc))
    click.echo(json.dumps({"groups": len(ordered), "out": out}))


def _parse_named(values, default_prefix):
    out = {}
    for i, v in enumerate(values):
        name, sep, path = v.partition("=")
        if not sep:
            name, path = f"{default_prefix}{i}" if i else default_prefix, v
        out[name] = path
    return out


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--data", "data_specs", multiple=True, help="NAME=PATH (repeatable)")
@click.option("--format", "fmt", type=click.Choice(["sparse", "csv"]), default="sparse")
@click.option("--model", "model_specs", multiple=True, help="NAME=PATH (repeatable)")
@click.option("--run", "run_specs", multiple=True, help="NAME=DIR (repeatable)")
@click.option("--ui", type=click.Path(exists=True), default=None,
              help="static directory served at /")
def serve(host, port, data_specs, fmt, model_specs, run_specs, ui):
    """Launch the diagnostics service."""
    import uvicorn

    from .service import Registry, create_app

    try:
        registry = Registry()
        for name, path in _parse_named(data_specs, "data").items():
            registry.add_dataset(name, load_dataset(path, fmt))
        for name, path in _parse_named(model_specs, "model").items():
            registry.add_model(name, models_mod.load_model(path))
        for name, path in _parse_named(run_specs, "run").items():
            registry.add_run(name, explain_mod.read_run(path))
        app = create_app(registry)
        if ui:
            from fastapi.staticfiles import StaticFiles
            app.mount("/", StaticFiles(directory=ui, html=True), name="ui")
    except Exception as exc:  # noqa: BLE001
        _fail(1, str(exc))
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--items", type=int, default=5000, show_default=True)
@click.option("--features", type=int, default=400, show_default=True)
@click.option("--avg-active", type=float, default=10.0, show_default=True)
@click.option("--positive-rate", type=float, default=0.28, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--split", type=float, default=0.2, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--model-out", type=click.Path(), default=None,
              help="also write the planted model artifact, threshold calibrated on train")
def synth(items, features, avg_active, positive_rate, seed, split, out, model_out):
    """Generate a synthetic corpus with a planted model (demo/fixture data)."""
    from .synth import planted_corpus

    try:
        corpus = planted_corpus(n_items=items, n_features=features, avg_active=avg_active,
                                positive_rate=positive_rate, seed=seed)
        save_dataset(corpus.dataset, out)
        result = {"items": items, "features": features, "out": out,
                  "positive_rate": corpus.dataset.positive_rate()}
        if model_out:
            dataset = split_dataset(corpus.dataset, split, seed)
            models_mod.calibrate_threshold(corpus.model, dataset.train_items)
            models_mod.save_model(corpus.model, model_out,
                                  dataset_hash=dataset.content_hash(),
                                  extra={"split_fraction": split, "split_seed": seed})
            result["model_out"] = model_out
            result["threshold"] = corpus.model.threshold
    except Exception as exc:  # noqa: BLE001
        _fail(1, str(exc))
    click.echo(json.dumps(result))


if __name__ == "__main__":
    main()
