"""Command-line pipeline: stats, clean, embed, resample, train, predict,
evaluate, analyze.

Stages communicate through files (JSONL datasets, .npz feature matrices,
checkpoint files), so each step is independently runnable and testable. Exit
codes: 0 success, 1 invalid config or bad input data, 2 missing input file,
3 training divergence. A config file (JSON) can set any flag; explicit flags
win.
"""

from __future__ import annotations

import json
import os
import sys
from functools import partial
from multiprocessing import Pool

import click
import numpy as np

from .corpus import (
    DatasetFormatError,
    DatasetSchema,
    LabeledExample,
    corpus_stats,
    format_stats_table,
    load_dataset,
    save_dataset,
)
from .embeddings import (
    EmbedConfig,
    EmbedServiceError,
    TASK_LENGTHS,
    embed_remote,
    embed_static,
    load_static_vectors,
    pad_or_truncate,
)
from .evaluation import (
    confusion_matrix,
    error_analysis,
    format_confusion_grid,
    format_metrics_table,
    metrics_report,
)
from .models import (
    ModelSpec,
    TrainingDivergence,
    build_model,
    classify,
    load_model,
    predict_proba_batch,
    save_model,
    train,
)
from .preprocess import PROFILES, apply_profile, strip_related_titles, tokenize
from .resample import FeatureMatrix, smote

DEFAULT_KEYWORDS = ["protest", "protesting", "protesters", "agitation"]


def _fail(message: str, code: int):
    click.echo(f"protestlens: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    """Map stage exceptions onto the documented exit codes."""
    try:
        fn()
    except FileNotFoundError as exc:
        name = exc.filename if exc.filename else exc
        _fail(f"missing input file: {name}", 2)
    except TrainingDivergence as exc:
        _fail(f"training diverged: {exc}", 3)
    except (DatasetFormatError, EmbedServiceError, ValueError, KeyError) as exc:
        _fail(str(exc), 1)


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        _fail(f"missing input file: {path}", 2)
    except json.JSONDecodeError as exc:
        _fail(f"config {path}: {exc}", 1)
    if not isinstance(cfg, dict):
        _fail(f"config {path}: top level must be a JSON object", 1)
    return cfg


def _resolve(flag_value, config, key, default=None):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _schema(id_field, text_field, label_field):
    return DatasetSchema(
        id_field=id_field or None,
        text_field=text_field or "text",
        label_field=label_field or "label",
    )


def _task_lengths(task):
    if task not in TASK_LENGTHS:
        raise ValueError(f"--task must be one of {sorted(TASK_LENGTHS)}, got {task!r}")
    return TASK_LENGTHS[task]


# Top-level so multiprocessing can pickle it.
def _clean_one(item, profile_name, markers):
    ex_id, text, label = item
    text = strip_related_titles(text, markers)
    seq = tokenize(text)
    cleaned = apply_profile(seq, PROFILES[profile_name])
    return ex_id, " ".join(cleaned.tokens), label


def _map_parallel(fn, items, workers):
    if workers <= 1:
        return [fn(item) for item in items]
    with Pool(processes=workers) as pool:
        return pool.map(fn, items)


def _save_features(path, X, y, ids, cfg: EmbedConfig):
    np.savez(
        path,
        X=np.asarray(X, dtype=np.float64),
        y=np.asarray(y, dtype=np.int64),
        ids=np.asarray(ids, dtype="U"),
        max_tokens=np.int64(cfg.max_tokens),
        out_positions=np.int64(cfg.out_positions),
        dim=np.int64(cfg.dim),
    )


def _load_features(path, require_labels=False):
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    data = np.load(path, allow_pickle=False)
    cfg = EmbedConfig(
        max_tokens=int(data["max_tokens"]),
        out_positions=int(data["out_positions"]),
        dim=int(data["dim"]),
    )
    y = data["y"]
    if require_labels and np.any(y < 0):
        raise ValueError(f"{path}: features contain unlabeled rows")
    return data["X"], y, [str(s) for s in data["ids"]], cfg


@click.group()
def main():
    """Protest-news classification pipeline."""


_schema_options = [
    click.option("--id-field", default="id", show_default=True),
    click.option("--text-field", default="text", show_default=True),
    click.option("--label-field", default="label", show_default=True),
]


def _with(options):
    def deco(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return deco


@main.command()
@click.argument("dataset", type=click.Path())
@click.option("--out", type=click.Path(), default=None, help="Write the JSON report here.")
@click.option("--short-threshold", type=int, default=None)
@click.option("--config", type=click.Path(), default=None)
@_with(_schema_options)
def stats(dataset, out, short_threshold, config, id_field, text_field, label_field):
    """Corpus statistics for a JSONL dataset."""

    def run():
        cfg = _load_config(config)
        threshold = int(_resolve(short_threshold, cfg, "short_threshold", 100))
        if not os.path.exists(dataset):
            raise FileNotFoundError(dataset)
        examples = load_dataset(dataset, _schema(id_field, text_field, label_field))
        report = corpus_stats(examples, short_threshold=threshold)
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        click.echo(format_stats_table(report))

    _guard(run)


@main.command()
@click.argument("dataset", type=click.Path())
@click.argument("output", type=click.Path())
@click.option("--profile", default=None, help="notclean, lightclean or clean.")
@click.option("--marker", "markers", multiple=True, help="Related-title marker pattern.")
@click.option("--workers", type=int, default=None)
@click.option("--config", type=click.Path(), default=None)
@_with(_schema_options)
def clean(dataset, output, profile, markers, workers, config, id_field, text_field, label_field):
    """Apply a cleaning profile and write the cleaned dataset."""

    def run():
        cfg = _load_config(config)
        prof = str(_resolve(profile, cfg, "profile", "notclean")).lower()
        if prof not in PROFILES:
            raise ValueError(f"--profile must be one of {sorted(PROFILES)}, got {prof!r}")
        marks = list(markers) or list(cfg.get("markers", []))
        n_workers = int(_resolve(workers, cfg, "workers", 1))
        if not os.path.exists(dataset):
            raise FileNotFoundError(dataset)
        examples = load_dataset(dataset, _schema(id_field, text_field, label_field))
        items = [(ex.id, ex.text, ex.label) for ex in examples]
        strip_related_titles("", marks)  # validate patterns before forking workers
        rows = _map_parallel(partial(_clean_one, profile_name=prof, markers=marks),
                             items, n_workers)
        save_dataset([LabeledExample(i, t, l) for i, t, l in rows], output)
        click.echo(f"cleaned {len(rows)} examples -> {output}")

    _guard(run)


# Top-level so multiprocessing can pickle it.
def _embed_one(text, table, cfg):
    seq = pad_or_truncate(tokenize(text), cfg.max_tokens)
    return embed_static(seq, table, cfg).ravel()


@main.command()
@click.argument("dataset", type=click.Path())
@click.argument("output", type=click.Path())
@click.option("--task", default=None, help="task1 (800->256) or task2 (100->32).")
@click.option("--provider", default=None, help="static or remote.")
@click.option("--vectors", type=click.Path(), default=None, help="Static vector file.")
@click.option("--dim", type=int, default=None, help="Vector dimension (remote provider).")
@click.option("--endpoint", envvar="PROTESTLENS_ENDPOINT", default=None)
@click.option("--batch-size", type=int, default=None, help="Remote request batch size.")
@click.option("--workers", type=int, default=None)
@click.option("--config", type=click.Path(), default=None)
@_with(_schema_options)
def embed(dataset, output, task, provider, vectors, dim, endpoint, batch_size, workers,
          config, id_field, text_field, label_field):
    """Turn a (cleaned) dataset into a feature matrix file."""

    def run():
        cfg = _load_config(config)
        task_name = str(_resolve(task, cfg, "task", "task1"))
        prov = str(_resolve(provider, cfg, "provider", "static"))
        if prov not in ("static", "remote"):
            raise ValueError(f"--provider must be static or remote, got {prov!r}")
        _task_lengths(task_name)
        n_workers = int(_resolve(workers, cfg, "workers", 1))
        if not os.path.exists(dataset):
            raise FileNotFoundError(dataset)
        examples = load_dataset(dataset, _schema(id_field, text_field, label_field))
        ids = [ex.id for ex in examples]
        y = np.array([ex.label if ex.label is not None else -1 for ex in examples])

        if prov == "static":
            vec_path = _resolve(vectors, cfg, "vectors")
            if vec_path is None:
                raise ValueError("static provider needs --vectors")
            if not os.path.exists(vec_path):
                raise FileNotFoundError(vec_path)
            table = load_static_vectors(vec_path)
            econf = EmbedConfig.for_task(task_name, dim=table.dim, provider="static")
            rows = _map_parallel(partial(_embed_one, table=table, cfg=econf),
                                 [ex.text for ex in examples], n_workers)
        else:
            url = _resolve(endpoint, cfg, "endpoint")
            if not url:
                raise ValueError("remote provider needs --endpoint or PROTESTLENS_ENDPOINT")
            d = _resolve(dim, cfg, "dim")
            if d is None:
                raise ValueError("remote provider needs --dim")
            econf = EmbedConfig.for_task(task_name, dim=int(d), provider="remote")
            chunk = int(_resolve(batch_size, cfg, "batch_size", 16))
            rows = []
            for start in range(0, len(examples), chunk):
                seqs = [
                    pad_or_truncate(tokenize(ex.text), econf.max_tokens)
                    for ex in examples[start : start + chunk]
                ]
                rows.extend(mat.ravel() for mat in embed_remote(seqs, url, econf))

        _save_features(output, np.vstack(rows), y, ids, econf)
        click.echo(f"embedded {len(rows)} examples -> {output}")

    _guard(run)


@main.command()
@click.argument("features", type=click.Path())
@click.argument("output", type=click.Path())
@click.option("--smote-k", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--config", type=click.Path(), default=None)
def resample(features, output, smote_k, seed, config):
    """Balance classes with SMOTE and write the enlarged feature file."""

    def run():
        cfg = _load_config(config)
        k = int(_resolve(smote_k, cfg, "smote_k", 5))
        seed_val = int(_resolve(seed, cfg, "seed", 0))
        X, y, ids, econf = _load_features(features, require_labels=True)
        balanced = smote(FeatureMatrix(X, y), k=k, seed=seed_val)
        extra = balanced.n - len(ids)
        ids = ids + [f"smote-{i}" for i in range(extra)]
        _save_features(output, balanced.X, balanced.y, ids, econf)
        zeros, ones = balanced.class_counts()
        click.echo(f"resampled to {zeros}/{ones} -> {output}")

    _guard(run)


@main.command(name="train")
@click.argument("features", type=click.Path())
@click.option("--dev", "dev_path", type=click.Path(), required=True)
@click.option("--out", "checkpoint", type=click.Path(), required=True)
@click.option("--log", "log_path", type=click.Path(), default=None)
@click.option("--preset", default=None)
@click.option("--optimizer", default=None)
@click.option("--lr", type=float, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--batch", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--features2", type=click.Path(), default=None, help="Task-2 training features (multitask).")
@click.option("--dev2", type=click.Path(), default=None, help="Task-2 dev features (multitask).")
@click.option("--config", type=click.Path(), default=None)
def train_cmd(features, dev_path, checkpoint, log_path, preset, optimizer, lr, epochs,
              batch, seed, threshold, features2, dev2, config):
    """Train a preset on a feature file and write checkpoint + log."""

    def run():
        cfg = _load_config(config)
        preset_name = str(_resolve(preset, cfg, "preset", "model1_task1"))
        X, y, _, econf = _load_features(features, require_labels=True)
        data = FeatureMatrix(X, y)
        Xd, yd, _, _ = _load_features(_resolve(dev_path, cfg, "dev"), require_labels=True)
        dev = FeatureMatrix(Xd, yd)
        embed2 = None
        if preset_name == "model2_multitask":
            f2 = _resolve(features2, cfg, "features2")
            d2 = _resolve(dev2, cfg, "dev2")
            if not f2 or not d2:
                raise ValueError("model2_multitask needs --features2 and --dev2")
            X2, y2, _, econf2 = _load_features(f2, require_labels=True)
            X2d, y2d, _, _ = _load_features(d2, require_labels=True)
            data = (data, FeatureMatrix(X2, y2))
            dev = (dev, FeatureMatrix(X2d, y2d))
            embed2 = econf2
        spec = ModelSpec(
            preset=preset_name,
            embed=econf,
            embed_task2=embed2,
            optimizer=_resolve(optimizer, cfg, "optimizer"),
            lr=float(_resolve(lr, cfg, "lr", 0.001)),
            epochs=int(_resolve(epochs, cfg, "epochs", 10)),
            batch_size=int(_resolve(batch, cfg, "batch", 32)),
            seed=int(_resolve(seed, cfg, "seed", 0)),
            threshold=float(_resolve(threshold, cfg, "threshold", 0.5)),
        )
        model = build_model(spec)
        trained = train(model, data, spec, dev, log_path=log_path)
        save_model(trained, checkpoint)
        last = trained.history[-1] if trained.history else {"loss": None, "dev_macro_f1": None}
        click.echo(
            f"trained {spec.preset} for {spec.epochs} epochs "
            f"(final loss {last['loss']}, dev macro-F1 {last['dev_macro_f1']}) -> {checkpoint}"
        )

    _guard(run)


@main.command()
@click.argument("checkpoint", type=click.Path())
@click.argument("features", type=click.Path())
@click.option("--out", type=click.Path(), required=True)
@click.option("--threshold", type=float, default=None)
@click.option("--head", default=None, help="task1 or task2 (multitask checkpoints).")
@click.option("--config", type=click.Path(), default=None)
def predict(checkpoint, features, out, threshold, head, config):
    """Per-example probabilities and labels from a trained checkpoint."""

    def run():
        cfg = _load_config(config)
        if not os.path.exists(checkpoint):
            raise FileNotFoundError(checkpoint)
        trained = load_model(checkpoint)
        cut = float(_resolve(threshold, cfg, "threshold", trained.spec.threshold))
        head_name = _resolve(head, cfg, "head")
        X, _, ids, _ = _load_features(features)
        if trained.spec.preset == "model2_multitask":
            if head_name not in ("task1", "task2"):
                raise ValueError("multitask checkpoint needs --head task1|task2")
            target = trained.spec.embed if head_name == "task1" else trained.spec.embed_task2
            seqs = X.reshape(X.shape[0], target.out_positions, target.dim)
            probs = predict_proba_batch(trained.model, seqs, head=head_name)
        else:
            seqs = X.reshape(X.shape[0], trained.spec.embed.out_positions, trained.spec.embed.dim)
            probs = predict_proba_batch(trained.model, seqs)
        with open(out, "w", encoding="utf-8") as fh:
            for ex_id, p in zip(ids, probs):
                fh.write(json.dumps(
                    {"id": ex_id, "proba": float(p), "label": classify(float(p), cut)},
                    sort_keys=True,
                ) + "\n")
        click.echo(f"predicted {len(ids)} examples -> {out}")

    _guard(run)


def _load_predictions(path):
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    preds = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path} line {lineno}: {exc.msg}") from exc
            preds[str(rec["id"])] = int(rec["label"])
    return preds


@main.command()
@click.argument("truth", type=click.Path())
@click.argument("predictions", type=click.Path())
@click.option("--out", type=click.Path(), default=None)
@click.option("--config", type=click.Path(), default=None)
@_with(_schema_options)
def evaluate(truth, predictions, out, config, id_field, text_field, label_field):
    """Metrics report from a labeled dataset and a predictions file."""

    def run():
        _load_config(config)
        if not os.path.exists(truth):
            raise FileNotFoundError(truth)
        examples = load_dataset(truth, _schema(id_field, text_field, label_field))
        preds = _load_predictions(predictions)
        truth_labels, pred_labels = [], []
        for ex in examples:
            if ex.id not in preds:
                raise ValueError(f"no prediction for example {ex.id!r}")
            if ex.label is None:
                raise ValueError(f"example {ex.id!r} has no label")
            truth_labels.append(ex.label)
            pred_labels.append(preds[ex.id])
        cm = confusion_matrix(truth_labels, pred_labels)
        report = metrics_report(cm)
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        click.echo(format_confusion_grid(cm))
        click.echo(format_metrics_table(report))

    _guard(run)


@main.command()
@click.argument("truth", type=click.Path())
@click.argument("predictions", type=click.Path())
@click.option("--out", type=click.Path(), default=None)
@click.option("--keyword", "keywords", multiple=True)
@click.option("--config", type=click.Path(), default=None)
@_with(_schema_options)
def analyze(truth, predictions, out, keywords, config, id_field, text_field, label_field):
    """Misclassification report: keyword false negatives and false positives."""

    def run():
        cfg = _load_config(config)
        words = list(keywords) or list(cfg.get("keywords", DEFAULT_KEYWORDS))
        if not os.path.exists(truth):
            raise FileNotFoundError(truth)
        examples = load_dataset(truth, _schema(id_field, text_field, label_field))
        preds = _load_predictions(predictions)
        aligned = []
        for ex in examples:
            if ex.id not in preds:
                raise ValueError(f"no prediction for example {ex.id!r}")
            aligned.append(preds[ex.id])
        report = error_analysis(examples, aligned, words)
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                json.dump(report, fh, indent=2, sort_keys=True)
                fh.write("\n")
        counts = report["counts"]
        click.echo(
            f"false negatives: {counts['fn']} (keyword-FN: {counts['keyword_fn']}), "
            f"false positives: {counts['fp']}"
        )

    _guard(run)


if __name__ == "__main__":
    main()
