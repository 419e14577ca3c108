import json

import numpy as np
import pytest
from click.testing import CliRunner

from protestlens.cli import main

from conftest import (
    make_separable_corpus,
    make_signal_vocab,
    write_jsonl,
    write_vector_file,
)


@pytest.fixture
def runner():
    return CliRunner()


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestStats:
    def test_two_line_fixture(self, runner, tiny_dataset, tmp_path):
        out = tmp_path / "stats.json"
        run_ok(runner, ["stats", str(tiny_dataset), "--out", str(out)])
        report = json.loads(out.read_text())
        assert report["n_docs"] == 2

    def test_missing_input_exits_2(self, runner, tmp_path):
        result = runner.invoke(main, ["stats", str(tmp_path / "nope.jsonl")])
        assert result.exit_code == 2

    def test_bad_dataset_exits_1(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("not json\n")
        result = runner.invoke(main, ["stats", str(bad)])
        assert result.exit_code == 1


class TestClean:
    def test_lightclean_output(self, runner, tiny_dataset, tmp_path):
        out = tmp_path / "clean.jsonl"
        run_ok(runner, ["clean", str(tiny_dataset), str(out), "--profile", "lightclean"])
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        assert rows[0]["text"] == "protesters marched city"
        assert rows[0]["label"] == 1

    def test_invalid_profile_exits_1(self, runner, tiny_dataset, tmp_path):
        result = runner.invoke(
            main, ["clean", str(tiny_dataset), str(tmp_path / "o.jsonl"), "--profile", "shiny"]
        )
        assert result.exit_code == 1

    def test_marker_strips_related_titles(self, runner, tmp_path):
        data = write_jsonl(
            tmp_path / "d.jsonl",
            [{"id": "a", "text": "Body text here. Related Articles: junk", "label": 0}],
        )
        out = tmp_path / "clean.jsonl"
        run_ok(runner, ["clean", str(data), str(out), "--profile", "notclean",
                        "--marker", "Related Articles"])
        row = json.loads(out.read_text())
        assert "junk" not in row["text"]

    def test_workers_do_not_change_output(self, runner, tmp_path):
        data = write_jsonl(tmp_path / "d.jsonl", make_separable_corpus(20, seed=1))
        out1, out4 = tmp_path / "w1.jsonl", tmp_path / "w4.jsonl"
        run_ok(runner, ["clean", str(data), str(out1), "--profile", "clean", "--workers", "1"])
        run_ok(runner, ["clean", str(data), str(out4), "--profile", "clean", "--workers", "4"])
        assert out1.read_bytes() == out4.read_bytes()


@pytest.fixture
def pipeline_files(tmp_path):
    """Dataset + vector file for quick end-to-end runs (task2 lengths)."""
    dim = 6
    vocab = make_signal_vocab(dim=dim)
    vectors = write_vector_file(tmp_path / "vectors.txt", vocab)
    train_file = write_jsonl(tmp_path / "train.jsonl", make_separable_corpus(40, seed=31))
    dev_file = write_jsonl(tmp_path / "dev.jsonl", make_separable_corpus(16, seed=32))
    return {"vectors": vectors, "train": train_file, "dev": dev_file, "dir": tmp_path, "dim": dim}


def embed_file(runner, files, src, dst, workers=1):
    run_ok(runner, [
        "embed", str(src), str(dst), "--task", "task2", "--provider", "static",
        "--vectors", str(files["vectors"]), "--workers", str(workers),
    ])


class TestEmbed:
    def test_static_embedding_shapes(self, runner, pipeline_files, tmp_path):
        out = tmp_path / "feat.npz"
        embed_file(runner, pipeline_files, pipeline_files["train"], out)
        data = np.load(out)
        assert data["X"].shape == (40, 32 * pipeline_files["dim"])
        assert int(data["out_positions"]) == 32
        assert len(data["ids"]) == 40

    def test_missing_vectors_file_exits_2(self, runner, pipeline_files, tmp_path):
        result = runner.invoke(main, [
            "embed", str(pipeline_files["train"]), str(tmp_path / "f.npz"),
            "--task", "task2", "--vectors", str(tmp_path / "missing.txt"),
        ])
        assert result.exit_code == 2

    def test_bad_task_exits_1(self, runner, pipeline_files, tmp_path):
        result = runner.invoke(main, [
            "embed", str(pipeline_files["train"]), str(tmp_path / "f.npz"),
            "--task", "task9", "--vectors", str(pipeline_files["vectors"]),
        ])
        assert result.exit_code == 1

    def test_remote_provider_through_stub_service(self, runner, pipeline_files,
                                                  stub_service, tmp_path):
        out = tmp_path / "remote.npz"
        run_ok(runner, [
            "embed", str(pipeline_files["dev"]), str(out), "--task", "task2",
            "--provider", "remote", "--endpoint", stub_service, "--dim", "3",
            "--batch-size", "4",
        ])
        data = np.load(out)
        assert data["X"].shape == (16, 32 * 3)
        assert int(data["dim"]) == 3

    def test_remote_provider_without_endpoint_exits_1(self, runner, pipeline_files,
                                                      tmp_path, monkeypatch):
        monkeypatch.delenv("PROTESTLENS_ENDPOINT", raising=False)
        result = runner.invoke(main, [
            "embed", str(pipeline_files["dev"]), str(tmp_path / "r.npz"),
            "--task", "task2", "--provider", "remote", "--dim", "3",
        ])
        assert result.exit_code == 1


class TestResample:
    def test_balances_counts(self, runner, pipeline_files, tmp_path):
        feat = tmp_path / "feat.npz"
        embed_file(runner, pipeline_files, pipeline_files["train"], feat)
        out = tmp_path / "bal.npz"
        run_ok(runner, ["resample", str(feat), str(out), "--smote-k", "3", "--seed", "7"])
        data = np.load(out)
        y = data["y"]
        assert (y == 0).sum() == (y == 1).sum()

    def test_seeded_and_deterministic(self, runner, pipeline_files, tmp_path):
        feat = tmp_path / "feat.npz"
        embed_file(runner, pipeline_files, pipeline_files["train"], feat)
        a, b = tmp_path / "a.npz", tmp_path / "b.npz"
        for out in (a, b):
            run_ok(runner, ["resample", str(feat), str(out), "--smote-k", "3", "--seed", "7"])
        assert a.read_bytes() == b.read_bytes()


class TestTrainPredictEvaluate:
    def _prepare(self, runner, files, epochs="2"):
        d = files["dir"]
        feat, dev_feat = d / "feat.npz", d / "dev_feat.npz"
        embed_file(runner, files, files["train"], feat)
        embed_file(runner, files, files["dev"], dev_feat)
        bal = d / "bal.npz"
        run_ok(runner, ["resample", str(feat), str(bal), "--smote-k", "3", "--seed", "0"])
        ckpt, log = d / "model.ckpt", d / "train.log"
        run_ok(runner, [
            "train", str(bal), "--dev", str(dev_feat), "--out", str(ckpt), "--log", str(log),
            "--preset", "model1_task2", "--epochs", epochs, "--batch", "16", "--seed", "0",
        ])
        return feat, dev_feat, bal, ckpt, log

    def test_train_writes_checkpoint_and_log(self, runner, pipeline_files):
        _, _, _, ckpt, log = self._prepare(runner, pipeline_files)
        assert ckpt.exists()
        entries = [json.loads(l) for l in log.read_text().splitlines()]
        assert len(entries) == 2
        assert set(entries[0]) == {"epoch", "loss", "dev_macro_f1"}

    def test_train_epochs_zero_equals_fresh_initialization(self, runner, pipeline_files):
        d = pipeline_files["dir"]
        feat, dev_feat = d / "f0.npz", d / "fd.npz"
        embed_file(runner, pipeline_files, pipeline_files["train"], feat)
        embed_file(runner, pipeline_files, pipeline_files["dev"], dev_feat)
        c1, c2 = d / "c1.ckpt", d / "c2.ckpt"
        for ckpt in (c1, c2):
            run_ok(runner, [
                "train", str(feat), "--dev", str(dev_feat), "--out", str(ckpt),
                "--preset", "model1_task2", "--epochs", "0", "--seed", "42",
            ])
        assert c1.read_bytes() == c2.read_bytes()

    def test_predict_and_evaluate_roundtrip(self, runner, pipeline_files):
        _, dev_feat, _, ckpt, _ = self._prepare(runner, pipeline_files, epochs="3")
        d = pipeline_files["dir"]
        preds = d / "preds.jsonl"
        run_ok(runner, ["predict", str(ckpt), str(dev_feat), "--out", str(preds)])
        rows = [json.loads(l) for l in preds.read_text().splitlines()]
        assert len(rows) == 16
        assert all(0.0 < r["proba"] < 1.0 for r in rows)
        report_path = d / "metrics.json"
        run_ok(runner, ["evaluate", str(pipeline_files["dev"]), str(preds),
                        "--out", str(report_path)])
        report = json.loads(report_path.read_text())
        assert 0.0 <= report["macro_f1"] <= 1.0

    def test_evaluate_matches_hand_oracle(self, runner, tmp_path):
        # truth/pred fixture built to hit TP=3, FP=1, FN=2, TN=4
        truth_rows = (
            [{"id": f"p{i}", "text": "x", "label": 1} for i in range(5)]
            + [{"id": f"n{i}", "text": "x", "label": 0} for i in range(5)]
        )
        truth = write_jsonl(tmp_path / "truth.jsonl", truth_rows)
        pred_labels = {"p0": 1, "p1": 1, "p2": 1, "p3": 0, "p4": 0,
                       "n0": 1, "n1": 0, "n2": 0, "n3": 0, "n4": 0}
        preds = tmp_path / "preds.jsonl"
        with open(preds, "w") as fh:
            for k, v in pred_labels.items():
                fh.write(json.dumps({"id": k, "proba": float(v), "label": v}) + "\n")
        out = tmp_path / "report.json"
        run_ok(runner, ["evaluate", str(truth), str(preds), "--out", str(out)])
        report = json.loads(out.read_text())
        assert report["accuracy"] == pytest.approx(0.7)
        assert report["macro_f1"] == pytest.approx(0.697, abs=1e-3)

    def test_training_divergence_exits_3(self, runner, pipeline_files):
        d = pipeline_files["dir"]
        feat, dev_feat = d / "fx.npz", d / "fy.npz"
        embed_file(runner, pipeline_files, pipeline_files["train"], feat)
        embed_file(runner, pipeline_files, pipeline_files["dev"], dev_feat)
        with np.errstate(over="ignore", invalid="ignore"):
            result = runner.invoke(main, [
                "train", str(feat), "--dev", str(dev_feat), "--out", str(d / "c.ckpt"),
                "--preset", "model1_task2", "--epochs", "1", "--lr", "1e200",
            ])
        assert result.exit_code == 3


class TestAnalyze:
    def test_keyword_fn_report(self, runner, tmp_path):
        truth = write_jsonl(
            tmp_path / "truth.jsonl",
            [
                {"id": "a", "text": "the protest was large", "label": 1},
                {"id": "b", "text": "calm streets", "label": 0},
            ],
        )
        preds = tmp_path / "preds.jsonl"
        with open(preds, "w") as fh:
            fh.write(json.dumps({"id": "a", "proba": 0.2, "label": 0}) + "\n")
            fh.write(json.dumps({"id": "b", "proba": 0.9, "label": 1}) + "\n")
        out = tmp_path / "analysis.json"
        run_ok(runner, ["analyze", str(truth), str(preds), "--out", str(out),
                        "--keyword", "protest"])
        report = json.loads(out.read_text())
        assert report["counts"] == {"keyword_fn": 1, "fn": 1, "fp": 1}
        assert report["keyword_fn"][0]["id"] == "a"


class TestConfigFile:
    def test_config_supplies_defaults_flags_override(self, runner, tiny_dataset, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"profile": "lightclean"}))
        out = tmp_path / "o.jsonl"
        run_ok(runner, ["clean", str(tiny_dataset), str(out), "--config", str(cfg)])
        assert "protesters marched city" in out.read_text()
        out2 = tmp_path / "o2.jsonl"
        run_ok(runner, ["clean", str(tiny_dataset), str(out2), "--config", str(cfg),
                        "--profile", "notclean"])
        # notclean keeps every token (stopwords, capitals, punctuation)
        assert "Protesters marched through the city ." in out2.read_text()


class TestPipelineDeterminism:
    def test_two_runs_byte_identical(self, runner, pipeline_files, tmp_path):
        outputs = []
        for run in ("r1", "r2"):
            d = tmp_path / run
            d.mkdir()
            feat, dev_feat = d / "f.npz", d / "fd.npz"
            embed_file(runner, pipeline_files, pipeline_files["train"], feat)
            embed_file(runner, pipeline_files, pipeline_files["dev"], dev_feat)
            bal = d / "b.npz"
            run_ok(runner, ["resample", str(bal.parent / 'f.npz'), str(bal),
                            "--smote-k", "3", "--seed", "5"])
            ckpt = d / "m.ckpt"
            run_ok(runner, [
                "train", str(bal), "--dev", str(dev_feat), "--out", str(ckpt),
                "--preset", "model1_task2", "--epochs", "2", "--seed", "5",
            ])
            preds = d / "p.jsonl"
            run_ok(runner, ["predict", str(ckpt), str(dev_feat), "--out", str(preds)])
            outputs.append((feat.read_bytes(), bal.read_bytes(),
                            ckpt.read_bytes(), preds.read_bytes()))
        assert outputs[0] == outputs[1]
