import numpy as np
import pytest

from protestlens.corpus import LabeledExample
from protestlens.evaluation import (
    ConfusionMatrix,
    confusion_matrix,
    error_analysis,
    format_confusion_grid,
    format_metrics_table,
    metrics_report,
)


def brute_force_metrics(truth, pred):
    """Independent recount: per-class P/R/F1 straight from the label lists."""
    n = len(truth)
    out = {"accuracy": sum(1 for t, p in zip(truth, pred) if t == p) / n, "per_class": {}}
    for cls in (0, 1):
        tp = sum(1 for t, p in zip(truth, pred) if t == cls and p == cls)
        pred_cls = sum(1 for p in pred if p == cls)
        true_cls = sum(1 for t in truth if t == cls)
        precision = tp / pred_cls if pred_cls else 0.0
        recall = tp / true_cls if true_cls else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out["per_class"][cls] = {"precision": precision, "recall": recall, "f1": f1}
    out["macro_precision"] = sum(out["per_class"][c]["precision"] for c in (0, 1)) / 2
    out["macro_recall"] = sum(out["per_class"][c]["recall"] for c in (0, 1)) / 2
    out["macro_f1"] = sum(out["per_class"][c]["f1"] for c in (0, 1)) / 2
    return out


class TestConfusionMatrix:
    def test_all_correct(self):
        cm = confusion_matrix([1, 0, 1, 0], [1, 0, 1, 0])
        assert cm.fp == 0 and cm.fn == 0
        assert cm.tp == 2 and cm.tn == 2

    def test_hand_tally(self):
        cm = confusion_matrix([1, 1, 1, 0, 0], [1, 0, 0, 0, 1])
        assert (cm.tp, cm.fn, cm.tn, cm.fp) == (1, 2, 1, 1)

    def test_constant_predictor_on_80_20(self):
        truth = [0] * 8 + [1] * 2
        cm = confusion_matrix(truth, [0] * 10)
        assert (cm.tn, cm.fn, cm.tp, cm.fp) == (8, 2, 0, 0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            confusion_matrix([1, 0], [1])

    def test_nonbinary_label(self):
        with pytest.raises(ValueError, match="binary"):
            confusion_matrix([1, 2], [1, 0])

    def test_counts_sum_to_n(self):
        rng = np.random.default_rng(0)
        truth = list(rng.integers(0, 2, size=50))
        pred = list(rng.integers(0, 2, size=50))
        cm = confusion_matrix(truth, pred)
        assert cm.n == 50


class TestMetricsReport:
    def test_perfect_predictions(self):
        report = metrics_report(confusion_matrix([1, 0, 1], [1, 0, 1]))
        assert report.accuracy == 1.0
        assert report.macro_precision == report.macro_recall == report.macro_f1 == 1.0

    def test_hand_case(self):
        # TP=3, FP=1, FN=2, TN=4, frozen by hand evaluation of the four formulas
        report = metrics_report(ConfusionMatrix(tp=3, fp=1, fn=2, tn=4))
        assert report.accuracy == pytest.approx(0.7)
        assert report.per_class[1]["precision"] == pytest.approx(0.75)
        assert report.per_class[1]["recall"] == pytest.approx(0.6)
        assert report.per_class[1]["f1"] == pytest.approx(0.6667, abs=1e-4)
        assert report.per_class[0]["precision"] == pytest.approx(0.6667, abs=1e-4)
        assert report.per_class[0]["recall"] == pytest.approx(0.8)
        assert report.per_class[0]["f1"] == pytest.approx(0.7273, abs=1e-4)
        assert report.macro_f1 == pytest.approx(0.697, abs=1e-3)

    def test_constant_majority_predictor(self):
        # mirrors the easy-80%-accuracy trap: macro metrics expose it
        truth = [0] * 8 + [1] * 2
        report = metrics_report(confusion_matrix(truth, [0] * 10))
        assert report.accuracy == pytest.approx(0.8)
        assert report.macro_recall == pytest.approx(0.5)
        assert report.per_class[1]["f1"] == 0.0

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            n = int(rng.integers(1, 200))
            truth = list(rng.integers(0, 2, size=n))
            pred = list(rng.integers(0, 2, size=n))
            report = metrics_report(confusion_matrix(truth, pred))
            oracle = brute_force_metrics(truth, pred)
            assert abs(report.accuracy - oracle["accuracy"]) < 1e-12
            assert abs(report.macro_f1 - oracle["macro_f1"]) < 1e-12
            assert abs(report.macro_precision - oracle["macro_precision"]) < 1e-12
            assert abs(report.macro_recall - oracle["macro_recall"]) < 1e-12
            for cls in (0, 1):
                for key in ("precision", "recall", "f1"):
                    assert abs(report.per_class[cls][key] - oracle["per_class"][cls][key]) < 1e-12

    def test_f1_between_precision_and_recall(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            n = int(rng.integers(2, 60))
            truth = list(rng.integers(0, 2, size=n))
            pred = list(rng.integers(0, 2, size=n))
            report = metrics_report(confusion_matrix(truth, pred))
            for cls in (0, 1):
                p, r, f1 = (report.per_class[cls][k] for k in ("precision", "recall", "f1"))
                if p > 0 and r > 0:
                    assert min(p, r) - 1e-12 <= f1 <= max(p, r) + 1e-12

    def test_macro_invariant_under_label_swap(self):
        rng = np.random.default_rng(9)
        truth = list(rng.integers(0, 2, size=40))
        pred = list(rng.integers(0, 2, size=40))
        direct = metrics_report(confusion_matrix(truth, pred))
        swapped = metrics_report(confusion_matrix([1 - t for t in truth], [1 - p for p in pred]))
        assert direct.macro_f1 == pytest.approx(swapped.macro_f1, abs=1e-12)
        assert direct.macro_precision == pytest.approx(swapped.macro_precision, abs=1e-12)
        assert direct.accuracy == pytest.approx(swapped.accuracy, abs=1e-12)

    def test_normalized_rows_sum_to_one(self):
        cm = ConfusionMatrix(tp=3, fp=1, fn=2, tn=4)
        for row in cm.normalized():
            assert sum(row) == pytest.approx(1.0)

    def test_formatting_does_not_crash(self):
        cm = ConfusionMatrix(tp=3, fp=1, fn=2, tn=4)
        report = metrics_report(cm)
        assert "macro" in format_metrics_table(report)
        assert "pred protest" in format_confusion_grid(cm)


def _examples(texts_labels):
    return [LabeledExample(f"e{i:02d}", t, l) for i, (t, l) in enumerate(texts_labels)]


class TestErrorAnalysis:
    def test_perfect_predictor_gives_empty_report(self):
        examples = _examples([("protest news", 1), ("cooking tips", 0)])
        report = error_analysis(examples, [1, 0], ["protest"])
        assert report["counts"] == {"keyword_fn": 0, "fn": 0, "fp": 0}
        assert report["keyword_fn"] == [] and report["fp"] == []

    def test_keyword_false_negative_flagged(self):
        examples = _examples([("a big protest happened", 1), ("quiet day", 0)])
        report = error_analysis(examples, [0, 0], ["protest"])
        assert report["counts"]["keyword_fn"] == 1
        assert report["keyword_fn"][0]["id"] == "e00"
        assert "protest" in report["keyword_fn"][0]["keywords"]

    def test_plain_fp_routed_to_fp_section_only(self):
        examples = _examples([("nothing here", 0)])
        report = error_analysis(examples, [1], ["protest"])
        assert report["counts"]["fp"] == 1
        assert report["fp"][0]["id"] == "e00"
        assert report["counts"]["fn"] == 0

    def test_sections_ordered_by_id(self):
        examples = _examples(
            [("protest one", 1), ("protest two", 1), ("calm", 0), ("calm two", 0)]
        )
        report = error_analysis(examples, [0, 0, 1, 1], ["protest"])
        ids = [item["id"] for item in report["keyword_fn"]]
        assert ids == sorted(ids)
        fp_ids = [item["id"] for item in report["fp"]]
        assert fp_ids == sorted(fp_ids)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            error_analysis(_examples([("x", 1)]), [1, 0], ["protest"])

    def test_fn_without_keyword_counted_separately(self):
        examples = _examples([("crowds gathered angrily", 1)])
        report = error_analysis(examples, [0], ["protest"])
        assert report["counts"]["fn"] == 1
        assert report["counts"]["keyword_fn"] == 0
        assert report["fn_other"][0]["id"] == "e00"
