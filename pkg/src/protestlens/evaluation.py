"""Confusion matrix, macro-averaged metrics and the misclassification report.

Positive class is 1 (protest). Macro averages are unweighted means of the two
per-class values, so minority-class failure hurts regardless of class size.
Zero denominators yield 0 (constant predictors stay scoreable).
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import LabeledExample

__all__ = [
    "ConfusionMatrix",
    "MetricsReport",
    "confusion_matrix",
    "metrics_report",
    "error_analysis",
    "format_metrics_table",
    "format_confusion_grid",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def n(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def normalized(self) -> list[list[float]]:
        """Rows = actual (non-protest, protest), each row summing to 1."""
        rows = []
        for row in ((self.tn, self.fp), (self.fn, self.tp)):
            total = sum(row)
            rows.append([v / total if total else 0.0 for v in row])
        return rows


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class: dict  # {0: {"precision","recall","f1"}, 1: {...}}
    macro_precision: float
    macro_recall: float
    macro_f1: float
    normalized_confusion: list

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class": {str(k): dict(v) for k, v in self.per_class.items()},
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "normalized_confusion": self.normalized_confusion,
        }


def confusion_matrix(truth, pred) -> ConfusionMatrix:
    """Count TP/TN/FP/FN with 1 as the positive class."""
    truth = list(truth)
    pred = list(pred)
    if len(truth) != len(pred):
        raise ValueError(f"length mismatch: {len(truth)} truths vs {len(pred)} predictions")
    if not truth:
        raise ValueError("empty label vectors")
    tp = tn = fp = fn = 0
    for t, p in zip(truth, pred):
        if t not in (0, 1) or p not in (0, 1):
            raise ValueError(f"labels must be binary, got truth={t!r} pred={p!r}")
        if t == 1 and p == 1:
            tp += 1
        elif t == 0 and p == 0:
            tn += 1
        elif t == 0 and p == 1:
            fp += 1
        else:
            fn += 1
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def _prf(tp: int, fp: int, fn: int) -> dict:
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def metrics_report(cm: ConfusionMatrix) -> MetricsReport:
    """Accuracy, per-class P/R/F1 and their unweighted macro averages."""
    if cm.n < 1:
        raise ValueError("confusion matrix is empty")
    pos = _prf(cm.tp, cm.fp, cm.fn)
    # class 0 treats non-protest as the positive outcome
    neg = _prf(cm.tn, cm.fn, cm.fp)
    return MetricsReport(
        accuracy=(cm.tp + cm.tn) / cm.n,
        per_class={0: neg, 1: pos},
        macro_precision=(pos["precision"] + neg["precision"]) / 2.0,
        macro_recall=(pos["recall"] + neg["recall"]) / 2.0,
        macro_f1=(pos["f1"] + neg["f1"]) / 2.0,
        normalized_confusion=cm.normalized(),
    )


def error_analysis(examples: list[LabeledExample], preds, keywords: list[str]) -> dict:
    """The misclassification report: keyword-bearing FNs, all FPs, counts.

    An FN whose text contains any keyword (case-insensitive) is flagged
    "keyword-FN" -- the suspicious case of an obvious cue the model missed.
    Sections are ordered by example id, so the report is deterministic.
    """
    preds = list(preds)
    if len(examples) != len(preds):
        raise ValueError(f"length mismatch: {len(examples)} examples vs {len(preds)} predictions")
    lowered = [kw.lower() for kw in keywords]
    keyword_fn = []
    plain_fn = []
    false_pos = []
    for ex, p in zip(examples, preds):
        if ex.label is None:
            raise ValueError(f"example {ex.id!r} has no label")
        if ex.label == 1 and p == 0:
            found = [kw for kw in lowered if kw in ex.text.lower()]
            if found:
                keyword_fn.append({"id": ex.id, "keywords": found, "text": ex.text})
            else:
                plain_fn.append({"id": ex.id, "text": ex.text})
        elif ex.label == 0 and p == 1:
            false_pos.append({"id": ex.id, "text": ex.text})
    for section in (keyword_fn, plain_fn, false_pos):
        section.sort(key=lambda item: item["id"])
    return {
        "counts": {
            "keyword_fn": len(keyword_fn),
            "fn": len(keyword_fn) + len(plain_fn),
            "fp": len(false_pos),
        },
        "keyword_fn": keyword_fn,
        "fn_other": plain_fn,
        "fp": false_pos,
    }


def format_metrics_table(report: MetricsReport) -> str:
    """Aligned P/R/F1 table per class plus the macro row."""
    lines = [f"{'class':<12} {'P':>8} {'R':>8} {'F1':>8}"]
    for cls, name in ((1, "protest"), (0, "non-protest")):
        vals = report.per_class[cls]
        lines.append(
            f"{name:<12} {vals['precision']:>8.4f} {vals['recall']:>8.4f} {vals['f1']:>8.4f}"
        )
    lines.append(
        f"{'macro':<12} {report.macro_precision:>8.4f} {report.macro_recall:>8.4f} "
        f"{report.macro_f1:>8.4f}"
    )
    lines.append(f"accuracy     {report.accuracy:.4f}")
    return "\n".join(lines)


def format_confusion_grid(cm: ConfusionMatrix) -> str:
    """Text grid in the actual-by-predicted layout."""
    rows = [
        ("actual non-protest", cm.tn, cm.fp),
        ("actual protest", cm.fn, cm.tp),
    ]
    header = f"{'':<20} {'pred non-protest':>17} {'pred protest':>13}"
    lines = [header]
    for name, a, b in rows:
        lines.append(f"{name:<20} {a:>17} {b:>13}")
    return "\n".join(lines)
