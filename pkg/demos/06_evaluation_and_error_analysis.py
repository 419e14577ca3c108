# Macro-averaged evaluation and the misclassification report.
#
# Macro averages weigh both classes equally, so a constant majority-class
# predictor scores 80% accuracy on an 80/20 set but only 0.5 macro recall
# and zero minority F1. The error report surfaces false negatives whose text
# still contains obvious protest keywords, plus all false positives.

from protestlens import (
    LabeledExample,
    confusion_matrix,
    error_analysis,
    metrics_report,
)
from protestlens.evaluation import format_confusion_grid, format_metrics_table

truth = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0]
pred = [1, 1, 1, 0, 0, 0, 0, 0, 0, 1]

cm = confusion_matrix(truth, pred)
print(format_confusion_grid(cm))
print()
print(format_metrics_table(metrics_report(cm)))
print()

# the 80% accuracy trap: predict the majority class everywhere
skewed_truth = [0] * 8 + [1] * 2
lazy = metrics_report(confusion_matrix(skewed_truth, [0] * 10))
print(f"constant predictor: accuracy {lazy.accuracy:.2f}, "
      f"macro recall {lazy.macro_recall:.2f}, minority F1 {lazy.per_class[1]['f1']:.2f}")
print()

examples = [
    LabeledExample("a1", "the protest filled the square", 1),
    LabeledExample("a2", "farmers demanded fair prices", 1),
    LabeledExample("a3", "a burglary was reported downtown", 0),
    LabeledExample("a4", "the museum reopened today", 0),
]
report = error_analysis(examples, [0, 0, 1, 0], ["protest", "protesting"])
print("error analysis counts:", report["counts"])
for item in report["keyword_fn"]:
    print(f"keyword-FN {item['id']}: {item['keywords']} in {item['text']!r}")
for item in report["fp"]:
    print(f"FP        {item['id']}: {item['text']!r}")
