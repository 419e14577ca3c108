"""Dataset loading and corpus-level measurements.

Datasets are UTF-8 files with one JSON object per line; field names are
configurable through a schema. All statistics run over immutable in-memory
datasets and are order-independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .preprocess import TokenSequence, is_special_token, load_stopwords, split_sentences, tokenize

__all__ = [
    "LabeledExample",
    "DatasetSchema",
    "CorpusStats",
    "DatasetFormatError",
    "load_dataset",
    "save_dataset",
    "protest_ratio",
    "corpus_stats",
    "lexical_density",
    "sentence_token_stats",
]

LEXICAL_TAGS = frozenset({"NOUN", "VERB", "ADJ", "ADV"})

DEFAULT_LABEL_MAP = {
    "0": 0,
    "1": 1,
    0: 0,
    1: 1,
    "protest": 1,
    "non-protest": 0,
}


class DatasetFormatError(ValueError):
    """A dataset file violates the one-JSON-object-per-line contract."""


@dataclass(frozen=True)
class LabeledExample:
    """One article or sentence; label is 1=protest, 0=non-protest, None=unlabeled."""

    id: str
    text: str
    label: int | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("example id must be non-empty")
        if self.label not in (0, 1, None):
            raise ValueError(f"label must be 0, 1 or None, got {self.label!r}")


@dataclass(frozen=True)
class DatasetSchema:
    """Field names inside each JSON record, plus the raw-label mapping.

    ``id_field=None`` synthesizes ids from line numbers, for files that carry
    none.
    """

    id_field: str | None = "id"
    text_field: str = "text"
    label_field: str = "label"
    label_map: dict = field(default_factory=lambda: dict(DEFAULT_LABEL_MAP))


@dataclass(frozen=True)
class CorpusStats:
    n_docs: int
    avg_len: float
    std_len: float
    short_ratio: float
    mean_sentence_len: float
    lexical_density: float
    avg_stopwords: float
    avg_special_chars: float
    protest_ratio: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def load_dataset(path, schema: DatasetSchema | None = None) -> list[LabeledExample]:
    """Parse a JSON-lines dataset file into LabeledExamples, order preserved.

    Raises DatasetFormatError naming the 1-based line number on malformed
    records, missing fields, unknown label values or duplicate ids. A record
    without the label field loads with label=None (test splits).
    """
    if schema is None:
        schema = DatasetSchema()
    examples: list[LabeledExample] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"line {lineno}: malformed record: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise DatasetFormatError(f"line {lineno}: record is not a JSON object")
            if schema.id_field is None:
                ex_id = f"line-{lineno}"
            else:
                if schema.id_field not in record:
                    raise DatasetFormatError(f"line {lineno}: missing field {schema.id_field!r}")
                ex_id = str(record[schema.id_field])
            if schema.text_field not in record:
                raise DatasetFormatError(f"line {lineno}: missing field {schema.text_field!r}")
            text = record[schema.text_field]
            if not isinstance(text, str):
                raise DatasetFormatError(f"line {lineno}: field {schema.text_field!r} is not a string")
            label = None
            if schema.label_field in record and record[schema.label_field] is not None:
                raw = record[schema.label_field]
                key = raw.lower() if isinstance(raw, str) else raw
                if key not in schema.label_map:
                    raise DatasetFormatError(f"line {lineno}: unknown label value {raw!r}")
                label = schema.label_map[key]
            if ex_id in seen_ids:
                raise DatasetFormatError(f"line {lineno}: duplicate id {ex_id!r}")
            seen_ids.add(ex_id)
            examples.append(LabeledExample(ex_id, text, label))
    return examples


def save_dataset(examples: list[LabeledExample], path) -> None:
    """Write a dataset back as JSON lines with the default field names."""
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            record = {"id": ex.id, "text": ex.text}
            if ex.label is not None:
                record["label"] = ex.label
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def protest_ratio(dataset: list[LabeledExample]) -> float:
    """Fraction of examples labeled protest: (#label=1) / N."""
    if not dataset:
        raise ValueError("protest_ratio over an empty dataset")
    missing = [ex.id for ex in dataset if ex.label is None]
    if missing:
        raise ValueError(f"protest_ratio requires labels; missing on {missing[0]!r}")
    return sum(ex.label for ex in dataset) / len(dataset)


def lexical_density(tagged: TokenSequence) -> float:
    """Share of lexical words (nouns, verbs, adjectives, adverbs) among tokens."""
    if len(tagged) == 0:
        raise ValueError("lexical_density over an empty sequence")
    if tagged.pos is None:
        raise ValueError("lexical_density requires POS tags")
    lexical = sum(1 for p in tagged.pos if p in LEXICAL_TAGS)
    return lexical / len(tagged)


def sentence_token_stats(
    dataset: list[LabeledExample],
    stopword_list: frozenset[str] | set[str] | None = None,
    special_char_rule=is_special_token,
) -> tuple[float, float]:
    """Average stopword count and special-character count per example."""
    if not dataset:
        raise ValueError("sentence_token_stats over an empty dataset")
    if stopword_list is None:
        stopword_list = load_stopwords()
    stop_total = 0
    special_total = 0
    for ex in dataset:
        for tok in tokenize(ex.text).tokens:
            if tok.lower() in stopword_list:
                stop_total += 1
            if special_char_rule(tok):
                special_total += 1
    n = len(dataset)
    return stop_total / n, special_total / n


def corpus_stats(dataset: list[LabeledExample], short_threshold: int = 100) -> CorpusStats:
    """Token-length, sentence-length, density and noise measurements.

    std_len is the sample standard deviation (divisor N-1; defined as 0 for a
    single document). short_ratio counts documents with fewer tokens than
    ``short_threshold``. Lexical density pools all documents. protest_ratio is
    None when any example is unlabeled.
    """
    if not dataset:
        raise ValueError("corpus_stats over an empty dataset")
    if short_threshold <= 0:
        raise ValueError("short_threshold must be positive")

    counts = []
    lexical = 0
    total_tokens = 0
    sentence_lengths = []
    for ex in dataset:
        seq = tokenize(ex.text)
        counts.append(len(seq))
        total_tokens += len(seq)
        lexical += sum(1 for p in seq.pos if p in LEXICAL_TAGS)
        for sentence in split_sentences(ex.text):
            sentence_lengths.append(len(tokenize(sentence)))

    n = len(counts)
    avg = sum(counts) / n
    if n > 1:
        std = math.sqrt(sum((c - avg) ** 2 for c in counts) / (n - 1))
    else:
        std = 0.0
    short_ratio = sum(1 for c in counts if c < short_threshold) / n
    mean_sentence = (
        sum(sentence_lengths) / len(sentence_lengths) if sentence_lengths else 0.0
    )
    density = lexical / total_tokens if total_tokens else 0.0
    avg_stop, avg_special = sentence_token_stats(dataset)
    ratio = None
    if all(ex.label is not None for ex in dataset):
        ratio = protest_ratio(dataset)
    return CorpusStats(
        n_docs=n,
        avg_len=avg,
        std_len=std,
        short_ratio=short_ratio,
        mean_sentence_len=mean_sentence,
        lexical_density=density,
        avg_stopwords=avg_stop,
        avg_special_chars=avg_special,
        protest_ratio=ratio,
    )


def format_stats_table(stats: CorpusStats) -> str:
    """Aligned plain-text rendering of a CorpusStats report."""
    rows = [
        ("documents", f"{stats.n_docs}"),
        ("avg length (tokens)", f"{stats.avg_len:.1f}"),
        ("std length (N-1)", f"{stats.std_len:.1f}"),
        ("short-text ratio", f"{stats.short_ratio:.2f}"),
        ("mean sentence length", f"{stats.mean_sentence_len:.1f}"),
        ("lexical density", f"{stats.lexical_density:.4f}"),
        ("avg stopwords", f"{stats.avg_stopwords:.2f}"),
        ("avg special chars", f"{stats.avg_special_chars:.2f}"),
    ]
    if stats.protest_ratio is not None:
        rows.append(("protest ratio", f"{stats.protest_ratio:.2f}"))
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)
