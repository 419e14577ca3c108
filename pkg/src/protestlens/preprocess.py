"""Tokenization and the three cleaning regimes (NotClean, LightClean, Clean).

Everything here is a pure function over immutable inputs, so per-document
application can be parallelized freely. The stopword list and the lemma
exception table are bundled data files; see ``data/``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

__all__ = [
    "TokenSequence",
    "CleanProfile",
    "NOT_CLEAN",
    "LIGHT_CLEAN",
    "CLEAN",
    "PROFILES",
    "tokenize",
    "split_sentences",
    "strip_related_titles",
    "lemmatize",
    "apply_profile",
    "load_stopwords",
    "is_special_token",
]

COARSE_TAGS = frozenset(
    {"NOUN", "PROPN", "VERB", "ADJ", "ADV", "DET", "PRON", "ADP", "NUM", "PUNCT", "OTHER"}
)

# A word token is a maximal run of letters, digits and apostrophes; every
# other non-whitespace character stands alone as a PUNCT token.
_WORD_RE = re.compile(r"(?:[^\W_]|')+", re.UNICODE)
_TOKEN_RE = re.compile(r"(?:[^\W_]|')+|\S", re.UNICODE)
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")

_SENTENCE_END = {".", "!", "?"}

_DETERMINERS = frozenset(
    "the a an this that these those some any each every either neither no all both such".split()
)
_PRONOUNS = frozenset(
    """i you he she it we they me him her us them mine yours his hers ours theirs
    myself yourself himself herself itself ourselves themselves who whom whose
    which what something anything nothing everything someone anyone everyone""".split()
)
_ADPOSITIONS = frozenset(
    """of in on at by for with from to into onto over under through during before
    after against between among about above below across behind beyond without
    within near off upon toward towards around since per""".split()
)
_AUX_VERBS = frozenset(
    """is am are was were be been being have has had having do does did doing
    will would can could shall should may might must""".split()
)
_CONJUNCTIONS = frozenset("and or but nor so yet if because while until although though when".split())
_ADVERBS = frozenset("not very too also now then here there again never always often soon".split())

_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "ical", "less", "ish")
_NOUN_SUFFIXES = ("tion", "sion", "ment", "ness", "ity", "ism", "ist", "ance", "ence")

_VOWELS = set("aeiou")
# Final doubled consonants that belong to the lemma itself (call, pass, ...).
_KEEP_DOUBLED = {"ll", "ss", "ff", "zz"}


@dataclass(frozen=True)
class TokenSequence:
    """Ordered tokens with an optional parallel list of coarse POS tags."""

    tokens: tuple[str, ...]
    pos: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.pos is not None:
            object.__setattr__(self, "pos", tuple(self.pos))
            if len(self.pos) != len(self.tokens):
                raise ValueError(
                    f"pos length {len(self.pos)} != token length {len(self.tokens)}"
                )
        for t in self.tokens:
            if any(ch.isspace() for ch in t):
                raise ValueError(f"token contains whitespace: {t!r}")

    def __len__(self):
        return len(self.tokens)


@dataclass(frozen=True)
class CleanProfile:
    """Which cleaning steps are enabled. The three named presets are below."""

    name: str
    remove_stopwords: bool = False
    remove_special: bool = False
    lowercase: bool = False
    lemmatize: bool = False
    remove_proper_nouns: bool = False


NOT_CLEAN = CleanProfile("NotClean")
LIGHT_CLEAN = CleanProfile(
    "LightClean", remove_stopwords=True, remove_special=True, lowercase=True
)
CLEAN = CleanProfile(
    "Clean",
    remove_stopwords=True,
    remove_special=True,
    lowercase=True,
    lemmatize=True,
    remove_proper_nouns=True,
)

PROFILES = {p.name.lower(): p for p in (NOT_CLEAN, LIGHT_CLEAN, CLEAN)}


def load_stopwords() -> frozenset[str]:
    """Bundled 179-entry English stopword snapshot."""
    text = resources.files("protestlens.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


def _load_lemma_exceptions() -> dict[tuple[str, str], str]:
    text = resources.files("protestlens.data").joinpath("lemma_exceptions.tsv").read_text("utf-8")
    table: dict[tuple[str, str], str] = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        inflected, pos, lemma = line.rstrip("\n").split("\t")
        table[(inflected, pos)] = lemma
    return table


_LEMMA_EXCEPTIONS = _load_lemma_exceptions()
_STOPWORDS = load_stopwords()


def is_special_token(token: str) -> bool:
    """True for punctuation/symbol tokens (no letter or digit anywhere)."""
    return not any(ch.isalnum() for ch in token)


def _tag_token(token: str, sentence_initial: bool) -> str:
    if is_special_token(token):
        return "PUNCT"
    if token.isdigit():
        return "NUM"
    lower = token.lower()
    if lower in _DETERMINERS:
        return "DET"
    if lower in _PRONOUNS:
        return "PRON"
    if lower in _ADPOSITIONS:
        return "ADP"
    if lower in _AUX_VERBS:
        return "VERB"
    if lower in _CONJUNCTIONS:
        return "OTHER"
    if lower in _ADVERBS:
        return "ADV"
    # Capitalization away from a sentence start is the proper-noun signal.
    if token[:1].isupper() and not sentence_initial:
        return "PROPN"
    if lower.endswith("ly") and len(lower) > 3:
        return "ADV"
    if (lower.endswith("ing") or lower.endswith("ed")) and len(lower) > 4:
        return "VERB"
    if lower.endswith(_ADJ_SUFFIXES):
        return "ADJ"
    if lower.endswith(_NOUN_SUFFIXES):
        return "NOUN"
    return "NOUN"


def tokenize(text: str) -> TokenSequence:
    """Deterministic split into word and punctuation tokens, with heuristic tags.

    Word tokens are maximal runs of letters/digits/apostrophes; any other
    non-whitespace character becomes its own PUNCT token. Tags come from a
    closed-class lexicon, capitalization (non-sentence-initial -> PROPN) and
    suffix rules, defaulting to NOUN; they are approximate by design.
    """
    tokens = _TOKEN_RE.findall(text)
    pos = []
    sentence_initial = True
    for tok in tokens:
        pos.append(_tag_token(tok, sentence_initial))
        sentence_initial = tok in _SENTENCE_END
    return TokenSequence(tuple(tokens), tuple(pos))


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!' or '?' followed by whitespace; drops empty pieces."""
    return [s for s in _SENTENCE_SPLIT_RE.split(text) if s.strip()]


def strip_related_titles(raw: str, markers: list[str]) -> str:
    """Cut the text at the first match of any marker pattern.

    Markers are regular expressions; the suffix starting at the earliest match
    is removed. Text without a match is returned unchanged.
    """
    compiled = []
    for pattern in markers:
        try:
            compiled.append(re.compile(pattern))
        except re.error as exc:
            raise ValueError(f"invalid related-title marker {pattern!r}: {exc}") from exc
    cut = len(raw)
    for pat in compiled:
        m = pat.search(raw)
        if m is not None:
            cut = min(cut, m.start())
    return raw[:cut]


def _ends_cvc(stem: str) -> bool:
    # consonant-vowel-consonant ending suggests a dropped silent e (mak -> make)
    if len(stem) < 3:
        return False
    a, b, c = stem[-3], stem[-2], stem[-1]
    return (
        a.isalpha() and a not in _VOWELS
        and b in _VOWELS
        and c.isalpha() and c not in _VOWELS and c not in "wxy"
    )


def _repair_stem(stem: str) -> str:
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-2:] not in _KEEP_DOUBLED:
        return stem[:-1]  # runn -> run
    if _ends_cvc(stem):
        return stem + "e"  # mak -> make
    return stem


def _strip_ing(token: str) -> str | None:
    stem = token[:-3]
    if len(stem) >= 2 and any(ch in _VOWELS for ch in stem):
        if stem.endswith("e"):
            return stem  # agreeing -> agree
        return _repair_stem(stem)
    return None


def _strip_ed(token: str) -> str | None:
    if token.endswith("ied") and len(token) > 4:
        return token[:-3] + "y"  # tried -> try
    stem = token[:-2]
    if len(stem) >= 3 and any(ch in _VOWELS for ch in stem):
        if stem.endswith("e"):
            return stem + "e"  # agreed -> agree, freed -> free
        return _repair_stem(stem)
    if token[:-1].endswith(("se", "ve", "ce", "ge", "ze")):
        return token[:-1]  # used -> use
    return None


def _strip_plural(token: str) -> str | None:
    if token.endswith("'s"):
        return token[:-2]
    if token.endswith(("sses", "xes", "ches", "shes", "zes")) and len(token) > 4:
        return token[:-2]
    if token.endswith("oes") and len(token) > 4:
        return token[:-2]  # heroes -> hero
    if token.endswith("ies") and len(token) > 4:
        return token[:-3] + "y"
    if token.endswith("s") and not token.endswith(("ss", "us", "is", "'s")) and len(token) > 3:
        return token[:-1]
    return None


def lemmatize(token: str, pos: str | None = None) -> str:
    """Reduce an inflected word to its dictionary form.

    Exception table first, then suffix rules per POS; the repairs (undoubling,
    silent-e restoration) keep the output a plausible word rather than a bare
    stem. Unknown words come back unchanged.
    """
    if not token or is_special_token(token):
        return token
    tag = pos or "NOUN"
    hit = _LEMMA_EXCEPTIONS.get((token, tag)) or _LEMMA_EXCEPTIONS.get((token, "*"))
    if hit is not None:
        return hit
    if tag == "VERB":
        if token.endswith("ing") and len(token) > 4:
            stem = _strip_ing(token)
            if stem is not None:
                return stem
            return token
        if token.endswith("ed") and len(token) > 3:
            stem = _strip_ed(token)
            if stem is not None:
                return stem
            return token
        if token.endswith("ies") and len(token) > 4:
            return token[:-3] + "y"  # tries -> try
        if token.endswith(("oes", "ches", "shes", "sses", "xes", "zes")) and len(token) > 3:
            return token[:-2]  # goes -> go, watches -> watch
        if token.endswith("s") and not token.endswith("ss") and len(token) > 3:
            return token[:-1]  # runs -> run
        return token
    if tag in ("NOUN", "PROPN"):
        stem = _strip_plural(token)
        return stem if stem is not None else token
    if tag == "ADJ":
        for suffix in ("est", "er"):
            if token.endswith(suffix) and len(token) > len(suffix) + 2:
                stem = token[: -len(suffix)]
                if stem[-2:] in _KEEP_DOUBLED:
                    return stem  # smaller -> small
                if len(stem) >= 2 and stem[-1] == stem[-2]:
                    return stem[:-1]  # bigger -> big
                if stem.endswith("i"):
                    return stem[:-1] + "y"  # happier -> happy
                if _ends_cvc(stem):
                    return stem + "e"  # nicer -> nice
                return token  # ambiguous: keep the surface form
        return token
    return token


def apply_profile(
    seq: TokenSequence,
    profile: CleanProfile,
    stopwords: frozenset[str] | set[str] | None = None,
) -> TokenSequence:
    """Run the enabled cleaning steps in fixed order.

    Order: strip special -> lowercase -> remove stopwords -> remove proper
    nouns (tags taken from the pre-lowercased sequence) -> lemmatize. When
    both stopword removal and lemmatization are on, lemmas that land in the
    stopword list are dropped as well, which makes the operation idempotent.
    NotClean returns the sequence unchanged.
    """
    if profile.remove_proper_nouns and seq.pos is None:
        raise ValueError("proper-noun removal requires POS tags on the sequence")
    if not (
        profile.remove_stopwords
        or profile.remove_special
        or profile.lowercase
        or profile.lemmatize
        or profile.remove_proper_nouns
    ):
        return seq

    if stopwords is None:
        stopwords = _STOPWORDS

    tokens = list(seq.tokens)
    pos = list(seq.pos) if seq.pos is not None else None

    def keep(mask):
        nonlocal tokens, pos
        tokens = [t for t, m in zip(tokens, mask) if m]
        if pos is not None:
            pos = [p for p, m in zip(pos, mask) if m]

    if profile.remove_special:
        keep([not is_special_token(t) for t in tokens])
    if profile.lowercase:
        tokens = [t.lower() for t in tokens]
    if profile.remove_stopwords:
        keep([t.lower() not in stopwords for t in tokens])
    if profile.remove_proper_nouns:
        keep([p != "PROPN" for p in pos])
    if profile.lemmatize:
        tags = pos if pos is not None else [None] * len(tokens)
        tokens = [lemmatize(t, p) for t, p in zip(tokens, tags)]
        if profile.remove_stopwords:
            keep([t.lower() not in stopwords for t in tokens])
    return TokenSequence(tuple(tokens), tuple(pos) if pos is not None else None)
