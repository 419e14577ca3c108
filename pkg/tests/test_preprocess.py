import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from protestlens.preprocess import (
    CLEAN,
    LIGHT_CLEAN,
    NOT_CLEAN,
    CleanProfile,
    TokenSequence,
    apply_profile,
    lemmatize,
    load_stopwords,
    split_sentences,
    strip_related_titles,
    tokenize,
)

STOPWORDS = load_stopwords()


class TestTokenize:
    def test_empty_text(self):
        assert tokenize("").tokens == ()

    def test_word_and_punct_split(self):
        # hand application of the split rule
        seq = tokenize("Protests erupted, today!")
        assert seq.tokens == ("Protests", "erupted", ",", "today", "!")

    def test_number_and_noun_tags(self):
        seq = tokenize("5 protesters")
        assert seq.pos == ("NUM", "NOUN")

    def test_proper_noun_requires_non_initial_capital(self):
        seq = tokenize("Police arrested Kumar")
        assert seq.pos[0] != "PROPN"  # sentence-initial capital is not evidence
        assert seq.pos[2] == "PROPN"

    def test_deterministic(self):
        text = "Crowds gathered; 12 officers, watching."
        assert tokenize(text) == tokenize(text)

    def test_apostrophe_stays_inside_word(self):
        assert "don't" in tokenize("They don't care").tokens


class TestSplitSentences:
    def test_splits_on_terminators(self):
        parts = split_sentences("One two. Three four! Five?")
        assert parts == ["One two.", "Three four!", "Five?"]

    def test_no_terminator(self):
        assert split_sentences("no end here") == ["no end here"]


class TestStripRelatedTitles:
    def test_no_marker_is_identity(self):
        text = "Body of the article with no trailing junk."
        assert strip_related_titles(text, ["Related Articles"]) == text

    def test_truncates_at_marker(self):
        text = "article body. Related Articles: X; Y"
        assert strip_related_titles(text, ["Related Articles"]) == "article body. "

    def test_marker_at_position_zero(self):
        assert strip_related_titles("Related Articles: X", ["Related Articles"]) == ""

    def test_earliest_of_several_markers_wins(self):
        text = "body MORE STORIES tail Related Articles tail2"
        out = strip_related_titles(text, ["Related Articles", "MORE STORIES"])
        assert out == "body "

    def test_invalid_pattern_is_config_error(self):
        with pytest.raises(ValueError, match="invalid related-title marker"):
            strip_related_titles("x", ["[unclosed"])


class TestLemmatize:
    def test_library_family(self):
        assert lemmatize("libraries", "NOUN") == "library"

    def test_already_a_lemma(self):
        assert lemmatize("cat", "NOUN") == "cat"

    def test_running_verb(self):
        # checked against a published lemma dictionary entry
        assert lemmatize("running", "VERB") == "run"

    @pytest.mark.parametrize(
        "token,pos,lemma",
        [
            ("protesters", "NOUN", "protester"),
            ("cities", "NOUN", "city"),
            ("churches", "NOUN", "church"),
            ("heroes", "NOUN", "hero"),
            ("glasses", "NOUN", "glass"),
            ("glass", "NOUN", "glass"),
            ("bus", "NOUN", "bus"),
            ("women", "NOUN", "woman"),
            ("arrested", "VERB", "arrest"),
            ("stopped", "VERB", "stop"),
            ("hoped", "VERB", "hope"),
            ("used", "VERB", "use"),
            ("agreed", "VERB", "agree"),
            ("making", "VERB", "make"),
            ("going", "VERB", "go"),
            ("tries", "VERB", "try"),
            ("goes", "VERB", "go"),
            ("went", "VERB", "go"),
            ("bigger", "ADJ", "big"),
            ("nicer", "ADJ", "nice"),
            ("happier", "ADJ", "happy"),
            ("smaller", "ADJ", "small"),
            ("better", "ADJ", "good"),
        ],
    )
    def test_suffix_and_exception_rules(self, token, pos, lemma):
        assert lemmatize(token, pos) == lemma

    def test_unknown_word_unchanged(self):
        assert lemmatize("zzqx", "NOUN") == "zzqx"

    def test_idempotent_on_common_forms(self):
        for token, pos in [
            ("protesters", "NOUN"), ("running", "VERB"), ("libraries", "NOUN"),
            ("arrested", "VERB"), ("marches", "NOUN"), ("needed", "VERB"),
        ]:
            once = lemmatize(token, pos)
            assert lemmatize(once, pos) == once


class TestApplyProfile:
    def test_notclean_is_identity(self):
        seq = tokenize("The police arrested 5 protesters !")
        assert apply_profile(seq, NOT_CLEAN) == seq

    def test_lightclean_hand_fixture(self):
        seq = tokenize("The police arrested 5 protesters !")
        out = apply_profile(seq, LIGHT_CLEAN, STOPWORDS)
        assert out.tokens == ("police", "arrested", "5", "protesters")

    def test_clean_hand_fixture(self):
        seq = tokenize("The police arrested 5 protesters in Delhi !")
        out = apply_profile(seq, CLEAN, STOPWORDS)
        assert out.tokens == ("police", "arrest", "5", "protester")
        assert "delhi" not in out.tokens  # Delhi tagged PROPN and removed

    def test_proper_noun_removal_without_pos_errors(self):
        seq = TokenSequence(("Some", "Words"))
        with pytest.raises(ValueError, match="POS"):
            apply_profile(seq, CLEAN, STOPWORDS)

    def test_output_never_longer_than_input(self):
        seq = tokenize("Thousands of protesters marched, shouting slogans!")
        for profile in (NOT_CLEAN, LIGHT_CLEAN, CLEAN):
            assert len(apply_profile(seq, profile, STOPWORDS)) <= len(seq)

    def test_lemma_landing_on_stopword_is_dropped(self):
        # "cans" lemmatizes to the stopword "can"; one pass must already drop
        # it or a second pass would differ from the first.
        seq = tokenize("He cans tomatoes")
        out = apply_profile(seq, CLEAN, STOPWORDS)
        assert "can" not in out.tokens
        assert apply_profile(out, CLEAN, STOPWORDS) == out


@st.composite
def token_sequences(draw):
    words = st.text(alphabet=string.ascii_letters + "'", min_size=1, max_size=10)
    puncts = st.sampled_from(list(".,!?;:()\"'-"))
    stops = st.sampled_from(sorted(STOPWORDS))
    text = draw(st.lists(st.one_of(words, puncts, stops), min_size=0, max_size=30))
    return tokenize(" ".join(t for t in text if t.strip()))


class TestProfileProperties:
    @settings(max_examples=200, deadline=None)
    @given(token_sequences(), st.sampled_from([NOT_CLEAN, LIGHT_CLEAN, CLEAN]))
    def test_idempotence(self, seq, profile):
        once = apply_profile(seq, profile, STOPWORDS)
        twice = apply_profile(once, profile, STOPWORDS)
        assert twice == once

    @settings(max_examples=200, deadline=None)
    @given(token_sequences(), st.sampled_from([NOT_CLEAN, LIGHT_CLEAN, CLEAN]))
    def test_never_grows(self, seq, profile):
        assert len(apply_profile(seq, profile, STOPWORDS)) <= len(seq)

    @settings(max_examples=100, deadline=None)
    @given(token_sequences())
    def test_notclean_identity(self, seq):
        assert apply_profile(seq, NOT_CLEAN, STOPWORDS) == seq


class TestProfileDefinitions:
    def test_preset_flag_sets(self):
        assert not any(
            [NOT_CLEAN.remove_stopwords, NOT_CLEAN.remove_special, NOT_CLEAN.lowercase,
             NOT_CLEAN.lemmatize, NOT_CLEAN.remove_proper_nouns]
        )
        assert (LIGHT_CLEAN.remove_stopwords, LIGHT_CLEAN.remove_special,
                LIGHT_CLEAN.lowercase) == (True, True, True)
        assert not LIGHT_CLEAN.lemmatize and not LIGHT_CLEAN.remove_proper_nouns
        assert CLEAN.lemmatize and CLEAN.remove_proper_nouns
        assert CLEAN.remove_stopwords and CLEAN.remove_special and CLEAN.lowercase

    def test_stopword_snapshot_size(self):
        assert len(STOPWORDS) == 179
