"""Transformer embedding backend.

EMBEDSVC_MODEL selects a HuggingFace model name or local path. Without one
(or when the hub is unreachable) the service falls back to a bundled
DistilBERT-architecture model with a deterministic seeded initialization and
a WordPiece vocabulary built in-process, so the service runs fully offline
and replays identically across restarts. Contextual behavior is preserved:
the same word gets different vectors in different surroundings.
"""

from __future__ import annotations

import os
import threading

import numpy as np
import torch

from .pooling import pool_to_length

BUILTIN_MODEL_ID = "builtin-tiny-distilbert-d64"
BUILTIN_SEED = 1309
MAX_SUBWORD_POSITIONS = 512

_COMMON_WORDS = """
the of and to in a is that for it on with as was at by be this have from or
an are not they who but had his her she he their its were which you all one
more when there can out up other people time no just into than them some
could state only new year over after also two most us city police crowd
protest protests protester protesters march marched marches rally rallies
strike strikes riot riots demonstration demonstrations government political
party minister news article sentence india china street streets violence
arrested arrest killed injured workers students union rights law court
against during between report reports country national local security
""".split()


def _builtin_vocab() -> list[str]:
    specials = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    chars = list("abcdefghijklmnopqrstuvwxyz0123456789'-.,!?;:()\"$%&@#/")
    vocab = specials + chars + ["##" + c for c in chars]
    seen = set(vocab)
    for word in _COMMON_WORDS:
        if word not in seen:
            vocab.append(word)
            seen.add(word)
    return vocab


class EmbeddingModel:
    """Tokenize word lists, run the transformer, return per-word vectors."""

    def __init__(self, name: str | None = None):
        self.name = name or os.environ.get("EMBEDSVC_MODEL") or BUILTIN_MODEL_ID
        self._lock = threading.Lock()
        torch.set_num_threads(1)  # fixed reduction order: replayable outputs
        if self.name == BUILTIN_MODEL_ID:
            self.tokenizer, self.net = self._build_builtin()
        else:
            self.tokenizer, self.net = self._load_pretrained(self.name)
        self.net.eval()
        self.dim = int(self.net.config.hidden_size
                       if hasattr(self.net.config, "hidden_size")
                       else self.net.config.dim)
        self.max_positions = int(getattr(self.net.config, "max_position_embeddings",
                                         MAX_SUBWORD_POSITIONS))

    @staticmethod
    def _build_builtin():
        from tokenizers import Tokenizer, normalizers, pre_tokenizers
        from tokenizers.models import WordPiece
        from tokenizers.processors import TemplateProcessing
        from transformers import DistilBertConfig, DistilBertModel, PreTrainedTokenizerFast

        vocab = _builtin_vocab()
        vocab_dict = {tok: i for i, tok in enumerate(vocab)}
        core = Tokenizer(WordPiece(vocab_dict, unk_token="[UNK]", max_input_chars_per_word=100))
        core.normalizer = normalizers.Sequence([normalizers.Lowercase()])
        core.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
        core.post_processor = TemplateProcessing(
            single="[CLS] $A [SEP]",
            pair="[CLS] $A [SEP] $B [SEP]",
            special_tokens=[("[CLS]", vocab_dict["[CLS]"]), ("[SEP]", vocab_dict["[SEP]"])],
        )
        tokenizer = PreTrainedTokenizerFast(
            tokenizer_object=core, unk_token="[UNK]", pad_token="[PAD]",
            cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]",
        )
        torch.manual_seed(BUILTIN_SEED)
        config = DistilBertConfig(
            vocab_size=len(vocab), dim=64, n_layers=2, n_heads=2, hidden_dim=128,
            max_position_embeddings=MAX_SUBWORD_POSITIONS,
        )
        return tokenizer, DistilBertModel(config)

    @staticmethod
    def _load_pretrained(name):
        from transformers import AutoModel, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(name)
        net = AutoModel.from_pretrained(name)
        return tokenizer, net

    def embed_batch(self, token_lists: list[list[str]], out_positions: int) -> np.ndarray:
        """One (out_positions, dim) matrix per word list, stacked.

        Subword vectors are mean-pooled back to their word positions, padded
        or truncated, then pooled down to out_positions.
        """
        out = np.empty((len(token_lists), out_positions, self.dim), dtype=np.float64)
        with self._lock:
            for i, words in enumerate(token_lists):
                out[i] = self._embed_one(words, out_positions)
        return out

    def _embed_one(self, words: list[str], out_positions: int) -> np.ndarray:
        enc = self.tokenizer(
            [words], is_split_into_words=True, return_tensors="pt",
            truncation=True, max_length=self.max_positions,
        )
        with torch.no_grad():
            # single unpadded sequence: no attention mask needed (and an
            # all-ones mask is mishandled by some backend versions)
            hidden = self.net(input_ids=enc["input_ids"]).last_hidden_state[0]
        word_ids = enc.word_ids(0)
        sums: dict[int, torch.Tensor] = {}
        counts: dict[int, int] = {}
        for position, wid in enumerate(word_ids):
            if wid is None:
                continue  # [CLS], [SEP]
            if wid in sums:
                sums[wid] = sums[wid] + hidden[position]
                counts[wid] += 1
            else:
                sums[wid] = hidden[position].clone()
                counts[wid] = 1
        n_words = max(sums) + 1 if sums else 0
        vectors = np.zeros((n_words, self.dim), dtype=np.float64)
        for wid, total in sums.items():
            vectors[wid] = (total / counts[wid]).numpy().astype(np.float64)
        return pool_to_length(vectors, out_positions)
