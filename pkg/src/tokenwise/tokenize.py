"""Encoding, decoding, validity, and cover enumeration.

A string has many token spellings; the encoder picks exactly one. An encoding
is *valid* when it is the one the encoder picks for its own decode, i.e. a
fixed point of encode(decode(.)). Everything downstream (conversion,
correction, oracles) leans on validity, because a sequence model trained on
encoder output never sees invalid spellings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import EncodingError
from .vocab import BpeVocabulary, MpeVocabulary, Vocabulary


@dataclass(frozen=True)
class Encoding:
    """A token-id sequence together with its decoded text."""

    vocab: Vocabulary = field(repr=False, compare=False)
    ids: tuple[int, ...]
    text: str

    @staticmethod
    def from_ids(vocab: Vocabulary, ids: Iterable[int]) -> "Encoding":
        ids = tuple(ids)
        return Encoding(vocab, ids, decode(vocab, ids))

    def extend(self, token_id: int) -> "Encoding":
        return Encoding(self.vocab, self.ids + (token_id,), self.text + self.vocab.texts[token_id])

    def token_texts(self) -> list[str]:
        return [self.vocab.texts[i] for i in self.ids]

    def __len__(self) -> int:
        return len(self.ids)


def _check_chars(vocab: Vocabulary, text: str) -> None:
    for pos, ch in enumerate(text):
        if ch not in vocab.alphabet:
            raise EncodingError(f"character {ch!r} at position {pos} is not in the alphabet")


def _encode_mpe_ids(vocab: MpeVocabulary, text: str) -> list[int]:
    ids: list[int] = []
    pos = 0
    while pos < len(text):
        tid, length = vocab.longest_match(text, pos)
        if tid < 0:
            raise EncodingError(f"character {text[pos]!r} at position {pos} is not in the alphabet")
        ids.append(tid)
        pos += length
    return ids


def _encode_bpe_ids(vocab: BpeVocabulary, text: str) -> list[int]:
    _check_chars(vocab, text)
    idx = vocab.alphabet.index
    toks = [idx[ch] for ch in text]
    for lid, rid, new_id in vocab.merge_rules:
        # One left-to-right pass per rule; a merge consumes both parts, so the
        # scan resumes after the new token and never re-examines it.
        merged: list[int] = []
        j = 0
        n = len(toks)
        while j < n:
            if j + 1 < n and toks[j] == lid and toks[j + 1] == rid:
                merged.append(new_id)
                j += 2
            else:
                merged.append(toks[j])
                j += 1
        toks = merged
    return toks


def encode(vocab: Vocabulary, text: str) -> Encoding:
    """Tokenize ``text``; greedy longest prefix for mpe, rule-major merge
    passes for bpe. Empty text encodes to the empty sequence."""
    if vocab.kind == "mpe":
        ids = _encode_mpe_ids(vocab, text)
    else:
        ids = _encode_bpe_ids(vocab, text)
    return Encoding(vocab, tuple(ids), text)


def decode(vocab: Vocabulary, ids: Iterable[int]) -> str:
    texts = vocab.texts
    out: list[str] = []
    for i in ids:
        if not isinstance(i, int) or not (0 <= i < len(texts)):
            raise EncodingError(f"unknown token id {i!r}")
        out.append(texts[i])
    return "".join(out)


def is_valid(vocab: Vocabulary, ids: Iterable[int] | Encoding) -> bool:
    """True iff ``ids`` is exactly what the encoder produces for its decode."""
    if isinstance(ids, Encoding):
        ids = ids.ids
    ids = tuple(ids)
    return encode(vocab, decode(vocab, ids)).ids == ids


def first_token(vocab: Vocabulary, text: str) -> int:
    """Id of the first token in the encoding of ``text``."""
    if not text:
        raise ValueError("text must be nonempty")
    if vocab.kind == "mpe":
        tid, _ = vocab.longest_match(text, 0)
        if tid < 0:
            raise EncodingError(f"character {text[0]!r} at position 0 is not in the alphabet")
        return tid
    return _encode_bpe_ids(vocab, text)[0]


@dataclass(frozen=True)
class CoverEncoding:
    """A valid encoding whose decode starts with (and may overrun) a string."""

    encoding: Encoding
    covered: str


def enumerate_covers(vocab: Vocabulary, text: str) -> list[CoverEncoding]:
    """All valid encodings that cover ``text``: the last token starts inside
    the string and the decode extends it to or past the end.

    Iterates the last-token start position from len(text)-1 down to 0; the
    tokens before the last are forced (the encoding of the prior characters),
    so each position contributes at most a handful of candidates and no
    candidate repeats.
    """
    if not text:
        raise ValueError("text must be nonempty")
    _check_chars(vocab, text)
    covers: list[CoverEncoding] = []
    for i in range(len(text) - 1, -1, -1):
        suffix = text[i:]
        prior = encode(vocab, text[:i])
        for tid, ttext in enumerate(vocab.texts):
            if ttext.startswith(suffix):
                cand = prior.ids + (tid,)
                if is_valid(vocab, cand):
                    covers.append(CoverEncoding(Encoding.from_ids(vocab, cand), text))
    return covers
