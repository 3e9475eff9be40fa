"""Alphabets, tokenizer vocabularies, and derived token sets.

Two vocabulary kinds exist. A longest-prefix vocabulary (kind ``"mpe"``) is a
set of token texts searched greedily; a merge-list vocabulary (kind ``"bpe"``)
is the alphabet plus an ordered list of pair-merge rules, each introducing one
new token. Both kinds expose the same read surface (``texts``, ``alphabet``,
``kind``, ``token_id``) so the encoding and correction layers can stay
scheme-agnostic.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

from .errors import FileFormatError, VocabularyError


class Alphabet:
    """Ordered collection of distinct single-character symbols."""

    def __init__(self, symbols: Iterable[str]):
        syms = tuple(symbols)
        if not syms:
            raise VocabularyError("alphabet must be nonempty")
        for s in syms:
            if not isinstance(s, str) or len(s) != 1:
                raise VocabularyError(f"alphabet symbols must be single characters, got {s!r}")
        if len(set(syms)) != len(syms):
            raise VocabularyError("alphabet symbols must be distinct")
        self.symbols: tuple[str, ...] = syms
        self.index: dict[str, int] = {c: i for i, c in enumerate(syms)}

    def __contains__(self, ch: object) -> bool:
        return ch in self.index

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __repr__(self) -> str:
        return f"Alphabet({''.join(self.symbols)!r})"


class MpeVocabulary:
    """Token texts for greedy longest-prefix encoding.

    Texts are unique and every alphabet symbol is itself a token, so encoding
    can never get stuck. Ids are dense, assigned in listing order.
    """

    kind = "mpe"

    def __init__(self, alphabet: Alphabet, texts: Sequence[str]):
        self.alphabet = alphabet
        seen: dict[str, int] = {}
        for t in texts:
            if not t:
                raise VocabularyError("token texts must be nonempty")
            if t in seen:
                raise VocabularyError(f"duplicate token text {t!r}")
            for ch in t:
                if ch not in alphabet:
                    raise VocabularyError(f"token {t!r} uses character {ch!r} outside the alphabet")
            seen[t] = len(seen)
        for ch in alphabet:
            if ch not in seen:
                raise VocabularyError(f"alphabet symbol {ch!r} has no single-character token")
        self.texts: tuple[str, ...] = tuple(texts)
        self._id_of = seen
        # Prefix trie: nested dicts keyed by character, token id under _LEAF.
        self._trie: dict = {}
        for t, tid in seen.items():
            node = self._trie
            for ch in t:
                node = node.setdefault(ch, {})
            node[_LEAF] = tid

    def token_id(self, text: str) -> int:
        tid = self._id_of.get(text)
        if tid is None:
            raise VocabularyError(f"no token with text {text!r}")
        return tid

    def has_text(self, text: str) -> bool:
        return text in self._id_of

    def longest_match(self, text: str, start: int) -> tuple[int, int]:
        """Longest token matching a prefix of ``text[start:]`` as (id, length).

        Returns (-1, 0) when not even a single character matches, which only
        happens for characters outside the alphabet.
        """
        node = self._trie
        best_id, best_len = -1, 0
        depth = 0
        for i in range(start, len(text)):
            node = node.get(text[i])
            if node is None:
                break
            depth += 1
            tid = node.get(_LEAF)
            if tid is not None:
                best_id, best_len = tid, depth
        return best_id, best_len

    def __repr__(self) -> str:
        return f"MpeVocabulary({list(self.texts)!r})"


_LEAF = object()


class BpeVocabulary:
    """Alphabet tokens plus ordered pair-merge rules.

    Ids 0..|A|-1 are the alphabet symbols in order; each merge rule appends one
    token whose text is the concatenation of its parts. Duplicate texts are
    permitted; text lookups resolve to the earliest id.
    """

    kind = "bpe"

    def __init__(self, alphabet: Alphabet, merges: Sequence[tuple[str, str]]):
        self.alphabet = alphabet
        texts: list[str] = list(alphabet.symbols)
        id_of: dict[str, int] = {c: i for i, c in enumerate(alphabet.symbols)}
        rules: list[tuple[int, int, int]] = []
        for n, pair in enumerate(merges):
            if len(pair) != 2:
                raise VocabularyError(f"merge rule {n} must be a pair, got {pair!r}")
            left, right = pair
            lid = id_of.get(left)
            rid = id_of.get(right)
            if lid is None or rid is None:
                missing = left if lid is None else right
                raise VocabularyError(f"merge rule {n} references unknown token text {missing!r}")
            new_id = len(texts)
            new_text = left + right
            texts.append(new_text)
            rules.append((lid, rid, new_id))
            id_of.setdefault(new_text, new_id)
        self.texts: tuple[str, ...] = tuple(texts)
        self.merges: tuple[tuple[str, str], ...] = tuple((l, r) for l, r in merges)
        self.merge_rules: tuple[tuple[int, int, int], ...] = tuple(rules)
        self._id_of = id_of

    def token_id(self, text: str) -> int:
        tid = self._id_of.get(text)
        if tid is None:
            raise VocabularyError(f"no token with text {text!r}")
        return tid

    def has_text(self, text: str) -> bool:
        return text in self._id_of

    def __repr__(self) -> str:
        return f"BpeVocabulary(merges={list(self.merges)!r})"


Vocabulary = MpeVocabulary | BpeVocabulary


def build_mpe_vocab(alphabet: Alphabet, token_texts: Sequence[str]) -> MpeVocabulary:
    """Longest-prefix vocabulary from listed texts; missing single-character
    tokens for alphabet symbols are appended automatically."""
    texts = list(token_texts)
    present = set(texts)
    for ch in alphabet:
        if ch not in present:
            texts.append(ch)
    return MpeVocabulary(alphabet, texts)


def build_bpe_vocab(alphabet: Alphabet, merges: Sequence[tuple[str, str]]) -> BpeVocabulary:
    return BpeVocabulary(alphabet, merges)


def compute_vstar(vocab: Vocabulary) -> frozenset[int]:
    """Ids of tokens whose text is a proper substring of no other token text."""
    texts = vocab.texts
    out = set()
    for tid, t in enumerate(texts):
        contained = any(
            oid != tid and len(other) > len(t) and t in other
            for oid, other in enumerate(texts)
        )
        if not contained:
            out.add(tid)
    return frozenset(out)


def max_token_length(vocab: Vocabulary) -> int:
    return max(len(t) for t in vocab.texts)


def vocab_to_json_dict(vocab: Vocabulary) -> dict:
    if vocab.kind == "mpe":
        return {"type": "mpe", "alphabet": list(vocab.alphabet.symbols), "tokens": list(vocab.texts)}
    return {
        "type": "bpe",
        "alphabet": list(vocab.alphabet.symbols),
        "merges": [list(p) for p in vocab.merges],
    }


def vocab_from_json_dict(obj: object) -> Vocabulary:
    if not isinstance(obj, dict):
        raise FileFormatError("vocabulary file must hold a JSON object")
    kind = obj.get("type")
    if kind not in ("mpe", "bpe"):
        raise FileFormatError(f"field 'type' must be 'mpe' or 'bpe', got {kind!r}")
    raw_alpha = obj.get("alphabet")
    if not isinstance(raw_alpha, list):
        raise FileFormatError("field 'alphabet' must be a list of characters")
    try:
        alphabet = Alphabet(raw_alpha)
    except VocabularyError as e:
        raise FileFormatError(f"field 'alphabet': {e}") from e
    if kind == "mpe":
        tokens = obj.get("tokens")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise FileFormatError("field 'tokens' must be a list of strings")
        try:
            return build_mpe_vocab(alphabet, tokens)
        except VocabularyError as e:
            raise FileFormatError(f"field 'tokens': {e}") from e
    merges = obj.get("merges")
    if not isinstance(merges, list):
        raise FileFormatError("field 'merges' must be a list of pairs")
    pairs: list[tuple[str, str]] = []
    for n, p in enumerate(merges):
        if not isinstance(p, list) or len(p) != 2 or not all(isinstance(x, str) for x in p):
            raise FileFormatError(f"field 'merges[{n}]' must be a pair of strings")
        pairs.append((p[0], p[1]))
    try:
        return build_bpe_vocab(alphabet, pairs)
    except VocabularyError as e:
        raise FileFormatError(f"field 'merges': {e}") from e


def load_vocab(path: str | Path) -> Vocabulary:
    """Read a vocabulary JSON file, rejecting malformed ones with a field
    (or line, for JSON syntax errors) diagnostic."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    except OSError as e:
        raise FileFormatError(f"{path}: {e.strerror}") from e
    try:
        return vocab_from_json_dict(obj)
    except FileFormatError as e:
        raise FileFormatError(f"{path}: {e}") from e


def save_vocab(vocab: Vocabulary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(vocab_to_json_dict(vocab), fh, indent=2)
        fh.write("\n")
