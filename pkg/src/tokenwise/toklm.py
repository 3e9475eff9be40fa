"""Token-level language models.

ExactTokenLM pushes a character model through a tokenizer: the next-token law
it returns is the exact conditional of the token process obtained by encoding
sampled strings. CountTokenLM estimates the same law from encoded samples by
n-gram counting. Both expose ``next_token_dist(context) -> dict[id, prob]``
and a ``zeroes_invalid`` flag saying whether the model is guaranteed to put
zero mass on continuations that break encoder validity; the correction layer
inserts explicit validity checks when the flag is False.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateDistributionError, UndefinedConditionalError, UnseenContextError
from .tokenize import Encoding, decode, encode, is_valid
from .vocab import Vocabulary, compute_vstar, max_token_length

TokenDist = dict[int, float]


class ExactTokenLM:
    """Exact next-token conditionals of the encoded character process.

    The token event {first tokens = t_1..t_i} is a union of character
    cylinders, so its probability is a finite sum: enumerate every suffix of
    length M (the longest token text) past the decoded tokens, and keep the
    strings whose encoding starts with t_1..t_i. Conditioning divides two such
    sums.

    For the longest-prefix scheme the sum does not need the whole history:
    encoding restarts after any context token whose text is a substring of no
    other token text, so the computation re-anchors at the last such token and
    only the character suffix behind it matters. Merge-list encodings do not
    restart (a later rule can fuse text across the boundary), so there the
    anchor is always the start of the string and the full token context is
    re-encoded.
    """

    zeroes_invalid = True

    def __init__(self, charlm, vocab: Vocabulary):
        if charlm.alphabet.symbols != vocab.alphabet.symbols:
            raise ValueError("character model and vocabulary must share an alphabet")
        self.charlm = charlm
        self.vocab = vocab
        self._m = max_token_length(vocab)
        self._vstar = compute_vstar(vocab) if vocab.kind == "mpe" else frozenset()
        self._suffixes = ["".join(p) for p in product(vocab.alphabet.symbols, repeat=self._m)]
        self._dist_memo: dict[tuple[int, ...], TokenDist] = {}
        self._tail_memo: dict[tuple[str, tuple[int, ...]], float] = {}

    def _split(self, ids: tuple[int, ...]) -> tuple[str, tuple[int, ...]]:
        """(anchor string, unanchored token tail) for a context."""
        k = 0
        if self.vocab.kind == "mpe":
            for i in range(len(ids) - 1, -1, -1):
                if ids[i] in self._vstar:
                    k = i + 1
                    break
        anchor_text = decode(self.vocab, ids[:k])
        kk = self.charlm.order
        anchor = anchor_text if len(anchor_text) < kk else anchor_text[-kk:]
        return anchor, ids[k:]

    def _tail_prob(self, anchor: str, tail: tuple[int, ...]) -> float:
        """P(next tokens start with ``tail`` | history behind the anchor)."""
        if not tail:
            return 1.0
        key = (anchor, tail)
        hit = self._tail_memo.get(key)
        if hit is not None:
            return hit
        texts = self.vocab.texts
        block = "".join(texts[i] for i in tail)
        want = len(tail)
        total = 0.0
        for sfx in self._suffixes:
            p = self.charlm._block_prob_after(anchor, block + sfx)
            if p == 0.0:
                continue
            if encode(self.vocab, block + sfx).ids[:want] == tail:
                total += p
        self._tail_memo[key] = total
        return total

    def next_token_dist(self, context: Encoding) -> TokenDist:
        ids = tuple(context.ids)
        hit = self._dist_memo.get(ids)
        if hit is not None:
            return dict(hit)
        if not is_valid(self.vocab, ids):
            raise UndefinedConditionalError(f"context {list(ids)} is not a valid encoding")
        anchor, tail = self._split(ids)
        den = self._tail_prob(anchor, tail)
        if den <= 0.0:
            raise UndefinedConditionalError("context has probability zero")
        dist = {tid: self._tail_prob(anchor, tail + (tid,)) / den for tid in range(len(self.vocab.texts))}
        # The entries sum to 1 exactly in real arithmetic; renormalizing strips
        # the float dust so single-support conditionals come out as literal 1.0.
        total = sum(dist.values())
        if total > 0.0:
            dist = {tid: p / total for tid, p in dist.items()}
        self._dist_memo[ids] = dist
        return dict(dist)


def convert_char_to_token(charlm, vocab: Vocabulary, context: Encoding) -> TokenDist:
    """One-shot exact conversion; build an ExactTokenLM for repeated queries
    so the cylinder sums are memoized."""
    return ExactTokenLM(charlm, vocab).next_token_dist(context)


class CountTokenLM:
    """n-gram count model over token sequences.

    Contexts longer than ``order`` are truncated to their last ``order``
    tokens; shorter contexts use their own table, counted only at sequence
    starts so each estimate matches the position it is queried at. With zero
    smoothing an unseen context is an explicit error rather than a silent
    uniform guess.
    """

    zeroes_invalid = False

    def __init__(
        self,
        vocab: Vocabulary,
        order: int,
        tables: Mapping[int, Mapping[tuple[int, ...], np.ndarray]],
        smoothing: float = 0.0,
    ):
        if order < 0:
            raise ValueError("order must be >= 0")
        if smoothing < 0:
            raise ValueError("smoothing must be >= 0")
        self.vocab = vocab
        self.order = order
        self.tables = {k: dict(v) for k, v in tables.items()}
        self.smoothing = float(smoothing)

    def next_token_dist(self, context: Encoding) -> TokenDist:
        ids = tuple(context.ids)
        klen = min(len(ids), self.order)
        key = ids[len(ids) - klen :]
        row = self.tables.get(klen, {}).get(key)
        n_tok = len(self.vocab.texts)
        if row is None:
            if self.smoothing > 0.0:
                return {tid: 1.0 / n_tok for tid in range(n_tok)}
            raise UnseenContextError(f"no observations for token context {list(key)}")
        vals = row + self.smoothing
        z = float(vals.sum())
        return {tid: float(vals[tid]) / z for tid in range(n_tok)}


def _encode_ids_batch(vocab: Vocabulary, chars: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tokenize a (rows, length) matrix of alphabet indices.

    Both schemes vectorize across rows. For longest-prefix, every window of M
    characters fully determines the greedy match, so a lookup table over
    packed windows turns encoding into a hop loop advancing all rows in
    lockstep. For merge lists, one pass per rule marks the merge starts (for a
    rule whose parts differ the matches are automatically disjoint; for equal
    parts a left-to-right pass fires at even offsets within each run) and
    compacts the rows.
    """
    n_rows, length = chars.shape
    if vocab.kind != "mpe":
        return _encode_bpe_batch(vocab, chars)

    a = len(vocab.alphabet)
    m = max_token_length(vocab)
    base = a + 1  # one sentinel digit marks past-the-end positions
    padded = np.concatenate([chars, np.full((n_rows, m - 1), a, dtype=np.uint8)], axis=1) if m > 1 else chars
    windows = np.zeros((n_rows, length), dtype=np.int64)
    for j in range(m):
        windows = windows * base + padded[:, j : j + length]

    match_id = np.full(base**m, -1, dtype=np.int16)
    match_len = np.zeros(base**m, dtype=np.int16)
    for r in range(1, m + 1):
        pad_tail = sum(a * base**j for j in range(m - r))
        for combo in product(range(a), repeat=r):
            code = 0
            for c in combo:
                code = code * base + c
            code = code * base ** (m - r) + pad_tail
            s = "".join(vocab.alphabet.symbols[c] for c in combo)
            tid, ln = vocab.longest_match(s, 0)
            match_id[code] = tid
            match_len[code] = ln

    toks = np.full((n_rows, length), -1, dtype=np.int16)
    pos = np.zeros(n_rows, dtype=np.int64)
    counts = np.zeros(n_rows, dtype=np.int32)
    active = np.arange(n_rows)
    while active.size:
        codes = windows[active, pos[active]]
        toks[active, counts[active]] = match_id[codes]
        counts[active] += 1
        pos[active] += match_len[codes]
        active = active[pos[active] < length]
    return toks[:, : counts.max()], counts


def _encode_bpe_batch(vocab: Vocabulary, chars: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n_rows, length = chars.shape
    cur = chars.astype(np.int16)
    lengths = np.full(n_rows, length, dtype=np.int32)
    col = np.arange(length)
    for lid, rid, new_id in vocab.merge_rules:
        is_left = cur == lid
        follows = np.zeros_like(is_left)
        follows[:, :-1] = cur[:, 1:] == rid
        if lid != rid:
            start = is_left & follows
        else:
            # Offset parity within each run of the repeated part decides which
            # pairs a left-to-right pass would actually merge.
            begins_run = is_left.copy()
            begins_run[:, 1:] &= ~is_left[:, :-1]
            anchor = np.maximum.accumulate(np.where(begins_run, col[: cur.shape[1]], -1), axis=1)
            start = is_left & follows & ((col[: cur.shape[1]] - anchor) % 2 == 0)
        if not start.any():
            continue
        consumed = np.zeros_like(start)
        consumed[:, 1:] = start[:, :-1]
        keep = ~consumed
        vals = np.where(start, np.int16(new_id), cur)
        r_idx, c_idx = np.nonzero(keep)
        out_col = (keep.cumsum(axis=1) - 1)[r_idx, c_idx]
        packed = np.full_like(cur, -1)
        packed[r_idx, out_col] = vals[r_idx, c_idx]
        lengths -= start.sum(axis=1, dtype=np.int32)
        cur = packed[:, : lengths.max()]
        col = np.arange(cur.shape[1])
    return cur[:, : lengths.max()], lengths


def fit_count_token_lm(
    charlm,
    vocab: Vocabulary,
    num_sequences: int,
    seq_length: int,
    order: int = 4,
    seed=0,
    smoothing: float = 0.0,
) -> CountTokenLM:
    """Sample strings from the character model, encode them, and count token
    n-grams. The final token of each sequence is dropped: the sequence end can
    cut it short, so keeping it would bias the counts."""
    m = max_token_length(vocab)
    if seq_length < 2 * m:
        raise ValueError(f"seq_length must be >= {2 * m} (twice the longest token)")
    if num_sequences < 1:
        raise ValueError("num_sequences must be >= 1")
    chars = charlm._sample_indices(num_sequences, seq_length, seed)
    toks, counts = _encode_ids_batch(vocab, chars)
    counts = counts - 1  # drop the possibly-truncated final token
    n_tok = len(vocab.texts)
    toks64 = toks.astype(np.int64)
    tables: dict[int, dict[tuple[int, ...], np.ndarray]] = {k: {} for k in range(order + 1)}

    def bump(table: dict, ctx: tuple[int, ...], nxt: int, cnt: int) -> None:
        row = table.get(ctx)
        if row is None:
            row = np.zeros(n_tok, dtype=np.float64)
            table[ctx] = row
        row[nxt] += cnt

    width = toks.shape[1] - order
    if width > 0:
        keys = toks64[:, :width].copy()
        for i in range(1, order + 1):
            keys = keys * n_tok + toks64[:, i : i + width]
        col = np.arange(width)
        valid = col[None, :] + order < counts[:, None]
        uniq, cnts = np.unique(keys[valid], return_counts=True)
        for key, cnt in zip(uniq.tolist(), cnts.tolist()):
            nxt = key % n_tok
            rest = key // n_tok
            ctx = []
            for _ in range(order):
                ctx.append(rest % n_tok)
                rest //= n_tok
            bump(tables[order], tuple(reversed(ctx)), nxt, cnt)

    for klen in range(min(order, toks.shape[1])):
        rows = counts > klen
        if not rows.any():
            continue
        keys = np.zeros(int(rows.sum()), dtype=np.int64)
        for i in range(klen):
            keys = keys * n_tok + toks64[rows, i]
        keys = keys * n_tok + toks64[rows, klen]
        uniq, cnts = np.unique(keys, return_counts=True)
        for key, cnt in zip(uniq.tolist(), cnts.tolist()):
            nxt = key % n_tok
            rest = key // n_tok
            ctx = []
            for _ in range(klen):
                ctx.append(rest % n_tok)
                rest //= n_tok
            bump(tables[klen], tuple(reversed(ctx)), nxt, cnt)

    return CountTokenLM(vocab, order, tables, smoothing)


def zero_and_renormalize(weights: Sequence[float], forbidden: Sequence[int]) -> list[float]:
    """Zero the forbidden coordinates and renormalize the rest."""
    out = [float(w) for w in weights]
    for i in forbidden:
        out[i] = 0.0
    z = sum(out)
    if z <= 0.0:
        raise DegenerateDistributionError("all surviving mass is zero after truncation")
    return [w / z for w in out]


def truncate_renormalize(dist: TokenDist, context: Encoding, vocab: Vocabulary) -> TokenDist:
    """Drop continuations that break encoder validity and renormalize.

    Among all distributions supported on the valid continuations this is the
    closest to ``dist`` in KL from the true conditional, so it never hurts a
    model that already leaks mass onto invalid spellings.
    """
    ids = list(range(len(vocab.texts)))
    forbidden = [tid for tid in ids if not is_valid(vocab, context.ids + (tid,))]
    weights = [dist.get(tid, 0.0) for tid in ids]
    fixed = zero_and_renormalize(weights, forbidden)
    return {tid: fixed[tid] for tid in ids}


class TruncatedTokenLM:
    """Wrap any token model with validity truncation."""

    zeroes_invalid = True

    def __init__(self, base):
        self.base = base
        self.vocab = base.vocab

    def next_token_dist(self, context: Encoding) -> TokenDist:
        return truncate_renormalize(self.base.next_token_dist(context), context, self.vocab)


def kl_divergence(p: Sequence[float], q: Sequence[float]) -> float:
    """Sum of p_i log(p_i / q_i); terms with p_i = 0 vanish, and any point
    where p is positive but q is zero yields math.inf."""
    p = list(p)
    q = list(q)
    if len(p) != len(q):
        raise ValueError("distributions must have the same support size")
    total = 0.0
    for pi, qi in zip(p, q):
        if pi <= 0.0:
            continue
        if qi <= 0.0:
            return math.inf
        total += pi * math.log(pi / qi)
    return total
