"""Exact fixed-order Markov character models.

A model of order k is a transition table P(next char | last k chars) plus an
initial joint law over the first k characters. Probabilities of arbitrary
prefixes, conditionals of blocks, stepwise sampling, and the stationary state
law are all exact (up to float arithmetic); nothing here is estimated.
"""

from __future__ import annotations

import json
import math
from itertools import product
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import FileFormatError
from .vocab import Alphabet

STOCHASTIC_TOL = 1e-9


class MarkovCharModel:
    def __init__(self, alphabet: Alphabet, order: int, transition: np.ndarray, initial: np.ndarray):
        if order < 1:
            raise ValueError("order must be >= 1")
        a = len(alphabet)
        n_states = a**order
        transition = np.asarray(transition, dtype=np.float64)
        initial = np.asarray(initial, dtype=np.float64)
        if transition.shape != (n_states, a):
            raise ValueError(f"transition must have shape ({n_states}, {a}), got {transition.shape}")
        if initial.shape != (n_states,):
            raise ValueError(f"initial must have shape ({n_states},), got {initial.shape}")
        if transition.min() < -STOCHASTIC_TOL or transition.max() > 1 + STOCHASTIC_TOL:
            raise ValueError("transition entries must lie in [0, 1]")
        if initial.min() < -STOCHASTIC_TOL or initial.max() > 1 + STOCHASTIC_TOL:
            raise ValueError("initial entries must lie in [0, 1]")
        row_err = np.abs(transition.sum(axis=1) - 1.0).max()
        if row_err > STOCHASTIC_TOL:
            raise ValueError(f"transition rows must sum to 1 within {STOCHASTIC_TOL}, worst error {row_err:.3g}")
        init_err = abs(initial.sum() - 1.0)
        if init_err > STOCHASTIC_TOL:
            raise ValueError(f"initial law must sum to 1 within {STOCHASTIC_TOL}, error {init_err:.3g}")
        self.alphabet = alphabet
        self.order = order
        self.transition = np.clip(transition, 0.0, 1.0)
        self.initial = np.clip(initial, 0.0, 1.0)
        self._n_states = n_states

    # -- state arithmetic ----------------------------------------------------
    # A state is the last `order` characters packed big-endian: the first
    # character is the most significant digit, so all states sharing a prefix
    # form one contiguous index block.

    def state_index(self, s: str) -> int:
        if len(s) != self.order:
            raise ValueError(f"state must have length {self.order}, got {s!r}")
        idx = self.alphabet.index
        code = 0
        for ch in s:
            code = code * len(self.alphabet) + idx[ch]
        return code

    def state_string(self, code: int) -> str:
        a = len(self.alphabet)
        chars = []
        for _ in range(self.order):
            chars.append(self.alphabet.symbols[code % a])
            code //= a
        return "".join(reversed(chars))

    def _indices(self, s: str) -> list[int] | None:
        idx = self.alphabet.index
        out = []
        for ch in s:
            i = idx.get(ch)
            if i is None:
                return None
            out.append(i)
        return out

    def _initial_prefix_mass(self, char_idx: list[int]) -> float:
        # Marginal of the initial joint law over states starting with the
        # given characters; a contiguous slice thanks to the big-endian layout.
        a = len(self.alphabet)
        j = len(char_idx)
        head = 0
        for c in char_idx:
            head = head * a + c
        block = a ** (self.order - j)
        return float(self.initial[head * block : (head + 1) * block].sum())

    # -- probabilities -------------------------------------------------------

    def prefix_prob(self, s: str) -> float:
        """Probability that a sampled string starts with ``s``. Total on all
        strings; characters outside the alphabet get 0."""
        if s == "":
            return 1.0
        ci = self._indices(s)
        if ci is None:
            return 0.0
        k, a = self.order, len(self.alphabet)
        if len(ci) <= k:
            return self._initial_prefix_mass(ci)
        state = 0
        for c in ci[:k]:
            state = state * a + c
        p = float(self.initial[state])
        if p == 0.0:
            return 0.0
        logp = math.log(p)
        wrap = a ** (k - 1)
        for c in ci[k:]:
            t = float(self.transition[state, c])
            if t == 0.0:
                return 0.0
            logp += math.log(t)
            state = (state % wrap) * a + c
        return math.exp(logp)

    def _block_prob_after(self, anchor: str, block: str) -> float:
        """P(the next len(block) chars are ``block``) given a history that is
        either exactly ``anchor`` (when shorter than the order) or any
        positive-probability history ending with ``anchor`` (length == order)."""
        ci = self._indices(block)
        if ci is None:
            return 0.0
        k, a = self.order, len(self.alphabet)
        if len(anchor) < k:
            den = self.prefix_prob(anchor)
            if den == 0.0:
                return 0.0
            return self.prefix_prob(anchor + block) / den
        if len(anchor) != k:
            raise ValueError(f"anchor must be the full short history or exactly {k} characters")
        ai = self._indices(anchor)
        if ai is None:
            return 0.0
        state = 0
        for c in ai:
            state = state * a + c
        wrap = a ** (k - 1)
        logp = 0.0
        for c in ci:
            t = float(self.transition[state, c])
            if t == 0.0:
                return 0.0
            logp += math.log(t)
            state = (state % wrap) * a + c
        return math.exp(logp)

    def cond_block_prob(self, prefix: str, block: str) -> float:
        """P(next block | string starts with prefix) as a probability ratio;
        0.0 when both sides of the ratio are 0 (nothing to condition on)."""
        if block == "":
            return 1.0 if self.prefix_prob(prefix) > 0.0 else 0.0
        den = self.prefix_prob(prefix)
        if den == 0.0:
            return 0.0
        k = self.order
        anchor = prefix if len(prefix) < k else prefix[-k:]
        return self._block_prob_after(anchor, block)

    def next_char_dist(self, context: str) -> dict[str, float]:
        """Exact next-character law; the context must supply at least
        ``order`` characters (use cond_block_prob ratios below that)."""
        if len(context) < self.order:
            raise ValueError(f"context must have at least {self.order} characters, got {len(context)}")
        ci = self._indices(context[-self.order :])
        if ci is None:
            raise ValueError("context contains characters outside the alphabet")
        a = len(self.alphabet)
        state = 0
        for c in ci:
            state = state * a + c
        row = self.transition[state]
        return {ch: float(row[i]) for i, ch in enumerate(self.alphabet.symbols)}

    # -- sampling ------------------------------------------------------------

    def _sample_indices(self, count: int, length: int, seed) -> np.ndarray:
        """(count, length) matrix of alphabet indices, vectorized over rows."""
        if length < self.order:
            raise ValueError(f"length must be >= order ({self.order})")
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        a, k = len(self.alphabet), self.order
        states = rng.choice(self._n_states, size=count, p=self.initial)
        out = np.empty((count, length), dtype=np.uint8)
        for j in range(k):
            out[:, j] = (states // a ** (k - 1 - j)) % a
        cdf = np.cumsum(self.transition, axis=1)
        wrap = a ** (k - 1)
        for t in range(k, length):
            u = rng.random(count)
            nxt = np.minimum((u[:, None] > cdf[states]).sum(axis=1), a - 1)
            out[:, t] = nxt
            states = (states % wrap) * a + nxt
        return out

    def sample_strings(self, count: int, length: int, seed) -> list[str]:
        mat = self._sample_indices(count, length, seed)
        codes = np.array([ord(c) for c in self.alphabet.symbols], dtype=np.uint8)
        raw = codes[mat].tobytes().decode("ascii")
        return [raw[i * length : (i + 1) * length] for i in range(count)]

    def sample_string(self, length: int, seed) -> str:
        return self.sample_strings(1, length, seed)[0]

    # -- structure -----------------------------------------------------------

    def stationary_state_distribution(self) -> np.ndarray:
        """Stationary law of the induced state chain, via least squares on
        (S^T - I) pi = 0 with the normalization row appended."""
        a, k = len(self.alphabet), self.order
        n = self._n_states
        S = np.zeros((n, n))
        wrap = a ** (k - 1)
        for s in range(n):
            base = (s % wrap) * a
            for c in range(a):
                S[s, base + c] += self.transition[s, c]
        A = np.vstack([S.T - np.eye(n), np.ones((1, n))])
        b = np.zeros(n + 1)
        b[n] = 1.0
        pi, *_ = np.linalg.lstsq(A, b, rcond=None)
        pi = np.clip(pi, 0.0, None)
        return pi / pi.sum()

    @classmethod
    def from_dicts(
        cls,
        alphabet: Alphabet | Iterable[str],
        order: int,
        transition: dict[str, dict[str, float]],
        initial: dict[str, float],
    ) -> "MarkovCharModel":
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(alphabet)
        a = len(alphabet)
        states = ["".join(p) for p in product(alphabet.symbols, repeat=order)]
        T = np.zeros((len(states), a))
        for i, st in enumerate(states):
            row = transition.get(st)
            if row is None:
                raise FileFormatError(f"field 'transition' is missing the row for context {st!r}")
            if set(row) != set(alphabet.symbols):
                raise FileFormatError(f"field 'transition[{st!r}]' must give one probability per alphabet symbol")
            for ch, p in row.items():
                T[i, alphabet.index[ch]] = p
        extra = set(transition) - set(states)
        if extra:
            raise FileFormatError(f"field 'transition' has rows for unknown contexts {sorted(extra)!r}")
        init = np.zeros(len(states))
        if set(initial) != set(states):
            raise FileFormatError(f"field 'initial' must give one probability per length-{order} string")
        for st, p in initial.items():
            init[states.index(st)] = p
        try:
            return cls(alphabet, order, T, init)
        except ValueError as e:
            raise FileFormatError(str(e)) from e

    @classmethod
    def random(cls, alphabet: Alphabet | Iterable[str], order: int, seed) -> "MarkovCharModel":
        """Chain with uniform-random transition entries, rows normalized, and
        the stationary state law as the initial distribution."""
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(alphabet)
        rng = np.random.default_rng(seed)
        a = len(alphabet)
        T = rng.random((a**order, a))
        T /= T.sum(axis=1, keepdims=True)
        probe = cls(alphabet, order, T, np.full(a**order, 1.0 / a**order))
        return cls(alphabet, order, T, probe.stationary_state_distribution())

    def to_json_dict(self) -> dict:
        states = ["".join(p) for p in product(self.alphabet.symbols, repeat=self.order)]
        return {
            "order": self.order,
            "alphabet": list(self.alphabet.symbols),
            "initial": {st: float(self.initial[self.state_index(st)]) for st in states},
            "transition": {
                st: {ch: float(self.transition[self.state_index(st), i]) for i, ch in enumerate(self.alphabet.symbols)}
                for st in states
            },
        }


def chain_from_json_dict(obj: object) -> MarkovCharModel:
    if not isinstance(obj, dict):
        raise FileFormatError("chain file must hold a JSON object")
    order = obj.get("order")
    if not isinstance(order, int) or order < 1:
        raise FileFormatError(f"field 'order' must be a positive integer, got {order!r}")
    raw_alpha = obj.get("alphabet")
    if not isinstance(raw_alpha, list):
        raise FileFormatError("field 'alphabet' must be a list of characters")
    try:
        alphabet = Alphabet(raw_alpha)
    except Exception as e:
        raise FileFormatError(f"field 'alphabet': {e}") from e
    transition = obj.get("transition")
    initial = obj.get("initial")
    if not isinstance(transition, dict):
        raise FileFormatError("field 'transition' must be an object of per-context rows")
    if not isinstance(initial, dict):
        raise FileFormatError("field 'initial' must be an object of per-state probabilities")
    return MarkovCharModel.from_dicts(alphabet, order, transition, initial)


def load_chain(path: str | Path) -> MarkovCharModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    except OSError as e:
        raise FileFormatError(f"{path}: {e.strerror}") from e
    try:
        return chain_from_json_dict(obj)
    except FileFormatError as e:
        raise FileFormatError(f"{path}: {e}") from e


def save_chain(model: MarkovCharModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json_dict(), fh, indent=2)
        fh.write("\n")
