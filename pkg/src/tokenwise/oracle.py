"""Brute-force reference probabilities by string enumeration.

Everything here recomputes token-event probabilities the slow, unarguable
way: enumerate all strings out to a horizon, encode each one, and add up
character-model mass where the encoding matches. Used to pin down expected
values in tests; never a performance path. The only library calls are the
character model's prefix probabilities and the encoder itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import EnumerationLimitError, UndefinedConditionalError
from .tokenize import Encoding, encode
from .vocab import Vocabulary, max_token_length


@dataclass(frozen=True)
class OracleConfig:
    """slack: characters enumerated past the decoded tokens (default: the
    longest token length, the minimum that can change the leading tokens);
    max_leaves: refuse enumerations larger than this."""

    slack: int | None = None
    max_leaves: int = 2**24


def _resolve_slack(vocab: Vocabulary, config: OracleConfig | None) -> tuple[int, int]:
    cfg = config or OracleConfig()
    m = max_token_length(vocab)
    slack = cfg.slack if cfg.slack is not None else m
    if slack < m:
        raise ValueError(f"slack must be >= the longest token length ({m})")
    return slack, cfg.max_leaves


def _sum_over_strings(
    charlm,
    vocab: Vocabulary,
    target: tuple[int, ...],
    horizon: int,
    max_leaves: int,
    pred: Callable[[str], bool] | None = None,
) -> float:
    """Sum of prefix probabilities over all length-``horizon`` strings whose
    encoding starts with ``target`` (and satisfying ``pred``), by depth-first
    enumeration with zero-mass pruning."""
    a = len(vocab.alphabet.symbols)
    if a**horizon > max_leaves:
        raise EnumerationLimitError(
            f"enumeration needs {a}^{horizon} leaves, over the limit of {max_leaves}"
        )
    symbols = vocab.alphabet.symbols
    total = 0.0

    def walk(s: str, p: float) -> None:
        nonlocal total
        if p == 0.0:
            return
        if len(s) == horizon:
            if pred is not None and not pred(s):
                return
            if encode(vocab, s).ids[: len(target)] == target:
                total += p
            return
        for ch in symbols:
            walk(s + ch, charlm.prefix_prob(s + ch))

    walk("", 1.0)
    return total


def oracle_token_prefix_prob(
    charlm, vocab: Vocabulary, tokens: Encoding, config: OracleConfig | None = None
) -> float:
    """P(the encoded string's first tokens are exactly ``tokens``)."""
    slack, cap = _resolve_slack(vocab, config)
    horizon = len(tokens.text) + slack
    return _sum_over_strings(charlm, vocab, tuple(tokens.ids), horizon, cap)


def oracle_next_token_dist(
    charlm, vocab: Vocabulary, tokens: Encoding, config: OracleConfig | None = None
) -> dict[int, float]:
    """Next-token conditional as ratios of enumerated event probabilities."""
    den = oracle_token_prefix_prob(charlm, vocab, tokens, config)
    if den <= 0.0:
        raise UndefinedConditionalError("token context has probability zero")
    out: dict[int, float] = {}
    for tid in range(len(vocab.texts)):
        num = oracle_token_prefix_prob(charlm, vocab, tokens.extend(tid), config)
        out[tid] = num / den
    return out


def oracle_cond_char(
    charlm, vocab: Vocabulary, tokens: Encoding, char: str, config: OracleConfig | None = None
) -> float:
    """P(next character = char | first tokens = tokens), both measured on the
    same enumeration horizon."""
    if len(char) != 1:
        raise ValueError("char must be a single character")
    slack, cap = _resolve_slack(vocab, config)
    n = len(tokens.text)
    horizon = n + slack
    target = tuple(tokens.ids)
    den = _sum_over_strings(charlm, vocab, target, horizon, cap)
    if den <= 0.0:
        raise UndefinedConditionalError("token context has probability zero")
    num = _sum_over_strings(charlm, vocab, target, horizon, cap, pred=lambda s: s[n] == char)
    return num / den


def oracle_cond_block(
    charlm, vocab: Vocabulary, tokens: Encoding, block: str, config: OracleConfig | None = None
) -> float:
    """P(next len(block) characters = block | first tokens = tokens); the
    numerator horizon stretches to cover the block."""
    if not block:
        raise ValueError("block must be nonempty")
    slack, cap = _resolve_slack(vocab, config)
    n = len(tokens.text)
    target = tuple(tokens.ids)
    den = _sum_over_strings(charlm, vocab, target, n + slack, cap)
    if den <= 0.0:
        raise UndefinedConditionalError("token context has probability zero")
    num = _sum_over_strings(
        charlm, vocab, target, n + len(block) + slack, cap, pred=lambda s: s[n : n + len(block)] == block
    )
    return num / den
