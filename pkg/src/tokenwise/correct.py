"""Bias-corrected character-level conditionals from a token model.

A token model conditioned on the tokens of a string underestimates
continuations that would have changed how the tail of the string tokenized.
The estimators here fix that by summing over every token spelling consistent
with the character query instead of trusting the single spelling the encoder
picked.

Two query shapes:

* prefix queries (mpc_compute): P(next chars start with q | token context),
  built by walking q token-by-token with a branch term (tokens that cover all
  of q at once) and a pass term (the query's own first token is emitted and
  the walk continues on the rest);
* whole-string probabilities (bpc_prefix_prob): P(string starts with x),
  a sum over the valid encodings that cover x, grouped by where their last
  token starts.

The corrected conditional is a ratio of two such quantities. Longest-prefix
contexts are first re-anchored at their last substring-free token; merge-list
contexts are handled from the start of the string.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import UndefinedConditionalError
from .tokenize import Encoding, encode, is_valid
from .vocab import Vocabulary, compute_vstar

logger = logging.getLogger(__name__)

UNDERFLOW_FLOOR = 1e-300
_underflow_count = 0


def underflow_count() -> int:
    """Number of walks cut short because the carried probability left the
    normal float range; diagnostic only."""
    return _underflow_count


@dataclass(frozen=True)
class CorrectionQuery:
    """A character-level conditional question P(continuation | context)."""

    context: str
    continuation: str
    scheme: str

    def __post_init__(self):
        if not self.continuation:
            raise ValueError("continuation must be nonempty")
        if self.scheme not in ("mpe", "bpe"):
            raise ValueError(f"scheme must be 'mpe' or 'bpe', got {self.scheme!r}")


@dataclass(frozen=True)
class RefactorSplit:
    """Context split at the last token whose text pins the tokenization."""

    k: int
    prefix: Encoding
    n_k: int
    residual: str


def refactor_split(vocab: Vocabulary, context: str, vstar: frozenset[int] | None = None) -> RefactorSplit:
    """Split a longest-prefix context after its last anchor token.

    Encoding restarts after a token whose text is a substring of no other
    token text, so the conditional only depends on the residual characters.
    k = 0 (empty prefix, whole context residual) when no anchor occurs.
    """
    if vocab.kind != "mpe":
        raise ValueError("refactor_split applies to longest-prefix vocabularies only")
    enc = encode(vocab, context)
    vs = compute_vstar(vocab) if vstar is None else vstar
    k = 0
    for i in range(len(enc.ids) - 1, -1, -1):
        if enc.ids[i] in vs:
            k = i + 1
            break
    prefix = Encoding.from_ids(vocab, enc.ids[:k])
    n_k = len(prefix.text)
    return RefactorSplit(k, prefix, n_k, context[n_k:])


def mpc_compute(model, vocab: Vocabulary, context: Encoding, query: str) -> float:
    """P(the next characters start with ``query`` | token context).

    Each level issues exactly one next-token query against the model and adds
    the branch mass (tokens whose text extends the remaining query) before
    stepping through the query's own first token; the walk ends when the
    remainder encodes to a single token, whose mass the branch already counted.
    Levels consume at least one character, so the model is consulted at most
    len(query) times.

    Models that may leak mass onto invalid continuations (zeroes_invalid is
    False) get an explicit validity check on every token considered.
    """
    global _underflow_count
    if not query:
        raise ValueError("query must be nonempty")
    if not is_valid(vocab, context.ids):
        raise UndefinedConditionalError(f"context {list(context.ids)} is not a valid encoding")
    texts = vocab.texts
    check_validity = not model.zeroes_invalid
    total = 0.0
    carried = 1.0
    ctx = context
    remaining = query
    while True:
        dist = model.next_token_dist(ctx)
        branch = 0.0
        for tid, ttext in enumerate(texts):
            if ttext.startswith(remaining):
                p = dist.get(tid, 0.0)
                if p <= 0.0:
                    continue
                if check_validity and not is_valid(vocab, ctx.ids + (tid,)):
                    continue
                branch += p
        total += carried * branch
        enc_rem = encode(vocab, remaining)
        if len(enc_rem.ids) == 1:
            break
        head = enc_rem.ids[0]
        p_head = dist.get(head, 0.0)
        if p_head > 0.0 and check_validity and not is_valid(vocab, ctx.ids + (head,)):
            p_head = 0.0
        if p_head <= 0.0:
            break
        carried *= p_head
        if carried < UNDERFLOW_FLOOR:
            _underflow_count += 1
            logger.debug("prefix walk underflowed below %.0e after %r", UNDERFLOW_FLOOR, ctx.ids)
            break
        ctx = ctx.extend(head)
        remaining = remaining[len(texts[head]) :]
    return total


def baseline_next_char(model, vocab: Vocabulary, context: Encoding, char: str) -> float:
    """Uncorrected next-character estimate: the marginal over tokens whose
    text begins with ``char``. This is the quantity the correction exists to
    fix; it ignores that some of those tokens can never follow this context."""
    if len(char) != 1:
        raise ValueError("char must be a single character")
    if char not in vocab.alphabet:
        raise ValueError(f"character {char!r} is not in the alphabet")
    if not is_valid(vocab, context.ids):
        raise UndefinedConditionalError(f"context {list(context.ids)} is not a valid encoding")
    dist = model.next_token_dist(context)
    return sum(p for tid, p in dist.items() if vocab.texts[tid][0] == char)


def _encoding_prob(model, vocab: Vocabulary, target: Encoding) -> float:
    """P(first tokens = target) via the chain rule. Prefixes of a valid
    encoding are valid, so no validity filtering is needed along the way."""
    p = 1.0
    ctx = Encoding(vocab, (), "")
    for tid in target.ids:
        p *= model.next_token_dist(ctx).get(tid, 0.0)
        if p == 0.0:
            return 0.0
        ctx = ctx.extend(tid)
    return p


def bpc_prefix_prob(model, vocab: Vocabulary, text: str) -> float:
    """P(the sampled string starts with ``text``), summed over the valid
    covering encodings grouped by the start of their last token. The tokens
    before the last are forced (the encoding of the prior characters), so
    each group costs one model query."""
    if not text:
        raise ValueError("text must be nonempty")
    check_validity = not model.zeroes_invalid
    texts = vocab.texts
    total = 0.0
    for i in range(len(text) - 1, -1, -1):
        prior = encode(vocab, text[:i])
        p_prior = _encoding_prob(model, vocab, prior)
        if p_prior == 0.0:
            continue
        dist = model.next_token_dist(prior)
        suffix = text[i:]
        for tid, ttext in enumerate(texts):
            if ttext.startswith(suffix):
                p = dist.get(tid, 0.0)
                if p <= 0.0:
                    continue
                if check_validity and not is_valid(vocab, prior.ids + (tid,)):
                    continue
                total += p_prior * p
    return total


def corrected_cond_prob_mpe(model, vocab: Vocabulary, query: CorrectionQuery) -> float:
    """Corrected P(continuation | context) for longest-prefix encodings."""
    if query.scheme != "mpe":
        raise ValueError("query scheme must be 'mpe'")
    split = refactor_split(vocab, query.context)
    num = mpc_compute(model, vocab, split.prefix, split.residual + query.continuation)
    if not split.residual:
        return num
    den = mpc_compute(model, vocab, split.prefix, split.residual)
    if den == 0.0:
        raise UndefinedConditionalError(f"context {query.context!r} has probability zero under the model")
    return num / den


def corrected_cond_prob_bpe(model, vocab: Vocabulary, query: CorrectionQuery) -> float:
    """Corrected P(continuation | context) for merge-list encodings; both
    sides of the ratio are whole-string prefix probabilities."""
    if query.scheme != "bpe":
        raise ValueError("query scheme must be 'bpe'")
    num = bpc_prefix_prob(model, vocab, query.context + query.continuation)
    if not query.context:
        return num
    den = bpc_prefix_prob(model, vocab, query.context)
    if den == 0.0:
        raise UndefinedConditionalError(f"context {query.context!r} has probability zero under the model")
    return num / den
