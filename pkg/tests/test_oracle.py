import pytest

from tokenwise import (
    Encoding,
    EnumerationLimitError,
    UndefinedConditionalError,
    encode,
    oracle_cond_block,
    oracle_cond_char,
    oracle_next_token_dist,
    oracle_token_prefix_prob,
)
from tokenwise.oracle import OracleConfig


def test_token_event_probs(demo_chain, demo_vocab):
    enc_a = encode(demo_vocab, "A")
    assert oracle_token_prefix_prob(demo_chain, demo_vocab, enc_a) == pytest.approx(0.35, abs=1e-12)
    a = demo_vocab.token_id("A")
    invalid = Encoding.from_ids(demo_vocab, [a, a])
    assert oracle_token_prefix_prob(demo_chain, demo_vocab, invalid) == 0.0


def test_oracle_dist_matches_conversion(demo_chain, demo_vocab, demo_model):
    for text in ("", "A", "AA", "B", "BA"):
        ctx = encode(demo_vocab, text)
        want = demo_model.next_token_dist(ctx)
        got = oracle_next_token_dist(demo_chain, demo_vocab, ctx)
        for t in want:
            assert got[t] == pytest.approx(want[t], abs=1e-12)


def test_oracle_dist_matches_conversion_bpe(m3_chain, m3_bpe_vocab, m3_bpe_model):
    for text in ("A", "B", "BA", "BAA"):
        ctx = encode(m3_bpe_vocab, text)
        want = m3_bpe_model.next_token_dist(ctx)
        got = oracle_next_token_dist(m3_chain, m3_bpe_vocab, ctx)
        for t in want:
            assert got[t] == pytest.approx(want[t], abs=1e-12)


def test_oracle_cond_char(demo_chain, demo_vocab):
    ctx = encode(demo_vocab, "B")
    got = oracle_cond_char(demo_chain, demo_vocab, ctx, "A")
    assert got == pytest.approx(demo_chain.cond_block_prob("B", "A"), abs=1e-12)


def test_oracle_cond_block(demo_chain, demo_vocab):
    ctx = encode(demo_vocab, "AA")
    got = oracle_cond_block(demo_chain, demo_vocab, ctx, "BA")
    assert got == pytest.approx(demo_chain.cond_block_prob("AA", "BA"), abs=1e-12)


def test_horizon_slack_is_sufficient(m3_chain, m3_mpe_vocab, m3_bpe_vocab):
    """One extra enumerated character beyond the default must not change the
    answer; the default horizon already covers every token that can overlap."""
    for vocab in (m3_mpe_vocab, m3_bpe_vocab):
        for text in ("A", "B", "BA", "AA", "BB"):
            ctx = encode(vocab, text)
            base = oracle_token_prefix_prob(m3_chain, vocab, ctx)
            wider = oracle_token_prefix_prob(m3_chain, vocab, ctx, OracleConfig(slack=5))
            assert wider == pytest.approx(base, abs=1e-12)


def test_oracle_rejects_undersized_slack(demo_chain, m3_bpe_vocab):
    with pytest.raises(ValueError):
        oracle_token_prefix_prob(demo_chain, m3_bpe_vocab, encode(m3_bpe_vocab, "A"), OracleConfig(slack=1))


def test_oracle_enumeration_cap(m3_chain, m3_bpe_vocab):
    ctx = encode(m3_bpe_vocab, "ABABAB")
    with pytest.raises(EnumerationLimitError):
        oracle_token_prefix_prob(m3_chain, m3_bpe_vocab, ctx, OracleConfig(max_leaves=8))


def test_oracle_undefined_conditional(m3_chain, m3_mpe_vocab):
    # the token event [BA, A] has zero mass, so no conditional exists
    ctx = encode(m3_mpe_vocab, "BAA")
    with pytest.raises(UndefinedConditionalError):
        oracle_next_token_dist(m3_chain, m3_mpe_vocab, ctx)
