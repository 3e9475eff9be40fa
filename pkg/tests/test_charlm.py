import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from tokenwise import Alphabet, FileFormatError, MarkovCharModel, load_chain, save_chain
from tokenwise.charlm import chain_from_json_dict


def test_rejects_non_stochastic_rows(ab):
    t = np.array([[0.6, 0.3], [0.5, 0.5]])
    with pytest.raises(ValueError):
        MarkovCharModel(ab, 1, t, np.array([0.5, 0.5]))


def test_rejects_bad_initial(ab):
    t = np.array([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ValueError):
        MarkovCharModel(ab, 1, t, np.array([0.9, 0.9]))


def test_prefix_prob_closed_forms(demo_chain):
    # two-state chain: P(A->A)=0.3, P(B->A)=0.5, P(first=A)=0.5
    assert demo_chain.prefix_prob("") == 1.0
    assert demo_chain.prefix_prob("A") == pytest.approx(0.5, abs=1e-15)
    assert demo_chain.prefix_prob("AA") == pytest.approx(0.15, abs=1e-15)
    assert demo_chain.prefix_prob("AB") == pytest.approx(0.35, abs=1e-15)
    assert demo_chain.prefix_prob("ABA") == pytest.approx(0.175, abs=1e-15)


def test_prefix_prob_total_on_foreign_chars(demo_chain):
    assert demo_chain.prefix_prob("AXB") == 0.0


def test_cond_block_prob(demo_chain):
    assert demo_chain.cond_block_prob("A", "A") == pytest.approx(0.3)
    assert demo_chain.cond_block_prob("A", "BA") == pytest.approx(0.7 * 0.5)
    assert demo_chain.cond_block_prob("", "A") == pytest.approx(0.5)


def test_cond_block_prob_zero_over_zero(demo_chain):
    assert demo_chain.cond_block_prob("X", "A") == 0.0


def test_next_char_dist_requires_full_state(m3_chain):
    with pytest.raises(ValueError):
        m3_chain.next_char_dist("AB")
    d = m3_chain.next_char_dist("ABA")
    assert set(d) == {"A", "B"}
    assert sum(d.values()) == pytest.approx(1.0, abs=1e-12)


def test_next_char_dist_uses_last_state_chars(m3_chain):
    assert m3_chain.next_char_dist("BBABA") == m3_chain.next_char_dist("ABA")


def test_state_round_trip(m3_chain):
    for code in range(8):
        assert m3_chain.state_index(m3_chain.state_string(code)) == code


def test_prefix_prob_matches_manual_order3(m3_chain):
    s = "ABABA"
    manual = m3_chain.prefix_prob("ABA")
    manual *= m3_chain.next_char_dist("ABA")["B"]
    manual *= m3_chain.next_char_dist("BAB")["A"]
    assert m3_chain.prefix_prob(s) == pytest.approx(manual, rel=1e-12)


def test_sampling_deterministic(m3_chain):
    a = m3_chain.sample_strings(5, 16, 42)
    b = m3_chain.sample_strings(5, 16, 42)
    assert a == b
    assert all(len(s) == 16 and set(s) <= {"A", "B"} for s in a)
    assert m3_chain.sample_strings(5, 16, 43) != a


def test_sampling_matches_prefix_law(demo_chain):
    "Empirical single-char start frequency approaches the initial law"
    strings = demo_chain.sample_strings(20000, 3, 7)
    frac_a = sum(s[0] == "A" for s in strings) / len(strings)
    assert frac_a == pytest.approx(0.5, abs=0.02)


def test_stationary_distribution(m3_chain):
    pi = m3_chain.stationary_state_distribution()
    assert pi.sum() == pytest.approx(1.0, abs=1e-12)
    # state-to-state matrix: state c1c2c3 emits c -> state c2c3c
    n, k = m3_chain.transition.shape
    step = np.zeros((n, n))
    for code in range(n):
        for ci in range(k):
            nxt = (code * k + ci) % n
            step[code, nxt] += m3_chain.transition[code, ci]
    assert np.allclose(step.T @ pi, pi, atol=1e-12)


def test_random_chain_is_valid(ab):
    m = MarkovCharModel.random(ab, 3, seed=5)
    assert m.order == 3
    assert np.allclose(m.transition.sum(axis=1), 1.0)
    assert m.initial.sum() == pytest.approx(1.0)


def test_json_round_trip(m3_chain, tmp_path):
    p = tmp_path / "chain.json"
    save_chain(m3_chain, p)
    back = load_chain(p)
    assert back.order == m3_chain.order
    assert np.allclose(back.transition, m3_chain.transition)
    assert np.allclose(back.initial, m3_chain.initial)
    assert back.prefix_prob("ABBA") == pytest.approx(m3_chain.prefix_prob("ABBA"), rel=1e-15)


def test_from_dicts_diagnostics(ab):
    with pytest.raises(FileFormatError, match="BB"):
        MarkovCharModel.from_dicts(
            ab,
            2,
            {"AA": {"A": 0.5, "B": 0.5}, "AB": {"A": 0.5, "B": 0.5}, "BA": {"A": 1.0, "B": 0.0}},
            {"AA": 1.0},
        )


def test_load_chain_rejects_garbage(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("[]")
    with pytest.raises(FileFormatError):
        load_chain(p)
    with pytest.raises(FileFormatError):
        chain_from_json_dict({"order": 1})


@settings(max_examples=30)
@given(st.text(alphabet="AB", min_size=0, max_size=6))
def test_prefix_mass_conservation(m3_chain, s):
    "P(s) == P(sA) + P(sB): prefix measure is additive over extensions"
    total = m3_chain.prefix_prob(s + "A") + m3_chain.prefix_prob(s + "B")
    assert total == pytest.approx(m3_chain.prefix_prob(s), rel=1e-10, abs=1e-15)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_random_chain_rows_stochastic(seed):
    m = MarkovCharModel.random(Alphabet("AB"), 2, seed=seed)
    assert np.allclose(m.transition.sum(axis=1), 1.0, atol=1e-9)
    assert math.isclose(float(m.initial.sum()), 1.0, abs_tol=1e-9)
