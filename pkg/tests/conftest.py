"""Shared fixtures: the two-state demo setup and the order-3 study setups.

Exact token models are session-scoped because their cylinder sums are
memoized per instance; rebuilding them per test would redo that work.
"""

import pytest

from tokenwise import Alphabet, ExactTokenLM
from tokenwise.experiments import (
    fig1_chain,
    fig1_vocab,
    markov3_chain,
    markov3_vocab,
)

ACCEPTANCE_SEEDS = (12, 13, 16)


@pytest.fixture(scope="session")
def ab():
    return Alphabet("AB")


@pytest.fixture(scope="session")
def demo_chain():
    return fig1_chain()


@pytest.fixture(scope="session")
def demo_vocab():
    return fig1_vocab()


@pytest.fixture(scope="session")
def demo_model(demo_chain, demo_vocab):
    return ExactTokenLM(demo_chain, demo_vocab)


@pytest.fixture(scope="session")
def m3_mpe_vocab():
    return markov3_vocab("mpe")


@pytest.fixture(scope="session")
def m3_bpe_vocab():
    return markov3_vocab("bpe")


@pytest.fixture(scope="session")
def m3_chain():
    return markov3_chain(ACCEPTANCE_SEEDS[0])


@pytest.fixture(scope="session")
def m3_mpe_model(m3_chain, m3_mpe_vocab):
    return ExactTokenLM(m3_chain, m3_mpe_vocab)


@pytest.fixture(scope="session")
def m3_bpe_model(m3_chain, m3_bpe_vocab):
    return ExactTokenLM(m3_chain, m3_bpe_vocab)
