"""Subword tokenization bias and its exact correction, at desk scale.

Encoders assign each string one token spelling out of many, so conditioning a
token-level model on "the tokens of x" is not the same as conditioning on
"the text starts with x". This package builds the small exact worlds where
that gap is measurable (fixed-order Markov character models, longest-prefix
and merge-list tokenizers), converts character models to exact token models,
and computes the corrected character-level conditionals alongside the biased
baseline, with brute-force enumeration oracles to check every number.
"""

from .charlm import MarkovCharModel, load_chain, save_chain
from .correct import (
    CorrectionQuery,
    RefactorSplit,
    baseline_next_char,
    bpc_prefix_prob,
    corrected_cond_prob_bpe,
    corrected_cond_prob_mpe,
    mpc_compute,
    refactor_split,
)
from .errors import (
    DegenerateDistributionError,
    EncodingError,
    EnumerationLimitError,
    FileFormatError,
    TokenwiseError,
    UndefinedConditionalError,
    UnseenContextError,
    VocabularyError,
)
from .oracle import (
    OracleConfig,
    oracle_cond_block,
    oracle_cond_char,
    oracle_next_token_dist,
    oracle_token_prefix_prob,
)
from .tokenize import CoverEncoding, Encoding, decode, encode, enumerate_covers, first_token, is_valid
from .toklm import (
    CountTokenLM,
    ExactTokenLM,
    TruncatedTokenLM,
    convert_char_to_token,
    fit_count_token_lm,
    kl_divergence,
    truncate_renormalize,
    zero_and_renormalize,
)
from .vocab import (
    Alphabet,
    BpeVocabulary,
    MpeVocabulary,
    build_bpe_vocab,
    build_mpe_vocab,
    compute_vstar,
    load_vocab,
    max_token_length,
    save_vocab,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "BpeVocabulary",
    "CorrectionQuery",
    "CountTokenLM",
    "CoverEncoding",
    "DegenerateDistributionError",
    "EncodingError",
    "Encoding",
    "EnumerationLimitError",
    "ExactTokenLM",
    "FileFormatError",
    "MarkovCharModel",
    "MpeVocabulary",
    "OracleConfig",
    "RefactorSplit",
    "TokenwiseError",
    "TruncatedTokenLM",
    "UndefinedConditionalError",
    "UnseenContextError",
    "VocabularyError",
    "baseline_next_char",
    "bpc_prefix_prob",
    "build_bpe_vocab",
    "build_mpe_vocab",
    "compute_vstar",
    "convert_char_to_token",
    "corrected_cond_prob_bpe",
    "corrected_cond_prob_mpe",
    "decode",
    "encode",
    "enumerate_covers",
    "first_token",
    "fit_count_token_lm",
    "is_valid",
    "kl_divergence",
    "load_chain",
    "load_vocab",
    "max_token_length",
    "mpc_compute",
    "oracle_cond_block",
    "oracle_cond_char",
    "oracle_next_token_dist",
    "oracle_token_prefix_prob",
    "refactor_split",
    "save_chain",
    "save_vocab",
    "truncate_renormalize",
    "zero_and_renormalize",
]
