"""Shipped experiments and their result artifacts.

Two experiments demonstrate the bias and its correction:

* ``fig1``: a first-order two-state chain with a three-token longest-prefix
  vocabulary, small enough that every quantity has a closed form.
* ``markov3``: a seeded third-order chain over {A, B} with an eight-token
  vocabulary per scheme; truth, the uncorrected token-marginal baseline, and
  the corrected estimate are compared for every state and character, either
  with the exact converted token model or with an n-gram count model fit on
  sampled data.

Results serialize to a fixed-schema CSV (or JSON mirror) plus a metadata
sidecar carrying seeds and skip counts, so downstream tooling can consume
them without importing this package.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .charlm import MarkovCharModel
from .correct import CorrectionQuery, baseline_next_char, corrected_cond_prob_bpe, corrected_cond_prob_mpe
from .errors import UndefinedConditionalError, UnseenContextError
from .tokenize import Encoding, encode
from .toklm import ExactTokenLM, TruncatedTokenLM, fit_count_token_lm
from .vocab import Alphabet, Vocabulary, build_bpe_vocab, build_mpe_vocab

RESULT_COLUMNS = (
    "experiment",
    "scheme",
    "model",
    "context",
    "char",
    "truth",
    "baseline",
    "corrected",
    "abs_err_baseline",
    "abs_err_corrected",
)

FIG1_CONTEXTS = ("A", "AA", "B", "BA", "BAA")
MARKOV3_MPE_TOKENS = ("A", "B", "AA", "BAAB", "BBAA", "BBBA", "BA", "BBA")
MARKOV3_BPE_MERGES = (("B", "A"), ("BA", "A"), ("B", "BAA"), ("A", "A"), ("BA", "BA"), ("B", "B"))


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    scheme: str
    model: str
    context: str
    char: str
    truth: float
    baseline: float
    corrected: float
    abs_err_baseline: float
    abs_err_corrected: float

    def __post_init__(self):
        for name in ("truth", "baseline", "corrected"):
            v = getattr(self, name)
            if not (-1e-12 <= v <= 1 + 1e-12):
                raise ValueError(f"{name} must be a probability, got {v!r}")

    @staticmethod
    def build(experiment, scheme, model, context, char, truth, baseline, corrected) -> "ResultRow":
        return ResultRow(
            experiment,
            scheme,
            model,
            context,
            char,
            truth,
            baseline,
            corrected,
            abs(baseline - truth),
            abs(corrected - truth),
        )


def two_state_chain(p_a_after_a: float, p_a_after_b: float, p_a_start: float) -> MarkovCharModel:
    """First-order chain over {A, B} with the three defining probabilities."""
    return MarkovCharModel.from_dicts(
        Alphabet("AB"),
        1,
        {
            "A": {"A": p_a_after_a, "B": 1.0 - p_a_after_a},
            "B": {"A": p_a_after_b, "B": 1.0 - p_a_after_b},
        },
        {"A": p_a_start, "B": 1.0 - p_a_start},
    )


def fig1_chain(alpha: float = 0.3, beta: float = 0.5, gamma: float = 0.5) -> MarkovCharModel:
    return two_state_chain(alpha, beta, gamma)


def fig1_vocab():
    return build_mpe_vocab(Alphabet("AB"), ("AA", "A", "B"))


def markov3_chain(seed) -> MarkovCharModel:
    return MarkovCharModel.random(Alphabet("AB"), 3, seed)


def markov3_vocab(scheme: str) -> Vocabulary:
    if scheme == "mpe":
        return build_mpe_vocab(Alphabet("AB"), MARKOV3_MPE_TOKENS)
    if scheme == "bpe":
        return build_bpe_vocab(Alphabet("AB"), MARKOV3_BPE_MERGES)
    raise ValueError(f"scheme must be 'mpe' or 'bpe', got {scheme!r}")


def _corrected(model, vocab, scheme: str, context: str, char: str) -> float:
    query = CorrectionQuery(context, char, scheme)
    if scheme == "mpe":
        return corrected_cond_prob_mpe(model, vocab, query)
    return corrected_cond_prob_bpe(model, vocab, query)


def run_fig1(
    alpha: float = 0.3, beta: float = 0.5, gamma: float = 0.5
) -> tuple[list[ResultRow], dict]:
    """Exact-model rows for the two-state demo plus its full token transition
    table (contexts up to two tokens, keyed by token texts)."""
    chain = fig1_chain(alpha, beta, gamma)
    vocab = fig1_vocab()
    model = ExactTokenLM(chain, vocab)
    rows = []
    for context in FIG1_CONTEXTS:
        enc = encode(vocab, context)
        for char in vocab.alphabet.symbols:
            truth = chain.cond_block_prob(context, char)
            baseline = baseline_next_char(model, vocab, enc, char)
            corrected = _corrected(model, vocab, "mpe", context, char)
            rows.append(ResultRow.build("fig1", "mpe", "exact", context, char, truth, baseline, corrected))

    table: dict[str, dict[str, float]] = {}
    frontier = [Encoding(vocab, (), "")]
    for _ in range(3):  # contexts of 0, 1, and 2 tokens
        next_frontier = []
        for ctx in frontier:
            dist = model.next_token_dist(ctx)
            key = "|".join(ctx.token_texts())
            table[key] = {vocab.texts[tid]: p for tid, p in dist.items()}
            for tid, p in dist.items():
                if p > 0.0:
                    next_frontier.append(ctx.extend(tid))
        frontier = next_frontier
    return rows, table


def sample_state_contexts(
    chain: MarkovCharModel, state: str, count: int, rng: np.random.Generator,
    min_prefix: int = 1, max_prefix: int = 8,
) -> list[str]:
    """Conditioning strings that end with ``state``: a sampled prefix of
    random length (uniform in [min_prefix, max_prefix]) with the state
    characters appended. All transitions are positive for the chains used
    here, so every such string is a legal conditioning event."""
    lengths = rng.integers(min_prefix, max_prefix + 1, size=count)
    seed = int(rng.integers(0, 2**63 - 1))
    samples = chain.sample_strings(count, max_prefix, seed)
    return [samples[i][: lengths[i]] + state for i in range(count)]


def run_markov3(
    scheme: str,
    seed: int,
    model_kind: str = "exact",
    num_sequences: int = 100_000,
    seq_length: int = 256,
    contexts_per_state: int = 100,
    count_order: int = 4,
    jobs: int = 1,
) -> tuple[list[ResultRow], dict]:
    """Rows for every (state, character) of the third-order experiment.

    Sub-seeds for the chain, the count-model fit, and the context sampling
    derive from ``seed`` via numpy SeedSequence spawning, so a single seed
    reproduces the whole run. ``jobs`` bounds worker parallelism; rows are
    computed in deterministic state order (the current implementation is
    single-process, which trivially respects any bound).
    """
    if scheme not in ("mpe", "bpe"):
        raise ValueError(f"scheme must be 'mpe' or 'bpe', got {scheme!r}")
    if model_kind not in ("exact", "counts"):
        raise ValueError(f"model_kind must be 'exact' or 'counts', got {model_kind!r}")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    chain_ss, fit_ss, ctx_ss = np.random.SeedSequence(seed).spawn(3)
    chain = markov3_chain(chain_ss)
    vocab = markov3_vocab(scheme)
    states = ["".join(p) for p in product(chain.alphabet.symbols, repeat=chain.order)]
    meta: dict = {
        "experiment": "markov3",
        "scheme": scheme,
        "model": model_kind,
        "seed": seed,
        "seed_derivation": "numpy SeedSequence(seed).spawn(3) -> chain, fit, contexts",
        "initial_distribution": "stationary",
        "order": chain.order,
        "chain": chain.to_json_dict(),
    }
    rows: list[ResultRow] = []

    if model_kind == "exact":
        model = ExactTokenLM(chain, vocab)
        meta["skipped_undefined"] = {}
        for state in states:
            enc = encode(vocab, state)
            row_truth = chain.next_char_dist(state)
            for char in chain.alphabet.symbols:
                try:
                    # A state's encoding can be a probability-zero token event
                    # (every continuation would re-tokenize it), in which case
                    # the baseline conditional does not exist; the corrected
                    # estimate still does, but the row has nothing to compare.
                    baseline = baseline_next_char(model, vocab, enc, char)
                except UndefinedConditionalError:
                    meta["skipped_undefined"][f"{state}/{char}"] = "undefined-conditional"
                    continue
                corrected = _corrected(model, vocab, scheme, state, char)
                rows.append(
                    ResultRow.build("markov3", scheme, "exact", state, char, row_truth[char], baseline, corrected)
                )
        return rows, meta

    # Count model wrapped with validity truncation: the stand-in for a trained
    # sequence model plus the recommended output cleanup.
    model = TruncatedTokenLM(
        fit_count_token_lm(chain, vocab, num_sequences, seq_length, order=count_order, seed=fit_ss)
    )
    meta.update(
        {
            "num_sequences": num_sequences,
            "seq_length": seq_length,
            "count_order": count_order,
            "contexts_per_state": contexts_per_state,
            "prefix_length_range": [1, 8],
            "skipped_unseen": {},
        }
    )
    rng = np.random.default_rng(ctx_ss)
    for state in states:
        contexts = sample_state_contexts(chain, state, contexts_per_state, rng)
        row_truth = chain.next_char_dist(state)
        for char in chain.alphabet.symbols:
            base_vals: list[float] = []
            corr_vals: list[float] = []
            skipped = 0
            for context in contexts:
                try:
                    b = baseline_next_char(model, vocab, encode(vocab, context), char)
                    c = _corrected(model, vocab, scheme, context, char)
                except (UnseenContextError, UndefinedConditionalError):
                    skipped += 1
                    continue
                base_vals.append(b)
                corr_vals.append(c)
            if skipped:
                meta["skipped_unseen"][f"{state}/{char}"] = skipped
            if not base_vals:
                continue
            baseline = float(np.mean(base_vals))
            corrected = float(np.mean(corr_vals))
            rows.append(
                ResultRow.build("markov3", scheme, "counts", state, char, row_truth[char], baseline, corrected)
            )
    return rows, meta


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


def emit_results(rows: list[ResultRow], fmt: str, out_path: str | Path) -> None:
    """Write rows as CSV (exact column order, 12-significant-digit floats) or
    as a JSON mirror of the same records."""
    if not rows:
        raise ValueError("rows must be nonempty")
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    out_path = Path(out_path)
    if fmt == "csv":
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RESULT_COLUMNS)
            for r in rows:
                writer.writerow(
                    [r.experiment, r.scheme, r.model, r.context, r.char]
                    + [_fmt(v) for v in (r.truth, r.baseline, r.corrected, r.abs_err_baseline, r.abs_err_corrected)]
                )
        return
    records = []
    for r in rows:
        rec = {}
        for col in RESULT_COLUMNS:
            v = getattr(r, col)
            rec[col] = float(_fmt(v)) if isinstance(v, float) else v
        records.append(rec)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump({"columns": list(RESULT_COLUMNS), "rows": records}, fh, indent=2)
        fh.write("\n")


def write_metadata(meta: dict, out_path: str | Path) -> Path:
    side = Path(str(out_path) + ".meta.json")
    with open(side, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return side


def read_results(path: str | Path) -> list[ResultRow]:
    """Parse a results CSV back into rows (floats as written)."""
    rows: list[ResultRow] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise ValueError(f"unexpected results header {reader.fieldnames!r}")
        for rec in reader:
            rows.append(
                ResultRow(
                    rec["experiment"],
                    rec["scheme"],
                    rec["model"],
                    rec["context"],
                    rec["char"],
                    float(rec["truth"]),
                    float(rec["baseline"]),
                    float(rec["corrected"]),
                    float(rec["abs_err_baseline"]),
                    float(rec["abs_err_corrected"]),
                )
            )
    return rows
