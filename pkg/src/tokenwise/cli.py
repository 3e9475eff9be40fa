"""Command-line front end.

Subcommands cover the whole pipeline: encode / validate / vstar (vocabulary
work), convert (exact token transition tables), correct (truth vs baseline vs
corrected for one query), oracle (brute-force reference for the same query),
and experiment (full result CSVs plus a metadata sidecar).

Conventions: results go to stdout as JSON (or to --out files); success exits
0; domain failures print one ``ERR:<kind>: message`` line to stderr and exit
1; usage problems exit 2. Set TOKENWISE_LOG=debug|info for stderr diagnostics.
All randomness flows from a single --seed; sub-seeds are derived with numpy
SeedSequence(seed).spawn, so equal invocations give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .charlm import load_chain
from .correct import (
    CorrectionQuery,
    baseline_next_char,
    corrected_cond_prob_bpe,
    corrected_cond_prob_mpe,
)
from .errors import TokenwiseError, UndefinedConditionalError
from .experiments import (
    emit_results,
    run_fig1,
    run_markov3,
    write_metadata,
)
from .oracle import OracleConfig, oracle_cond_block, oracle_token_prefix_prob
from .tokenize import Encoding, encode, is_valid
from .toklm import ExactTokenLM, TruncatedTokenLM, fit_count_token_lm
from .vocab import compute_vstar, load_vocab

logger = logging.getLogger("tokenwise")


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2))


def _token_ids(vocab, texts_arg: str) -> tuple[int, ...]:
    if texts_arg == "":
        return ()
    return tuple(vocab.token_id(t) for t in texts_arg.split(","))


def _build_model(args, chain, vocab):
    if args.model == "exact":
        return ExactTokenLM(chain, vocab)
    import numpy as np

    fit_seed = np.random.SeedSequence(args.seed).spawn(1)[0]
    fitted = fit_count_token_lm(
        chain, vocab, args.budget, args.seq_length, order=args.order, seed=fit_seed
    )
    return TruncatedTokenLM(fitted)


def cmd_encode(args) -> int:
    vocab = load_vocab(args.vocab)
    enc = encode(vocab, args.text)
    _print_json(enc.token_texts())
    return 0


def cmd_validate(args) -> int:
    vocab = load_vocab(args.vocab)
    ids = _token_ids(vocab, args.tokens)
    _print_json(is_valid(vocab, ids))
    return 0


def cmd_vstar(args) -> int:
    vocab = load_vocab(args.vocab)
    members = sorted(compute_vstar(vocab))
    _print_json([vocab.texts[tid] for tid in members])
    return 0


def cmd_convert(args) -> int:
    vocab = load_vocab(args.vocab)
    chain = load_chain(args.chain)
    model = ExactTokenLM(chain, vocab)
    table: dict[str, dict[str, float]] = {}
    frontier = [Encoding(vocab, (), "")]
    for _ in range(args.depth + 1):
        nxt = []
        for ctx in frontier:
            dist = model.next_token_dist(ctx)
            table["|".join(ctx.token_texts())] = {vocab.texts[t]: p for t, p in dist.items()}
            for tid, p in dist.items():
                if p > 0.0:
                    nxt.append(ctx.extend(tid))
        frontier = nxt
    _print_json(table)
    return 0


def cmd_correct(args) -> int:
    vocab = load_vocab(args.vocab)
    chain = load_chain(args.chain)
    scheme = vocab.kind
    if args.scheme is not None and args.scheme != scheme:
        raise ValueError(f"--scheme {args.scheme} does not match the {scheme} vocabulary")
    model = _build_model(args, chain, vocab)
    query = CorrectionQuery(args.context, args.continuation, scheme)
    if scheme == "mpe":
        corrected = corrected_cond_prob_mpe(model, vocab, query)
    else:
        corrected = corrected_cond_prob_bpe(model, vocab, query)
    truth = chain.cond_block_prob(args.context, args.continuation)
    baseline = None
    if len(args.continuation) == 1:
        try:
            baseline = baseline_next_char(model, vocab, encode(vocab, args.context), args.continuation)
        except UndefinedConditionalError:
            # the uncorrected estimate conditions on the raw token event,
            # which can be measure-zero even when the corrected answer exists
            baseline = None
    out = {
        "context": args.context,
        "continuation": args.continuation,
        "scheme": scheme,
        "model": args.model,
        "truth": truth,
        "baseline": baseline,
        "corrected": corrected,
        "abs_err_baseline": None if baseline is None else abs(baseline - truth),
        "abs_err_corrected": abs(corrected - truth),
    }
    _print_json(out)
    return 0


def cmd_oracle(args) -> int:
    vocab = load_vocab(args.vocab)
    chain = load_chain(args.chain)
    if args.scheme is not None and args.scheme != vocab.kind:
        raise ValueError(f"--scheme {args.scheme} does not match the {vocab.kind} vocabulary")
    config = OracleConfig(slack=args.slack) if args.slack is not None else None
    enc = encode(vocab, args.context)
    event_prob = oracle_token_prefix_prob(chain, vocab, enc, config)
    conditional = oracle_cond_block(chain, vocab, enc, args.continuation, config)
    out = {
        "context": args.context,
        "continuation": args.continuation,
        "context_tokens": enc.token_texts(),
        "token_event_prob": event_prob,
        "conditional_given_tokens": conditional,
        "chain_conditional": chain.cond_block_prob(args.context, args.continuation),
    }
    _print_json(out)
    return 0


def cmd_experiment(args) -> int:
    if args.name == "fig1":
        rows, table = run_fig1(args.alpha, args.beta, args.gamma)
        meta = {
            "experiment": "fig1",
            "scheme": "mpe",
            "model": "exact",
            "params": {"alpha": args.alpha, "beta": args.beta, "gamma": args.gamma},
            "token_transition_table": table,
        }
    else:
        rows, meta = run_markov3(
            args.scheme,
            args.seed,
            model_kind=args.model,
            num_sequences=args.budget,
            seq_length=args.seq_length,
            contexts_per_state=args.contexts_per_state,
            count_order=args.order,
            jobs=args.jobs,
        )
    emit_results(rows, args.format, args.out)
    side = write_metadata(meta, args.out)
    logger.info("wrote %d rows to %s (metadata: %s)", len(rows), args.out, side)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tokenwise",
        description="Tokenizer-induced sampling bias and its exact correction.",
        epilog=(
            "Seeding: every command takes at most one --seed; internal streams "
            "(chain sampling, count-model fitting, context draws) are derived "
            "deterministically via numpy SeedSequence(seed).spawn."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="tokenize a string")
    p.add_argument("--vocab", required=True, help="vocabulary JSON file")
    p.add_argument("--text", required=True)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("validate", help="check a token sequence for encoder validity")
    p.add_argument("--vocab", required=True)
    p.add_argument("--tokens", required=True, help="comma-separated token texts (empty string for the empty sequence)")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("vstar", help="tokens whose text is a substring of no other token")
    p.add_argument("--vocab", required=True)
    p.set_defaults(fn=cmd_vstar)

    p = sub.add_parser("convert", help="exact token transition table up to a context depth")
    p.add_argument("--vocab", required=True)
    p.add_argument("--chain", required=True, help="character chain JSON file")
    p.add_argument("--depth", type=int, default=2)
    p.set_defaults(fn=cmd_convert)

    for name, fn in (("correct", cmd_correct), ("oracle", cmd_oracle)):
        p = sub.add_parser(
            name,
            help=(
                "truth/baseline/corrected for one conditional query"
                if name == "correct"
                else "brute-force reference for one conditional query"
            ),
        )
        p.add_argument("--vocab", required=True)
        p.add_argument("--chain", required=True)
        p.add_argument("--scheme", choices=("mpe", "bpe"), default=None,
                       help="cross-check against the vocabulary file's own kind")
        p.add_argument("--context", required=True)
        p.add_argument("--continuation", required=True)
        if name == "correct":
            p.add_argument("--model", choices=("exact", "counts"), default="exact")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--budget", type=int, default=100_000, help="sequences for --model counts")
            p.add_argument("--seq-length", type=int, default=256)
            p.add_argument("--order", type=int, default=4, help="count-model context length")
        else:
            p.add_argument("--slack", type=int, default=None, help="enumeration slack (default: longest token)")
        p.set_defaults(fn=fn)

    p = sub.add_parser("experiment", help="run a shipped experiment and write results")
    p.add_argument("--name", choices=("fig1", "markov3"), required=True)
    p.add_argument("--scheme", choices=("mpe", "bpe"), default="mpe")
    p.add_argument("--model", choices=("exact", "counts"), default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=100_000, help="sequences for --model counts")
    p.add_argument("--seq-length", type=int, default=256)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--contexts-per-state", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1, help="upper bound on worker parallelism")
    p.add_argument("--alpha", type=float, default=0.3, help="fig1: P(A after A)")
    p.add_argument("--beta", type=float, default=0.5, help="fig1: P(A after B)")
    p.add_argument("--gamma", type=float, default=0.5, help="fig1: P(first char A)")
    p.add_argument("--out", required=True, help="results file; metadata goes to <out>.meta.json")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(fn=cmd_experiment)

    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("TOKENWISE_LOG", "").lower()
    if level_name in ("debug", "info"):
        logging.basicConfig(
            stream=sys.stderr,
            level=logging.DEBUG if level_name == "debug" else logging.INFO,
            format="tokenwise %(levelname)s %(name)s: %(message)s",
        )


def dispatch(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except TokenwiseError as e:
        print(f"ERR:{e.kind}: {e}", file=sys.stderr)
        logger.debug("domain error", exc_info=True)
        return 1
    except ValueError as e:
        print(f"ERR:usage: {e}", file=sys.stderr)
        logger.debug("usage error", exc_info=True)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
