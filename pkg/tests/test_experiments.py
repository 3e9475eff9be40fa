import json

import pytest

from tokenwise import UndefinedConditionalError
from tokenwise.experiments import (
    FIG1_CONTEXTS,
    RESULT_COLUMNS,
    ResultRow,
    emit_results,
    read_results,
    run_fig1,
    run_markov3,
    sample_state_contexts,
    two_state_chain,
    write_metadata,
)

EXPECTED_HEADER = "experiment,scheme,model,context,char,truth,baseline,corrected,abs_err_baseline,abs_err_corrected"


def by_key(rows):
    return {(r.context, r.char): r for r in rows}


def test_result_row_validation():
    with pytest.raises(ValueError):
        ResultRow.build("fig1", "mpe", "exact", "A", "A", 1.5, 0.0, 0.0)


def test_row_error_columns():
    r = ResultRow.build("fig1", "mpe", "exact", "A", "A", 0.3, 0.0, 0.3)
    assert r.abs_err_baseline == pytest.approx(0.3)
    assert r.abs_err_corrected == 0.0


def test_fig1_rows(demo_chain):
    rows, table = run_fig1()
    assert len(rows) == len(FIG1_CONTEXTS) * 2
    idx = by_key(rows)
    r = idx[("A", "A")]
    assert (r.truth, r.baseline, r.corrected) == (pytest.approx(0.3), 0.0, pytest.approx(0.3))
    r = idx[("A", "B")]
    assert (r.truth, r.baseline) == (pytest.approx(0.7), 1.0)
    for row in rows:
        assert row.truth == pytest.approx(demo_chain.cond_block_prob(row.context, row.char))
        assert row.corrected == pytest.approx(row.truth, abs=1e-12)


def test_fig1_token_table():
    _, table = run_fig1()
    assert table[""] == pytest.approx({"A": 0.35, "AA": 0.15, "B": 0.5})
    assert table["A"]["B"] == 1.0
    assert table["AA"]["A"] == pytest.approx(0.21)
    assert "AA|B" in table  # two-token contexts present


def test_markov3_exact_mpe_rows_and_skips():
    rows, meta = run_markov3("mpe", seed=12)
    # "BAA" is spelled [BA, A]: a valid but probability-zero token event, so
    # its baseline conditional does not exist and both its rows are skipped.
    assert set(meta["skipped_undefined"]) == {"BAA/A", "BAA/B"}
    assert len(rows) == 14
    assert all(r.abs_err_corrected <= 1e-9 for r in rows)
    assert any(r.abs_err_baseline >= 0.05 for r in rows)


def test_markov3_exact_bpe_rows():
    rows, meta = run_markov3("bpe", seed=12)
    assert meta["skipped_undefined"] == {}
    assert len(rows) == 16
    idx = by_key(rows)
    # single-token contexts are conditioned at a token boundary: no bias
    assert idx[("BAA", "A")].abs_err_baseline <= 1e-9
    assert all(r.abs_err_corrected <= 1e-9 for r in rows)
    assert any(r.abs_err_baseline >= 0.05 for r in rows)


def test_markov3_counts_small_budget():
    rows, meta = run_markov3(
        "mpe", seed=12, model_kind="counts", num_sequences=2000, seq_length=64, contexts_per_state=5
    )
    assert rows, "at least some rows must survive a small fit"
    assert meta["num_sequences"] == 2000
    for r in rows:
        assert r.model == "counts"
        assert 0.0 <= r.corrected <= 1.0 + 1e-9


def test_markov3_reproducible():
    a, _ = run_markov3("bpe", seed=13)
    b, _ = run_markov3("bpe", seed=13)
    assert a == b


def test_markov3_rejects_bad_args():
    with pytest.raises(ValueError):
        run_markov3("wordpiece", seed=1)
    with pytest.raises(ValueError):
        run_markov3("mpe", seed=1, model_kind="transformer")
    with pytest.raises(ValueError):
        run_markov3("mpe", seed=1, jobs=0)


def test_sample_state_contexts_end_with_state():
    import numpy as np

    chain = two_state_chain(0.4, 0.6, 0.5)
    got = sample_state_contexts(chain, "BA", 20, np.random.default_rng(0))
    assert len(got) == 20
    assert all(s.endswith("BA") for s in got)
    assert all(3 <= len(s) <= 10 for s in got)


def test_csv_golden_header_and_format(tmp_path):
    rows, _ = run_fig1()
    out = tmp_path / "r.csv"
    emit_results(rows, "csv", out)
    text = out.read_text()
    lines = text.split("\n")
    assert lines[0] == EXPECTED_HEADER
    assert lines[1].startswith("fig1,mpe,exact,A,A,0.3,0,0.3,")
    assert text.endswith("\n")


def test_csv_deterministic_bytes(tmp_path):
    rows, _ = run_fig1()
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_results(rows, "csv", p1)
    emit_results(rows, "csv", p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_csv_round_trip(tmp_path):
    rows, _ = run_fig1()
    out = tmp_path / "r.csv"
    emit_results(rows, "csv", out)
    back = read_results(out)
    assert [(r.context, r.char) for r in back] == [(r.context, r.char) for r in rows]
    for got, want in zip(back, rows):
        assert got.truth == pytest.approx(want.truth, rel=1e-11)


def test_read_results_rejects_wrong_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(Exception):
        read_results(p)


def test_json_format(tmp_path):
    rows, _ = run_fig1()
    out = tmp_path / "r.json"
    emit_results(rows, "json", out)
    data = json.loads(out.read_text())
    assert data["columns"] == list(RESULT_COLUMNS)
    assert data["rows"][0]["experiment"] == "fig1"
    assert list(data["rows"][0]) == list(RESULT_COLUMNS)


def test_metadata_sidecar(tmp_path):
    out = tmp_path / "r.csv"
    side = write_metadata({"b": 1, "a": 2}, out)
    assert side.name == "r.csv.meta.json"
    assert json.loads(side.read_text()) == {"a": 2, "b": 1}
