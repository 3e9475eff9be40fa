"""CSV parsing, row selection, and the grouped-bar renderer.

Golden tests target the sidecar JSON, never pixels: rendering backends vary,
the numbers do not. The sidecar therefore carries the plotted values exactly
as parsed from the CSV.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

EXPECTED_COLUMNS = (
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

BAR_COLUMNS = ("truth", "baseline", "corrected")

BAR_COLORS = {"truth": "#4c72b0", "baseline": "#c44e52", "corrected": "#55a868"}


class FigvizError(Exception):
    """Base for all data errors this package raises."""


class SchemaError(FigvizError):
    """Input file does not match the results-CSV schema."""


class FilterError(FigvizError):
    """A filter selected no rows."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure: where the rows come from, which ones, where the image goes."""

    csv_path: str | Path
    out_path: str | Path
    experiment: str | None = None
    scheme: str | None = None
    model: str | None = None
    char: str | None = None


def read_rows(csv_path: str | Path) -> list[dict]:
    """Parse a results CSV into dicts with float bar values.

    Schema problems name the offending column; bar values outside [0, 1]
    are an error, never a clip.
    """
    try:
        fh = open(csv_path, "r", encoding="utf-8", newline="")
    except OSError as e:
        raise FigvizError(f"{csv_path}: {e.strerror}") from e
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{csv_path}: file is empty") from None
        if tuple(header) != EXPECTED_COLUMNS:
            missing = [c for c in EXPECTED_COLUMNS if c not in header]
            extra = [c for c in header if c not in EXPECTED_COLUMNS]
            detail = []
            if missing:
                detail.append(f"missing column(s) {missing}")
            if extra:
                detail.append(f"unexpected column(s) {extra}")
            if not detail:
                detail.append("columns are out of order")
            raise SchemaError(f"{csv_path}: {'; '.join(detail)}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(EXPECTED_COLUMNS):
                raise SchemaError(f"{csv_path}:{lineno}: expected {len(EXPECTED_COLUMNS)} fields, got {len(rec)}")
            row = dict(zip(EXPECTED_COLUMNS, rec))
            for col in ("truth", "baseline", "corrected", "abs_err_baseline", "abs_err_corrected"):
                try:
                    row[col] = float(row[col])
                except ValueError:
                    raise SchemaError(f"{csv_path}:{lineno}: column {col!r} is not a number: {row[col]!r}") from None
            for col in BAR_COLUMNS:
                if not 0.0 <= row[col] <= 1.0:
                    raise FigvizError(
                        f"{csv_path}:{lineno}: column {col!r} = {row[col]} is outside [0, 1]"
                    )
            rows.append(row)
    if not rows:
        raise SchemaError(f"{csv_path}: no data rows")
    return rows


def select_rows(rows: list[dict], spec: FigureSpec) -> list[dict]:
    """Apply the (experiment, scheme, model) filter; empty result is an error."""
    out = rows
    for field in ("experiment", "scheme", "model"):
        want = getattr(spec, field)
        if want is not None:
            out = [r for r in out if r[field] == want]
    if not out:
        parts = [f"{f}={getattr(spec, f)!r}" for f in ("experiment", "scheme", "model") if getattr(spec, f)]
        raise FilterError(f"filter ({', '.join(parts) or 'none'}) selected no rows")
    return out


def _pick_char(rows: list[dict], spec: FigureSpec) -> str:
    if spec.char is not None:
        chosen = [r for r in rows if r["char"] == spec.char]
        if not chosen:
            raise FilterError(f"char={spec.char!r} selected no rows")
        return spec.char
    return min(r["char"] for r in rows)


def render(spec: FigureSpec) -> tuple[Path, Path]:
    """Write the grouped bar chart and its sidecar data file.

    Returns (image path, sidecar path). The sidecar is the image path with
    ``.data.json`` appended and lists exactly the numbers plotted.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = select_rows(read_rows(spec.csv_path), spec)
    char = _pick_char(rows, spec)
    rows = [r for r in rows if r["char"] == char]

    groups = []
    seen = set()
    for r in rows:
        if r["context"] in seen:
            raise FigvizError(f"context {r['context']!r} appears twice for char {char!r}; refine the filter")
        seen.add(r["context"])
        groups.append(
            {
                "context": r["context"],
                "truth": r["truth"],
                "baseline": r["baseline"],
                "corrected": r["corrected"],
            }
        )

    out_path = Path(spec.out_path)
    n = len(groups)
    width = 0.25
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * n + 1.5), 3.2))
    for j, col in enumerate(BAR_COLUMNS):
        xs = [i + (j - 1) * width for i in range(n)]
        ax.bar(xs, [g[col] for g in groups], width=width, label=col, color=BAR_COLORS[col])
    ax.set_xticks(range(n))
    ax.set_xticklabels([g["context"] for g in groups])
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("context")
    ax.set_ylabel(f"P({char!s} | context)")
    ax.legend(frameon=False, ncol=3, fontsize="small")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)

    sidecar = Path(str(out_path) + ".data.json")
    payload = {
        "source": str(spec.csv_path),
        "filter": {
            "experiment": spec.experiment,
            "scheme": spec.scheme,
            "model": spec.model,
        },
        "char": char,
        "groups": groups,
    }
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return out_path, sidecar
