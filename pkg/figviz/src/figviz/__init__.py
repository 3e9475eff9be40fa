"""Grouped bar charts from experiment result CSVs.

The input contract is the results file written by ``tokenwise experiment``:
one row per (context, character) with truth, baseline, and corrected
probabilities. This package reads only that CSV — it has no dependency on
the library that produced it.
"""

from .render import (
    EXPECTED_COLUMNS,
    FigureSpec,
    FigvizError,
    FilterError,
    SchemaError,
    read_rows,
    render,
    select_rows,
)

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_COLUMNS",
    "FigureSpec",
    "FigvizError",
    "FilterError",
    "SchemaError",
    "read_rows",
    "render",
    "select_rows",
    "__version__",
]
