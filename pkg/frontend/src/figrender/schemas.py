"""Header-validated readers for the harness CSV files.

Each figure kind accepts exactly one table layout. Validation compares
the header column set (order does not matter, csv.DictReader keys rows
by name) and then parses every numeric field, so a file that passes
``read_table`` is fully usable by the drawing code.
"""

from __future__ import annotations

import csv

SCHEMAS: dict[str, tuple[str, ...]] = {
    "lengthcurve": ("w", "lower", "upper", "length"),
    "floorcurves": ("theta", "kappa", "r"),
    "heatmap": (
        "p",
        "lambda",
        "fraction_certified",
        "min_ratio",
        "max_ratio",
        "reps",
    ),
    "quantilefit": ("norm_label", "kappa", "quantile", "fit_a", "fit_b"),
}

KINDS = tuple(sorted(SCHEMAS))

# every column except these holds a float
_TEXT_COLUMNS = frozenset({"norm_label"})


class SchemaError(ValueError):
    """Input table does not match the schema for the requested kind."""

    def __init__(self, message: str, columns: tuple[str, ...] = ()):
        if columns:
            message = f"{message}: {', '.join(columns)}"
        super().__init__(message)
        self.columns = columns


def read_table(path, kind: str) -> list[dict]:
    """Parse ``path`` as the CSV layout for ``kind``.

    Returns one dict per data row with floats already converted.
    Raises ``SchemaError`` on any mismatch, naming the offending
    columns, and requires at least one data row.
    """
    expected = SCHEMAS.get(kind)
    if expected is None:
        raise ValueError(f"unknown figure kind {kind!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: file is empty")
        got = [c.strip() for c in header]
        missing = tuple(c for c in expected if c not in got)
        extra = tuple(c for c in got if c not in expected)
        if missing:
            raise SchemaError(f"{path}: missing columns", missing)
        if extra:
            raise SchemaError(f"{path}: unexpected columns", extra)
        if len(got) != len(set(got)):
            dupes = tuple(sorted({c for c in got if got.count(c) > 1}))
            raise SchemaError(f"{path}: duplicated columns", dupes)

        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(got):
                raise SchemaError(
                    f"{path}: line {lineno} has {len(record)} fields, "
                    f"expected {len(got)}"
                )
            row = {}
            for name, raw in zip(got, record):
                if name in _TEXT_COLUMNS:
                    row[name] = raw
                    continue
                try:
                    row[name] = float(raw)
                except ValueError:
                    raise SchemaError(
                        f"{path}: line {lineno} is not numeric", (name,)
                    ) from None
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows
