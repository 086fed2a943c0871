"""Result tables and their CSV serialization.

CSV files use RFC-4180 CRLF line endings and '.' decimals; every real is
written with 17 significant digits so 64-bit floats round-trip exactly.
Numeric cells must be finite except in columns explicitly declared
optional, where NaN marks "not applicable".  A table may carry leading
label columns (plain strings, e.g. the estimator or sweep-parameter name).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import ConfigurationError


def format_real(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class ResultTable:
    name: str
    columns: tuple
    rows: tuple  # tuples mixing str (label columns) and float
    label_columns: frozenset = frozenset()
    optional_columns: frozenset = frozenset()  # NaN permitted here only

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ConfigurationError(
                    f"table {self.name}: row {i} has {len(row)} cells, "
                    f"expected {len(self.columns)}"
                )
            for col, cell in zip(self.columns, row):
                if col in self.label_columns:
                    if not isinstance(cell, str):
                        raise ConfigurationError(
                            f"table {self.name}: column {col} expects labels"
                        )
                    continue
                val = float(cell)
                if math.isnan(val) and col not in self.optional_columns:
                    raise ConfigurationError(
                        f"table {self.name}: NaN in required column {col} (row {i})"
                    )
                if math.isinf(val):
                    raise ConfigurationError(
                        f"table {self.name}: non-finite value in column {col} (row {i})"
                    )

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise ConfigurationError(
                f"table {self.name} has no column {name!r}; "
                f"available: {list(self.columns)}"
            ) from None

    def column_values(self, name: str):
        idx = self.column_index(name)
        return [row[idx] for row in self.rows]

    def to_csv(self) -> str:
        def cell_str(col, cell):
            if col in self.label_columns:
                text = str(cell)
                if any(ch in text for ch in ',"\r\n'):
                    text = '"' + text.replace('"', '""') + '"'
                return text
            return format_real(float(cell))

        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(cell_str(c, v) for c, v in zip(self.columns, row)))
        return "\r\n".join(lines) + "\r\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def read_csv(path) -> tuple:
    """(columns, rows-of-strings) for round-trip checks and plotting."""
    with open(path, "r", newline="") as fh:
        text = fh.read()
    lines = [ln for ln in text.split("\r\n") if ln != ""]
    header = tuple(lines[0].split(","))
    rows = [tuple(ln.split(",")) for ln in lines[1:]]
    return header, rows
