"""Reading the solver's CSV tables.

The files are self-describing: `#`-prefixed `key: value` comments, one
header line, then rows whose last column is a textual flag. Numeric cells
are parsed as floats (nan included); nothing is interpolated or recomputed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path


class HeaderMismatchError(ValueError):
    """CSV does not carry the columns the plot needs."""


@dataclass(frozen=True)
class CsvTable:
    path: Path
    meta: dict[str, str]  # parsed comment lines
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]  # floats, flags column stays str

    def column(self, name: str) -> list[float]:
        if name not in self.columns:
            raise HeaderMismatchError(
                f"{self.path.name} has no column {name!r}; columns: {list(self.columns)}"
            )
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    @property
    def label(self) -> str:
        # preset name makes the legend; scenario name is the fallback
        return self.meta.get("preset", self.meta.get("scenario", self.path.stem))


def _parse_cell(text: str) -> float | str:
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path) -> CsvTable:
    path = Path(path)
    if not path.exists():
        raise HeaderMismatchError(f"CSV not found: {path}")
    meta: dict[str, str] = {}
    columns: tuple[str, ...] | None = None
    rows = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            key, sep, value = body.partition(":")
            if sep:
                meta.setdefault(key.strip(), value.strip())
            continue
        if columns is None:
            columns = tuple(c.strip() for c in line.split(","))
            continue
        cells = [_parse_cell(c) for c in line.split(",")]
        if len(cells) != len(columns):
            raise HeaderMismatchError(
                f"{path.name}:{lineno}: row has {len(cells)} cells, header has {len(columns)}"
            )
        rows.append(tuple(cells))
    if columns is None or not rows:
        raise HeaderMismatchError(f"{path.name} contains no table")
    return CsvTable(path=path, meta=meta, columns=columns, rows=tuple(rows))


def require_columns(table: CsvTable, names) -> None:
    missing = [n for n in names if n not in table.columns]
    if missing:
        raise HeaderMismatchError(
            f"{table.path.name} lacks column(s) {missing}; columns: {list(table.columns)}"
        )


def finite_or_nan(values) -> list[float]:
    """Coerce stray non-numeric cells to nan so plotting never invents data."""
    return [v if isinstance(v, float) else math.nan for v in values]
