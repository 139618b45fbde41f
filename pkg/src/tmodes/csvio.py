"""Comma-separated series with a ``#`` metadata header.

Layout::

    # key=value            (one line per metadata entry, in insertion order)
    # generated=<ISO time> (optional, always last; dropped by --no-timestamp)
    col_a,col_b,...
    0,1.2345678901234567
    ...

Floats are written with 17 significant digits so a write/read cycle is
exact.  A column whose cells do not all parse as floats is kept as text.
"""

from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import DomainError

TIMESTAMP_KEY = "generated"


def _fmt(x):
    if isinstance(x, str):
        return x
    return "%.17g" % x


@dataclass(eq=False)
class CsvSeries:
    columns: list
    data: dict
    metadata: dict = field(default_factory=dict)
    timestamp: str | None = None

    def __post_init__(self):
        self.columns = list(self.columns)
        if len(set(self.columns)) != len(self.columns):
            raise DomainError("duplicate column names")
        for name in self.columns:
            if "," in name or not name:
                raise DomainError(f"bad column name {name!r}")
        arrays = {}
        for name in self.columns:
            col = np.asarray(self.data[name])
            if col.dtype.kind not in "fiuU":
                col = col.astype(str)
            if col.dtype.kind in "iu":
                col = col.astype(float)
            if col.dtype.kind == "U" and any("," in v or "\n" in v for v in col):
                raise DomainError(f"column {name!r} has cells containing ',' or newlines")
            arrays[name] = col
        lengths = {len(c) for c in arrays.values()}
        if len(lengths) > 1:
            raise DomainError("columns have unequal lengths")
        first = arrays[self.columns[0]] if self.columns else None
        if first is not None and first.dtype.kind == "f" and np.any(np.diff(first) <= 0):
            raise DomainError(f"first column {self.columns[0]!r} must be strictly increasing")
        self.data = arrays
        # the reader strips around '=', so normalise here to keep round trips exact
        self.metadata = {str(k).strip(): str(v).strip() for k, v in self.metadata.items()}
        for k, v in self.metadata.items():
            if "=" in k or "\n" in k + v or k == TIMESTAMP_KEY:
                raise DomainError(f"bad metadata entry {k!r}")

    @property
    def n_rows(self):
        return len(self.data[self.columns[0]]) if self.columns else 0

    def stamp(self, now=None):
        now = now or datetime.now(timezone.utc)
        self.timestamp = now.isoformat(timespec="seconds")
        return self

    def to_text(self):
        lines = [f"# {k}={v}" for k, v in self.metadata.items()]
        if self.timestamp is not None:
            lines.append(f"# {TIMESTAMP_KEY}={self.timestamp}")
        lines.append(",".join(self.columns))
        cols = [self.data[c] for c in self.columns]
        for i in range(self.n_rows):
            lines.append(",".join(_fmt(c[i].item()) for c in cols))
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        if not isinstance(other, CsvSeries):
            return NotImplemented
        if (self.columns, self.metadata, self.timestamp) != (
                other.columns, other.metadata, other.timestamp):
            return False
        return all(np.array_equal(self.data[c], other.data[c],
                                  equal_nan=self.data[c].dtype.kind == "f")
                   for c in self.columns)


def write_csv(path, series):
    text = series.to_text()
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _column(cells):
    try:
        return np.array([float(c) for c in cells])
    except ValueError:
        return np.array(cells, dtype=str)


def parse_csv(text):
    metadata = {}
    timestamp = None
    lines = text.splitlines()
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, sep, value = lines[i][1:].strip().partition("=")
        if not sep:
            raise DomainError(f"line {i + 1}: metadata lines need key=value")
        if key == TIMESTAMP_KEY:
            timestamp = value
        else:
            metadata[key] = value
        i += 1
    if i == len(lines):
        raise DomainError("missing column header")
    columns = lines[i].split(",")
    rows = [ln.split(",") for ln in lines[i + 1:] if ln]
    for n, row in enumerate(rows, start=i + 2):
        if len(row) != len(columns):
            raise DomainError(f"line {n}: expected {len(columns)} fields, got {len(row)}")
    data = {c: _column([r[k] for r in rows]) for k, c in enumerate(columns)}
    return CsvSeries(columns, data, metadata, timestamp)


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return parse_csv(fh.read())
