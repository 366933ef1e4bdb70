"""Daily OHLCV ingestion: CSV parsing, cleaning, summary statistics, sectors.

The input layout is one bar per line::

    date,symbol,open,close,low,high,volume
    02/01/2001,GTB,4.17,4.17,4.1,4.17,1321000

Dates are day-first (``dd/mm/yyyy``); ISO ``yyyy-mm-dd`` is accepted too and
is what every writer in this package emits.
"""

import csv
import datetime as dt
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    BadHeaderError,
    BadRowError,
    DataError,
    EmptyDatasetError,
    MissingFileError,
    MixedSymbolsError,
)

COLUMNS = ("date", "symbol", "open", "close", "low", "high", "volume")
PRICE_COLUMNS = ("open", "close", "low", "high")
NUMERIC_COLUMNS = PRICE_COLUMNS + ("volume",)

# rejection reason codes
MISSING_FIELD = "MissingField"
NON_POSITIVE_PRICE = "NonPositivePrice"
NEGATIVE_VOLUME = "NegativeVolume"
BRACKET_VIOLATION = "BracketViolation"
DUPLICATE_DATE = "DuplicateDate"


@dataclass(frozen=True)
class OhlcvRow:
    """One trading day. Fields are ``None`` when the source cell was empty."""

    date: dt.date | None
    symbol: str | None
    open: float | None
    close: float | None
    low: float | None
    high: float | None
    volume: int | None
    line: int = field(default=0, compare=False)
    raw: str = field(default="", compare=False)

    def value(self, column):
        return getattr(self, column)

    def is_complete(self):
        return all(getattr(self, c) is not None for c in COLUMNS)


@dataclass(frozen=True)
class Rejection:
    line: int
    reason: str
    raw: str


@dataclass(frozen=True)
class TimeSeriesFrame:
    symbol: str
    rows: tuple
    rejected: tuple = ()

    def __len__(self):
        return len(self.rows)

    @property
    def dates(self):
        return [r.date for r in self.rows]

    def column(self, name):
        """Numeric column as a float64 array."""
        if name not in NUMERIC_COLUMNS:
            raise KeyError(f"unknown numeric column {name!r}")
        return np.array([r.value(name) for r in self.rows], dtype=np.float64)

    def columns(self, names):
        """Stack several numeric columns into an ``(n, len(names))`` array."""
        return np.column_stack([self.column(n) for n in names]) if names else np.empty((len(self), 0))


def parse_date(text):
    text = text.strip()
    if "/" in text:
        day, month, year = text.split("/")
        return dt.date(int(year), int(month), int(day))
    return dt.date.fromisoformat(text)


def _parse_volume(text):
    try:
        return int(text)
    except ValueError:
        v = float(text)
        if not v.is_integer():
            raise
        return int(v)


def _parse_field(name, text, line):
    text = text.strip()
    if text == "":
        return None
    try:
        if name == "date":
            return parse_date(text)
        if name == "symbol":
            return text
        if name == "volume":
            return _parse_volume(text)
        value = float(text)
    except ValueError:
        raise BadRowError(line, name, text) from None
    if not math.isfinite(value):
        raise BadRowError(line, name, text)
    return value


def parse_csv(path, symbol=None):
    """Read an OHLCV file into a date-sorted frame. No cleaning is applied.

    ``symbol`` keeps only rows for that ticker (case-insensitive); without it
    the file must hold a single ticker.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        lines = fh.read().splitlines()
    records = [r for r in csv.reader(lines)]
    if not records:
        raise BadHeaderError([], COLUMNS)
    header = [h.strip().lower() for h in records[0]]
    if sorted(header) != sorted(COLUMNS):
        raise BadHeaderError(header, COLUMNS)
    order = [header.index(c) for c in COLUMNS]

    rows = []
    for idx, rec in enumerate(records[1:], start=1):
        line_no = idx + 1
        if not any(cell.strip() for cell in rec):
            continue
        if len(rec) != len(COLUMNS):
            raise BadRowError(line_no, "<row>", lines[idx])
        values = {c: _parse_field(c, rec[j], line_no) for c, j in zip(COLUMNS, order)}
        rows.append(OhlcvRow(**values, line=line_no, raw=lines[idx]))

    if symbol is not None:
        wanted = symbol.strip().lower()
        rows = [r for r in rows if r.symbol is None or r.symbol.lower() == wanted]
    tickers = {r.symbol for r in rows if r.symbol is not None}
    if symbol is None and len(tickers) > 1:
        raise MixedSymbolsError(f"{path} holds several tickers {sorted(tickers)}; pick one with a symbol filter")
    if not rows or not tickers:
        raise EmptyDatasetError(f"{path} has no data rows" + (f" for {symbol}" if symbol else ""))

    # missing dates sort last; ties keep file order so "first occurrence" is well defined
    rows.sort(key=lambda r: (r.date is None, r.date or dt.date.min))
    name = symbol.strip() if symbol is not None else tickers.pop()
    return TimeSeriesFrame(symbol=name, rows=tuple(rows))


def _rejection_reason(row, strict):
    if not row.is_complete():
        return MISSING_FIELD
    if any(row.value(c) <= 0 for c in PRICE_COLUMNS):
        return NON_POSITIVE_PRICE
    if row.volume < 0:
        return NEGATIVE_VOLUME
    if strict and (row.low > min(row.open, row.close) or row.high < max(row.open, row.close)):
        return BRACKET_VIOLATION
    return None


def clean(frame, strict=False):
    """Drop incomplete, non-positive, negative-volume and duplicate-date rows.

    ``strict`` also drops bars whose low/high do not bracket open and close.
    Rejections accumulate on the returned frame, so cleaning twice is a no-op.
    """
    kept, rejected = [], list(frame.rejected)
    seen = set()
    for row in frame.rows:
        reason = _rejection_reason(row, strict)
        if reason is None and row.date in seen:
            reason = DUPLICATE_DATE
        if reason is not None:
            rejected.append(Rejection(row.line, reason, row.raw))
            continue
        seen.add(row.date)
        kept.append(row)
    if not kept:
        raise EmptyDatasetError(f"no rows of {frame.symbol} survived cleaning ({len(rejected)} rejected)")
    return replace(frame, rows=tuple(kept), rejected=tuple(rejected))


def _fmt_number(value):
    return repr(float(value)) if not isinstance(value, int) else str(value)


def write_csv(frame, path):
    """Write a frame in the input layout with ISO dates."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in frame.rows:
            w.writerow([
                "" if r.date is None else r.date.isoformat(),
                r.symbol or "",
                *("" if r.value(c) is None else _fmt_number(r.value(c)) for c in NUMERIC_COLUMNS),
            ])


def write_rejections(frame, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row_number", "reason", "raw_line"])
        for rej in frame.rejected:
            w.writerow([rej.line, rej.reason, rej.raw])


@dataclass(frozen=True)
class ColumnStats:
    count: int
    mean: float
    std: float
    min: float
    q25: float
    q50: float
    q75: float
    max: float


STAT_ROWS = (("count", "count"), ("mean", "mean"), ("std", "std"), ("min", "min"),
             ("25%", "q25"), ("50%", "q50"), ("75%", "q75"), ("max", "max"))


@dataclass(frozen=True)
class SummaryStats:
    columns: dict

    def __getitem__(self, name):
        return self.columns[name]

    def to_text(self):
        """Describe-style table: statistics down, columns across."""
        names = list(self.columns)
        width = 14
        lines = [" " * 6 + "".join(f"{n:>{width}}" for n in names)]
        for label, attr in STAT_ROWS:
            cells = []
            for n in names:
                v = getattr(self.columns[n], attr)
                cells.append(f"{v:>{width}.6f}" if abs(v) < 1e6 else f"{v:>{width}.6e}")
            lines.append(f"{label:<6}" + "".join(cells))
        return "\n".join(lines)


def column_stats(values):
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise EmptyDatasetError("cannot summarise an empty column")
    q25, q50, q75 = np.percentile(x, [25, 50, 75])
    return ColumnStats(
        count=int(x.size),
        mean=float(x.mean()),
        std=float(x.std(ddof=1)) if x.size > 1 else 0.0,
        min=float(x.min()),
        q25=float(q25),
        q50=float(q50),
        q75=float(q75),
        max=float(x.max()),
    )


def summary_stats(frame):
    if len(frame) == 0:
        raise EmptyDatasetError(f"frame for {frame.symbol} is empty")
    return SummaryStats({c: column_stats(frame.column(c)) for c in NUMERIC_COLUMNS})


class SectorRegistry:
    """Sector name -> tickers, with case-insensitive reverse lookup."""

    def __init__(self, sectors):
        self.sectors = {name: list(tickers) for name, tickers in sectors.items()}
        self._index = {}
        for name, tickers in self.sectors.items():
            for t in tickers:
                key = t.strip().lower()
                if key in self._index:
                    raise DataError(f"ticker {t!r} listed under both {self._index[key]!r} and {name!r}")
                self._index[key] = name

    @classmethod
    def from_text(cls, text):
        sectors = {}
        for line in text.splitlines():
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            name, _, tickers = line.partition("\t")
            sectors[name.strip()] = [t.strip() for t in tickers.split(",") if t.strip()]
        return cls(sectors)

    @classmethod
    def load(cls, path=None):
        """Load a registry file, or the bundled default table."""
        if path is None:
            text = resources.files("lstmcast").joinpath("data/sectors.tsv").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls.from_text(text)

    def sector_of(self, ticker):
        return self._index.get(ticker.strip().lower())


def sector_of(registry, ticker):
    """Sector name for ``ticker``, or ``None`` if the registry does not list it."""
    return registry.sector_of(ticker)
