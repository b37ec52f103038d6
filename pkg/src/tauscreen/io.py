"""File formats: numeric data CSV, dense matrix CSV, and price-table ingestion.

Data CSVs hold one observation per row. The delimiter (comma or tab) is
auto-detected from the header line, and an optional single header row of
column labels is auto-detected by its first cell being non-numeric. Values
are written with 17 significant digits so doubles round-trip exactly.

Price tables are CSVs with a leading date column and one column per ticker.
Ingestion turns T prices into T-1 log returns ``log(S[t+1] / S[t])`` and
standardizes each column to mean 0 and standard deviation 1 (sample sd,
divisor rows-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateColumnError, InvalidInputError
from .rankcorr import DataMatrix

_FMT = "%.17g"


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _detect_delimiter(header_line: str) -> str:
    return "\t" if "\t" in header_line else ","


def _split_rows(path) -> tuple[list[list[str]], str]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n").rstrip("\r") for line in fh]
    lines = [line for line in lines if line.strip()]
    if not lines:
        raise InvalidInputError(f"{path}: empty file")
    delim = _detect_delimiter(lines[0])
    return [line.split(delim) for line in lines], delim


def read_data_csv(path) -> DataMatrix:
    """Read an observation matrix; see the module docstring for the format."""
    rows, _ = _split_rows(path)
    labels = None
    if rows and not _is_number(rows[0][0]):
        labels = tuple(cell.strip() for cell in rows[0])
        rows = rows[1:]
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    width = len(rows[0])
    values = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InvalidInputError(f"{path}: row {i + 1} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            cell = cell.strip()
            if not cell or not _is_number(cell):
                raise InvalidInputError(f"{path}: row {i + 1}, column {j + 1}: bad value {cell!r}")
            values[i, j] = float(cell)
    return DataMatrix(values, labels=labels)


def write_data_csv(path, data: DataMatrix, delimiter: str = ",") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if data.labels is not None:
            fh.write(delimiter.join(data.labels) + "\n")
        for row in data.values:
            fh.write(delimiter.join(_FMT % v for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    """Read a dense header-free numeric matrix."""
    rows, _ = _split_rows(path)
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InvalidInputError(f"{path}: row {i + 1} has {len(row)} cells, expected {width}")
        try:
            out[i] = [float(cell) for cell in row]
        except ValueError as exc:
            raise InvalidInputError(f"{path}: row {i + 1}: {exc}") from exc
    return out


def write_matrix_csv(path, matrix) -> None:
    m = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in np.atleast_2d(m):
            fh.write(",".join(_FMT % v for v in row) + "\n")


@dataclass(frozen=True, eq=False)
class PriceTable:
    """Daily closing prices: T dates by p tickers, optionally with sectors."""

    dates: tuple[str, ...]
    tickers: tuple[str, ...]
    prices: np.ndarray
    sectors: tuple[str, ...] | None = None

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=np.float64)
        t, p = prices.shape
        if t != len(self.dates) or p != len(self.tickers):
            raise InvalidInputError("price matrix shape does not match dates/tickers")
        if t < 2:
            raise InvalidInputError("need at least 2 dates to form returns")
        if self.sectors is not None and len(self.sectors) != p:
            raise InvalidInputError("sector labels must match ticker count")
        object.__setattr__(self, "prices", prices)


def read_price_csv(path, sectors: dict[str, str] | None = None) -> PriceTable:
    """Read a price table; first column is the date, remaining are tickers."""
    rows, _ = _split_rows(path)
    if len(rows) < 3:
        raise InvalidInputError(f"{path}: need a header and at least 2 price rows")
    header = [cell.strip() for cell in rows[0]]
    if len(header) < 2:
        raise InvalidInputError(f"{path}: need a date column plus at least one ticker")
    tickers = tuple(header[1:])
    dates = []
    prices = np.empty((len(rows) - 1, len(tickers)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise InvalidInputError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
        dates.append(row[0].strip())
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell or not _is_number(cell):
                raise InvalidInputError(
                    f"{path}: missing or bad price at row {i + 2} ({dates[-1]}), ticker {tickers[j]}")
            value = float(cell)
            if not np.isfinite(value) or value <= 0:
                raise InvalidInputError(
                    f"{path}: nonpositive price {value} at row {i + 2} ({dates[-1]}), ticker {tickers[j]}")
            prices[i, j] = value
    sector_tuple = None
    if sectors is not None:
        missing = [t for t in tickers if t not in sectors]
        if missing:
            raise InvalidInputError(f"missing sector labels for: {missing}")
        sector_tuple = tuple(sectors[t] for t in tickers)
    return PriceTable(tuple(dates), tickers, prices, sector_tuple)


def log_returns(table: PriceTable) -> DataMatrix:
    """Raw (unstandardized) log returns log(S[t+1] / S[t])."""
    ret = np.log(table.prices[1:] / table.prices[:-1])
    return DataMatrix(ret, labels=table.tickers)


def standardize_columns(data: DataMatrix) -> DataMatrix:
    """Center each column and scale to unit sample standard deviation
    (divisor rows-1). Constant columns are rejected."""
    v = data.values
    centered = v - v.mean(axis=0)
    sd = np.sqrt(np.sum(centered**2, axis=0) / (v.shape[0] - 1))
    zero = np.flatnonzero(sd == 0.0)
    if zero.size:
        j = int(zero[0])
        raise DegenerateColumnError(
            data.column_name(j),
            f"column {data.column_name(j)!r} has zero variance after log returns")
    return DataMatrix(centered / sd, labels=data.labels)


def ingest_prices(table: PriceTable) -> DataMatrix:
    """Standardized log-return matrix from a price table."""
    return standardize_columns(log_returns(table))


def read_sector_csv(path) -> dict[str, str]:
    """Two-column ticker,sector mapping (comma or tab delimited)."""
    rows, _ = _split_rows(path)
    out = {}
    start = 1 if rows and rows[0] and rows[0][0].strip().lower() in ("ticker", "symbol") else 0
    for i, row in enumerate(rows[start:]):
        if len(row) < 2:
            raise InvalidInputError(f"{path}: row {i + 1 + start} needs ticker and sector")
        out[row[0].strip()] = row[1].strip()
    return out


def write_sector_tsv(path, table: PriceTable) -> None:
    if table.sectors is None:
        raise InvalidInputError("price table carries no sector labels")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("ticker\tsector\n")
        for ticker, sector in zip(table.tickers, table.sectors):
            fh.write(f"{ticker}\t{sector}\n")
