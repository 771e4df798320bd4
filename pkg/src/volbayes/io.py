"""CSV ingestion and writing.

Input files carry two columns, ``date,price`` or ``date,log_price``;
price values are converted to logs on read. Dates are opaque labels that
must be strictly increasing as strings (ISO-style zero-padded labels sort
correctly). All floats are written with round-trip precision so reruns
are byte-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .series import MIN_FIT_LENGTH, PriceSeries


class IngestError(ValueError):
    pass


def ingest_prices(path: str | Path) -> PriceSeries:
    """Read a price CSV into a :class:`PriceSeries`."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        cols = [c.strip().lower() for c in header]
        if sorted(cols) == ["date", "price"]:
            value_col, is_log = cols.index("price"), False
        elif sorted(cols) == ["date", "log_price"]:
            value_col, is_log = cols.index("log_price"), True
        else:
            raise IngestError(
                f"{path}: expected columns date,price or date,log_price; got {header}"
            )
        date_col = cols.index("date")

        dates: list[str] = []
        values: list[float] = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise IngestError(f"{path}: row {row_no} has {len(row)} fields, expected 2")
            date = row[date_col].strip()
            if dates and date <= dates[-1]:
                raise IngestError(f"{path}: non-chronological at row {row_no}")
            try:
                value = float(row[value_col])
            except ValueError:
                raise IngestError(
                    f"{path}: non-numeric value {row[value_col]!r} at row {row_no}"
                ) from None
            if not np.isfinite(value):
                raise IngestError(f"{path}: non-finite value at row {row_no}")
            if not is_log and value <= 0.0:
                raise IngestError(f"{path}: non-positive price at row {row_no}")
            dates.append(date)
            values.append(value)

    if len(values) < MIN_FIT_LENGTH:
        raise IngestError(f"{path}: {len(values)} rows; need at least {MIN_FIT_LENGTH}")
    log_prices = np.array(values) if is_log else np.log(values)
    return PriceSeries(log_prices, tuple(dates))


def default_dates(n: int) -> tuple[str, ...]:
    return tuple(f"t{k:06d}" for k in range(1, n + 1))


def fmt(value) -> str:
    """Round-trip text for one CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str | Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_price_csv(path: str | Path, series: PriceSeries) -> None:
    dates = series.dates or default_dates(len(series))
    write_csv(path, ["date", "log_price"], zip(dates, series.log_prices))
