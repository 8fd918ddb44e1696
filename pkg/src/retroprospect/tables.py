"""CSV ingestion and emission for time-series tables."""

import csv
import datetime as dt
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CsvFormatError, ValidationError
from .evolution import Evolution

__all__ = [
    "DIALECTS",
    "MISSING_POLICIES",
    "SeriesTable",
    "load_csv",
    "write_csv",
    "format_number",
    "open_csv_writer",
]

# (field separator, decimal mark)
DIALECTS = {
    "standard": (",", "."),
    "european": (";", ","),
}

MISSING_POLICIES = ("error", "drop-row", "linear-interpolate")

_MISSING_TOKENS = {"", "na", "n/a", "nan", "null", "none"}


def format_number(x):
    """Shortest round-trip decimal rendering of a float ('.' decimal mark)."""
    x = float(x)
    if x == 0:
        return "0.0"
    return repr(x)


def open_csv_writer(path):
    """Open ``path`` for writing UTF-8 CSV with ``\\n`` line endings."""
    handle = open(path, "w", encoding="utf-8", newline="")
    return handle, csv.writer(handle, lineterminator="\n")


@dataclass
class SeriesTable:
    """Dated numeric columns.

    ``dates`` are kept as the original labels; ``date_values`` holds their
    numeric reading (row index for integer labels, days since 0001-01-01
    for calendar dates) and is strictly increasing.
    """

    date_column: str
    dates: list
    date_values: np.ndarray
    columns: dict
    missing: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.dates)

    @property
    def names(self):
        return list(self.columns)

    def evolution(self, column, calendar_time=False):
        """Scalar evolution of one column.

        By default the time grid is the row index (one step per row); with
        ``calendar_time`` it is the numeric date reading, so weekend gaps
        lengthen the step.
        """
        if column not in self.columns:
            raise ValidationError(f"unknown column {column!r}")
        values = self.columns[column]
        if np.any(np.isnan(values)):
            raise ValidationError(f"column {column!r} has missing values")
        times = self.date_values if calendar_time else np.arange(len(values), dtype=np.float64)
        return Evolution(times, values)


def _parse_date(label, dialect, line):
    text = label.strip()
    try:
        return float(int(text))
    except ValueError:
        pass
    try:
        stamp = dt.datetime.fromisoformat(text)
    except ValueError:
        stamp = None
        if dialect == "european":
            try:
                stamp = dt.datetime.strptime(text, "%d/%m/%Y")
            except ValueError:
                pass
    if stamp is None:
        raise CsvFormatError(f"unparseable date {label!r}", line)
    midnight = stamp.replace(hour=0, minute=0, second=0, microsecond=0)
    return stamp.toordinal() + (stamp - midnight).total_seconds() / 86400.0


def _parse_number(text, decimal, line, column):
    token = text.strip()
    if token.lower() in _MISSING_TOKENS:
        return math.nan
    if decimal != ".":
        if "." in token:
            raise CsvFormatError(f"unexpected '.' in {token!r} (column {column!r})", line)
        token = token.replace(decimal, ".")
    try:
        value = float(token)
    except ValueError:
        raise CsvFormatError(f"non-numeric value {text!r} in column {column!r}", line) from None
    if not math.isfinite(value):
        raise CsvFormatError(f"non-finite value {text!r} in column {column!r}", line)
    return value


def load_csv(path, date_column=None, value_columns=None, missing_policy="error",
             dialect="standard"):
    """Read a dated table.

    Args:
        path: CSV file with a header row.
        date_column: name of the date column; defaults to the first column.
        value_columns: names of the numeric columns to keep; defaults to
            every other column.
        missing_policy: ``"error"``, ``"drop-row"`` or ``"linear-interpolate"``
            (linear in the numeric date reading).
        dialect: key of :data:`DIALECTS`.

    Raises:
        CsvFormatError: malformed row, unparseable cell, or missing data
            under the ``"error"`` policy; the message names the line.
        ValidationError: unknown column, unknown policy or dialect, or
            dates that are not strictly increasing.
    """
    if missing_policy not in MISSING_POLICIES:
        raise ValidationError(f"unknown missing-data policy {missing_policy!r}")
    if dialect not in DIALECTS:
        raise ValidationError(f"unknown input dialect {dialect!r}")
    sep, decimal = DIALECTS[dialect]

    with open(path, encoding="utf-8-sig", newline="") as handle:
        reader = csv.reader(handle, delimiter=sep)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError("empty file: header row missing", 1) from None
        date_column = date_column or header[0]
        if value_columns is None:
            value_columns = [h for h in header if h != date_column]
        for name in [date_column, *value_columns]:
            if name not in header:
                raise ValidationError(f"unknown column {name!r}; header is {header}")
        date_pos = header.index(date_column)
        positions = [header.index(name) for name in value_columns]

        lines, dates, date_values, rows = [], [], [], []
        for record in reader:
            line = reader.line_num
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise CsvFormatError(
                    f"expected {len(header)} fields, found {len(record)}", line)
            label = record[date_pos].strip()
            lines.append(line)
            dates.append(label)
            date_values.append(_parse_date(label, dialect, line))
            rows.append([_parse_number(record[p], decimal, line, header[p]) for p in positions])

    date_values = np.array(date_values, dtype=np.float64)
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(value_columns))
    bad = np.nonzero(np.diff(date_values) <= 0)[0]
    if bad.size:
        k = bad[0] + 1
        raise ValidationError(f"line {lines[k]}: dates not strictly increasing at {dates[k]!r}")

    holes = np.isnan(data)
    if holes.any():
        if missing_policy == "error":
            r, col = np.argwhere(holes)[0]
            raise CsvFormatError(f"missing value in column {value_columns[col]!r}", lines[r])
        if missing_policy == "drop-row":
            keep = ~holes.any(axis=1)
            dates = [d for d, k in zip(dates, keep) if k]
            date_values, data, holes = date_values[keep], data[keep], holes[keep]
        else:
            for col in range(data.shape[1]):
                hole = holes[:, col]
                if not hole.any():
                    continue
                if hole[0] or hole[-1]:
                    r = 0 if hole[0] else len(hole) - 1
                    raise CsvFormatError(
                        f"cannot interpolate missing edge value in column {value_columns[col]!r}",
                        lines[r])
                data[hole, col] = np.interp(
                    date_values[hole], date_values[~hole], data[~hole, col])

    return SeriesTable(
        date_column=date_column,
        dates=dates,
        date_values=date_values,
        columns={name: data[:, k].copy() for k, name in enumerate(value_columns)},
        missing={name: holes[:, k].copy() for k, name in enumerate(value_columns)},
    )


def write_csv(table, path):
    """Write a table in the standard dialect; missing cells are left empty."""
    handle, writer = open_csv_writer(path)
    with handle:
        writer.writerow([table.date_column, *table.names])
        for r, label in enumerate(table.dates):
            row = [label]
            for name in table.names:
                value = table.columns[name][r]
                row.append("" if math.isnan(value) else format_number(value))
            writer.writerow(row)
