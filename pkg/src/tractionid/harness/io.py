"""CSV logs.

Comma separated, header row, UTF-8, LF line endings, floats written with
``repr`` so values round-trip exactly. Columns prefixed ``truth_`` carry
simulation ground truth; the estimator path never reads them.
"""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..estimator import STATE_NAMES, SensorRecord

SENSOR_COLUMNS = (
    ["timestamp"]
    + [f"omega{i}" for i in range(1, 5)]
    + ["v"]
    + [f"M{i}" for i in range(1, 5)]
    + ["F_zf", "F_dx"]
)
TRUTH_COLUMNS = (
    [f"truth_mu{i}" for i in range(1, 5)]
    + ["truth_rho_s"]
    + [f"truth_s{i}" for i in range(1, 5)]
    + ["truth_position", "truth_soil"]
)
ESTIMATE_COLUMNS = (
    ["timestamp"]
    + list(STATE_NAMES)
    + [f"var_{n}" for n in STATE_NAMES]
    + [f"s{i}" for i in range(1, 5)]
    + ["lambda", "adaptation"]
)
STRING_COLUMNS = {"truth_soil", "label", "source", "soil", "name", "detail"}


class Table:
    """Named columns of equal length; numeric columns are float arrays."""

    def __init__(self, columns=None):
        self.columns = {}
        for name, values in (columns or {}).items():
            self[name] = values

    def __setitem__(self, name, values):
        if name in STRING_COLUMNS or (len(values) and isinstance(values[0], str)):
            self.columns[name] = list(values)
        else:
            self.columns[name] = np.asarray(values, dtype=float)

    def __getitem__(self, name):
        return self.columns[name]

    def __contains__(self, name):
        return name in self.columns

    def __len__(self):
        if not self.columns:
            return 0
        return len(next(iter(self.columns.values())))

    @property
    def names(self):
        return list(self.columns)

    def select(self, mask):
        mask = np.asarray(mask, dtype=bool)
        out = Table()
        for name, col in self.columns.items():
            if isinstance(col, list):
                out.columns[name] = [c for c, keep in zip(col, mask) if keep]
            else:
                out.columns[name] = col[mask]
        return out


def _fmt(value):
    if isinstance(value, str):
        return value
    value = float(value)
    if value == 0.0:
        return "0.0"
    return repr(value)


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def table_to_csv_text(table: Table, names=None) -> str:
    names = names or table.names
    cols = [table[n] for n in names]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in zip(*cols):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, table: Table, names=None):
    atomic_write_text(path, table_to_csv_text(table, names))


def read_csv(path, required=()) -> Table:
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"{path}: cannot read: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}:1: missing header row") from None
        except csv.Error as exc:
            raise DataError(f"{path}:1: {exc}") from None
        if len(set(header)) != len(header):
            raise DataError(f"{path}:1: duplicate column names")
        missing = [c for c in required if c not in header]
        if missing:
            raise DataError(f"{path}:1: missing required columns: {', '.join(missing)}")
        data = {name: [] for name in header}
        try:
            for row in reader:
                lineno = reader.line_num
                if not row:
                    continue
                if len(row) != len(header):
                    raise DataError(
                        f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
                for name, cell in zip(header, row):
                    if name in STRING_COLUMNS:
                        data[name].append(cell)
                        continue
                    try:
                        value = float(cell)
                    except ValueError:
                        raise DataError(
                            f"{path}:{lineno}: column {name!r}: not a number: {cell!r}") from None
                    if not math.isfinite(value):
                        raise DataError(f"{path}:{lineno}: column {name!r}: non-finite value")
                    data[name].append(value)
        except csv.Error as exc:
            raise DataError(f"{path}:{reader.line_num}: {exc}") from None
    table = Table()
    for name, values in data.items():
        if name in STRING_COLUMNS:
            table.columns[name] = values
        else:
            table.columns[name] = np.asarray(values, dtype=float)
    return table


def sensor_records(table: Table, source="<log>"):
    """Estimator-facing view of a sensor log; ignores every truth column."""
    missing = [c for c in SENSOR_COLUMNS if c not in table]
    if missing:
        raise DataError(f"{source}:1: missing sensor columns: {', '.join(missing)}")
    cols = [table[c] for c in SENSOR_COLUMNS]
    records = []
    prev = -math.inf
    for k, row in enumerate(zip(*cols)):
        t = float(row[0])
        if t <= prev:
            raise DataError(f"{source}:{k + 2}: timestamps must be strictly increasing")
        prev = t
        records.append(SensorRecord(t, tuple(row[1:5]), row[5], tuple(row[6:10]), row[10], row[11]))
    return records
