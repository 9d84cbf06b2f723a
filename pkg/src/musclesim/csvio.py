"""CSV tables with shortest round-trip float formatting."""
import csv
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import MuscleSimError


@dataclass
class Table:
    """Named columns of equal length; entries are floats or strings."""

    header: List[str]
    rows: list

    def __post_init__(self):
        width = len(self.header)
        if len(set(self.header)) != width:
            raise MuscleSimError(f"duplicate column names in {self.header}")
        for row in self.rows:
            if len(row) != width:
                raise MuscleSimError(f"row of width {len(row)} under a {width}-column header")

    def column(self, name):
        i = self.header.index(name)
        return np.array([r[i] for r in self.rows])


def format_value(v):
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_csv(path, table: Table):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([format_value(v) for v in row])


def _parse(s):
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path):
    """Read a table written by :func:`write_csv`; numeric cells become floats."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        try:
            header = next(r)
        except StopIteration:
            raise MuscleSimError(f"{path}: empty CSV, header row missing") from None
        rows = [[_parse(c) for c in row] for row in r]
    return Table(header, rows)


def table_from_columns(header: Sequence[str], *columns):
    cols = [np.asarray(c).tolist() if not isinstance(c, list) else c for c in columns]
    return Table(list(header), [list(r) for r in zip(*cols)])
