"""Balanced layouts: CSV ingestion, serialization and marginal means."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, TextIO

import numpy as np

from .design import AXES, DesignDims

CSV_HEADER = ("block", "A", "B", "C", "y")


class LayoutError(ValueError):
    """Base class for ingestion failures."""


class ParseError(LayoutError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DuplicateCell(LayoutError):
    def __init__(self, cell: tuple[int, int, int, int], line: int | None = None):
        self.cell = cell
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"cell (h,i,j,k)={cell} appears more than once{where}")


class MissingCell(LayoutError):
    def __init__(self, cell: tuple[int, int, int, int]):
        self.cell = cell
        super().__init__(f"cell (h,i,j,k)={cell} has no observation")


class TooFewLevels(LayoutError):
    pass


class IndexOutOfRange(IndexError):
    pass


@dataclass(frozen=True, eq=False)
class BalancedLayout:
    """Dense response array ``values[h, i, j, k]`` with level labels per axis."""

    dims: DesignDims
    labels: tuple[tuple[str, ...], ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.dims.shape:
            raise ValueError(f"values shape {values.shape} does not match dims {self.dims.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("layout values must be finite")
        if len(self.labels) != 4 or tuple(len(lab) for lab in self.labels) != self.dims.shape:
            raise ValueError("labels must give one list per axis matching dims")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(tuple(str(x) for x in lab) for lab in self.labels))

    @classmethod
    def from_array(cls, values, labels=None) -> BalancedLayout:
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 4:
            raise ValueError("expected a 4-index array (h, i, j, k)")
        dims = DesignDims(*(int(n) for n in values.shape))
        if labels is None:
            labels = tuple(
                tuple(f"{prefix}{n + 1}" for n in range(size))
                for prefix, size in zip(("R", "A", "B", "C"), values.shape)
            )
        return cls(dims, labels, values)

    def __eq__(self, other):
        if not isinstance(other, BalancedLayout):
            return NotImplemented
        return (
            self.dims == other.dims
            and self.labels == other.labels
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def flat(self) -> np.ndarray:
        """Responses in (h, i, j, k) row-major order."""
        return self.values.reshape(-1)

    def grand_mean(self) -> float:
        return float(self.values.mean())

    def to_csv(self, stream: TextIO | None = None) -> str | None:
        """Write the layout in the ingestion format.

        Values are written with ``repr`` so a round trip is lossless.
        Returns the text when ``stream`` is None.
        """
        own = stream is None
        out = io.StringIO() if own else stream
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        lh, la, lb, lc = self.labels
        for (h, i, j, k), y in np.ndenumerate(self.values):
            writer.writerow((lh[h], la[i], lb[j], lc[k], repr(float(y))))
        return out.getvalue() if own else None


def ingest_csv(stream: TextIO | str) -> BalancedLayout:
    """Read a ``block,A,B,C,y`` CSV into a balanced layout.

    Labels keep first-appearance order.  Every (block, A, B, C) combination
    must occur exactly once.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "empty input") from None
    columns = [col.strip().lower() for col in header]
    wanted = [name.lower() for name in CSV_HEADER]
    try:
        positions = [columns.index(name) for name in wanted]
    except ValueError:
        raise ParseError(1, f"header must contain columns {','.join(CSV_HEADER)}, got {header}") from None

    levels: list[dict[str, int]] = [{}, {}, {}, {}]
    cells: dict[tuple[int, int, int, int], float] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not field.strip() for field in row):
            continue
        if len(row) < len(columns):
            raise ParseError(line, f"expected {len(columns)} fields, got {len(row)}")
        keys = [row[p].strip() for p in positions[:4]]
        if any(key == "" for key in keys):
            raise ParseError(line, "empty factor label")
        raw_y = row[positions[4]].strip()
        try:
            y = float(raw_y)
        except ValueError:
            raise ParseError(line, f"non-numeric response {raw_y!r}") from None
        if not math.isfinite(y):
            raise ParseError(line, f"non-finite response {raw_y!r}")
        cell = tuple(levels[ax].setdefault(key, len(levels[ax])) for ax, key in enumerate(keys))
        if cell in cells:
            raise DuplicateCell(cell, line)
        cells[cell] = y

    counts = [len(lv) for lv in levels]
    for name, n in zip(("block", "A", "B", "C"), counts):
        if n < 2:
            raise TooFewLevels(f"column {name} has {n} distinct level(s); at least 2 required")

    values = np.full(counts, np.nan)
    for cell, y in cells.items():
        values[cell] = y
    if len(cells) != values.size:
        missing = tuple(int(x) for x in np.argwhere(np.isnan(values))[0])
        raise MissingCell(missing)
    labels = tuple(tuple(lv) for lv in levels)
    return BalancedLayout(DesignDims(*counts), labels, values)


def read_csv(path) -> BalancedLayout:
    with open(path, newline="", encoding="utf-8") as fh:
        return ingest_csv(fh)


def load_beans() -> BalancedLayout:
    """The bean-weight field trial: 2 blocks x 4 water layers x 3 tillages x 3 N doses."""
    text = resources.files("stripsplit").joinpath("data/beans.csv").read_text(encoding="utf-8")
    return ingest_csv(text)


def marginal_mean(layout: BalancedLayout, at: Mapping[str, int] | None = None) -> float:
    """Mean over all indices not fixed by ``at``.

    ``at`` maps kept axis names (``"h"``, ``"i"``, ``"j"``, ``"k"``) to index
    values; an empty mapping gives the grand mean.
    """
    at = dict(at or {})
    index: list[object] = [slice(None)] * 4
    for axis, value in at.items():
        if axis not in AXES:
            raise KeyError(f"unknown axis {axis!r}; expected one of {AXES}")
        pos = AXES.index(axis)
        size = layout.dims.shape[pos]
        if not (0 <= value < size):
            raise IndexOutOfRange(f"index {axis}={value} outside 0..{size - 1}")
        index[pos] = value
    return float(np.mean(layout.values[tuple(index)]))


def iter_rows(layout: BalancedLayout) -> Iterable[tuple[str, str, str, str, float]]:
    lh, la, lb, lc = layout.labels
    for (h, i, j, k), y in np.ndenumerate(layout.values):
        yield lh[h], la[i], lb[j], lc[k], float(y)
