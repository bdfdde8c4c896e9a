"""Sums of squares by marginal-mean formulas and by Kronecker projectors."""
from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .data import BalancedLayout
from .design import AXES, DesignDims, Source, degrees_of_freedom


class Slot(enum.Enum):
    CENTER = "center"    # I - J/n
    AVERAGE = "average"  # J/n
    IDENTITY = "identity"

    def matrix(self, n: int) -> np.ndarray:
        if self is Slot.IDENTITY:
            return np.eye(n)
        avg = np.full((n, n), 1.0 / n)
        return avg if self is Slot.AVERAGE else np.eye(n) - avg

    def trace(self, n: int) -> int:
        return {Slot.CENTER: n - 1, Slot.AVERAGE: 1, Slot.IDENTITY: n}[self]

    def apply(self, arr: np.ndarray, axis: int) -> np.ndarray:
        if self is Slot.IDENTITY:
            return arr
        mean = arr.mean(axis=axis, keepdims=True)
        if self is Slot.AVERAGE:
            return np.broadcast_to(mean, arr.shape)
        return arr - mean


@dataclass(frozen=True)
class ProjectorSpec:
    """One operator per axis (block, A, B, C); their Kronecker product is a projector."""

    slots: tuple[Slot, Slot, Slot, Slot]

    def trace(self, dims: DesignDims) -> int:
        out = 1
        for slot, n in zip(self.slots, dims.shape):
            out *= slot.trace(n)
        return out

    def matrix(self, dims: DesignDims) -> np.ndarray:
        """The full (rabc x rabc) matrix; only sensible for small designs."""
        out = np.ones((1, 1))
        for slot, n in zip(self.slots, dims.shape):
            out = np.kron(out, slot.matrix(n))
        return out

    def apply(self, values: np.ndarray) -> np.ndarray:
        out = values
        for axis, slot in enumerate(self.slots):
            out = slot.apply(out, axis)
        return out


def projector(dims: DesignDims, source: Source) -> ProjectorSpec:
    # The residual operator centers over blocks and subplots and leaves the
    # A and B axes alone; this has trace ab(c-1)(r-1), the residual df.
    if source is Source.eT:
        return ProjectorSpec((Slot.CENTER, Slot.IDENTITY, Slot.IDENTITY, Slot.CENTER))
    axes = source.axes
    return ProjectorSpec(tuple(Slot.CENTER if ax in axes else Slot.AVERAGE for ax in AXES))


def ss_kronecker(layout: BalancedLayout, source: Source) -> float:
    """``y' M y`` with M applied axis by axis instead of being materialized.

    M is symmetric idempotent, so the form is evaluated as ``|My|^2``; the
    literal ``y . My`` cancels badly when the grand mean is large.
    """
    my = np.ascontiguousarray(projector(layout.dims, source).apply(layout.values)).reshape(-1)
    return float(np.dot(my, my))


def _means(y: np.ndarray) -> dict[str, np.ndarray]:
    def mean(keep: str) -> np.ndarray:
        drop = tuple(n for n, ax in enumerate(AXES) if ax not in keep)
        return y.mean(axis=drop, keepdims=True) if drop else y

    keys = ("", "h", "i", "j", "k", "hi", "hj", "ij", "ik", "jk", "hij", "ijk")
    return {key: mean(key) for key in keys}


def ss_direct(layout: BalancedLayout, source: Source) -> float:
    """Sum of squares from the marginal-mean formula of the ANOVA layout."""
    return _ss_direct_all(layout)[source]


def _ss_direct_all(layout: BalancedLayout) -> dict[Source, float]:
    y = layout.values
    r, a, b, c = layout.dims.shape
    m = _means(y)
    g = m[""]

    def sq(dev: np.ndarray) -> float:
        return float(np.sum(dev * dev))

    return {
        Source.R: a * b * c * sq(m["h"] - g),
        Source.A: b * c * r * sq(m["i"] - g),
        Source.eA: b * c * sq(m["hi"] - m["h"] - m["i"] + g),
        Source.B: a * c * r * sq(m["j"] - g),
        Source.eB: a * c * sq(m["hj"] - m["h"] - m["j"] + g),
        Source.AB: c * r * sq(m["ij"] - m["i"] - m["j"] + g),
        Source.eAB: c * sq(
            m["hij"] - m["hi"] - m["hj"] - m["ij"] + m["h"] + m["i"] + m["j"] - g
        ),
        Source.C: a * b * r * sq(m["k"] - g),
        Source.AC: b * r * sq(m["ik"] - m["i"] - m["k"] + g),
        Source.BC: a * r * sq(m["jk"] - m["j"] - m["k"] + g),
        Source.ABC: r * sq(
            m["ijk"] - m["ik"] - m["jk"] + m["k"] - m["ij"] + m["i"] + m["j"] - g
        ),
        Source.eT: sq(y - m["ijk"] - m["hij"] + m["ij"]),
    }


@dataclass(frozen=True)
class AnovaRow:
    source: Source
    df: int
    ss: float

    @property
    def ms(self) -> float:
        return self.ss / self.df


class AnovaTable:
    """Ordered ANOVA rows for one design; indexable by ``Source``."""

    def __init__(self, dims: DesignDims, rows: Iterable[AnovaRow]):
        self.dims = dims
        self.rows = tuple(rows)
        self._by_source = {row.source: row for row in self.rows}
        if len(self._by_source) != len(self.rows):
            raise ValueError("duplicate sources in ANOVA table")

    @classmethod
    def from_ms(cls, dims: DesignDims, ms: Mapping[Source, float]) -> AnovaTable:
        """Rebuild a strip-split table from a set of mean squares."""
        rows = []
        for source in Source:
            df = degrees_of_freedom(dims, source)
            rows.append(AnovaRow(source, df, float(ms[source]) * df))
        return cls(dims, rows)

    def __getitem__(self, source: Source) -> AnovaRow:
        return self._by_source[source]

    def __contains__(self, source: Source) -> bool:
        return source in self._by_source

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def ms(self, source: Source) -> float:
        return self._by_source[source].ms

    def df(self, source: Source) -> int:
        return self._by_source[source].df

    @property
    def total_ss(self) -> float:
        return float(sum(row.ss for row in self.rows))

    @property
    def total_df(self) -> int:
        return sum(row.df for row in self.rows)

    def to_records(self) -> list[dict]:
        return [
            {"source": row.source.value, "df": row.df, "ss": row.ss, "ms": row.ms}
            for row in self.rows
        ]

    def to_json(self, **kwargs) -> str:
        return json.dumps({"dims": str(self.dims), "rows": self.to_records()}, **kwargs)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("source", "df", "ss", "ms"))
        for rec in self.to_records():
            writer.writerow((rec["source"], rec["df"], repr(rec["ss"]), repr(rec["ms"])))
        return out.getvalue()

    def to_text(self) -> str:
        lines = [f"{'Source':<8}{'df':>5}{'SS':>14}{'MS':>12}"]
        for row in self.rows:
            lines.append(f"{row.source.value:<8}{row.df:>5}{row.ss:>14.4f}{row.ms:>12.4f}")
        return "\n".join(lines)

    def __repr__(self):
        return f"AnovaTable(dims={self.dims}, rows={len(self.rows)})"


def anova_table(layout: BalancedLayout) -> AnovaTable:
    ss = _ss_direct_all(layout)
    rows = [AnovaRow(s, degrees_of_freedom(layout.dims, s), ss[s]) for s in Source]
    return AnovaTable(layout.dims, rows)


def total_corrected_ss(layout: BalancedLayout) -> float:
    dev = layout.values - layout.values.mean()
    return float(np.sum(dev * dev))
