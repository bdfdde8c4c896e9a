"""Re-analysis of a strip-split layout as a factorial and as a split-split plot.

Both alternatives regroup the same orthogonal decomposition: treatment sums
of squares are unchanged and only the error lines are pooled.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

from .data import BalancedLayout
from .design import ModelVariant, Source
from .distributions import f_upper_tail
from .f_tests import f_test_plan
from .sums_of_squares import AnovaRow, AnovaTable, anova_table

S = Source
TREATMENTS = (S.A, S.B, S.AB, S.C, S.AC, S.BC, S.ABC)


@dataclass(frozen=True)
class FRow:
    source: Source
    f_value: float
    df1: float
    df2: float
    p_value: float
    denominator: tuple[Source, ...]


@dataclass(frozen=True)
class DesignAnalysis:
    design: str
    table: AnovaTable
    tests: dict[Source, FRow]

    def significant(self, source: Source, alpha: float) -> bool | None:
        test = self.tests.get(source)
        return None if test is None else test.p_value < alpha


def _pool(table: AnovaTable, label: Source, members) -> AnovaRow:
    return AnovaRow(label, sum(table.df(s) for s in members), sum(table[s].ss for s in members))


def _ratio(table: AnovaTable, source: Source, error: Source) -> FRow:
    num, den = table.ms(source), table.ms(error)
    df1, df2 = table.df(source), table.df(error)
    if den > 0:
        f = num / den
        p = 1.0 if f == 0 else f_upper_tail(f, df1, df2)
    else:
        # degenerate data (e.g. constant): report rather than raise
        f = math.inf if num > 0 else math.nan
        p = 0.0 if num > 0 else math.nan
    return FRow(source, f, df1, df2, p, (error,))


def strip_split_analysis(layout: BalancedLayout) -> DesignAnalysis:
    """The fixed-effects strip-split tests; every treatment ratio is simple."""
    table = anova_table(layout)
    tests = {}
    for spec in f_test_plan(ModelVariant.parse("FFF")):
        if spec.source in TREATMENTS:
            tests[spec.source] = _ratio(table, spec.source, spec.denominator[0])
    return DesignAnalysis("strip-split", table, tests)


def factorial_anova(layout: BalancedLayout) -> DesignAnalysis:
    """Three-way factorial in blocks: all four error lines pooled into one residual."""
    base = anova_table(layout)
    rows = [base[s] for s in (S.R, S.A, S.B, S.AB, S.C, S.AC, S.BC, S.ABC)]
    rows.append(_pool(base, S.eT, (S.eA, S.eB, S.eAB, S.eT)))
    table = AnovaTable(base.dims, rows)
    tests = {s: _ratio(table, s, S.eT) for s in TREATMENTS}
    return DesignAnalysis("factorial", table, tests)


def split_split_anova(layout: BalancedLayout, error_strata: bool = False) -> DesignAnalysis:
    """Split-split plot: the B-by-block error is absorbed into e_AB.

    By default every treatment is tested against the subplot residual, which
    is the convention of the reference bean-data comparison.  With
    ``error_strata=True`` A is tested against e_A and B, AB against the pooled
    e_AB instead.
    """
    base = anova_table(layout)
    rows = [base[S.R], base[S.A], base[S.eA], base[S.B], base[S.AB]]
    rows.append(_pool(base, S.eAB, (S.eB, S.eAB)))
    rows += [base[s] for s in (S.C, S.AC, S.BC, S.ABC, S.eT)]
    table = AnovaTable(base.dims, rows)
    tests = {s: _ratio(table, s, S.eT) for s in TREATMENTS}
    if error_strata:
        tests[S.A] = _ratio(table, S.A, S.eA)
        tests[S.B] = _ratio(table, S.B, S.eAB)
        tests[S.AB] = _ratio(table, S.AB, S.eAB)
    return DesignAnalysis("split-split", table, tests)


@dataclass(frozen=True)
class Comparison:
    analyses: tuple[DesignAnalysis, ...]
    alpha: float

    def divergent(self) -> list[Source]:
        """Treatment sources whose significance at alpha differs between designs."""
        out = []
        for source in TREATMENTS:
            flags = {a.significant(source, self.alpha) for a in self.analyses}
            flags.discard(None)
            if len(flags) > 1:
                out.append(source)
        return out

    def divergence_notes(self) -> list[str]:
        notes = []
        for source in self.divergent():
            verdicts = ", ".join(
                f"{a.design}: {'significant' if a.significant(source, self.alpha) else 'not significant'}"
                for a in self.analyses
            )
            notes.append(f"{source.value} at alpha={self.alpha:g} -> {verdicts}")
        return notes

    def to_records(self) -> list[dict]:
        recs = []
        for analysis in self.analyses:
            for row in analysis.table:
                test = analysis.tests.get(row.source)
                recs.append({
                    "design": analysis.design,
                    "source": row.source.value,
                    "df": row.df,
                    "ss": row.ss,
                    "ms": row.ms,
                    "f": None if test is None else test.f_value,
                    "p": None if test is None else test.p_value,
                })
        return recs

    def to_json(self, **kwargs) -> str:
        return json.dumps(
            {"alpha": self.alpha, "rows": self.to_records(),
             "divergent": [s.value for s in self.divergent()]},
            **kwargs,
        )

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("design", "source", "df", "ss", "ms", "f", "p"))
        for rec in self.to_records():
            writer.writerow(tuple("" if v is None else v for v in rec.values()))
        return out.getvalue()

    def to_text(self) -> str:
        blocks = []
        for analysis in self.analyses:
            lines = [analysis.design, f"{'Source':<8}{'df':>5}{'MS':>12}{'F':>10}{'p':>10}"]
            for row in analysis.table:
                test = analysis.tests.get(row.source)
                tail = f"{test.f_value:>10.2f}{test.p_value:>10.4f}" if test else ""
                lines.append(f"{row.source.value:<8}{row.df:>5}{row.ms:>12.4f}{tail}")
            blocks.append(lines)
        width = max(len(line) for block in blocks for line in block) + 4
        height = max(len(block) for block in blocks)
        merged = []
        for n in range(height):
            merged.append("".join(
                (block[n] if n < len(block) else "").ljust(width) for block in blocks
            ).rstrip())
        notes = self.divergence_notes()
        merged.append("")
        merged.append("Divergence:" if notes else "Divergence: none")
        merged.extend(f"  {note}" for note in notes)
        return "\n".join(merged)


def compare(layout: BalancedLayout, alpha: float = 0.05, error_strata: bool = False) -> Comparison:
    return Comparison(
        (strip_split_analysis(layout), factorial_anova(layout), split_split_anova(layout, error_strata)),
        alpha,
    )
