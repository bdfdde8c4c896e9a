"""Expected mean squares for the eight fixed/random variants.

The tables are transcribed as data.  Each entry lists variance components
with a symbolic coefficient (a product of level counts such as ``"bcr"``)
and, for fixed sources, a quadratic term ``Q(source)`` in the fixed effects.
Q terms are opaque symbols here: all that matters for testing is that they
vanish under the source's null hypothesis.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .design import ALL_MODELS, DesignDims, ModelVariant, Source


class VarianceComponent(enum.Enum):
    R = "R"
    A = "A"
    eA = "eA"
    B = "B"
    eB = "eB"
    AB = "AB"
    eAB = "eAB"
    C = "C"
    AC = "AC"
    BC = "BC"
    ABC = "ABC"
    eT = "eT"

    @property
    def source(self) -> Source:
        return Source(self.value)

    @classmethod
    def of(cls, source: Source) -> VarianceComponent:
        return cls(source.value)

    @classmethod
    def parse(cls, text: str) -> VarianceComponent:
        text = text.strip()
        if text.lower().startswith("s2_"):
            text = text[3:]
        return cls.of(Source.parse(text))

    def __str__(self):
        return f"s2_{self.value}"


V = VarianceComponent


@dataclass(frozen=True)
class QTerm:
    owner: Source

    def __str__(self):
        return f"Q({self.owner.value})"


@dataclass(frozen=True)
class EmsExpression:
    """Linear combination of variance components plus Q terms.

    ``q_terms`` is a multiset (owner -> count) so that sums and differences
    of expressions stay closed.
    """

    var_coeffs: Mapping[VarianceComponent, int] = field(default_factory=dict)
    q_terms: Mapping[Source, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "var_coeffs", {k: v for k, v in self.var_coeffs.items() if v != 0})
        object.__setattr__(self, "q_terms", {k: v for k, v in self.q_terms.items() if v != 0})

    @property
    def q_term(self) -> QTerm | None:
        if not self.q_terms:
            return None
        if len(self.q_terms) != 1 or next(iter(self.q_terms.values())) != 1:
            raise ValueError("expression carries more than one Q term")
        return QTerm(next(iter(self.q_terms)))

    def coeff(self, component: VarianceComponent) -> int:
        return self.var_coeffs.get(component, 0)

    def is_zero(self) -> bool:
        return not self.var_coeffs and not self.q_terms

    def __add__(self, other: EmsExpression) -> EmsExpression:
        coeffs = Counter(self.var_coeffs)
        coeffs.update(other.var_coeffs)
        qs = Counter(self.q_terms)
        qs.update(other.q_terms)
        return EmsExpression(dict(coeffs), dict(qs))

    def __neg__(self) -> EmsExpression:
        return EmsExpression(
            {k: -v for k, v in self.var_coeffs.items()},
            {k: -v for k, v in self.q_terms.items()},
        )

    def __sub__(self, other: EmsExpression) -> EmsExpression:
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, EmsExpression):
            return NotImplemented
        return dict(self.var_coeffs) == dict(other.var_coeffs) and dict(self.q_terms) == dict(other.q_terms)

    def __hash__(self):
        return hash((frozenset(self.var_coeffs.items()), frozenset(self.q_terms.items())))

    def value(self, variances: Mapping[VarianceComponent, float], q_values: Mapping[Source, float] | None = None) -> float:
        """Numeric value; components missing from ``variances`` count as zero."""
        q_values = q_values or {}
        total = sum(coef * float(variances.get(comp, 0.0)) for comp, coef in self.var_coeffs.items())
        total += sum(n * float(q_values.get(owner, 0.0)) for owner, n in self.q_terms.items())
        return total

    def __str__(self):
        parts = [f"{'' if n == 1 else f'{n}*'}Q({s.value})" for s, n in self.q_terms.items()]
        for comp in VarianceComponent:
            if comp in self.var_coeffs:
                coef = self.var_coeffs[comp]
                parts.append(f"{'' if coef == 1 else f'{coef}*'}{comp}")
        return " + ".join(parts).replace("+ -", "- ") or "0"


# -- transcribed tables -----------------------------------------------------
# Each entry: (monomial, component) pairs, "Q" marks the source's own Q term.

_COMMON = {
    Source.R: (("abc", V.R), ("bc", V.eA), ("ac", V.eB), ("c", V.eAB), ("1", V.eT)),
    Source.eA: (("bc", V.eA), ("c", V.eAB), ("1", V.eT)),
    Source.eB: (("ac", V.eB), ("c", V.eAB), ("1", V.eT)),
    Source.eAB: (("c", V.eAB), ("1", V.eT)),
    Source.eT: (("1", V.eT),),
}

_FIXED = {
    Source.A: ("Q", ("bc", V.eA), ("c", V.eAB), ("1", V.eT)),
    Source.B: ("Q", ("ac", V.eB), ("c", V.eAB), ("1", V.eT)),
    Source.AB: ("Q", ("c", V.eAB), ("1", V.eT)),
    Source.C: ("Q", ("1", V.eT)),
    Source.AC: ("Q", ("1", V.eT)),
    Source.BC: ("Q", ("1", V.eT)),
    Source.ABC: ("Q", ("1", V.eT)),
}

_RANDOM = {
    Source.A: (("bcr", V.A), ("bc", V.eA), ("cr", V.AB), ("c", V.eAB), ("br", V.AC), ("r", V.ABC), ("1", V.eT)),
    Source.B: (("acr", V.B), ("ac", V.eB), ("cr", V.AB), ("c", V.eAB), ("ar", V.BC), ("r", V.ABC), ("1", V.eT)),
    Source.AB: (("cr", V.AB), ("c", V.eAB), ("r", V.ABC), ("1", V.eT)),
    Source.C: (("abr", V.C), ("br", V.AC), ("ar", V.BC), ("r", V.ABC), ("1", V.eT)),
    Source.AC: (("br", V.AC), ("r", V.ABC), ("1", V.eT)),
    Source.BC: (("ar", V.BC), ("r", V.ABC), ("1", V.eT)),
    Source.ABC: (("r", V.ABC), ("1", V.eT)),
}


def _replace_head(entry):
    # swap the leading own-component term for the source's Q term
    return ("Q",) + tuple(entry[1:])


_TABLES: dict[str, dict[Source, tuple]] = {
    "FFF": dict(_FIXED),
    "RRR": dict(_RANDOM),
    # only A fixed
    "FRR": {**_RANDOM, Source.A: _replace_head(_RANDOM[Source.A])},
    # only B fixed
    "RFR": {**_RANDOM, Source.B: _replace_head(_RANDOM[Source.B])},
    # only C fixed
    "RRF": {**_RANDOM, Source.C: _replace_head(_RANDOM[Source.C])},
    # only A random
    "RFF": {
        Source.A: _RANDOM[Source.A],
        Source.B: ("Q", ("ac", V.eB), ("cr", V.AB), ("c", V.eAB), ("r", V.ABC), ("1", V.eT)),
        Source.AB: _RANDOM[Source.AB],
        Source.C: ("Q", ("br", V.AC), ("r", V.ABC), ("1", V.eT)),
        Source.AC: _RANDOM[Source.AC],
        Source.BC: ("Q", ("r", V.ABC), ("1", V.eT)),
        Source.ABC: _RANDOM[Source.ABC],
    },
    # only B random
    "FRF": {
        Source.A: ("Q", ("bc", V.eA), ("cr", V.AB), ("c", V.eAB), ("r", V.ABC), ("1", V.eT)),
        Source.B: _RANDOM[Source.B],
        Source.AB: _RANDOM[Source.AB],
        Source.C: ("Q", ("ar", V.BC), ("r", V.ABC), ("1", V.eT)),
        Source.AC: ("Q", ("r", V.ABC), ("1", V.eT)),
        Source.BC: _RANDOM[Source.BC],
        Source.ABC: _RANDOM[Source.ABC],
    },
    # only C random
    "FFR": {
        Source.A: ("Q", ("bc", V.eA), ("c", V.eAB), ("br", V.AC), ("r", V.ABC), ("1", V.eT)),
        Source.B: ("Q", ("ac", V.eB), ("c", V.eAB), ("ar", V.BC), ("r", V.ABC), ("1", V.eT)),
        Source.AB: ("Q", ("r", V.ABC), ("c", V.eAB), ("1", V.eT)),
        Source.C: _RANDOM[Source.C],
        Source.AC: _RANDOM[Source.AC],
        Source.BC: _RANDOM[Source.BC],
        Source.ABC: _RANDOM[Source.ABC],
    },
}
for _table in _TABLES.values():
    _table.update(_COMMON)
assert sorted(_TABLES) == sorted(m.code for m in ALL_MODELS)


def symbolic_terms(model: ModelVariant, source: Source) -> list[tuple[str, VarianceComponent | QTerm]]:
    """The table entry as (monomial, term) pairs; Q terms carry monomial ``""``."""
    out = []
    for item in _TABLES[model.code][source]:
        if item == "Q":
            out.append(("", QTerm(source)))
        else:
            out.append(item)
    return out


def symbolic_string(model: ModelVariant, source: Source) -> str:
    parts = []
    for mono, term in symbolic_terms(model, source):
        if isinstance(term, QTerm):
            parts.append(str(term))
        else:
            parts.append(f"{'' if mono == '1' else mono + '*'}{term}")
    return " + ".join(parts)


def ems(model: ModelVariant, dims: DesignDims, source: Source) -> EmsExpression:
    coeffs: dict[VarianceComponent, int] = {}
    qs: dict[Source, int] = {}
    for mono, term in symbolic_terms(model, source):
        if isinstance(term, QTerm):
            qs[term.owner] = 1
        else:
            coeffs[term] = dims.size(mono)
    return EmsExpression(coeffs, qs)


def ems_table(model: ModelVariant, dims: DesignDims) -> dict[Source, EmsExpression]:
    return {s: ems(model, dims, s) for s in Source}


def fixed_block_ems_r(dims: DesignDims) -> EmsExpression:
    """E(MS_R) if blocks were fixed; documentation only, never used by test plans."""
    return EmsExpression(
        {V.eA: dims.size("bc"), V.eB: dims.size("ac"), V.eAB: dims.size("c"), V.eT: 1},
        {Source.R: 1},
    )


def ems_sum(exprs: Iterable[EmsExpression]) -> EmsExpression:
    total = EmsExpression()
    for expr in exprs:
        total = total + expr
    return total


def q_sources(model: ModelVariant) -> list[Source]:
    return [s for s in Source if any(item == "Q" for item in _TABLES[model.code][s])]

