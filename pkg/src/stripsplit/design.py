"""Design dimensions, variation sources, model variants and degrees of freedom.

The strip-split plot design crosses three treatment factors inside ``r``
random blocks: ``A`` on horizontal strips, ``B`` on vertical strips and ``C``
on subplots of each A x B intersection.  Responses are indexed ``(h, i, j, k)``
for block, A level, B level and C level.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

AXES = ("h", "i", "j", "k")
AXIS_SIZES = ("r", "a", "b", "c")


@dataclass(frozen=True)
class DesignDims:
    """Level counts of blocks (``r``) and factors A, B, C."""

    r: int
    a: int
    b: int
    c: int

    def __post_init__(self):
        for name in AXIS_SIZES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"{name} must be an int, got {value!r}")
            if value < 2:
                raise ValueError(f"{name} must be >= 2, got {value}")

    @classmethod
    def parse(cls, text: str) -> DesignDims:
        """Parse ``"r,a,b,c"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected four comma-separated counts, got {text!r}")
        return cls(*(int(p) for p in parts))

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.r, self.a, self.b, self.c)

    @property
    def n_obs(self) -> int:
        return self.r * self.a * self.b * self.c

    def size(self, letters: str) -> int:
        """Product of the level counts named by ``letters`` (e.g. ``"bcr"``)."""
        out = 1
        for ch in letters:
            if ch == "1":
                continue
            out *= getattr(self, ch)
        return out

    def __str__(self):
        return f"{self.r},{self.a},{self.b},{self.c}"


class Source(enum.Enum):
    """The twelve variation sources, in ANOVA-table order."""

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

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, text: str) -> Source:
        key = text.strip()
        for member in cls:
            if member.value.lower() == key.lower():
                return member
        if key.lower() in ("et", "e_t", "residual"):
            return cls.eT
        raise ValueError(f"unknown source {text!r}")

    @property
    def is_error(self) -> bool:
        return self in _ERROR_SOURCES

    @property
    def factors(self) -> str:
        """Treatment factor letters participating in the source ("" for R/errors)."""
        if self is Source.R or self.is_error:
            return ""
        return self.value

    @property
    def axes(self) -> tuple[str, ...]:
        """Index axes the source's effect varies over.

        ``eT`` varies over all four axes; every other source is constant
        along the axes it does not name.
        """
        return _SOURCE_AXES[self]


_ERROR_SOURCES = frozenset({Source.eA, Source.eB, Source.eAB, Source.eT})

_SOURCE_AXES = {
    Source.R: ("h",),
    Source.A: ("i",),
    Source.eA: ("h", "i"),
    Source.B: ("j",),
    Source.eB: ("h", "j"),
    Source.AB: ("i", "j"),
    Source.eAB: ("h", "i", "j"),
    Source.C: ("k",),
    Source.AC: ("i", "k"),
    Source.BC: ("j", "k"),
    Source.ABC: ("i", "j", "k"),
    Source.eT: ("h", "i", "j", "k"),
}

# Table-1 SS multipliers: the level counts a source's marginal mean averages over.
SS_MULTIPLIER = {
    Source.R: "abc",
    Source.A: "bcr",
    Source.eA: "bc",
    Source.B: "acr",
    Source.eB: "ac",
    Source.AB: "cr",
    Source.eAB: "c",
    Source.C: "abr",
    Source.AC: "br",
    Source.BC: "ar",
    Source.ABC: "r",
    Source.eT: "1",
}

TESTED_SOURCES = tuple(s for s in Source if s is not Source.eT)


class EffectKind(enum.Enum):
    FIXED = "F"
    RANDOM = "R"

    def __str__(self):
        return "f" if self is EffectKind.FIXED else "r"


@dataclass(frozen=True)
class ModelVariant:
    """Fixed/random status of factors A, B and C.  Blocks are always random."""

    a_kind: EffectKind
    b_kind: EffectKind
    c_kind: EffectKind

    @classmethod
    def parse(cls, code: str) -> ModelVariant:
        """Parse the three-letter code, e.g. ``"FFF"`` or ``"RFF"`` (only A random)."""
        code = code.strip().upper()
        if len(code) != 3 or any(ch not in "FR" for ch in code):
            raise ValueError(f"model code must be three letters from F/R, got {code!r}")
        return cls(*(EffectKind(ch) for ch in code))

    @property
    def code(self) -> str:
        return self.a_kind.value + self.b_kind.value + self.c_kind.value

    def kind_of(self, factor: str) -> EffectKind:
        return {"A": self.a_kind, "B": self.b_kind, "C": self.c_kind}[factor]

    def __str__(self):
        return self.code


ALL_MODELS = tuple(
    ModelVariant.parse(a + b + c) for a in "FR" for b in "FR" for c in "FR"
)


def degrees_of_freedom(dims: DesignDims, source: Source) -> int:
    r, a, b, c = dims.shape
    return {
        Source.R: r - 1,
        Source.A: a - 1,
        Source.eA: (r - 1) * (a - 1),
        Source.B: b - 1,
        Source.eB: (r - 1) * (b - 1),
        Source.AB: (a - 1) * (b - 1),
        Source.eAB: (a - 1) * (b - 1) * (r - 1),
        Source.C: c - 1,
        Source.AC: (a - 1) * (c - 1),
        Source.BC: (b - 1) * (c - 1),
        Source.ABC: (a - 1) * (b - 1) * (c - 1),
        Source.eT: a * b * (c - 1) * (r - 1),
    }[source]


def derived_effect_kind(model: ModelVariant, source: Source) -> EffectKind:
    """Blocks and errors are random; an interaction is random if any factor in it is."""
    if not source.factors:
        return EffectKind.RANDOM
    if any(model.kind_of(f) is EffectKind.RANDOM for f in source.factors):
        return EffectKind.RANDOM
    return EffectKind.FIXED


def random_sources(model: ModelVariant) -> tuple[Source, ...]:
    return tuple(s for s in Source if derived_effect_kind(model, s) is EffectKind.RANDOM)


def fixed_sources(model: ModelVariant) -> tuple[Source, ...]:
    return tuple(s for s in Source if derived_effect_kind(model, s) is EffectKind.FIXED)
