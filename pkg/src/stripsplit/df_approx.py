"""Approximate degrees of freedom for sums of mean squares.

``satterthwaite`` handles any number of mean squares.  For a sum of exactly
two, the Ames-Webster family ``aw_f(r)`` rescales the ratio of the two mean
squares by a constant ``r``; ``aw_rstar`` gives the ``r`` minimizing the mean
squared error of the reciprocal ratio estimate.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class DomainError(ValueError):
    """Raised when a formula is undefined for the given degrees of freedom."""


@dataclass(frozen=True)
class MsPoint:
    ms: float
    df: float

    def __post_init__(self):
        if not self.df > 0:
            raise ValueError(f"df must be positive, got {self.df}")
        if self.ms < 0:
            raise ValueError(f"mean square must be nonnegative, got {self.ms}")


@dataclass(frozen=True)
class AwEstimate:
    r_used: float
    f_hat: float
    ordering: int  # 0: first point plays MS_1, 1: second point plays MS_1


@dataclass(frozen=True)
class SatterthwaiteFallback:
    f_hat: float
    reason: str


def satterthwaite(points: Sequence[MsPoint]) -> float:
    if not points:
        raise ValueError("satterthwaite needs at least one mean square")
    if len(points) == 1:
        return float(points[0].df)
    total = sum(p.ms for p in points)
    denom = sum(p.ms * p.ms / p.df for p in points)
    if denom <= 0:
        raise ValueError("all mean squares are zero; effective df undefined")
    return total * total / denom


def aw_rstar(n1: float, n2: float) -> float:
    if n2 <= 4:
        raise DomainError(f"r* needs n2 > 4, got n2={n2}")
    return n2 / (n2 - 2.0) * (2.0 * (n1 + n2 - 2.0) / (n1 * (n2 - 4.0)) + 1.0)


def aw_f(ms1: MsPoint, ms2: MsPoint, r: float) -> float:
    if not (ms1.ms > 0 and ms2.ms > 0):
        raise DomainError("Ames-Webster estimate needs positive mean squares")
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    phi = r * ms2.ms / ms1.ms
    return (1.0 + phi) ** 2 / (1.0 / ms1.df + phi * phi / ms2.df)


@dataclass(frozen=True)
class AwPair:
    first: AwEstimate | None
    second: AwEstimate | None
    f_s: float
    selected: AwEstimate | SatterthwaiteFallback

    @property
    def f_hat(self) -> float:
        return self.selected.f_hat


def aw_pair(p: MsPoint, q: MsPoint) -> AwPair:
    """Both Ames-Webster orderings with r*, and the one to use.

    Selection: either ordering undefined -> Satterthwaite; both below f_s ->
    the larger; exactly one below f_s -> that one; otherwise the larger.
    """
    f_s = satterthwaite([p, q])
    estimates: list[AwEstimate | None] = []
    for ordering, (one, two) in enumerate(((p, q), (q, p))):
        try:
            r = aw_rstar(one.df, two.df)
            estimates.append(AwEstimate(r, aw_f(one, two, r), ordering))
        except DomainError:
            estimates.append(None)
    first, second = estimates
    if first is None or second is None:
        reason = "r* undefined (n2 <= 4)" if p.ms > 0 and q.ms > 0 else "zero mean square"
        return AwPair(first, second, f_s, SatterthwaiteFallback(f_s, reason))
    below = [e for e in (first, second) if e.f_hat < f_s]
    if len(below) == 1:
        chosen = below[0]
    else:
        chosen = max((first, second), key=lambda e: e.f_hat)
    return AwPair(first, second, f_s, chosen)
