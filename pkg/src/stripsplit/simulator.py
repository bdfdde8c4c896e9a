"""Monte Carlo generation of strip-split plot data and audits of EMS and test size.

Random terms are drawn independently for every distinct index combination
they carry (one block effect per block, one AB effect per (i, j) shared
across blocks and subplots, ...).  Replicate ``n`` always uses the stream
``make_stream(seed, n)``, so output does not depend on how replicates are
split across workers.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .data import BalancedLayout
from .design import (
    AXES,
    SS_MULTIPLIER,
    DesignDims,
    ModelVariant,
    Source,
    degrees_of_freedom,
    fixed_sources,
    random_sources,
)
from .distributions import make_stream, sample_normal
from .ems import VarianceComponent, ems
from .f_tests import evaluate_batch, f_test_plan

MAX_COVARIANCE_SIZE = 4096
_CENTER_TOL = 1e-9


class SizeGuardExceeded(ValueError):
    pass


class SimSpecError(ValueError):
    pass


def effect_shape(dims: DesignDims, source: Source) -> tuple[int, ...]:
    """Broadcastable (r, a, b, c)-shape of a source's effect array."""
    return tuple(n if ax in source.axes else 1 for ax, n in zip(AXES, dims.shape))


def _compact_shape(dims: DesignDims, source: Source) -> tuple[int, ...]:
    return tuple(n for ax, n in zip(AXES, dims.shape) if ax in source.axes)


@dataclass(frozen=True)
class SimSpec:
    """Simulation settings.

    ``variances`` holds sigma^2 per random component; components that are
    random under the model but absent default to zero.  ``fixed_effects`` maps
    each fixed source to an array over its own indices (e.g. shape (a, b) for
    AB), centered along every axis; missing fixed sources are zero.
    """

    dims: DesignDims
    model: ModelVariant
    variances: Mapping[VarianceComponent, float] = field(default_factory=dict)
    fixed_effects: Mapping[Source, np.ndarray] = field(default_factory=dict)
    grand_mean: float = 0.0
    n_reps: int = 1000
    seed: int = 0

    def __post_init__(self):
        allowed = {VarianceComponent.of(s) for s in random_sources(self.model)}
        variances = {}
        for comp, value in self.variances.items():
            comp = comp if isinstance(comp, VarianceComponent) else VarianceComponent.parse(comp)
            if comp not in allowed:
                raise SimSpecError(f"{comp} is not random under model {self.model}")
            value = float(value)
            if not (value >= 0 and math.isfinite(value)):
                raise SimSpecError(f"variance for {comp} must be finite and nonnegative, got {value}")
            variances[comp] = value
        object.__setattr__(self, "variances", variances)

        fixed = set(fixed_sources(self.model))
        effects = {}
        for source, arr in self.fixed_effects.items():
            source = source if isinstance(source, Source) else Source.parse(source)
            if source not in fixed:
                raise SimSpecError(f"{source} is not fixed under model {self.model}")
            arr = np.array(arr, dtype=np.float64)
            want = _compact_shape(self.dims, source)
            if arr.shape != want:
                raise SimSpecError(f"fixed effects for {source} need shape {want}, got {arr.shape}")
            for axis in range(arr.ndim):
                if np.max(np.abs(arr.sum(axis=axis))) > _CENTER_TOL * max(1.0, np.max(np.abs(arr))):
                    raise SimSpecError(f"fixed effects for {source} must sum to zero along every axis")
            arr.setflags(write=False)
            effects[source] = arr
        object.__setattr__(self, "fixed_effects", effects)
        if self.n_reps < 1:
            raise SimSpecError("n_reps must be positive")

    def variance(self, comp: VarianceComponent) -> float:
        return self.variances.get(comp, 0.0)

    def mean_array(self) -> np.ndarray:
        """Deterministic part: grand mean plus all fixed effects, shape (r, a, b, c)."""
        mu = np.full(self.dims.shape, float(self.grand_mean))
        for source, arr in self.fixed_effects.items():
            mu = mu + arr.reshape(effect_shape(self.dims, source))
        return mu


def centered_pattern(shape: tuple[int, ...], scale: float = 1.0) -> np.ndarray:
    """A fixed, non-trivial array that sums to zero along every axis."""
    grids = np.meshgrid(*(np.arange(n, dtype=float) for n in shape), indexing="ij")
    out = np.ones(shape)
    for g, n in zip(grids, shape):
        out = out * (g - (n - 1) / 2.0)
    return scale * out


def default_fixed_effects(dims: DesignDims, model: ModelVariant, scale: float = 1.0) -> dict[Source, np.ndarray]:
    """Centered patterns for every fixed source of ``model``."""
    out = {}
    for n, source in enumerate(fixed_sources(model)):
        shape = _compact_shape(dims, source)
        out[source] = centered_pattern(shape, scale * (1.0 + 0.5 * n))
    return out


def _draw(spec: SimSpec, stream: np.random.Generator, mu: np.ndarray, components) -> np.ndarray:
    y = mu.copy()
    for comp in components:
        sd = math.sqrt(spec.variance(comp))
        shape = effect_shape(spec.dims, comp.source)
        y += sample_normal(0.0, sd, stream, size=shape)
    return y


def simulate_one(spec: SimSpec, stream: np.random.Generator) -> BalancedLayout:
    comps = [VarianceComponent.of(s) for s in random_sources(spec.model)]
    return BalancedLayout.from_array(_draw(spec, stream, spec.mean_array(), comps))


def simulate_range(spec: SimSpec, start: int, stop: int) -> np.ndarray:
    """Replicates ``start..stop-1`` stacked as (n, r, a, b, c)."""
    comps = [VarianceComponent.of(s) for s in random_sources(spec.model)]
    mu = spec.mean_array()
    out = np.empty((stop - start,) + spec.dims.shape)
    for n in range(start, stop):
        out[n - start] = _draw(spec, make_stream(spec.seed, n), mu, comps)
    return out


def _ranges(n: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, n))
    bounds = np.linspace(0, n, workers + 1).round().astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def _resolve_workers(workers: int | None) -> int:
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return workers


def simulate(spec: SimSpec, workers: int | None = 1) -> np.ndarray:
    """All replicates, (n_reps, r, a, b, c); identical for any worker count."""
    chunks = _ranges(spec.n_reps, _resolve_workers(workers))
    if len(chunks) == 1:
        return simulate_range(spec, *chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(lambda ch: simulate_range(spec, *ch), chunks))
    return np.concatenate(parts, axis=0)


def mean_squares_batch(y: np.ndarray, dims: DesignDims) -> np.ndarray:
    """(n, 12) mean squares in ``Source`` order for stacked layouts."""
    df = np.array([degrees_of_freedom(dims, s) for s in Source], dtype=float)
    return kernels.ss_batch(y) / df


def _simulate_ms(spec: SimSpec, workers: int | None) -> np.ndarray:
    chunks = _ranges(spec.n_reps, _resolve_workers(workers))

    def run(ch):
        return mean_squares_batch(simulate_range(spec, *ch), spec.dims)

    if len(chunks) == 1:
        return run(chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return np.concatenate(list(pool.map(run, chunks)), axis=0)


# -- covariance --------------------------------------------------------------

def covariance_matrix(model: ModelVariant, dims: DesignDims, variances: Mapping[VarianceComponent, float]) -> np.ndarray:
    """V(Y) as a sum of sigma^2 (K_r x K_a x K_b x K_c), K = I on the
    component's own axes and J (all ones) elsewhere."""
    n = dims.n_obs
    if n > MAX_COVARIANCE_SIZE:
        raise SizeGuardExceeded(f"rabc = {n} exceeds {MAX_COVARIANCE_SIZE}")
    out = np.zeros((n, n))
    for source in random_sources(model):
        comp = VarianceComponent.of(source)
        value = float(variances.get(comp, 0.0))
        if value == 0.0:
            continue
        kron = np.ones((1, 1))
        for ax, size in zip(AXES, dims.shape):
            factor = np.eye(size) if ax in source.axes else np.ones((size, size))
            kron = np.kron(kron, factor)
        out += value * kron
    return out


def covariance_terms(model: ModelVariant) -> list[VarianceComponent]:
    return [VarianceComponent.of(s) for s in random_sources(model)]


# -- EMS audit ---------------------------------------------------------------

def q_value(spec: SimSpec, source: Source) -> float:
    """Numeric fixed-effect quadratic for ``source``.

    Sums the source's own effects and the averages of every fixed
    higher-order interaction containing it, centers over the source's
    indices, and scales by (SS multiplier) / df.
    """
    dims = spec.dims
    own_axes = source.axes
    total = np.zeros(_compact_shape(dims, source))
    for other, arr in spec.fixed_effects.items():
        if not set(own_axes) <= set(other.axes):
            continue
        full = arr.reshape(effect_shape(dims, other))
        drop = tuple(n for n, ax in enumerate(AXES) if ax not in own_axes and ax in other.axes)
        reduced = full.mean(axis=drop, keepdims=True) if drop else full
        total = total + np.broadcast_to(reduced, effect_shape(dims, source)).reshape(total.shape)
    for axis in range(total.ndim):
        total = total - total.mean(axis=axis, keepdims=True)
    scale = dims.size(SS_MULTIPLIER[source]) / degrees_of_freedom(dims, source)
    return float(scale * np.sum(total * total))


@dataclass(frozen=True)
class EmsCheck:
    source: Source
    empirical: float
    predicted: float
    std_error: float

    @property
    def z(self) -> float:
        if self.std_error == 0:
            return 0.0 if self.empirical == self.predicted else math.inf
        return (self.empirical - self.predicted) / self.std_error


def predicted_ems(spec: SimSpec) -> dict[Source, float]:
    qs = {s: q_value(spec, s) for s in spec.fixed_effects}
    return {s: ems(spec.model, spec.dims, s).value(spec.variances, qs) for s in Source}


def verify_ems(spec: SimSpec, workers: int | None = 1) -> list[EmsCheck]:
    ms = _simulate_ms(spec, workers)
    predicted = predicted_ems(spec)
    n = ms.shape[0]
    checks = []
    for col, source in enumerate(Source):
        values = ms[:, col]
        se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        checks.append(EmsCheck(source, float(values.mean()), predicted[source], se))
    return checks


# -- test size ---------------------------------------------------------------

@dataclass(frozen=True)
class RejectionRate:
    source: Source
    rate: float
    std_error: float
    n_reps: int
    simple: bool


def null_holds(spec: SimSpec, source: Source) -> bool:
    if source in fixed_sources(spec.model):
        arr = spec.fixed_effects.get(source)
        return arr is None or not np.any(arr)
    return spec.variance(VarianceComponent.of(source)) == 0.0


def type1_error(spec: SimSpec, alpha: float, workers: int | None = 1, only_null: bool = True) -> list[RejectionRate]:
    """Fraction of replicates with p < alpha for each test whose null holds."""
    if not 0 <= alpha < 1:
        raise ValueError("alpha must be in [0, 1)")
    plan = [t for t in f_test_plan(spec.model) if not only_null or null_holds(spec, t.source)]
    ms = _simulate_ms(spec, workers)
    stats = evaluate_batch(plan, ms, spec.dims)
    out = []
    for test in plan:
        p = stats[test.source]["p"]
        rate = float(np.mean(p < alpha))
        se = math.sqrt(rate * (1 - rate) / len(p))
        out.append(RejectionRate(test.source, rate, se, len(p), test.is_simple))
    return out
