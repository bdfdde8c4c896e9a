import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import DIMS_GRID, random_layout
from stripsplit.data import BalancedLayout
from stripsplit.design import AXES, DesignDims, Source, degrees_of_freedom
from stripsplit.sums_of_squares import (
    AnovaTable,
    Slot,
    anova_table,
    projector,
    ss_direct,
    ss_kronecker,
    total_corrected_ss,
)

BEAN_MS = {
    "R": 9.4758, "A": 10.9903, "eA": 0.4220, "B": 7.3937, "eB": 2.5387, "AB": 11.2718,
    "eAB": 0.3141, "C": 3.1476, "AC": 2.3759, "BC": 1.8678, "ABC": 3.2911, "eT": 1.4921,
}


# -- oracle: least squares on indicator matrices -------------------------------

def _indicator(dims, keep):
    """Columns indexing every level combination of the axes in ``keep``."""
    shape = dims.shape
    cells = list(itertools.product(*(range(n) for n in shape)))
    combos = list(itertools.product(*(range(shape[AXES.index(ax)]) for ax in keep)))
    col = {c: n for n, c in enumerate(combos)}
    x = np.zeros((len(cells), len(combos)))
    for row, cell in enumerate(cells):
        x[row, col[tuple(cell[AXES.index(ax)] for ax in keep)]] = 1.0
    return x


def _fitted_ss(y, x):
    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    fit = x @ beta
    return float(fit @ fit)


def _proper_subsets(axes):
    for size in range(len(axes)):
        yield from itertools.combinations(axes, size)


def oracle_ss(layout, source):
    """SS of a crossed term: projection onto its cells minus projection onto its margins."""
    dims = layout.dims
    y = layout.values.reshape(-1)
    if source is Source.eT:
        total = float(np.sum((y - y.mean()) ** 2))
        return total - sum(oracle_ss(layout, s) for s in Source if s is not Source.eT)
    axes = source.axes
    lower = np.hstack([_indicator(dims, sub) for sub in _proper_subsets(axes)])
    full = np.hstack([lower, _indicator(dims, axes)])
    return _fitted_ss(y, full) - _fitted_ss(y, lower)


def test_beans_mean_squares(beans):
    table = anova_table(beans)
    for row in table:
        assert row.ms == pytest.approx(BEAN_MS[row.source.value], abs=1e-3)


def test_constant_layout_all_zero():
    layout = BalancedLayout.from_array(np.full((2, 3, 2, 2), 4.2))
    for s in Source:
        assert ss_direct(layout, s) == pytest.approx(0, abs=1e-20)
        assert ss_kronecker(layout, s) == pytest.approx(0, abs=1e-20)


@pytest.mark.parametrize("dims", [DesignDims(2, 2, 2, 2), DesignDims(2, 3, 2, 3), DesignDims(3, 2, 3, 2)])
def test_against_regression_oracle(dims):
    rng = np.random.default_rng(11)
    layout = random_layout(rng, dims, integers=True)
    for s in Source:
        assert ss_direct(layout, s) == pytest.approx(oracle_ss(layout, s), rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("dims", DIMS_GRID)
def test_projector_traces(dims):
    for s in Source:
        assert projector(dims, s).trace(dims) == degrees_of_freedom(dims, s)


@pytest.mark.parametrize("dims", [DesignDims(2, 2, 2, 2), DesignDims(2, 3, 2, 3)])
def test_projectors_are_orthogonal_and_complete(dims):
    mats = {s: projector(dims, s).matrix(dims) for s in Source}
    n = dims.n_obs
    total = np.zeros((n, n))
    for s, m in mats.items():
        assert np.allclose(m, m.T)
        assert np.allclose(m @ m, m)
        assert np.isclose(np.trace(m), degrees_of_freedom(dims, s))
        total += m
    assert np.allclose(total, np.eye(n) - np.full((n, n), 1.0 / n))


def test_materialized_matches_axiswise(beans):
    dims = beans.dims
    y = beans.flat()
    for s in Source:
        m = projector(dims, s).matrix(dims)
        assert float(y @ m @ y) == pytest.approx(ss_kronecker(beans, s), rel=1e-12)


def test_slot_matrices():
    for slot in Slot:
        m = slot.matrix(4)
        assert np.allclose(m @ m, m)
        assert np.isclose(np.trace(m), slot.trace(4))


layouts = st.tuples(*(st.integers(2, 4) for _ in range(4))).flatmap(
    lambda shape: arrays(np.float64, shape, elements=st.floats(-1e3, 1e3, allow_nan=False))
)


@given(layouts)
def test_direct_equals_kronecker(values):
    layout = BalancedLayout.from_array(values)
    total = total_corrected_ss(layout)
    scale = max(total, 1.0)
    ss = [ss_direct(layout, s) for s in Source]
    for s, a in zip(Source, ss):
        assert abs(a - ss_kronecker(layout, s)) <= 1e-9 * scale
        assert a >= -1e-9 * scale
    assert abs(sum(ss) - total) <= 1e-9 * scale


@given(layouts, st.floats(-50, 50), st.floats(0.1, 10))
def test_location_scale(values, shift, scale):
    base = anova_table(BalancedLayout.from_array(values))
    moved = anova_table(BalancedLayout.from_array(values * scale + shift))
    tol = 1e-9 * max(base.total_ss, 1.0) * scale * scale
    for s in Source:
        assert abs(moved[s].ss - scale * scale * base[s].ss) <= tol


def test_table_serializers(beans):
    table = anova_table(beans)
    assert len(table) == 12 and table.total_df == 71
    assert table.to_csv().splitlines()[0] == "source,df,ss,ms"
    back = AnovaTable.from_ms(table.dims, {s: table.ms(s) for s in Source})
    for s in Source:
        assert back[s].ss == pytest.approx(table[s].ss)
    assert '"source": "eT"' in table.to_json()
    assert "ABC" in table.to_text()
