import numpy as np
import pytest

from conftest import DIMS_GRID
from stripsplit.design import ALL_MODELS, DesignDims, ModelVariant, Source, TESTED_SOURCES
from stripsplit.ems import V
from stripsplit.f_tests import (
    EffectsZero,
    ExactnessViolation,
    FTestSpec,
    NonPositiveDenominator,
    VarZero,
    evaluate,
    evaluate_batch,
    f_test_plan,
    verify_exactness,
)
from stripsplit.simulator import mean_squares_batch
from stripsplit.sums_of_squares import AnovaTable, anova_table

S = Source
FFF_F = {"A": 26.04, "B": 2.91, "AB": 35.89, "C": 2.11, "AC": 1.59, "BC": 1.25, "ABC": 2.21}


def test_plan_has_eleven_tests():
    for model in ALL_MODELS:
        plan = f_test_plan(model)
        assert [t.source for t in plan] == list(TESTED_SOURCES)
        assert len(plan) == 11


def test_fixed_plan_values(beans):
    results = {r.source.value: r for r in evaluate(f_test_plan(ModelVariant.parse("FFF")), anova_table(beans))}
    for name, f in FFF_F.items():
        assert results[name].f_value == pytest.approx(f, abs=0.01)
        assert results[name].df_method.kind == "exact"
    r = results["R"]
    assert r.df_method.kind == "satterthwaite"
    assert r.df1 == pytest.approx(1.0672, abs=5e-4)


@pytest.mark.parametrize("dims", DIMS_GRID)
@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.code)
def test_exactness(model, dims):
    report = verify_exactness(model, dims)
    assert report.ok


def test_exactness_catches_wrong_plan(monkeypatch):
    from stripsplit import f_tests

    broken = dict(f_tests._PLANS["FFF"])
    broken[S.A] = ((S.A,), (S.eT,))
    monkeypatch.setitem(f_tests._PLANS, "FFF", broken)
    with pytest.raises(ExactnessViolation) as err:
        verify_exactness(ModelVariant.parse("FFF"), DesignDims(2, 4, 3, 3))
    assert err.value.source is S.A
    report = verify_exactness(ModelVariant.parse("FFF"), DesignDims(2, 4, 3, 3), raise_on_error=False)
    assert not report.ok


def test_hypotheses():
    plan = {t.source: t for t in f_test_plan(ModelVariant.parse("RFF"))}
    assert plan[S.A].hypothesis == VarZero(V.A)
    assert plan[S.B].hypothesis == EffectsZero(S.B)
    assert plan[S.BC].hypothesis == EffectsZero(S.BC)
    assert plan[S.AB].hypothesis == VarZero(V.AB)
    assert plan[S.eA].hypothesis == VarZero(V.eA)


def test_spec_validation():
    with pytest.raises(ValueError):
        FTestSpec(S.A, (S.A,), (S.A,), EffectsZero(S.A))
    with pytest.raises(ValueError):
        FTestSpec(S.A, (), (S.eA,), EffectsZero(S.A))


def test_aw_alternates_on_pairs(beans):
    results = {r.source: r for r in evaluate(f_test_plan(ModelVariant.parse("RRR")), anova_table(beans))}
    ab = results[S.AB]
    assert ab.df_method.kind == "satterthwaite"
    assert [str(a.method) for a in ab.alternates] == [
        "ames-webster[listed]", "ames-webster[swapped]", "ames-webster[selected]"
    ]
    # three-term sides get Satterthwaite only
    assert results[S.A].alternates == ()
    assert results[S.AC].df_method.kind == "exact"


def test_zero_denominator():
    table = AnovaTable.from_ms(DesignDims(2, 2, 2, 2), {s: (0.0 if s is S.eA else 1.0) for s in Source})
    with pytest.raises(NonPositiveDenominator):
        evaluate(f_test_plan(ModelVariant.parse("FFF")), table)


def test_zero_numerator_p_is_one():
    table = AnovaTable.from_ms(DesignDims(2, 2, 2, 2), {s: (0.0 if s is S.C else 1.0) for s in Source})
    res = {r.source: r for r in evaluate(f_test_plan(ModelVariant.parse("FFF")), table)}
    assert res[S.C].p_value == 1.0


@pytest.mark.parametrize("model", ["FFF", "RRR", "FFR", "RFF"])
def test_batch_matches_scalar(model):
    model = ModelVariant.parse(model)
    dims = DesignDims(2, 3, 3, 2)
    rng = np.random.default_rng(8)
    y = rng.normal(size=(20,) + dims.shape)
    ms = mean_squares_batch(y, dims)
    plan = f_test_plan(model)
    batch = evaluate_batch(plan, ms, dims)
    for n in range(ms.shape[0]):
        table = AnovaTable.from_ms(dims, dict(zip(Source, ms[n])))
        for res in evaluate(plan, table):
            got = batch[res.source]
            assert got["f"][n] == pytest.approx(res.f_value, rel=1e-12)
            assert got["df1"][n] == pytest.approx(res.df1, rel=1e-12)
            assert got["df2"][n] == pytest.approx(res.df2, rel=1e-12)
            assert got["p"][n] == pytest.approx(res.p_value, rel=1e-9, abs=1e-12)
