"""Unit and property tests for the footprint measures and star rating."""

from __future__ import annotations

import math
from types import SimpleNamespace

import pytest
from hypothesis import given, strategies as st

from greenbasket.errors import ConfigError, ValidationError
from greenbasket.footprint import (
    DIMENSIONS,
    DailyReference,
    Dimension,
    FootprintFactor,
    SustainabilityChecklist,
    assess,
    daily_value,
    footprint_weight,
    parse_daily_references,
    star_rating,
    sustainability_score,
)

CARBON, NITROGEN, WATER = Dimension.CARBON, Dimension.NITROGEN, Dimension.WATER

finite_factors = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


def make_product(carbon, nitrogen, water, checklist=None):
    """Minimal product-shaped stub: per-dimension factors plus checklist."""
    return SimpleNamespace(
        factors={
            CARBON: FootprintFactor(CARBON, carbon),
            NITROGEN: FootprintFactor(NITROGEN, nitrogen),
            WATER: FootprintFactor(WATER, water),
        },
        checklist=checklist,
    )


def make_references(carbon=5.0, nitrogen=0.05, water=4000.0):
    return {
        CARBON: DailyReference(CARBON, carbon),
        NITROGEN: DailyReference(NITROGEN, nitrogen),
        WATER: DailyReference(WATER, water),
    }


# --- footprint weight -------------------------------------------------------


def test_footprint_weight_zero_weight():
    assert footprint_weight(0.0, FootprintFactor(CARBON, 2.7)) == 0.0


@given(finite_factors)
def test_footprint_weight_unit_weight_returns_factor(f):
    assert footprint_weight(1.0, FootprintFactor(CARBON, f)) == f


def test_footprint_weight_direct_arithmetic():
    # oracle: plain multiplication, 2.5 * 1.2
    assert footprint_weight(2.5, FootprintFactor(CARBON, 1.2)) == 2.5 * 1.2 == 3.0


@pytest.mark.parametrize("bad", [-1.0, -0.001, math.nan, math.inf, -math.inf])
def test_footprint_weight_rejects_bad_weight(bad):
    with pytest.raises(ValidationError) as err:
        footprint_weight(bad, FootprintFactor(CARBON, 1.0))
    assert err.value.field == "weight_kg"


@pytest.mark.parametrize("bad", [-0.5, math.nan, math.inf])
def test_factor_rejects_bad_value(bad):
    with pytest.raises(ValidationError) as err:
        FootprintFactor(CARBON, bad)
    assert err.value.field == "value"


# zero or comfortably normal: keeps products out of the subnormal range,
# where float multiplication loses its relative-error guarantee
zero_or_normal = st.one_of(st.just(0.0), st.floats(min_value=1e-9, max_value=1e6))


@given(zero_or_normal, zero_or_normal, zero_or_normal)
def test_footprint_weight_homogeneity(k, w, f):
    """Scaling the weight scales the footprint, within float rounding."""
    factor = FootprintFactor(CARBON, f)
    scaled = footprint_weight(k * w, factor)
    expected = k * footprint_weight(w, factor)
    assert scaled == pytest.approx(expected, rel=1e-12, abs=0.0)


# --- sustainability score ----------------------------------------------------


def test_sustainability_score_no_measures_applied():
    possible = frozenset(f"m{i}" for i in range(1, 7))
    assert sustainability_score(SustainabilityChecklist(frozenset(), possible)) == 0.0


def test_sustainability_score_all_measures_applied():
    possible = frozenset(f"m{i}" for i in range(1, 7))
    assert sustainability_score(SustainabilityChecklist(possible, possible)) == 1.0


def test_sustainability_score_half():
    # counting oracle: 3 applied out of 6 possible
    possible = frozenset(f"m{i}" for i in range(1, 7))
    applied = frozenset(["m1", "m2", "m3"])
    assert sustainability_score(SustainabilityChecklist(applied, possible)) == 3 / 6


def test_checklist_rejects_empty_possible():
    with pytest.raises(ValidationError) as err:
        SustainabilityChecklist(frozenset(), frozenset())
    assert err.value.field == "possible"


def test_checklist_rejects_applied_outside_possible():
    with pytest.raises(ValidationError) as err:
        SustainabilityChecklist(frozenset(["a", "x"]), frozenset(["a", "b"]))
    assert err.value.field == "applied"


@given(st.sets(st.text(min_size=1, max_size=8), min_size=1, max_size=12), st.data())
def test_sustainability_score_in_unit_interval(possible, data):
    applied = data.draw(st.sets(st.sampled_from(sorted(possible)), max_size=len(possible)))
    score = sustainability_score(SustainabilityChecklist(frozenset(applied), frozenset(possible)))
    assert 0.0 <= score <= 1.0


# --- daily value -------------------------------------------------------------


def test_daily_value_zero_footprint():
    assert daily_value(0.0, DailyReference(CARBON, 4.0)) == 0.0


def test_daily_value_exactly_one_day():
    assert daily_value(4.0, DailyReference(CARBON, 4.0)) == 1.0


def test_daily_value_quarter():
    # oracle: plain division, 1.0 / 4.0
    assert daily_value(1.0, DailyReference(CARBON, 4.0)) == 1.0 / 4.0 == 0.25


def test_daily_value_may_exceed_one():
    assert daily_value(10.0, DailyReference(CARBON, 4.0)) == 2.5


def test_daily_value_dimension_mismatch():
    with pytest.raises(ValidationError) as err:
        daily_value(1.0, DailyReference(CARBON, 4.0), dimension=WATER)
    assert err.value.field == "dimension"


@pytest.mark.parametrize("bad", [0.0, -2.0, math.nan, math.inf])
def test_daily_reference_rejects_nonpositive_total(bad):
    with pytest.raises(ValidationError) as err:
        DailyReference(CARBON, bad)
    assert err.value.field == "daily_total"


# --- star rating -------------------------------------------------------------


def test_star_rating_zero_impact_is_three_stars():
    assert star_rating({d: 0.0 for d in DIMENSIONS}) == 3.0


def test_star_rating_saturated_impact_is_zero_stars():
    assert star_rating({d: 1.0 for d in DIMENSIONS}) == 0.0
    assert star_rating({CARBON: 1.5, NITROGEN: 7.0, WATER: 1.0}) == 0.0


def test_star_rating_hand_computed_example():
    # sub-scores 1-0.2, 1-0.4, 1-0.6; stars = 3 * mean(0.8, 0.6, 0.4) = 1.8
    stars = star_rating({CARBON: 0.2, NITROGEN: 0.4, WATER: 0.6})
    assert stars == pytest.approx(1.8, rel=1e-12, abs=0.0)


def test_star_rating_with_sustainability_fourth_term():
    stars = star_rating({CARBON: 0.2, NITROGEN: 0.4, WATER: 0.6}, sustainability=1.0)
    assert stars == pytest.approx(3.0 * (0.8 + 0.6 + 0.4 + 1.0) / 4.0, rel=1e-12, abs=0.0)


def test_star_rating_missing_dimension():
    with pytest.raises(ValidationError) as err:
        star_rating({CARBON: 0.0, WATER: 0.0})
    assert err.value.field == "nitrogen"


@pytest.mark.parametrize("bad", [-0.1, 1.1, math.nan])
def test_star_rating_rejects_bad_sustainability(bad):
    with pytest.raises(ValidationError):
        star_rating({d: 0.0 for d in DIMENSIONS}, sustainability=bad)


dv_values = st.floats(min_value=0.0, max_value=5.0, allow_nan=False)


@given(dv_values, dv_values, dv_values, st.none() | st.floats(min_value=0.0, max_value=1.0))
def test_star_rating_bounds(c, n, w, s):
    stars = star_rating({CARBON: c, NITROGEN: n, WATER: w}, sustainability=s)
    assert 0.0 <= stars <= 3.0


def _subscore(dv: float) -> float:
    return min(max(1.0 - dv, 0.0), 1.0)


@given(dv_values, dv_values, dv_values, st.floats(min_value=0.0, max_value=4.9))
def test_star_rating_monotone_in_each_dimension(c, n, w, lower):
    """Decreasing one daily-value fraction never decreases the rating."""
    base = {CARBON: c, NITROGEN: n, WATER: w}
    for dim in DIMENSIONS:
        if lower < base[dim]:
            improved = dict(base)
            improved[dim] = lower
            assert star_rating(improved) >= star_rating(base)
            # strict whenever the sub-score actually moves (i.e. not clamped
            # away and representable at float granularity)
            if _subscore(lower) > _subscore(base[dim]):
                assert star_rating(improved) > star_rating(base)


# --- assess ------------------------------------------------------------------


def test_assess_all_zero_factors():
    result = assess(make_product(0.0, 0.0, 0.0), 1.0, make_references())
    assert result.stars == 3.0
    assert all(result.per_dimension_weight[d] == 0.0 for d in DIMENSIONS)
    assert result.sustainability_score is None


def test_assess_exactly_daily_allotment_in_every_dimension():
    refs = make_references()
    product = make_product(
        refs[CARBON].daily_total, refs[NITROGEN].daily_total, refs[WATER].daily_total
    )
    result = assess(product, 1.0, refs)
    assert all(result.per_dimension_dv[d] == 1.0 for d in DIMENSIONS)
    assert result.stars == 0.0


def test_assess_oat_drink_against_manual_composition(shipped_references):
    """Spreadsheet-style recomputation of the oat-drink fixture values."""
    product = make_product(0.4, 0.003, 48.0)
    result = assess(product, 1.0, shipped_references)

    expected_weights = {CARBON: 1.0 * 0.4, NITROGEN: 1.0 * 0.003, WATER: 1.0 * 48.0}
    expected_dv = {
        dim: expected_weights[dim] / shipped_references[dim].daily_total
        for dim in DIMENSIONS
    }
    subscores = [min(max(1.0 - expected_dv[d], 0.0), 1.0) for d in DIMENSIONS]
    expected_stars = 3.0 * (sum(subscores) / 3)

    assert result.per_dimension_weight == expected_weights
    assert result.per_dimension_dv == expected_dv
    assert result.stars == pytest.approx(expected_stars, rel=1e-12, abs=0.0)


def test_assess_missing_factor_is_rejected():
    product = SimpleNamespace(factors={CARBON: FootprintFactor(CARBON, 1.0)}, checklist=None)
    with pytest.raises(ValidationError):
        assess(product, 1.0, make_references())


@given(
    finite_factors, finite_factors, finite_factors,
    st.floats(min_value=0.0, max_value=100.0, allow_nan=False),
)
def test_assess_equals_manual_composition(c, n, w, weight):
    """assess must be the exact floating pipeline of the three operations."""
    refs = make_references()
    product = make_product(c, n, w)
    result = assess(product, weight, refs)
    dvs = {}
    for dim in DIMENSIONS:
        fw = footprint_weight(weight, product.factors[dim])
        assert result.per_dimension_weight[dim] == fw
        dvs[dim] = daily_value(fw, refs[dim], dimension=dim)
        assert result.per_dimension_dv[dim] == dvs[dim]
    assert result.stars == star_rating(dvs)


def test_assess_with_checklist_folds_in_fourth_term():
    checklist = SustainabilityChecklist(frozenset(["a"]), frozenset(["a", "b"]))
    result = assess(make_product(0.0, 0.0, 0.0, checklist), 1.0, make_references())
    assert result.sustainability_score == 0.5
    assert result.stars == pytest.approx(3.0 * (1 + 1 + 1 + 0.5) / 4, rel=1e-12)


# --- daily-reference configuration --------------------------------------------


GOOD_DOC = """
# comment
carbon = 5.0 kgCO2e
nitrogen = 0.05 kgN
water = 4000 L   # trailing comment
"""


def test_parse_daily_references_good_document():
    refs = parse_daily_references(GOOD_DOC)
    assert refs[CARBON].daily_total == 5.0
    assert refs[NITROGEN].daily_total == 0.05
    assert refs[WATER].daily_total == 4000.0


def test_shipped_references_load(shipped_references):
    assert set(shipped_references) == set(DIMENSIONS)


@pytest.mark.parametrize(
    "doc, line, field",
    [
        ("carbon = x kg\nnitrogen = 1 kg\nwater = 1 L", 1, "value"),
        ("carbon = 5 kg\nplutonium = 1 kg\nwater = 1 L", 2, "dimension"),
        ("carbon = 5 kg\nnitrogen = 1 kg\nwater 1 L", 3, "line"),
        ("carbon = 5 kg\ncarbon = 4 kg\nwater = 1 L", 2, "dimension"),
        ("carbon = -5 kg\nnitrogen = 1 kg\nwater = 1 L", 1, "value"),
        ("carbon = 5\nnitrogen = 1 kg\nwater = 1 L", 1, "line"),
    ],
)
def test_parse_daily_references_names_line_and_field(doc, line, field):
    with pytest.raises(ConfigError) as err:
        parse_daily_references(doc, source="refs.txt")
    message = str(err.value)
    assert f"refs.txt:{line}:" in message
    assert f"(field {field!r})" in message


def test_parse_daily_references_requires_all_dimensions():
    with pytest.raises(ConfigError) as err:
        parse_daily_references("carbon = 5 kgCO2e")
    assert "nitrogen" in str(err.value) and "water" in str(err.value)
