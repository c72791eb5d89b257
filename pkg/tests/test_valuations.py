from fractions import Fraction
import math

import pytest
import hypothesis.strategies as st
from hypothesis import given, settings

from src.domain.entities.game import MixedProfile, NormalFormGame
from src.domain.exceptions import InexactRootError, InvalidValuationSpecError, NegativeCostError, SchemaError
from src.domain.value_objects.scalar import ArithmeticMode
from src.domain.value_objects.valuation_spec import TwoValueDist, ValuationKind, ValuationSpec


HALF = Fraction(1, 2)


@pytest.fixture
def coin(valuations):
    """Player 0 pays 1 or 2 with probability 1/2 each"""
    return valuations.realize_two_value(TwoValueDist.of(1, 2, HALF))


# Spec parsing

@pytest.mark.parametrize("text, kind", [
    ("e", ValuationKind.EXPECTATION),
    ("e+var:gamma=1", ValuationKind.VAR_RISK),
    ("e+sd:gamma=2", ValuationKind.SD_RISK),
    ("moments:a2=1,a4=1", ValuationKind.MOMENT_SUM),
    ("nu:r=3", ValuationKind.NU_POWER),
    ("combo:lambda=1/2,gamma=1,r=2", ValuationKind.COMBO),
])
def test_parse_shorthand(text, kind):
    spec = ValuationSpec.parse(text)
    assert spec.kind == kind
    assert ValuationSpec.parse(spec.to_shorthand()) == spec


def test_json_document_roundtrip():
    spec = ValuationSpec.moment_sum({2: 1, 4: "1/2"}, alpha_0=2)
    assert ValuationSpec.from_dict(spec.export_to_dict()) == spec
    assert ValuationSpec.load('{"kind": "e+var", "gamma": "1/4"}') == ValuationSpec.var_risk(Fraction(1, 4))


@pytest.mark.parametrize("text", [
    "e+var:gamma=0",
    "e+sd:gamma=-1",
    "nu:r=1",
    "nu:r=x",
    "combo:lambda=0,gamma=1,r=2",
    "moments:a3=1",
    "moments:a2=-1",
    "median",
    "e+var:gamma",
])
def test_invalid_specs(text):
    with pytest.raises(InvalidValuationSpecError):
        ValuationSpec.parse(text)


def test_float_parameters_rejected():
    with pytest.raises(InvalidValuationSpecError):
        ValuationSpec.var_risk(0.5)


def test_missing_kind_is_a_schema_error():
    with pytest.raises(SchemaError):
        ValuationSpec.from_dict({"gamma": "1"})


def test_root_classification():
    assert ValuationSpec.sd_risk(1).needs_roots
    assert ValuationSpec.nu_power(2).requires_nonnegative_costs
    assert not ValuationSpec.var_risk(1).needs_roots


# Expectation and moments

def test_crawford_expectations(valuations, crawford_quarter):
    y = (Fraction(2, 3), Fraction(1, 3))
    first = MixedProfile(((Fraction(1), Fraction(0)), y))
    second = MixedProfile(((Fraction(0), Fraction(1)), y))
    assert valuations.expectation(crawford_quarter, 0, first) == Fraction(7, 6)
    assert valuations.expectation(crawford_quarter, 0, second) == Fraction(7, 6)


def test_pure_profile_expectation_is_cost(valuations, crawford_quarter):
    p = MixedProfile.pure((2, 2), (1, 1))
    assert valuations.expectation(crawford_quarter, 0, p) == Fraction(3, 2)
    assert valuations.expectation(crawford_quarter, 1, p) == 1


def test_low_order_moments(valuations, crawford_quarter):
    p = MixedProfile.uniform((2, 2))
    assert valuations.k_moment(crawford_quarter, 0, p, 0) == 1
    assert valuations.k_moment(crawford_quarter, 0, p, 1) == 0


def test_two_value_second_moment(valuations, coin):
    game, profile = coin
    assert valuations.k_moment(game, 0, profile, 2) == Fraction(1, 4)


# Valuations

def test_pure_profile_has_no_risk(valuations, crawford_quarter):
    p = MixedProfile.pure((2, 2), (0, 1))
    for spec in (ValuationSpec.var_risk(3), ValuationSpec.moment_sum({2: 1, 4: 1}), ValuationSpec.expectation()):
        assert valuations.valuation(spec, crawford_quarter, 0, p) == 1
        assert valuations.risk(spec, crawford_quarter, 0, p) == 0


def test_var_risk_value(valuations, coin):
    game, profile = coin
    assert valuations.valuation(ValuationSpec.var_risk(1), game, 0, profile) == Fraction(7, 4)


def test_nu_power_value(valuations, coin):
    game, profile = coin
    float_game = game.in_mode(ArithmeticMode.FLOAT)
    value = valuations.valuation(ValuationSpec.nu_power(2), float_game, 0, profile.in_mode(ArithmeticMode.FLOAT))
    assert value == pytest.approx(1.58113883, abs=1e-8)


def test_combo_value(valuations, coin):
    """lambda * (E + gamma * Var) + (1 - lambda) * nu_r"""
    game, profile = coin
    float_game = game.in_mode(ArithmeticMode.FLOAT)
    value = valuations.valuation(ValuationSpec.combo(HALF, 1, 2), float_game, 0, profile.in_mode(ArithmeticMode.FLOAT))
    assert value == pytest.approx(0.5 * 1.75 + 0.5 * math.sqrt(2.5), abs=1e-9)


def test_exact_roots_only_for_perfect_powers(valuations, coin):
    game, profile = coin
    # sqrt(1/4) is exact
    assert valuations.risk(ValuationSpec.sd_risk(2), game, 0, profile) == 1
    with pytest.raises(InexactRootError):
        valuations.valuation(ValuationSpec.nu_power(2), game, 0, profile)


def test_power_valuation_needs_nonnegative_costs(valuations):
    game = NormalFormGame([["a"], ["x", "y"]], {(0, 0): (-1, 0), (0, 1): (2, 0)})
    with pytest.raises(NegativeCostError):
        valuations.valuation(ValuationSpec.nu_power(3), game, 0, MixedProfile.uniform((1, 2)))


def test_deviation_values_match_pure_deviations(valuations, crawford_quarter, var1):
    p = MixedProfile(((HALF, HALF), (Fraction(2, 3), Fraction(1, 3))))
    values = valuations.deviation_values(var1, crawford_quarter, 0, p)
    assert values == [
        valuations.valuation(var1, crawford_quarter, 0, p.with_pure(0, l)) for l in range(2)
    ]


# Two-value closed forms

def test_two_value_degenerate(valuations, var1):
    assert valuations.two_value_R(var1, TwoValueDist.of(1, 3, 0)) == 0
    assert valuations.two_value_V(var1, TwoValueDist.of(1, 3, 1)) == 3
    assert valuations.two_value_V(var1, TwoValueDist.of(1, 3, 0)) == 1


@pytest.mark.parametrize("q", [Fraction(0), Fraction(1, 10), HALF, Fraction(7, 9), Fraction(1)])
def test_two_value_var_closed_form(valuations, var1, q):
    assert valuations.two_value_V(var1, TwoValueDist.of(1, 2, q)) == q + 1 + q * (1 - q)
    delta = Fraction(1, 8)
    risk = valuations.two_value_R(var1, TwoValueDist.of(1, 1 + 2 * delta, q))
    assert risk == 4 * delta ** 2 * q * (1 - q)
    assert risk <= delta ** 2


def test_two_value_sd(valuations):
    assert valuations.two_value_R(ValuationSpec.sd_risk(2), TwoValueDist.of(1, 2, HALF)) == 1


@pytest.mark.parametrize("r", [2, 3, 4])
def test_two_value_nu_closed_form(valuations, r):
    delta, q = 0.125, 0.3
    expected = (q * (1 + 2 * delta) ** r + 1 - q) ** (1 / r) - 1 - 2 * q * delta
    risk = valuations.two_value_R(ValuationSpec.nu_power(r), TwoValueDist.of(1.0, 1 + 2 * delta, q))
    assert risk == pytest.approx(expected, abs=1e-12)


def test_two_value_requires_ordered_values():
    with pytest.raises(ValueError):
        TwoValueDist.of(2, 1, HALF)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=0, max_value=9),
    st.integers(min_value=0, max_value=9),
    st.fractions(min_value=0, max_value=1, max_denominator=30),
)
def test_closed_form_matches_realized_game(valuations, a, spread, q):
    d = TwoValueDist.of(a, a + spread, q)
    game, profile = valuations.realize_two_value(d)
    for spec in (ValuationSpec.var_risk(2), ValuationSpec.moment_sum({2: 1, 4: 1, 6: Fraction(1, 3)})):
        assert valuations.two_value_V(spec, d) == valuations.valuation(spec, game, 0, profile)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=0, max_value=9),
    st.integers(min_value=1, max_value=9),
    st.fractions(min_value=Fraction(1, 30), max_value=Fraction(29, 30), max_denominator=30),
)
def test_risk_positive_off_constant_costs(valuations, a, spread, q):
    d = TwoValueDist.of(a, a + spread, q)
    for spec in (ValuationSpec.var_risk(1), ValuationSpec.moment_sum({4: 1}), ValuationSpec.nu_power(3)):
        dist = TwoValueDist.of(float(d.a), float(d.b), float(d.q)) if spec.needs_roots else d
        assert valuations.two_value_R(spec, dist) > 0


def test_batch_valuation_agrees_with_scalar_path(valuations):
    d = TwoValueDist.of(1.0, 4.0, 0.25)
    game, profile = valuations.realize_two_value(d)
    costs = [1.0, 4.0]
    probs = [[0.75, 0.25]]
    for spec in (ValuationSpec.var_risk(1), ValuationSpec.sd_risk(2), ValuationSpec.combo(HALF, 1, 3)):
        batch = valuations.batch_valuation(spec, costs, probs)[0]
        assert math.isclose(batch, valuations.valuation(spec, game, 0, profile), rel_tol=1e-12)


def test_concavity_spot_check_accepts_variance(valuations, crawford_quarter):
    passed, worst = valuations.spot_check_concavity(ValuationSpec.var_risk(1), crawford_quarter, samples=50)
    assert passed
    assert worst >= -1e-9
