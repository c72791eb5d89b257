from fractions import Fraction
from itertools import product

import pytest
import hypothesis.strategies as st
from hypothesis import given

from src.domain.entities.game import MixedProfile, NormalFormGame, enumerate_partial_profiles, profile_probability, support
from src.domain.exceptions import (
    BudgetExceededError,
    DimensionMismatchError,
    InexactRootError,
    InvalidGameError,
    InvalidProfileError,
    ModeMismatchError,
    SchemaError,
)
from src.domain.value_objects.scalar import (
    EXACT,
    FLOAT,
    ArithmeticMode,
    NumericContext,
    exact_root,
    format_scalar,
    parse_scalar,
)


def uniform_game(sizes):
    labels = [[f"s{k}" for k in range(size)] for size in sizes]
    costs = {s: tuple(0 for _ in sizes) for s in product(*(range(k) for k in sizes))}
    return NormalFormGame(labels, costs)


# Scalars

def test_parse_scalar_modes():
    assert parse_scalar("3/4") == Fraction(3, 4)
    assert parse_scalar(2) == Fraction(2)
    assert isinstance(parse_scalar(0.25), float)
    assert parse_scalar(0.25, ArithmeticMode.EXACT) == Fraction(1, 4)
    assert parse_scalar("1/3", ArithmeticMode.FLOAT) == pytest.approx(1 / 3)


@pytest.mark.parametrize("bad", ["x/2", "1/0", True, float("nan")])
def test_parse_scalar_rejects(bad):
    with pytest.raises(SchemaError):
        parse_scalar(bad)


def test_format_scalar():
    assert format_scalar(Fraction(7, 4)) == "7/4"
    assert format_scalar(Fraction(2)) == "2/1"
    assert format_scalar(0.1) == 0.1


def test_exact_root():
    assert exact_root(Fraction(9, 4), 2) == Fraction(3, 2)
    assert exact_root(Fraction(8), 3) == Fraction(2)
    with pytest.raises(InexactRootError):
        exact_root(Fraction(2), 2)


def test_context_tolerances():
    assert EXACT.tol == 0
    assert EXACT.is_close(Fraction(1, 3), Fraction(2, 6))
    assert not EXACT.is_close(Fraction(1, 3), Fraction(1, 3) + Fraction(1, 10 ** 30))
    assert FLOAT.is_close(0.1 + 0.2, 0.3)
    with pytest.raises(ValueError):
        NumericContext(ArithmeticMode.FLOAT, -1.0)


def test_context_rejects_foreign_mode():
    with pytest.raises(ModeMismatchError):
        EXACT.check(0.5)


# Profiles

def test_profile_probability_examples():
    third = (Fraction(2, 3), Fraction(1, 3))
    p = MixedProfile((third, third))
    assert profile_probability(p, (0, 1)) == Fraction(2, 9)

    pure = MixedProfile.pure((2, 3), (1, 2))
    assert pure.probability((1, 2)) == 1
    assert pure.probability((0, 2)) == 0

    uniform = MixedProfile.uniform((2, 2))
    for s in product(range(2), range(2)):
        assert uniform.probability(s) == Fraction(1, 4)


def test_support_examples():
    assert support(MixedProfile.pure((3,), (1,)))[0] == frozenset({1})
    assert support(MixedProfile.uniform((4,)))[0] == frozenset(range(4))
    assert support(MixedProfile(((0.5, 0.5, 0.0),)))[0] == frozenset({0, 1})


def test_profile_validation():
    with pytest.raises(InvalidProfileError):
        MixedProfile(((Fraction(1, 2), Fraction(1, 3)),))
    with pytest.raises(InvalidProfileError):
        MixedProfile(((Fraction(3, 2), Fraction(-1, 2)),))
    with pytest.raises(InvalidProfileError):
        MixedProfile(((),))
    with pytest.raises(ModeMismatchError):
        MixedProfile(((Fraction(1, 2), 0.5),))


def test_profile_dimensions_checked_against_game(crawford_quarter):
    with pytest.raises(DimensionMismatchError):
        MixedProfile.uniform((2, 3)).validate_against(crawford_quarter)
    with pytest.raises(ModeMismatchError):
        MixedProfile.uniform((2, 2), ArithmeticMode.FLOAT).validate_against(crawford_quarter)
    with pytest.raises(DimensionMismatchError):
        MixedProfile.uniform((2, 2)).probability((0, 2))


def test_with_pure_replaces_one_player():
    p = MixedProfile.uniform((2, 3))
    q = p.with_pure(1, 2)
    assert q[0] == p[0]
    assert q[1] == (0, 0, 1)


def test_profile_mode_conversion_roundtrip():
    p = MixedProfile.from_literals([["1/4", "3/4"], [1, 0]])
    assert p.in_mode(ArithmeticMode.FLOAT).in_mode(ArithmeticMode.EXACT) == p


@given(st.lists(st.lists(st.integers(min_value=0, max_value=20), min_size=1, max_size=4), min_size=1, max_size=3))
def test_profile_probabilities_sum_to_one(weights):
    rows = []
    for row in weights:
        if sum(row) == 0:
            row = row[:-1] + [1]
        total = sum(row)
        rows.append(tuple(Fraction(w, total) for w in row))
    p = MixedProfile(tuple(rows))
    total = sum(p.probability(s) for s in product(*(range(len(r)) for r in rows)))
    assert total == 1


# Partial profiles

@pytest.mark.parametrize("sizes, player, expected", [
    ((3, 4), 0, 4),
    ((2, 2, 2), 1, 4),
    ((7, 5), 1, 7),
])
def test_partial_profile_counts(sizes, player, expected):
    game = uniform_game(sizes)
    partials = list(enumerate_partial_profiles(game, player))
    assert len(partials) == expected
    assert len(set(partials)) == expected


def test_partial_profile_rejects_bad_player():
    with pytest.raises(DimensionMismatchError):
        list(uniform_game((2, 2)).partial_profiles(2))


def test_join_restores_profile():
    game = uniform_game((2, 3, 2))
    for partial in game.partial_profiles(1):
        full = game.join(1, partial, 2)
        assert full[1] == 2
        assert full[:1] + full[2:] == partial


# Games

def test_cost_table_must_be_total():
    with pytest.raises(InvalidGameError):
        NormalFormGame([["a", "b"], ["c"]], {(0, 0): (1, 1)})


def test_cost_vector_length_checked():
    with pytest.raises(InvalidGameError):
        NormalFormGame([["a"], ["b"]], {(0, 0): (1,)})


def test_duplicate_labels_rejected():
    with pytest.raises(InvalidGameError):
        NormalFormGame([["a", "a"]], {(0,): (1,), (1,): (2,)})


def test_float_costs_switch_mode():
    game = NormalFormGame([["a", "b"]], {(0,): (1.5,), (1,): (2,)})
    assert game.mode == ArithmeticMode.FLOAT
    assert game.cost(0, (1,)) == 2.0
    assert game.in_mode(ArithmeticMode.EXACT).cost(0, (0,)) == Fraction(3, 2)


def test_profile_budget():
    game = uniform_game((3, 3, 3))
    with pytest.raises(BudgetExceededError):
        list(game.profiles(budget=10))
    assert len(list(game.profiles())) == 27
