from fractions import Fraction
from itertools import product

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from src.application.container.dependency_injection import ContainerFactory, ServiceConfig
from src.application.services.equilibrium_service import (
    ConcaveEquilibriumService,
    IEquilibriumService,
    feasible_points,
)
from src.domain.entities.game import MixedProfile, NormalFormGame
from src.domain.entities.reports import DynamicsStatus
from src.domain.exceptions import BudgetExceededError, InvalidGameError, NonConcaveSpecError
from src.domain.value_objects.scalar import ArithmeticMode
from src.domain.value_objects.valuation_spec import ValuationSpec


HALF = Fraction(1, 2)
SPECS = [
    ValuationSpec.var_risk(1),
    ValuationSpec.sd_risk(1),
    ValuationSpec.combo(HALF, 1, 2),
]


def single_player(costs):
    labels = [[f"s{k}" for k in range(len(costs))]]
    return NormalFormGame(labels, {(k,): (c,) for k, c in enumerate(costs)})


# Verification

@pytest.mark.parametrize("s", list(product(range(2), range(2))))
def test_crawford_pure_profiles_are_violated(equilibria, crawford_quarter, var1, s):
    report = equilibria.verify(var1, crawford_quarter, MixedProfile.pure((2, 2), s))
    assert not report.is_equilibrium
    player, strategy = report.violation
    improved = list(s)
    improved[player] = strategy
    assert crawford_quarter.cost(player, tuple(improved)) < crawford_quarter.cost(player, s)


def test_matching_pennies_uniform_is_nash(equilibria, matching_pennies):
    report = equilibria.verify(ValuationSpec.expectation(), matching_pennies, MixedProfile.uniform((2, 2)))
    assert report.is_equilibrium
    assert report.verdict == "equilibrium"
    assert report.values() == [HALF, HALF]


def test_sat_lifted_profile_is_equilibrium(equilibria, gadgets, phi_or, var1):
    game = gadgets.sat_game(phi_or)
    profile = gadgets.sat_assignment_to_profile(phi_or, "11")
    report = equilibria.verify(var1, game, profile)
    assert report.is_equilibrium
    assert report.values() == [1, 1]
    assert report.context.is_exact


def test_root_specs_promote_to_float(equilibria, crawford_quarter):
    report = equilibria.verify(ValuationSpec.sd_risk(1), crawford_quarter, MixedProfile.uniform((2, 2)))
    assert report.context.mode == ArithmeticMode.FLOAT
    assert report.profile.mode == ArithmeticMode.FLOAT


def test_report_frame_and_dict(equilibria, crawford_quarter, var1):
    report = equilibria.verify(var1, crawford_quarter, MixedProfile.uniform((2, 2)))
    frame = report.to_frame()
    assert list(frame["player"]) == [0, 1]
    data = report.export_to_dict()
    assert data["profile"] == [["1/2", "1/2"], ["1/2", "1/2"]]
    assert data["equilibrium"] == report.is_equilibrium


def test_unasserted_moment_sum_is_spot_checked(equilibria, crawford_quarter):
    spec = ValuationSpec.moment_sum({2: 1}, concave_asserted=False)
    report = equilibria.verify(spec, crawford_quarter, MixedProfile.uniform((2, 2)))
    assert report.valuation == str(spec)


def test_non_concave_moment_sum_is_refused(valuations):
    # own strategy fixes the cost, so the fourth moment is convex near the even mix
    service = ConcaveEquilibriumService(valuations, concavity_samples=200)
    spec = ValuationSpec.moment_sum({4: 50}, alpha_0=0, concave_asserted=False)
    game = NormalFormGame([["a", "b"], ["x", "y"]], {
        (0, 0): (0, 0), (0, 1): (0, 0), (1, 0): (10, 0), (1, 1): (10, 0),
    })
    with pytest.raises(NonConcaveSpecError):
        service.verify(spec, game, MixedProfile.uniform((2, 2)))


# Pure search

@pytest.mark.parametrize("delta", [Fraction(3, 10), Fraction(1, 4)])
def test_crawford_has_no_pure_equilibrium(equilibria, gadgets, var1, delta):
    result = equilibria.pure_equilibria(var1, gadgets.crawford(delta))
    assert result.is_empty
    assert result.exhausted
    assert result.candidates_examined == 4


def test_counterexample_has_no_pure_equilibrium(equilibria, gadgets):
    game = gadgets.three_player_counterexample()
    for spec in SPECS + [ValuationSpec.expectation()]:
        assert equilibria.pure_equilibria(spec, game).is_empty


def test_one_player_game_argmin(equilibria, var1):
    result = equilibria.pure_equilibria(var1, single_player([3, 1, 1, 2]))
    assert [r.profile.pure_profile() for r in result.found] == [(1,), (2,)]


# WEE residual

def test_wee_residual_pure_profile(equilibria, crawford_quarter, var1):
    assert equilibria.wee_residual(var1, crawford_quarter, MixedProfile.pure((2, 2), (0, 1))) == [0, 0]


def test_wee_residual_crawford(equilibria, crawford_quarter, var1):
    indifferent = MixedProfile(((HALF, HALF), (Fraction(2, 3), Fraction(1, 3))))
    assert equilibria.wee_residual(var1, crawford_quarter, indifferent)[0] == 0
    off = MixedProfile.uniform((2, 2))
    assert equilibria.wee_residual(var1, crawford_quarter, off)[0] == Fraction(1, 8)


def test_wee_residual_ignores_valuation(equilibria, crawford_quarter, var1):
    off = MixedProfile.uniform((2, 2))
    expected = equilibria.wee_residual(ValuationSpec.expectation(), crawford_quarter, off)
    for spec in SPECS + [ValuationSpec.nu_power(3)]:
        assert equilibria.wee_residual(spec, crawford_quarter, off) == expected


# Support enumeration

@pytest.mark.parametrize("delta", [Fraction(1, 10), Fraction(1, 4), Fraction(1, 2)])
@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_crawford_support_enumeration_empty(equilibria, gadgets, spec, delta):
    result = equilibria.support_enumeration_2p(spec, gadgets.crawford(delta))
    assert result.is_empty
    assert result.exhausted


def test_crawford_expectation_has_the_mixed_nash(equilibria, crawford_quarter):
    result = equilibria.support_enumeration_2p(ValuationSpec.expectation(), crawford_quarter)
    assert len(result.found) == 1
    assert result.found[0].profile[1] == (Fraction(2, 3), Fraction(1, 3))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.fractions(min_value=0, max_value=5, max_denominator=6), min_size=8, max_size=8))
def test_random_2x2_expectation_equilibria(equilibria, valuations, entries):
    c1 = [entries[0:2], entries[2:4]]
    c2 = [entries[4:6], entries[6:8]]
    costs = {(a, b): (c1[a][b], c2[a][b]) for a, b in product(range(2), range(2))}
    game = NormalFormGame([["a", "b"], ["a", "b"]], costs)
    result = equilibria.support_enumeration_2p(ValuationSpec.expectation(), game)
    assert result.exhausted
    assert result.found

    for report in result.found:
        p = report.profile
        for i in range(2):
            current = valuations.expectation(game, i, p)
            for l in range(2):
                assert valuations.expectation(game, i, p.with_pure(i, l)) >= current

    # interior Nash equilibrium from the two indifference conditions
    d1 = c1[0][0] - c1[0][1] - c1[1][0] + c1[1][1]
    d2 = c2[0][0] - c2[1][0] - c2[0][1] + c2[1][1]
    if d1 != 0 and d2 != 0:
        y = (c1[1][1] - c1[0][1]) / d1
        x = (c2[1][1] - c2[1][0]) / d2
        if 0 < x < 1 and 0 < y < 1:
            interior = MixedProfile(((x, 1 - x), (y, 1 - y)))
            assert interior in [r.profile for r in result.found]


def test_satisfiable_sat_game_has_an_equilibrium(equilibria, gadgets, phi_or, var1):
    game = gadgets.sat_game(phi_or)
    result = equilibria.support_enumeration_2p(var1, game, max_support_size=2)
    assert not result.is_empty
    assert not result.exhausted
    lifted = gadgets.sat_assignment_to_profile(phi_or, "11")
    assert any(r.profile == lifted for r in result.found)


def test_unsatisfiable_sat_game_has_none(equilibria, gadgets, phi_unsat, var1):
    game = gadgets.sat_game(phi_unsat)
    assert game.sizes == (7, 7)
    result = equilibria.support_enumeration_2p(var1, game)
    assert result.is_empty
    assert result.exhausted


def test_support_enumeration_needs_two_players(equilibria, var1):
    with pytest.raises(InvalidGameError):
        equilibria.support_enumeration_2p(var1, single_player([1, 2]))


def test_support_pair_cap(valuations, crawford_quarter, var1):
    service = ConcaveEquilibriumService(valuations, support_pair_cap=4)
    with pytest.raises(BudgetExceededError):
        service.support_enumeration_2p(var1, crawford_quarter)


def test_parallel_enumeration_matches_serial(valuations, gadgets):
    game = gadgets.crawford(Fraction(1, 4))
    serial = ConcaveEquilibriumService(valuations, workers=1).support_enumeration_2p(ValuationSpec.expectation(), game)
    parallel = ConcaveEquilibriumService(valuations, workers=2).support_enumeration_2p(ValuationSpec.expectation(), game)
    assert [r.profile for r in serial.found] == [r.profile for r in parallel.found]


def test_feasible_points_of_a_segment():
    points = feasible_points([[Fraction(1), Fraction(1)]], [Fraction(1)])
    assert (Fraction(1), Fraction(0)) in points
    assert (Fraction(0), Fraction(1)) in points
    assert (HALF, HALF) in points
    assert feasible_points([[Fraction(1), Fraction(1)]], [Fraction(-1)]) == []


# Grid search

def test_grid_search_on_counterexample(equilibria, gadgets):
    game = gadgets.three_player_counterexample()
    for spec in (ValuationSpec.var_risk(1), ValuationSpec.sd_risk(1), ValuationSpec.moment_sum({2: 1, 4: 1})):
        result = equilibria.grid_search(spec, game, resolution=0.01, tol=1e-3)
        assert result.is_empty
        assert result.candidates_examined == 101 ** 3


def test_grid_search_one_player(equilibria, var1):
    result = equilibria.grid_search(var1, single_player([2, 1]), resolution=0.1)
    assert len(result.found) == 1
    assert result.found[0].profile[0] == pytest.approx((0.0, 1.0))


def test_grid_search_finds_matching_pennies(equilibria, matching_pennies):
    result = equilibria.grid_search(ValuationSpec.expectation(), matching_pennies, resolution=0.5, tol=1e-9)
    assert [r.profile[0] for r in result.found] == [pytest.approx((0.5, 0.5))]


def test_grid_search_argument_checks(equilibria, var1):
    with pytest.raises(InvalidGameError):
        equilibria.grid_search(var1, single_player([1, 2, 3]))
    with pytest.raises(ValueError):
        equilibria.grid_search(var1, single_player([1, 2]), resolution=0.3)


# Dynamics

def test_crawford_dynamics_cycle(equilibria, crawford_quarter, var1):
    outcome = equilibria.best_response_dynamics(var1, crawford_quarter, (0, 0))
    assert outcome.status == DynamicsStatus.CYCLE
    assert list(outcome.cycle) == [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]


def test_counterexample_dynamics_cycle(equilibria, gadgets, var1):
    outcome = equilibria.best_response_dynamics(var1, gadgets.three_player_counterexample(), (0, 0, 0))
    assert outcome.status == DynamicsStatus.CYCLE
    assert outcome.cycle[0] == outcome.cycle[-1]


def test_dominant_strategies_converge(equilibria, var1):
    costs = {s: (s[0] + s[1], 2 - s[1] + s[0]) for s in product(range(2), range(2))}
    game = NormalFormGame([["a", "b"], ["x", "y"]], costs)
    outcome = equilibria.best_response_dynamics(var1, game, (1, 0))
    assert outcome.status == DynamicsStatus.CONVERGED
    assert outcome.steps <= 2
    assert outcome.final_profile == (0, 1)


def test_dynamics_step_limit(equilibria, crawford_quarter, var1):
    outcome = equilibria.best_response_dynamics(var1, crawford_quarter, (0, 0), max_steps=2)
    assert outcome.status == DynamicsStatus.UNDETERMINED
    assert outcome.steps == 2


# Configuration

def test_container_passes_concavity_samples():
    container = ContainerFactory.create_container_with_config(
        ServiceConfig(enable_error_logging=False, workers=1, concavity_samples=7)
    )
    container.initialize()
    try:
        assert container.get_service(IEquilibriumService).concavity_samples == 7
    finally:
        container.shutdown()
