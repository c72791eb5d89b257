from fractions import Fraction

import pytest

from src.domain.entities.game import MixedProfile
from src.domain.entities.instances import MbpInstance
from src.domain.exceptions import InvalidValuationSpecError
from src.domain.value_objects.valuation_spec import ValuationSpec


HALF = Fraction(1, 2)
ALL_SPECS = [
    ValuationSpec.expectation(),
    ValuationSpec.var_risk(1),
    ValuationSpec.sd_risk(2),
    ValuationSpec.moment_sum({2: 1, 4: 1}),
    ValuationSpec.nu_power(3),
    ValuationSpec.combo(HALF, 1, 2),
]
RISK_SPECS = ALL_SPECS[1:]


# Valuations

@pytest.mark.parametrize("spec", RISK_SPECS, ids=str)
def test_risk_positivity(properties, spec):
    report = properties.check_risk_positivity(spec, samples=100, seed=0)
    assert report.passed, report.counterexample
    assert report.counterexample is None


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_oracle_consistency(properties, spec):
    assert properties.check_oracle_consistency(spec, samples=100, seed=1).passed


@pytest.mark.parametrize("spec", [ValuationSpec.var_risk(1), ValuationSpec.sd_risk(1), ValuationSpec.combo(HALF, 2, 3)], ids=str)
def test_e_strict_concavity(properties, spec):
    report = properties.check_e_strict_concavity(spec, trials=200, seed=2)
    assert report.passed
    assert report.samples == 200


def test_e_strict_concavity_outside_family(properties):
    with pytest.raises(InvalidValuationSpecError):
        properties.check_e_strict_concavity(ValuationSpec.moment_sum({2: 1}))


@pytest.mark.parametrize("spec", [ValuationSpec.var_risk(1), ValuationSpec.sd_risk(1), ValuationSpec.moment_sum({4: 1, 6: 2})], ids=str)
def test_two_values_monotonicity(properties, spec):
    assert properties.check_two_values_monotonicity(spec).passed


def test_two_values_monotonicity_outside_family(properties):
    with pytest.raises(InvalidValuationSpecError):
        properties.check_two_values_monotonicity(ValuationSpec.nu_power(2))


# Scheduling

def test_f_identities(properties):
    report = properties.check_f_identities()
    assert report.passed
    assert report.samples == 101 * 10


def test_embracing_and_geometric(properties):
    report = properties.check_embracing_and_geometric(step=Fraction(1, 20))
    assert report.passed
    assert report.min_margin > 0


# Equilibria

def test_wee_at_crawford_nash(properties, equilibria, crawford_quarter):
    spec = ValuationSpec.expectation()
    found = equilibria.support_enumeration_2p(spec, crawford_quarter).found
    report = properties.check_wee_at_equilibria(spec, crawford_quarter, found)
    assert report.passed
    assert report.samples == 1


def test_wee_skips_non_equilibria(properties, crawford_quarter, var1):
    report = properties.check_wee_at_equilibria(var1, crawford_quarter, [MixedProfile.uniform((2, 2))])
    assert report.passed
    assert report.skipped == 1


def test_mphpn_at_lifted_partition(properties, gadgets, var1):
    inst = MbpInstance(((3,),))
    game = gadgets.mbp_to_scheduling(inst)
    profile = gadgets.mbp_solution_to_profile(inst, [1], var1)
    report = properties.check_mphpn(var1, game, [profile])
    assert report.passed
    assert properties.mphpn_violation(game, profile) is None


def test_wee_at_found_sat_equilibria(properties, equilibria, gadgets, phi_or, var1):
    game = gadgets.sat_game(phi_or)
    found = equilibria.support_enumeration_2p(var1, game, max_support_size=2).found
    assert found
    report = properties.check_wee_at_equilibria(var1, game, found)
    assert report.passed, report.counterexample
    assert report.skipped == 0
    assert report.samples == len(found)


def test_checks_at_counterexample_searches(properties, equilibria, gadgets):
    game = gadgets.three_player_counterexample()
    candidates = [MixedProfile.uniform((2, 2, 2)), MixedProfile.pure((2, 2, 2), (0, 1, 1))]
    for spec in (ValuationSpec.var_risk(1), ValuationSpec.sd_risk(1)):
        found = list(equilibria.pure_equilibria(spec, game).found)
        assert not found
        wee = properties.check_wee_at_equilibria(spec, game, found + candidates)
        assert wee.passed
        assert wee.skipped == len(candidates)
        mphpn = properties.check_mphpn(spec, game, found + candidates)
        assert mphpn.passed
        assert mphpn.details["mphpn_violations_failing_verify"] == 1


def test_checks_at_partition_searches(properties, equilibria, gadgets, var1):
    inst = MbpInstance(((3,),))
    game = gadgets.mbp_to_scheduling(inst)
    found = list(equilibria.pure_equilibria(var1, game).found)
    found.append(gadgets.mbp_solution_to_profile(inst, [1], var1))
    wee = properties.check_wee_at_equilibria(var1, game, found)
    assert wee.passed, wee.counterexample
    assert wee.skipped == 0
    mphpn = properties.check_mphpn(var1, game, found)
    assert mphpn.passed, mphpn.counterexample
    assert all(row["verified"] and row["mphpn"] for row in mphpn.rows)


def test_mphpn_flags_mixed_neighbors(properties, gadgets):
    game = gadgets.three_player_counterexample()
    assert properties.mphpn_violation(game, MixedProfile.uniform((2, 2, 2))) == (0, 2)


def test_optimal_value_inside_support(properties, gadgets, phi_or, var1, matching_pennies):
    game = gadgets.sat_game(phi_or)
    profile = gadgets.sat_assignment_to_profile(phi_or, "11")
    assert properties.check_optimal_value(var1, game, 0, profile).passed
    uniform = MixedProfile.uniform((2, 2))
    assert properties.check_optimal_value(ValuationSpec.expectation(), matching_pennies, 1, uniform).passed


def test_optimal_value_needs_an_equilibrium(properties, crawford_quarter, var1):
    report = properties.check_optimal_value(var1, crawford_quarter, 0, MixedProfile.uniform((2, 2)))
    assert not report.passed
    assert report.counterexample["reason"] == "profile fails verification"


# Hardness conditions and fixed games

@pytest.mark.parametrize("gamma", [Fraction(1, 4), 1, 4])
def test_conditions_2ab_variance(properties, gamma):
    assert properties.check_conditions_2ab(ValuationSpec.var_risk(gamma)).passed


def test_conditions_2ab_details(properties, var1):
    report = properties.check_conditions_2ab(var1)
    assert report.details["delta"] == "1/8"
    assert report.details["max_risk"] == "1/64"


@pytest.mark.parametrize("gamma", [Fraction(1, 4), 1, 4], ids=str)
@pytest.mark.parametrize("build", [ValuationSpec.sd_risk, lambda gamma: ValuationSpec.combo(HALF, gamma, 2)], ids=["sd", "combo"])
def test_conditions_2ab_root_specs(properties, build, gamma):
    assert properties.check_conditions_2ab(build(gamma)).passed


@pytest.mark.parametrize("delta", [Fraction(1, 10), Fraction(1, 4), Fraction(1, 2)], ids=str)
@pytest.mark.parametrize("spec", [ValuationSpec.var_risk(1), ValuationSpec.sd_risk(1), ValuationSpec.combo(HALF, 1, 2)], ids=str)
def test_crawford_nonexistence(properties, spec, delta):
    report = properties.check_crawford_nonexistence(spec, delta, resolution=0.05)
    assert report.passed, report.counterexample
    assert [row["check"] for row in report.rows] == ["pure", "support2p", "wee-candidate", "grid"]


def test_fp_counterexample(properties):
    report = properties.check_fp_counterexample()
    assert report.passed
    assert report.details["mean"] == "2/1"
    assert report.details["second_moment"] == "65/8"
    assert report.details["value"] == "-17/8"


def test_sat_reduction_satisfiable(properties, phi_or, var1):
    report = properties.check_sat_reduction(var1, phi_or)
    assert report.passed
    assert report.details["satisfiable"]
    assert report.details["strategies"] == 9


def test_sat_reduction_unsatisfiable(properties, phi_unsat, var1):
    report = properties.check_sat_reduction(var1, phi_unsat)
    assert report.passed
    assert not report.details["satisfiable"]
    assert "support_pairs" in report.details


def test_mbp_chain(properties):
    report = properties.check_mbp_chain()
    assert report.passed
    assert report.details == {"M": 4, "x": "1/9", "players": 17}


def test_tdm_correspondence(properties):
    report = properties.check_tdm_correspondence()
    assert report.passed
    assert report.samples == 1 + 8 + 28 + 56 + 70


def test_three_player_nonexistence(properties, var1):
    report = properties.check_three_player_nonexistence(var1, resolution=0.05)
    assert report.passed
    assert report.details["cycle"][0] == report.details["cycle"][-1]


def test_report_display(properties):
    text = properties.check_fp_counterexample().format_for_display()
    assert text.startswith("✅ fp-counterexample")
