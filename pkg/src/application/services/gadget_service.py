"""
Gadget Service - Single Responsibility: Build hardness gadgets, reductions and lifted solutions
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
import logging
import math

from ...domain.entities.game import MixedProfile, NormalFormGame
from ...domain.entities.instances import CnfFormula, MbpInstance, TdmInstance
from ...domain.entities.scheduling_game import SchedulingGame
from ...domain.exceptions import (
    BudgetExceededError,
    InexactRootError,
    InvalidInstanceError,
    InvalidValuationSpecError,
    LiftVerificationError,
    UnsatisfyingAssignmentError,
)
from ...domain.value_objects.scalar import Scalar, exact_root, parse_scalar
from ...domain.value_objects.valuation_spec import TwoValueDist, ValuationKind, ValuationSpec
from .equilibrium_service import IEquilibriumService
from .valuation_service import IValuationService


logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 2 ** 20
BISECTION_TOLERANCE = 1e-12
CRAWFORD_LABELS = ("crawford:f1", "crawford:f2")


@dataclass
class GadgetParameters:
    """Constants of the partition-to-scheduling reduction"""
    M: int
    x_hat: Fraction

    @property
    def h_upper(self) -> int:
        return 2 * self.M - 6

    def export_to_dict(self) -> Dict[str, Any]:
        return {"M": self.M, "x_hat": f"{self.x_hat.numerator}/{self.x_hat.denominator}", "h_upper": self.h_upper}


@dataclass
class FpCounterexample:
    """Maximization game stored as negated costs, plus the mixing segment of player 1"""
    game: NormalFormGame
    first: Tuple[Fraction, ...]
    second: Tuple[Fraction, ...]
    opponent: Tuple[Fraction, ...]

    def profile_at(self, lam: Fraction) -> MixedProfile:
        """lam * first + (1 - lam) * second against the fixed opponent"""
        mix = tuple(lam * a + (1 - lam) * b for a, b in zip(self.first, self.second))
        return MixedProfile((mix, self.opponent))


def _parse_assignment(assignment: Union[str, Sequence[Any]]) -> Tuple[bool, ...]:
    if isinstance(assignment, str):
        text = assignment.strip()
        if any(ch not in "01TFtf" for ch in text):
            raise UnsatisfyingAssignmentError(f"Assignment '{assignment}' must use 0/1 or T/F")
        return tuple(ch in "1Tt" for ch in text)
    return tuple(bool(v) for v in assignment)


def _inverse_sqrt_floor(gamma: Fraction) -> Fraction:
    """Rational lower bound of 1 / sqrt(gamma), exact for perfect squares"""
    try:
        return exact_root(1 / gamma, 2)
    except InexactRootError:
        scale = 10 ** 6
        return Fraction(math.isqrt(math.floor(scale * scale / gamma)), scale)


class IGadgetService(ABC):
    """Interface for gadget construction"""

    @abstractmethod
    def crawford(self, delta: Any) -> NormalFormGame:
        """2x2 game with a pure best-response cycle"""
        pass

    @abstractmethod
    def sat_game(self, phi: CnfFormula, delta: Any = None, spec: Optional[ValuationSpec] = None) -> NormalFormGame:
        """Two-player game that has an equilibrium iff phi is satisfiable"""
        pass

    @abstractmethod
    def sat_assignment_to_profile(self, phi: CnfFormula, assignment: Union[str, Sequence[Any]]) -> MixedProfile:
        """Equilibrium of the SAT game built from a satisfying assignment"""
        pass

    @abstractmethod
    def tdm_to_mbp(self, t: TdmInstance) -> MbpInstance:
        """3-dimensional matching to multibalanced partition"""
        pass

    @abstractmethod
    def mbp_verify(self, inst: MbpInstance, I: Sequence[int]) -> bool:
        """Check a multibalanced partition certificate"""
        pass

    @abstractmethod
    def mbp_to_scheduling(self, inst: MbpInstance) -> SchedulingGame:
        """Scheduling game on two ordered links encoding the partition instance"""
        pass

    @abstractmethod
    def mbp_solution_to_profile(self, inst: MbpInstance, I: Sequence[int], spec: ValuationSpec) -> MixedProfile:
        """Verified equilibrium of the scheduling game built from a partition solution"""
        pass

    @abstractmethod
    def three_player_counterexample(self) -> SchedulingGame:
        """Three players on two ordered links without equilibrium"""
        pass

    @abstractmethod
    def delta_for(self, spec: ValuationSpec) -> Fraction:
        """Rational delta satisfying the hardness conditions for the spec"""
        pass

    @abstractmethod
    def fp_counterexample(self) -> FpCounterexample:
        """Game where E - Var is constant on a segment with differing payoff distributions"""
        pass


class HardnessGadgetService(IGadgetService):
    """Constructions of the hardness reductions, with solution lifting"""

    def __init__(self, valuation_service: IValuationService, equilibrium_service: IEquilibriumService):
        """
        Initialize gadget service

        Args:
            valuation_service: closed-form two-value risks for the gadget tuning
            equilibrium_service: verifies every lifted profile before it is returned
        """
        self.valuation_service = valuation_service
        self.equilibrium_service = equilibrium_service

    # Crawford game

    def crawford(self, delta: Any) -> NormalFormGame:
        d = parse_scalar(delta)
        if not (0 < d < 1):
            raise ValueError(f"Crawford game needs 0 < delta < 1, got {delta}")
        one = 1.0 if isinstance(d, float) else Fraction(1)
        costs = {
            (0, 0): (one + d, one + d),
            (0, 1): (one, one + 2 * d),
            (1, 0): (one, one + 2 * d),
            (1, 1): (one + 2 * d, one),
        }
        return NormalFormGame([CRAWFORD_LABELS, CRAWFORD_LABELS], costs, name=f"crawford(delta={delta})")

    def crawford_wee_point(self) -> Tuple[Fraction, Fraction]:
        """The only mix of player 2 leaving player 1 indifferent"""
        return (Fraction(2, 3), Fraction(1, 3))

    def crawford_variance_term(self, delta: Any, x: Any) -> Scalar:
        """Variance of player 1 at ((x, 1 - x), (2/3, 1/3)): (2 delta^2 / 3)(4/3 - x)"""
        d, x = parse_scalar(delta), parse_scalar(x)
        if isinstance(d, float) or isinstance(x, float):
            d, x = float(d), float(x)
            return (2 * d ** 2 / 3) * (4 / 3 - x)
        return (2 * d ** 2 / 3) * (Fraction(4, 3) - x)

    # SAT reduction

    def sat_game(self, phi: CnfFormula, delta: Any = None, spec: Optional[ValuationSpec] = None) -> NormalFormGame:
        if delta is None:
            delta = self.delta_for(spec or ValuationSpec.var_risk(1))
        d = parse_scalar(delta)
        if not (0 < d <= Fraction(1, 4)):
            raise ValueError(f"SAT game needs 0 < delta <= 1/4, got {delta}")

        m = phi.m
        strategies: List[Tuple[str, Any]] = (
            [("clause", c) for c in range(phi.k)]
            + [("var", v) for v in range(1, m + 1)]
            + [("lit", l) for l in phi.literals()]
            + [("crawford", 0), ("crawford", 1)]
        )
        labels = [self._sat_label(kind, value) for kind, value in strategies]
        clause_sets = [frozenset(c) for c in phi.clauses]
        crawford = self.crawford(d)

        def tabulated(s1: Tuple[str, Any], s2: Tuple[str, Any]) -> Optional[Tuple[Any, Any]]:
            (k1, v1), (k2, v2) = s1, s2
            if k1 == "lit":
                if k2 == "lit":
                    return (2, 2) if v1 == -v2 else (1, 1)
                if k2 == "var":
                    return (2, m) if abs(v1) == v2 else (2, 0)
                if k2 == "clause":
                    return (2, m) if v1 in clause_sets[v2] else (2, 0)
                return (2, 1)
            if k1 == "crawford" and k2 == "crawford":
                return crawford.cost_vector((v1, v2))
            if k1 in ("var", "clause") and k2 == "crawford":
                return (2, 1)
            if (k1, k2) in (("var", "var"), ("clause", "clause"), ("var", "clause")):
                return (2, 2)
            return None

        costs = {}
        for a, s1 in enumerate(strategies):
            for b, s2 in enumerate(strategies):
                cell = tabulated(s1, s2)
                if cell is None:
                    # mirror rule: mu_i(s1, s2) = mu_other(s2, s1)
                    first, second = tabulated(s2, s1)
                    cell = (second, first)
                costs[(a, b)] = cell
        logger.info(f"SAT game with {len(strategies)} strategies per player for {phi.k} clauses over {m} variables")
        return NormalFormGame([labels, labels], costs, name=f"sat(k={phi.k}, m={m}, delta={delta})")

    @staticmethod
    def _sat_label(kind: str, value: Any) -> str:
        if kind == "clause":
            return f"clause:c{value + 1}"
        if kind == "var":
            return f"var:v{value}"
        if kind == "lit":
            return f"lit:{'+' if value > 0 else '-'}v{abs(value)}"
        return CRAWFORD_LABELS[value]

    def sat_assignment_to_profile(self, phi: CnfFormula, assignment: Union[str, Sequence[Any]]) -> MixedProfile:
        values = _parse_assignment(assignment)
        if len(values) != phi.m:
            raise UnsatisfyingAssignmentError(f"Assignment has {len(values)} values, formula has {phi.m} variables")
        if not phi.is_satisfied_by(values):
            raise UnsatisfyingAssignmentError(f"Assignment {''.join('1' if v else '0' for v in values)} does not satisfy the formula")
        true_literals = set(phi.true_literals(values))
        vector = (
            [Fraction(0)] * (phi.k + phi.m)
            + [Fraction(1, phi.m) if l in true_literals else Fraction(0) for l in phi.literals()]
            + [Fraction(0), Fraction(0)]
        )
        return MixedProfile((tuple(vector), tuple(vector)))

    def solve_sat_exhaustive(self, phi: CnfFormula) -> Optional[Tuple[bool, ...]]:
        """First satisfying assignment in lexicographic order (False before True)"""
        if 2 ** phi.m > EXHAUSTIVE_LIMIT:
            raise BudgetExceededError(f"{2 ** phi.m} assignments exceed the exhaustive limit")
        for values in product((False, True), repeat=phi.m):
            if phi.is_satisfied_by(values):
                return values
        return None

    # 3DM and partition instances

    def tdm_to_mbp(self, t: TdmInstance) -> MbpInstance:
        q, k = t.q, t.k
        rows = []
        for w, x, y in t.triples:
            row = [0] * (3 * q)
            row[w - 1] = 1
            row[q + x - 1] = 1
            row[2 * q + y - 1] = 1
            rows.append(row)
        column_sums = [sum(row[j] for row in rows) for j in range(3 * q)]
        rows.append([2 * b for b in column_sums])
        logger.debug(f"Partition instance with {k + 1} rows and {3 * q} columns from {k} triples")
        return MbpInstance(rows)

    def mbp_verify(self, inst: MbpInstance, I: Sequence[int]) -> bool:
        return inst.is_solution(I)

    def tdm_matching_to_mbp_solution(self, t: TdmInstance, chosen: Sequence[int]) -> List[int]:
        """Matching (1-based triples) to partition rows: the triples plus the last row"""
        if not t.is_matching(chosen):
            raise InvalidInstanceError(f"Triples {sorted(chosen)} are not a matching")
        return sorted(set(chosen)) + [t.k + 1]

    def mbp_solution_to_matching(self, t: TdmInstance, I: Sequence[int]) -> List[int]:
        """Partition rows to triples, dropping the last row"""
        return sorted(i for i in set(I) if i != t.k + 1)

    def solve_tdm_exhaustive(self, t: TdmInstance) -> Optional[List[int]]:
        if math.comb(t.k, t.q) > EXHAUSTIVE_LIMIT:
            raise BudgetExceededError(f"{math.comb(t.k, t.q)} triple subsets exceed the exhaustive limit")
        for chosen in combinations(range(1, t.k + 1), t.q):
            if t.is_matching(chosen):
                return list(chosen)
        return None

    def solve_mbp_exhaustive(self, inst: MbpInstance) -> Optional[List[int]]:
        if 2 ** inst.n > EXHAUSTIVE_LIMIT:
            raise BudgetExceededError(f"{2 ** inst.n} row subsets exceed the exhaustive limit")
        for size in range(inst.n + 1):
            for rows in combinations(range(1, inst.n + 1), size):
                if inst.is_solution(rows):
                    return list(rows)
        return None

    # Partition to scheduling

    def mbp_gadget_parameters(self, inst: MbpInstance) -> GadgetParameters:
        M = max(4, max(inst.column_sums()))
        return GadgetParameters(M=M, x_hat=Fraction(1, 2 * M + 1))

    @staticmethod
    def gadget_index(inst: MbpInstance, column: int, j: int) -> int:
        """Player index of gadget player [column, j], column 1-based"""
        return inst.n + 5 * (column - 1) + j

    def mbp_to_scheduling(self, inst: MbpInstance) -> SchedulingGame:
        n, m = inst.n, inst.m
        M = self.mbp_gadget_parameters(inst).M
        size = n + 5 * m
        omega = [[[0, 0] for _ in range(size)] for _ in range(size)]

        for k in range(1, m + 1):
            for j in range(4):
                me = self.gadget_index(inst, k, j)
                for i in range(5):
                    other = self.gadget_index(inst, k, i)
                    base = M - 4 if i == (j + 1) % 4 else M
                    omega[me][other] = [base, base + 1]
            hub = self.gadget_index(inst, k, 4)
            for i in range(5):
                omega[hub][self.gadget_index(inst, k, i)] = [M, M + 1]
            for row in range(n):
                a = inst.A[row][k - 1]
                omega[hub][row] = [a, 2 * a]

        labels = [f"row:{r}" for r in range(1, n + 1)] + [
            f"gadget:[{k},{j}]" for k in range(1, m + 1) for j in range(5)
        ]
        logger.info(f"Scheduling game with {size} players (M={M}) for a {n}x{m} partition instance")
        return SchedulingGame(omega, labels, name=f"mbp-scheduling(n={n}, m={m}, M={M})")

    def h_function(self, spec: ValuationSpec, M: int, x: Any) -> Scalar:
        """h(x) = x (2M + 1) + R(M + 1, x) - R(M, x) with R the two-value risk of spread w"""
        if spec.needs_roots:
            x = float(x)
        r_high = self.valuation_service.two_value_R(spec, TwoValueDist.of(0, M + 1, x))
        r_low = self.valuation_service.two_value_R(spec, TwoValueDist.of(0, M, x))
        return x * (2 * M + 1) + r_high - r_low

    def gadget_expectations(self, M: int, x: Scalar) -> Dict[str, Scalar]:
        """Closed-form expectations of the cycle players at the lifted profile"""
        return {"link1_players": (3 - x) * M, "link2_players": (2 + x) * (M + 1)}

    def choose_gadget_mix(self, spec: ValuationSpec, inst: MbpInstance) -> Scalar:
        """Probability of link 2 for every hub player [k, 4]"""
        params = self.mbp_gadget_parameters(inst)
        x_hat = params.x_hat
        if self.h_function(spec, params.M, x_hat) <= params.h_upper:
            return float(x_hat) if spec.needs_roots else x_hat

        lo, hi = 0.0, float(x_hat)
        while hi - lo > BISECTION_TOLERANCE:
            mid = (lo + hi) / 2
            if self.h_function(spec, params.M, mid) <= params.h_upper:
                lo = mid
            else:
                hi = mid
        logger.debug(f"h(x_hat) above {params.h_upper}; bisection picked x={lo:.3e}")
        return lo if spec.needs_roots else Fraction(lo)

    def mbp_solution_to_profile(self, inst: MbpInstance, I: Sequence[int], spec: ValuationSpec) -> MixedProfile:
        if not spec.is_two_value_monotone:
            raise InvalidValuationSpecError(f"{spec} is outside the two-value risk-monotone family")
        if not inst.is_solution(I):
            raise InvalidInstanceError(f"Rows {sorted(I)} do not solve the partition instance")

        x = self.choose_gadget_mix(spec, inst)
        one, zero = (1.0, 0.0) if isinstance(x, float) else (Fraction(1), Fraction(0))
        link1, link2 = (one, zero), (zero, one)
        chosen = set(I)
        rows = [link1 if r in chosen else link2 for r in range(1, inst.n + 1)]
        for _ in range(inst.m):
            rows.extend([link1, link2, link1, link2, (one - x, x)])
        profile = MixedProfile(tuple(rows))

        game = self.mbp_to_scheduling(inst)
        report = self.equilibrium_service.verify(spec, game, profile)
        if not report.is_equilibrium:
            raise LiftVerificationError(f"Lifted profile fails verification: {report.verdict}")
        return profile

    # Fixed games

    def three_player_counterexample(self) -> SchedulingGame:
        omega = [[[0, 0] for _ in range(3)] for _ in range(3)]
        for i in range(3):
            omega[i][(i + 1) % 3] = [0, 1]
            omega[i][(i + 2) % 3] = [2, 3]
        return SchedulingGame(omega, name="three-player-counterexample")

    def delta_for(self, spec: ValuationSpec) -> Fraction:
        if not spec.in_delta_family:
            raise InvalidValuationSpecError(f"No hardness threshold is known for {spec}")
        gamma = spec.gamma
        quarter = Fraction(1, 4)
        if spec.kind == ValuationKind.SD_RISK:
            delta_a = quarter * min(1 / gamma, Fraction(1))
        else:
            delta_a = quarter * min(_inverse_sqrt_floor(gamma), Fraction(1))
        if spec.kind == ValuationKind.COMBO:
            delta_b = min(quarter, 1 / gamma)
        else:
            delta_b = min(quarter, 1 / (2 * (1 + gamma)))
        return min(delta_a, delta_b) / 2

    def fp_counterexample(self) -> FpCounterexample:
        payoffs = [
            [Fraction(9, 2), Fraction(7, 2), Fraction(0), Fraction(0)],
            [Fraction(0), Fraction(0), Fraction(5), Fraction(15, 4)],
        ]
        costs = {(a, b): (-payoffs[a][b], Fraction(0)) for a in range(2) for b in range(4)}
        game = NormalFormGame(
            [["s1", "s2"], ["t1", "t2", "t3", "t4"]],
            costs,
            name="fp-counterexample",
            maximization=True
        )
        return FpCounterexample(
            game=game,
            first=(Fraction(1), Fraction(0)),
            second=(Fraction(0), Fraction(1)),
            opponent=(Fraction(1, 4), Fraction(1, 4), Fraction(1, 10), Fraction(2, 5))
        )


class GadgetFactory:
    """Factory for creating gadget services"""

    @staticmethod
    def create_service(service_type: str = "hardness", **kwargs) -> IGadgetService:
        """Create gadget service based on type"""
        if service_type.lower() == "hardness":
            return HardnessGadgetService(kwargs["valuation_service"], kwargs["equilibrium_service"])
        else:
            raise ValueError(f"Unsupported gadget service type: {service_type}")
