"""
Property Check Service - Single Responsibility: Executable checks of the analytic properties
"""
from abc import ABC, abstractmethod
from fractions import Fraction
from itertools import combinations, product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from ...domain.entities.game import FiniteGame, MixedProfile, NormalFormGame
from ...domain.entities.instances import CnfFormula, TdmInstance
from ...domain.entities.reports import DynamicsStatus, EquilibriumReport, PropertyReport
from ...domain.entities.scheduling_game import SchedulingGame
from ...domain.exceptions import InvalidGameError, InvalidValuationSpecError
from ...domain.value_objects.scalar import DEFAULT_TOLERANCE, ArithmeticMode, Scalar, format_scalar
from ...domain.value_objects.valuation_spec import TwoValueDist, ValuationKind, ValuationSpec
from .equilibrium_service import IEquilibriumService
from .gadget_service import HardnessGadgetService
from .scheduling_service import ISchedulingService, f
from .valuation_service import MomentValuationService


logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 500
DEFAULT_SEED = 0
DEFAULT_WEE_CONSTANT = 10
MIN_EXPECTATION_GAP = 1e-3

Equilibrium = Union[MixedProfile, EquilibriumReport]


class _Outcome:
    """Accumulates margins; the first failing observation becomes the counterexample"""

    def __init__(self):
        self.min_margin: Optional[float] = None
        self.counterexample: Optional[Dict[str, Any]] = None
        self.rows: List[Dict[str, Any]] = []

    def observe(self, margin: Scalar, ok: bool, witness: Callable[[], Dict[str, Any]]) -> None:
        value = float(margin)
        self.min_margin = value if self.min_margin is None else min(self.min_margin, value)
        if not ok and self.counterexample is None:
            self.counterexample = witness()

    def require(self, ok: bool, witness: Callable[[], Dict[str, Any]]) -> None:
        if not ok and self.counterexample is None:
            self.counterexample = witness()

    def report(self, name: str, domain: str, **kwargs) -> PropertyReport:
        return PropertyReport(
            name=name,
            domain=domain,
            passed=self.counterexample is None,
            min_margin=self.min_margin,
            counterexample=self.counterexample,
            rows=tuple(self.rows),
            **kwargs
        )


def _fmt(value: Scalar) -> Union[str, float]:
    return format_scalar(value) if isinstance(value, (Fraction, float)) else value


def _grid(step: Fraction, include_ends: bool = True) -> List[Fraction]:
    count = int(1 / step)
    points = [step * j for j in range(count + 1)]
    return points if include_ends else points[1:-1]


class IPropertyCheckService(ABC):
    """Interface for property suites"""

    @abstractmethod
    def check_risk_positivity(self, spec: ValuationSpec, g: Optional[FiniteGame] = None, samples: int = DEFAULT_SAMPLES) -> PropertyReport:
        pass

    @abstractmethod
    def check_e_strict_concavity(self, spec: ValuationSpec, g: Optional[FiniteGame] = None, i: int = 0, trials: int = DEFAULT_SAMPLES) -> PropertyReport:
        pass

    @abstractmethod
    def check_wee_at_equilibria(self, spec: ValuationSpec, g: FiniteGame, equilibria: Sequence[Equilibrium]) -> PropertyReport:
        pass

    @abstractmethod
    def check_mphpn(self, spec: ValuationSpec, g: SchedulingGame, equilibria: Sequence[Equilibrium]) -> PropertyReport:
        pass

    @abstractmethod
    def check_optimal_value(self, spec: ValuationSpec, g: FiniteGame, i: int, p: MixedProfile, samples: int = 20) -> PropertyReport:
        pass

    @abstractmethod
    def check_conditions_2ab(self, spec: ValuationSpec, delta: Any = None) -> PropertyReport:
        pass

    @abstractmethod
    def check_two_values_monotonicity(self, spec: ValuationSpec) -> PropertyReport:
        pass

    @abstractmethod
    def check_embracing_and_geometric(self, step: Fraction = Fraction(1, 100)) -> PropertyReport:
        pass

    @abstractmethod
    def check_crawford_nonexistence(self, spec: ValuationSpec, delta: Any, resolution: float = 0.01) -> PropertyReport:
        pass

    @abstractmethod
    def check_fp_counterexample(self) -> PropertyReport:
        pass


class SampledPropertyCheckService(IPropertyCheckService):
    """
    Property suites driven by seeded sampling and exact grids

    Exact arithmetic is used wherever the valuation stays rational, so a
    failing report carries a counterexample that re-evaluates identically.
    """

    def __init__(
        self,
        valuation_service: MomentValuationService,
        scheduling_service: ISchedulingService,
        equilibrium_service: IEquilibriumService,
        gadget_service: HardnessGadgetService,
        tolerance: float = DEFAULT_TOLERANCE,
        samples: int = DEFAULT_SAMPLES,
        seed: int = DEFAULT_SEED,
        wee_constant: int = DEFAULT_WEE_CONSTANT
    ):
        """
        Initialize property check service

        Args:
            valuation_service: valuations, risks and two-value closed forms
            scheduling_service: moment formula and ordered-links checks
            equilibrium_service: verification and searches
            gadget_service: fixed games and reductions
            tolerance: float-mode tolerance
            samples: default sample count of randomized suites
            seed: default seed of randomized suites
            wee_constant: c in the bound wee_residual <= c * tol
        """
        self.valuation_service = valuation_service
        self.scheduling_service = scheduling_service
        self.equilibrium_service = equilibrium_service
        self.gadget_service = gadget_service
        self.tolerance = tolerance
        self.samples = samples
        self.seed = seed
        self.wee_constant = wee_constant

    # Random inputs

    def _rng(self, seed: Optional[int]) -> np.random.Generator:
        return np.random.default_rng(self.seed if seed is None else seed)

    @staticmethod
    def random_game(rng: np.random.Generator, max_players: int = 3, max_strategies: int = 3, max_cost: int = 9) -> NormalFormGame:
        n = int(rng.integers(1, max_players + 1))
        sizes = [int(rng.integers(1, max_strategies + 1)) for _ in range(n)]
        labels = [[f"s{k}" for k in range(size)] for size in sizes]
        costs = {
            s: tuple(int(rng.integers(0, max_cost + 1)) for _ in range(n))
            for s in product(*(range(size) for size in sizes))
        }
        return NormalFormGame(labels, costs, name="random")

    @staticmethod
    def random_vector(rng: np.random.Generator, size: int, exact: bool, allow_zero: bool = True) -> Tuple[Scalar, ...]:
        if not exact:
            vector = rng.dirichlet(np.ones(size))
            if allow_zero and size > 1 and rng.random() < 0.3:
                vector[int(rng.integers(size))] = 0.0
                vector = vector / vector.sum()
            return tuple(float(x) for x in vector)
        low = 0 if allow_zero else 1
        weights = [int(w) for w in rng.integers(low, 5, size)]
        if sum(weights) == 0:
            weights[int(rng.integers(size))] = 1
        total = sum(weights)
        return tuple(Fraction(w, total) for w in weights)

    def random_profile(self, rng: np.random.Generator, sizes: Sequence[int], exact: bool) -> MixedProfile:
        return MixedProfile(tuple(self.random_vector(rng, size, exact) for size in sizes))

    # Valuation properties

    def check_risk_positivity(
        self,
        spec: ValuationSpec,
        g: Optional[FiniteGame] = None,
        samples: Optional[int] = None,
        seed: Optional[int] = None
    ) -> PropertyReport:
        samples = self.samples if samples is None else samples
        rng = self._rng(seed)
        outcome = _Outcome()

        for sample in range(samples):
            game = g if g is not None else self.random_game(rng)
            game = self.valuation_service.align_mode(spec, game)
            exact = game.mode == ArithmeticMode.EXACT
            p = self.random_profile(rng, game.sizes, exact)
            ctx = game.context(self.tolerance)
            for i in range(game.n):
                dist = self.valuation_service.cost_distribution(game, i, p)
                constant = len({cost for _, cost in dist}) == 1
                risk = self.valuation_service.risk(spec, game, i, p)
                margin = ctx.tol - abs(risk) if constant else risk - ctx.tol
                ok = ctx.is_close(risk, ctx.zero) if constant else risk > ctx.tol
                outcome.observe(margin, ok, lambda: {
                    "sample": sample,
                    "player": i,
                    "profile": p.export_to_dict()["profile"],
                    "costs": [[_fmt(prob), _fmt(cost)] for prob, cost in dist],
                    "support_constant": constant,
                    "risk": _fmt(risk),
                })

        # targeted constructions: constant costs and genuine two-value costs
        for a, b, q in [(0, 0, Fraction(1, 2)), (3, 3, Fraction(1, 3)), (1, 2, Fraction(1, 2)), (0, 5, Fraction(1, 10)), (2, 9, Fraction(9, 10))]:
            d = TwoValueDist.of(a, b, float(q) if spec.needs_roots else q)
            game, profile = self.valuation_service.realize_two_value(d)
            risk = self.valuation_service.risk(spec, game, 0, profile)
            ctx = game.context(self.tolerance)
            ok = ctx.is_close(risk, ctx.zero) if a == b else risk > ctx.tol
            outcome.rows.append({"a": a, "b": b, "q": _fmt(d.q), "risk": float(risk)})
            outcome.require(ok, lambda: {"a": a, "b": b, "q": _fmt(d.q), "risk": _fmt(risk)})

        domain = "given game" if g is not None else "random games with n <= 3, |S_i| <= 3, costs in 0..9"
        return outcome.report(
            "risk-positivity",
            f"{domain}, {samples} random profiles, {spec}",
            seed=self.seed if seed is None else seed,
            samples=samples
        )

    def check_oracle_consistency(self, spec: ValuationSpec, samples: Optional[int] = None, seed: Optional[int] = None) -> PropertyReport:
        """Closed-form two-value valuation equals the valuation of a game realizing it"""
        samples = self.samples if samples is None else samples
        rng = self._rng(seed)
        outcome = _Outcome()
        for _ in range(samples):
            a = int(rng.integers(0, 10))
            b = a + int(rng.integers(0, 10))
            q = Fraction(int(rng.integers(0, 21)), 20)
            d = TwoValueDist.of(a, b, float(q) if spec.needs_roots else q)
            game, profile = self.valuation_service.realize_two_value(d)
            closed = self.valuation_service.two_value_V(spec, d)
            direct = self.valuation_service.valuation(spec, game, 0, profile)
            ctx = game.context(self.tolerance)
            outcome.observe(ctx.tol - abs(closed - direct), ctx.is_close(closed, direct), lambda: {
                "a": a, "b": b, "q": _fmt(d.q), "closed_form": _fmt(closed), "valuation": _fmt(direct),
            })
        return outcome.report(
            "oracle-consistency",
            f"{samples} two-value distributions with 0 <= a <= b <= 18, q on a 1/20 grid, {spec}",
            seed=self.seed if seed is None else seed,
            samples=samples
        )

    def check_e_strict_concavity(
        self,
        spec: ValuationSpec,
        g: Optional[FiniteGame] = None,
        i: int = 0,
        trials: Optional[int] = None,
        seed: Optional[int] = None
    ) -> PropertyReport:
        if not spec.is_e_strictly_concave:
            raise InvalidValuationSpecError(f"E-strict concavity is checked for e+var, e+sd and combo, got {spec}")
        trials = self.samples if trials is None else trials
        rng = self._rng(seed)
        gap_floor = max(10 * self.tolerance, MIN_EXPECTATION_GAP)
        outcome = _Outcome()
        skipped = 0

        for trial in range(trials):
            if g is not None:
                game = g.in_mode(ArithmeticMode.FLOAT)
            else:
                labels = [["s0", "s1"], ["t0", "t1", "t2"]]
                costs = {s: (float(rng.integers(0, 10)), float(rng.integers(0, 10))) for s in product(range(2), range(3))}
                game = NormalFormGame(labels, costs, name="random-2x3")
            player = i if g is not None else int(rng.integers(2))
            base = self.random_profile(rng, game.sizes, exact=False)
            first = self.random_vector(rng, game.sizes[player], exact=False, allow_zero=False)
            second = self.random_vector(rng, game.sizes[player], exact=False, allow_zero=False)
            lam = float(rng.uniform(0.05, 0.95))
            p1, p2 = base.with_strategy(player, first), base.with_strategy(player, second)

            gap = abs(
                self.valuation_service.expectation(game, player, p1)
                - self.valuation_service.expectation(game, player, p2)
            )
            if gap <= gap_floor:
                skipped += 1
                continue
            mixed = base.with_strategy(player, tuple(lam * x + (1 - lam) * y for x, y in zip(first, second)))
            v_mixed = self.valuation_service.valuation(spec, game, player, mixed)
            v1 = self.valuation_service.valuation(spec, game, player, p1)
            v2 = self.valuation_service.valuation(spec, game, player, p2)
            margin = v_mixed - (lam * v1 + (1 - lam) * v2)
            outcome.observe(margin, margin > self.tolerance, lambda: {
                "trial": trial,
                "player": player,
                "opponents": base.export_to_dict()["profile"],
                "first": list(first),
                "second": list(second),
                "lambda": lam,
                "value_mixed": v_mixed,
                "value_first": v1,
                "value_second": v2,
            })

        domain = "given game" if g is not None else "random 2x3 games with costs in 0..9"
        return outcome.report(
            "e-strict-concavity",
            f"{domain}, {trials} segments, expectation gap > {gap_floor:g}, {spec}",
            seed=self.seed if seed is None else seed,
            samples=trials,
            skipped=skipped
        )

    def check_two_values_monotonicity(self, spec: ValuationSpec) -> PropertyReport:
        if not spec.is_two_value_monotone:
            raise InvalidValuationSpecError(f"Two-value monotonicity is checked for e+var, e+sd and moments, got {spec}")
        spreads = [Fraction(j, 4) for j in range(17)]
        qs = _grid(Fraction(1, 20))
        outcome = _Outcome()

        def risk(d: Fraction, q: Fraction) -> Scalar:
            if spec.needs_roots:
                return self.valuation_service.two_value_R(spec, TwoValueDist.of(0.0, float(d), float(q)))
            return self.valuation_service.two_value_R(spec, TwoValueDist.of(0, d, q))

        tol = self.tolerance if spec.needs_roots else 0
        for q in qs:
            values = [risk(d, q) for d in spreads]
            for d_low, d_high, r_low, r_high in zip(spreads, spreads[1:], values, values[1:]):
                outcome.observe(r_high - r_low + tol, r_high >= r_low - tol, lambda: {
                    "q": _fmt(q), "spread_low": _fmt(d_low), "spread_high": _fmt(d_high),
                    "risk_low": _fmt(r_low), "risk_high": _fmt(r_high),
                })
            for d, value in zip(spreads, values):
                mirrored = risk(d, 1 - q)
                outcome.require(abs(value - mirrored) <= tol, lambda: {
                    "spread": _fmt(d), "q": _fmt(q), "risk": _fmt(value), "risk_mirrored": _fmt(mirrored),
                })
            outcome.rows.append({"q": float(q), "max_risk": float(values[-1])})
        return outcome.report(
            "two-values-monotonicity",
            f"spreads 0..4 step 1/4, q in [0, 1] step 1/20, {spec}",
            samples=len(spreads) * len(qs)
        )

    # Scheduling properties

    def check_moment_formula(
        self,
        instances: int = 200,
        seed: Optional[int] = None,
        orders: Sequence[int] = (0, 1, 2, 4, 6, 8)
    ) -> PropertyReport:
        """Partition formula equals the enumerated central moment, exactly"""
        rng = self._rng(seed)
        outcome = _Outcome()
        for instance in range(instances):
            n = int(rng.integers(1, 5))
            omega = [[[int(w) for w in rng.integers(0, 6, 2)] for _ in range(n)] for _ in range(n)]
            game = SchedulingGame(omega, name="random-scheduling")
            p = self.random_profile(rng, game.sizes, exact=True)
            i = int(rng.integers(n))
            link = int(rng.integers(2))
            for k in orders:
                formula = self.scheduling_service.k_moment_formula(game, i, link, p, k)
                oracle = self.valuation_service.k_moment(game, i, p.with_pure(i, link), k)
                outcome.require(formula == oracle, lambda: {
                    "instance": instance, "omega": omega, "player": i, "link": link, "k": k,
                    "profile": p.export_to_dict()["profile"],
                    "formula": _fmt(formula), "oracle": _fmt(oracle),
                })
        return outcome.report(
            "moment-formula",
            f"{instances} scheduling games with n <= 4, m = 2, weights in 0..5, k in {list(orders)}",
            seed=self.seed if seed is None else seed,
            samples=instances
        )

    def check_f_identities(self, step: Fraction = Fraction(1, 100), max_order: int = 9) -> PropertyReport:
        """Sign, symmetry and boundary identities of the Bernoulli central moments f(x, j)"""
        xs = _grid(Fraction(step))
        interior = [x for x in xs if 0 < x < 1]
        outcome = _Outcome()
        half = Fraction(1, 2)

        for x in xs:
            outcome.require(f(x, 1) == 0, lambda: {"identity": "f(x,1) = 0", "x": _fmt(x), "value": _fmt(f(x, 1))})
            outcome.require(f(x, 0) == 1, lambda: {"identity": "f(x,0) = 1", "x": _fmt(x), "value": _fmt(f(x, 0))})
        for j in range(1, max_order + 1):
            for x in (Fraction(0), Fraction(1)):
                outcome.require(f(x, j) == 0, lambda: {"identity": "f(0,j) = f(1,j) = 0", "x": _fmt(x), "j": j})
        for j in range(2, max_order + 1):
            for x in interior:
                value, mirrored = f(x, j), f(1 - x, j)
                if j % 2 == 0:
                    outcome.observe(value, value > 0, lambda: {"identity": "f(x,j) > 0 for even j", "x": _fmt(x), "j": j, "value": _fmt(value)})
                    outcome.require(value == mirrored, lambda: {"identity": "f(x,j) = f(1-x,j) for even j", "x": _fmt(x), "j": j})
                else:
                    outcome.require(value == -mirrored, lambda: {"identity": "f(x,j) = -f(1-x,j) for odd j", "x": _fmt(x), "j": j})
                    expected_sign = (x < half) - (x > half)
                    sign = (value > 0) - (value < 0)
                    outcome.require(sign == expected_sign, lambda: {"identity": "sign of f(x,j) for odd j", "x": _fmt(x), "j": j, "value": _fmt(value)})
        return outcome.report(
            "f-identities",
            f"x in [0, 1] step {step}, j in 0..{max_order}; f(x, 0) = 1 including x in {{0, 1}}",
            samples=len(xs) * (max_order + 1)
        )

    def check_embracing_and_geometric(self, step: Fraction = Fraction(1, 100)) -> PropertyReport:
        outcome = _Outcome()
        h = Fraction(1, 10000)
        parameter_sets = [
            (Fraction(3, 10), Fraction(7, 10), Fraction(1), Fraction(1), Fraction(1)),
            (Fraction(1, 10), Fraction(9, 10), Fraction(2), Fraction(1), Fraction(1, 2)),
            (Fraction(2, 5), Fraction(3, 5), Fraction(3), Fraction(1, 2), Fraction(1)),
            (Fraction(1, 4), Fraction(4, 5), Fraction(1, 2), Fraction(2), Fraction(1, 4)),
        ]
        ys = [Fraction(j, 10) for j in range(1, 51)]
        evaluations = 0
        for r, s in product((3, 5, 7), repeat=2):
            for p, q, w, alpha, beta in parameter_sets:
                for y in ys:
                    slope = (
                        self.scheduling_service.embracing_F(r, s, p, q, w, alpha, beta, y + h)
                        - self.scheduling_service.embracing_F(r, s, p, q, w, alpha, beta, y)
                    ) / h
                    evaluations += 1
                    outcome.observe(slope, slope > 0, lambda: {
                        "inequality": "embracing F increasing", "r": r, "s": s, "p": _fmt(p), "q": _fmt(q),
                        "w": _fmt(w), "alpha": _fmt(alpha), "beta": _fmt(beta), "y": _fmt(y), "slope": _fmt(slope),
                    })
        for r in (3, 5, 7):
            for x in _grid(Fraction(step), include_ends=False):
                gap = f(x, r - 1) * f(x, r + 1) - f(x, r) ** 2
                evaluations += 1
                outcome.observe(gap, gap > 0, lambda: {
                    "inequality": "f(x,r-1) f(x,r+1) > f(x,r)^2", "r": r, "x": _fmt(x), "gap": _fmt(gap),
                })
        return outcome.report(
            "embracing-geometric",
            f"(r, s) in {{3,5,7}}^2, {len(parameter_sets)} parameter sets, y in (0, 5] step 1/10, "
            f"difference step {h}; x in (0, 1) step {step} for odd r in {{3,5,7}}",
            samples=evaluations
        )

    # Equilibrium properties

    def _profiles(self, equilibria: Sequence[Equilibrium]) -> List[MixedProfile]:
        return [e.profile if isinstance(e, EquilibriumReport) else e for e in equilibria]

    def check_wee_at_equilibria(self, spec: ValuationSpec, g: FiniteGame, equilibria: Sequence[Equilibrium]) -> PropertyReport:
        outcome = _Outcome()
        skipped = 0
        for index, p in enumerate(self._profiles(equilibria)):
            report = self.equilibrium_service.verify(spec, g, p)
            if not report.is_equilibrium:
                skipped += 1
                continue
            bound = self.wee_constant * report.context.tol
            residuals = self.equilibrium_service.wee_residual(spec, g, p)
            worst = max(residuals)
            outcome.rows.append({"equilibrium": index, "max_residual": float(worst)})
            outcome.observe(bound - worst, worst <= bound, lambda: {
                "equilibrium": index,
                "profile": p.export_to_dict()["profile"],
                "residuals": [_fmt(r) for r in residuals],
                "bound": _fmt(bound),
            })
        return outcome.report(
            "wee",
            f"{len(equilibria)} equilibria, residual <= {self.wee_constant} * tol, {spec}",
            samples=len(equilibria),
            skipped=skipped
        )

    def mphpn_violation(self, g: SchedulingGame, p: MixedProfile) -> Optional[Tuple[int, int]]:
        """First (mixed player, mixed link-1 neighbor) pair, if any"""
        supp = p.support(self.tolerance)
        for i in range(g.n):
            if len(supp[i]) == 1:
                continue
            for other in g.neighbors(i, 0):
                if len(supp[other]) > 1:
                    return (i, other)
        return None

    def check_mphpn(self, spec: ValuationSpec, g: SchedulingGame, equilibria: Sequence[Equilibrium]) -> PropertyReport:
        if not self.scheduling_service.check_ordered_links(g).holds:
            raise InvalidGameError("Mixed-player-has-pure-neighbors is checked on two ordered links")
        if not spec.is_two_value_monotone:
            raise InvalidValuationSpecError(f"Mixed-player-has-pure-neighbors is checked for two-value risk-monotone valuations, got {spec}")
        outcome = _Outcome()
        for index, p in enumerate(self._profiles(equilibria)):
            verified = self.equilibrium_service.verify(spec, g, p).is_equilibrium
            violation = self.mphpn_violation(g, p)
            outcome.rows.append({
                "equilibrium": index,
                "verified": verified,
                "mphpn": violation is None,
                "violation": list(violation) if violation else None,
            })
            outcome.require(not (verified and violation is not None), lambda: {
                "equilibrium": index,
                "profile": p.export_to_dict()["profile"],
                "mixed_player": violation[0],
                "mixed_neighbor": violation[1],
            })
        unverified_violations = sum(1 for row in outcome.rows if not row["mphpn"] and not row["verified"])
        return outcome.report(
            "mphpn",
            f"{len(equilibria)} profiles on a {g.n}-player ordered-links game, {spec}",
            samples=len(equilibria),
            details={"mphpn_violations_failing_verify": unverified_violations}
        )

    def check_optimal_value(
        self,
        spec: ValuationSpec,
        g: FiniteGame,
        i: int,
        p: MixedProfile,
        samples: int = 20,
        seed: Optional[int] = None
    ) -> PropertyReport:
        rng = self._rng(seed)
        outcome = _Outcome()
        report = self.equilibrium_service.verify(spec, g, p)
        if not report.is_equilibrium:
            outcome.require(False, lambda: {"reason": "profile fails verification", "verdict": report.verdict})
            return outcome.report("optimal-value", f"player {i}, {spec}", seed=self.seed if seed is None else seed)

        profile = report.profile
        game = self.valuation_service.align_mode(spec, g)
        if profile.mode == ArithmeticMode.FLOAT:
            game = game.in_mode(ArithmeticMode.FLOAT)
        bound = self.wee_constant * report.context.tol
        baseline = report.players[i].current_value
        support_i = sorted(profile.support(self.tolerance)[i])
        exact = profile.mode == ArithmeticMode.EXACT
        for sample in range(samples):
            weights = self.random_vector(rng, len(support_i), exact, allow_zero=False)
            zero = Fraction(0) if exact else 0.0
            vector = [zero] * g.sizes[i]
            for strategy, weight in zip(support_i, weights):
                vector[strategy] = weight
            value = self.valuation_service.valuation(spec, game, i, profile.with_strategy(i, vector))
            drift = abs(value - baseline)
            outcome.observe(bound - drift, drift <= bound, lambda: {
                "sample": sample, "player": i, "mixture": [_fmt(x) for x in vector],
                "value": _fmt(value), "equilibrium_value": _fmt(baseline),
            })
        return outcome.report(
            "optimal-value",
            f"player {i}, {samples} mixtures inside its support of size {len(support_i)}, {spec}",
            seed=self.seed if seed is None else seed,
            samples=samples
        )

    # Hardness conditions and fixed games

    def check_conditions_2ab(self, spec: ValuationSpec, delta: Any = None) -> PropertyReport:
        d = self.gadget_service.delta_for(spec) if delta is None else Fraction(delta)
        floaty = spec.needs_roots
        outcome = _Outcome()

        def dist(a: Fraction, b: Fraction, q: Fraction) -> TwoValueDist:
            return TwoValueDist.of(float(a), float(b), float(q)) if floaty else TwoValueDist.of(a, b, q)

        half = Fraction(1, 2)
        max_risk: Scalar = 0
        for q in _grid(Fraction(1, 1000)):
            risk = self.valuation_service.two_value_R(spec, dist(Fraction(1), 1 + 2 * d, q))
            max_risk = max(max_risk, risk)
            outcome.observe(half - risk, risk < half - (self.tolerance if floaty else 0), lambda: {
                "condition": "2a", "delta": _fmt(d), "q": _fmt(q), "risk": _fmt(risk),
            })

        grid = _grid(Fraction(1, 100))
        low_values = {r: self.valuation_service.two_value_V(spec, dist(Fraction(1), 1 + 2 * d, r)) for r in grid}
        pairs = 0
        for q in grid[1:-1]:
            high = self.valuation_service.two_value_V(spec, dist(Fraction(1), Fraction(2), q))
            for r in grid:
                if r > q:
                    break
                pairs += 1
                gap = high - low_values[r]
                outcome.observe(gap, gap > (self.tolerance if floaty else 0), lambda: {
                    "condition": "2b", "delta": _fmt(d), "r": _fmt(r), "q": _fmt(q),
                    "value_low_spread": _fmt(low_values[r]), "value_unit_spread": _fmt(high),
                })
        return outcome.report(
            "conditions-2ab",
            f"delta = {d}; q step 1/1000 for the risk bound, 0 <= r <= q step 1/100 ({pairs} pairs), {spec}",
            samples=1001 + pairs,
            details={"delta": _fmt(d), "max_risk": _fmt(max_risk)}
        )

    def check_crawford_nonexistence(self, spec: ValuationSpec, delta: Any, resolution: float = 0.01) -> PropertyReport:
        game = self.gadget_service.crawford(delta)
        outcome = _Outcome()

        pure = self.equilibrium_service.pure_equilibria(spec, game)
        outcome.rows.append({"check": "pure", "found": len(pure.found), "exhausted": pure.exhausted})
        outcome.require(pure.is_empty, lambda: {"check": "pure", "equilibrium": pure.found[0].export_to_dict()})

        support = self.equilibrium_service.support_enumeration_2p(spec, game)
        outcome.rows.append({"check": "support2p", "found": len(support.found), "exhausted": support.exhausted})
        outcome.require(support.is_empty and support.exhausted, lambda: {
            "check": "support2p", "found": [r.export_to_dict() for r in support.found], "exhausted": support.exhausted,
        })

        wee_point = self.gadget_service.crawford_wee_point()
        candidate = self.equilibrium_service.verify(spec, game, MixedProfile((wee_point, wee_point)))
        outcome.rows.append({"check": "wee-candidate", "found": int(candidate.is_equilibrium), "exhausted": True})
        outcome.require(not candidate.is_equilibrium, lambda: {"check": "wee-candidate", "report": candidate.export_to_dict()})

        # the grid tolerance admits approximate equilibria near the indifference point
        grid = self.equilibrium_service.grid_search(spec, game, resolution, tol=self.tolerance)
        outcome.rows.append({"check": "grid", "found": len(grid.found), "exhausted": grid.exhausted})
        outcome.require(grid.is_empty, lambda: {"check": "grid", "equilibrium": grid.found[0].export_to_dict()})

        details: Dict[str, Any] = {"wee_candidate_verdict": candidate.verdict}
        if spec.kind == ValuationKind.VAR_RISK:
            d = Fraction(delta)
            for x in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
                profile = MixedProfile(((x, 1 - x), wee_point))
                variance = self.valuation_service.k_moment(game, 0, profile, 2)
                closed = self.gadget_service.crawford_variance_term(d, x)
                outcome.require(variance == closed, lambda: {
                    "check": "variance-term", "x": _fmt(x), "variance": _fmt(variance), "closed_form": _fmt(closed),
                })
            details["variance_term"] = "(2 delta^2 / 3)(4/3 - x) at x in {1/4, 1/2, 3/4}"
        return outcome.report(
            "crawford-nonexistence",
            f"crawford(delta={delta}), grid resolution {resolution}, {spec}",
            details=details
        )

    def check_fp_counterexample(self) -> PropertyReport:
        fp = self.gadget_service.fp_counterexample()
        game = fp.game
        outcome = _Outcome()

        def payoff_distribution(p: MixedProfile) -> Dict[Fraction, Fraction]:
            dist: Dict[Fraction, Fraction] = {}
            for prob, cost in self.valuation_service.cost_distribution(game, 0, p):
                dist[-cost] = dist.get(-cost, Fraction(0)) + prob
            return {value: prob for value, prob in dist.items() if prob}

        def summary(p: MixedProfile) -> Tuple[Fraction, Fraction, Fraction]:
            dist = payoff_distribution(p)
            mean = sum(prob * value for value, prob in dist.items())
            second = sum(prob * value ** 2 for value, prob in dist.items())
            return mean, second, mean - (second - mean ** 2)

        first, second = fp.profile_at(Fraction(1)), fp.profile_at(Fraction(0))
        dist_first, dist_second = payoff_distribution(first), payoff_distribution(second)
        outcome.require(dist_first != dist_second, lambda: {"check": "distributions differ"})
        mean_1, raw_1, value_1 = summary(first)
        mean_2, raw_2, value_2 = summary(second)
        for name, got in (("mean first", mean_1), ("mean second", mean_2)):
            outcome.require(got == 2, lambda: {"check": name, "value": _fmt(got), "expected": "2/1"})
        for name, got in (("second moment first", raw_1), ("second moment second", raw_2)):
            outcome.require(got == Fraction(65, 8), lambda: {"check": name, "value": _fmt(got), "expected": "65/8"})

        for j in range(1, 10):
            lam = Fraction(j, 10)
            _, _, value = summary(fp.profile_at(lam))
            outcome.rows.append({"lambda": float(lam), "value": float(value)})
            outcome.require(value == value_1, lambda: {
                "check": "E - Var constant on the segment", "lambda": _fmt(lam),
                "value": _fmt(value), "endpoint_value": _fmt(value_1),
            })
        return outcome.report(
            "fp-counterexample",
            "four-column maximization game, lambda in {1/10, ..., 9/10}, exact arithmetic",
            samples=9,
            details={
                "distribution_first": {_fmt(v): _fmt(p) for v, p in sorted(dist_first.items())},
                "distribution_second": {_fmt(v): _fmt(p) for v, p in sorted(dist_second.items())},
                "mean": _fmt(mean_1),
                "second_moment": _fmt(raw_1),
                "value": _fmt(value_1),
            }
        )

    # Reduction chains

    def check_sat_reduction(self, spec: ValuationSpec, phi: CnfFormula, max_enumerated_strategies: int = 7) -> PropertyReport:
        """Lifted equilibrium for satisfiable formulas, empty support enumeration for small unsatisfiable ones"""
        delta = self.gadget_service.delta_for(spec)
        game = self.gadget_service.sat_game(phi, delta)
        outcome = _Outcome()
        details: Dict[str, Any] = {"delta": _fmt(delta), "strategies": game.sizes[0]}

        crawford = self.equilibrium_service.pure_equilibria(spec, self.gadget_service.crawford(delta))
        outcome.require(crawford.is_empty, lambda: {"check": "crawford block has a pure equilibrium"})

        assignment = self.gadget_service.solve_sat_exhaustive(phi)
        details["satisfiable"] = assignment is not None
        if assignment is not None:
            profile = self.gadget_service.sat_assignment_to_profile(phi, assignment)
            report = self.equilibrium_service.verify(spec, game, profile)
            outcome.require(report.is_equilibrium, lambda: {"check": "lifted profile", "report": report.export_to_dict()})
            for player, value in enumerate(report.values()):
                outcome.require(report.context.is_close(value, report.context.one), lambda: {"check": "equilibrium value", "player": player, "value": _fmt(value)})

            one_over_m = Fraction(1, phi.m)
            true_literals = set(phi.true_literals(assignment))
            for strategy, label in enumerate(game.strategy_labels[0]):
                expectation = self.valuation_service.expectation(game, 0, profile.with_pure(0, strategy))
                kind = label.split(":")[0]
                if kind in ("var", "crawford"):
                    ok = expectation == 1
                elif kind == "lit":
                    literal = int(label.split(":")[1].replace("v", ""))
                    ok = expectation == 1 if literal in true_literals else expectation >= 1 + one_over_m
                else:
                    ok = expectation >= 1
                outcome.rows.append({"strategy": label, "expectation": float(expectation)})
                outcome.require(ok, lambda: {"check": "deviation table", "strategy": label, "expectation": _fmt(expectation)})
            details["assignment"] = "".join("1" if v else "0" for v in assignment)
        elif game.sizes[0] <= max_enumerated_strategies:
            result = self.equilibrium_service.support_enumeration_2p(spec, game)
            details["support_pairs"] = result.candidate_space
            outcome.require(result.is_empty and result.exhausted, lambda: {
                "check": "unsatisfiable formula has an equilibrium",
                "found": [r.export_to_dict() for r in result.found],
            })
        else:
            details["support_enumeration"] = f"skipped, more than {max_enumerated_strategies} strategies"
        return outcome.report(
            "sat-reduction",
            f"formula with {phi.k} clauses over {phi.m} variables, {spec}",
            details=details
        )

    def check_mbp_chain(self, spec: Optional[ValuationSpec] = None) -> PropertyReport:
        """3DM -> partition -> scheduling -> verified profile, with the gadget closed forms"""
        spec = spec or ValuationSpec.var_risk(1)
        outcome = _Outcome()
        tdm = TdmInstance(1, ((1, 1, 1),))
        inst = self.gadget_service.tdm_to_mbp(tdm)
        outcome.require(inst.A == ((1, 1, 1), (2, 2, 2)), lambda: {"check": "partition matrix", "A": [list(r) for r in inst.A]})

        rows = self.gadget_service.tdm_matching_to_mbp_solution(tdm, [1])
        outcome.require(self.gadget_service.mbp_verify(inst, rows), lambda: {"check": "lifted rows", "rows": rows})

        game = self.gadget_service.mbp_to_scheduling(inst)
        outcome.require(self.scheduling_service.check_ordered_links(game).holds, lambda: {"check": "ordered links"})

        profile = self.gadget_service.mbp_solution_to_profile(inst, rows, spec)
        report = self.equilibrium_service.verify(spec, game, profile)
        outcome.require(report.is_equilibrium, lambda: {"check": "lifted profile", "verdict": report.verdict})

        params = self.gadget_service.mbp_gadget_parameters(inst)
        hub = self.gadget_service.gadget_index(inst, 1, 4)
        x = report.profile[hub][1]
        expected = self.gadget_service.gadget_expectations(params.M, x)
        ctx = report.context
        for j in range(4):
            player = self.gadget_service.gadget_index(inst, 1, j)
            got = self.valuation_service.expectation(game.in_mode(report.profile.mode), player, report.profile)
            want = expected["link1_players"] if j % 2 == 0 else expected["link2_players"]
            outcome.rows.append({"player": game.player_labels[player], "expectation": float(got), "closed_form": float(want)})
            outcome.require(ctx.is_close(got, want), lambda: {
                "check": "gadget expectation", "player": game.player_labels[player], "expectation": _fmt(got), "closed_form": _fmt(want),
            })
        if spec.kind == ValuationKind.VAR_RISK and spec.gamma <= 1:
            outcome.require(x == params.x_hat, lambda: {"check": "x = 1/(2M+1)", "x": _fmt(x), "x_hat": _fmt(params.x_hat)})

        residuals = self.equilibrium_service.wee_residual(spec, game, report.profile)
        outcome.require(ctx.is_close(residuals[hub], ctx.zero), lambda: {"check": "hub indifference", "residual": _fmt(residuals[hub])})
        outcome.require(self.mphpn_violation(game, report.profile) is None, lambda: {"check": "mphpn at the lifted profile"})
        return outcome.report(
            "mbp-chain",
            f"q = 1 matching instance, {game.n}-player scheduling game, {spec}",
            details={"M": params.M, "x": _fmt(x), "players": game.n}
        )

    def check_tdm_correspondence(self, q_values: Sequence[int] = (1, 2), max_triples: int = 4) -> PropertyReport:
        """A matching exists iff the derived partition instance is solvable, with lifting both ways"""
        outcome = _Outcome()
        instances = 0
        for q in q_values:
            universe = list(product(range(1, q + 1), repeat=3))
            for size in range(1, min(max_triples, len(universe)) + 1):
                for triples in combinations(universe, size):
                    instances += 1
                    tdm = TdmInstance(q, triples)
                    inst = self.gadget_service.tdm_to_mbp(tdm)
                    matching = self.gadget_service.solve_tdm_exhaustive(tdm)
                    rows = self.gadget_service.solve_mbp_exhaustive(inst)
                    outcome.require((matching is None) == (rows is None), lambda: {
                        "q": q, "triples": [list(t) for t in triples], "matching": matching, "rows": rows,
                    })
                    if matching is not None:
                        lifted = self.gadget_service.tdm_matching_to_mbp_solution(tdm, matching)
                        outcome.require(inst.is_solution(lifted), lambda: {"q": q, "triples": [list(t) for t in triples], "lifted": lifted})
                    if rows is not None:
                        back = self.gadget_service.mbp_solution_to_matching(tdm, rows)
                        outcome.require(tdm.is_matching(back), lambda: {"q": q, "triples": [list(t) for t in triples], "rows": rows})
        return outcome.report(
            "tdm-correspondence",
            f"every instance with q in {list(q_values)} and at most {max_triples} triples",
            samples=instances
        )

    def check_three_player_nonexistence(self, spec: ValuationSpec, resolution: float = 0.01) -> PropertyReport:
        game = self.gadget_service.three_player_counterexample()
        outcome = _Outcome()
        pure = self.equilibrium_service.pure_equilibria(spec, game)
        outcome.require(pure.is_empty, lambda: {"check": "pure", "equilibrium": pure.found[0].export_to_dict()})
        grid = self.equilibrium_service.grid_search(spec, game, resolution)
        outcome.require(grid.is_empty, lambda: {"check": "grid", "equilibrium": grid.found[0].export_to_dict()})
        dynamics = self.equilibrium_service.best_response_dynamics(spec, game, (0, 0, 0))
        outcome.require(dynamics.status == DynamicsStatus.CYCLE, lambda: {"check": "dynamics", "outcome": dynamics.export_to_dict()})
        outcome.rows.extend([
            {"check": "pure", "found": len(pure.found)},
            {"check": "grid", "found": len(grid.found), "points": grid.candidates_examined},
            {"check": "dynamics", "status": dynamics.status.value, "steps": dynamics.steps},
        ])
        return outcome.report(
            "three-player-nonexistence",
            f"three-player counterexample, grid resolution {resolution}, {spec}",
            details={"cycle": [list(s) for s in dynamics.cycle]}
        )


class PropertyCheckFactory:
    """Factory for creating property check services"""

    @staticmethod
    def create_service(service_type: str = "sampled", **kwargs) -> IPropertyCheckService:
        """Create property check service based on type"""
        if service_type.lower() == "sampled":
            return SampledPropertyCheckService(**kwargs)
        else:
            raise ValueError(f"Unsupported property check service type: {service_type}")
