"""
Valuation Service - Single Responsibility: Evaluate (E+R)-valuations of mixed profiles
"""
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np

from ...domain.entities.game import FiniteGame, MixedProfile, NormalFormGame
from ...domain.exceptions import (
    DimensionMismatchError,
    InvalidValuationSpecError,
    NegativeCostError,
)
from ...domain.value_objects.scalar import (
    DEFAULT_TOLERANCE,
    ArithmeticMode,
    NumericContext,
    Scalar,
)
from ...domain.value_objects.valuation_spec import TwoValueDist, ValuationKind, ValuationSpec


logger = logging.getLogger(__name__)

CostDistribution = List[Tuple[Scalar, Scalar]]


class IValuationService(ABC):
    """Interface for valuation evaluation"""

    @abstractmethod
    def expectation(self, g: FiniteGame, i: int, p: MixedProfile) -> Scalar:
        """E_i(p) = sum_s p(s) mu_i(s)"""
        pass

    @abstractmethod
    def k_moment(self, g: FiniteGame, i: int, p: MixedProfile, k: int) -> Scalar:
        """kM_i(p) = sum_s p(s) (mu_i(s) - E_i(p))^k by enumeration"""
        pass

    @abstractmethod
    def valuation(self, spec: ValuationSpec, g: FiniteGame, i: int, p: MixedProfile) -> Scalar:
        """V_i(p) for the given spec"""
        pass

    @abstractmethod
    def risk(self, spec: ValuationSpec, g: FiniteGame, i: int, p: MixedProfile) -> Scalar:
        """R_i(p) = V_i(p) - E_i(p)"""
        pass

    @abstractmethod
    def deviation_values(self, spec: ValuationSpec, g: FiniteGame, i: int, p: MixedProfile) -> List[Scalar]:
        """V_i(p_i^l, p_{-i}) for every pure strategy l of player i"""
        pass

    @abstractmethod
    def two_value_V(self, spec: ValuationSpec, d: TwoValueDist) -> Scalar:
        """Closed-form valuation of a two-value cost"""
        pass

    @abstractmethod
    def two_value_R(self, spec: ValuationSpec, d: TwoValueDist) -> Scalar:
        """Closed-form risk of a two-value cost"""
        pass


class MomentValuationService(IValuationService):
    """
    Valuations computed from the cost distribution a profile induces

    Only profiles in the product of the supports are visited, so games with
    many pure players stay cheap.
    """

    def __init__(self, tolerance: float = DEFAULT_TOLERANCE):
        """
        Initialize valuation service

        Args:
            tolerance: float-mode comparison tolerance and support threshold
        """
        self._tolerance = tolerance

    @property
    def tolerance(self) -> float:
        return self._tolerance

    # Distributions

    def cost_distribution(self, g: FiniteGame, i: int, p: MixedProfile) -> CostDistribution:
        """(probability, cost) pairs of player i over the supported profiles"""
        self._check_inputs(g, i, p)
        return [(prob, g.cost(i, s)) for s, prob in p.supported_profiles(self._tolerance)]

    def deviation_distribution(self, g: FiniteGame, i: int, p: MixedProfile, strategy: int) -> CostDistribution:
        """Distribution of player i's cost at (p_i^l, p_{-i})"""
        self._check_inputs(g, i, p)
        return self.cost_distribution(g, i, p.with_pure(i, strategy))

    def _check_inputs(self, g: FiniteGame, i: int, p: MixedProfile) -> None:
        p.validate_against(g)
        if not (0 <= i < g.n):
            raise DimensionMismatchError(f"Player {i} out of range for a {g.n}-player game")

    # Definitions

    def expectation(self, g: FiniteGame, i: int, p: MixedProfile) -> Scalar:
        return self._mean(self.cost_distribution(g, i, p))

    def k_moment(self, g: FiniteGame, i: int, p: MixedProfile, k: int) -> Scalar:
        if k < 0:
            raise ValueError(f"Moment order must be nonnegative, got {k}")
        dist = self.cost_distribution(g, i, p)
        return self._central_moment(dist, self._mean(dist), k)

    def valuation(self, spec: ValuationSpec, g: FiniteGame, i: int, p: MixedProfile) -> Scalar:
        self._check_costs(spec, g)
        return self.value_of_distribution(spec, self.cost_distribution(g, i, p), g.context(self._tolerance))

    def risk(self, spec: ValuationSpec, g: FiniteGame, i: int, p: MixedProfile) -> Scalar:
        self._check_costs(spec, g)
        dist = self.cost_distribution(g, i, p)
        return self.value_of_distribution(spec, dist, g.context(self._tolerance)) - self._mean(dist)

    def deviation_values(self, spec: ValuationSpec, g: FiniteGame, i: int, p: MixedProfile) -> List[Scalar]:
        self._check_costs(spec, g)
        ctx = g.context(self._tolerance)
        return [
            self.value_of_distribution(spec, self.deviation_distribution(g, i, p, strategy), ctx)
            for strategy in range(g.sizes[i])
        ]

    def value_of_distribution(self, spec: ValuationSpec, dist: CostDistribution, ctx: NumericContext) -> Scalar:
        """Dispatch on the spec variant"""
        kind = spec.kind
        mean = self._mean(dist)
        if kind == ValuationKind.EXPECTATION:
            return mean
        if kind == ValuationKind.VAR_RISK:
            return mean + self._param(spec.gamma, ctx) * self._central_moment(dist, mean, 2)
        if kind == ValuationKind.SD_RISK:
            return mean + self._param(spec.gamma, ctx) * ctx.root(self._central_moment(dist, mean, 2), 2)
        if kind == ValuationKind.MOMENT_SUM:
            value = self._param(spec.alpha_0, ctx) * mean
            for k, weight in spec.alpha:
                if weight:
                    value += self._param(weight, ctx) * self._central_moment(dist, mean, k)
            return value
        if kind == ValuationKind.NU_POWER:
            return self._power_mean(dist, spec.r, ctx)
        if kind == ValuationKind.COMBO:
            lam = self._param(spec.lam, ctx)
            mean_variance = mean + self._param(spec.gamma, ctx) * self._central_moment(dist, mean, 2)
            return lam * mean_variance + (ctx.one - lam) * self._power_mean(dist, spec.r, ctx)
        raise InvalidValuationSpecError(f"Unsupported valuation kind: {kind}")

    # Two-value closed forms

    def two_value_V(self, spec: ValuationSpec, d: TwoValueDist) -> Scalar:
        ctx = NumericContext(self._mode_of_dist(d), self._tolerance)
        one = ctx.one
        a, b, q = d.a, d.b, d.q
        mean = d.mean
        spread = b - a
        kind = spec.kind

        if kind == ValuationKind.EXPECTATION:
            return mean
        if kind == ValuationKind.VAR_RISK:
            return mean + self._param(spec.gamma, ctx) * q * (one - q) * spread ** 2
        if kind == ValuationKind.SD_RISK:
            return mean + self._param(spec.gamma, ctx) * ctx.root(q * (one - q), 2) * spread
        if kind == ValuationKind.MOMENT_SUM:
            value = self._param(spec.alpha_0, ctx) * mean
            for k, weight in spec.alpha:
                if weight:
                    moment = q * (one - q) * spread ** k * (q ** (k - 1) + (one - q) ** (k - 1))
                    value += self._param(weight, ctx) * moment
            return value
        if kind in (ValuationKind.NU_POWER, ValuationKind.COMBO):
            if a < 0:
                raise NegativeCostError(f"Power valuation needs nonnegative costs, got a={a}")
            power_mean = ctx.root(q * b ** spec.r + (one - q) * a ** spec.r, spec.r)
            if kind == ValuationKind.NU_POWER:
                return power_mean
            lam = self._param(spec.lam, ctx)
            mean_variance = mean + self._param(spec.gamma, ctx) * q * (one - q) * spread ** 2
            return lam * mean_variance + (one - lam) * power_mean
        raise InvalidValuationSpecError(f"Unsupported valuation kind: {kind}")

    def two_value_R(self, spec: ValuationSpec, d: TwoValueDist) -> Scalar:
        return self.two_value_V(spec, d) - d.mean

    def realize_two_value(self, d: TwoValueDist) -> Tuple[NormalFormGame, MixedProfile]:
        """
        Smallest game in which player 0's cost is distributed as d

        Player 0 has a single strategy; player 1 mixes low/high with
        probabilities (1 - q, q).
        """
        zero = Fraction(0) if isinstance(d.q, Fraction) else 0.0
        game = NormalFormGame(
            [["stay"], ["low", "high"]],
            {(0, 0): (d.a, zero), (0, 1): (d.b, zero)},
            name="two-value"
        )
        profile = MixedProfile(((zero + 1,), (1 - d.q, d.q)))
        return game, profile

    # Vectorized float evaluation

    def batch_valuation(self, spec: ValuationSpec, costs: np.ndarray, probs: np.ndarray) -> np.ndarray:
        """
        Valuations of many distributions sharing one cost vector

        Args:
            costs: shape (K,), cost of each outcome
            probs: shape (G, K), one probability row per distribution

        Returns:
            Shape (G,) array of valuations (float mode)
        """
        costs = np.asarray(costs, dtype=float)
        probs = np.asarray(probs, dtype=float)
        mean = probs @ costs
        kind = spec.kind

        def moment(k: int) -> np.ndarray:
            return np.einsum('gk,gk->g', probs, (costs[None, :] - mean[:, None]) ** k)

        if kind == ValuationKind.EXPECTATION:
            return mean
        if kind == ValuationKind.VAR_RISK:
            return mean + float(spec.gamma) * moment(2)
        if kind == ValuationKind.SD_RISK:
            return mean + float(spec.gamma) * np.sqrt(np.maximum(moment(2), 0.0))
        if kind == ValuationKind.MOMENT_SUM:
            value = float(spec.alpha_0) * mean
            for k, weight in spec.alpha:
                if weight:
                    value = value + float(weight) * moment(k)
            return value
        if np.any(costs < 0):
            raise NegativeCostError("Power valuation needs nonnegative costs")
        power_mean = np.maximum(probs @ costs ** spec.r, 0.0) ** (1.0 / spec.r)
        if kind == ValuationKind.NU_POWER:
            return power_mean
        lam = float(spec.lam)
        return lam * (mean + float(spec.gamma) * moment(2)) + (1.0 - lam) * power_mean

    # Concavity spot-check

    def spot_check_concavity(
        self,
        spec: ValuationSpec,
        g: FiniteGame,
        samples: int = 200,
        seed: int = 0
    ) -> Tuple[bool, float]:
        """
        Sample segments p', p'' of one player's strategy and test
        V(lam p' + (1 - lam) p'') >= lam V(p') + (1 - lam) V(p'') - tol

        Returns:
            (passed, smallest margin observed)
        """
        rng = np.random.default_rng(seed)
        game = g.in_mode(ArithmeticMode.FLOAT)
        worst = float('inf')
        for _ in range(samples):
            i = int(rng.integers(game.n))
            base = MixedProfile(tuple(tuple(rng.dirichlet(np.ones(k)).tolist()) for k in game.sizes))
            first = tuple(rng.dirichlet(np.ones(game.sizes[i])).tolist())
            second = tuple(rng.dirichlet(np.ones(game.sizes[i])).tolist())
            lam = float(rng.uniform(0.05, 0.95))
            mixed = tuple(lam * x + (1 - lam) * y for x, y in zip(first, second))
            v_mixed = self.valuation(spec, game, i, base.with_strategy(i, mixed))
            v_first = self.valuation(spec, game, i, base.with_strategy(i, first))
            v_second = self.valuation(spec, game, i, base.with_strategy(i, second))
            worst = min(worst, v_mixed - (lam * v_first + (1 - lam) * v_second))
        passed = worst >= -self._tolerance
        logger.debug(f"Concavity spot-check of {spec}: passed={passed}, worst margin={worst:.3e}")
        return passed, worst

    # Helpers

    def align_mode(self, spec: ValuationSpec, g: FiniteGame) -> FiniteGame:
        """Float copy of an exact game when the spec takes roots"""
        if spec.needs_roots and g.mode == ArithmeticMode.EXACT:
            logger.debug(f"Promoting exact game to float mode for {spec}")
            return g.in_mode(ArithmeticMode.FLOAT)
        return g

    def _check_costs(self, spec: ValuationSpec, g: FiniteGame) -> None:
        if spec.requires_nonnegative_costs and not g.has_nonnegative_costs():
            raise NegativeCostError(f"{spec} needs nonnegative costs")

    @staticmethod
    def _mean(dist: CostDistribution) -> Scalar:
        return sum(prob * cost for prob, cost in dist)

    @staticmethod
    def _central_moment(dist: CostDistribution, mean: Scalar, k: int) -> Scalar:
        if k == 0:
            return sum(prob for prob, _ in dist)
        return sum(prob * (cost - mean) ** k for prob, cost in dist)

    @staticmethod
    def _power_mean(dist: CostDistribution, r: int, ctx: NumericContext) -> Scalar:
        if any(cost < 0 for _, cost in dist):
            raise NegativeCostError("Power valuation met a negative cost")
        return ctx.root(sum(prob * cost ** r for prob, cost in dist), r)

    @staticmethod
    def _param(value: Fraction, ctx: NumericContext) -> Scalar:
        return value if ctx.is_exact else float(value)

    @staticmethod
    def _mode_of_dist(d: TwoValueDist) -> ArithmeticMode:
        return ArithmeticMode.FLOAT if isinstance(d.q, float) else ArithmeticMode.EXACT


class ValuationFactory:
    """Factory for creating valuation services"""

    @staticmethod
    def create_service(service_type: str = "moment", **kwargs) -> IValuationService:
        """Create valuation service based on type"""
        if service_type.lower() == "moment":
            return MomentValuationService(kwargs.get("tolerance", DEFAULT_TOLERANCE))
        else:
            raise ValueError(f"Unsupported valuation service type: {service_type}")
