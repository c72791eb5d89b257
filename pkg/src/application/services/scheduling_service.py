"""
Scheduling Service - Single Responsibility: Costs and moment formulas of player-specific scheduling games
"""
from abc import ABC, abstractmethod
from fractions import Fraction
from math import factorial
from typing import Any, Iterator, List, Sequence, Tuple
import logging

from ...domain.entities.game import DEFAULT_PROFILE_BUDGET, MixedProfile, NormalFormGame, PureProfile
from ...domain.entities.scheduling_game import OrderedLinksWitness, SchedulingGame
from ...domain.exceptions import DimensionMismatchError, InvalidGameError
from ...domain.value_objects.scalar import ArithmeticMode, Scalar, parse_scalar


logger = logging.getLogger(__name__)


def f(x: Scalar, j: int) -> Scalar:
    """f(x, j) = (-x)^j (1 - x) + (1 - x)^j x, the j-th central moment of a Bernoulli(x)"""
    if j < 0:
        raise ValueError(f"f needs j >= 0, got {j}")
    if not (0 <= x <= 1):
        raise ValueError(f"f needs 0 <= x <= 1, got {x}")
    if isinstance(x, int):
        x = Fraction(x)
    one = 1.0 if isinstance(x, float) else Fraction(1)
    return (-x) ** j * (one - x) + (one - x) ** j * x


def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """
    Ordered ways to write total as a sum of `parts` entries from {0, 2, 3, ..., total}

    Entries equal to 1 are never generated.
    """
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in [0] + list(range(2, total + 1)):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


class ISchedulingService(ABC):
    """Interface for scheduling-game computations"""

    @abstractmethod
    def sched_cost(self, g: SchedulingGame, i: int, s: PureProfile) -> Scalar:
        """Sum of weights of the players sharing player i's link"""
        pass

    @abstractmethod
    def k_moment_formula(self, g: SchedulingGame, i: int, link: int, p: MixedProfile, k: int) -> Scalar:
        """k-th central moment of player i pinned to a link, via the partition formula"""
        pass

    @abstractmethod
    def to_normal_form(self, g: SchedulingGame, budget: int = DEFAULT_PROFILE_BUDGET) -> NormalFormGame:
        """Materialize the cost table"""
        pass

    @abstractmethod
    def check_ordered_links(self, g: SchedulingGame) -> OrderedLinksWitness:
        """Two-link ordering witness or the first violating pair"""
        pass

    @abstractmethod
    def embracing_F(self, r: int, s: int, p: Any, q: Any, w: Any, alpha: Any, beta: Any, y: Any) -> Scalar:
        """Three adjacent partition terms of the moment formula as a function of y"""
        pass


class PartitionMomentSchedulingService(ISchedulingService):
    """Scheduling computations based on the partition-polynomial moment formula"""

    def sched_cost(self, g: SchedulingGame, i: int, s: PureProfile) -> Scalar:
        g.validate_profile(tuple(s))
        return g.cost(i, tuple(s))

    def f(self, x: Scalar, j: int) -> Scalar:
        return f(x, j)

    def k_moment_formula(self, g: SchedulingGame, i: int, link: int, p: MixedProfile, k: int) -> Scalar:
        """
        Sum over r = (r_j)_{j != i} with sum r_j = k and no r_j = 1 of
        k! / prod r_j! * prod f(p_j(link), r_j) * omega(i, j, link)^r_j

        Args:
            g: scheduling game
            i: player pinned to ``link``
            link: link index (0-based)
            p: profile supplying p_{-i}; p_i is ignored
            k: moment order, 0, 1 or even

        Returns:
            k-th central moment of player i's cost at (p_i^link, p_{-i})
        """
        if k < 0 or (k % 2 == 1 and k != 1):
            raise ValueError(f"Moment formula is evaluated for k = 0, 1 or even k, got {k}")
        p.validate_against(g)
        if not (0 <= link < g.m):
            raise DimensionMismatchError(f"Link {link} out of range for {g.m} links")

        exact = p.mode == ArithmeticMode.EXACT
        others = [j for j in range(g.n) if j != i]
        weights = [Fraction(g.weight(i, j, link)) if exact else float(g.weight(i, j, link)) for j in others]
        probs = [p[j][link] for j in others]
        k_factorial = factorial(k)

        total = Fraction(0) if exact else 0.0
        for parts in compositions(k, len(others)):
            if any(r and w == 0 for r, w in zip(parts, weights)):
                continue
            denominator = 1
            term = Fraction(1) if exact else 1.0
            for r, x, w in zip(parts, probs, weights):
                if r:
                    denominator *= factorial(r)
                    term *= f(x, r) * w ** r
            total += (k_factorial // denominator) * term
        return total

    def to_normal_form(self, g: SchedulingGame, budget: int = DEFAULT_PROFILE_BUDGET) -> NormalFormGame:
        logger.debug(f"Materializing scheduling game with {g.m}^{g.n} profiles")
        return g.to_normal_form(budget)

    def check_ordered_links(self, g: SchedulingGame) -> OrderedLinksWitness:
        if g.m != 2:
            raise InvalidGameError(f"Ordered links are defined for two links, game has {g.m}")
        zero_pairs: List[Tuple[int, int]] = []
        ordered_pairs: List[Tuple[int, int]] = []
        for i in range(g.n):
            for i2 in range(g.n):
                if i == i2:
                    continue
                w1, w2 = g.weight(i, i2, 0), g.weight(i, i2, 1)
                if w1 == 0 and w2 == 0:
                    zero_pairs.append((i, i2))
                elif w1 < w2:
                    ordered_pairs.append((i, i2))
                else:
                    return OrderedLinksWitness(tuple(zero_pairs), tuple(ordered_pairs), (i, i2, w1, w2))
        return OrderedLinksWitness(tuple(zero_pairs), tuple(ordered_pairs))

    def embracing_F(self, r: int, s: int, p: Any, q: Any, w: Any, alpha: Any, beta: Any, y: Any) -> Scalar:
        for name, order in (("r", r), ("s", s)):
            if order < 3 or order % 2 == 0:
                raise ValueError(f"{name} must be an odd integer >= 3, got {order}")
        literals = (p, q, w, alpha, beta, y)
        mode = ArithmeticMode.FLOAT if any(isinstance(x, float) for x in literals) else ArithmeticMode.EXACT
        p, q, w, alpha, beta, y = (parse_scalar(x, mode) for x in literals)
        if not (0 < p < Fraction(1, 2)):
            raise ValueError(f"p must lie in (0, 1/2), got {p}")
        if not (Fraction(1, 2) < q < 1):
            raise ValueError(f"q must lie in (1/2, 1), got {q}")
        if alpha <= 0 or beta <= 0 or alpha * beta < Fraction(1, 2):
            raise ValueError(f"alpha, beta must be positive with alpha * beta >= 1/2, got {alpha}, {beta}")
        if w <= 0:
            raise ValueError(f"Weight must be positive, got {w}")
        if y < 0:
            raise ValueError(f"y must be nonnegative, got {y}")

        def coefficient(a: int, b: int) -> Scalar:
            value = Fraction(1, factorial(a) * factorial(b))
            return value if mode == ArithmeticMode.EXACT else float(value)

        lower = alpha * coefficient(r - 1, s + 1) * f(p, r - 1) * f(q, s + 1) * w ** (s + 1) * y ** (r - 1)
        middle = coefficient(r, s) * f(p, r) * f(q, s) * w ** s * y ** r
        upper = beta * coefficient(r + 1, s - 1) * f(p, r + 1) * f(q, s - 1) * w ** (s - 1) * y ** (r + 1)
        return lower + middle + upper


class SchedulingFactory:
    """Factory for creating scheduling services"""

    @staticmethod
    def create_service(service_type: str = "partition", **kwargs) -> ISchedulingService:
        """Create scheduling service based on type"""
        if service_type.lower() == "partition":
            return PartitionMomentSchedulingService()
        else:
            raise ValueError(f"Unsupported scheduling service type: {service_type}")
