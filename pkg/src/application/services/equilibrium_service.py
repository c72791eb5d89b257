"""
Equilibrium Service - Single Responsibility: Verify and search V-equilibria of finite games
"""
from abc import ABC, abstractmethod
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging
import multiprocessing
import time

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from ...domain.entities.game import DEFAULT_PROFILE_BUDGET, FiniteGame, MixedProfile, PureProfile
from ...domain.entities.reports import (
    DynamicsOutcome,
    DynamicsStatus,
    EquilibriumReport,
    PlayerAssessment,
    SearchResult,
)
from ...domain.exceptions import BudgetExceededError, InvalidGameError, NonConcaveSpecError
from ...domain.value_objects.scalar import DEFAULT_TOLERANCE, ArithmeticMode, NumericContext, Scalar
from ...domain.value_objects.valuation_spec import ValuationKind, ValuationSpec
from .valuation_service import MomentValuationService


logger = logging.getLogger(__name__)

RationalVector = Tuple[Fraction, ...]
SupportPair = Tuple[Tuple[int, ...], Tuple[int, ...]]

DEFAULT_GRID_TOLERANCE = 1e-3
DEFAULT_SUPPORT_PAIR_CAP = 2 ** 20
DEFAULT_GRID_POINT_BUDGET = 5 * 10 ** 6
DEFAULT_VERTEX_CAP = 64
DEFAULT_CONCAVITY_SAMPLES = 200
MAX_GRID_FOUND = 1000
GRID_CHUNK = 8192


def _qq_matrix(rows: Sequence[Sequence[Fraction]]) -> DomainMatrix:
    elements = [[QQ(x.numerator, x.denominator) for x in row] for row in rows]
    return DomainMatrix(elements, (len(rows), len(rows[0])), QQ)


def _fraction(element) -> Fraction:
    return Fraction(int(element.numerator), int(element.denominator))


def feasible_points(
    A: Sequence[Sequence[Fraction]],
    b: Sequence[Fraction],
    vertex_cap: int = DEFAULT_VERTEX_CAP
) -> List[RationalVector]:
    """
    Basic feasible solutions of {y >= 0 : A y = b}, plus their centroid

    Args:
        A: constraint rows over exact rationals
        b: right-hand side
        vertex_cap: stop after this many vertices

    Returns:
        Distinct nonnegative solutions; empty if the system is infeasible
    """
    width = len(A[0])
    reduced, pivots = _qq_matrix([list(row) + [rhs] for row, rhs in zip(A, b)]).rref()
    pivots = tuple(pivots)
    if width in pivots:
        return []
    rank = len(pivots)
    rows = [[_fraction(e) for e in row] for row in reduced.to_list()[:rank]]

    if rank == width:
        y = [Fraction(0)] * width
        for j, column in enumerate(pivots):
            y[column] = rows[j][-1]
        return [tuple(y)] if all(v >= 0 for v in y) else []

    vertices: List[RationalVector] = []
    for basis in combinations(range(width), rank):
        sub, sub_pivots = _qq_matrix([[row[c] for c in basis] + [row[-1]] for row in rows]).rref()
        if tuple(sub_pivots) != tuple(range(rank)):
            continue
        values = [_fraction(row[-1]) for row in sub.to_list()]
        if any(v < 0 for v in values):
            continue
        y = [Fraction(0)] * width
        for column, v in zip(basis, values):
            y[column] = v
        vertex = tuple(y)
        if vertex not in vertices:
            vertices.append(vertex)
            if len(vertices) >= vertex_cap:
                break
    if len(vertices) > 1:
        centroid = tuple(sum(column) / len(vertices) for column in zip(*vertices))
        if centroid not in vertices:
            vertices.append(centroid)
    return vertices


def _indifference_points(
    costs: Sequence[Sequence[Fraction]],
    own: Sequence[int],
    other: Sequence[int],
    vertex_cap: int
) -> List[RationalVector]:
    """
    Opponent mixtures on ``other`` equalizing the expected cost of every row in ``own``

    ``costs[a][b]`` is the cost of the indifferent player for own strategy a
    against opponent strategy b.
    """
    base = own[0]
    A = [[costs[a][b] - costs[base][b] for b in other] for a in own[1:]]
    A.append([Fraction(1)] * len(other))
    rhs = [Fraction(0)] * (len(own) - 1) + [Fraction(1)]
    return feasible_points(A, rhs, vertex_cap)


def _wee_candidates(task) -> List[Tuple[RationalVector, RationalVector]]:
    """Pool worker: WEE candidates (x, y) for a batch of support pairs"""
    c1, c2, sizes, pairs, vertex_cap = task
    # c2 transposed so player 2's own strategies index the rows
    c2t = [[c2[a][b] for a in range(sizes[0])] for b in range(sizes[1])]
    found = []
    for T1, T2 in pairs:
        ys = _indifference_points(c1, T1, T2, vertex_cap)
        if not ys:
            continue
        xs = _indifference_points(c2t, T2, T1, vertex_cap)
        for x_part, y_part in product(xs, ys):
            x = [Fraction(0)] * sizes[0]
            y = [Fraction(0)] * sizes[1]
            for a, v in zip(T1, x_part):
                x[a] = v
            for b, v in zip(T2, y_part):
                y[b] = v
            found.append((tuple(x), tuple(y)))
    return found


def _nonempty_subsets(size: int, limit: Optional[int]) -> List[Tuple[int, ...]]:
    top = size if limit is None else min(size, limit)
    return [s for k in range(1, top + 1) for s in combinations(range(size), k)]


class IEquilibriumService(ABC):
    """Interface for equilibrium verification and search"""

    @abstractmethod
    def verify(self, spec: ValuationSpec, g: FiniteGame, p: MixedProfile, tol: Optional[float] = None) -> EquilibriumReport:
        """Pure-deviation equilibrium check"""
        pass

    @abstractmethod
    def pure_equilibria(self, spec: ValuationSpec, g: FiniteGame) -> SearchResult:
        """Exhaustive search over pure profiles"""
        pass

    @abstractmethod
    def wee_residual(self, spec: ValuationSpec, g: FiniteGame, p: MixedProfile) -> List[Scalar]:
        """
        Per-player spread of expectations over supported pure deviations

        The residual depends on expectations only; ``spec`` is accepted so the
        call mirrors the other searches and is otherwise unused.
        """
        pass

    @abstractmethod
    def support_enumeration_2p(
        self,
        spec: ValuationSpec,
        g: FiniteGame,
        tol: Optional[float] = None,
        max_support_size: Optional[int] = None
    ) -> SearchResult:
        """WEE-guided support enumeration for two-player games"""
        pass

    @abstractmethod
    def grid_search(
        self,
        spec: ValuationSpec,
        g: FiniteGame,
        resolution: float = 0.01,
        tol: Optional[float] = None,
        extra_candidates: Iterable[MixedProfile] = ()
    ) -> SearchResult:
        """Verify every point of a regular grid over two-strategy profiles"""
        pass

    @abstractmethod
    def best_response_dynamics(
        self,
        spec: ValuationSpec,
        g: FiniteGame,
        start: PureProfile,
        max_steps: int = 1000
    ) -> DynamicsOutcome:
        """Strict best-response improvement from a pure profile"""
        pass


class ConcaveEquilibriumService(IEquilibriumService):
    """
    Equilibrium computations for valuations concave in each player's own strategy

    Concavity puts the minimum of V_i over player i's simplex on a vertex, so a
    profile is an equilibrium iff no pure deviation improves any player.
    """

    def __init__(
        self,
        valuation_service: MomentValuationService,
        tolerance: float = DEFAULT_TOLERANCE,
        grid_tolerance: float = DEFAULT_GRID_TOLERANCE,
        support_pair_cap: int = DEFAULT_SUPPORT_PAIR_CAP,
        profile_budget: int = DEFAULT_PROFILE_BUDGET,
        grid_point_budget: int = DEFAULT_GRID_POINT_BUDGET,
        vertex_cap: int = DEFAULT_VERTEX_CAP,
        workers: int = 1,
        concavity_samples: int = DEFAULT_CONCAVITY_SAMPLES,
        seed: int = 0
    ):
        """
        Initialize equilibrium service

        Args:
            valuation_service: evaluates V_i on mixed profiles
            tolerance: default verification tolerance (float mode)
            grid_tolerance: acceptance tolerance of grid points
            support_pair_cap: largest number of support pairs to enumerate
            profile_budget: largest pure-profile count to enumerate
            grid_point_budget: largest grid size
            vertex_cap: vertices kept per degenerate indifference system
            workers: processes used by support enumeration
            concavity_samples: segments sampled for unasserted moment sums
            seed: seed of the concavity spot-check
        """
        self.valuation_service = valuation_service
        self.tolerance = tolerance
        self.grid_tolerance = grid_tolerance
        self.support_pair_cap = support_pair_cap
        self.profile_budget = profile_budget
        self.grid_point_budget = grid_point_budget
        self.vertex_cap = vertex_cap
        self.workers = max(1, int(workers))
        self.concavity_samples = concavity_samples
        self.seed = seed
        self._concavity_checked: Dict[Tuple[ValuationSpec, int], bool] = {}

    # Verification

    def verify(self, spec: ValuationSpec, g: FiniteGame, p: MixedProfile, tol: Optional[float] = None) -> EquilibriumReport:
        tol = self.tolerance if tol is None else tol
        self._ensure_concave(spec, g)
        game, profile = self._align(spec, g, p)
        ctx = NumericContext(game.mode, tol)

        assessments = []
        for i in range(game.n):
            current = self.valuation_service.valuation(spec, game, i, profile)
            deviations = self.valuation_service.deviation_values(spec, game, i, profile)
            best = min(range(len(deviations)), key=lambda l: (deviations[l], l))
            assessments.append(PlayerAssessment(i, current, deviations[best], best))

        violation = next(
            ((a.player, a.best_deviation) for a in assessments if a.slack < -ctx.tol),
            None
        )
        return EquilibriumReport(profile, tuple(assessments), ctx, str(spec), violation)

    def _ensure_concave(self, spec: ValuationSpec, g: FiniteGame) -> None:
        if spec.kind != ValuationKind.MOMENT_SUM or spec.concave_asserted:
            return
        key = (spec, id(g))
        if key not in self._concavity_checked:
            passed, worst = self.valuation_service.spot_check_concavity(
                spec, g, self.concavity_samples, self.seed
            )
            self._concavity_checked[key] = passed
        if not self._concavity_checked[key]:
            raise NonConcaveSpecError(
                f"{spec} is not asserted concave and failed the concavity spot-check on this game"
            )

    def _align(self, spec: ValuationSpec, g: FiniteGame, p: MixedProfile) -> Tuple[FiniteGame, MixedProfile]:
        """Game and profile in one mode; float wins when roots or float inputs are involved"""
        game = self.valuation_service.align_mode(spec, g)
        if p.mode == ArithmeticMode.FLOAT and game.mode == ArithmeticMode.EXACT:
            game = game.in_mode(ArithmeticMode.FLOAT)
        if game.mode == ArithmeticMode.FLOAT:
            p = p.in_mode(ArithmeticMode.FLOAT)
        p.validate_against(game)
        return game, p

    def wee_residual(self, spec: ValuationSpec, g: FiniteGame, p: MixedProfile) -> List[Scalar]:
        # expectation only, whatever the valuation
        game, profile = self._align(ValuationSpec.expectation(), g, p)
        supp = profile.support(self.tolerance)
        residuals = []
        for i in range(game.n):
            values = [
                self.valuation_service.expectation(game, i, profile.with_pure(i, l))
                for l in sorted(supp[i])
            ]
            residuals.append(max(values) - min(values))
        return residuals

    # Pure profiles

    def pure_values(self, spec: ValuationSpec, g: FiniteGame, s: PureProfile) -> Tuple[Scalar, ...]:
        """Valuations at a pure profile, where every risk term vanishes"""
        ctx = g.context(self.tolerance)
        one = ctx.one
        return tuple(
            self.valuation_service.value_of_distribution(spec, [(one, c)], ctx)
            for c in g.cost_vector(s)
        )

    def _improvement(self, spec: ValuationSpec, g: FiniteGame, s: PureProfile, i: int) -> Tuple[Scalar, int, Scalar]:
        """(current value, lowest-index best response, its value) of player i at s"""
        current = self.pure_values(spec, g, s)[i]
        values = [
            self.pure_values(spec, g, s[:i] + (l,) + s[i + 1:])[i]
            for l in range(g.sizes[i])
        ]
        best = min(range(len(values)), key=lambda l: (values[l], l))
        return current, best, values[best]

    def pure_equilibria(self, spec: ValuationSpec, g: FiniteGame) -> SearchResult:
        started = time.perf_counter()
        tol = g.context(self.tolerance).tol
        examined = 0
        found = []
        logger.info(f"Pure search over {g.num_profiles} profiles ({spec})")
        game = self.valuation_service.align_mode(spec, g)
        for s in g.profiles(self.profile_budget):
            examined += 1
            stable = True
            for i in range(g.n):
                current, _, best_value = self._improvement(spec, g, s, i)
                if best_value < current - tol:
                    stable = False
                    break
            if not stable:
                continue
            report = self.verify(spec, game, MixedProfile.pure(g.sizes, s, game.mode))
            if report.is_equilibrium:
                found.append(report)
        return SearchResult(
            method="pure",
            found=tuple(found),
            exhausted=True,
            candidate_space=f"all {g.num_profiles} pure profiles",
            candidates_examined=examined,
            elapsed_seconds=time.perf_counter() - started
        )

    # Support enumeration

    def support_enumeration_2p(
        self,
        spec: ValuationSpec,
        g: FiniteGame,
        tol: Optional[float] = None,
        max_support_size: Optional[int] = None
    ) -> SearchResult:
        if g.n != 2:
            raise InvalidGameError(f"Support enumeration needs a two-player game, got {g.n} players")
        started = time.perf_counter()
        k1, k2 = g.sizes
        supports1 = _nonempty_subsets(k1, max_support_size)
        supports2 = _nonempty_subsets(k2, max_support_size)
        pair_count = len(supports1) * len(supports2)
        if pair_count > self.support_pair_cap:
            raise BudgetExceededError(
                f"{pair_count} support pairs exceed the cap of {self.support_pair_cap}"
            )
        exhausted = max_support_size is None or max_support_size >= max(k1, k2)
        logger.info(f"Support enumeration over {pair_count} support pairs ({k1}x{k2}, {spec})")

        # expectations are linear in the opponent's mix, so the systems stay rational
        c1 = [[Fraction(g.cost(0, (a, b))) for b in range(k2)] for a in range(k1)]
        c2 = [[Fraction(g.cost(1, (a, b))) for b in range(k2)] for a in range(k1)]
        pairs = [(T1, T2) for T1 in supports1 for T2 in supports2]
        candidates = self._collect_candidates(c1, c2, (k1, k2), pairs)

        game = self.valuation_service.align_mode(spec, g)
        seen = set()
        found = []
        for x, y in candidates:
            if (x, y) in seen:
                continue
            seen.add((x, y))
            profile = MixedProfile((x, y)).in_mode(game.mode)
            report = self.verify(spec, game, profile, tol)
            if report.is_equilibrium:
                found.append(report)
        found.sort(key=lambda r: r.profile.canonical_key())

        elapsed = time.perf_counter() - started
        logger.info(f"Support enumeration verified {len(seen)} candidates in {elapsed:.2f}s, {len(found)} equilibria")
        space = f"{pair_count} support pairs"
        if max_support_size is not None:
            space += f" with supports of size <= {max_support_size}"
        return SearchResult(
            method="support2p",
            found=tuple(found),
            exhausted=exhausted,
            candidate_space=space,
            candidates_examined=len(seen),
            elapsed_seconds=elapsed
        )

    def _collect_candidates(self, c1, c2, sizes, pairs: List[SupportPair]) -> List[Tuple[RationalVector, RationalVector]]:
        if self.workers == 1 or len(pairs) < 2 * self.workers:
            return _wee_candidates((c1, c2, sizes, pairs, self.vertex_cap))
        chunk = -(-len(pairs) // self.workers)
        tasks = [
            (c1, c2, sizes, pairs[start:start + chunk], self.vertex_cap)
            for start in range(0, len(pairs), chunk)
        ]
        logger.debug(f"Dispatching {len(tasks)} support batches to {self.workers} workers")
        with multiprocessing.Pool(self.workers) as pool:
            batches = pool.map(_wee_candidates, tasks)
        return [candidate for batch in batches for candidate in batch]

    # Grid search

    def grid_search(
        self,
        spec: ValuationSpec,
        g: FiniteGame,
        resolution: float = 0.01,
        tol: Optional[float] = None,
        extra_candidates: Iterable[MixedProfile] = ()
    ) -> SearchResult:
        tol = self.grid_tolerance if tol is None else tol
        if any(size != 2 for size in g.sizes):
            raise InvalidGameError(f"Grid search needs two strategies per player, got {g.sizes}")
        if not (0 < resolution <= 1):
            raise ValueError(f"Resolution must lie in (0, 1], got {resolution}")
        steps = round(1 / resolution)
        if abs(steps * resolution - 1) > 1e-9:
            raise ValueError(f"1/resolution must be an integer, got resolution {resolution}")
        points_per_player = steps + 1
        total = points_per_player ** g.n
        if total > self.grid_point_budget:
            raise BudgetExceededError(f"{total} grid points exceed the budget of {self.grid_point_budget}")
        self._ensure_concave(spec, g)

        started = time.perf_counter()
        logger.info(f"Grid search over {total} points ({points_per_player} per player, {spec})")
        float_game = g.in_mode(ArithmeticMode.FLOAT)
        outcomes = list(float_game.profiles(self.profile_budget))
        outcome_bits = np.array(outcomes, dtype=float)
        costs = np.array([float_game.cost_vector(s) for s in outcomes], dtype=float)
        axis = np.linspace(0.0, 1.0, points_per_player)

        found: List[EquilibriumReport] = []
        truncated = False
        for start in range(0, total, GRID_CHUNK):
            index = np.arange(start, min(start + GRID_CHUNK, total))
            X = axis[np.stack(np.unravel_index(index, (points_per_player,) * g.n), axis=1)]
            passing = self._grid_slack(spec, X, outcome_bits, costs) >= -tol
            for row in X[passing]:
                if len(found) >= MAX_GRID_FOUND:
                    truncated = True
                    break
                profile = MixedProfile(tuple((1.0 - x, float(x)) for x in row))
                report = self.verify(spec, float_game, profile, tol)
                if report.is_equilibrium:
                    found.append(report)

        for candidate in extra_candidates:
            report = self.verify(spec, g, candidate, tol)
            if report.is_equilibrium:
                found.append(report)
        found.sort(key=lambda r: r.profile.canonical_key())

        space = f"grid of {total} points at resolution {resolution}"
        if truncated:
            space += f" (found list truncated at {MAX_GRID_FOUND})"
            logger.warning(f"Grid search kept only the first {MAX_GRID_FOUND} passing points")
        return SearchResult(
            method="grid",
            found=tuple(found),
            exhausted=True,
            candidate_space=space,
            candidates_examined=total,
            elapsed_seconds=time.perf_counter() - started
        )

    def _grid_slack(self, spec: ValuationSpec, X: np.ndarray, bits: np.ndarray, costs: np.ndarray) -> np.ndarray:
        """Smallest per-player slack at each grid point, shape (G,)"""
        def outcome_probs(points: np.ndarray) -> np.ndarray:
            # probability of each pure outcome; bit 1 means the player's second strategy
            factors = np.where(bits[None, :, :] == 1, points[:, None, :], 1.0 - points[:, None, :])
            return np.prod(factors, axis=2)

        slack = np.full(X.shape[0], np.inf)
        for i in range(X.shape[1]):
            current = self.valuation_service.batch_valuation(spec, costs[:, i], outcome_probs(X))
            best = np.full(X.shape[0], np.inf)
            for link in (0.0, 1.0):
                deviated = X.copy()
                deviated[:, i] = link
                values = self.valuation_service.batch_valuation(spec, costs[:, i], outcome_probs(deviated))
                best = np.minimum(best, values)
            slack = np.minimum(slack, best - current)
        return slack

    # Dynamics

    def best_response_dynamics(
        self,
        spec: ValuationSpec,
        g: FiniteGame,
        start: PureProfile,
        max_steps: int = 1000
    ) -> DynamicsOutcome:
        s = tuple(start)
        g.validate_profile(s)
        tol = g.context(self.tolerance).tol
        path = [s]
        visited = {s: 0}
        for _ in range(max_steps):
            move = None
            for i in range(g.n):
                current, best, best_value = self._improvement(spec, g, s, i)
                if best_value < current - tol:
                    move = (i, best)
                    break
            if move is None:
                logger.debug(f"Best-response dynamics converged at {s} after {len(path) - 1} steps")
                return DynamicsOutcome(DynamicsStatus.CONVERGED, tuple(path))
            i, best = move
            s = s[:i] + (best,) + s[i + 1:]
            path.append(s)
            if s in visited:
                cycle = tuple(path[visited[s]:])
                logger.debug(f"Best-response dynamics closed a cycle of length {len(cycle) - 1}")
                return DynamicsOutcome(DynamicsStatus.CYCLE, tuple(path), cycle)
            visited[s] = len(path) - 1
        return DynamicsOutcome(DynamicsStatus.UNDETERMINED, tuple(path))


class EquilibriumFactory:
    """Factory for creating equilibrium services"""

    @staticmethod
    def create_service(service_type: str = "concave", **kwargs) -> IEquilibriumService:
        """Create equilibrium service based on type"""
        if service_type.lower() == "concave":
            valuation_service = kwargs.pop("valuation_service", None) or MomentValuationService(
                kwargs.get("tolerance", DEFAULT_TOLERANCE)
            )
            return ConcaveEquilibriumService(valuation_service, **kwargs)
        else:
            raise ValueError(f"Unsupported equilibrium service type: {service_type}")
