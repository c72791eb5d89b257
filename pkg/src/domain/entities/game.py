"""
Game Entities - Finite minimization games, mixed profiles and supports
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any, Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple
import math

from ..exceptions import (
    BudgetExceededError,
    DimensionMismatchError,
    InvalidGameError,
    InvalidProfileError,
    ModeMismatchError,
)
from ..value_objects.scalar import (
    DEFAULT_TOLERANCE,
    ArithmeticMode,
    NumericContext,
    Scalar,
    format_scalar,
    parse_scalar,
)


PureProfile = Tuple[int, ...]

DEFAULT_PROFILE_BUDGET = 10 ** 7


class FiniteGame(ABC):
    """
    Finite n-player minimization game

    Strategies are addressed by stable integer indices; labels are opaque
    strings attached for reports. Subclasses decide how costs are stored.
    """

    def __init__(
        self,
        strategy_labels: Sequence[Sequence[str]],
        mode: ArithmeticMode,
        player_labels: Optional[Sequence[str]] = None,
        name: str = ""
    ):
        if not strategy_labels:
            raise InvalidGameError("A game needs at least one player")
        labels = tuple(tuple(str(label) for label in row) for row in strategy_labels)
        for i, row in enumerate(labels):
            if not row:
                raise InvalidGameError(f"Player {i} has an empty strategy set")
            if len(set(row)) != len(row):
                raise InvalidGameError(f"Player {i} has duplicate strategy labels")
        self._strategy_labels = labels
        self._mode = ArithmeticMode(mode)
        if player_labels is None:
            player_labels = [str(i) for i in range(len(labels))]
        if len(player_labels) != len(labels):
            raise InvalidGameError("Player labels do not match the player count")
        self._player_labels = tuple(str(p) for p in player_labels)
        self._name = name

    @property
    def n(self) -> int:
        return len(self._strategy_labels)

    @property
    def mode(self) -> ArithmeticMode:
        return self._mode

    @property
    def name(self) -> str:
        return self._name

    @property
    def strategy_labels(self) -> Tuple[Tuple[str, ...], ...]:
        return self._strategy_labels

    @property
    def player_labels(self) -> Tuple[str, ...]:
        return self._player_labels

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(row) for row in self._strategy_labels)

    @property
    def num_profiles(self) -> int:
        return math.prod(self.sizes)

    @abstractmethod
    def cost_vector(self, s: PureProfile) -> Tuple[Scalar, ...]:
        """Per-player costs at a pure profile"""
        pass

    @abstractmethod
    def in_mode(self, mode: ArithmeticMode) -> 'FiniteGame':
        """Same game with every cost converted to the given mode"""
        pass

    @abstractmethod
    def has_nonnegative_costs(self) -> bool:
        pass

    def cost(self, i: int, s: PureProfile) -> Scalar:
        return self.cost_vector(s)[i]

    def context(self, tolerance: float = DEFAULT_TOLERANCE) -> NumericContext:
        return NumericContext(self._mode, tolerance)

    def strategy_index(self, i: int, label: str) -> int:
        try:
            return self._strategy_labels[i].index(label)
        except ValueError:
            raise InvalidGameError(f"Player {i} has no strategy '{label}'")

    def player_index(self, label: str) -> int:
        try:
            return self._player_labels.index(label)
        except ValueError:
            raise InvalidGameError(f"Unknown player '{label}'")

    def profiles(self, budget: int = DEFAULT_PROFILE_BUDGET) -> Iterator[PureProfile]:
        """Every pure profile in lexicographic order"""
        if self.num_profiles > budget:
            raise BudgetExceededError(
                f"{self.num_profiles} pure profiles exceed the budget of {budget}"
            )
        return product(*(range(k) for k in self.sizes))

    def partial_profiles(self, i: int) -> Iterator[PureProfile]:
        """Every partial profile s_{-i}, as a tuple over the other players in order"""
        self._check_player(i)
        return product(*(range(k) for j, k in enumerate(self.sizes) if j != i))

    @staticmethod
    def join(i: int, partial: PureProfile, strategy: int) -> PureProfile:
        """Full profile from s_{-i} and player i's strategy"""
        return partial[:i] + (strategy,) + partial[i:]

    def validate_profile(self, s: PureProfile) -> None:
        if len(s) != self.n:
            raise DimensionMismatchError(f"Profile {s} has {len(s)} entries, game has {self.n} players")
        for i, (strategy, size) in enumerate(zip(s, self.sizes)):
            if not (0 <= strategy < size):
                raise DimensionMismatchError(f"Strategy {strategy} out of range for player {i}")

    def label_profile(self, s: PureProfile) -> Tuple[str, ...]:
        return tuple(self._strategy_labels[i][strategy] for i, strategy in enumerate(s))

    def to_normal_form(self, budget: int = DEFAULT_PROFILE_BUDGET) -> 'NormalFormGame':
        costs = {s: self.cost_vector(s) for s in self.profiles(budget)}
        return NormalFormGame(self._strategy_labels, costs, self._player_labels, name=self._name)

    def _check_player(self, i: int) -> None:
        if not (0 <= i < self.n):
            raise DimensionMismatchError(f"Player {i} out of range for a {self.n}-player game")


class NormalFormGame(FiniteGame):
    """Game with a dense cost table, one cost vector per pure profile"""

    def __init__(
        self,
        strategy_labels: Sequence[Sequence[str]],
        costs: Mapping[PureProfile, Sequence[Any]],
        player_labels: Optional[Sequence[str]] = None,
        name: str = "",
        maximization: bool = False
    ):
        raw = {tuple(s): tuple(vector) for s, vector in costs.items()}
        if not raw:
            raise InvalidGameError("Cost table is empty")
        scalars = [c for vector in raw.values() for c in vector]
        if any(isinstance(c, float) for c in scalars):
            mode = ArithmeticMode.FLOAT
        else:
            mode = ArithmeticMode.EXACT
        super().__init__(strategy_labels, mode, player_labels, name)
        self._maximization = maximization

        table: Dict[PureProfile, Tuple[Scalar, ...]] = {}
        for s, vector in raw.items():
            self.validate_profile(s)
            if len(vector) != self.n:
                raise InvalidGameError(f"Cost vector at {s} has {len(vector)} entries, expected {self.n}")
            table[s] = tuple(parse_scalar(c, mode) for c in vector)
        if len(table) != self.num_profiles:
            missing = self.num_profiles - len(table)
            raise InvalidGameError(f"Cost table is not total: {missing} profiles missing")
        self._costs = table

    @property
    def maximization(self) -> bool:
        """True when costs are negated payoffs of a maximization game"""
        return self._maximization

    def cost_vector(self, s: PureProfile) -> Tuple[Scalar, ...]:
        try:
            return self._costs[tuple(s)]
        except KeyError:
            self.validate_profile(tuple(s))
            raise

    def in_mode(self, mode: ArithmeticMode) -> 'NormalFormGame':
        mode = ArithmeticMode(mode)
        if mode == self.mode:
            return self
        costs = {s: tuple(parse_scalar(c, mode) for c in vector) for s, vector in self._costs.items()}
        return NormalFormGame(
            self.strategy_labels, costs, self.player_labels, self.name, self._maximization
        )

    def has_nonnegative_costs(self) -> bool:
        return all(c >= 0 for vector in self._costs.values() for c in vector)

    def cost_items(self) -> Iterator[Tuple[PureProfile, Tuple[Scalar, ...]]]:
        return iter(sorted(self._costs.items()))

    def to_normal_form(self, budget: int = DEFAULT_PROFILE_BUDGET) -> 'NormalFormGame':
        return self


@dataclass(frozen=True)
class Support:
    """Per-player sets of strategies played with positive probability"""
    sets: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        for i, strategies in enumerate(self.sets):
            if not strategies:
                raise InvalidProfileError(f"Support of player {i} is empty")

    def __getitem__(self, i: int) -> FrozenSet[int]:
        return self.sets[i]

    def __len__(self) -> int:
        return len(self.sets)

    def is_pure(self, i: int) -> bool:
        return len(self.sets[i]) == 1

    def export_to_dict(self) -> Dict[str, Any]:
        return {"support": [sorted(s) for s in self.sets]}


@dataclass(frozen=True)
class MixedProfile:
    """
    One probability vector per player

    Entries are exact fractions or floats, never both. Exact vectors sum to
    exactly one; float vectors to within the default tolerance.
    """
    strategies: Tuple[Tuple[Scalar, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.strategies)
        if not rows or any(not row for row in rows):
            raise InvalidProfileError("Every player needs a nonempty probability vector")
        flat = [x for row in rows for x in row]
        mode = ArithmeticMode.FLOAT if any(isinstance(x, float) for x in flat) else ArithmeticMode.EXACT
        if mode == ArithmeticMode.EXACT:
            rows = tuple(tuple(parse_scalar(x) for x in row) for row in rows)
        else:
            if any(isinstance(x, (Fraction, str)) for x in flat):
                raise ModeMismatchError("Exact and float probabilities mixed in one profile")
            rows = tuple(tuple(float(x) for x in row) for row in rows)
        object.__setattr__(self, 'strategies', rows)
        self._validate(mode)

    def _validate(self, mode: ArithmeticMode) -> None:
        for i, row in enumerate(self.strategies):
            if any(x < 0 for x in row):
                raise InvalidProfileError(f"Player {i} has a negative probability")
            total = sum(row)
            if mode == ArithmeticMode.EXACT and total != 1:
                raise InvalidProfileError(f"Probabilities of player {i} sum to {total}, not 1")
            if mode == ArithmeticMode.FLOAT and abs(total - 1.0) > DEFAULT_TOLERANCE * max(1, len(row)):
                raise InvalidProfileError(f"Probabilities of player {i} sum to {total}, not 1")

    # Construction helpers

    @classmethod
    def pure(cls, sizes: Sequence[int], s: PureProfile, mode: ArithmeticMode = ArithmeticMode.EXACT) -> 'MixedProfile':
        one, zero = (Fraction(1), Fraction(0)) if mode == ArithmeticMode.EXACT else (1.0, 0.0)
        if len(sizes) != len(s):
            raise DimensionMismatchError("Pure profile length does not match the player count")
        return cls(tuple(
            tuple(one if k == strategy else zero for k in range(size))
            for size, strategy in zip(sizes, s)
        ))

    @classmethod
    def uniform(cls, sizes: Sequence[int], mode: ArithmeticMode = ArithmeticMode.EXACT) -> 'MixedProfile':
        if mode == ArithmeticMode.EXACT:
            return cls(tuple(tuple(Fraction(1, size) for _ in range(size)) for size in sizes))
        return cls(tuple(tuple(1.0 / size for _ in range(size)) for size in sizes))

    @classmethod
    def from_literals(cls, rows: Sequence[Sequence[Any]], mode: Optional[ArithmeticMode] = None) -> 'MixedProfile':
        """Rows of "p/q" strings, ints, Fractions or floats"""
        if mode is None:
            has_float = any(isinstance(x, float) for row in rows for x in row)
            mode = ArithmeticMode.FLOAT if has_float else ArithmeticMode.EXACT
        return cls(tuple(tuple(parse_scalar(x, mode) for x in row) for row in rows))

    # Accessors

    @property
    def n(self) -> int:
        return len(self.strategies)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(row) for row in self.strategies)

    @property
    def mode(self) -> ArithmeticMode:
        return ArithmeticMode.FLOAT if isinstance(self.strategies[0][0], float) else ArithmeticMode.EXACT

    def __getitem__(self, i: int) -> Tuple[Scalar, ...]:
        return self.strategies[i]

    def probability(self, s: PureProfile) -> Scalar:
        """p(s) = product of p_i(s_i)"""
        if len(s) != self.n:
            raise DimensionMismatchError(f"Profile {s} has {len(s)} entries, expected {self.n}")
        result = Fraction(1) if self.mode == ArithmeticMode.EXACT else 1.0
        for i, strategy in enumerate(s):
            if not (0 <= strategy < len(self.strategies[i])):
                raise DimensionMismatchError(f"Strategy {strategy} out of range for player {i}")
            result *= self.strategies[i][strategy]
        return result

    def support(self, tolerance: float = DEFAULT_TOLERANCE) -> Support:
        """Positive entries; in float mode only entries above tolerance count"""
        threshold = 0 if self.mode == ArithmeticMode.EXACT else tolerance
        return Support(tuple(
            frozenset(k for k, x in enumerate(row) if x > threshold)
            for row in self.strategies
        ))

    def supported_profiles(self, tolerance: float = DEFAULT_TOLERANCE) -> Iterator[Tuple[PureProfile, Scalar]]:
        """Pure profiles with positive probability, with that probability"""
        supp = self.support(tolerance)
        for s in product(*(sorted(sets) for sets in supp.sets)):
            yield s, self.probability(s)

    def is_pure(self, i: int) -> bool:
        return len(self.support()[i]) == 1

    def pure_profile(self) -> Optional[PureProfile]:
        """The pure profile if every player is pure"""
        supp = self.support()
        if all(len(sets) == 1 for sets in supp.sets):
            return tuple(next(iter(sets)) for sets in supp.sets)
        return None

    def with_strategy(self, i: int, vector: Sequence[Scalar]) -> 'MixedProfile':
        rows = list(self.strategies)
        rows[i] = tuple(vector)
        return MixedProfile(tuple(rows))

    def with_pure(self, i: int, strategy: int) -> 'MixedProfile':
        """(p_i^l, p_{-i})"""
        one, zero = (Fraction(1), Fraction(0)) if self.mode == ArithmeticMode.EXACT else (1.0, 0.0)
        size = len(self.strategies[i])
        return self.with_strategy(i, tuple(one if k == strategy else zero for k in range(size)))

    def in_mode(self, mode: ArithmeticMode) -> 'MixedProfile':
        mode = ArithmeticMode(mode)
        if mode == self.mode:
            return self
        if mode == ArithmeticMode.FLOAT:
            return MixedProfile(tuple(tuple(float(x) for x in row) for row in self.strategies))
        return MixedProfile.from_literals(
            [[Fraction(x).limit_denominator(10 ** 12) for x in row] for row in self.strategies]
        )

    def validate_against(self, game: FiniteGame) -> None:
        if self.sizes != game.sizes:
            raise DimensionMismatchError(f"Profile dimensions {self.sizes} do not match game {game.sizes}")
        if self.mode != game.mode:
            raise ModeMismatchError(
                f"Profile is {self.mode.value} but game is {game.mode.value}"
            )

    def canonical_key(self) -> Tuple[float, ...]:
        return tuple(float(x) for row in self.strategies for x in row)

    def export_to_dict(self) -> Dict[str, Any]:
        return {"profile": [[format_scalar(x) for x in row] for row in self.strategies]}

    def format_for_display(self, game: Optional[FiniteGame] = None) -> str:
        lines: List[str] = []
        for i, row in enumerate(self.strategies):
            cells = []
            for k, x in enumerate(row):
                if x == 0:
                    continue
                label = game.strategy_labels[i][k] if game is not None else str(k)
                cells.append(f"{label}: {format_scalar(x)}")
            name = game.player_labels[i] if game is not None else str(i)
            lines.append(f"  {name} -> " + ", ".join(cells))
        return "\n".join(lines)


def profile_probability(p: MixedProfile, s: PureProfile) -> Scalar:
    return p.probability(s)


def support(p: MixedProfile, tolerance: float = DEFAULT_TOLERANCE) -> Support:
    return p.support(tolerance)


def enumerate_partial_profiles(g: FiniteGame, i: int) -> Iterator[PureProfile]:
    return g.partial_profiles(i)
