"""
Scheduling Game Entity - Player-specific scheduling on shared links
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..exceptions import InvalidGameError
from ..value_objects.scalar import ArithmeticMode, Scalar
from .game import FiniteGame, PureProfile


WeightTable = Tuple[Tuple[Tuple[int, ...], ...], ...]


class SchedulingGame(FiniteGame):
    """
    Player-specific scheduling game

    Every player picks one of m links. The cost of player i on link l is the
    sum of omega(i, i', l) over all players i' on the same link, i included.
    Costs are computed on demand, so large gadget games never materialize a
    cost table.
    """

    def __init__(
        self,
        omega: Sequence[Sequence[Sequence[int]]],
        player_labels: Optional[Sequence[str]] = None,
        mode: ArithmeticMode = ArithmeticMode.EXACT,
        name: str = ""
    ):
        n = len(omega)
        if n == 0:
            raise InvalidGameError("Scheduling game needs at least one player")
        m = len(omega[0][0]) if omega[0] else 0
        if m == 0:
            raise InvalidGameError("Scheduling game needs at least one link")

        table: List[Tuple[Tuple[int, ...], ...]] = []
        for i, row in enumerate(omega):
            if len(row) != n:
                raise InvalidGameError(f"omega[{i}] has {len(row)} entries, expected {n}")
            weights_i = []
            for i2, links in enumerate(row):
                if len(links) != m:
                    raise InvalidGameError(f"omega[{i}][{i2}] has {len(links)} links, expected {m}")
                for w in links:
                    if isinstance(w, bool) or not isinstance(w, int) or w < 0:
                        raise InvalidGameError(f"Weights must be nonnegative integers, got {w!r} at [{i}][{i2}]")
                weights_i.append(tuple(links))
            table.append(tuple(weights_i))

        link_labels = [f"link{l + 1}" for l in range(m)]
        super().__init__([link_labels] * n, mode, player_labels, name)
        self._omega: WeightTable = tuple(table)
        self._m = m

    @property
    def m(self) -> int:
        return self._m

    @property
    def omega(self) -> WeightTable:
        return self._omega

    def weight(self, i: int, i2: int, link: int) -> int:
        return self._omega[i][i2][link]

    def raw_cost(self, i: int, s: PureProfile) -> int:
        link = s[i]
        row = self._omega[i]
        return sum(row[i2][link] for i2, other in enumerate(s) if other == link)

    def cost_vector(self, s: PureProfile) -> Tuple[Scalar, ...]:
        if self.mode == ArithmeticMode.EXACT:
            return tuple(Fraction(self.raw_cost(i, s)) for i in range(self.n))
        return tuple(float(self.raw_cost(i, s)) for i in range(self.n))

    def cost(self, i: int, s: PureProfile) -> Scalar:
        value = self.raw_cost(i, s)
        return Fraction(value) if self.mode == ArithmeticMode.EXACT else float(value)

    def in_mode(self, mode: ArithmeticMode) -> 'SchedulingGame':
        mode = ArithmeticMode(mode)
        if mode == self.mode:
            return self
        return SchedulingGame(self._omega, self.player_labels, mode, self.name)

    def has_nonnegative_costs(self) -> bool:
        return True

    def neighbors(self, i: int, link: int = 0) -> List[int]:
        """Players i' != i with a nonzero weight omega(i, i', link)"""
        return [i2 for i2 in range(self.n) if i2 != i and self._omega[i][i2][link] != 0]

    def export_to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "n": self.n,
            "m": self._m,
            "omega": [[list(links) for links in row] for row in self._omega],
        }
        if self.player_labels != tuple(str(i) for i in range(self.n)):
            data["players"] = list(self.player_labels)
        if self.name:
            data["name"] = self.name
        return data


@dataclass(frozen=True)
class OrderedLinksWitness:
    """
    Two-link ordering certificate

    Every pair of distinct players either has zero weight on both links or a
    strictly smaller weight on link 1 than on link 2. ``violation`` holds the
    first pair (i, i', w1, w2) breaking that rule.
    """
    zero_pairs: Tuple[Tuple[int, int], ...]
    ordered_pairs: Tuple[Tuple[int, int], ...]
    violation: Optional[Tuple[int, int, int, int]] = None

    @property
    def holds(self) -> bool:
        return self.violation is None

    def export_to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "ordered": self.holds,
            "zero_pairs": len(self.zero_pairs),
            "ordered_pairs": len(self.ordered_pairs),
        }
        if self.violation is not None:
            i, i2, w1, w2 = self.violation
            data["violation"] = {"player": i, "other": i2, "link1": w1, "link2": w2}
        return data
