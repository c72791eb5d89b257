"""
Problem Instance Entities - SAT formulas, 3-dimensional matchings and multibalanced partitions

Rows, variables and triples are numbered from 1 in every public method, the
way the instances are written in their text formats.
"""
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Sequence, Tuple

from ..exceptions import InvalidInstanceError


@dataclass(frozen=True)
class CnfFormula:
    """
    Conjunction of clauses over variables 1..m

    A literal is a signed variable index: +v for v, -v for its negation.
    """
    m: int
    clauses: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        clauses = tuple(tuple(dict.fromkeys(int(l) for l in clause)) for clause in self.clauses)
        object.__setattr__(self, 'clauses', clauses)
        if self.m < 1:
            raise InvalidInstanceError(f"Formula needs at least one variable, got m={self.m}")
        if not clauses:
            raise InvalidInstanceError("Formula has no clauses")
        for c, clause in enumerate(clauses, 1):
            if not clause:
                raise InvalidInstanceError(f"Clause {c} is empty")
            for literal in clause:
                if literal == 0 or abs(literal) > self.m:
                    raise InvalidInstanceError(f"Literal {literal} in clause {c} is outside 1..{self.m}")

    @classmethod
    def of(cls, clauses: Iterable[Iterable[int]], m: int = None) -> 'CnfFormula':
        clauses = tuple(tuple(c) for c in clauses)
        if m is None:
            m = max((abs(l) for c in clauses for l in c), default=0)
        return cls(m, clauses)

    @property
    def k(self) -> int:
        return len(self.clauses)

    def literals(self) -> List[int]:
        """All 2m literals, ordered +1, -1, +2, -2, ..."""
        return [sign * v for v in range(1, self.m + 1) for sign in (1, -1)]

    def is_satisfied_by(self, assignment: Sequence[bool]) -> bool:
        if len(assignment) != self.m:
            raise InvalidInstanceError(f"Assignment has {len(assignment)} values, formula has {self.m} variables")
        return all(
            any(assignment[abs(l) - 1] == (l > 0) for l in clause)
            for clause in self.clauses
        )

    def true_literals(self, assignment: Sequence[bool]) -> List[int]:
        return [v if assignment[v - 1] else -v for v in range(1, self.m + 1)]

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.m} {self.k}"]
        lines.extend(" ".join(str(l) for l in clause) + " 0" for clause in self.clauses)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TdmInstance:
    """Triples (w, x, y) over three disjoint q-element sets"""
    q: int
    triples: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self):
        triples = tuple(tuple(int(v) for v in t) for t in self.triples)
        object.__setattr__(self, 'triples', triples)
        if self.q < 1:
            raise InvalidInstanceError(f"Matching instance needs q >= 1, got {self.q}")
        for number, triple in enumerate(triples, 1):
            if len(triple) != 3:
                raise InvalidInstanceError(f"Triple {number} has {len(triple)} coordinates")
            if any(not (1 <= v <= self.q) for v in triple):
                raise InvalidInstanceError(f"Triple {number} {triple} has coordinates outside 1..{self.q}")

    @property
    def k(self) -> int:
        return len(self.triples)

    def is_matching(self, chosen: Iterable[int]) -> bool:
        """True iff the chosen triples (1-based) cover every element exactly once"""
        chosen = sorted(set(chosen))
        if len(chosen) != self.q or any(not (1 <= t <= self.k) for t in chosen):
            return False
        for axis in range(3):
            if sorted(self.triples[t - 1][axis] for t in chosen) != list(range(1, self.q + 1)):
                return False
        return True

    def export_to_dict(self) -> Dict[str, Any]:
        return {"q": self.q, "triples": [list(t) for t in self.triples]}


@dataclass(frozen=True)
class MbpInstance:
    """
    Nonnegative integer matrix A with n rows and m columns

    A subset I of rows solves the instance when every column j satisfies
    sum_{i in I} a_ij = 3 + 2 * sum_{i not in I} a_ij.
    """
    A: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.A)
        object.__setattr__(self, 'A', rows)
        if not rows or not rows[0]:
            raise InvalidInstanceError("Partition matrix must have at least one row and one column")
        width = len(rows[0])
        for i, row in enumerate(rows, 1):
            if len(row) != width:
                raise InvalidInstanceError(f"Row {i} has {len(row)} entries, expected {width}")
            for a in row:
                if isinstance(a, bool) or not isinstance(a, int) or a < 0:
                    raise InvalidInstanceError(f"Entries must be nonnegative integers, got {a!r} in row {i}")

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def m(self) -> int:
        return len(self.A[0])

    def column_sums(self) -> List[int]:
        return [sum(row[j] for row in self.A) for j in range(self.m)]

    def is_solution(self, rows: Iterable[int]) -> bool:
        chosen: FrozenSet[int] = frozenset(rows)
        if any(not (1 <= i <= self.n) for i in chosen):
            return False
        for j in range(self.m):
            inside = sum(self.A[i - 1][j] for i in chosen)
            outside = sum(self.A[i - 1][j] for i in range(1, self.n + 1) if i not in chosen)
            if inside != 3 + 2 * outside:
                return False
        return True

    def export_to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "m": self.m, "A": [list(row) for row in self.A]}
