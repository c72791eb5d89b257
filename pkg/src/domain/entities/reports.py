"""
Report Entities - Outcomes of verification, searches, dynamics and property suites
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
from tabulate import tabulate

from ..value_objects.scalar import NumericContext, Scalar, format_scalar
from .game import MixedProfile, PureProfile


@dataclass(frozen=True)
class PlayerAssessment:
    """One player's side of an equilibrium check"""
    player: int
    current_value: Scalar
    best_deviation_value: Scalar
    best_deviation: int

    @property
    def slack(self) -> Scalar:
        """Best pure deviation value minus current value; negative means improvable"""
        return self.best_deviation_value - self.current_value

    def export_to_dict(self) -> Dict[str, Any]:
        return {
            "player": self.player,
            "value": format_scalar(self.current_value),
            "best_deviation": self.best_deviation,
            "best_deviation_value": format_scalar(self.best_deviation_value),
            "slack": format_scalar(self.slack),
        }


@dataclass(frozen=True)
class EquilibriumReport:
    """
    Verdict of a pure-deviation equilibrium check

    The verdict is equilibrium iff every slack is at least -tol (exactly
    nonnegative in exact mode). Otherwise ``violation`` names the first
    player with an improving pure deviation and that deviation.
    """
    profile: MixedProfile
    players: Tuple[PlayerAssessment, ...]
    context: NumericContext
    valuation: str
    violation: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        first_bad = next(
            (a for a in self.players if a.slack < -self.context.tol),
            None
        )
        expected = None if first_bad is None else (first_bad.player, first_bad.best_deviation)
        if self.violation != expected:
            raise ValueError(f"Report verdict {self.violation} contradicts slacks (expected {expected})")

    @property
    def is_equilibrium(self) -> bool:
        return self.violation is None

    @property
    def verdict(self) -> str:
        if self.violation is None:
            return "equilibrium"
        player, strategy = self.violation
        return f"violated(player={player}, strategy={strategy})"

    @property
    def min_slack(self) -> Scalar:
        return min(a.slack for a in self.players)

    def values(self) -> List[Scalar]:
        return [a.current_value for a in self.players]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([
            {
                "player": a.player,
                "value": float(a.current_value),
                "best_deviation": a.best_deviation,
                "best_deviation_value": float(a.best_deviation_value),
                "slack": float(a.slack),
            }
            for a in self.players
        ])

    def export_to_dict(self) -> Dict[str, Any]:
        data = {
            "verdict": self.verdict,
            "equilibrium": self.is_equilibrium,
            "valuation": self.valuation,
            "arithmetic": self.context.export_to_dict(),
            "players": [a.export_to_dict() for a in self.players],
        }
        data.update(self.profile.export_to_dict())
        if self.violation is not None:
            data["violation"] = {"player": self.violation[0], "strategy": self.violation[1]}
        return data

    def format_for_display(self) -> str:
        header = "✅ Equilíbrio" if self.is_equilibrium else f"❌ Não é equilíbrio: {self.verdict}"
        table = tabulate(self.to_frame(), headers="keys", tablefmt="simple", showindex=False)
        return f"{header} ({self.valuation}, modo {self.context.mode.value})\n{table}"


@dataclass(frozen=True)
class SearchResult:
    """Equilibria found by a search, with an honest description of what was searched"""
    method: str
    found: Tuple[EquilibriumReport, ...]
    exhausted: bool
    candidate_space: str
    candidates_examined: int = 0
    elapsed_seconds: float = 0.0

    def __post_init__(self):
        if any(not report.is_equilibrium for report in self.found):
            raise ValueError("Search results may only contain verified equilibria")

    @property
    def is_empty(self) -> bool:
        return not self.found

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for index, report in enumerate(self.found):
            row: Dict[str, Any] = {"equilibrium": index}
            for i, vector in enumerate(report.profile.strategies):
                row[f"p{i}"] = "(" + ", ".join(str(format_scalar(x)) for x in vector) + ")"
            for a in report.players:
                row[f"V{a.player}"] = float(a.current_value)
            rows.append(row)
        return pd.DataFrame(rows)

    def export_to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "found": [report.export_to_dict() for report in self.found],
            "exhausted": self.exhausted,
            "candidate_space": self.candidate_space,
            "candidates_examined": self.candidates_examined,
            "elapsed_seconds": round(self.elapsed_seconds, 6),
        }

    def format_for_display(self) -> str:
        status = "busca exaustiva" if self.exhausted else "busca parcial"
        if self.is_empty:
            return f"📊 Nenhum equilíbrio encontrado ({status}; {self.candidate_space})"
        table = tabulate(self.to_frame(), headers="keys", tablefmt="simple", showindex=False)
        return f"📊 {len(self.found)} equilíbrio(s) encontrados ({status}; {self.candidate_space})\n{table}"


class DynamicsStatus(Enum):
    """Ways a best-response run can end"""
    CONVERGED = "converged"
    CYCLE = "cycle"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class DynamicsOutcome:
    """
    Path of a best-response run

    For a cycle, ``cycle`` lists the profiles of the loop with the first one
    repeated at the end; for convergence, ``path[-1]`` is the pure equilibrium.
    """
    status: DynamicsStatus
    path: Tuple[PureProfile, ...]
    cycle: Tuple[PureProfile, ...] = ()

    @property
    def steps(self) -> int:
        return len(self.path) - 1

    @property
    def final_profile(self) -> PureProfile:
        return self.path[-1]

    def export_to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "status": self.status.value,
            "steps": self.steps,
            "path": [list(s) for s in self.path],
        }
        if self.cycle:
            data["cycle"] = [list(s) for s in self.cycle]
        return data

    def format_for_display(self) -> str:
        if self.status == DynamicsStatus.CONVERGED:
            return f"✅ Convergiu em {self.steps} passo(s) para {self.final_profile}"
        if self.status == DynamicsStatus.CYCLE:
            return "🔁 Ciclo de melhoria: " + " -> ".join(str(s) for s in self.cycle)
        return f"⚠️ Sem conclusão após {self.steps} passo(s)"


@dataclass(frozen=True)
class PropertyReport:
    """
    Outcome of an executable property suite

    A failing report carries the inputs and values of its counterexample; a
    passing one carries the smallest margin observed.
    """
    name: str
    domain: str
    passed: bool
    min_margin: Optional[float] = None
    counterexample: Optional[Dict[str, Any]] = None
    seed: Optional[int] = None
    samples: int = 0
    skipped: int = 0
    details: Dict[str, Any] = field(default_factory=dict)
    rows: Tuple[Dict[str, Any], ...] = ()

    def __post_init__(self):
        if self.passed and self.counterexample is not None:
            raise ValueError("A passing property report cannot carry a counterexample")
        if not self.passed and self.counterexample is None:
            raise ValueError("A failing property report needs a counterexample")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.rows))

    def export_to_dict(self) -> Dict[str, Any]:
        return {
            "property": self.name,
            "domain": self.domain,
            "passed": self.passed,
            "min_margin": self.min_margin,
            "counterexample": self.counterexample,
            "seed": self.seed,
            "samples": self.samples,
            "skipped": self.skipped,
            "details": self.details,
        }

    def format_for_display(self) -> str:
        icon = "✅" if self.passed else "❌"
        lines = [f"{icon} {self.name}: {'passou' if self.passed else 'falhou'}"]
        lines.append(f"   domínio: {self.domain}")
        lines.append(f"   amostras: {self.samples} (ignoradas: {self.skipped}), semente: {self.seed}")
        if self.min_margin is not None:
            lines.append(f"   margem mínima: {self.min_margin:.3e}")
        if self.counterexample is not None:
            lines.append("   contraexemplo:")
            lines.append(tabulate(sorted(self.counterexample.items()), tablefmt="plain"))
        return "\n".join(lines)
