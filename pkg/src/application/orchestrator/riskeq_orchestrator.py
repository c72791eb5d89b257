"""
RiskEq Orchestrator - Single Responsibility: Coordinate services to execute one CLI command
"""
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional
import logging

from ..container.dependency_injection import ContainerFactory, DependencyContainer, ServiceConfig
from ..services.equilibrium_service import IEquilibriumService
from ..services.error_handling_service import IErrorHandlingService
from ..services.gadget_service import IGadgetService
from ..services.instance_io_service import IInstanceIOService
from ..services.property_check_service import IPropertyCheckService
from ..services.report_rendering_service import CommandResult, IReportRenderingService
from ..services.scheduling_service import ISchedulingService
from ...domain.entities.game import FiniteGame, MixedProfile
from ...domain.entities.reports import DynamicsStatus
from ...domain.entities.scheduling_game import SchedulingGame
from ...domain.exceptions import UsageError
from ...domain.value_objects.scalar import ArithmeticMode
from ...domain.value_objects.valuation_spec import ValuationSpec


logger = logging.getLogger(__name__)

PASS_EXIT_CODE = 0
FAIL_EXIT_CODE = 1

SOLVE_METHODS = ("pure", "support2p", "grid", "dynamics")
GADGETS = ("crawford", "sat", "mbp-from-3dm", "sched-from-mbp", "three-player", "fp-counterexample")
LIFTS = ("sat-assignment", "mbp-solution")
CHECKS = (
    "risk-positivity",
    "oracle-consistency",
    "e-strict-concavity",
    "two-values-monotonicity",
    "wee",
    "mphpn",
    "optimal-value",
    "conditions-2ab",
    "embracing-geometric",
    "crawford-nonexistence",
    "fp-counterexample",
    "moment-formula",
    "f-identities",
    "mbp-chain",
    "tdm-correspondence",
    "three-player-nonexistence",
    "sat-reduction",
)


@dataclass
class RunConfig:
    """Everything that determines one CLI run, embedded in its report"""
    command: str
    subcommand: Optional[str] = None
    valuation: Optional[str] = None
    game_path: Optional[str] = None
    profile_path: Optional[str] = None
    profile_index: int = 0
    input_path: Optional[str] = None
    cnf_path: Optional[str] = None
    output_path: Optional[str] = None
    csv_path: Optional[str] = None
    method: Optional[str] = None
    resolution: float = 0.01
    tol: Optional[float] = None
    delta: Optional[str] = None
    step: str = "1/100"
    assignment: Optional[str] = None
    rows: Optional[str] = None
    player: int = 1
    start: Optional[str] = None
    max_steps: int = 1000
    max_support_size: Optional[int] = None
    instances: int = 200
    service_config: ServiceConfig = field(default_factory=ServiceConfig)

    def to_dict(self) -> Dict[str, Any]:
        data = {key: value for key, value in asdict(self).items() if key != "service_config"}
        data["service_config"] = self.service_config.to_dict()
        return data


class RiskEqOrchestrator:
    """
    Main orchestrator that coordinates all services following SRP

    Single Responsibility: turn a RunConfig into a report and an exit code
    """

    def __init__(self, container: Optional[DependencyContainer] = None):
        """
        Initialize orchestrator

        Args:
            container: Dependency injection container
        """
        self._container = container or ContainerFactory.create_default_container()
        self._container.initialize()

        self._equilibrium_service = self._container.get_service(IEquilibriumService)
        self._scheduling_service = self._container.get_service(ISchedulingService)
        self._gadget_service = self._container.get_service(IGadgetService)
        self._property_service = self._container.get_service(IPropertyCheckService)
        self._io_service = self._container.get_service(IInstanceIOService)
        self._renderer = self._container.get_service(IReportRenderingService)
        self._error_service = self._container.get_service(IErrorHandlingService)

        self._handlers: Dict[str, Callable[[RunConfig], CommandResult]] = {
            "gadget": self.run_gadget,
            "lift": self.run_lift,
            "solve": self.run_solve,
            "verify": self.run_verify,
            "check": self.run_check,
        }

    def run(self, rc: RunConfig) -> int:
        """Execute, emit the report, and return the exit code"""
        try:
            result = self.execute(rc)
            self._renderer.emit(result, rc.to_dict(), rc.output_path)
            if rc.csv_path:
                self._renderer.write_csv(result, rc.csv_path)
            logger.info(f"{rc.command} {rc.subcommand or ''} finished with exit code {result.exit_code}")
            return result.exit_code
        except Exception as e:
            error_info = self._error_service.handle_error(e)
            action = self._error_service.suggest_recovery_action(error_info)
            self._renderer.display_error(
                self._error_service.get_user_friendly_message(error_info),
                action.description if action else error_info.suggestion
            )
            return self._error_service.exit_code_for(error_info)

    def execute(self, rc: RunConfig) -> CommandResult:
        handler = self._handlers.get(rc.command)
        if handler is None:
            raise UsageError(f"Unknown command '{rc.command}'")
        return handler(rc)

    # Inputs

    def _spec(self, rc: RunConfig, default: Optional[str] = None) -> ValuationSpec:
        source = rc.valuation or default
        if source is None:
            label = f"{rc.command} {rc.subcommand or ''}".strip()
            raise UsageError(f"'{label}' needs --valuation")
        spec = ValuationSpec.load(source)
        if rc.service_config.arithmetic_mode == ArithmeticMode.EXACT.value and spec.needs_roots:
            raise UsageError(f"{spec} takes roots; exact mode cannot evaluate it, use --mode float")
        return spec

    def _mode(self, rc: RunConfig) -> Optional[ArithmeticMode]:
        mode = rc.service_config.arithmetic_mode
        return ArithmeticMode(mode) if mode else None

    def _game(self, rc: RunConfig, required: bool = True) -> Optional[FiniteGame]:
        path = rc.game_path or rc.input_path
        if path is None:
            if required:
                raise UsageError(f"'{rc.command}' needs a game file")
            return None
        game = self._io_service.read_game(path)
        mode = self._mode(rc)
        return game.in_mode(mode) if mode else game

    def _profile(self, rc: RunConfig, required: bool = True) -> Optional[MixedProfile]:
        if rc.profile_path is None:
            if required:
                raise UsageError(f"'{rc.command}' needs --profile")
            return None
        profile = self._io_service.read_profile(rc.profile_path, rc.profile_index)
        mode = self._mode(rc)
        return profile.in_mode(mode) if mode else profile

    def _input(self, rc: RunConfig) -> str:
        if not rc.input_path:
            raise UsageError(f"'{rc.command} {rc.subcommand}' needs an input file")
        return rc.input_path

    @staticmethod
    def _int_list(text: Optional[str], flag: str) -> List[int]:
        if not text:
            raise UsageError(f"{flag} is required")
        try:
            return [int(token) for token in text.replace(',', ' ').split()]
        except ValueError:
            raise UsageError(f"{flag} must list integers, got '{text}'")

    # Commands

    def run_gadget(self, rc: RunConfig) -> CommandResult:
        name = rc.subcommand
        gadgets = self._gadget_service
        if name == "crawford":
            if rc.delta is None:
                raise UsageError("gadget crawford needs --delta")
            payload: Any = self._io_service.game_to_dict(gadgets.crawford(rc.delta))
        elif name == "sat":
            phi = self._io_service.read_cnf(rc.cnf_path or self._input(rc))
            spec = ValuationSpec.load(rc.valuation) if rc.valuation else None
            payload = self._io_service.game_to_dict(gadgets.sat_game(phi, rc.delta, spec))
        elif name == "mbp-from-3dm":
            payload = gadgets.tdm_to_mbp(self._io_service.read_tdm(self._input(rc))).export_to_dict()
        elif name == "sched-from-mbp":
            inst = self._io_service.read_mbp(self._input(rc))
            game = gadgets.mbp_to_scheduling(inst)
            payload = self._io_service.game_to_dict(game)
            payload["ordered_links"] = self._scheduling_service.check_ordered_links(game).holds
        elif name == "three-player":
            payload = self._io_service.game_to_dict(gadgets.three_player_counterexample())
        elif name == "fp-counterexample":
            payload = self._io_service.game_to_dict(gadgets.fp_counterexample().game)
        else:
            raise UsageError(f"Unknown gadget '{name}', expected one of {', '.join(GADGETS)}")
        return CommandResult("gadget", payload, summary=f"gadget {name} construído")

    def run_lift(self, rc: RunConfig) -> CommandResult:
        name = rc.subcommand
        if name == "sat-assignment":
            if not rc.assignment:
                raise UsageError("lift sat-assignment needs --assign")
            phi = self._io_service.read_cnf(rc.cnf_path or self._input(rc))
            profile = self._gadget_service.sat_assignment_to_profile(phi, rc.assignment)
        elif name == "mbp-solution":
            inst = self._io_service.read_mbp(self._input(rc))
            rows = self._int_list(rc.rows, "--rows")
            profile = self._gadget_service.mbp_solution_to_profile(inst, rows, self._spec(rc))
        else:
            raise UsageError(f"Unknown lift '{name}', expected one of {', '.join(LIFTS)}")
        return CommandResult("profile", profile, summary=f"perfil levantado por {name}")

    def run_solve(self, rc: RunConfig) -> CommandResult:
        spec = self._spec(rc)
        game = self._game(rc)
        eq = self._equilibrium_service
        method = rc.method or "pure"
        if method == "pure":
            result = eq.pure_equilibria(spec, game)
        elif method == "support2p":
            result = eq.support_enumeration_2p(spec, game, rc.tol, rc.max_support_size)
        elif method == "grid":
            result = eq.grid_search(spec, game, rc.resolution, rc.tol)
        elif method == "dynamics":
            start = tuple(self._int_list(rc.start, "--start")) if rc.start else tuple(0 for _ in game.sizes)
            outcome = eq.best_response_dynamics(spec, game, start, rc.max_steps)
            code = PASS_EXIT_CODE if outcome.status == DynamicsStatus.CONVERGED else FAIL_EXIT_CODE
            return CommandResult("dynamics", outcome, exit_code=code, summary=f"dinâmica: {outcome.status.value}")
        else:
            raise UsageError(f"Unknown method '{method}', expected one of {', '.join(SOLVE_METHODS)}")
        code = FAIL_EXIT_CODE if result.is_empty else PASS_EXIT_CODE
        return CommandResult("search", result, exit_code=code, summary=f"{len(result.found)} equilíbrio(s) via {method}")

    def run_verify(self, rc: RunConfig) -> CommandResult:
        spec = self._spec(rc)
        report = self._equilibrium_service.verify(spec, self._game(rc), self._profile(rc), rc.tol)
        code = PASS_EXIT_CODE if report.is_equilibrium else FAIL_EXIT_CODE
        return CommandResult("verification", report, exit_code=code, summary=report.verdict)

    def _equilibria(self, rc: RunConfig, spec: ValuationSpec, game: FiniteGame) -> List[MixedProfile]:
        profile = self._profile(rc, required=False)
        if profile is not None:
            return [profile]
        if game.n == 2 and not isinstance(game, SchedulingGame):
            found = self._equilibrium_service.support_enumeration_2p(spec, game).found
        else:
            found = self._equilibrium_service.pure_equilibria(spec, game).found
        return [report.profile for report in found]

    def run_check(self, rc: RunConfig) -> CommandResult:
        name = rc.subcommand
        checks = self._property_service
        step = Fraction(rc.step)
        if name == "risk-positivity":
            report = checks.check_risk_positivity(self._spec(rc), self._game(rc, required=False))
        elif name == "oracle-consistency":
            report = checks.check_oracle_consistency(self._spec(rc))
        elif name == "e-strict-concavity":
            report = checks.check_e_strict_concavity(self._spec(rc), self._game(rc, required=False), rc.player - 1)
        elif name == "two-values-monotonicity":
            report = checks.check_two_values_monotonicity(self._spec(rc))
        elif name == "wee":
            spec, game = self._spec(rc), self._game(rc)
            report = checks.check_wee_at_equilibria(spec, game, self._equilibria(rc, spec, game))
        elif name == "mphpn":
            spec, game = self._spec(rc), self._game(rc)
            if not isinstance(game, SchedulingGame):
                raise UsageError("check mphpn needs a scheduling game (a document with 'omega')")
            report = checks.check_mphpn(spec, game, self._equilibria(rc, spec, game))
        elif name == "optimal-value":
            report = checks.check_optimal_value(self._spec(rc), self._game(rc), rc.player - 1, self._profile(rc))
        elif name == "conditions-2ab":
            report = checks.check_conditions_2ab(self._spec(rc), rc.delta)
        elif name == "embracing-geometric":
            report = checks.check_embracing_and_geometric(step)
        elif name == "crawford-nonexistence":
            report = checks.check_crawford_nonexistence(self._spec(rc), rc.delta or "1/4", rc.resolution)
        elif name == "fp-counterexample":
            report = checks.check_fp_counterexample()
        elif name == "moment-formula":
            report = checks.check_moment_formula(rc.instances)
        elif name == "f-identities":
            report = checks.check_f_identities(step)
        elif name == "mbp-chain":
            report = checks.check_mbp_chain(self._spec(rc, default="e+var:gamma=1"))
        elif name == "tdm-correspondence":
            report = checks.check_tdm_correspondence()
        elif name == "three-player-nonexistence":
            report = checks.check_three_player_nonexistence(self._spec(rc), rc.resolution)
        elif name == "sat-reduction":
            phi = self._io_service.read_cnf(rc.cnf_path or self._input(rc))
            report = checks.check_sat_reduction(self._spec(rc), phi)
        else:
            raise UsageError(f"Unknown property '{name}', expected one of {', '.join(CHECKS)}")
        code = PASS_EXIT_CODE if report.passed else FAIL_EXIT_CODE
        return CommandResult("property", report, exit_code=code, summary=f"{name}: {'passou' if report.passed else 'falhou'}")
