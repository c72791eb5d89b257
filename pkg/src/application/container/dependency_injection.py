"""
Dependency Injection Container - Single Responsibility: Manage all service dependencies
"""
from typing import Dict, Any, Optional, Type, TypeVar
from dataclasses import asdict, dataclass
from datetime import datetime
import os

# Import all service interfaces and implementations
from ..services.valuation_service import (
    IValuationService,
    ValuationFactory
)
from ..services.scheduling_service import (
    ISchedulingService,
    SchedulingFactory
)
from ..services.equilibrium_service import (
    DEFAULT_CONCAVITY_SAMPLES,
    DEFAULT_GRID_POINT_BUDGET,
    DEFAULT_GRID_TOLERANCE,
    DEFAULT_SUPPORT_PAIR_CAP,
    DEFAULT_VERTEX_CAP,
    IEquilibriumService,
    EquilibriumFactory
)
from ..services.gadget_service import (
    IGadgetService,
    GadgetFactory
)
from ..services.property_check_service import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_WEE_CONSTANT,
    IPropertyCheckService,
    PropertyCheckFactory
)
from ..services.instance_io_service import (
    IInstanceIOService,
    InstanceIOFactory
)
from ..services.report_rendering_service import (
    IReportRenderingService,
    OutputFormat,
    ReportRenderingFactory
)
from ..services.error_handling_service import (
    BACKUP_COUNT,
    DEFAULT_LOG_FILE,
    MAX_SIZE_MB,
    IErrorHandlingService,
    ErrorHandlingFactory
)
from ...domain.entities.game import DEFAULT_PROFILE_BUDGET
from ...domain.value_objects.scalar import DEFAULT_TOLERANCE

T = TypeVar('T')

WORKERS_ENV_VAR = "RISKEQ_WORKERS"


def available_parallelism() -> int:
    """Worker count from RISKEQ_WORKERS, else the CPU count"""
    value = os.environ.get(WORKERS_ENV_VAR)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise ValueError(f"{WORKERS_ENV_VAR} must be a positive integer, got '{value}'")
    return os.cpu_count() or 1


@dataclass
class ServiceConfig:
    """Configuration for services"""
    # Arithmetic configuration
    arithmetic_mode: Optional[str] = None
    tolerance: float = DEFAULT_TOLERANCE

    # Search configuration
    grid_tolerance: float = DEFAULT_GRID_TOLERANCE
    support_pair_cap: int = DEFAULT_SUPPORT_PAIR_CAP
    profile_budget: int = DEFAULT_PROFILE_BUDGET
    grid_point_budget: int = DEFAULT_GRID_POINT_BUDGET
    vertex_cap: int = DEFAULT_VERTEX_CAP
    concavity_samples: int = DEFAULT_CONCAVITY_SAMPLES
    workers: int = 1

    # Property check configuration
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    wee_constant: int = DEFAULT_WEE_CONSTANT

    # Error handling configuration
    error_handling_type: str = "comprehensive"
    enable_error_logging: bool = True
    log_file: str = DEFAULT_LOG_FILE
    log_max_bytes: int = MAX_SIZE_MB * 1024 * 1024
    log_backup_count: int = BACKUP_COUNT

    # Output configuration
    output_format: OutputFormat = OutputFormat.JSON

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["output_format"] = self.output_format.value
        return data


class DependencyContainer:
    """Dependency injection container for managing all services"""

    def __init__(self, config: Optional[ServiceConfig] = None):
        """
        Initialize dependency container

        Args:
            config: Service configuration
        """
        self._config = config or ServiceConfig()
        self._singletons: Dict[Type, Any] = {}
        self._initialized = False

    def initialize(self) -> None:
        """Initialize all services with proper dependencies"""
        if self._initialized:
            return

        try:
            # Initialize services in dependency order
            self._initialize_error_handling_service()
            self._initialize_valuation_service()
            self._initialize_scheduling_service()
            self._initialize_equilibrium_service()
            self._initialize_gadget_service()
            self._initialize_property_check_service()
            self._initialize_io_service()
            self._initialize_rendering_service()

            self._initialized = True

        except Exception as e:
            raise RuntimeError(f"Failed to initialize dependency container: {str(e)}")

    def get_service(self, service_type: Type[T]) -> T:
        """
        Get service instance by type

        Args:
            service_type: Service interface type

        Returns:
            Service instance
        """
        if not self._initialized:
            self.initialize()

        if service_type not in self._singletons:
            raise ValueError(f"Service {service_type.__name__} not registered")

        return self._singletons[service_type]

    def _get_registered_service(self, service_type: Type[T]) -> T:
        """Get service instance during initialization (avoid recursion)"""
        if service_type not in self._singletons:
            raise ValueError(f"Service {service_type.__name__} not registered yet")

        return self._singletons[service_type]

    def register_service(self, service_type: Type[T], instance: T) -> None:
        """
        Register service instance

        Args:
            service_type: Service interface type
            instance: Service instance
        """
        self._singletons[service_type] = instance

    def _initialize_error_handling_service(self) -> None:
        """Initialize error handling service"""
        error_service = ErrorHandlingFactory.create_service(
            self._config.error_handling_type,
            enable_logging=self._config.enable_error_logging,
            log_file=self._config.log_file,
            max_bytes=self._config.log_max_bytes,
            backup_count=self._config.log_backup_count
        )
        self.register_service(IErrorHandlingService, error_service)

    def _initialize_valuation_service(self) -> None:
        valuation_service = ValuationFactory.create_service("moment", tolerance=self._config.tolerance)
        self.register_service(IValuationService, valuation_service)

    def _initialize_scheduling_service(self) -> None:
        self.register_service(ISchedulingService, SchedulingFactory.create_service("partition"))

    def _initialize_equilibrium_service(self) -> None:
        """Initialize equilibrium service with search budgets"""
        cfg = self._config
        equilibrium_service = EquilibriumFactory.create_service(
            "concave",
            valuation_service=self._get_registered_service(IValuationService),
            tolerance=cfg.tolerance,
            grid_tolerance=cfg.grid_tolerance,
            support_pair_cap=cfg.support_pair_cap,
            profile_budget=cfg.profile_budget,
            grid_point_budget=cfg.grid_point_budget,
            vertex_cap=cfg.vertex_cap,
            concavity_samples=cfg.concavity_samples,
            workers=cfg.workers,
            seed=cfg.seed
        )
        self.register_service(IEquilibriumService, equilibrium_service)

    def _initialize_gadget_service(self) -> None:
        gadget_service = GadgetFactory.create_service(
            "hardness",
            valuation_service=self._get_registered_service(IValuationService),
            equilibrium_service=self._get_registered_service(IEquilibriumService)
        )
        self.register_service(IGadgetService, gadget_service)

    def _initialize_property_check_service(self) -> None:
        """Initialize property check service"""
        cfg = self._config
        property_service = PropertyCheckFactory.create_service(
            "sampled",
            valuation_service=self._get_registered_service(IValuationService),
            scheduling_service=self._get_registered_service(ISchedulingService),
            equilibrium_service=self._get_registered_service(IEquilibriumService),
            gadget_service=self._get_registered_service(IGadgetService),
            tolerance=cfg.tolerance,
            samples=cfg.samples,
            seed=cfg.seed,
            wee_constant=cfg.wee_constant
        )
        self.register_service(IPropertyCheckService, property_service)

    def _initialize_io_service(self) -> None:
        self.register_service(IInstanceIOService, InstanceIOFactory.create_service("json"))

    def _initialize_rendering_service(self) -> None:
        rendering_service = ReportRenderingFactory.create_service(
            "cli",
            output_format=self._config.output_format
        )
        self.register_service(IReportRenderingService, rendering_service)

    def get_configuration(self) -> ServiceConfig:
        """Get current service configuration"""
        return self._config

    def health_check(self) -> Dict[str, Any]:
        """Perform health check on all services"""
        if not self._initialized:
            return {"status": "not_initialized", "services": {}}

        health_status: Dict[str, Any] = {
            "status": "healthy",
            "services": {},
            "timestamp": None
        }

        try:
            # Smoke test: the Crawford game has no pure equilibrium under the plain expectation
            from ...domain.value_objects.valuation_spec import ValuationSpec
            gadget_service = self.get_service(IGadgetService)
            equilibrium_service = self.get_service(IEquilibriumService)
            crawford = gadget_service.crawford("1/4")
            health_status["services"]["equilibrium"] = {
                "healthy": equilibrium_service.pure_equilibria(ValuationSpec.expectation(), crawford).is_empty,
                "workers": self._config.workers
            }

            for name, service_type in (
                ("valuation", IValuationService),
                ("scheduling", ISchedulingService),
                ("gadgets", IGadgetService),
                ("properties", IPropertyCheckService),
                ("io", IInstanceIOService),
                ("rendering", IReportRenderingService),
                ("error_handling", IErrorHandlingService),
            ):
                health_status["services"][name] = {"healthy": self.get_service(service_type) is not None}

            # Determine overall health
            all_healthy = all(
                service_health.get("healthy", False)
                for service_health in health_status["services"].values()
            )
            health_status["status"] = "healthy" if all_healthy else "degraded"

        except Exception as e:
            health_status["status"] = "unhealthy"
            health_status["error"] = str(e)

        health_status["timestamp"] = datetime.now().isoformat()

        return health_status

    def shutdown(self) -> None:
        """Shutdown all services"""
        self._singletons.clear()
        self._initialized = False


class ContainerFactory:
    """Factory for creating dependency containers"""

    @staticmethod
    def create_default_container() -> DependencyContainer:
        """Create container with default configuration"""
        return DependencyContainer()

    @staticmethod
    def create_container_with_config(config: ServiceConfig) -> DependencyContainer:
        """Create container with custom configuration"""
        return DependencyContainer(config)

    @staticmethod
    def create_test_container() -> DependencyContainer:
        """Create container for testing: no logging setup, single process"""
        test_config = ServiceConfig(
            enable_error_logging=False,
            workers=1
        )
        return DependencyContainer(test_config)

    @staticmethod
    def create_production_container() -> DependencyContainer:
        """Create container using every available core"""
        prod_config = ServiceConfig(
            workers=available_parallelism(),
            enable_error_logging=True
        )
        return DependencyContainer(prod_config)
