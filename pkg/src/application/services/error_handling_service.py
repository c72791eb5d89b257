"""
Error Handling Service - Single Responsibility: Classify failures, log them and map them to CLI diagnostics
"""
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, List, NamedTuple, Optional
import logging
import traceback

from ...domain.exceptions import (
    BudgetExceededError,
    DimensionMismatchError,
    InexactRootError,
    InvalidGameError,
    InvalidInstanceError,
    InvalidProfileError,
    InvalidValuationSpecError,
    LiftVerificationError,
    ModeMismatchError,
    NegativeCostError,
    NonConcaveSpecError,
    SchemaError,
    UnsatisfyingAssignmentError,
    UsageError,
)


DEFAULT_LOG_FILE = "riskeq_errors.log"
MAX_SIZE_MB = 5
BACKUP_COUNT = 5

USAGE_EXIT_CODE = 2


class ErrorSeverity(Enum):
    """How loudly a failure is logged"""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """What kind of input or resource a failure is about"""
    GAME_INPUT = "game_input"
    VALUATION = "valuation"
    ARITHMETIC = "arithmetic"
    SEARCH_BUDGET = "search_budget"
    FILE_IO = "file_io"
    SCHEMA = "schema"
    USAGE = "usage"
    SYSTEM = "system"


@dataclass
class ErrorInfo:
    """A handled failure, as logged and shown to the user"""
    message: str
    category: ErrorCategory
    severity: ErrorSeverity
    timestamp: datetime
    error_type: str
    suggestion: str
    error_code: str
    traceback: Optional[str] = None

    def export_to_dict(self) -> Dict[str, Any]:
        return {
            "error_code": self.error_code,
            "error_type": self.error_type,
            "category": self.category.value,
            "severity": self.severity.value,
            "message": self.message,
            "suggestion": self.suggestion,
        }


@dataclass
class ErrorRecoveryAction:
    """A rerun the user can try, naming the flag to change"""
    action_type: str
    description: str
    flag: Optional[str] = None


class _CategoryProfile(NamedTuple):
    code: str
    severity: ErrorSeverity
    headline: str
    suggestion: str


_PROFILES: Dict[ErrorCategory, _CategoryProfile] = {
    ErrorCategory.GAME_INPUT: _CategoryProfile(
        "GAME", ErrorSeverity.LOW,
        "❌ Jogo, perfil ou instância inválida",
        "Confira dimensões, probabilidades e custos do arquivo de entrada."
    ),
    ErrorCategory.VALUATION: _CategoryProfile(
        "VAL", ErrorSeverity.MEDIUM,
        "❌ Valoração inválida para esta operação",
        "Use uma valoração do formato 'e+var:gamma=1', 'e+sd:gamma=1', 'moments:a2=1', 'nu:r=3' ou 'combo:lambda=1/2,gamma=1,r=2'."
    ),
    ErrorCategory.ARITHMETIC: _CategoryProfile(
        "ARITH", ErrorSeverity.MEDIUM,
        "❌ Operação impossível no modo aritmético escolhido",
        "Raízes inexatas exigem --mode float."
    ),
    ErrorCategory.SEARCH_BUDGET: _CategoryProfile(
        "BUDGET", ErrorSeverity.HIGH,
        "❌ Orçamento de busca excedido",
        "Aumente --support-pair-cap, use --max-support-size ou uma grade mais grossa."
    ),
    ErrorCategory.FILE_IO: _CategoryProfile(
        "IO", ErrorSeverity.HIGH,
        "❌ Não foi possível ler ou escrever o arquivo",
        "Verifique se o caminho existe e se há permissão de leitura/escrita."
    ),
    ErrorCategory.SCHEMA: _CategoryProfile(
        "SCHEMA", ErrorSeverity.LOW,
        "❌ Documento fora do formato esperado",
        "Compare o documento com os formatos descritos no README."
    ),
    ErrorCategory.USAGE: _CategoryProfile(
        "USAGE", ErrorSeverity.LOW,
        "❌ Uso incorreto da linha de comando",
        "Execute 'riskeq.py --help' para ver os comandos disponíveis."
    ),
    ErrorCategory.SYSTEM: _CategoryProfile(
        "SYS", ErrorSeverity.CRITICAL,
        "❌ Erro interno",
        "Verifique o arquivo de log para o traceback completo."
    ),
}

_RECOVERY: Dict[ErrorCategory, ErrorRecoveryAction] = {
    ErrorCategory.SEARCH_BUDGET: ErrorRecoveryAction(
        "raise_budget", "Aumente --support-pair-cap ou use uma resolução de grade maior", "--support-pair-cap"
    ),
    ErrorCategory.ARITHMETIC: ErrorRecoveryAction(
        "switch_mode", "Repita com --mode float", "--mode"
    ),
    ErrorCategory.VALUATION: ErrorRecoveryAction(
        "change_valuation", "Escolha uma valoração côncava compatível, por exemplo e+var:gamma=1", "--valuation"
    ),
}

_LOG_LEVELS = {
    ErrorSeverity.LOW: logging.INFO,
    ErrorSeverity.MEDIUM: logging.WARNING,
    ErrorSeverity.HIGH: logging.ERROR,
    ErrorSeverity.CRITICAL: logging.CRITICAL,
}

# Most specific classes first: the first isinstance match wins
_CATEGORY_BY_TYPE = [
    (UsageError, ErrorCategory.USAGE),
    (SchemaError, ErrorCategory.SCHEMA),
    (BudgetExceededError, ErrorCategory.SEARCH_BUDGET),
    (InexactRootError, ErrorCategory.ARITHMETIC),
    (ModeMismatchError, ErrorCategory.ARITHMETIC),
    (InvalidValuationSpecError, ErrorCategory.VALUATION),
    (NonConcaveSpecError, ErrorCategory.VALUATION),
    (NegativeCostError, ErrorCategory.VALUATION),
    (DimensionMismatchError, ErrorCategory.GAME_INPUT),
    (InvalidProfileError, ErrorCategory.GAME_INPUT),
    (InvalidGameError, ErrorCategory.GAME_INPUT),
    (InvalidInstanceError, ErrorCategory.GAME_INPUT),
    (UnsatisfyingAssignmentError, ErrorCategory.GAME_INPUT),
    (LiftVerificationError, ErrorCategory.SYSTEM),
    (OSError, ErrorCategory.FILE_IO),
]


class IErrorHandlingService(ABC):
    """Interface for error handling"""

    @abstractmethod
    def handle_error(self, error: Exception, category: Optional[ErrorCategory] = None) -> ErrorInfo:
        """Classify, record and log a failure"""
        pass

    @abstractmethod
    def get_user_friendly_message(self, error_info: ErrorInfo) -> str:
        """One-line diagnostic for the error stream"""
        pass

    @abstractmethod
    def suggest_recovery_action(self, error_info: ErrorInfo) -> Optional[ErrorRecoveryAction]:
        """Rerun to try, when one flag is the likely fix"""
        pass

    @abstractmethod
    def exit_code_for(self, error_info: ErrorInfo) -> int:
        """CLI exit code of a handled error"""
        pass


class ComprehensiveErrorHandlingService(IErrorHandlingService):
    """Category table driven handling with a rotating log file"""

    def __init__(
        self,
        enable_logging: bool = True,
        log_file: str = DEFAULT_LOG_FILE,
        max_bytes: int = MAX_SIZE_MB * 1024 * 1024,
        backup_count: int = BACKUP_COUNT
    ):
        """
        Initialize error handling service

        Args:
            enable_logging: configure the root logger and log every handled error
            log_file: rotating log file
            max_bytes: size at which the log file rotates
            backup_count: number of rotated files kept
        """
        self._history: List[ErrorInfo] = []
        self._logger: Optional[logging.Logger] = None
        if enable_logging:
            logging.basicConfig(
                level=logging.INFO,
                format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                handlers=[
                    RotatingFileHandler(log_file, maxBytes=max_bytes, backupCount=backup_count),
                    logging.StreamHandler()
                ]
            )
            self._logger = logging.getLogger(__name__)

    def categorize(self, error: Exception) -> ErrorCategory:
        for error_type, category in _CATEGORY_BY_TYPE:
            if isinstance(error, error_type):
                return category
        return ErrorCategory.SYSTEM

    def handle_error(self, error: Exception, category: Optional[ErrorCategory] = None) -> ErrorInfo:
        category = category or self.categorize(error)
        profile = _PROFILES[category]
        now = datetime.now()
        loud = profile.severity in (ErrorSeverity.HIGH, ErrorSeverity.CRITICAL)
        error_info = ErrorInfo(
            message=str(error),
            category=category,
            severity=profile.severity,
            timestamp=now,
            error_type=type(error).__name__,
            suggestion=profile.suggestion,
            error_code=f"{profile.code}-{now:%Y%m%d%H%M%S}",
            traceback="".join(traceback.format_exception(type(error), error, error.__traceback__)) if loud else None
        )
        self._history.append(error_info)
        self._log(error_info)
        return error_info

    def _log(self, error_info: ErrorInfo) -> None:
        if self._logger is None:
            return
        self._logger.log(
            _LOG_LEVELS[error_info.severity],
            f"[{error_info.category.value.upper()}] {error_info.error_code} {error_info.error_type}: {error_info.message}"
        )
        if error_info.traceback:
            self._logger.debug(f"Traceback: {error_info.traceback}")

    def get_user_friendly_message(self, error_info: ErrorInfo) -> str:
        return f"{_PROFILES[error_info.category].headline}: {error_info.message}"

    def suggest_recovery_action(self, error_info: ErrorInfo) -> Optional[ErrorRecoveryAction]:
        return _RECOVERY.get(error_info.category)

    def exit_code_for(self, error_info: ErrorInfo) -> int:
        # every handled failure exits with the usage code
        return USAGE_EXIT_CODE

    def get_error_statistics(self) -> Dict[str, Any]:
        if not self._history:
            return {"total_errors": 0}
        return {
            "total_errors": len(self._history),
            "errors_by_category": dict(Counter(info.category.value for info in self._history)),
            "errors_by_severity": dict(Counter(info.severity.value for info in self._history)),
            "most_recent_error": self._history[-1].timestamp.isoformat()
        }


class ErrorHandlingFactory:
    """Factory for creating error handling services"""

    @staticmethod
    def create_service(service_type: str = "comprehensive", **kwargs) -> IErrorHandlingService:
        """Create error handling service based on type"""
        if service_type.lower() == "comprehensive":
            return ComprehensiveErrorHandlingService(**kwargs)
        else:
            raise ValueError(f"Unsupported error handling service type: {service_type}")
