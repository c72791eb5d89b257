import pytest

from src.application.services.error_handling_service import (
    ComprehensiveErrorHandlingService,
    ErrorCategory,
    ErrorHandlingFactory,
    ErrorSeverity,
)
from src.domain.exceptions import (
    BudgetExceededError,
    InexactRootError,
    NonConcaveSpecError,
    SchemaError,
    UnsatisfyingAssignmentError,
    UsageError,
)


@pytest.fixture
def service():
    return ComprehensiveErrorHandlingService(enable_logging=False)


@pytest.mark.parametrize("error, category", [
    (UsageError("x"), ErrorCategory.USAGE),
    (SchemaError("x"), ErrorCategory.SCHEMA),
    (BudgetExceededError("x"), ErrorCategory.SEARCH_BUDGET),
    (InexactRootError("x"), ErrorCategory.ARITHMETIC),
    (NonConcaveSpecError("x"), ErrorCategory.VALUATION),
    (UnsatisfyingAssignmentError("x"), ErrorCategory.GAME_INPUT),
    (FileNotFoundError("x"), ErrorCategory.FILE_IO),
    (KeyError("x"), ErrorCategory.SYSTEM),
])
def test_categorize(service, error, category):
    assert service.categorize(error) == category


def test_every_handled_error_exits_2(service):
    for error in (UsageError("a"), BudgetExceededError("b"), RuntimeError("c")):
        assert service.exit_code_for(service.handle_error(error)) == 2


def test_severity_and_code(service):
    info = service.handle_error(BudgetExceededError("too many support pairs"))
    assert info.severity == ErrorSeverity.HIGH
    assert info.error_code.startswith("BUDGET-")
    assert info.traceback is not None
    assert service.handle_error(UsageError("x")).severity == ErrorSeverity.LOW


def test_user_friendly_message(service):
    info = service.handle_error(InexactRootError("sqrt(2)"))
    assert service.get_user_friendly_message(info) == "❌ Operação impossível no modo aritmético escolhido: sqrt(2)"
    assert info.suggestion == "Raízes inexatas exigem --mode float."
    assert info.error_type == "InexactRootError"


def test_recovery_actions(service):
    action = service.suggest_recovery_action(service.handle_error(InexactRootError("x")))
    assert action.action_type == "switch_mode"
    assert action.flag == "--mode"
    assert service.suggest_recovery_action(service.handle_error(UsageError("x"))) is None


def test_statistics(service):
    assert service.get_error_statistics() == {"total_errors": 0}
    service.handle_error(UsageError("a"))
    service.handle_error(UsageError("b"))
    service.handle_error(SchemaError("c"))
    stats = service.get_error_statistics()
    assert stats["total_errors"] == 3
    assert stats["errors_by_category"] == {"usage": 2, "schema": 1}


def test_export(service):
    data = service.handle_error(SchemaError("bad document")).export_to_dict()
    assert data["category"] == "schema"
    assert data["message"] == "bad document"


def test_factory():
    assert isinstance(ErrorHandlingFactory.create_service("comprehensive", enable_logging=False), ComprehensiveErrorHandlingService)
    with pytest.raises(ValueError):
        ErrorHandlingFactory.create_service("silent")
