"""
Domain Exceptions - Error types raised by entities and services
"""


class RiskEqError(Exception):
    """Base class for every error raised by the toolkit"""


class DimensionMismatchError(RiskEqError, ValueError):
    """Profile or strategy dimensions do not match the game"""


class InvalidProfileError(RiskEqError, ValueError):
    """Probability vectors are negative or do not sum to one"""


class InvalidGameError(RiskEqError, ValueError):
    """Game definition is incomplete or malformed"""


class ModeMismatchError(RiskEqError, ValueError):
    """Exact and float scalars were mixed in one computation"""


class InexactRootError(RiskEqError, ValueError):
    """A root was requested in exact mode but the radicand is not a perfect power"""


class InvalidValuationSpecError(RiskEqError, ValueError):
    """Valuation parameters are out of range or cannot be parsed"""


class NegativeCostError(RiskEqError, ValueError):
    """A power valuation met a negative cost"""


class NonConcaveSpecError(RiskEqError, ValueError):
    """A moment sum without a concavity assertion failed the spot-check"""


class InvalidInstanceError(RiskEqError, ValueError):
    """A SAT, matching or partition instance is malformed"""


class UnsatisfyingAssignmentError(RiskEqError, ValueError):
    """The assignment or subset given for lifting is not a solution"""


class LiftVerificationError(RiskEqError, RuntimeError):
    """A lifted profile failed equilibrium verification"""


class SchemaError(RiskEqError, ValueError):
    """An input document does not follow the expected JSON or text schema"""


class UsageError(RiskEqError, ValueError):
    """Command-line arguments are inconsistent"""


class BudgetExceededError(RiskEqError, RuntimeError):
    """A search or materialization would exceed its configured budget"""
