"""
Scalar Value Object - Numbers in exact rational or float mode with a shared tolerance

Every real-valued quantity of the toolkit (costs, probabilities, valuations)
is a Scalar: a ``fractions.Fraction`` in exact mode or a ``float`` in float
mode. Mixing the two in one computation is an error.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Union
import math

from sympy import integer_nthroot

from ..exceptions import InexactRootError, ModeMismatchError, SchemaError


Scalar = Union[Fraction, float]

DEFAULT_TOLERANCE = 1e-9


class ArithmeticMode(Enum):
    """Arithmetic modes"""
    EXACT = "exact"
    FLOAT = "float"


def mode_of(value: Scalar) -> ArithmeticMode:
    """Mode a single scalar belongs to"""
    if isinstance(value, Fraction):
        return ArithmeticMode.EXACT
    if isinstance(value, float):
        return ArithmeticMode.FLOAT
    raise ModeMismatchError(f"Not a scalar: {value!r} ({type(value).__name__})")


def common_mode(values: Iterable[Scalar]) -> ArithmeticMode:
    """Mode shared by all values; raises when modes are mixed or values empty"""
    modes = {mode_of(v) for v in values}
    if len(modes) > 1:
        raise ModeMismatchError("Exact and float scalars mixed in one expression")
    if not modes:
        raise ModeMismatchError("Cannot infer a mode from no values")
    return modes.pop()


def parse_scalar(text: Union[str, int, float, Fraction], mode: ArithmeticMode = None) -> Scalar:
    """
    Parse a scalar from its serialized form

    Strings like "3/4" or "0.25" and integers are exact unless ``mode`` says
    float. JSON floats are float unless ``mode`` says exact, in which case the
    decimal literal is read exactly.

    Args:
        text: "p/q" string, decimal string, int, float or Fraction
        mode: target mode, inferred from the input when omitted

    Returns:
        Parsed scalar
    """
    if isinstance(text, bool):
        raise SchemaError(f"Boolean is not a scalar: {text!r}")

    if isinstance(text, Fraction):
        value = text
        inferred = ArithmeticMode.EXACT
    elif isinstance(text, int):
        value = Fraction(text)
        inferred = ArithmeticMode.EXACT
    elif isinstance(text, float):
        if not math.isfinite(text):
            raise SchemaError(f"Non-finite scalar: {text!r}")
        value = Fraction(repr(text))
        inferred = ArithmeticMode.FLOAT
    elif isinstance(text, str):
        try:
            value = Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise SchemaError(f"Cannot parse scalar '{text}': {e}")
        inferred = ArithmeticMode.EXACT
    else:
        raise SchemaError(f"Unsupported scalar literal: {text!r}")

    target = mode or inferred
    return value if target == ArithmeticMode.EXACT else float(value)


def format_scalar(value: Scalar) -> Union[str, float]:
    """Serialize: exact as "p/q", float as a JSON number (shortest round-trip repr)"""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return float(value)


def exact_root(value: Fraction, r: int) -> Fraction:
    """
    Exact r-th root of a nonnegative rational

    Raises:
        InexactRootError: when numerator or denominator is not a perfect r-th power
    """
    if value < 0:
        raise InexactRootError(f"Negative radicand {value} for root of order {r}")
    num_root, num_exact = integer_nthroot(value.numerator, r)
    den_root, den_exact = integer_nthroot(value.denominator, r)
    if not (num_exact and den_exact):
        raise InexactRootError(f"{value} is not a perfect power of order {r}")
    return Fraction(int(num_root), int(den_root))


@dataclass(frozen=True)
class NumericContext:
    """
    Arithmetic mode plus comparison tolerance

    In exact mode every comparison is exact and ``tol`` is zero; in float mode
    comparisons are relaxed by ``tolerance``.
    """
    mode: ArithmeticMode = ArithmeticMode.EXACT
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if not isinstance(self.mode, ArithmeticMode):
            object.__setattr__(self, 'mode', ArithmeticMode(self.mode))
        if self.tolerance < 0:
            raise ValueError(f"Tolerance must be nonnegative, got {self.tolerance}")

    @property
    def is_exact(self) -> bool:
        return self.mode == ArithmeticMode.EXACT

    @property
    def tol(self) -> Scalar:
        return Fraction(0) if self.is_exact else float(self.tolerance)

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.is_exact else 0.0

    @property
    def one(self) -> Scalar:
        return Fraction(1) if self.is_exact else 1.0

    def coerce(self, value: Any) -> Scalar:
        """Bring an int, Fraction, float or string into this context's mode"""
        return parse_scalar(value, self.mode)

    def check(self, value: Scalar) -> Scalar:
        """Return value unchanged if it belongs to this mode"""
        if mode_of(value) != self.mode:
            raise ModeMismatchError(
                f"Scalar {value!r} is {mode_of(value).value}, context is {self.mode.value}"
            )
        return value

    def is_positive(self, value: Scalar) -> bool:
        return value > self.tol

    def is_nonnegative(self, value: Scalar) -> bool:
        return value >= -self.tol

    def is_close(self, a: Scalar, b: Scalar) -> bool:
        return abs(a - b) <= self.tol

    def root(self, value: Scalar, r: int) -> Scalar:
        """r-th root; exact only for perfect powers, float radicands clamped at 0"""
        if self.is_exact:
            return exact_root(value, r)
        value = max(float(value), 0.0)
        if r == 2:
            return math.sqrt(value)
        return value ** (1.0 / r)

    def with_mode(self, mode: ArithmeticMode) -> 'NumericContext':
        return NumericContext(mode=mode, tolerance=self.tolerance)

    def export_to_dict(self) -> dict:
        return {"mode": self.mode.value, "tolerance": float(self.tol)}


EXACT = NumericContext(ArithmeticMode.EXACT)
FLOAT = NumericContext(ArithmeticMode.FLOAT)
