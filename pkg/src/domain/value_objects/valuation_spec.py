"""
Valuation Spec Value Object - Tagged description of an (E+R)-valuation
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Mapping, Optional, Tuple
import json

from ..exceptions import InvalidValuationSpecError, SchemaError
from .scalar import ArithmeticMode, Scalar, common_mode, format_scalar, parse_scalar


MOMENT_ORDERS = (2, 4, 6, 8)


class ValuationKind(Enum):
    """Supported valuation variants, keyed by their shorthand names"""
    EXPECTATION = "e"
    VAR_RISK = "e+var"
    SD_RISK = "e+sd"
    MOMENT_SUM = "moments"
    NU_POWER = "nu"
    COMBO = "combo"


def _rational(value: Any, name: str) -> Fraction:
    """Parameters enter closed forms symbolically, so floats are refused"""
    if isinstance(value, float):
        raise InvalidValuationSpecError(f"{name} must be an exact rational, got float {value!r}")
    try:
        return parse_scalar(value)
    except SchemaError as e:
        raise InvalidValuationSpecError(f"Invalid {name}: {e}")


def _integer(value: Any, name: str) -> int:
    if isinstance(value, bool):
        raise InvalidValuationSpecError(f"{name} must be an integer, got {value!r}")
    if isinstance(value, str):
        value = value.strip()
        if not value.lstrip('-').isdigit():
            raise InvalidValuationSpecError(f"{name} must be an integer, got '{value}'")
        return int(value)
    if isinstance(value, int):
        return value
    raise InvalidValuationSpecError(f"{name} must be an integer, got {value!r}")


@dataclass(frozen=True)
class ValuationSpec:
    """
    Valuation V = E + R evaluated on a player's cost distribution

    Variants:
        Expectation: V = E
        VarRisk(gamma): V = E + gamma * Var
        SdRisk(gamma): V = E + gamma * SD
        MomentSum(alpha_0, alpha): V = alpha_0 * E + sum alpha_k * kM, k even in 2..8
        NuPower(r): V = (E[cost^r])^(1/r)
        Combo(lam, gamma, r): V = lam * (E + gamma * Var) + (1 - lam) * NuPower(r)
    """
    kind: ValuationKind
    gamma: Optional[Fraction] = None
    alpha: Tuple[Tuple[int, Fraction], ...] = ()
    alpha_0: Fraction = Fraction(1)
    r: Optional[int] = None
    lam: Optional[Fraction] = None
    concave_asserted: bool = True

    def __post_init__(self):
        if not isinstance(self.kind, ValuationKind):
            object.__setattr__(self, 'kind', ValuationKind(self.kind))
        self._validate()

    def _validate(self) -> None:
        kind = self.kind
        if kind in (ValuationKind.VAR_RISK, ValuationKind.SD_RISK, ValuationKind.COMBO):
            if self.gamma is None or self.gamma <= 0:
                raise InvalidValuationSpecError(f"{kind.value} needs gamma > 0, got {self.gamma}")
        if kind in (ValuationKind.NU_POWER, ValuationKind.COMBO):
            if self.r is None or self.r < 2:
                raise InvalidValuationSpecError(f"{kind.value} needs integer r >= 2, got {self.r}")
        if kind == ValuationKind.COMBO:
            if self.lam is None or not (0 < self.lam <= 1):
                raise InvalidValuationSpecError(f"combo needs lambda in (0, 1], got {self.lam}")
        if kind == ValuationKind.MOMENT_SUM:
            if self.alpha_0 < 0:
                raise InvalidValuationSpecError(f"alpha_0 must be >= 0, got {self.alpha_0}")
            for k, weight in self.alpha:
                if k not in MOMENT_ORDERS:
                    raise InvalidValuationSpecError(f"Moment order must be one of {MOMENT_ORDERS}, got {k}")
                if weight < 0:
                    raise InvalidValuationSpecError(f"alpha_{k} must be >= 0, got {weight}")

    # Constructors

    @classmethod
    def expectation(cls) -> 'ValuationSpec':
        return cls(ValuationKind.EXPECTATION)

    @classmethod
    def var_risk(cls, gamma: Any = 1) -> 'ValuationSpec':
        return cls(ValuationKind.VAR_RISK, gamma=_rational(gamma, "gamma"))

    @classmethod
    def sd_risk(cls, gamma: Any = 1) -> 'ValuationSpec':
        return cls(ValuationKind.SD_RISK, gamma=_rational(gamma, "gamma"))

    @classmethod
    def moment_sum(
        cls,
        alpha: Mapping[int, Any],
        alpha_0: Any = 1,
        concave_asserted: bool = True
    ) -> 'ValuationSpec':
        weights = tuple(sorted(
            (int(k), _rational(v, f"alpha_{k}")) for k, v in alpha.items()
        ))
        return cls(
            ValuationKind.MOMENT_SUM,
            alpha=weights,
            alpha_0=_rational(alpha_0, "alpha_0"),
            concave_asserted=concave_asserted
        )

    @classmethod
    def nu_power(cls, r: Any) -> 'ValuationSpec':
        return cls(ValuationKind.NU_POWER, r=_integer(r, "r"))

    @classmethod
    def combo(cls, lam: Any, gamma: Any, r: Any) -> 'ValuationSpec':
        return cls(
            ValuationKind.COMBO,
            gamma=_rational(gamma, "gamma"),
            lam=_rational(lam, "lambda"),
            r=_integer(r, "r")
        )

    # Classification

    @property
    def moment_weights(self) -> Dict[int, Fraction]:
        return dict(self.alpha)

    @property
    def needs_roots(self) -> bool:
        """SD and r-th roots leave the rationals"""
        return self.kind in (ValuationKind.SD_RISK, ValuationKind.NU_POWER, ValuationKind.COMBO)

    @property
    def requires_nonnegative_costs(self) -> bool:
        return self.kind in (ValuationKind.NU_POWER, ValuationKind.COMBO)

    @property
    def is_two_value_monotone(self) -> bool:
        """Family whose two-value risk depends on (b - a, q) only and grows with b - a"""
        return self.kind in (ValuationKind.VAR_RISK, ValuationKind.SD_RISK, ValuationKind.MOMENT_SUM)

    @property
    def is_e_strictly_concave(self) -> bool:
        return self.kind in (ValuationKind.VAR_RISK, ValuationKind.SD_RISK, ValuationKind.COMBO)

    @property
    def in_delta_family(self) -> bool:
        """Specs for which a hardness threshold delta is computable"""
        return self.kind in (ValuationKind.VAR_RISK, ValuationKind.SD_RISK, ValuationKind.COMBO)

    @property
    def max_moment_order(self) -> int:
        if self.kind == ValuationKind.MOMENT_SUM:
            return max((k for k, w in self.alpha if w != 0), default=0)
        if self.kind in (ValuationKind.VAR_RISK, ValuationKind.SD_RISK):
            return 2
        return 0

    # Serialization

    @classmethod
    def parse(cls, text: str) -> 'ValuationSpec':
        """
        Parse a shorthand such as "e+var:gamma=1", "moments:a2=1,a4=1",
        "nu:r=3" or "combo:lambda=1/2,gamma=1,r=2"
        """
        text = text.strip()
        name, _, params_text = text.partition(':')
        params: Dict[str, str] = {}
        if params_text:
            for item in params_text.split(','):
                key, sep, value = item.partition('=')
                if not sep or not key.strip():
                    raise InvalidValuationSpecError(f"Malformed valuation parameter '{item}' in '{text}'")
                params[key.strip().lower()] = value.strip()

        try:
            kind = ValuationKind(name.strip().lower())
        except ValueError:
            known = ", ".join(k.value for k in ValuationKind)
            raise InvalidValuationSpecError(f"Unknown valuation '{name}' (known: {known})")

        if kind == ValuationKind.EXPECTATION:
            return cls.expectation()
        if kind == ValuationKind.VAR_RISK:
            return cls.var_risk(params.get("gamma", "1"))
        if kind == ValuationKind.SD_RISK:
            return cls.sd_risk(params.get("gamma", "1"))
        if kind == ValuationKind.NU_POWER:
            return cls.nu_power(params.get("r", "2"))
        if kind == ValuationKind.COMBO:
            return cls.combo(params.get("lambda", "1/2"), params.get("gamma", "1"), params.get("r", "2"))

        alpha_0 = params.pop("a0", params.pop("alpha0", "1"))
        concave = params.pop("concave", "true").lower() not in ("false", "0", "no")
        alpha: Dict[int, str] = {}
        for key, value in params.items():
            order = key[5:] if key.startswith("alpha") else key[1:] if key.startswith("a") else None
            if not order or not order.isdigit():
                raise InvalidValuationSpecError(f"Unknown moment parameter '{key}'")
            alpha[int(order)] = value
        return cls.moment_sum(alpha, alpha_0, concave_asserted=concave)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'ValuationSpec':
        """Build from the JSON document form"""
        if "kind" not in data:
            raise SchemaError("Valuation document needs a 'kind' field")
        try:
            kind = ValuationKind(str(data["kind"]).lower())
        except ValueError:
            raise InvalidValuationSpecError(f"Unknown valuation kind '{data['kind']}'")

        if kind == ValuationKind.EXPECTATION:
            return cls.expectation()
        if kind == ValuationKind.VAR_RISK:
            return cls.var_risk(data.get("gamma", "1"))
        if kind == ValuationKind.SD_RISK:
            return cls.sd_risk(data.get("gamma", "1"))
        if kind == ValuationKind.NU_POWER:
            return cls.nu_power(data.get("r", 2))
        if kind == ValuationKind.COMBO:
            return cls.combo(data.get("lambda", "1/2"), data.get("gamma", "1"), data.get("r", 2))

        alpha = dict(data.get("alpha", {}))
        alpha_0 = alpha.pop("0", alpha.pop(0, "1"))
        return cls.moment_sum(
            {int(k): v for k, v in alpha.items()},
            alpha_0,
            concave_asserted=bool(data.get("concave", True))
        )

    @classmethod
    def load(cls, source: str) -> 'ValuationSpec':
        """Shorthand string, inline JSON, or path to a JSON file"""
        stripped = source.strip()
        if stripped.startswith('{'):
            return cls.from_dict(json.loads(stripped))
        if stripped.endswith('.json'):
            try:
                with open(stripped, 'r', encoding='utf-8') as handle:
                    return cls.from_dict(json.load(handle))
            except json.JSONDecodeError as e:
                raise SchemaError(f"Valuation file '{stripped}' is not valid JSON: {e}")
        return cls.parse(stripped)

    def export_to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.gamma is not None:
            data["gamma"] = format_scalar(self.gamma)
        if self.kind == ValuationKind.MOMENT_SUM:
            data["alpha"] = {"0": format_scalar(self.alpha_0)}
            data["alpha"].update({str(k): format_scalar(w) for k, w in self.alpha})
            data["concave"] = self.concave_asserted
        if self.r is not None:
            data["r"] = self.r
        if self.lam is not None:
            data["lambda"] = format_scalar(self.lam)
        return data

    def to_shorthand(self) -> str:
        kind = self.kind
        if kind == ValuationKind.EXPECTATION:
            return "e"
        if kind in (ValuationKind.VAR_RISK, ValuationKind.SD_RISK):
            return f"{kind.value}:gamma={self.gamma}"
        if kind == ValuationKind.NU_POWER:
            return f"nu:r={self.r}"
        if kind == ValuationKind.COMBO:
            return f"combo:lambda={self.lam},gamma={self.gamma},r={self.r}"
        parts = [f"a0={self.alpha_0}"] + [f"a{k}={w}" for k, w in self.alpha]
        return "moments:" + ",".join(parts)

    def __str__(self) -> str:
        return self.to_shorthand()


@dataclass(frozen=True)
class TwoValueDist:
    """Cost equal to b with probability q and to a with probability 1 - q"""
    a: Scalar
    b: Scalar
    q: Scalar

    def __post_init__(self):
        common_mode((self.a, self.b, self.q))
        if self.a > self.b:
            raise ValueError(f"Two-value distribution needs a <= b, got a={self.a}, b={self.b}")
        if not (0 <= self.q <= 1):
            raise ValueError(f"Probability q must lie in [0, 1], got {self.q}")

    @classmethod
    def of(cls, a: Any, b: Any, q: Any) -> 'TwoValueDist':
        """Build from mixed literals; all exact unless one of them is a float"""
        literals = (a, b, q)
        mode = ArithmeticMode.FLOAT if any(isinstance(x, float) for x in literals) else None
        return cls(*(parse_scalar(x, mode) for x in literals))

    @property
    def spread(self) -> Scalar:
        return self.b - self.a

    @property
    def mean(self) -> Scalar:
        return self.a + self.q * (self.b - self.a)
