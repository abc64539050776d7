import re
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, List, Optional, Tuple, TypedDict

# COMMON TYPES
# A permutation of {1..n} is stored as the tuple of its images (σ(1), ..., σ(n))
Permutation = Tuple[int, ...]

# Sparse linear combination of basis keys (tree monomials, basis indices, ...)
Element = Dict[Hashable, Fraction]

# A generator of a free operad is addressed by (arity, index inside E(arity))
GeneratorKey = Tuple[int, int]

# Dimension table dim E(n)^d, keyed by arity then degree
DimensionTable = Dict[int, Dict[int, int]]

# Integers and "p/q" quotients only, never decimals
RATIONAL_PATTERN = re.compile(r"[+-]?\d+(?:/\d+)?")


# REPORTS
@dataclass(order=True)
class Violation:
    check: str
    arity: int
    degree: Optional[int] = None
    detail: str = ""

    def __str__(self) -> str:
        where = f"arity {self.arity}" + (
            f", degree {self.degree}" if self.degree is not None else ""
        )
        return f"[{self.check}] {where}: {self.detail}"


@dataclass
class Report:
    """Outcome of a check that reports failures instead of raising.

    Args:
        - title: what was checked.
        - violations: located failures, empty when the check passes.
        - details: free-form extra information (tables, counts) for printing.

    """

    title: str
    violations: List[Violation] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, check: str, arity: int, degree: Optional[int] = None, detail: str = ""):
        self.violations.append(Violation(check, arity, degree, detail))

    def extend(self, other: "Report"):
        self.violations.extend(other.violations)

    def summary(self) -> str:
        if self.ok:
            return f"{self.title}: PASS"
        lines = [f"{self.title}: FAIL ({len(self.violations)} violations)"]
        lines.extend(f"  - {v}" for v in self.violations[:20])
        if len(self.violations) > 20:
            lines.append(f"  ... {len(self.violations) - 20} more")
        return "\n".join(lines)


class StageRecord(TypedDict):
    arity: int
    generators: Dict[int, int]
    source_basis_size: int
    target_basis_size: int
    quis: bool
    seconds: float


class ModelReport(TypedDict):
    name: str
    flavor: str
    max_arity: int
    section_strategy: str
    dimension_table: Dict[str, Dict[str, int]]
    stages: List[StageRecord]
    strict_units: Optional[bool]
    seconds: float


# EXCEPTIONS
class OperadiqError(Exception):
    """Root of every error raised on purpose by this code base."""

    exit_code = 1


class InputError(OperadiqError):
    exit_code = 2


class ValidationError(OperadiqError):
    exit_code = 2

    def __init__(self, message: str, violations: Optional[List[Violation]] = None):
        self.violations = violations or []
        located = "".join(f"\n  - {v}" for v in self.violations[:10])
        super().__init__(message + located)


class WindowError(OperadiqError):
    exit_code = 2


class StructureError(OperadiqError):
    """An operation needs structure (unit, restrictions, multiplication) that is absent."""

    exit_code = 2


class LinearAlgebraError(OperadiqError):
    exit_code = 1


class KanConditionError(OperadiqError):
    exit_code = 1

    def __init__(self, i: int, j: int, message: str = ""):
        self.pair = (i, j)
        super().__init__(
            message or f"Kan-like condition fails for (i, j) = ({i}, {j})"
        )


class HypothesisError(OperadiqError):
    exit_code = 3

    def __init__(self, message: str, table: Optional[DimensionTable] = None):
        self.table = table or {}
        super().__init__(message)


class VerificationError(OperadiqError):
    exit_code = 1


# LET'S ADD SOME COLOUR TO PRINTS
class Colors:
    RED = "\033[31m"
    GREEN = "\033[32m"
    YELLOW = "\033[33m"
    BLUE = "\033[34m"
    RESET = "\033[0m"


def to_fraction(value: Any) -> Fraction:
    """Reads an exact rational from an int, a Fraction, a sympy rational or a "p/q" string.

    Raises:
        - InputError for floats and decimal or scientific strings such as "1.5".

    """

    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not RATIONAL_PATTERN.fullmatch(value.strip()):
            raise InputError(f"Not an exact rational: {value!r}")
        return Fraction(value.strip())
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise InputError(f"Not an exact rational: {value!r}")


def fraction_to_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)
