"""The three concrete semirings: plus-times, max-plus and Boolean.

Every weight carries its semiring kind.  Arithmetic is exact: plus-times and
max-plus values are :class:`fractions.Fraction`, Boolean values are ``bool``,
and the max-plus zero is the singleton :data:`NEG_INF`.

Matrix kernels do not wrap every entry in a :class:`Weight`; they work on the
*raw* values through the per-kind :class:`Semiring` objects returned by
:func:`semiring`.
"""
from __future__ import annotations

import enum
import re
from fractions import Fraction
from functools import total_ordering


class SemiringError(ValueError):
    """Raised on malformed weights or on operations mixing semiring kinds."""


class SemiringKind(enum.Enum):
    PLUS_TIMES = "plus-times"
    MAX_PLUS = "max-plus"
    BOOLEAN = "boolean"

    @classmethod
    def from_tag(cls, tag: str) -> "SemiringKind":
        for kind in cls:
            if kind.value == tag:
                return kind
        raise SemiringError(f"unknown semiring tag {tag!r}")

    def __str__(self) -> str:
        return self.value


@total_ordering
class _MinusInfinity:
    """The max-plus zero.  Compares below every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NEG_INF"

    def __str__(self) -> str:
        return "-inf"

    def __eq__(self, other) -> bool:
        return other is self

    def __lt__(self, other) -> bool:
        return other is not self

    def __hash__(self) -> int:
        return hash("-inf")

    def __reduce__(self):
        return (_MinusInfinity, ())


NEG_INF = _MinusInfinity()

_RATIONAL = re.compile(r"^(-?\d+)(?:/(\d+))?$")


def _parse_rational(text: str) -> Fraction:
    m = _RATIONAL.match(text)
    if m is None:
        raise SemiringError(f"malformed weight {text!r}")
    num = int(m.group(1))
    if m.group(2) is None:
        return Fraction(num)
    den = int(m.group(2))
    if den == 0:
        raise SemiringError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def _format_rational(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


class Semiring:
    """Raw-value operations of one semiring kind.

    ``add``/``mul``/``leq`` never check their arguments; they are the inner
    loop of every matrix kernel.
    """

    kind: SemiringKind
    zero: object
    one: object

    def add(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def leq(self, a, b) -> bool:
        raise NotImplementedError

    def is_zero(self, a) -> bool:
        return a == self.zero

    def sum(self, values):
        acc = self.zero
        for v in values:
            acc = self.add(acc, v)
        return acc

    def product(self, values):
        acc = self.one
        for v in values:
            acc = self.mul(acc, v)
        return acc

    def coerce(self, value):
        """Convert a Python number/bool/string into a checked raw value."""
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError

    def format(self, value) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<semiring {self.kind.value}>"


class PlusTimes(Semiring):
    kind = SemiringKind.PLUS_TIMES
    zero = Fraction(0)
    one = Fraction(1)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def leq(self, a, b) -> bool:
        return a <= b

    def coerce(self, value):
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, bool) or value is NEG_INF:
            raise SemiringError(f"{value!r} is not a plus-times weight")
        if isinstance(value, float):
            raise SemiringError("floating-point weights are not accepted; use Fraction")
        v = Fraction(value)
        if v < 0:
            raise SemiringError(f"plus-times weight {v} is negative")
        return v

    def parse(self, text: str):
        text = text.strip()
        if "inf" in text:
            raise SemiringError(f"infinite weight {text!r} is not representable")
        v = _parse_rational(text)
        if v < 0:
            raise SemiringError(f"plus-times weight {text!r} is negative")
        return v

    def format(self, value) -> str:
        return _format_rational(value)


class MaxPlus(Semiring):
    kind = SemiringKind.MAX_PLUS
    zero = NEG_INF
    one = Fraction(0)

    def add(self, a, b):
        if a is NEG_INF:
            return b
        if b is NEG_INF:
            return a
        return a if a >= b else b

    def mul(self, a, b):
        if a is NEG_INF or b is NEG_INF:
            return NEG_INF
        return a + b

    def leq(self, a, b) -> bool:
        if a is NEG_INF:
            return True
        if b is NEG_INF:
            return False
        return a <= b

    def is_zero(self, a) -> bool:
        return a is NEG_INF

    def coerce(self, value):
        if value is NEG_INF:
            return NEG_INF
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, bool):
            raise SemiringError(f"{value!r} is not a max-plus weight")
        if isinstance(value, float):
            if value == float("-inf"):
                return NEG_INF
            raise SemiringError("floating-point weights are not accepted; use Fraction")
        return Fraction(value)

    def parse(self, text: str):
        text = text.strip()
        if text == "-inf":
            return NEG_INF
        if "inf" in text:
            raise SemiringError(f"weight {text!r} is not representable in max-plus")
        return _parse_rational(text)

    def format(self, value) -> str:
        if value is NEG_INF:
            return "-inf"
        return _format_rational(value)


class Boolean(Semiring):
    kind = SemiringKind.BOOLEAN
    zero = False
    one = True

    def add(self, a, b):
        return a or b

    def mul(self, a, b):
        return a and b

    def leq(self, a, b) -> bool:
        return (not a) or b

    def coerce(self, value):
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, bool):
            return value
        if value in (0, 1):
            return bool(value)
        raise SemiringError(f"{value!r} is not a Boolean weight")

    def parse(self, text: str):
        text = text.strip()
        if text == "1":
            return True
        if text == "0":
            return False
        raise SemiringError(f"malformed Boolean weight {text!r}")

    def format(self, value) -> str:
        return "1" if value else "0"


_SEMIRINGS = {
    SemiringKind.PLUS_TIMES: PlusTimes(),
    SemiringKind.MAX_PLUS: MaxPlus(),
    SemiringKind.BOOLEAN: Boolean(),
}


def semiring(kind: SemiringKind) -> Semiring:
    return _SEMIRINGS[kind]


class Weight:
    """An immutable semiring element tagged with its kind."""

    __slots__ = ("kind", "value")

    def __init__(self, kind: SemiringKind, value):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "value", semiring(kind).coerce(value))

    def __setattr__(self, name, value):
        raise AttributeError("Weight is immutable")

    @classmethod
    def zero(cls, kind: SemiringKind) -> "Weight":
        return cls(kind, semiring(kind).zero)

    @classmethod
    def one(cls, kind: SemiringKind) -> "Weight":
        return cls(kind, semiring(kind).one)

    def is_zero(self) -> bool:
        return semiring(self.kind).is_zero(self.value)

    def _check(self, other: "Weight") -> None:
        if not isinstance(other, Weight):
            raise TypeError(f"expected Weight, got {type(other).__name__}")
        if other.kind is not self.kind:
            raise SemiringError(f"cannot combine {self.kind} and {other.kind} weights")

    def __add__(self, other: "Weight") -> "Weight":
        return sr_add(self, other)

    def __mul__(self, other: "Weight") -> "Weight":
        return sr_mul(self, other)

    def __le__(self, other: "Weight") -> bool:
        return sr_leq(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Weight) and other.kind is self.kind and other.value == self.value

    def __hash__(self) -> int:
        return hash((self.kind, self.value))

    def __repr__(self) -> str:
        return f"Weight({self.kind.value}, {format_weight(self)})"

    def __str__(self) -> str:
        return format_weight(self)


def sr_add(a: Weight, b: Weight) -> Weight:
    a._check(b)
    return Weight(a.kind, semiring(a.kind).add(a.value, b.value))


def sr_mul(a: Weight, b: Weight) -> Weight:
    a._check(b)
    return Weight(a.kind, semiring(a.kind).mul(a.value, b.value))


def sr_leq(a: Weight, b: Weight) -> bool:
    a._check(b)
    return semiring(a.kind).leq(a.value, b.value)


def parse_weight(kind: SemiringKind, text: str) -> Weight:
    return Weight(kind, semiring(kind).parse(text))


def format_weight(w: Weight) -> str:
    return semiring(w.kind).format(w.value)
