"""Exact scalar arithmetic over the rationals and prime fields.

Series code works on *raw* coefficients for speed: ``gmpy2.mpq`` over Q and
plain ``int`` residues over F_p.  Raw values may be left unreduced inside an
accumulation loop; :meth:`FieldSpec.reduce` brings them back to canonical form.
:class:`FieldElement` is the boxed, always-canonical value used at API edges.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

from .errors import (
    FieldDivisionByZero,
    FieldMismatchError,
    InvalidParameterError,
    NonInvertibleDenominatorError,
)

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3 * 10**24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FieldKind(enum.Enum):
    RATIONALS = "Q"
    PRIME_FIELD = "Fp"


@dataclass(frozen=True)
class FieldSpec:
    kind: FieldKind
    modulus: int | None = None

    def __post_init__(self):
        if self.kind is FieldKind.RATIONALS:
            if self.modulus is not None:
                raise InvalidParameterError("the rationals take no modulus")
            return
        p = self.modulus
        if not isinstance(p, int) or p < 2:
            raise InvalidParameterError(f"modulus must be an integer >= 2, got {p!r}")
        if p >= 1 << 64:
            raise InvalidParameterError("moduli are limited to 64 bits")
        if not is_prime(p):
            raise InvalidParameterError(f"modulus {p} is not prime")

    @classmethod
    def rationals(cls) -> FieldSpec:
        return cls(FieldKind.RATIONALS)

    @classmethod
    def prime(cls, p: int) -> FieldSpec:
        return cls(FieldKind.PRIME_FIELD, p)

    @classmethod
    def parse(cls, text: str) -> FieldSpec:
        """Read ``q`` (rationals) or ``fp:<p>``."""
        t = text.strip().lower()
        if t in ("q", "qq", "rationals"):
            return cls.rationals()
        if t.startswith("fp:"):
            try:
                p = int(t[3:])
            except ValueError:
                raise InvalidParameterError(f"bad prime in field spec {text!r}") from None
            return cls.prime(p)
        raise InvalidParameterError(f"unknown field {text!r}; use 'q' or 'fp:<p>'")

    @property
    def is_rational(self) -> bool:
        return self.kind is FieldKind.RATIONALS

    @property
    def characteristic(self) -> int:
        return 0 if self.modulus is None else self.modulus

    def __str__(self):
        return "Q" if self.is_rational else f"F_{self.modulus}"

    def __repr__(self):
        return "FieldSpec.rationals()" if self.is_rational else f"FieldSpec.prime({self.modulus})"

    # raw-value layer -----------------------------------------------------

    @property
    def zero(self):
        return mpq(0) if self.modulus is None else 0

    @property
    def one(self):
        return mpq(1) if self.modulus is None else 1

    def reduce(self, raw):
        if self.modulus is None:
            return raw
        return raw % self.modulus

    def from_ratio(self, num: int, den: int = 1):
        if den == 0:
            raise FieldDivisionByZero("zero denominator")
        if self.modulus is None:
            return mpq(num, den)
        p = self.modulus
        if den % p == 0:
            raise NonInvertibleDenominatorError(f"denominator {den} vanishes mod {p}")
        return num * pow(den, -1, p) % p

    def coerce(self, value):
        """Embed an int, Fraction, mpq or FieldElement as a raw value."""
        if isinstance(value, FieldElement):
            if value.spec != self:
                raise FieldMismatchError(f"element of {value.spec} used in {self}")
            return value.value
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            return mpq(value) if self.modulus is None else value % self.modulus
        if isinstance(value, (Rational, type(mpq(0)))):
            return self.from_ratio(int(value.numerator), int(value.denominator))
        raise TypeError(f"cannot embed {type(value).__name__} into {self}")

    def inv(self, raw):
        if not raw:
            raise FieldDivisionByZero("inverse of zero")
        if self.modulus is None:
            return 1 / raw
        return pow(raw, -1, self.modulus)

    def format(self, raw) -> str:
        if self.modulus is None:
            if raw.denominator == 1:
                return str(raw.numerator)
            return f"{raw.numerator}/{raw.denominator}"
        return str(raw)

    def element(self, value) -> FieldElement:
        return FieldElement(self, self.coerce(value))


QQ = FieldSpec.rationals()


class FieldElement:
    """An immutable field scalar in canonical form."""

    __slots__ = ("spec", "value")

    def __init__(self, spec: FieldSpec, value):
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "value", spec.reduce(value) if spec.modulus else mpq(value))

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _other(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.spec != self.spec:
                raise FieldMismatchError(f"cannot combine {self.spec} and {other.spec}")
            return other
        return FieldElement(self.spec, self.spec.coerce(other))

    def __add__(self, other):
        return fe_add(self, self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return fe_add(self, -self._other(other))

    def __rsub__(self, other):
        return fe_add(self._other(other), -self)

    def __neg__(self):
        return FieldElement(self.spec, -self.value)

    def __mul__(self, other):
        return fe_mul(self, self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return fe_mul(self, fe_inv(self._other(other)))

    def __rtruediv__(self, other):
        return fe_mul(self._other(other), fe_inv(self))

    def __pow__(self, k: int):
        if k < 0:
            return fe_inv(self) ** -k
        if self.spec.modulus is None:
            return FieldElement(self.spec, self.value**k)
        return FieldElement(self.spec, pow(self.value, k, self.spec.modulus))

    def __bool__(self):
        return bool(self.value)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.spec == other.spec and self.value == other.value
        try:
            return self.value == self.spec.coerce(other)
        except (TypeError, FieldDivisionByZero):
            return NotImplemented

    def __hash__(self):
        return hash((self.spec, self.value))

    def to_fraction(self) -> Fraction:
        """Exact value as a Fraction (the residue itself over F_p)."""
        if self.spec.modulus is None:
            return Fraction(int(self.value.numerator), int(self.value.denominator))
        return Fraction(self.value)

    def __str__(self):
        return self.spec.format(self.value)

    def __repr__(self):
        return f"FieldElement({self.spec}, {self})"


def _check(a: FieldElement, b: FieldElement):
    if a.spec != b.spec:
        raise FieldMismatchError(f"cannot combine {a.spec} and {b.spec}")


def fe_add(a: FieldElement, b: FieldElement) -> FieldElement:
    _check(a, b)
    return FieldElement(a.spec, a.value + b.value)


def fe_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    _check(a, b)
    return FieldElement(a.spec, a.value * b.value)


def fe_inv(a: FieldElement) -> FieldElement:
    return FieldElement(a.spec, a.spec.inv(a.value))


def fe_from_ratio(num: int, den: int, spec: FieldSpec) -> FieldElement:
    return FieldElement(spec, spec.from_ratio(num, den))
