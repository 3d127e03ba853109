"""Exact scalars: the rationals and prime fields F_p with p >= 5.

Polynomial and elimination code stores plain values -- ``fractions.Fraction``
over the rationals, least nonnegative residues (``int``) over F_p -- and
routes arithmetic through a :class:`FieldSpec`.  :class:`Scalar` is a thin
wrapper that gives those values operator syntax plus mixed-field checking.

Characteristic 2 and 3 are excluded throughout (several defining identities
divide by 2 and 3), and multilinear work of degree d over F_p additionally
requires p > d; ``FieldSpec.check_degree`` enforces that guard.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class MixedFieldError(ValueError):
    """Two scalars from different fields met in a single operation."""


class SmallPrimeError(ValueError):
    """The prime is too small for the requested working degree."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (exact for anything we will ever see)."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The rationals (kind 'q') or a prime field (kind 'fp' with p >= 5)."""

    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind == "q":
            if self.p is not None:
                raise ValueError("rational field takes no modulus")
        elif self.kind == "fp":
            if not isinstance(self.p, int) or self.p < 5 or not is_prime(self.p):
                raise ValueError(
                    f"prime field needs a prime p >= 5, got {self.p!r} "
                    "(characteristic 2 and 3 are excluded)"
                )
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    # -- naming ------------------------------------------------------------

    @property
    def name(self) -> str:
        """Serialized form used in reports and cache filenames."""
        return "q" if self.kind == "q" else f"fp:{self.p}"

    @classmethod
    def parse_name(cls, text: str) -> "FieldSpec":
        text = text.strip()
        if text == "q":
            return QQ
        if text.startswith("fp:"):
            return cls("fp", int(text[3:]))
        raise ValueError(f"unknown field name {text!r} (expected 'q' or 'fp:<p>')")

    def __str__(self):
        return self.name

    # -- raw-value arithmetic ------------------------------------------------

    def zero(self):
        return 0 if self.kind == "fp" else Fraction(0)

    def one(self):
        return 1 if self.kind == "fp" else Fraction(1)

    def normalize(self, v):
        """Canonical raw value: reduced Fraction, or least nonnegative residue."""
        if self.kind == "fp":
            if isinstance(v, Fraction):
                return reduce_mod_p(v, self)
            return v % self.p
        return Fraction(v)

    def add(self, a, b):
        return (a + b) % self.p if self.kind == "fp" else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.kind == "fp" else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.kind == "fp" else a * b

    def neg(self, a):
        return (-a) % self.p if self.kind == "fp" else -a

    def div(self, a, b):
        if self.kind == "fp":
            b %= self.p
            if b == 0:
                raise ZeroDivisionError("division by zero in prime field")
            return a * pow(b, -1, self.p) % self.p
        if b == 0:
            raise ZeroDivisionError("division by zero")
        return Fraction(a) / b

    def inv(self, a):
        return self.div(self.one(), a)

    # -- conversions and formatting -------------------------------------------

    def from_int(self, n: int):
        return n % self.p if self.kind == "fp" else Fraction(n)

    def format_value(self, v) -> str:
        if self.kind == "fp":
            return str(v % self.p)
        v = Fraction(v)
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"

    def parse_value(self, text: str):
        """Scalar literal 'a' or 'a/b'."""
        text = text.strip()
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                q = Fraction(int(num), int(den))
            else:
                q = Fraction(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad scalar literal {text!r}") from exc
        return self.normalize(q)

    # -- guards ------------------------------------------------------------

    def check_degree(self, d: int, allow_small_prime: bool = False) -> None:
        """Multilinear components of degree d need p > d to stay faithful.

        Full linearization divides by multiplicities up to d, so a prime
        p <= d would not see the same component.  The guard can be overridden
        for exploratory runs.
        """
        if self.kind == "fp" and self.p <= d and not allow_small_prime:
            raise SmallPrimeError(
                f"p = {self.p} is too small for degree-{d} multilinear work "
                "(need p > degree; pass allow_small_prime to override)"
            )


QQ = FieldSpec("q")


def reduce_mod_p(a, spec: FieldSpec) -> int:
    """Image of a rational under the canonical map onto F_p.

    Defined exactly when the denominator is invertible mod p.
    """
    if spec.kind != "fp":
        raise ValueError("reduce_mod_p needs a prime-field target")
    a = Fraction(a)
    p = spec.p
    if a.denominator % p == 0:
        raise ZeroDivisionError(f"denominator of {a} is divisible by p = {p}")
    return a.numerator * pow(a.denominator, -1, p) % p


class Scalar:
    """A field value bundled with its field; mixed-field operations raise."""

    __slots__ = ("field", "value")

    def __init__(self, value, field: FieldSpec = QQ):
        self.field = field
        self.value = field.normalize(value)

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise MixedFieldError(
                    f"cannot combine {self.field.name} with {other.field.name}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar(other, self.field)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.field.add(self.value, other.value), self.field)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.field.sub(self.value, other.value), self.field)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.field.sub(other.value, self.value), self.field)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.field.mul(self.value, other.value), self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.field.div(self.value, other.value), self.field)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.field.div(other.value, self.value), self.field)

    def __neg__(self):
        return Scalar(self.field.neg(self.value), self.field)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.field == other.field and self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.value))

    def __bool__(self):
        return self.value != self.field.zero()

    def reduce(self, spec: FieldSpec) -> "Scalar":
        """Map a rational scalar into F_p."""
        if self.field.kind != "q":
            raise ValueError("only rational scalars reduce mod p")
        return Scalar(reduce_mod_p(self.value, spec), spec)

    def __repr__(self):
        return f"Scalar({self.field.format_value(self.value)}, {self.field.name})"
