"""Exact arithmetic over Q and over one real quadratic extension Q(sqrt(d)).

Every coordinate, speed and duration in this package is a :class:`Scalar`,
a value ``a + b*sqrt(d)`` with rational ``a``, ``b`` and a fixed square-free
``d`` shared per :class:`FieldContext`.  All operations are exact: equality
is structural equality of canonical ``(a, b)`` pairs, ordering is decided by
integer sign tests, and no floating point is ever consulted.
"""

from __future__ import annotations

import numbers
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

try:  # gmpy2 rationals are a drop-in, much faster backend when present
    from gmpy2 import mpq as _RAT
except ImportError:  # pragma: no cover
    _RAT = Fraction

RationalLike = Union[int, Fraction, str]
ScalarLike = Union["Scalar", int, Fraction]


def _rat(value) -> "_RAT":
    if isinstance(value, str):
        return _RAT(Fraction(value))
    return _RAT(value)


_ZERO = _rat(0)


class FieldError(ValueError):
    """Mixing scalars from incompatible quadratic extensions."""


class ScalarSyntaxError(ValueError):
    """Malformed scalar literal."""


def square_free_split(n: int) -> tuple[int, int]:
    """Split n >= 0 as n = f*f*r with r square-free; returns (f, r)."""
    if n < 0:
        raise ValueError("negative radicand")
    if n in (0, 1):
        return 1, n
    f, r, p = 1, n, 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            f *= p
        p += 1 if p == 2 else 2
    return f, r


@dataclass(frozen=True)
class FieldContext:
    """Selects the extension Q(sqrt(d)).  d is normalized square-free;
    d = 0 (or any perfect square) collapses to plain rationals."""

    d: int = 0

    def __post_init__(self) -> None:
        f, r = square_free_split(self.d)
        object.__setattr__(self, "d", 0 if r <= 1 else r)

    @property
    def is_rational(self) -> bool:
        return self.d == 0

    def scalar(self, a: RationalLike, b: RationalLike = 0) -> Scalar:
        a, b = _rat(a), _rat(b)
        if self.d == 0 and b != 0:
            raise FieldError("irrational part in a rational field context")
        return Scalar(a, b, self.d)

    def zero(self) -> Scalar:
        return Scalar(_rat(0), _rat(0), self.d)

    def one(self) -> Scalar:
        return Scalar(_rat(1), _rat(0), self.d)

    def sqrt_term(self, coefficient: RationalLike, radicand: int) -> Scalar:
        """coefficient * sqrt(radicand), folding square factors.

        The square-free part of ``radicand`` must match this context (or be
        0/1, which is rational); anything else is a mixed radical.
        """
        f, r = square_free_split(radicand)
        c = _rat(coefficient)
        if r <= 1:
            return self.scalar(c * f * r)
        if r != self.d:
            raise FieldError(f"sqrt({radicand}) does not live in Q(sqrt({self.d}))")
        return Scalar(_rat(0), c * f, self.d)

    def parse(self, text: str) -> Scalar:
        return parse_scalar(text, self)


RATIONALS = FieldContext(0)

_RAT_TXT = r"[+-]?\d+(?:/\d+)?"
_RE_RAT = re.compile(rf"^(?P<a>{_RAT_TXT})$")
_RE_SQRT = re.compile(rf"^(?P<b>{_RAT_TXT})\*sqrt\((?P<d>\d+)\)$")
_RE_FULL = re.compile(
    rf"^(?P<a>{_RAT_TXT})(?P<b>[+-]\d+(?:/\d+)?)\*sqrt\((?P<d>\d+)\)$"
)


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ScalarSyntaxError(f"division by zero in {text!r}") from None
    except ValueError:
        raise ScalarSyntaxError(f"not a rational: {text!r}") from None


def parse_scalar(text: str, ctx: FieldContext = RATIONALS) -> Scalar:
    """Parse ``p``, ``p/q`` or ``a+b*sqrt(d)`` (also ``a-b*sqrt(d)``,
    ``b*sqrt(d)``).  Bit-exact inverse of :func:`format_scalar`."""
    s = text.replace(" ", "")
    if not s:
        raise ScalarSyntaxError("empty scalar")
    m = _RE_FULL.match(s)
    if m:
        a = _parse_rational(m.group("a"))
        term = ctx.sqrt_term(_parse_rational(m.group("b")), int(m.group("d")))
        return ctx.scalar(a) + term
    m = _RE_SQRT.match(s)
    if m:
        return ctx.sqrt_term(_parse_rational(m.group("b")), int(m.group("d")))
    m = _RE_RAT.match(s)
    if m:
        return ctx.scalar(_parse_rational(m.group("a")))
    raise ScalarSyntaxError(f"malformed scalar: {text!r}")


def format_scalar(x: Scalar) -> str:
    if x.b == 0:
        return str(x.a)
    b_txt = f"{x.b}*sqrt({x.d})"
    if x.a == 0:
        return b_txt
    sign = "+" if x.b > 0 else "-"
    return f"{x.a}{sign}{abs(x.b)}*sqrt({x.d})"


def _sgn(f) -> int:
    return (f > 0) - (f < 0)


class Scalar:
    """Immutable exact value a + b*sqrt(d); totally ordered and hashable.

    Pure rationals (b = 0, d = 0) coerce silently into any extension, so a
    rational time can offset a Q(sqrt(5)) position; two genuinely irrational
    scalars from different extensions refuse to mix.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int) -> None:
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, *_):
        raise AttributeError("Scalar is immutable")

    # -- coercion ---------------------------------------------------------

    def _pair(self, other: ScalarLike) -> tuple[Scalar, int]:
        if isinstance(other, numbers.Rational):
            return Scalar(_rat(other), _ZERO, self.d), self.d
        if not isinstance(other, Scalar):
            return NotImplemented, 0
        if other.d == self.d:
            return other, self.d
        if other.b == 0:
            return Scalar(other.a, _ZERO, self.d), self.d
        if self.b == 0:
            return other, other.d
        raise FieldError(f"cannot mix sqrt({self.d}) with sqrt({other.d})")

    # -- field operations -------------------------------------------------

    def __add__(self, other: ScalarLike) -> Scalar:
        o, d = self._pair(other)
        if o is NotImplemented:
            return NotImplemented
        return Scalar(self.a + o.a, self.b + o.b, d)

    __radd__ = __add__

    def __sub__(self, other: ScalarLike) -> Scalar:
        o, d = self._pair(other)
        if o is NotImplemented:
            return NotImplemented
        return Scalar(self.a - o.a, self.b - o.b, d)

    def __rsub__(self, other: ScalarLike) -> Scalar:
        return (-self) + other

    def __neg__(self) -> Scalar:
        return Scalar(-self.a, -self.b, self.d)

    def __mul__(self, other: ScalarLike) -> Scalar:
        o, d = self._pair(other)
        if o is NotImplemented:
            return NotImplemented
        return Scalar(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def __truediv__(self, other: ScalarLike) -> Scalar:
        o, d = self._pair(other)
        if o is NotImplemented:
            return NotImplemented
        norm = o.a * o.a - o.b * o.b * d
        if norm == 0:
            raise ZeroDivisionError("scalar division by zero")
        return Scalar(
            (self.a * o.a - self.b * o.b * d) / norm,
            (self.b * o.a - self.a * o.b) / norm,
            d,
        )

    def __rtruediv__(self, other: ScalarLike) -> Scalar:
        o, _ = self._pair(other)
        return o / self

    # -- order ------------------------------------------------------------

    def sign(self) -> int:
        """Exact sign in {-1, 0, +1}, decided by comparing a*a and b*b*d."""
        sa, sb = _sgn(self.a), _sgn(self.b)
        if sb == 0:
            return sa
        if sa == 0:
            return sb
        if sa == sb:
            return sa
        return sa * _sgn(self.a * self.a - self.b * self.b * self.d)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    @property
    def is_rational_value(self) -> bool:
        return self.b == 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, numbers.Rational):
            return self.b == 0 and self.a == other
        if not isinstance(other, Scalar):
            return NotImplemented
        if self.b == 0 and other.b == 0:
            return self.a == other.a
        return self.d == other.d and self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def _cmp(self, other: ScalarLike) -> int:
        diff = self - other
        if diff is NotImplemented:
            return NotImplemented
        return diff.sign()

    def __lt__(self, other: ScalarLike) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: ScalarLike) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: ScalarLike) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: ScalarLike) -> bool:
        return self._cmp(other) >= 0

    # -- integer bracketing -----------------------------------------------

    def floor(self) -> int:
        """Largest integer <= value, found without floating point."""
        if self.b == 0:
            return int(self.a.numerator // self.a.denominator)
        # exponential bracket then binary search, all via exact sign tests
        lo = -1
        while (self - lo).sign() < 0:
            lo *= 2
        hi = 1
        while (self - hi).sign() >= 0:
            hi *= 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if (self - mid).sign() >= 0:
                lo = mid
            else:
                hi = mid
        return lo

    # -- misc ---------------------------------------------------------------

    def __float__(self) -> float:
        if self.b == 0:
            return float(self.a)
        return float(self.a) + float(self.b) * float(self.d) ** 0.5

    def __str__(self) -> str:
        return format_scalar(self)

    def __repr__(self) -> str:
        return f"Scalar({format_scalar(self)})"


def as_scalar(value: ScalarLike, ctx: FieldContext) -> Scalar:
    if isinstance(value, Scalar):
        if value.d == ctx.d or value.b == 0:
            return Scalar(value.a, value.b, ctx.d) if value.b == 0 else value
        raise FieldError(f"scalar from sqrt({value.d}) used in Q(sqrt({ctx.d}))")
    return ctx.scalar(value)


def sign(x: Scalar) -> int:
    return x.sign()


def is_commensurate(x: Scalar, y: Scalar) -> bool:
    """True iff x/y is a plain rational.  Requires y != 0."""
    if y.sign() == 0:
        raise ZeroDivisionError("commensurability against zero")
    return (x / y).b == 0


class IncommensurateError(ValueError):
    """gcd requested for values with an irrational ratio."""


def rational_gcd(x: Scalar, y: Scalar) -> Scalar:
    """Greatest positive scalar dividing both x and y with integer quotients.

    Defined only for commensurate positive inputs: with x/y = p/q in lowest
    terms the answer is y/q (for rationals p1/q1, p2/q2 this is
    gcd(p1*q2, p2*q1)/(q1*q2)).
    """
    if x.sign() <= 0 or y.sign() <= 0:
        raise ValueError("gcd needs strictly positive inputs")
    ratio = x / y
    if ratio.b != 0:
        raise IncommensurateError("no common divisor: ratio is irrational")
    return y / ratio.a.denominator


def floor_div_mod(a: Scalar, b: Scalar) -> tuple[int, Scalar]:
    """Euclidean division: a = b*n + r with 0 <= r < b.  Requires b > 0."""
    if b.sign() <= 0:
        raise ValueError("divisor must be strictly positive")
    n = (a / b).floor()
    r = a - b * n
    return n, r


def euclid_trace(
    a: Scalar, b: Scalar, max_steps: int = 64
) -> list[tuple[Scalar, Scalar, int, Scalar]]:
    """Successive (a_n, b_n, q_n, r_n) of the subtractive gcd recursion,
    stopping at a zero remainder or after max_steps.

    This is the reference, non-geometric recursion; the signal-machine runs
    are checked against it.
    """
    if not (a >= b and b.sign() > 0):
        raise ValueError("need a >= b > 0")
    steps: list[tuple[Scalar, Scalar, int, Scalar]] = []
    while len(steps) < max_steps:
        q, r = floor_div_mod(a, b)
        steps.append((a, b, q, r))
        if r.sign() == 0:
            break
        a, b = b, r
    return steps
