"""Exact and certified real scalars.

Three kinds of value flow through the library:

* ``Rational``: an exact fraction.
* ``QuadSurd``: an exact quadratic irrational ``(p + q*sqrt(D))/r``.
* ``Interval``: a pair of dyadic bounds with a working precision in bits.

Arithmetic between exact values stays exact. As soon as an interval takes
part, the result is an interval whose bounds are rounded outward. Floors,
ceilings and signs are either answered with certainty or refused with
``InsufficientPrecisionError``; refinement is always the caller's decision.
"""
import logging
import math
import numbers
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple, Union

from mpmath import libmp
from sympy.ntheory.factor_ import core

from .config import GUARD_BITS, MIN_USEFUL_BITS, PREC_START_BITS

logger = logging.getLogger(__name__)

Number = Union[int, Fraction, "Real"]

ARITH_OPS = ("+", "-", "*", "/", "reciprocal", "negate")


class Real:
    """Common base of the three scalar kinds; operators route through ``real_arith``."""

    kind = "real"

    def __add__(self, other):
        return real_arith(self, as_real(other), "+")

    def __radd__(self, other):
        return real_arith(as_real(other), self, "+")

    def __sub__(self, other):
        return real_arith(self, as_real(other), "-")

    def __rsub__(self, other):
        return real_arith(as_real(other), self, "-")

    def __mul__(self, other):
        return real_arith(self, as_real(other), "*")

    def __rmul__(self, other):
        return real_arith(as_real(other), self, "*")

    def __truediv__(self, other):
        return real_arith(self, as_real(other), "/")

    def __rtruediv__(self, other):
        return real_arith(as_real(other), self, "/")

    def __neg__(self):
        return real_arith(self, None, "negate")

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise TypeError("only non-negative integer powers are supported")
        result: Real = Rational(1)
        base: Real = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __lt__(self, other):
        return compare(self, as_real(other)) < 0

    def __le__(self, other):
        return compare(self, as_real(other)) <= 0

    def __gt__(self, other):
        return compare(self, as_real(other)) > 0

    def __ge__(self, other):
        return compare(self, as_real(other)) >= 0

    @property
    def is_exact(self) -> bool:
        return not isinstance(self, Interval)

    def reciprocal(self) -> "Real":
        return real_arith(self, None, "reciprocal")

    def floor(self) -> int:
        return integer_part(self, "floor")

    def ceil(self) -> int:
        return integer_part(self, "ceil")

    def sign(self) -> int:
        raise NotImplementedError

    def to_interval(self, prec: int) -> "Interval":
        raise NotImplementedError

    def bounds(self) -> Tuple[Fraction, Fraction]:
        """Rational lower and upper bounds (equal for rationals)."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def to_decimal(self, places: int = 6) -> str:
        lo, hi = self.bounds()
        return format_fixed((lo + hi) / 2, places)

    def to_scientific(self, digits: int = 7) -> str:
        lo, hi = self.bounds()
        return format_scientific((lo + hi) / 2, digits)

    def __float__(self) -> float:
        lo, hi = self.bounds()
        return float((lo + hi) / 2)


@dataclass(frozen=True)
class Rational(Real):
    """An exact rational number."""

    value: Fraction

    kind = "rational"

    def __post_init__(self):
        value = self.value if isinstance(self.value, Fraction) else Fraction(self.value)
        if type(value.numerator) is not int or type(value.denominator) is not int:
            value = Fraction(int(value.numerator), int(value.denominator))
        object.__setattr__(self, "value", value)

    def __repr__(self) -> str:
        return f"Rational({self.value})"

    @property
    def numerator(self) -> int:
        return self.value.numerator

    @property
    def denominator(self) -> int:
        return self.value.denominator

    @property
    def is_integer(self) -> bool:
        return self.value.denominator == 1

    def sign(self) -> int:
        return (self.value > 0) - (self.value < 0)

    def bounds(self) -> Tuple[Fraction, Fraction]:
        return self.value, self.value

    def to_interval(self, prec: int) -> "Interval":
        return Interval.build(self.value, self.value, prec)

    def to_json(self) -> dict:
        return {"kind": "rational", "num": str(self.numerator), "den": str(self.denominator)}


@dataclass(frozen=True)
class QuadSurd(Real):
    """The quadratic irrational (p + q*sqrt(D))/r in normalized form.

    Use ``make_surd`` to build one: it extracts square factors from the radicand,
    reduces by gcd(p, q, r) and demotes to ``Rational`` when q vanishes.
    """

    p: int
    q: int
    r: int
    D: int

    kind = "surd"

    def __repr__(self) -> str:
        return f"QuadSurd(({self.p}{self.q:+d}*sqrt({self.D}))/{self.r})"

    def conjugate(self) -> "QuadSurd":
        return QuadSurd(self.p, -self.q, self.r, self.D)

    def sign(self) -> int:
        return _surd_sign(self.p, self.q, self.D)

    def bounds(self) -> Tuple[Fraction, Fraction]:
        interval = self.to_interval(PREC_START_BITS)
        return interval.lo, interval.hi

    def to_interval(self, prec: int) -> "Interval":
        k = prec + GUARD_BITS
        radicand = self.q * self.q * self.D
        root = math.isqrt(radicand << (2 * k))
        scale = 1 << k
        # sqrt(q^2 D) lies in [root/scale, (root+1)/scale]
        low_root = Fraction(root, scale)
        high_root = Fraction(root + 1, scale)
        if self.q > 0:
            lo, hi = self.p + low_root, self.p + high_root
        else:
            lo, hi = self.p - high_root, self.p - low_root
        return Interval.build(lo / self.r, hi / self.r, prec)

    def to_json(self) -> dict:
        return {"kind": "surd", "p": str(self.p), "q": str(self.q), "r": str(self.r), "D": str(self.D)}


@dataclass(frozen=True)
class Interval(Real):
    """A closed interval [lo, hi] with dyadic endpoints and a working precision."""

    lo: Fraction
    hi: Fraction
    prec: int

    kind = "interval"

    def __repr__(self) -> str:
        return f"Interval([{float(self.lo)!r}, {float(self.hi)!r}], prec={self.prec})"

    @classmethod
    def build(cls, lo: Fraction, hi: Fraction, prec: int) -> "Interval":
        """Round ``lo`` down and ``hi`` up to ``prec`` significant bits."""
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        return cls(_round_dyadic(Fraction(lo), prec, up=False), _round_dyadic(Fraction(hi), prec, up=True), prec)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, value: Fraction) -> bool:
        return self.lo <= value <= self.hi

    def sign(self) -> int:
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        raise InsufficientPrecisionError(
            f"sign of interval [{float(self.lo)}, {float(self.hi)}] is not certified at {self.prec} bits"
        )

    def bounds(self) -> Tuple[Fraction, Fraction]:
        return self.lo, self.hi

    def to_interval(self, prec: int) -> "Interval":
        if prec >= self.prec:
            return self
        return Interval.build(self.lo, self.hi, prec)

    def to_json(self) -> dict:
        return {
            "kind": "interval",
            "lo": str(self.lo),
            "hi": str(self.hi),
            "prec": self.prec,
        }


def as_real(value: Number) -> Real:
    """Wrap integers and fractions as ``Rational``; pass ``Real`` through.

    Any ``numbers.Rational`` is accepted, gmpy2 mpz values included; they are
    stored with plain int numerator and denominator.
    """
    if isinstance(value, Real):
        return value
    if isinstance(value, numbers.Rational):
        return Rational(Fraction(int(value.numerator), int(value.denominator)))
    raise TypeError(f"cannot interpret {value!r} as a real scalar")


@lru_cache(maxsize=4096)
def _split_radicand(D: int) -> Tuple[int, int]:
    """Return (f, D0) with D = f^2 * D0 and D0 square-free."""
    squarefree = int(core(D))
    return math.isqrt(D // squarefree), squarefree


def make_surd(p: int, q: int, r: int, D: int) -> Real:
    """Normalize (p + q*sqrt(D))/r into a ``QuadSurd`` or ``Rational``.

    Raises:
        DomainError: If D is negative.
        DivisionByZeroError: If r is zero.
    """
    if D < 0:
        raise DomainError(f"negative radicand {D}")
    if r == 0:
        raise DivisionByZeroError("surd with zero denominator")
    if q == 0 or D == 0:
        return Rational(Fraction(p, r))
    f, D0 = _split_radicand(D)
    q *= f
    if D0 == 1:
        return Rational(Fraction(p + q, r))
    if r < 0:
        p, q, r = -p, -q, -r
    g = math.gcd(math.gcd(p, q), r)
    return QuadSurd(p // g, q // g, r // g, D0)


def _surd_sign(p: int, q: int, D: int) -> int:
    """Exact sign of p + q*sqrt(D) for non-square D."""
    if q == 0:
        return (p > 0) - (p < 0)
    if p >= 0 and q > 0:
        return 1
    if p <= 0 and q < 0:
        return -1
    # opposite signs: compare p^2 with q^2 D
    if p * p > q * q * D:
        return 1 if p > 0 else -1
    return 1 if q > 0 else -1


def _round_dyadic(value: Fraction, prec: int, up: bool) -> Fraction:
    if value == 0:
        return value
    exponent = value.numerator.bit_length() - value.denominator.bit_length()
    shift = prec - exponent
    scaled = value * (1 << shift) if shift >= 0 else value / (1 << -shift)
    mantissa = math.ceil(scaled) if up else math.floor(scaled)
    if shift >= 0:
        return Fraction(mantissa, 1 << shift)
    return Fraction(mantissa << -shift)


def _surd_parts(x: Real, D: int) -> Tuple[int, int, int]:
    if isinstance(x, QuadSurd):
        return x.p, x.q, x.r
    return x.numerator, 0, x.denominator


def _interval_op(a: Interval, b: Optional[Interval], op: str) -> Interval:
    prec = a.prec if b is None else min(a.prec, b.prec)
    if op == "negate":
        return Interval(-a.hi, -a.lo, a.prec)
    if op == "+":
        return Interval.build(a.lo + b.lo, a.hi + b.hi, prec)
    if op == "-":
        return Interval.build(a.lo - b.hi, a.hi - b.lo, prec)
    if op == "*":
        products = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
        return Interval.build(min(products), max(products), prec)
    if op == "reciprocal":
        if a.lo == 0 and a.hi == 0:
            raise DivisionByZeroError("reciprocal of zero")
        if a.lo <= 0 <= a.hi:
            raise InsufficientPrecisionError(
                f"divisor interval [{float(a.lo)}, {float(a.hi)}] contains zero at {a.prec} bits"
            )
        smallest = min(abs(a.lo), abs(a.hi))
        if a.width > smallest / (1 << MIN_USEFUL_BITS):
            raise PrecisionLossError(
                f"divisor carries fewer than {MIN_USEFUL_BITS} correct bits at {a.prec} bits"
            )
        return Interval.build(1 / a.hi, 1 / a.lo, a.prec)
    if op == "/":
        return _interval_op(a, _interval_op(b, None, "reciprocal"), "*")
    raise ValueError(f"unknown operation {op!r}")


def _surd_op(a: Real, b: Optional[Real], op: str) -> Real:
    D = a.D if isinstance(a, QuadSurd) else b.D
    p1, q1, r1 = _surd_parts(a, D)
    if op == "negate":
        return make_surd(-p1, -q1, r1, D)
    if op == "reciprocal":
        norm = p1 * p1 - q1 * q1 * D
        if norm == 0:
            raise DivisionByZeroError("reciprocal of zero")
        return make_surd(r1 * p1, -r1 * q1, norm, D)
    p2, q2, r2 = _surd_parts(b, D)
    if op == "+":
        return make_surd(p1 * r2 + p2 * r1, q1 * r2 + q2 * r1, r1 * r2, D)
    if op == "-":
        return make_surd(p1 * r2 - p2 * r1, q1 * r2 - q2 * r1, r1 * r2, D)
    if op == "*":
        return make_surd(p1 * p2 + q1 * q2 * D, p1 * q2 + p2 * q1, r1 * r2, D)
    if op == "/":
        if isinstance(b, QuadSurd):
            return _surd_op(a, _surd_op(b, None, "reciprocal"), "*")
        if b.value == 0:
            raise DivisionByZeroError(f"{a!r} / 0")
        return _surd_op(a, Rational(1 / b.value), "*")
    raise ValueError(f"unknown operation {op!r}")


def real_arith(a: Real, b: Optional[Real], op: str) -> Real:
    """Apply ``op`` to ``a`` (and ``b`` for binary operations).

    Exact operands give exact results; any interval operand makes the result an
    interval with outward rounding. Surds with different radicands are compared
    on intervals at the default precision.

    Raises:
        DivisionByZeroError: Division by an exact zero.
        InsufficientPrecisionError: Division by an interval that contains zero.
        PrecisionLossError: Division by an interval that is too wide to be useful.
    """
    if op not in ARITH_OPS:
        raise ValueError(f"unknown operation {op!r}")
    unary = op in ("negate", "reciprocal")
    if not unary and b is None:
        raise ValueError(f"operation {op!r} needs two operands")

    if isinstance(a, Interval) or isinstance(b, Interval):
        prec = min(x.prec for x in (a, b) if isinstance(x, Interval))
        return _interval_op(a.to_interval(prec), None if unary else b.to_interval(prec), op)

    if isinstance(a, Rational) and (unary or isinstance(b, Rational)):
        if op == "negate":
            return Rational(-a.value)
        if op == "reciprocal":
            if a.value == 0:
                raise DivisionByZeroError("reciprocal of zero")
            return Rational(1 / a.value)
        if op == "/" and b.value == 0:
            raise DivisionByZeroError(f"{a.value} / 0")
        if op == "+":
            return Rational(a.value + b.value)
        if op == "-":
            return Rational(a.value - b.value)
        if op == "*":
            return Rational(a.value * b.value)
        return Rational(a.value / b.value)

    if isinstance(a, QuadSurd) and isinstance(b, QuadSurd) and a.D != b.D:
        logger.debug(f"mixing radicands {a.D} and {b.D}; promoting to intervals")
        return _interval_op(a.to_interval(PREC_START_BITS), b.to_interval(PREC_START_BITS), op)

    if op == "/" and isinstance(b, Rational) and b.value == 0:
        raise DivisionByZeroError("division by zero")
    return _surd_op(a, b, op)


def compare(a: Real, b: Real) -> int:
    """Certified sign of a - b."""
    return (a - b).sign()


def integer_part(x: Real, mode: str = "floor") -> int:
    """Exact floor or ceiling of ``x``.

    Args:
        x: The value to round
        mode: 'floor' or 'ceil'

    Returns:
        int: The integer part

    Raises:
        InsufficientPrecisionError: If ``x`` is an interval straddling an integer
    """
    if mode not in ("floor", "ceil"):
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(x, Rational):
        return int(math.floor(x.value) if mode == "floor" else math.ceil(x.value))
    if isinstance(x, QuadSurd):
        floor_value = _surd_floor(x)
        # an irrational surd is never an integer
        return floor_value if mode == "floor" else floor_value + 1
    rounder = math.floor if mode == "floor" else math.ceil
    low, high = rounder(x.lo), rounder(x.hi)
    if low != high:
        raise InsufficientPrecisionError(
            f"{mode} of [{float(x.lo)}, {float(x.hi)}] is not certified at {x.prec} bits"
        )
    return int(low)


def _surd_floor(x: QuadSurd) -> int:
    root = math.isqrt(x.q * x.q * x.D)
    # sqrt(q^2 D) lies strictly between root and root + 1
    if x.q > 0:
        return (x.p + root) // x.r
    return (x.p - root - 1) // x.r


def conjugate(x: Real) -> Real:
    """Galois conjugate of a surd; rationals are their own conjugate."""
    if isinstance(x, QuadSurd):
        return x.conjugate()
    if isinstance(x, Rational):
        return x
    raise TypeError("intervals have no conjugate")


def mobius(x: Optional[Real], r: int, s: int, t: int, u: int) -> Optional[Real]:
    """Evaluate (r*x + s)/(t*x + u); ``None`` stands for infinity on both sides.

    Intervals are mapped through their endpoints, which is exact for a Möbius
    map without a pole inside the interval.

    Raises:
        InsufficientPrecisionError: If the pole -u/t cannot be excluded from the interval.
    """
    if x is None:
        if t == 0:
            return None
        return Rational(Fraction(r, t))
    if isinstance(x, Interval):
        if t != 0:
            pole = Fraction(-u, t)
            if x.lo <= pole <= x.hi:
                raise InsufficientPrecisionError("interval contains the pole of the Möbius map")
        images = [Fraction(r * e + s) / (t * e + u) for e in (x.lo, x.hi)]
        return Interval.build(min(images), max(images), x.prec)
    denominator = t * x + u
    if denominator.sign() == 0:
        return None
    return (r * x + s) / denominator


def format_fixed(value: Fraction, places: int) -> str:
    """Round ``value`` to ``places`` decimals without going through floats."""
    scaled = round(value * 10 ** places)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    if places == 0:
        return f"{sign}{digits}"
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def format_scientific(value: Fraction, digits: int) -> str:
    """Decimal literal with ``digits`` significant digits (mpmath rendering)."""
    bits = int(digits * 3.33) + 16
    mpf_value = libmp.from_rational(value.numerator, value.denominator, bits, libmp.round_nearest)
    return libmp.to_str(mpf_value, digits)


def _to_fraction(value: tuple) -> Fraction:
    # mpmath returns mpz parts on its gmpy backend
    numerator, denominator = libmp.to_rational(value)
    return Fraction(int(numerator), int(denominator))


def _constant_interval(name: str, prec: int) -> Interval:
    work = prec + GUARD_BITS
    source = {"pi": libmp.mpf_pi, "e": libmp.mpf_e}[name]
    lo = _to_fraction(source(work, libmp.round_floor))
    hi = _to_fraction(source(work, libmp.round_ceiling))
    return Interval.build(lo, hi, prec)


_CONSTANT = re.compile(r"^(?P<sign>[+-]?)(?P<inverse>1/)?(?P<name>pi|e)$")
_INTEGER_OR_FRACTION = re.compile(r"^[+-]?\d+(/\d+)?$")
_DECIMAL = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")
_SURD = re.compile(
    r"^(?P<sign>[+-]?)(?P<open>\()?"
    r"(?:(?P<p>[+-]?\d+)(?=[+-]))?"
    r"(?P<op>[+-]?)(?:(?P<q>\d+)\*?)?"
    r"sqrt\((?P<D>[+-]?\d+)\)"
    r"(?P<close>\))?(?:/(?P<r>\d+))?$"
)


def parse_real(text: str, prec: int = PREC_START_BITS) -> Real:
    """Parse a real-number expression.

    Accepted forms (whitespace ignored, optional leading sign)::

        integer | a/b | decimal | (a±b*sqrt(D))/c | pi | 1/pi | e | 1/e

    Args:
        text: The expression
        prec: Working precision in bits for transcendental constants

    Returns:
        Real: A ``Rational`` or ``QuadSurd`` for exact input, an ``Interval`` for pi and e

    Raises:
        ExpressionSyntaxError: If the text does not match the grammar
        DomainError: If a radicand is a perfect square or non-positive
    """
    compact = re.sub(r"\s+", "", text or "").lower()
    if not compact:
        raise ExpressionSyntaxError("empty expression")

    match = _CONSTANT.match(compact)
    if match:
        value: Real = _constant_interval(match.group("name"), prec)
        if match.group("inverse"):
            value = value.reciprocal()
        return -value if match.group("sign") == "-" else value

    if _INTEGER_OR_FRACTION.match(compact) or _DECIMAL.match(compact):
        try:
            return Rational(Fraction(compact))
        except ZeroDivisionError:
            raise DivisionByZeroError(f"zero denominator in {text!r}")

    match = _SURD.match(compact)
    if match and bool(match.group("open")) == bool(match.group("close")):
        if match.group("r") and not match.group("open") and match.group("p"):
            raise ExpressionSyntaxError(f"ambiguous expression {text!r}; parenthesize the numerator")
        D = int(match.group("D"))
        if D <= 0:
            raise DomainError(f"non-positive radicand in {text!r}")
        if math.isqrt(D) ** 2 == D:
            raise DomainError(f"sqrt({D}) is rational; supply {math.isqrt(D)} instead")
        p = int(match.group("p") or 0)
        q = int(match.group("q") or 1)
        if match.group("op") == "-":
            q = -q
        r = int(match.group("r") or 1)
        if r == 0:
            raise DivisionByZeroError(f"zero denominator in {text!r}")
        value = make_surd(p, q, r, D)
        return -value if match.group("sign") == "-" else value

    raise ExpressionSyntaxError(f"cannot parse real expression {text!r}")


def real_from_json(data: dict) -> Real:
    """Inverse of ``Real.to_json``."""
    kind = data.get("kind")
    if kind == "rational":
        return Rational(Fraction(int(data["num"]), int(data["den"])))
    if kind == "surd":
        return make_surd(int(data["p"]), int(data["q"]), int(data["r"]), int(data["D"]))
    if kind == "interval":
        prec = int(data["prec"])
        return Interval.build(Fraction(data["lo"]), Fraction(data["hi"]), prec)
    raise ExpressionSyntaxError(f"unknown real kind {kind!r}")


def upper_bound(x: Real) -> Fraction:
    """A rational upper bound for ``x``."""
    return x.bounds()[1]


def magnitude_bound(x: Real) -> Fraction:
    """A rational upper bound for ``|x|``."""
    lo, hi = x.bounds()
    return max(abs(lo), abs(hi))


class ExpressionSyntaxError(ValueError):
    """Raised when a real-number expression is malformed."""
    pass


class DomainError(ValueError):
    """Raised when an expression is well formed but names an invalid value."""
    pass


class DivisionByZeroError(ZeroDivisionError):
    """Raised on division by an exact zero."""
    pass


class InsufficientPrecisionError(ArithmeticError):
    """Raised when a floor, ceiling or sign cannot be certified at the working precision."""
    pass


class PrecisionLossError(InsufficientPrecisionError):
    """Raised when an interval became too wide to carry the computation further."""
    pass
