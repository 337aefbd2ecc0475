"""Period polynomials, the cocycle relations and Dirichlet L-values at negative integers."""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import sympy
from sympy.functions.combinatorial.numbers import bernoulli, divisor_sigma, kronecker_symbol, mobius
from sympy.ntheory import divisors
from sympy.ntheory.factor_ import core

from .cfrac import EPSILON, S, SIGMA, U, Mat2, t_power
from .config import DEFAULT_DEPTH_CAP, DEFAULT_TOLERANCE
from .modsums import AuditReport, p_gamma_sum
from .qforms import (
    FormClass,
    FormKind,
    Group,
    IntPoly,
    enumerate_forms,
    negate_class,
    power_sum_polynomial,
    slash,
)
from .realscalar import Rational, Real, as_real, magnitude_bound, parse_real

logger = logging.getLogger(__name__)


class Scope(str, Enum):
    GAMMA_CLASS = "gamma_class"
    DISCRIMINANT = "discriminant"
    GAMMA1_CLASS = "gamma1_class"


@dataclass(frozen=True)
class PeriodPoly:
    """P_{k,A}, P_{k,D} or the symmetrized P_{k,B}, of degree at most 2k - 2."""

    poly: IntPoly
    k: int
    scope: Scope
    D: int

    @property
    def weight(self) -> int:
        return 2 * self.k

    @property
    def degree_bound(self) -> int:
        return 2 * self.k - 2

    @property
    def is_even(self) -> bool:
        return even_odd_split(self.poly)[1].is_zero

    def to_json(self) -> Dict[str, Any]:
        return {
            "D": self.D,
            "k": self.k,
            "scope": self.scope.value,
            "coefficients": [str(c.numerator) if c.denominator == 1 else str(c) for c in self.poly.coeffs],
        }


def period_polynomial(k: int, D: Optional[int] = None, form_class: Optional[FormClass] = None) -> PeriodPoly:
    """Sum of Q(X)^(k-1) over the simple forms of a discriminant or class.

    For a Gamma_1-class B the result is P_{k,B} = P over B + (-1)^k P over -B.

    Raises:
        OddWeightForGammaScopeError: For odd k with a discriminant or Gamma-class.
        SquareDiscriminantError: If D is a perfect square.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if (D is None) == (form_class is None):
        raise ValueError("give exactly one of D and form_class")

    if form_class is None:
        if k % 2:
            raise OddWeightForGammaScopeError(f"P_(k,D) needs an even k, got {k}")
        poly = power_sum_polynomial(enumerate_forms(D, FormKind.SIMPLE), k)
        return PeriodPoly(poly, k, Scope.DISCRIMINANT, D)

    if form_class.group is Group.GAMMA:
        if k % 2:
            raise OddWeightForGammaScopeError(f"P_(k,A) needs an even k, got {k}")
        poly = power_sum_polynomial(form_class.simple_forms, k)
        return PeriodPoly(poly, k, Scope.GAMMA_CLASS, form_class.D)

    opposite = negate_class(form_class)
    poly = power_sum_polynomial(form_class.simple_forms, k)
    other = power_sum_polynomial(opposite.simple_forms, k)
    poly = poly - other if k % 2 else poly + other
    return PeriodPoly(poly, k, Scope.GAMMA1_CLASS, form_class.D)


@dataclass(frozen=True)
class CocycleResult:
    passed: bool
    residual_s: IntPoly
    residual_u: IntPoly

    def to_json(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "residual_1_plus_S": self.residual_s.to_json(),
            "residual_1_plus_U_plus_U2": self.residual_u.to_json(),
        }


def cocycle_check(P: IntPoly, d: int) -> CocycleResult:
    """Exact residuals of P|(1 + S) and P|(1 + U + U^2) under the weight-d slash action."""
    residual_s = P + slash(P, S, d)
    residual_u = P + slash(P, U, d) + slash(P, U @ U, d)
    passed = residual_s.is_zero and residual_u.is_zero
    if not passed:
        logger.debug(f"cocycle residuals for {P!r}: {residual_s!r}, {residual_u!r}")
    return CocycleResult(passed, residual_s, residual_u)


def even_odd_split(P: IntPoly) -> Tuple[IntPoly, IntPoly]:
    even = IntPoly(tuple(c if i % 2 == 0 else Fraction(0) for i, c in enumerate(P.coeffs)))
    odd = IntPoly(tuple(c if i % 2 else Fraction(0) for i, c in enumerate(P.coeffs)))
    return even, odd


def reduce_mod_generator(P: IntPoly, k: int) -> IntPoly:
    """Representative of P modulo the line spanned by X^(2k-2) - 1, with no X^(2k-2) term."""
    d = 2 * k - 2
    lead = P.coefficient(d)
    return P - IntPoly.monomial(d, lead) + IntPoly.from_coeffs([lead])


def _validate_discriminant(D: int) -> None:
    if D <= 0 or D % 4 not in (0, 1) or math.isqrt(D) ** 2 == D:
        raise InvalidDiscriminantError(f"{D} is not a positive non-square discriminant (0 or 1 mod 4)")


@lru_cache(maxsize=1024)
def fundamental_part(D: int) -> Tuple[int, int]:
    """(D0, f) with D = D0 * f^2 and D0 a fundamental discriminant."""
    _validate_discriminant(D)
    squarefree = int(core(D))
    D0 = squarefree if squarefree % 4 == 1 else 4 * squarefree
    return D0, math.isqrt(D // D0)


def kronecker_chi(D: int, n: int) -> int:
    """The Kronecker symbol (D/n).

    Raises:
        InvalidDiscriminantError: Unless D is a positive non-square congruent to 0 or 1 mod 4.
    """
    _validate_discriminant(D)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return int(kronecker_symbol(D, n))


@lru_cache(maxsize=1024)
def _primitive_l_value(D0: int, n: int) -> Fraction:
    # L(1-n, chi) = -B_{n,chi}/n,  B_{n,chi} = D0^(n-1) * sum chi(r) B_n(r/D0)
    total = sympy.Rational(0)
    for r in range(1, D0 + 1):
        chi = kronecker_chi(D0, r)
        if chi:
            total += chi * bernoulli(n, sympy.Rational(r, D0))
    generalized = sympy.Integer(D0) ** (n - 1) * total
    value = -generalized / n
    return Fraction(int(value.p), int(value.q))


def l_value(D: int, s: int) -> Rational:
    """L_D(s) at s = 1 - n for even n >= 2.

    For a fundamental discriminant this is L(1 - n, chi_D). For D = D0 f^2 the
    value carries the factor sum over d | f of mu(d) chi_D0(d) d^(n-1) sigma_(2n-1)(f/d),
    which is the normalization under which -5 L_D(-1) counts the leading
    coefficients of the simple forms of discriminant D.

    Raises:
        InvalidDiscriminantError: For an invalid discriminant.
    """
    n = 1 - s
    if n < 2 or n % 2:
        raise ValueError(f"s must be 1 - n with n >= 2 even, got s = {s}")
    D0, f = fundamental_part(D)
    factor = 0
    for d in divisors(f):
        factor += (int(mobius(d)) * kronecker_chi(D0, d) * d ** (n - 1)
                   * int(divisor_sigma(f // d, 2 * n - 1)))
    return Rational(_primitive_l_value(D0, n) * factor)


def simple_a_sum(D: int) -> int:
    """Sum of the leading coefficients a over the simple forms of discriminant D."""
    return sum(Q.a for Q in enumerate_forms(D, FormKind.SIMPLE))


DEFAULT_SAMPLES = ("1/pi", "1/e", "(1+sqrt(5))/2", "sqrt(2)", "7/3", "1/3", "2/5", "-1/pi", "pi", "e")


def default_samples(prec: Optional[int] = None) -> List[Real]:
    if prec is None:
        return [parse_real(text) for text in DEFAULT_SAMPLES]
    return [parse_real(text, prec) for text in DEFAULT_SAMPLES]


class _Evaluator:
    """Caches P^Gamma at the points an audit visits.

    ``factor`` is the size of the multiplier the value will be scaled by, so that
    every scaled value still carries a tail of at most ``tolerance``.
    """

    def __init__(self, P: IntPoly, d: int, tolerance: Fraction, depth_cap: int):
        self.P, self.d = P, d
        self.tolerance, self.depth_cap = tolerance, depth_cap
        self._cache: Dict[Tuple[Real, Fraction], Real] = {}

    def __call__(self, x: Real, factor: Fraction = Fraction(1)) -> Real:
        tolerance = self.tolerance / max(Fraction(1), factor)
        key = (x, tolerance)
        if key not in self._cache:
            self._cache[key] = p_gamma_sum(self.P, x, Group.GAMMA, self.d, tolerance, self.depth_cap).value
        return self._cache[key]


def _slash_at(P: IntPoly, g: Mat2, d: int, x: Real) -> Real:
    return slash(P, g, d)(x)


def _residual_ok(residual: Real, tolerance: Fraction) -> bool:
    if residual.is_exact:
        return residual.sign() == 0
    return magnitude_bound(residual) <= tolerance


def transformation_law_audit(P: IntPoly, samples: Optional[Sequence[Union[Real, str]]] = None, d: Optional[int] = None,
                   tolerance: Fraction = DEFAULT_TOLERANCE, depth_cap: int = DEFAULT_DEPTH_CAP) -> AuditReport:
    """Check the transformation laws of P^Gamma at sample points.

    * periodicity: P^Gamma(x) - P^Gamma(x + 1) = 0;
    * reflection (x not in Z/2): P^Gamma(x) - P^Gamma(-x) equals the piecewise expression in
      P1 = P|(1 + eps) and P2 = P|(1 + U - S U^2) eps;
    * inversion (x > 0, x != 1): P^Gamma(x) - x^d P^Gamma(1/x) = [0 < x < 1] P1(x) - P(x).

    When P lies in W+ (even, P|(1 + S) = 0 and P|(1 + U + U^2) = 0) it also checks
    that P^Gamma is even and that P^Gamma(x) - x^d P^Gamma(-1/x) = -P(x).

    Raises:
        InsufficientPrecisionError: When a sample is too coarse to place in its case.
    """
    d = max(2, P.degree + P.degree % 2) if d is None else d
    tolerance = Fraction(tolerance)
    points = [parse_real(s) if isinstance(s, str) else as_real(s) for s in (samples or DEFAULT_SAMPLES)]
    evaluate = _Evaluator(P, d, tolerance / 8, depth_cap)

    P1 = P + slash(P, EPSILON, d)
    P2 = slash(P + slash(P, U, d) - slash(P, S @ U @ U, d), EPSILON, d)
    cocycle = cocycle_check(P, d)
    in_w_plus = cocycle.passed and even_odd_split(P)[1].is_zero

    residuals: Dict[str, List[str]] = {}
    checked = 0
    failure = None

    def record(identity: str, x: Real, residual: Real) -> None:
        nonlocal checked, failure
        checked += 1
        residuals.setdefault(identity, []).append(residual.to_scientific(4))
        if failure is None and not _residual_ok(residual, tolerance):
            failure = {"identity": identity, "x": x.to_decimal(12), "residual": residual.to_scientific(6)}

    for x in points:
        value = evaluate(x)
        record("periodicity", x, value - evaluate(x + 1))

        n0 = x.floor()
        # at half-integers the regular expansion of -x ends in 2 rather than 1, 1
        # and the piecewise formula no longer matches the finite sum
        if not (isinstance(x, Rational) and (2 * x.value).denominator == 1):
            reflected = value - evaluate(-x)
            if x - n0 <= Fraction(1, 2):
                expected = (-_slash_at(P1, t_power(n0 + 1) @ SIGMA, d, x)
                            + _slash_at(P2, t_power(-n0), d, x))
            else:
                expected = (_slash_at(P1, t_power(-n0), d, x)
                            - _slash_at(P2, t_power(n0 + 1) @ SIGMA, d, x))
            record("reflection", x, reflected - expected)

        if x > 0 and not (isinstance(x, Rational) and x.value == 1):
            scale = x ** d
            inverted = value - scale * evaluate(x.reciprocal(), magnitude_bound(scale))
            expected = (P1(x) if x < 1 else Rational(0)) - P(x)
            record("inversion", x, inverted - expected)

        if in_w_plus:
            record("evenness", x, value - evaluate(-x))
            if x.sign() != 0:
                scale = x ** d
                record("one_minus_S", x, value - scale * evaluate(-x.reciprocal(), magnitude_bound(scale)) + P(x))

    name = f"transformation laws of P^Gamma for {P!r}"
    report = AuditReport(name, failure is None, checked, failure,
                         {"in_w_plus": in_w_plus, "residuals": residuals, "weight": d})
    if not report.passed:
        logger.warning(f"{name} failed: {failure}")
    return report


class OddWeightForGammaScopeError(ValueError):
    """Raised when an odd k is used with a discriminant or Gamma-class period polynomial."""
    pass


class InvalidDiscriminantError(ValueError):
    """Raised when a character is requested for an invalid discriminant."""
    pass
