"""Binary quadratic forms, even-degree polynomials and their reduction theory."""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import sympy
from sympy.ntheory import divisors

from .cfrac import (
    IDENTITY,
    S,
    SIGMA,
    T,
    T_INV,
    Mat2,
    branch_matrix,
    iter_minus_cf,
    slow_simple,
    t_power,
)
from .realscalar import Interval, Rational, Real, as_real, make_surd

logger = logging.getLogger(__name__)

X = sympy.Symbol("X")

# Generous step allowance for cycle closure; cycles are bounded by the form count.
CYCLE_STEP_FACTOR = 8


class FormKind(str, Enum):
    SIMPLE = "simple"
    REDUCED = "reduced"


class Group(str, Enum):
    GAMMA = "Gamma"
    GAMMA1 = "Gamma1"


@dataclass(frozen=True, order=True)
class QForm:
    """The binary quadratic form a*X^2 + b*X*Y + c*Y^2."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a == 0 and self.b == 0 and self.c == 0:
            raise ValueError("the zero form is not a quadratic form")

    def __repr__(self) -> str:
        return f"[{self.a},{self.b},{self.c}]"

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_simple(self) -> bool:
        return self.a > 0 > self.c

    @property
    def is_reduced(self) -> bool:
        return self.a > 0 and self.c > 0 and self.b > self.a + self.c

    @property
    def is_primitive(self) -> bool:
        return math.gcd(math.gcd(self.a, self.b), self.c) == 1

    def __call__(self, x: Union[Real, int, Fraction]) -> Real:
        x = as_real(x)
        return (self.a * x + self.b) * x + self.c

    def at(self, x: Fraction) -> Fraction:
        """Value at a rational point."""
        return (self.a * x + self.b) * x + self.c

    def sign_at(self, point: Optional[Fraction]) -> int:
        """Sign of Q at a rational point, ``None`` meaning infinity (sign of a)."""
        value = self.a if point is None else self.at(point)
        return (value > 0) - (value < 0)

    def homogeneous(self, u: Real, v: Real) -> Real:
        """a*u^2 + b*u*v + c*v^2."""
        return (self.a * u + self.b * v) * u + self.c * v * v

    def negate(self) -> "QForm":
        return QForm(-self.a, -self.b, -self.c)

    def sigma_conjugate(self) -> "QForm":
        """Q(-X, Y) = [a, -b, c]."""
        return QForm(self.a, -self.b, self.c)

    def coefficient_norm(self) -> int:
        return abs(self.a) + abs(self.b) + abs(self.c)

    def to_poly(self) -> "IntPoly":
        return IntPoly.from_coeffs([self.c, self.b, self.a])

    def to_list(self) -> List[int]:
        return [self.a, self.b, self.c]


@dataclass(frozen=True)
class IntPoly:
    """A polynomial with rational coefficients, stored lowest degree first."""

    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        values = [Fraction(c) for c in self.coeffs]
        while values and values[-1] == 0:
            values.pop()
        object.__setattr__(self, "coeffs", tuple(values))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable) -> "IntPoly":
        return cls(tuple(Fraction(c) for c in coeffs))

    @classmethod
    def monomial(cls, degree: int, coefficient=1) -> "IntPoly":
        return cls.from_coeffs([0] * degree + [coefficient])

    @classmethod
    def from_sympy(cls, poly: sympy.Poly) -> "IntPoly":
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
        return cls(tuple(coeffs))

    def __repr__(self) -> str:
        return f"IntPoly({self.to_sympy().as_expr()})"

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def coefficient(self, degree: int) -> Fraction:
        if 0 <= degree < len(self.coeffs):
            return self.coeffs[degree]
        return Fraction(0)

    def to_sympy(self) -> sympy.Poly:
        terms = [sympy.Rational(c.numerator, c.denominator) for c in reversed(self.coeffs)] or [0]
        return sympy.Poly(terms, X, domain=sympy.QQ)

    def __add__(self, other: "IntPoly") -> "IntPoly":
        size = max(len(self.coeffs), len(other.coeffs))
        return IntPoly(tuple(self.coefficient(i) + other.coefficient(i) for i in range(size)))

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + (-other)

    def __neg__(self) -> "IntPoly":
        return IntPoly(tuple(-c for c in self.coeffs))

    def __mul__(self, other: Union["IntPoly", int, Fraction]) -> "IntPoly":
        if isinstance(other, IntPoly):
            return IntPoly.from_sympy(self.to_sympy() * other.to_sympy())
        return IntPoly(tuple(c * other for c in self.coeffs))

    __rmul__ = __mul__

    def __call__(self, x: Union[Real, int, Fraction]) -> Real:
        x = as_real(x)
        result: Real = Rational(0)
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def at(self, x: Fraction) -> Fraction:
        result = Fraction(0)
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def sign_at(self, point: Optional[Fraction], d: int) -> int:
        """Sign at a rational point; at infinity the X^d coefficient decides."""
        value = self.coefficient(d) if point is None else self.at(point)
        return (value > 0) - (value < 0)

    def homogeneous(self, u: Real, v: Real, d: int) -> Real:
        """sum_j c_j u^j v^(d-j), the degree-d homogenization at (u, v)."""
        result: Real = Rational(0)
        for j in range(d, -1, -1):
            result = result * u + self.coefficient(j) * v ** (d - j)
        return result

    def coefficient_norm(self) -> Fraction:
        return sum((abs(c) for c in self.coeffs), Fraction(0))

    def to_json(self) -> List[str]:
        return [str(c) for c in self.coeffs]


def act(Q: QForm, g: Mat2) -> QForm:
    """Right action (Q|g)(X, Y) = Q(rX + sY, tX + uY)."""
    r, s, t, u = g.r, g.s, g.t, g.u
    return QForm(
        Q.a * r * r + Q.b * r * t + Q.c * t * t,
        2 * Q.a * r * s + Q.b * (r * u + s * t) + 2 * Q.c * t * u,
        Q.a * s * s + Q.b * s * u + Q.c * u * u,
    )


def slash(P: IntPoly, g: Mat2, d: int) -> IntPoly:
    """(P|g)(X) = (tX + u)^d * P((rX + s)/(tX + u)).

    Raises:
        WrongDegreeError: If deg P exceeds d.
    """
    if P.degree > d:
        raise WrongDegreeError(f"degree {P.degree} exceeds slash weight {d}")
    numerator = sympy.Poly(g.r * X + g.s, X, domain=sympy.QQ)
    denominator = sympy.Poly(g.t * X + g.u, X, domain=sympy.QQ)
    total = sympy.Poly(0, X, domain=sympy.QQ)
    for j, c in enumerate(P.coeffs):
        if c:
            total += sympy.Rational(c.numerator, c.denominator) * numerator ** j * denominator ** (d - j)
    return IntPoly.from_sympy(total)


def power_sum_polynomial(forms: Iterable[QForm], k: int) -> IntPoly:
    """sum over forms of Q(X, 1)^(k-1)."""
    total = sympy.Poly(0, X, domain=sympy.QQ)
    for Q in forms:
        total += sympy.Poly(Q.a * X ** 2 + Q.b * X + Q.c, X, domain=sympy.QQ) ** (k - 1)
    return IntPoly.from_sympy(total)


@dataclass(frozen=True)
class RootData:
    """The two labelled real roots: sign(P(inf))*w < sign(P(inf))*w_prime."""

    w: Real
    w_prime: Real
    certificate: str


def check_discriminant(D: int) -> None:
    """Raise unless D is a positive non-square."""
    if D <= 0:
        raise NonPositiveDiscriminantError(f"discriminant {D} is not positive")
    if math.isqrt(D) ** 2 == D:
        raise SquareDiscriminantError(f"discriminant {D} is a perfect square")


def in_Fd(P: IntPoly, d: int) -> bool:
    """Degree exactly d, square-free, two real roots, none rational."""
    try:
        _certify_Fd(P, d)
    except NotInFdError:
        return False
    return True


def _certify_Fd(P: IntPoly, d: int) -> sympy.Poly:
    if P.degree != d or d % 2:
        raise NotInFdError(f"degree {P.degree} is not the even degree {d}")
    poly = P.to_sympy()
    if not poly.is_sqf:
        raise NotInFdError("polynomial has a repeated factor")
    real_roots = poly.count_roots()
    if real_roots != 2:
        raise NotInFdError(f"polynomial has {real_roots} real roots, not 2")
    _, factors = poly.factor_list()
    if any(factor.degree() == 1 for factor, _ in factors):
        raise NotInFdError("polynomial has a rational root")
    return poly


def root_data(P: Union[QForm, IntPoly], prec: int = 128) -> RootData:
    """The labelled roots w, w' of a form or of a polynomial in F_d.

    Quadratics give exact surds; higher even degrees give isolating intervals
    of width at most 2^-prec.

    Raises:
        SquareDiscriminantError: For a quadratic with square discriminant.
        NotInFdError: When there are not exactly two irrational real roots.
    """
    if isinstance(P, IntPoly) and P.degree == 2 and P.is_integral:
        P = QForm(int(P.coefficient(2)), int(P.coefficient(1)), int(P.coefficient(0)))

    if isinstance(P, QForm):
        if P.a == 0:
            raise NotInFdError(f"{P} has a root at infinity")
        D = P.disc
        if D <= 0:
            raise NotInFdError(f"{P} has no real roots")
        if math.isqrt(D) ** 2 == D:
            raise SquareDiscriminantError(f"{P} has square discriminant {D}")
        w = make_surd(-P.b, -1, 2 * P.a, D)
        w_prime = make_surd(-P.b, 1, 2 * P.a, D)
        return RootData(w, w_prime, f"quadratic formula, D={D}")

    d = P.degree
    poly = _certify_Fd(P, d)
    eps = sympy.Rational(1, 2 ** prec)
    isolated = poly.intervals(eps=eps)
    roots = [
        Interval.build(Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q)), prec)
        for (lo, hi), _ in isolated
    ]
    low, high = roots
    if P.coefficient(d) > 0:
        w, w_prime = low, high
    else:
        w, w_prime = high, low
    return RootData(w, w_prime, f"square-free, Sturm count 2, no linear factor, degree {d}")


def is_simple_by_roots(Q: QForm) -> bool:
    roots = root_data(Q)
    return Q.a > 0 and roots.w < 0 < roots.w_prime


def is_reduced_by_roots(Q: QForm) -> bool:
    roots = root_data(Q)
    return Q.a > 0 and roots.w < -1 and -1 < roots.w_prime < 0


@lru_cache(maxsize=1024)
def _enumerate(D: int, kind: FormKind) -> Tuple[QForm, ...]:
    forms = set()
    if kind is FormKind.SIMPLE:
        for product in range(1, D // 4 + 1):
            # ac = -product
            square = D - 4 * product
            b = math.isqrt(square)
            if b * b != square:
                continue
            for a in divisors(product):
                for sign in (1, -1):
                    forms.add(QForm(a, sign * b, -(product // a)))
    else:
        for b in range(1, (D + 1) // 2 + 1):
            excess = b * b - D
            if excess <= 0 or excess % 4:
                continue
            product = excess // 4
            for a in divisors(product):
                c = product // a
                if a + c < b:
                    forms.add(QForm(a, b, c))
    return tuple(sorted(forms))


def enumerate_forms(D: int, kind: Union[FormKind, str] = FormKind.SIMPLE) -> List[QForm]:
    """All simple (a > 0 > c) or reduced (a, c > 0, b > a + c) forms of discriminant D.

    Raises:
        NonPositiveDiscriminantError: If D <= 0.
        SquareDiscriminantError: If D is a perfect square.
    """
    check_discriminant(D)
    return list(_enumerate(D, FormKind(kind)))


def reduced_simple_bijection(Q: QForm, direction: str = "forward") -> QForm:
    """[a, b, c] -> [a, b - 2a, c - b + a] (forward) and its inverse.

    Raises:
        PreconditionViolatedError: If Q is not reduced (forward) or not simple
            with a + b + c > 0 (backward).
    """
    if direction == "forward":
        if not Q.is_reduced:
            raise PreconditionViolatedError(f"{Q} is not reduced")
        return act(Q, T_INV)
    if direction == "backward":
        if not (Q.is_simple and Q.a + Q.b + Q.c > 0):
            raise PreconditionViolatedError(f"{Q} is not simple with a+b+c > 0")
        return act(Q, T)
    raise ValueError(f"unknown direction {direction!r}")


def transport(Q: QForm, g: Mat2) -> QForm:
    """The form whose -w root is g(-w_Q): Q | sigma g^-1 sigma."""
    return act(Q, SIGMA @ g.inverse() @ SIGMA)


def _rotate_to_least(cycle: List[QForm]) -> Tuple[QForm, ...]:
    start = cycle.index(min(cycle))
    return tuple(cycle[start:] + cycle[:start])


def _cycle_limit(D: int) -> int:
    return CYCLE_STEP_FACTOR * (len(_enumerate(D, FormKind.SIMPLE)) + D) + 16


def simple_cycle(Q: QForm) -> Tuple[QForm, ...]:
    """The cycle of simple forms through Q, following the slow simple expansion of -w_Q."""
    if not Q.is_simple:
        raise PreconditionViolatedError(f"{Q} is not simple")
    x = -root_data(Q).w
    expansion = slow_simple(x, _cycle_limit(Q.disc))
    if not expansion.purely_periodic:
        raise ClassDecompositionError(f"slow simple expansion of -w_{Q} is not purely periodic")
    cycle = [Q]
    for step in expansion.steps[:expansion.cycle_length - 1]:
        cycle.append(transport(cycle[-1], branch_matrix(step.branch, simple=True)))
    return _rotate_to_least(cycle)


def minus_cf_cycle(x: Real, limit: int) -> Tuple[Optional[int], Optional[int], List[int]]:
    """(cycle_start, cycle_length, digits) of the negative expansion of an exact x."""
    seen: Dict[Real, int] = {}
    digit_list: List[int] = []
    for step in iter_minus_cf(x):
        if step.state is None or step.index > limit:
            return None, None, digit_list
        if step.state in seen:
            return seen[step.state], step.index - seen[step.state], digit_list
        seen[step.state] = step.index
        digit_list.append(step.digit)
    return None, None, digit_list


def reduced_cycle(Q: QForm) -> Tuple[QForm, ...]:
    """The cycle of reduced forms through Q, following the negative expansion of -w_Q."""
    if not Q.is_reduced:
        raise PreconditionViolatedError(f"{Q} is not reduced")
    x = -root_data(Q).w
    start, length, digit_list = minus_cf_cycle(x, _cycle_limit(Q.disc))
    if start != 0:
        raise ClassDecompositionError(f"negative expansion of -w_{Q} is not purely periodic")
    cycle = [Q]
    for digit in digit_list[:length - 1]:
        cycle.append(transport(cycle[-1], S @ t_power(-digit)))
    return _rotate_to_least(cycle)


@dataclass(frozen=True)
class FormClass:
    """A Gamma_1-class (one simple and one reduced cycle) or a Gamma-class (a union of them)."""

    D: int
    group: Group
    simple_cycles: Tuple[Tuple[QForm, ...], ...]
    reduced_cycles: Tuple[Tuple[QForm, ...], ...]

    @property
    def simple_forms(self) -> Tuple[QForm, ...]:
        return tuple(sorted(f for cycle in self.simple_cycles for f in cycle))

    @property
    def reduced_forms(self) -> Tuple[QForm, ...]:
        return tuple(sorted(f for cycle in self.reduced_cycles for f in cycle))

    @property
    def representative(self) -> QForm:
        return self.simple_forms[0]

    def __contains__(self, Q: QForm) -> bool:
        return Q in self.simple_forms or Q in self.reduced_forms

    def to_json(self) -> dict:
        if self.group is Group.GAMMA1:
            return {
                "simple_cycle": [f.to_list() for f in self.simple_cycles[0]],
                "reduced_cycle": [f.to_list() for f in self.reduced_cycles[0]],
            }
        return {
            "simple_cycles": [[f.to_list() for f in cycle] for cycle in self.simple_cycles],
            "reduced_cycles": [[f.to_list() for f in cycle] for cycle in self.reduced_cycles],
        }


def _collect_cycles(forms: Sequence[QForm], build) -> List[Tuple[QForm, ...]]:
    cycles: List[Tuple[QForm, ...]] = []
    assigned = set()
    for Q in forms:
        if Q in assigned:
            continue
        cycle = build(Q)
        assigned.update(cycle)
        cycles.append(cycle)
    return cycles


@lru_cache(maxsize=256)
def _gamma1_classes(D: int) -> Tuple[FormClass, ...]:
    simple_cycles = _collect_cycles(_enumerate(D, FormKind.SIMPLE), simple_cycle)
    reduced_cycles = _collect_cycles(_enumerate(D, FormKind.REDUCED), reduced_cycle)
    if len(simple_cycles) != len(reduced_cycles):
        raise ClassDecompositionError(
            f"D={D}: {len(simple_cycles)} simple cycles but {len(reduced_cycles)} reduced cycles"
        )

    owner = {f: i for i, cycle in enumerate(simple_cycles) for f in cycle}
    paired: Dict[int, Tuple[QForm, ...]] = {}
    for cycle in reduced_cycles:
        index = owner[reduced_simple_bijection(cycle[0], "forward")]
        if index in paired:
            raise ClassDecompositionError(f"D={D}: two reduced cycles meet simple cycle {index}")
        paired[index] = cycle

    classes = [
        FormClass(D, Group.GAMMA1, (cycle,), (paired[i],))
        for i, cycle in enumerate(simple_cycles)
    ]
    logger.debug(f"D={D}: {len(classes)} Gamma1-classes")
    return tuple(sorted(classes, key=lambda fc: fc.representative))


@lru_cache(maxsize=256)
def _gamma_classes(D: int) -> Tuple[FormClass, ...]:
    fine = _gamma1_classes(D)
    parent = list(range(len(fine)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner = {f: i for i, fc in enumerate(fine) for f in fc.simple_forms}
    for i, fc in enumerate(fine):
        j = owner[fc.representative.sigma_conjugate()]
        parent[find(i)] = find(j)

    groups: Dict[int, List[FormClass]] = {}
    for i, fc in enumerate(fine):
        groups.setdefault(find(i), []).append(fc)

    classes = []
    for members in groups.values():
        classes.append(FormClass(
            D,
            Group.GAMMA,
            tuple(c for fc in members for c in fc.simple_cycles),
            tuple(c for fc in members for c in fc.reduced_cycles),
        ))
    return tuple(sorted(classes, key=lambda fc: fc.representative))


def class_decomposition(D: int, group: Union[Group, str] = Group.GAMMA1) -> List[FormClass]:
    """Partition the simple and reduced forms of discriminant D into classes.

    Gamma_1-classes are the cycles of the slow simple expansion (simple forms)
    and of the negative expansion (reduced forms), paired by the reduced-to-simple
    bijection. Gamma-classes merge Gamma_1-classes exchanged by [a, b, c] -> [a, -b, c].

    Raises:
        SquareDiscriminantError: If D is a perfect square.
        NonPositiveDiscriminantError: If D <= 0.
    """
    check_discriminant(D)
    group = Group(group)
    return list(_gamma1_classes(D) if group is Group.GAMMA1 else _gamma_classes(D))


def class_numbers(D: int) -> Tuple[int, int]:
    """(number of Gamma_1-classes, number of Gamma-classes)."""
    return len(class_decomposition(D, Group.GAMMA1)), len(class_decomposition(D, Group.GAMMA))


def reduce_to_class(Q: QForm, group: Union[Group, str] = Group.GAMMA1) -> Tuple[FormClass, Mat2]:
    """The class of Q and a matrix g with Q|g a simple member of that class.

    Raises:
        SquareDiscriminantError: If disc(Q) is a perfect square.
        NonPositiveDiscriminantError: If disc(Q) <= 0.
    """
    D = Q.disc
    check_discriminant(D)
    x = -root_data(Q).w
    expansion = slow_simple(x, _cycle_limit(D) + Q.coefficient_norm())
    if expansion.cycle_start is None:
        raise ClassDecompositionError(f"slow simple expansion of -w_{Q} did not close")

    g = IDENTITY
    current = Q
    for step in expansion.steps[:expansion.cycle_start]:
        h = SIGMA @ branch_matrix(step.branch, simple=True).inverse() @ SIGMA
        current = act(current, h)
        g = g @ h
    logger.debug(f"{Q} reduces to {current} in {expansion.cycle_start} steps")

    for form_class in class_decomposition(D, group):
        if current in form_class.simple_forms:
            return form_class, g
    raise ClassDecompositionError(f"{current} is not a simple form of discriminant {D}")


def negate_class(B: FormClass) -> FormClass:
    """-B: the Gamma_1-class containing the negatives of the members of B."""
    form_class, _ = reduce_to_class(B.representative.negate(), B.group)
    return form_class


def quartic_invariants(P: IntPoly) -> Tuple[Fraction, Fraction, Fraction]:
    """(I, J, Disc) of aX^4 + bX^3 + cX^2 + dX + e.

    Raises:
        WrongDegreeError: If P is not of degree exactly 4.
    """
    if P.degree != 4:
        raise WrongDegreeError(f"expected a quartic, got degree {P.degree}")
    e, d, c, b, a = (P.coefficient(i) for i in range(5))
    I = 12 * a * e - 3 * b * d + c * c
    J = 72 * a * c * e + 9 * b * c * d - 27 * a * d * d - 27 * e * b * b - 2 * c ** 3
    return I, J, (4 * I ** 3 - J ** 2) / 27


class SquareDiscriminantError(ValueError):
    """Raised when a discriminant is a perfect square."""
    pass


class NonPositiveDiscriminantError(ValueError):
    """Raised when a discriminant is zero or negative."""
    pass


class NotInFdError(ValueError):
    """Raised when a polynomial does not have exactly two irrational real roots."""
    pass


class PreconditionViolatedError(ValueError):
    """Raised when a form does not meet the precondition of an operation."""
    pass


class WrongDegreeError(ValueError):
    """Raised when a polynomial has the wrong degree for an operation."""
    pass


class ClassDecompositionError(RuntimeError):
    """Raised when cycle computations disagree or fail to close."""
    pass
