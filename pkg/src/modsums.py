"""Sums of powers of quadratic forms over continued-fraction matrix families.

The quantity of interest is

    A_{k,D}(x) = sum of Q(x)^(k-1) over the forms Q of discriminant D
                 with Q(inf) < 0 < Q(x),

which is finite for rational x and an infinite convergent series otherwise.
It can be evaluated by direct enumeration (rational x only) or by running one
of the continued-fraction streams of x and transporting a finite set of
simple or reduced forms along the matrices of the stream. Each stream term
is (Q|gamma_i)(x) = a*d_{i-1}^2 + b*d_{i-1}*d_i + c*d_i^2 with the d_i the
convergent errors of x, so the tails are controlled by the decay of d_i.
"""
import itertools
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .cfrac import (
    IDENTITY,
    CFStepPlus,
    S,
    T,
    T_INV,
    Mat2,
    gamma1_family,
    gamma_family,
    gamma_prime_family,
    t_power,
)
from .config import DEFAULT_DEPTH_CAP, DEFAULT_TOLERANCE, LIST_DEPTH_CAP, PREC_START_BITS
from .qforms import (
    FormClass,
    FormKind,
    Group,
    IntPoly,
    QForm,
    act,
    check_discriminant,
    enumerate_forms,
    negate_class,
    power_sum_polynomial,
    reduce_to_class,
    root_data,
    slash,
)
from .realscalar import (
    InsufficientPrecisionError,
    Interval,
    Rational,
    Real,
    as_real,
    format_scientific,
    magnitude_bound,
)

logger = logging.getLogger(__name__)

WeightedForms = Sequence[Tuple[QForm, int]]


class Representation(str, Enum):
    DIRECT = "direct"
    SIMPLE_CONDITIONED = "simple"
    REDUCED_CONDITIONED = "reduced"
    SIMPLE_UNCONDITIONED = "unconditioned"
    GAMMA1_CONDITIONED = "gamma1"
    GAMMA1_UNCONDITIONED = "gamma1_unconditioned"


@dataclass
class SumRequest:
    """One evaluation of A_{k,D}(x) or A_{k,A}(x).

    Exactly one of ``D`` and ``form_class`` is given. Plus-stream
    representations need a Gamma-class scope, the Gamma_1 representations a
    Gamma_1-class scope; a bare discriminant works with every representation.
    """

    x: Real
    k: int = 2
    D: Optional[int] = None
    form_class: Optional[FormClass] = None
    representation: Representation = Representation.SIMPLE_CONDITIONED
    tolerance: Fraction = DEFAULT_TOLERANCE
    depth_cap: int = DEFAULT_DEPTH_CAP
    strict: bool = False

    def __post_init__(self):
        self.x = as_real(self.x)
        self.representation = Representation(self.representation)
        self.tolerance = Fraction(self.tolerance)
        if (self.D is None) == (self.form_class is None):
            raise ValueError("give exactly one of D and form_class")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.depth_cap < 1:
            raise ValueError(f"depth cap must be >= 1, got {self.depth_cap}")
        if self.D is not None:
            check_discriminant(self.D)

    @property
    def discriminant(self) -> int:
        return self.D if self.form_class is None else self.form_class.D

    def forms(self, kind: FormKind) -> List[QForm]:
        if self.form_class is None:
            return enumerate_forms(self.D, kind)
        if kind is FormKind.SIMPLE:
            return list(self.form_class.simple_forms)
        return list(self.form_class.reduced_forms)


@dataclass(frozen=True)
class LedgerRow:
    """One (form, matrix) pair visited by a stream."""

    index: int
    shift: Optional[int]
    form: Optional[QForm]
    image: Optional[QForm]
    matrix: Mat2
    value: Real
    term: Real
    included: bool

    def to_json(self, digits: int = 12) -> Dict[str, Any]:
        return {
            "i": self.index,
            "j": self.shift,
            "form": self.form.to_list() if self.form else None,
            "image": self.image.to_list() if self.image else None,
            "matrix": self.matrix.to_list(),
            "value": self.value.to_scientific(digits),
            "included": self.included,
        }


@dataclass
class SumResult:
    """Value of a sum with its truncation data and per-term ledger."""

    value: Real
    representation: Representation
    terms: int
    steps: int
    truncation_bound: Fraction
    certified: bool = True
    converged: bool = True
    ledger: List[LedgerRow] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.value.is_exact

    @property
    def bound_kind(self) -> str:
        """``exact`` for a finished stream, ``certified`` for a proven tail bound, else ``estimate``."""
        if self.truncation_bound == 0:
            return "exact"
        return "certified" if self.certified else "estimate"

    def to_json(self, digits: int = 12, with_ledger: bool = False) -> Dict[str, Any]:
        bound_key = "truncation_estimate" if self.bound_kind == "estimate" else "truncation_bound"
        data = {
            "representation": self.representation.value,
            "value": self.value.to_decimal(digits),
            "value_json": self.value.to_json(),
            "exact": self.exact,
            "terms": self.terms,
            "steps": self.steps,
            bound_key: format_scientific(self.truncation_bound, 6),
            "bound_kind": self.bound_kind,
            "certified": self.certified,
            "converged": self.converged,
        }
        if with_ledger:
            data["ledger"] = [row.to_json(digits) for row in self.ledger]
        return data


@dataclass(frozen=True)
class StarSum:
    """A*_{k,B}(x) evaluated with and without the sign conditions."""

    conditioned: SumResult
    unconditioned: SumResult

    @property
    def difference(self) -> Real:
        return self.conditioned.value - self.unconditioned.value


@dataclass
class OrbitList:
    """The orbit of one simple form along Gamma(x), with the per-row condition flags."""

    simple_form: QForm
    rows: List[LedgerRow]
    included_sum: Real
    total_sum: Real

    def to_json(self, digits: int = 6) -> Dict[str, Any]:
        return {
            "simple_form": self.simple_form.to_list(),
            "rows": [row.to_json(digits) for row in self.rows],
            "included_sum": self.included_sum.to_decimal(digits),
            "total_sum": self.total_sum.to_decimal(digits),
        }


@dataclass
class AuditReport:
    """Outcome of an identity or bijection check."""

    name: str
    passed: bool
    checked: int
    counterexample: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def raise_for_failure(self) -> None:
        if not self.passed:
            raise AuditFailureError(self)

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "counterexample": self.counterexample,
            "details": self.details,
        }


def _working_prec(x: Real) -> int:
    return x.prec if isinstance(x, Interval) else PREC_START_BITS


def _widen(total: Real, bound: Fraction, x: Real) -> Real:
    if bound == 0:
        return total
    lo, hi = total.bounds()
    return Interval.build(lo - bound, hi + bound, _working_prec(x))


def _geometric_tail(scale: Fraction, delta: Real, d: int) -> Fraction:
    # d_{i+1} < d_{i-1}/2 along the regular expansion
    return scale * 2 * magnitude_bound(delta) ** d / (1 - Fraction(1, 2 ** d))


def _linear_tail(scale: Fraction, delta: Real, delta_prev: Real, d: int) -> Optional[Fraction]:
    # estimate only: assumes the decrements of the negative expansion do not shrink
    high = magnitude_bound(delta)
    decrement = delta_prev.bounds()[0] - delta.bounds()[1]
    if decrement <= 0:
        return None
    return scale * (high ** d + high ** (d + 1) / ((d + 1) * decrement))


def _finish(x: Real, representation: Representation, tolerance: Fraction, strict: bool, total: Real,
            bound: Optional[Fraction], certified: bool, ledger: List[LedgerRow], steps: int,
            included: int) -> SumResult:
    converged = bound is not None and (bound == 0 or bound < tolerance)
    if bound is None:
        bound = Fraction(10) ** 9
    result = SumResult(
        value=_widen(total, bound, x),
        representation=representation,
        terms=included,
        steps=steps,
        truncation_bound=bound,
        certified=certified,
        converged=converged,
        ledger=ledger,
    )
    if not certified:
        logger.info(f"{representation.value} tail {float(bound):.3e} is an estimate, not a proven bound")
    if not converged:
        message = (
            f"{representation.value} sum stopped at depth {steps} with tail bound "
            f"{float(bound):.3e} >= tolerance {float(tolerance):.3e}"
        )
        if strict:
            raise DepthExceededError(message, result)
        logger.warning(message)
    return result


def _scale(forms: WeightedForms, k: int) -> Fraction:
    return sum((Fraction(Q.coefficient_norm()) ** (k - 1) for Q, _ in forms), Fraction(0))


def _plus_rows(step: CFStepPlus, forms: WeightedForms, k: int, conditioned: bool) -> List[LedgerRow]:
    cusp = step.gamma.at_infinity()
    floor_image = None if step.terminal else Fraction(step.digit)
    rows = []
    for Q, weight in forms:
        value = Q.homogeneous(step.delta_prev, step.delta)
        keep = not conditioned or (Q.sign_at(cusp) < 0 < Q.sign_at(floor_image))
        rows.append(LedgerRow(step.index, None, Q, act(Q, step.gamma), step.gamma,
                              value, weight * value ** (k - 1), keep))
    return rows


def _run_plus(request: SumRequest, forms: WeightedForms, conditioned: bool) -> SumResult:
    k, d = request.k, 2 * (request.k - 1)
    scale = _scale(forms, k)
    total: Real = Rational(0)
    ledger: List[LedgerRow] = []
    included = steps = 0
    bound: Optional[Fraction] = None

    for step in gamma_family(request.x):
        steps = step.index
        for row in _plus_rows(step, forms, k, conditioned):
            ledger.append(row)
            if row.included:
                total = total + row.term
                included += 1
        if step.terminal:
            bound = Fraction(0)
            break
        bound = _geometric_tail(scale, step.delta, d)
        if bound < request.tolerance or steps >= request.depth_cap:
            break

    logger.debug(f"plus stream: {steps} steps, {included} terms, tail bound {float(bound or 0):.3e}")
    return _finish(request.x, request.representation, request.tolerance, request.strict,
                   total, bound, True, ledger, steps, included)


def _run_reduced(request: SumRequest, forms: WeightedForms) -> SumResult:
    k, d = request.k, 2 * (request.k - 1)
    widths = {Q: (-root_data(Q).w).ceil() for Q, _ in forms}
    shifted = {(Q, j): act(Q, t_power(-j)) for Q, _ in forms for j in range(1, widths[Q] + 1)}
    scale = sum(
        (widths[Q] * Fraction(max(shifted[(Q, j)].coefficient_norm() for j in range(1, widths[Q] + 1))) ** (k - 1)
         for Q, _ in forms),
        Fraction(0),
    )
    total: Real = Rational(0)
    ledger: List[LedgerRow] = []
    included = steps = 0
    bound: Optional[Fraction] = None

    for step in gamma_family(request.x):
        steps = step.index
        for Q, weight in forms:
            span = widths[Q] if step.terminal else min(step.digit, widths[Q])
            for j in range(1, span + 1):
                gamma = t_power(-j) @ step.gamma
                keep = Q.sign_at(gamma.at_infinity()) < 0
                value = shifted[(Q, j)].homogeneous(step.delta_prev, step.delta)
                term = weight * value ** (k - 1)
                ledger.append(LedgerRow(step.index, j, Q, act(Q, gamma), gamma, value, term, keep))
                if keep:
                    total = total + term
                    included += 1
        if step.terminal:
            bound = Fraction(0)
            break
        bound = _geometric_tail(scale, step.delta, d)
        if bound < request.tolerance or steps >= request.depth_cap:
            break

    logger.debug(f"reduced stream: {steps} steps, {included} terms")
    return _finish(request.x, request.representation, request.tolerance, request.strict,
                   total, bound, True, ledger, steps, included)


def _run_gamma1(request: SumRequest, forms: WeightedForms, conditioned: bool) -> SumResult:
    k, d = request.k, 2 * (request.k - 1)
    scale = _scale(forms, k)
    total: Real = Rational(0)
    ledger: List[LedgerRow] = []
    included = steps = 0
    bound: Optional[Fraction] = None

    for step in gamma1_family(request.x):
        steps = step.index
        cusp = step.gamma.at_infinity()
        for Q, weight in forms:
            value = Q.homogeneous(step.delta_prev, step.delta)
            term = weight * value ** (k - 1)
            # (Q|g)(x) = (tx + u)^2 Q(g(x)), so its sign is that of Q(g(x))
            keep = not conditioned or (Q.sign_at(cusp) < 0 and value.sign() > 0)
            ledger.append(LedgerRow(step.index, None, Q, act(Q, step.gamma), step.gamma, value, term, keep))
            if keep:
                total = total + term
                included += 1
        if step.terminal:
            bound = Fraction(0)
            break
        bound = _linear_tail(scale, step.delta, step.delta_prev, d)
        if (bound is not None and bound < request.tolerance) or steps >= request.depth_cap:
            break

    logger.debug(f"negative stream: {steps} steps, {included} terms")
    return _finish(request.x, request.representation, request.tolerance, request.strict,
                   total, bound, bound == 0, ledger, steps, included)


@lru_cache(maxsize=512)
def _forms_in_bracket(D: int, x: Fraction) -> Tuple[QForm, ...]:
    p, q = x.numerator, x.denominator
    root = math.isqrt(D)
    forms = []
    for size in range(1, D * q * q // 4 + 1):
        a = -size
        centre = -2 * a * x
        # (2ax + b)^2 < D bounds b to an interval of width 2*sqrt(D) around -2ax
        for b in range(math.floor(centre) - root - 1, math.ceil(centre) + root + 2):
            if (b - D) % 2 or (2 * a * x + b) ** 2 >= D:
                continue
            numerator = b * b - D
            if numerator % (4 * a):
                continue
            Q = QForm(a, b, numerator // (4 * a))
            if Q.at(x) > 0:
                forms.append(Q)
    return tuple(sorted(forms))


def forms_in_bracket(D: int, x: Union[Rational, Fraction, int], form_class: Optional[FormClass] = None) -> List[QForm]:
    """Q_D<x>: all forms of discriminant D with Q(inf) < 0 < Q(x), for rational x.

    With q the denominator of x, q^2 Q(x) is a positive integer while Q(x)
    never exceeds D/(4|a|), so |a| <= D q^2 / 4 bounds the search.

    Raises:
        SquareDiscriminantError: If D is a perfect square.
    """
    check_discriminant(D)
    x = as_real(x)
    if not isinstance(x, Rational):
        raise ValueError("direct enumeration needs a rational x")
    forms = list(_forms_in_bracket(D, x.value))
    if form_class is not None:
        forms = [Q for Q in forms if _in_class(Q, form_class)]
    return forms


@lru_cache(maxsize=8192)
def _class_of(Q: QForm, group: Group) -> FormClass:
    return reduce_to_class(Q, group)[0]


def _in_class(Q: QForm, form_class: FormClass) -> bool:
    return _class_of(Q, form_class.group) == form_class


def a_sum_direct_rational(D: int, k: int, x: Union[Rational, Fraction, int],
                          form_class: Optional[FormClass] = None) -> Rational:
    """Exact A_{k,D}(x) (or A_{k,A}(x)) for rational x by exhaustive enumeration."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    x = as_real(x)
    total = sum((Q.at(x.value) ** (k - 1) for Q in forms_in_bracket(D, x, form_class)), Fraction(0))
    return Rational(total)


def _scope_forms(request: SumRequest, kind: FormKind) -> WeightedForms:
    return [(Q, 1) for Q in request.forms(kind)]


def a_sum_stream(request: SumRequest) -> SumResult:
    """Evaluate a SumRequest in its requested representation.

    Raises:
        UnsupportedRepresentationError: When the scope does not fit the representation.
        InsufficientPrecisionError: When an interval x is too coarse for the stream.
        DepthExceededError: With ``strict``, when the depth cap is reached first.
    """
    rep = request.representation
    scope = request.form_class
    logger.info(f"A_{request.k},{request.discriminant}({request.x!r}) via {rep.value}")

    if rep is Representation.DIRECT:
        if not isinstance(request.x, Rational):
            raise UnsupportedRepresentationError("direct enumeration needs a rational x")
        value = a_sum_direct_rational(request.discriminant, request.k, request.x, scope)
        terms = len(forms_in_bracket(request.discriminant, request.x, scope))
        return SumResult(value, rep, terms, 0, Fraction(0))

    if rep in (Representation.SIMPLE_CONDITIONED, Representation.SIMPLE_UNCONDITIONED,
               Representation.REDUCED_CONDITIONED):
        if scope is not None and scope.group is not Group.GAMMA:
            raise UnsupportedRepresentationError(f"{rep.value} runs over Gamma-classes, got a {scope.group.value}-class")
        if rep is Representation.SIMPLE_UNCONDITIONED and request.k % 2:
            raise UnsupportedRepresentationError("the unconditioned sum needs an even k")
        if rep is Representation.REDUCED_CONDITIONED:
            return _run_reduced(request, _scope_forms(request, FormKind.REDUCED))
        conditioned = rep is Representation.SIMPLE_CONDITIONED
        return _run_plus(request, _scope_forms(request, FormKind.SIMPLE), conditioned)

    if scope is not None and scope.group is not Group.GAMMA1:
        raise UnsupportedRepresentationError(f"{rep.value} runs over Gamma_1-classes, got a {scope.group.value}-class")
    if rep is Representation.GAMMA1_UNCONDITIONED and (scope is not None or request.k % 2):
        raise UnsupportedRepresentationError(
            "the unconditioned Gamma_1 sum equals A_{k,D} only for a whole discriminant and even k; "
            "use a_star_sum for a single class"
        )
    conditioned = rep is Representation.GAMMA1_CONDITIONED
    return _run_gamma1(request, _scope_forms(request, FormKind.SIMPLE), conditioned)


def a_star_sum(form_class: FormClass, k: int, x: Real, tolerance: Fraction = DEFAULT_TOLERANCE,
               depth_cap: int = DEFAULT_DEPTH_CAP) -> StarSum:
    """A*_{k,B}(x) = A_{k,B}(x) + (-1)^k A_{k,-B}(x) with and without the sign conditions."""
    if form_class.group is not Group.GAMMA1:
        raise UnsupportedRepresentationError("A* is defined for Gamma_1-classes")
    opposite = negate_class(form_class)
    sign = -1 if k % 2 else 1
    forms = [(Q, 1) for Q in form_class.simple_forms] + [(Q, sign) for Q in opposite.simple_forms]

    results = []
    for rep in (Representation.GAMMA1_CONDITIONED, Representation.GAMMA1_UNCONDITIONED):
        request = SumRequest(x=x, k=k, form_class=form_class, representation=rep,
                             tolerance=tolerance, depth_cap=depth_cap)
        results.append(_run_gamma1(request, forms, rep is Representation.GAMMA1_CONDITIONED))
    return StarSum(*results)


def _default_degree(P: IntPoly) -> int:
    return max(2, P.degree + P.degree % 2)


def p_gamma_sum(P: IntPoly, x: Real, group: Union[Group, str] = Group.GAMMA, d: Optional[int] = None,
                tolerance: Fraction = DEFAULT_TOLERANCE, depth_cap: int = DEFAULT_DEPTH_CAP) -> SumResult:
    """P^Gamma(x) = sum over Gamma(x) of (P|gamma)(x), or the Gamma_1(x) analogue.

    The slash weight ``d`` defaults to the degree of P rounded up to an even number.
    """
    group = Group(group)
    d = _default_degree(P) if d is None else d
    if P.degree > d:
        raise ValueError(f"degree {P.degree} exceeds weight {d}")
    x = as_real(x)
    tolerance = Fraction(tolerance)
    scale = P.coefficient_norm()
    family = gamma_family(x) if group is Group.GAMMA else gamma1_family(x)
    representation = (Representation.SIMPLE_UNCONDITIONED if group is Group.GAMMA
                      else Representation.GAMMA1_UNCONDITIONED)

    total: Real = Rational(0)
    ledger: List[LedgerRow] = []
    steps = 0
    bound: Optional[Fraction] = None
    for step in family:
        steps = step.index
        value = P.homogeneous(step.delta_prev, step.delta, d)
        ledger.append(LedgerRow(step.index, None, None, None, step.gamma, value, value, True))
        total = total + value
        if step.terminal:
            bound = Fraction(0)
            break
        if group is Group.GAMMA:
            bound = _geometric_tail(scale, step.delta, d)
        else:
            bound = _linear_tail(scale, step.delta, step.delta_prev, d)
        if (bound is not None and bound < tolerance) or steps >= depth_cap:
            break

    certified = group is Group.GAMMA or bound == 0
    return _finish(x, representation, tolerance, False, total, bound, certified, ledger, steps, len(ledger))


def orbit_lists(D: int, x: Real, depth: int = 8, k: int = 2, min_included: int = 0,
                max_depth: int = LIST_DEPTH_CAP) -> List[OrbitList]:
    """One list per simple form Q of discriminant D: the forms Q|gamma_i for gamma_i in Gamma(x).

    A row is flagged as included when the pair passes Q(gamma(inf)) < 0 < Q(floor(gamma(x))),
    which is exactly when Q|gamma_i belongs to Q_D<x>. Lists are ordered by included sum,
    largest first; rows keep their stream order.

    Each list takes ``depth`` steps, then keeps going until it has ``min_included``
    included rows. The extension stops at ``max_depth`` steps, at the end of a finite
    stream, or when an interval x runs out of precision.
    """
    check_discriminant(D)
    x = as_real(x)
    lists = []
    for Q in enumerate_forms(D, FormKind.SIMPLE):
        rows = []
        stream = gamma_family(x)
        for step in itertools.islice(stream, depth):
            rows.extend(_plus_rows(step, [(Q, 1)], k, conditioned=True))
        taken = depth
        while sum(1 for row in rows if row.included) < min_included and taken < max_depth:
            try:
                step = next(stream)
                rows.extend(_plus_rows(step, [(Q, 1)], k, conditioned=True))
            except StopIteration:
                break
            except InsufficientPrecisionError:
                logger.debug(f"orbit list for {Q.to_list()} stopped at step {taken}: precision exhausted")
                break
            taken += 1
        included_sum = sum((row.term for row in rows if row.included), Rational(0))
        total_sum = sum((row.term for row in rows), Rational(0))
        lists.append(OrbitList(Q, rows, included_sum, total_sum))
    lists.sort(key=lambda item: -float(item.included_sum))
    return lists


def _pair_info(Q: Union[QForm, IntPoly], gamma: Mat2, index: int, shift: Optional[int] = None) -> Dict[str, Any]:
    form = Q.to_list() if isinstance(Q, QForm) else Q.to_json()
    return {"form": form, "matrix": gamma.to_list(), "i": index, "j": shift}


def _bijection_pairs(form_class: FormClass, x: Rational, bijection: str) -> List[Tuple[QForm, Mat2, int, Optional[int]]]:
    pairs = []
    if bijection == "simple":
        for step in gamma_family(x):
            floor_image = None if step.terminal else Fraction(step.digit)
            for Q in form_class.simple_forms:
                if Q.sign_at(step.gamma.at_infinity()) < 0 < Q.sign_at(floor_image):
                    pairs.append((Q, step.gamma, step.index, None))
    elif bijection == "reduced":
        widths = {Q: (-root_data(Q).w).ceil() for Q in form_class.reduced_forms}
        for step, j, gamma in gamma_prime_family(x, max(widths.values())):
            for Q in form_class.reduced_forms:
                if j <= widths[Q] and Q.sign_at(gamma.at_infinity()) < 0:
                    pairs.append((Q, gamma, step.index, j))
    elif bijection == "gamma1":
        for step in gamma1_family(x):
            image = None if step.state is None else step.state.value
            for Q in form_class.simple_forms:
                if Q.sign_at(step.gamma.at_infinity()) < 0 < Q.sign_at(image):
                    pairs.append((Q, step.gamma, step.index, None))
    else:
        raise ValueError(f"unknown bijection {bijection!r}")
    return pairs


def bijection_audit(form_class: FormClass, x: Union[Rational, Fraction, int], bijection: str = "simple") -> AuditReport:
    """Check that (Q, gamma) -> Q|gamma is a bijection onto the forms of the class in Q_D<x>.

    ``bijection`` selects the left-hand set: ``simple`` (simple forms and Gamma(x),
    conditions Q(gamma(inf)) < 0 < Q(floor(gamma(x)))), ``reduced`` (reduced
    forms and Gamma(x)', condition Q(gamma(inf)) < 0) or ``gamma1`` (simple forms
    of a Gamma_1-class and Gamma_1(x), conditions Q(gamma(inf)) < 0 < Q(gamma(x))).
    """
    x = as_real(x)
    if not isinstance(x, Rational):
        raise ValueError("bijection audits need a rational x")
    expected_group = Group.GAMMA1 if bijection == "gamma1" else Group.GAMMA
    if form_class.group is not expected_group:
        raise UnsupportedRepresentationError(f"the {bijection} bijection runs over {expected_group.value}-classes")

    name = f"bijection[{bijection}] D={form_class.D} class={form_class.representative!r} x={x.value}"
    target = Counter(forms_in_bracket(form_class.D, x, form_class))
    pairs = _bijection_pairs(form_class, x, bijection)
    images = Counter()
    counterexample = None
    for Q, gamma, index, shift in pairs:
        image = act(Q, gamma)
        images[image] += 1
        if counterexample is None and image not in target:
            counterexample = {"reason": "image outside Q_D<x>", "image": image.to_list(),
                              **_pair_info(Q, gamma, index, shift)}
        elif counterexample is None and images[image] > 1:
            counterexample = {"reason": "image hit twice", "image": image.to_list(),
                              **_pair_info(Q, gamma, index, shift)}
    if counterexample is None:
        missing = sorted(target - images)
        if missing:
            counterexample = {"reason": "form without preimage", "image": missing[0].to_list()}

    report = AuditReport(name, counterexample is None, len(pairs), counterexample,
                         {"target_size": sum(target.values()), "pairs": len(pairs)})
    if not report.passed:
        logger.warning(f"{name} failed: {counterexample}")
    return report


QUARTIC_SEED_POLY = IntPoly.from_coeffs([-1, -1, 0, 0, 1])  # X^4 - X - 1


def _random_word(rng: random.Random) -> Mat2:
    g = IDENTITY
    for _ in range(rng.randint(1, 6)):
        g = g @ rng.choice((T, T_INV, S))
    return g


def _quartic_samples(base: IntPoly, samples: int, seed: int, kind: FormKind) -> List[IntPoly]:
    rng = random.Random(seed)
    found: List[IntPoly] = []
    attempts = 0
    while len(found) < samples and attempts < 50 * samples:
        attempts += 1
        P = slash(base, _random_word(rng), 4)
        if P.degree != 4 or P.coefficient(4) <= 0:
            continue
        roots = root_data(P)
        shift = roots.w.ceil() if kind is FormKind.SIMPLE else roots.w_prime.ceil()
        if kind is FormKind.SIMPLE and not roots.w_prime > shift:
            continue
        if kind is FormKind.REDUCED and not roots.w < shift - 1:
            continue
        candidate = slash(P, t_power(shift), 4)
        if candidate not in found:
            found.append(candidate)
    return found


def quartic_audit(x: Union[Rational, Fraction, int], bijection: str = "simple", samples: int = 6,
                  seed: int = 0, base: IntPoly = QUARTIC_SEED_POLY) -> AuditReport:
    """Well-definedness of the quartic analogues of the bijections on sampled orbit members.

    The simple and reduced quartics of a class are infinite, so only the forward
    direction is checked: every admitted pair (P, gamma) must give
    (P|gamma)(inf) < 0 < (P|gamma)(x).
    """
    x = as_real(x)
    if not isinstance(x, Rational):
        raise ValueError("quartic audits need a rational x")
    kind = FormKind.REDUCED if bijection == "reduced" else FormKind.SIMPLE
    polys = _quartic_samples(base, samples, seed, kind)
    checked = 0
    counterexample = None

    for P in polys:
        if bijection == "simple":
            pairs = [(step.gamma, step.index, None) for step in gamma_family(x)
                     if P.sign_at(step.gamma.at_infinity(), 4) < 0
                     < P.sign_at(None if step.terminal else Fraction(step.digit), 4)]
        elif bijection == "reduced":
            width = (-root_data(P).w).ceil()
            pairs = [(gamma, step.index, j) for step, j, gamma in gamma_prime_family(x, width)
                     if P.sign_at(gamma.at_infinity(), 4) < 0]
        elif bijection == "gamma1":
            pairs = [(step.gamma, step.index, None) for step in gamma1_family(x)
                     if P.sign_at(step.gamma.at_infinity(), 4) < 0
                     < P.sign_at(None if step.state is None else step.state.value, 4)]
        else:
            raise ValueError(f"unknown bijection {bijection!r}")

        for gamma, index, shift in pairs:
            checked += 1
            image = slash(P, gamma, 4)
            if not image.sign_at(None, 4) < 0 < image.sign_at(x.value, 4) and counterexample is None:
                counterexample = {"reason": "image outside A<x>", "image": image.to_json(),
                                  **_pair_info(P, gamma, index, shift)}

    name = f"quartic[{bijection}] x={x.value} seed={seed}"
    report = AuditReport(name, counterexample is None, checked, counterexample,
                         {"polynomials": [P.to_json() for P in polys]})
    if not report.passed:
        logger.warning(f"{name} failed: {counterexample}")
    return report


def one_minus_s_check(D: int, k: int, x: Union[Rational, Fraction, int]) -> AuditReport:
    """A_{k,D}(x) - x^(2k-2) A_{k,D}(-1/x) = -P_{k,D}(x), exactly at a nonzero rational x."""
    x = as_real(x)
    if not isinstance(x, Rational) or x.value == 0:
        raise ValueError("the (1 - S) check needs a nonzero rational x")
    d = 2 * (k - 1)
    value = x.value
    lhs = (a_sum_direct_rational(D, k, value).value
           - value ** d * a_sum_direct_rational(D, k, -1 / value).value)
    P = power_sum_polynomial(enumerate_forms(D, FormKind.SIMPLE), k)
    rhs = -P.at(value)
    name = f"A|(1-S) = -P  D={D} k={k} x={value}"
    counterexample = None if lhs == rhs else {"lhs": str(lhs), "rhs": str(rhs)}
    return AuditReport(name, lhs == rhs, 1, counterexample)


class DepthExceededError(RuntimeError):
    """Raised when the depth cap is reached before the tail bound drops below tolerance."""

    def __init__(self, message: str, result: SumResult):
        super().__init__(message)
        self.result = result


class AuditFailureError(AssertionError):
    """Raised when an audit finds a counterexample."""

    def __init__(self, report: AuditReport):
        super().__init__(f"{report.name}: {report.counterexample}")
        self.report = report


class UnsupportedRepresentationError(ValueError):
    """Raised when a representation does not apply to the requested scope."""
    pass
