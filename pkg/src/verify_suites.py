"""Acceptance suites bundled behind ``quadperiod verify``.

Each suite sweeps one family of checks over a range of discriminants or sample
points and returns an AuditReport whose ``details`` hold per-item counts. Unit
tests call the same functions with small ranges.
"""
import itertools
import logging
import math
import random
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from tqdm import tqdm

from .cfrac import (
    EPSILON,
    S,
    Mat2,
    alternate_terminal_gamma,
    gamma_family,
    gamma_prime_family,
    iter_minus_cf,
    iter_plus_cf,
    prop_membership,
    slow_simple,
    t_power,
)
from .config import DEFAULT_SEED, DEFAULT_TOLERANCE, PREC_START_BITS
from .modsums import (
    AuditReport,
    Representation,
    SumRequest,
    a_sum_direct_rational,
    a_sum_stream,
    bijection_audit,
    one_minus_s_check,
    orbit_lists,
    quartic_audit,
)
from .periods import cocycle_check, l_value, period_polynomial, simple_a_sum, transformation_law_audit
from .qforms import (
    CYCLE_STEP_FACTOR,
    FormKind,
    Group,
    IntPoly,
    act,
    class_decomposition,
    enumerate_forms,
    minus_cf_cycle,
    root_data,
)
from .realscalar import Real, Rational, parse_real

logger = logging.getLogger(__name__)

SUITES = ("tables", "constancy", "k6", "representations", "bijections", "cocycle",
          "loracle", "cycles", "streams", "laws")

# Included terms of the two lists for D = 5 at x = 1/pi, largest list first.
ONE_OVER_PI_LIST_ROWS = (
    ("1.216989", "0.113636", "0.002150", "0.000008", "0.000008"),
    ("0.580369", "0.084943", "0.001896", "6.86e-17", "1.57e-18"),
)
ONE_OVER_PI_LIST_SUMS = (Fraction("1.332791"), Fraction("0.667208"))
LIST_SUM_TOLERANCE = Fraction(1, 10 ** 5)

BIJECTION_POINTS = (Fraction(0), Fraction(1, 2), Fraction(1, 3), Fraction(2, 5), Fraction(7, 3))
CONSTANCY_RATIONALS = (Fraction(1, 3), Fraction(2, 5), Fraction(7, 3))
STREAM_POINTS = ("1/pi", "(1+sqrt(5))/2", "7/3")
STREAM_STEPS = 30
TRANSFORMATION_LAW_POLYS = (
    IntPoly.from_coeffs([-2, 0, 2]),
    IntPoly.from_coeffs([-1, 0, 1]),
    IntPoly.from_coeffs([-2, 0, 0, 0, 0, 0, 2]),
)


def discriminants(upper: int, lower: int = 2) -> List[int]:
    """Non-square discriminants (0 or 1 mod 4) in [lower, upper]."""
    return [D for D in range(max(lower, 2), upper + 1)
            if D % 4 in (0, 1) and math.isqrt(D) ** 2 != D]


class _Tally:
    """Collects item outcomes and keeps the first failure."""

    def __init__(self, name: str):
        self.name = name
        self.checked = 0
        self.failures = 0
        self.counterexample: Optional[Dict[str, Any]] = None
        self.details: Dict[str, Any] = {}

    def check(self, ok: bool, **context) -> bool:
        self.checked += 1
        if not ok:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = context
                logger.warning(f"{self.name}: failure {context}")
        return ok

    def absorb(self, report: AuditReport) -> None:
        self.check(report.passed, audit=report.name, counterexample=report.counterexample)

    def report(self) -> AuditReport:
        self.details["failures"] = self.failures
        return AuditReport(self.name, self.failures == 0, self.checked, self.counterexample, self.details)


def _progress(items, desc: str, progress: bool):
    return tqdm(items, desc=desc, disable=not progress, leave=False)


def _matches(computed: Real, printed: str) -> bool:
    if "e" in printed:
        expected = Fraction(printed)
        return abs(Fraction(float(computed)) - expected) <= expected / 100
    return computed.to_decimal(len(printed.split(".")[1])) == printed


def suite_tables(progress: bool = False) -> AuditReport:
    """The two orbit lists for D = 5 at x = 1/pi and their sums."""
    tally = _Tally("tables")
    lists = orbit_lists(5, parse_real("1/pi"), depth=8, min_included=5)
    tally.check(len(lists) == 2, reason="list count", lists=len(lists))
    for position, (zlist, expected) in enumerate(zip(lists, ONE_OVER_PI_LIST_ROWS)):
        included = [row.term for row in zlist.rows if row.included]
        tally.check(len(included) >= len(expected), list=position, reason="too few included rows",
                    found=len(included))
        for value, printed in zip(included, expected):
            tally.check(_matches(value, printed), list=position, expected=printed,
                        found=value.to_scientific(6))
        gap = abs(Fraction(float(zlist.included_sum)) - ONE_OVER_PI_LIST_SUMS[position])
        tally.check(gap <= LIST_SUM_TOLERANCE, list=position, reason="list sum",
                    found=zlist.included_sum.to_decimal(6))
    total = sum((zlist.included_sum for zlist in lists), Rational(0))
    tally.check(abs(Fraction(float(total)) - 2) <= LIST_SUM_TOLERANCE, reason="grand total",
                found=total.to_decimal(6))
    tally.details["sums"] = [zlist.included_sum.to_decimal(6) for zlist in lists]
    return tally.report()


def _constancy_points() -> List[Real]:
    points: List[Real] = [Rational(x) for x in CONSTANCY_RATIONALS]
    points.append(parse_real("1/pi"))
    points.append(parse_real("1+sqrt(3)").to_interval(PREC_START_BITS))
    return points


def suite_constancy(d_max: int = 30, tolerance: Fraction = DEFAULT_TOLERANCE, progress: bool = False) -> AuditReport:
    """A_{2,D} = -5 L_D(-1) and A_{4,D} = L_D(-3) at rational and irrational points."""
    tally = _Tally("constancy")
    points = _constancy_points()
    for D in _progress(discriminants(d_max), "constancy", progress):
        targets = {2: -5 * l_value(D, -1).value, 4: l_value(D, -3).value}
        for k, expected in targets.items():
            for x in points:
                if isinstance(x, Rational):
                    found = a_sum_direct_rational(D, k, x).value
                    tally.check(found == expected, D=D, k=k, x=str(x.value), found=str(found),
                                expected=str(expected))
                else:
                    result = a_sum_stream(SumRequest(x=x, k=k, D=D, tolerance=tolerance))
                    lo, hi = result.value.bounds()
                    gap = abs((lo + hi) / 2 - expected)
                    tally.check(gap <= tolerance, D=D, k=k, x=x.to_decimal(12),
                                found=result.value.to_decimal(12), expected=str(expected))
            tally.absorb(one_minus_s_check(D, k, CONSTANCY_RATIONALS[0]))
    return tally.report()


def suite_k6(tolerance: Fraction = DEFAULT_TOLERANCE) -> AuditReport:
    """A_{6,5} is not constant: its values at 1/pi and 1/e differ."""
    tally = _Tally("k6")
    values = {}
    for text in ("1/pi", "1/e"):
        result = a_sum_stream(SumRequest(x=parse_real(text), k=6, D=5, tolerance=tolerance))
        values[text] = result.value
    difference = abs(Fraction(float(values["1/pi"] - values["1/e"])))
    tally.check(difference > Fraction(1, 10 ** 4), difference=float(difference))
    tally.details["values"] = {text: value.to_decimal(6) for text, value in values.items()}
    return tally.report()


def suite_representations(d_max: int = 50, samples: int = 20, seed: int = DEFAULT_SEED,
                          progress: bool = False) -> AuditReport:
    """Direct, simple, reduced and unconditioned sums agree exactly at rational points."""
    tally = _Tally("representations")
    rng = random.Random(seed)
    pool = discriminants(d_max)
    representations = (Representation.SIMPLE_CONDITIONED, Representation.REDUCED_CONDITIONED,
                       Representation.SIMPLE_UNCONDITIONED)
    for _ in _progress(range(samples), "representations", progress):
        D = rng.choice(pool)
        k = rng.choice((2, 4))
        q = rng.randint(1, 20)
        x = Rational(Fraction(rng.randint(-3 * q, 3 * q), q))
        direct = a_sum_direct_rational(D, k, x)
        for rep in representations:
            found = a_sum_stream(SumRequest(x=x, k=k, D=D, representation=rep)).value
            tally.check(found == direct, D=D, k=k, x=str(x.value), representation=rep.value,
                        found=repr(found), expected=repr(direct))
    return tally.report()


def suite_bijections(d_max: int = 50, seed: int = DEFAULT_SEED, quartic_samples: int = 4,
                     progress: bool = False) -> AuditReport:
    """Exhaustive bijection audits per class, plus sampled quartic audits."""
    tally = _Tally("bijections")
    for D in _progress(discriminants(d_max), "bijections", progress):
        for x in BIJECTION_POINTS:
            for form_class in class_decomposition(D, Group.GAMMA):
                tally.absorb(bijection_audit(form_class, x, "simple"))
                tally.absorb(bijection_audit(form_class, x, "reduced"))
            for form_class in class_decomposition(D, Group.GAMMA1):
                tally.absorb(bijection_audit(form_class, x, "gamma1"))
    for bijection, x in itertools.product(("simple", "reduced", "gamma1"), BIJECTION_POINTS):
        tally.absorb(quartic_audit(x, bijection, samples=quartic_samples, seed=seed))
    return tally.report()


def suite_cocycle(d_max: int = 50, progress: bool = False) -> AuditReport:
    """P_{k,D} satisfies both cocycle relations; the D = 5 polynomials are exact."""
    tally = _Tally("cocycle")
    for D in _progress(discriminants(d_max), "cocycle", progress):
        for k in (2, 4, 6, 8):
            P = period_polynomial(k, D=D)
            result = cocycle_check(P.poly, P.degree_bound)
            tally.check(result.passed, D=D, k=k, residuals=result.to_json())
    tally.check(period_polynomial(2, D=5).poly == IntPoly.from_coeffs([-2, 0, 2]), reason="P_(2,5)")
    tally.check(period_polynomial(4, D=5).poly == IntPoly.from_coeffs([-2, 0, 0, 0, 0, 0, 2]), reason="P_(4,5)")
    return tally.report()


def suite_loracle(d_max: int = 200, progress: bool = False) -> AuditReport:
    """Sum of leading coefficients of the simple forms equals -5 L_D(-1)."""
    tally = _Tally("loracle")
    for D in _progress(discriminants(d_max), "loracle", progress):
        left = simple_a_sum(D)
        right = -5 * l_value(D, -1).value
        tally.check(left == right, D=D, simple_a_sum=left, l_value=str(right))
    return tally.report()


def _purity_forms(D: int) -> List:
    forms = set(enumerate_forms(D, FormKind.SIMPLE)) | set(enumerate_forms(D, FormKind.REDUCED))
    for Q in list(forms):
        forms.add(act(Q, t_power(1)))
        forms.add(act(Q, t_power(-1)))
    return sorted(Q for Q in forms if Q.a != 0)


def suite_cycles(d_max: int = 200, purity_max: Optional[int] = None, progress: bool = False) -> AuditReport:
    """Simple forms are twice the reduced ones; cycle routes agree; pure periodicity on -w_Q."""
    tally = _Tally("cycles")
    purity_max = d_max // 2 if purity_max is None else purity_max
    for D in _progress(discriminants(d_max), "cycles", progress):
        simple = enumerate_forms(D, FormKind.SIMPLE)
        reduced = enumerate_forms(D, FormKind.REDUCED)
        tally.check(len(simple) == 2 * len(reduced), D=D, simple=len(simple), reduced=len(reduced))
        classes = class_decomposition(D, Group.GAMMA1)
        simple_cycles = sum(len(fc.simple_cycles) for fc in classes)
        reduced_cycles = sum(len(fc.reduced_cycles) for fc in classes)
        tally.check(simple_cycles == reduced_cycles, D=D, simple_cycles=simple_cycles,
                    reduced_cycles=reduced_cycles)
        if D > purity_max:
            continue
        limit = CYCLE_STEP_FACTOR * (len(simple) + D) + 16
        for Q in _purity_forms(D):
            x = -root_data(Q).w
            start, _, _ = minus_cf_cycle(x, limit)
            tally.check((start == 0) == Q.is_reduced, D=D, form=Q.to_list(), expansion="negative")
            tally.check(slow_simple(x, limit).purely_periodic == Q.is_simple, D=D, form=Q.to_list(),
                        expansion="slow simple")
    return tally.report()


def _plus_stream_laws(tally: _Tally, text: str, steps: int) -> None:
    x = parse_real(text)
    previous = None
    telescoped: Real = Rational(0)
    quadratic = IntPoly.from_coeffs([-1, 0, 1])
    for step in itertools.islice(iter_plus_cf(x), steps):
        tally.check(step.gamma.det == (-1) ** step.index, x=text, i=step.index, law="det gamma_i")
        if previous is not None:
            tally.check(step.gamma == EPSILON @ t_power(-previous.digit) @ previous.gamma,
                        x=text, i=step.index, law="gamma recurrence")
            tally.check(step.delta < previous.delta, x=text, i=step.index, law="delta decreasing")
            telescoped = telescoped + quadratic.homogeneous(step.delta_prev, step.delta, 2)
            residual = telescoped - (1 - step.delta ** 2)
            tally.check(residual.sign() == 0 if residual.is_exact else
                        abs(Fraction(float(residual))) < Fraction(1, 10 ** 20),
                        x=text, i=step.index, law="telescoping")
        if not step.terminal:
            tally.check(step.delta.sign() > 0, x=text, i=step.index, law="delta positive")
        previous = step
        if step.terminal:
            break


def _minus_stream_laws(tally: _Tally, text: str, steps: int) -> None:
    x = parse_real(text)
    previous = None
    for step in itertools.islice(iter_minus_cf(x), steps):
        tally.check(step.gamma.det == 1, x=text, i=step.index, law="det gamma~_i")
        if previous is not None:
            tally.check(step.gamma == S @ t_power(-previous.digit) @ previous.gamma,
                        x=text, i=step.index, law="gamma~ recurrence")
            tally.check(step.delta < previous.delta, x=text, i=step.index, law="delta~ decreasing")
        if not step.terminal:
            tally.check(step.delta.sign() > 0, x=text, i=step.index, law="delta~ positive")
            if step.index > 0:
                tally.check(step.digit >= 2, x=text, i=step.index, law="digit >= 2")
        previous = step
        if step.terminal:
            break


def _bounded(g: Mat2, bound: int) -> bool:
    return max(abs(g.r), abs(g.s), abs(g.t), abs(g.u)) <= bound


def _unimodular(bound: int):
    seen = set()
    for r, s, t in itertools.product(range(-bound, bound + 1), repeat=3):
        for det in (1, -1):
            if r == 0:
                if s * t != -det:
                    continue
                candidates = range(-bound, bound + 1)
            elif (det + s * t) % r:
                continue
            else:
                candidates = ((det + s * t) // r,)
            for u in candidates:
                if abs(u) > bound:
                    continue
                g = Mat2(r, s, t, u)
                if g not in seen:
                    seen.add(g)
                    yield g


def membership_agreement(text: str, bound: int) -> Tuple[int, Optional[Dict[str, Any]]]:
    """Compare the inequality description of Gamma(x), Gamma(x)' with the streams, entries <= bound.

    A rational x has two regular expansions and both terminal matrices send it to
    infinity, so the alternate one and its shifts join the stream families.
    """
    x = parse_real(text)
    last_index = 0
    outside = 0
    family = set()
    for step in gamma_family(x):
        last_index = step.index
        if _bounded(step.gamma, bound):
            family.add(step.gamma)
        # bottom rows grow along the stream; three in a row past the bound end the search
        outside = outside + 1 if max(abs(step.gamma.t), abs(step.gamma.u)) > bound else 0
        if step.terminal or outside >= 3:
            break

    width = 2 * bound + 2
    prime = set()
    for step, j, gamma in gamma_prime_family(x, width):
        if step.index > last_index:
            break
        if not step.terminal and step.state.is_exact and (step.state - j).sign() == 0:
            continue
        if j <= width and _bounded(gamma, bound):
            prime.add(gamma)

    if isinstance(x, Rational):
        alternate = alternate_terminal_gamma(x)
        if _bounded(alternate, bound):
            family.add(alternate)
        prime.update(g for g in (t_power(-j) @ alternate for j in range(1, width + 1)) if _bounded(g, bound))

    checked = 0
    for g in _unimodular(bound):
        checked += 1
        membership = prop_membership(g, x)
        if membership.in_gamma != (g in family) or membership.in_gamma_prime != (g in prime):
            return checked, {"x": text, "matrix": g.to_list(), "plus": membership.plus.value,
                             "slow": membership.slow.value}
    return checked, None


def suite_streams(steps: int = STREAM_STEPS, entry_bound: int = 50, progress: bool = False) -> AuditReport:
    """Recurrences, determinants and delta laws of both streams; membership by inequalities."""
    tally = _Tally("streams")
    for text in _progress(STREAM_POINTS, "streams", progress):
        _plus_stream_laws(tally, text, steps)
        _minus_stream_laws(tally, text, steps)
        checked, counterexample = membership_agreement(text, entry_bound)
        tally.check(counterexample is None, law="membership", checked=checked, counterexample=counterexample)
    return tally.report()


def suite_laws(tolerance: Fraction = DEFAULT_TOLERANCE, progress: bool = False) -> AuditReport:
    """Transformation laws of P^Gamma for the reference polynomials."""
    tally = _Tally("laws")
    for P in _progress(TRANSFORMATION_LAW_POLYS, "laws", progress):
        tally.absorb(transformation_law_audit(P, tolerance=tolerance))
    return tally.report()


def run_suite(name: str, d_max: Optional[int] = None, seed: int = DEFAULT_SEED,
              tolerance: Fraction = DEFAULT_TOLERANCE, progress: bool = True) -> List[AuditReport]:
    """Run one suite by name, or every suite for ``all``.

    ``d_max`` overrides the discriminant range of the suites that sweep one.

    Raises:
        ValueError: For an unknown suite name.
    """
    def ranged(default: int) -> int:
        return default if d_max is None else d_max

    runners: Dict[str, Callable[[], AuditReport]] = {
        "tables": lambda: suite_tables(progress),
        "constancy": lambda: suite_constancy(ranged(30), tolerance, progress),
        "k6": lambda: suite_k6(tolerance),
        "representations": lambda: suite_representations(ranged(50), seed=seed, progress=progress),
        "bijections": lambda: suite_bijections(ranged(50), seed=seed, progress=progress),
        "cocycle": lambda: suite_cocycle(ranged(50), progress),
        "loracle": lambda: suite_loracle(ranged(200), progress),
        "cycles": lambda: suite_cycles(ranged(200), progress=progress),
        "streams": lambda: suite_streams(progress=progress),
        "laws": lambda: suite_laws(tolerance, progress),
    }
    if name == "all":
        names = list(SUITES)
    elif name in runners:
        names = [name]
    else:
        raise ValueError(f"Unknown suite '{name}', expected one of {', '.join(SUITES)} or all")

    reports = []
    for suite in names:
        logger.info(f"running suite {suite}")
        report = runners[suite]()
        logger.info(f"suite {suite}: {'passed' if report.passed else 'FAILED'} ({report.checked} checks)")
        reports.append(report)
    return reports
