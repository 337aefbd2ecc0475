"""Continued-fraction reduction streams and the matrix families they generate.

Four algorithms are provided as iterators over steps:

* ``iter_plus_cf``: the regular expansion, x_{i+1} = 1/(x_i - n_i) with n_i = floor(x_i).
* ``iter_minus_cf``: the negative expansion, x_{i+1} = 1/(m_i - x_i) with m_i = ceil(x_i).
* ``slow_plus``: the three-branch unit-step version of the regular expansion.
* ``slow_simple``: the three-branch algorithm whose cycles are the simple forms.

Matrices are kept as elements of PGL2(Z): the sign is normalized so that the
first nonzero entry is positive.
"""
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from .realscalar import Interval, Rational, Real, as_real, mobius

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Mat2:
    """A 2x2 integer matrix [[r, s], [t, u]] up to sign."""

    r: int
    s: int
    t: int
    u: int

    def __post_init__(self):
        for entry in (self.r, self.s, self.t, self.u):
            if entry != 0:
                if entry < 0:
                    object.__setattr__(self, "r", -self.r)
                    object.__setattr__(self, "s", -self.s)
                    object.__setattr__(self, "t", -self.t)
                    object.__setattr__(self, "u", -self.u)
                break

    def __repr__(self) -> str:
        return f"Mat2([[{self.r}, {self.s}], [{self.t}, {self.u}]])"

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.r * other.r + self.s * other.t,
            self.r * other.s + self.s * other.u,
            self.t * other.r + self.u * other.t,
            self.t * other.s + self.u * other.u,
        )

    @property
    def det(self) -> int:
        return self.r * self.u - self.s * self.t

    def inverse(self) -> "Mat2":
        if self.det not in (1, -1):
            raise ValueError(f"{self!r} is not invertible over the integers")
        return Mat2(self.u, -self.s, -self.t, self.r)

    def power(self, n: int) -> "Mat2":
        base = self if n >= 0 else self.inverse()
        result = IDENTITY
        for _ in range(abs(n)):
            result = result @ base
        return result

    def apply(self, x: Optional[Real]) -> Optional[Real]:
        """Möbius action; ``None`` is infinity."""
        return mobius(x, self.r, self.s, self.t, self.u)

    def at_infinity(self) -> Optional[Fraction]:
        """The cusp image r/t, or ``None`` when it is infinity."""
        if self.t == 0:
            return None
        return Fraction(self.r, self.t)

    def to_list(self) -> List[List[int]]:
        return [[self.r, self.s], [self.t, self.u]]


def t_power(n: int) -> Mat2:
    """T^n = [[1, n], [0, 1]]."""
    return Mat2(1, n, 0, 1)


IDENTITY = Mat2(1, 0, 0, 1)
EPSILON = Mat2(0, 1, 1, 0)
SIGMA = Mat2(-1, 0, 0, 1)
S = Mat2(0, -1, 1, 0)
T = t_power(1)
T_INV = t_power(-1)
U = T @ S


class Branch(str, Enum):
    SHIFT_UP = "shift_up"
    FLIP = "flip"
    SHIFT_DOWN = "shift_down"


@dataclass(frozen=True)
class CFStepPlus:
    """Step i of the regular expansion.

    ``digit`` is n_i and ``state`` is x_i = gamma_i(x); both are ``None`` on the
    terminal step of a rational expansion, where gamma_i(x) is infinity and
    delta_i = 0. ``convergent`` holds (p_{i-1}, q_{i-1}).
    """

    index: int
    digit: Optional[int]
    state: Optional[Real]
    gamma: Mat2
    convergent: Tuple[int, int]
    delta: Real
    delta_prev: Real

    @property
    def terminal(self) -> bool:
        return self.state is None


@dataclass(frozen=True)
class CFStepMinus:
    """Step i of the negative expansion; ``convergent`` holds (p~_{i-1}, q~_{i-1})."""

    index: int
    digit: Optional[int]
    state: Optional[Real]
    gamma: Mat2
    convergent: Tuple[int, int]
    delta: Real
    delta_prev: Real

    @property
    def terminal(self) -> bool:
        return self.state is None


@dataclass(frozen=True)
class SlowStep:
    """Step i >= 1 of a three-branch expansion: the branch applied to x_{i-1},
    the resulting state x_i and the accumulated matrix with x_i = matrix(x)."""

    index: int
    branch: Branch
    state: Real
    matrix: Mat2

    @property
    def in_family(self) -> bool:
        # steps before the first flip fix infinity and are not part of the family
        return self.matrix.t != 0


@dataclass
class SlowExpansion:
    """Steps of a slow expansion plus what is known about its eventual cycle."""

    start: Optional[Real] = None
    steps: List[SlowStep] = field(default_factory=list)
    cycle_start: Optional[int] = None
    cycle_length: Optional[int] = None
    terminated: bool = False
    cycle_detection: bool = True

    @property
    def purely_periodic(self) -> bool:
        return self.cycle_start == 0

    def cycle_states(self) -> List[Real]:
        if self.cycle_start is None:
            return []
        states = self.states()
        return states[self.cycle_start:self.cycle_start + self.cycle_length]

    def states(self) -> List[Real]:
        """x_0, x_1, ... in order."""
        return [self.start] + [step.state for step in self.steps]


def _check_limit(limit: int) -> None:
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")


def _next_state(x: Real, gamma: Mat2, step: Real) -> Real:
    # exact states follow the recurrence; intervals are re-derived from x
    if isinstance(x, Interval):
        return gamma.apply(x)
    return step.reciprocal()


def iter_plus_cf(x: Real) -> Iterator[CFStepPlus]:
    """Regular continued-fraction stream of ``x``.

    Raises:
        InsufficientPrecisionError: When an interval state straddles an integer.
    """
    p_prev2, p_prev = 0, 1
    q_prev2, q_prev = 1, 0
    gamma = IDENTITY
    delta_prev: Real = x
    delta: Real = Rational(1)
    state: Optional[Real] = x
    index = 0

    while True:
        if state is None:
            logger.debug(f"plus expansion of {x!r} terminated at step {index}")
            yield CFStepPlus(index, None, None, gamma, (p_prev, q_prev), delta, delta_prev)
            return

        digit = state.floor()
        yield CFStepPlus(index, digit, state, gamma, (p_prev, q_prev), delta, delta_prev)

        p_prev2, p_prev = p_prev, digit * p_prev + p_prev2
        q_prev2, q_prev = q_prev, digit * q_prev + q_prev2
        gamma = EPSILON @ t_power(-digit) @ gamma
        index += 1
        sign = 1 if index % 2 == 0 else -1
        delta_prev, delta = delta, sign * (p_prev - q_prev * x)

        remainder = state - digit
        if remainder.is_exact and remainder.sign() == 0:
            state = None
        else:
            state = _next_state(x, gamma, remainder)


def iter_minus_cf(x: Real, ceil_plus_one: bool = False) -> Iterator[CFStepMinus]:
    """Negative continued-fraction stream of ``x``.

    Digits are m_i = ceil(x_i) for non-integer x_i; an integer state is emitted
    with m_i = x_i and ends the stream. With ``ceil_plus_one`` the digit rule is
    ceil(x_i) + 1 instead, which never terminates and satisfies none of the
    usual invariants; it exists for comparison only.
    """
    p_prev2, p_prev = 0, 1
    q_prev2, q_prev = -1, 0
    gamma = IDENTITY
    delta_prev: Real = x
    delta: Real = Rational(1)
    state: Optional[Real] = x
    index = 0

    while True:
        if state is None:
            logger.debug(f"minus expansion of {x!r} terminated at step {index}")
            yield CFStepMinus(index, None, None, gamma, (p_prev, q_prev), delta, delta_prev)
            return

        if ceil_plus_one:
            digit = state.ceil() + 1
        elif isinstance(state, Rational) and state.is_integer:
            digit = state.numerator
        else:
            digit = state.ceil()
        yield CFStepMinus(index, digit, state, gamma, (p_prev, q_prev), delta, delta_prev)

        p_prev2, p_prev = p_prev, digit * p_prev - p_prev2
        q_prev2, q_prev = q_prev, digit * q_prev - q_prev2
        gamma = S @ t_power(-digit) @ gamma
        index += 1
        delta_prev, delta = delta, p_prev - q_prev * x

        gap = digit - state
        if gap.is_exact and gap.sign() == 0:
            state = None
        else:
            state = _next_state(x, gamma, gap)


def plus_cf(x: Real, limit: int) -> List[CFStepPlus]:
    """The first ``limit`` steps of the regular expansion (fewer if it terminates)."""
    _check_limit(limit)
    return list(itertools.islice(iter_plus_cf(x), limit))


def minus_cf(x: Real, limit: int, ceil_plus_one: bool = False) -> List[CFStepMinus]:
    """The first ``limit`` steps of the negative expansion (fewer if it terminates)."""
    _check_limit(limit)
    return list(itertools.islice(iter_minus_cf(x, ceil_plus_one), limit))


def digits(steps) -> List[int]:
    """Digits of a step list, without the terminal marker."""
    return [step.digit for step in steps if step.digit is not None]


def gamma_family(x: Real) -> Iterator[CFStepPlus]:
    """The set Gamma(x): plus-stream steps with i >= 1, terminal step included."""
    return itertools.islice(iter_plus_cf(x), 1, None)


def gamma_prime_family(x: Real, terminal_width: int) -> Iterator[Tuple[CFStepPlus, int, Mat2]]:
    """The set Gamma(x)': T^-j gamma_i for i >= 1 and 1 <= j <= n_i.

    These are the matrices the slow plus expansion passes through after its first
    flip. The block of the terminal step of a rational x is unbounded and is cut
    at ``terminal_width``.
    """
    for step in gamma_family(x):
        width = terminal_width if step.terminal else step.digit
        for j in range(1, width + 1):
            yield step, j, t_power(-j) @ step.gamma


def alternate_terminal_gamma(x: Rational) -> Mat2:
    """Terminal matrix of the other regular expansion of a rational, [n_0; ..., n_N - 1, 1].

    It sends x to infinity like the terminal matrix of the plus stream, with the
    opposite determinant.
    """
    x = as_real(x)
    if not isinstance(x, Rational):
        raise ValueError(f"only rationals have two regular expansions, got {x!r}")
    last = list(iter_plus_cf(x))[-2]
    return EPSILON @ T_INV @ EPSILON @ t_power(1 - last.digit) @ last.gamma


def gamma1_family(x: Real) -> Iterator[CFStepMinus]:
    """The set Gamma_1(x): minus-stream steps with i >= 1, terminal step included."""
    return itertools.islice(iter_minus_cf(x), 1, None)


_PLUS_BRANCHES = {
    Branch.SHIFT_UP: T,
    Branch.FLIP: T_INV @ EPSILON,
    Branch.SHIFT_DOWN: T_INV,
}

_SIMPLE_BRANCHES = {
    Branch.SHIFT_UP: T,
    Branch.FLIP: T_INV @ S @ T_INV,
    Branch.SHIFT_DOWN: T_INV,
}


def branch_matrix(branch: Branch, simple: bool = False) -> Mat2:
    """The matrix applied by ``branch`` in the slow plus (or slow simple) expansion."""
    return (_SIMPLE_BRANCHES if simple else _PLUS_BRANCHES)[branch]


def _plus_branch(state: Real) -> Tuple[Branch, Optional[Real]]:
    if state <= 0:
        return Branch.SHIFT_UP, state + 1
    if state <= 1:
        return Branch.FLIP, state.reciprocal() - 1 if state.is_exact else None
    return Branch.SHIFT_DOWN, state - 1


def _simple_branch(state: Real) -> Tuple[Branch, Optional[Real]]:
    if state <= 0:
        return Branch.SHIFT_UP, state + 1
    if state < 1:
        return Branch.FLIP, state / (1 - state) if state.is_exact else None
    return Branch.SHIFT_DOWN, state - 1


def _slow_expansion(x: Real, limit: int, simple: bool) -> SlowExpansion:
    _check_limit(limit)
    choose = _simple_branch if simple else _plus_branch
    expansion = SlowExpansion(start=x, cycle_detection=x.is_exact)
    seen: Dict[Real, int] = {x: 0} if x.is_exact else {}
    matrix = IDENTITY
    state = x

    for index in range(1, limit + 1):
        branch, exact_next = choose(state)
        matrix = branch_matrix(branch, simple) @ matrix
        state = exact_next if x.is_exact else matrix.apply(x)
        expansion.steps.append(SlowStep(index, branch, state, matrix))

        if not simple and isinstance(state, Rational) and state.sign() == 0:
            expansion.terminated = True
            logger.debug(f"slow plus expansion of {x!r} reached 0 after {index} steps")
            break
        if expansion.cycle_detection:
            if state in seen:
                expansion.cycle_start = seen[state]
                expansion.cycle_length = index - seen[state]
                expansion.terminated = isinstance(state, Rational)
                logger.debug(
                    f"slow expansion of {x!r} closed a cycle of length "
                    f"{expansion.cycle_length} at step {index}"
                )
                break
            seen[state] = index

    return expansion


def slow_plus(x: Real, limit: int) -> SlowExpansion:
    """Three-branch expansion x -> x+1 (x <= 0), 1/x - 1 (0 < x <= 1), x - 1 (x > 1).

    Rational input stops once the state reaches 0; exact input also stops when a
    state repeats.
    """
    return _slow_expansion(x, limit, simple=False)


def slow_simple(x: Real, limit: int) -> SlowExpansion:
    """Three-branch expansion x -> x+1 (x <= 0), x/(1 - x) (0 < x < 1), x - 1 (x >= 1).

    Exact input stops when a state repeats and reports the cycle; rational input
    always ends in the cycle {1, 0}. Interval input has no cycle detection.
    """
    return _slow_expansion(x, limit, simple=True)


class Region(str, Enum):
    GAMMA = "gamma"
    W1 = "W1"
    W2 = "W2"
    GAMMA_PRIME = "gamma_prime"
    W1_PRIME = "W1_prime"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Membership:
    """Where g sits with respect to the regular family and the slow family of x."""

    plus: Region
    slow: Region

    @property
    def in_gamma(self) -> bool:
        return self.plus is Region.GAMMA

    @property
    def in_gamma_prime(self) -> bool:
        return self.slow is Region.GAMMA_PRIME


def _image_exceeds(g: Mat2, x: Real, bound: int) -> bool:
    image = g.apply(x)
    # for rational x the value infinity is allowed
    return image is None or image > bound


def prop_membership(g: Mat2, x: Real) -> Membership:
    """Classify ``g`` by the linear inequalities describing Gamma(x) and Gamma(x)'.

    Gamma(x) is W minus W1 and W2, where W = {-1 <= g(inf) <= 0, g(x) > 1},
    W1 = {g(inf) = 0, det = 1} and W2 = {g(inf) = -1, det = -1}.
    Gamma(x)' is W' minus W1', where W' = {g(inf) <= -1, g(x) > 0} and
    W1' = {g(inf) = -1, det = 1}.

    For a rational x the condition g(x) > 1 (or > 0) also admits g(x) = infinity, so
    both regular expansions of x are covered: the plus stream and its variant
    ending in [..., n_N - 1, 1] (see ``alternate_terminal_gamma``).
    T^-n_N gamma_N sends x to 0 and stays out of Gamma(x)'.

    Raises:
        InsufficientPrecisionError: If an inequality cannot be certified for interval x.
    """
    cusp = g.at_infinity()
    plus = slow = Region.OUTSIDE
    if cusp is None:
        return Membership(plus, slow)

    if -1 <= cusp <= 0 and _image_exceeds(g, x, 1):
        if cusp == 0 and g.det == 1:
            plus = Region.W1
        elif cusp == -1 and g.det == -1:
            plus = Region.W2
        else:
            plus = Region.GAMMA

    if cusp <= -1 and _image_exceeds(g, x, 0):
        slow = Region.W1_PRIME if cusp == -1 and g.det == 1 else Region.GAMMA_PRIME

    return Membership(plus, slow)


def convergents(digit_list: List[int]) -> List[Tuple[int, int]]:
    """(p_i, q_i) of a regular expansion with the given digits."""
    result = []
    p_prev2, p_prev, q_prev2, q_prev = 0, 1, 1, 0
    for digit in digit_list:
        p_prev2, p_prev = p_prev, digit * p_prev + p_prev2
        q_prev2, q_prev = q_prev, digit * q_prev + q_prev2
        result.append((p_prev, q_prev))
    return result


def value_of_minus_digits(digit_list: List[int]) -> Fraction:
    """Evaluate m_0 - 1/(m_1 - 1/(... - 1/m_N))."""
    if not digit_list:
        raise ValueError("empty digit list")
    value = Fraction(digit_list[-1])
    for digit in reversed(digit_list[:-1]):
        value = digit - 1 / value
    return value
