"""Tests for the continued-fraction streams."""
import itertools
import unittest
from fractions import Fraction

from src.cfrac import (
    EPSILON,
    IDENTITY,
    S,
    SIGMA,
    T,
    U,
    Branch,
    Mat2,
    alternate_terminal_gamma,
    convergents,
    digits,
    gamma1_family,
    gamma_family,
    gamma_prime_family,
    iter_plus_cf,
    minus_cf,
    plus_cf,
    prop_membership,
    slow_plus,
    slow_simple,
    t_power,
    value_of_minus_digits,
)
from src.realscalar import Rational, parse_real


class TestMat2(unittest.TestCase):
    """Test cases for the matrix type."""

    def test_sign_normalization(self):
        """Matrices are identified up to sign."""
        self.assertEqual(Mat2(-1, 0, 0, -1), IDENTITY)
        self.assertEqual(Mat2(0, -1, 1, 0), Mat2(0, 1, -1, 0))

    def test_generators(self):
        """U = TS has order three and S has order two, projectively."""
        self.assertEqual(S @ S, IDENTITY)
        self.assertEqual(U @ U @ U, IDENTITY)
        self.assertEqual(EPSILON.det, -1)
        self.assertEqual(SIGMA.det, -1)
        self.assertEqual(T.power(3), t_power(3))
        self.assertEqual(t_power(4) @ t_power(-4), IDENTITY)

    def test_apply_and_cusp(self):
        """Möbius action and image of infinity."""
        g = Mat2(3, -1, -22, 7)
        self.assertEqual(g.at_infinity(), Fraction(-3, 22))
        self.assertIsNone(IDENTITY.at_infinity())
        self.assertEqual(t_power(2).apply(Rational(Fraction(1, 3))), Rational(Fraction(7, 3)))


class TestPlusStream(unittest.TestCase):
    """Test cases for the regular expansion."""

    def test_rational_terminates(self):
        """7/3 = [2; 3] ends with a terminal step."""
        steps = plus_cf(parse_real("7/3"), 10)
        self.assertEqual(digits(steps), [2, 3])
        self.assertTrue(steps[-1].terminal)
        self.assertEqual(steps[-1].delta, Rational(Fraction(0)))

    def test_first_matrix_and_delta(self):
        """gamma_1 = eps T^-n0 maps x to x_1."""
        step = next(iter(gamma_family(parse_real("7/3"))))
        self.assertEqual(step.gamma, Mat2(0, 1, 1, -2))
        self.assertEqual(step.state, Rational(Fraction(3)))
        self.assertEqual(step.delta, Rational(Fraction(1, 3)))

    def test_one_over_pi(self):
        """1/pi = [0; 3, 7, 15, 1, 292, ...]."""
        steps = plus_cf(parse_real("1/pi"), 6)
        self.assertEqual(digits(steps), [0, 3, 7, 15, 1, 292])

    def test_stream_laws(self):
        """Determinants alternate, deltas decrease, matrices map x to x_i."""
        x = parse_real("(1+sqrt(5))/2")
        previous = None
        for step in itertools.islice(iter_plus_cf(x), 12):
            self.assertEqual(step.gamma.det, (-1) ** step.index)
            self.assertEqual(step.gamma.apply(x), step.state)
            self.assertEqual(step.delta.sign(), 1)
            if previous is not None:
                self.assertLess(step.delta, previous.delta)
                self.assertEqual(step.gamma, EPSILON @ t_power(-previous.digit) @ previous.gamma)
            previous = step

    def test_convergents(self):
        """p_i/q_i from the digits."""
        self.assertEqual(convergents([2, 3]), [(2, 1), (7, 3)])
        self.assertEqual(convergents([0, 3, 7]), [(0, 1), (1, 3), (7, 22)])


class TestMinusStream(unittest.TestCase):
    """Test cases for the negative expansion."""

    def test_rational(self):
        """7/3 = 3 - 1/(2 - 1/2)."""
        steps = minus_cf(parse_real("7/3"), 10)
        self.assertEqual(digits(steps), [3, 2, 2])
        self.assertEqual(value_of_minus_digits([3, 2, 2]), Fraction(7, 3))

    def test_periodic_surd(self):
        """(3+sqrt(5))/2 has every digit equal to 3."""
        steps = minus_cf(parse_real("(3+sqrt(5))/2"), 8)
        self.assertEqual(digits(steps), [3] * 8)

    def test_determinant_one(self):
        """Every negative-expansion matrix lies in SL2(Z) and deltas decrease."""
        previous = None
        for step in itertools.islice(gamma1_family(parse_real("1/pi")), 15):
            self.assertEqual(step.gamma.det, 1)
            self.assertEqual(step.delta.sign(), 1)
            if previous is not None:
                self.assertLess(step.delta, previous.delta)
                self.assertGreaterEqual(previous.digit, 2)
            previous = step

    def test_ceil_plus_one_never_terminates(self):
        """The alternative digit rule runs for the full limit on a rational."""
        steps = minus_cf(parse_real("7/3"), 5, ceil_plus_one=True)
        self.assertEqual(len(steps), 5)
        self.assertEqual(steps[0].digit, 4)
        self.assertFalse(any(step.terminal for step in steps))


class TestSlowExpansions(unittest.TestCase):
    """Test cases for the slow three-branch expansions."""

    def test_slow_plus_rational(self):
        """7/3 reaches 0 through two shifts, a flip, a shift and a flip."""
        expansion = slow_plus(parse_real("7/3"), 20)
        self.assertEqual([step.branch for step in expansion.steps],
                         [Branch.SHIFT_DOWN, Branch.SHIFT_DOWN, Branch.FLIP, Branch.SHIFT_DOWN, Branch.FLIP])
        self.assertTrue(expansion.terminated)

    def test_slow_simple_golden_ratio(self):
        """(1+sqrt(5))/2 is purely periodic with period two."""
        expansion = slow_simple(parse_real("(1+sqrt(5))/2"), 20)
        self.assertTrue(expansion.purely_periodic)
        self.assertEqual(expansion.cycle_length, 2)

    def test_slow_simple_preperiod(self):
        """(-1-sqrt(5))/2 enters the same cycle after three steps."""
        expansion = slow_simple(parse_real("(-1-sqrt(5))/2"), 20)
        self.assertFalse(expansion.purely_periodic)
        self.assertEqual(expansion.cycle_start, 3)
        self.assertEqual(set(expansion.cycle_states()),
                         {parse_real("(1+sqrt(5))/2"), parse_real("(-1+sqrt(5))/2")})

    def test_slow_simple_rational_cycle(self):
        """Rationals end in the cycle {1, 0}."""
        expansion = slow_simple(parse_real("5"), 20)
        self.assertEqual(expansion.cycle_states(), [Rational(Fraction(1)), Rational(Fraction(0))])
        self.assertTrue(expansion.terminated)


class TestFamilies(unittest.TestCase):
    """Test cases for Gamma(x), Gamma(x)' and the inequality description."""

    def test_gamma_prime_at_zero(self):
        """The terminal block of x = 0 is cut at the requested width."""
        members = [gamma for _, _, gamma in gamma_prime_family(Rational(Fraction(0)), 2)]
        self.assertEqual(members, [t_power(-1) @ EPSILON, t_power(-2) @ EPSILON])

    def test_membership_one_over_pi(self):
        """The first members of Gamma(1/pi) satisfy the inequalities; others do not."""
        x = parse_real("1/pi")
        for g in (EPSILON, Mat2(1, 0, -3, 1), Mat2(3, -1, -22, 7)):
            self.assertTrue(prop_membership(g, x).in_gamma, g)
        self.assertFalse(prop_membership(IDENTITY, x).in_gamma)
        self.assertFalse(prop_membership(Mat2(1, 0, -2, 1), x).in_gamma)

    def test_alternate_terminal_matrix(self):
        """7/3 = [2; 2, 1] ends in a second matrix sending x to infinity."""
        x = parse_real("7/3")
        alternate = alternate_terminal_gamma(x)
        self.assertEqual(alternate, Mat2(2, -5, -3, 7))
        self.assertIsNone(alternate.apply(x))
        self.assertEqual(alternate.det, -list(iter_plus_cf(x))[-1].gamma.det)
        self.assertEqual(alternate_terminal_gamma(Fraction(5)), Mat2(1, -4, -1, 5))
        with self.assertRaises(ValueError):
            alternate_terminal_gamma(parse_real("1/pi"))

    def test_membership_both_expansions(self):
        """Shifts of either terminal matrix are in Gamma(x)'; the shift onto 0 is not."""
        x = parse_real("7/3")
        self.assertTrue(prop_membership(Mat2(2, -5, -3, 7), x).in_gamma)
        shifted = prop_membership(Mat2(20, -47, -3, 7), x)
        self.assertTrue(shifted.in_gamma_prime)
        self.assertEqual(t_power(-6) @ alternate_terminal_gamma(x), Mat2(20, -47, -3, 7))
        gamma_1 = Mat2(0, 1, 1, -2)
        self.assertTrue(prop_membership(t_power(-2) @ gamma_1, x).in_gamma_prime)
        self.assertFalse(prop_membership(t_power(-3) @ gamma_1, x).in_gamma_prime)

    def test_gamma_family_members(self):
        """The stream produces the same matrices."""
        members = [step.gamma for step in itertools.islice(gamma_family(parse_real("1/pi")), 3)]
        self.assertEqual(members, [EPSILON, Mat2(1, 0, -3, 1), Mat2(3, -1, -22, 7)])


if __name__ == "__main__":
    unittest.main()
