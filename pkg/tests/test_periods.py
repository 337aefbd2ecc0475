"""Tests for period polynomials and L-values."""
import unittest
from fractions import Fraction

from src.periods import (
    InvalidDiscriminantError,
    OddWeightForGammaScopeError,
    Scope,
    cocycle_check,
    even_odd_split,
    fundamental_part,
    kronecker_chi,
    l_value,
    period_polynomial,
    reduce_mod_generator,
    simple_a_sum,
    transformation_law_audit,
)
from src.qforms import Group, IntPoly, class_decomposition
from src.realscalar import Rational


class TestPeriodPolynomials(unittest.TestCase):
    """Test cases for P_{k,D} and its relatives."""

    def test_discriminant_five(self):
        """P_{2,5} = 2X^2 - 2 and P_{4,5} = 2X^6 - 2."""
        self.assertEqual(period_polynomial(2, D=5).poly, IntPoly.from_coeffs([-2, 0, 2]))
        self.assertEqual(period_polynomial(4, D=5).poly, IntPoly.from_coeffs([-2, 0, 0, 0, 0, 0, 2]))

    def test_scopes(self):
        gamma_class = class_decomposition(5, Group.GAMMA)[0]
        gamma1_class = class_decomposition(5, Group.GAMMA1)[0]
        self.assertEqual(period_polynomial(2, form_class=gamma_class).scope, Scope.GAMMA_CLASS)
        symmetrized = period_polynomial(2, form_class=gamma1_class)
        self.assertEqual(symmetrized.scope, Scope.GAMMA1_CLASS)
        self.assertEqual(symmetrized.poly, IntPoly.from_coeffs([-4, 0, 4]))
        self.assertTrue(period_polynomial(3, form_class=gamma1_class).poly.is_zero)

    def test_odd_weight_rejected(self):
        with self.assertRaises(OddWeightForGammaScopeError):
            period_polynomial(3, D=5)

    def test_cocycle_relations(self):
        """Period polynomials are killed by 1 + S and 1 + U + U^2."""
        for D in (5, 8, 12, 13, 21):
            for k in (2, 4, 6):
                P = period_polynomial(k, D=D)
                self.assertTrue(cocycle_check(P.poly, P.degree_bound).passed, (D, k))
                self.assertTrue(P.is_even)
        self.assertFalse(cocycle_check(IntPoly.monomial(2), 2).passed)

    def test_even_odd_split(self):
        even, odd = even_odd_split(IntPoly.from_coeffs([1, 2, 3]))
        self.assertEqual(even, IntPoly.from_coeffs([1, 0, 3]))
        self.assertEqual(odd, IntPoly.from_coeffs([0, 2]))

    def test_reduce_mod_generator(self):
        self.assertTrue(reduce_mod_generator(IntPoly.from_coeffs([-2, 0, 2]), 2).is_zero)
        self.assertEqual(reduce_mod_generator(IntPoly.from_coeffs([0, 1, 1]), 2), IntPoly.from_coeffs([1, 1]))


class TestLValues(unittest.TestCase):
    """Test cases for the characters and L-values."""

    def test_characters(self):
        self.assertEqual(kronecker_chi(5, 2), -1)
        self.assertEqual(kronecker_chi(5, 4), 1)
        self.assertEqual(kronecker_chi(8, 3), -1)
        with self.assertRaises(InvalidDiscriminantError):
            kronecker_chi(7, 1)

    def test_fundamental_part(self):
        self.assertEqual(fundamental_part(5), (5, 1))
        self.assertEqual(fundamental_part(20), (5, 2))
        self.assertEqual(fundamental_part(12), (12, 1))
        self.assertEqual(fundamental_part(32), (8, 2))

    def test_known_values(self):
        self.assertEqual(l_value(5, -1), Rational(Fraction(-2, 5)))
        self.assertEqual(l_value(8, -1), Rational(Fraction(-1)))

    def test_leading_coefficient_sum(self):
        """-5 L_D(-1) is the sum of a over the simple forms."""
        self.assertEqual(simple_a_sum(20), 22)
        for D in (5, 8, 12, 13, 17, 20, 21, 24, 28, 29, 32, 33, 45):
            self.assertEqual(Rational(Fraction(simple_a_sum(D))), -5 * l_value(D, -1), D)

    def test_bad_arguments(self):
        with self.assertRaises(ValueError):
            l_value(5, -2)
        with self.assertRaises(InvalidDiscriminantError):
            l_value(9, -1)


class TestTransformationLaws(unittest.TestCase):
    """Test cases for the P^Gamma audit."""

    def test_period_polynomial_in_w_plus(self):
        report = transformation_law_audit(IntPoly.from_coeffs([-2, 0, 2]), samples=["1/2", "1/3", "7/3", "2/5"])
        self.assertTrue(report.passed, report.counterexample)
        self.assertTrue(report.details["in_w_plus"])
        self.assertIn("one_minus_S", report.details["residuals"])

    def test_arbitrary_polynomial(self):
        """Periodicity, reflection and inversion hold for any P."""
        report = transformation_law_audit(IntPoly.monomial(2), samples=["1/3", "2/5", "7/3", "3/5"])
        self.assertTrue(report.passed, report.counterexample)
        self.assertFalse(report.details["in_w_plus"])
        self.assertNotIn("evenness", report.details["residuals"])

    def test_irrational_sample(self):
        report = transformation_law_audit(IntPoly.from_coeffs([-2, 0, 2]), samples=["(1+sqrt(5))/2"])
        self.assertTrue(report.passed, report.counterexample)


if __name__ == "__main__":
    unittest.main()
