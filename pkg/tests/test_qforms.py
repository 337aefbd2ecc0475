"""Tests for binary quadratic forms and their classes."""
import unittest
from fractions import Fraction

from src.cfrac import EPSILON, IDENTITY, S, T, Mat2, t_power
from src.qforms import (
    FormKind,
    Group,
    IntPoly,
    NonPositiveDiscriminantError,
    PreconditionViolatedError,
    QForm,
    SquareDiscriminantError,
    WrongDegreeError,
    act,
    class_decomposition,
    class_numbers,
    enumerate_forms,
    in_Fd,
    is_reduced_by_roots,
    is_simple_by_roots,
    negate_class,
    power_sum_polynomial,
    quartic_invariants,
    reduce_to_class,
    reduced_simple_bijection,
    root_data,
    slash,
)
from src.realscalar import parse_real


class TestQForm(unittest.TestCase):
    """Test cases for the form type and the matrix action."""

    def test_basic_properties(self):
        """Discriminant, kind predicates and rendering."""
        Q = QForm(1, 1, -1)
        self.assertEqual(Q.disc, 5)
        self.assertTrue(Q.is_simple)
        self.assertFalse(Q.is_reduced)
        self.assertTrue(QForm(1, 3, 1).is_reduced)
        self.assertEqual(repr(Q), "[1,1,-1]")
        self.assertEqual(Q.sigma_conjugate(), QForm(1, -1, -1))

    def test_zero_form_rejected(self):
        with self.assertRaises(ValueError):
            QForm(0, 0, 0)

    def test_action(self):
        """Translations shift the variable; the identity changes nothing."""
        Q = QForm(1, 3, 1)
        self.assertEqual(act(Q, IDENTITY), Q)
        self.assertEqual(act(QForm(1, 1, -1), T), QForm(1, 3, 1))
        self.assertEqual(act(act(Q, S), S), Q)
        self.assertEqual(act(Q, Mat2(2, 1, 1, 1)).disc, Q.disc)

    def test_action_composes_on_the_right(self):
        """Q|(gh) = (Q|g)|h, and the discriminant is kept."""
        matrices = [T, S, EPSILON, T @ S, t_power(2) @ S @ t_power(-1), Mat2(3, -1, -22, 7), Mat2(2, 1, 1, 1)]
        for Q in (QForm(1, 1, -1), QForm(2, 3, -5), QForm(-3, 7, 2)):
            for g in matrices:
                for h in matrices:
                    self.assertEqual(act(Q, g @ h), act(act(Q, g), h), (Q, g, h))
                self.assertEqual(act(Q, g).disc, Q.disc)


class TestPolynomials(unittest.TestCase):
    """Test cases for the slash operator and power sums."""

    def test_power_sum(self):
        """The two simple forms of discriminant 5 sum to 2X^2 - 2."""
        forms = enumerate_forms(5)
        self.assertEqual(power_sum_polynomial(forms, 2), IntPoly.from_coeffs([-2, 0, 2]))

    def test_slash_by_s(self):
        """X^2 | S = 1 in weight 2."""
        self.assertEqual(slash(IntPoly.monomial(2), S, 2), IntPoly.from_coeffs([1]))
        self.assertEqual(slash(IntPoly.from_coeffs([-2, 0, 2]), IDENTITY, 2), IntPoly.from_coeffs([-2, 0, 2]))

    def test_slash_degree_check(self):
        with self.assertRaises(WrongDegreeError):
            slash(IntPoly.monomial(3), T, 2)

    def test_in_fd(self):
        """Two irrational real roots are required."""
        self.assertTrue(in_Fd(IntPoly.from_coeffs([-1, -1, 0, 0, 1]), 4))
        self.assertTrue(in_Fd(IntPoly.from_coeffs([-1, 1, 1]), 2))
        self.assertFalse(in_Fd(IntPoly.from_coeffs([4, 0, -5, 0, 1]), 4))
        self.assertFalse(in_Fd(IntPoly.from_coeffs([-2, 0, 2]), 2))
        self.assertFalse(in_Fd(IntPoly.from_coeffs([-1, -1, 0, 0, 1]), 6))

    def test_quartic_invariants(self):
        """I, J and the discriminant of X^4 - 5X^2 + 4."""
        I, J, disc = quartic_invariants(IntPoly.from_coeffs([4, 0, -5, 0, 1]))
        self.assertEqual(I, Fraction(73))
        self.assertEqual(J, Fraction(-1190))
        self.assertEqual(disc, Fraction(5184))
        with self.assertRaises(WrongDegreeError):
            quartic_invariants(IntPoly.from_coeffs([1, 0, 1]))

    def test_quartic_invariants_under_slash(self):
        """I and J are unchanged by the weight-4 slash of a unimodular matrix."""
        P = IntPoly.from_coeffs([-1, -1, 0, 0, 1])
        expected = quartic_invariants(P)
        for g in (T, S, T @ S, t_power(2) @ S @ t_power(-1), Mat2(3, -1, -22, 7), EPSILON):
            moved = slash(P, g, 4)
            self.assertEqual(moved.degree, 4, g)
            self.assertEqual(quartic_invariants(moved), expected, g)

    def test_slash_composes_on_the_right(self):
        P = IntPoly.from_coeffs([-2, 0, 0, 1, 3])
        for g, h in ((T, S), (S @ T, t_power(-3)), (Mat2(2, 1, 1, 1), EPSILON)):
            self.assertEqual(slash(P, g @ h, 4), slash(slash(P, g, 4), h, 4))


class TestRoots(unittest.TestCase):
    """Test cases for labelled roots."""

    def test_quadratic_roots(self):
        roots = root_data(QForm(1, 3, 1))
        self.assertEqual(roots.w, parse_real("(-3-sqrt(5))/2"))
        self.assertEqual(roots.w_prime, parse_real("(-3+sqrt(5))/2"))

    def test_negative_leading_coefficient_swaps_order(self):
        roots = root_data(QForm(-1, 1, 1))
        self.assertGreater(roots.w, roots.w_prime)

    def test_square_discriminant(self):
        with self.assertRaises(SquareDiscriminantError):
            root_data(QForm(1, 0, -4))

    def test_quartic_roots_are_intervals(self):
        roots = root_data(IntPoly.from_coeffs([-1, -1, 0, 0, 1]), prec=64)
        self.assertLess(roots.w, 0)
        self.assertGreater(roots.w_prime, 1)

    def test_coefficient_and_root_predicates_agree(self):
        """Simple and reduced can be read from coefficients or from roots."""
        for D in (5, 8, 12, 13, 17, 21):
            for a in range(-4, 5):
                for b in range(-7, 8):
                    if a == 0 or (b * b - D) % (4 * a):
                        continue
                    Q = QForm(a, b, (b * b - D) // (4 * a))
                    self.assertEqual(Q.is_simple, is_simple_by_roots(Q), Q)
                    self.assertEqual(Q.is_reduced, is_reduced_by_roots(Q), Q)


class TestEnumeration(unittest.TestCase):
    """Test cases for enumerating simple and reduced forms."""

    def test_discriminant_five(self):
        self.assertEqual(enumerate_forms(5), [QForm(1, -1, -1), QForm(1, 1, -1)])
        self.assertEqual(enumerate_forms(5, FormKind.REDUCED), [QForm(1, 3, 1)])

    def test_discriminant_twelve(self):
        self.assertEqual(len(enumerate_forms(12)), 6)
        self.assertEqual(enumerate_forms(12, "reduced"), [QForm(1, 4, 1), QForm(2, 6, 3), QForm(3, 6, 2)])

    def test_simple_count_is_twice_reduced_count(self):
        for D in range(2, 60):
            if int(D ** 0.5) ** 2 == D or D % 4 not in (0, 1):
                continue
            self.assertEqual(len(enumerate_forms(D)), 2 * len(enumerate_forms(D, "reduced")), D)

    def test_invalid_discriminants(self):
        with self.assertRaises(NonPositiveDiscriminantError):
            enumerate_forms(0)
        with self.assertRaises(SquareDiscriminantError):
            enumerate_forms(9)

    def test_bijection(self):
        """[a, b, c] -> [a, b - 2a, c - b + a] and back."""
        self.assertEqual(reduced_simple_bijection(QForm(1, 3, 1)), QForm(1, 1, -1))
        self.assertEqual(reduced_simple_bijection(QForm(1, 1, -1), "backward"), QForm(1, 3, 1))
        for Q in enumerate_forms(21, "reduced"):
            image = reduced_simple_bijection(Q)
            self.assertTrue(image.is_simple)
            self.assertEqual(reduced_simple_bijection(image, "backward"), Q)

    def test_bijection_preconditions(self):
        with self.assertRaises(PreconditionViolatedError):
            reduced_simple_bijection(QForm(1, 1, -1))
        with self.assertRaises(PreconditionViolatedError):
            reduced_simple_bijection(QForm(1, -1, -1), "backward")


class TestClasses(unittest.TestCase):
    """Test cases for the class decomposition."""

    def test_discriminant_five_has_one_class(self):
        self.assertEqual(class_numbers(5), (1, 1))
        (form_class,) = class_decomposition(5)
        self.assertEqual(form_class.simple_forms, (QForm(1, -1, -1), QForm(1, 1, -1)))
        self.assertEqual(form_class.reduced_forms, (QForm(1, 3, 1),))

    def test_classes_partition_the_forms(self):
        """Every simple and reduced form lies in exactly one class."""
        for D in (5, 8, 12, 13, 21, 28, 33, 40):
            for group in (Group.GAMMA1, Group.GAMMA):
                classes = class_decomposition(D, group)
                simple = [f for fc in classes for f in fc.simple_forms]
                reduced = [f for fc in classes for f in fc.reduced_forms]
                self.assertEqual(sorted(simple), enumerate_forms(D), (D, group))
                self.assertEqual(sorted(reduced), enumerate_forms(D, "reduced"), (D, group))
            gamma1, gamma = class_numbers(D)
            self.assertLessEqual(gamma, gamma1)

    def test_reduce_to_class(self):
        """A non-simple form is carried onto a simple member of its class."""
        for Q in (QForm(-1, 1, 1), QForm(5, 11, 5), QForm(1, 3, 1), QForm(2, 7, 4)):
            form_class, g = reduce_to_class(Q)
            self.assertIn(act(Q, g), form_class.simple_forms)

    def test_negate_class(self):
        (form_class,) = class_decomposition(5)
        self.assertEqual(negate_class(form_class), form_class)


if __name__ == "__main__":
    unittest.main()
