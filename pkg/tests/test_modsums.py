"""Tests for the sums of powers of quadratic forms."""
import unittest
from fractions import Fraction

from src.modsums import (
    DepthExceededError,
    Representation,
    SumRequest,
    UnsupportedRepresentationError,
    a_star_sum,
    a_sum_direct_rational,
    a_sum_stream,
    bijection_audit,
    forms_in_bracket,
    one_minus_s_check,
    orbit_lists,
    p_gamma_sum,
    quartic_audit,
)
from src.qforms import Group, IntPoly, QForm, class_decomposition
from src.config import LIST_DEPTH_CAP
from src.realscalar import Rational, parse_real


class TestDirectSums(unittest.TestCase):
    """Test cases for exhaustive enumeration at rational points."""

    def test_forms_at_zero(self):
        """Q(inf) < 0 < Q(0) leaves [-1, +-1, 1] for D = 5."""
        self.assertEqual(forms_in_bracket(5, 0), [QForm(-1, -1, 1), QForm(-1, 1, 1)])

    def test_constant_values(self):
        """A_{2,5} and A_{4,5} are both the constant 2."""
        for x in (Fraction(0), Fraction(1, 2), Fraction(7, 3), Fraction(-2, 5), Fraction(13, 8)):
            self.assertEqual(a_sum_direct_rational(5, 2, x), Rational(Fraction(2)), x)
            self.assertEqual(a_sum_direct_rational(5, 4, x), Rational(Fraction(2)), x)

    def test_non_rational_rejected(self):
        with self.assertRaises(ValueError):
            forms_in_bracket(5, parse_real("sqrt(2)"))

    def test_one_minus_s(self):
        """A|(1 - S) = -P at rational points."""
        report = one_minus_s_check(5, 2, Fraction(1, 2))
        self.assertTrue(report.passed)
        for D in (5, 8, 13):
            for k in (2, 4):
                self.assertTrue(one_minus_s_check(D, k, Fraction(2, 3)).passed, (D, k))


class TestStreamSums(unittest.TestCase):
    """Test cases for the continued-fraction representations."""

    def test_representations_agree_at_rationals(self):
        """Every conditioned stream reproduces the direct value exactly."""
        representations = (
            Representation.SIMPLE_CONDITIONED,
            Representation.REDUCED_CONDITIONED,
            Representation.GAMMA1_CONDITIONED,
        )
        for D in (5, 8, 13):
            for k in (2, 4):
                for text in ("0", "1/2", "7/3", "-2/5"):
                    x = parse_real(text)
                    expected = a_sum_direct_rational(D, k, x)
                    for rep in representations:
                        result = a_sum_stream(SumRequest(x=x, k=k, D=D, representation=rep))
                        self.assertEqual(result.value, expected, (D, k, text, rep))
                        self.assertEqual(result.truncation_bound, 0)

    def test_unconditioned_agrees_for_even_k(self):
        x = parse_real("7/3")
        result = a_sum_stream(SumRequest(x=x, k=2, D=5, representation=Representation.SIMPLE_UNCONDITIONED))
        self.assertEqual(result.value, Rational(Fraction(2)))

    def test_irrational_encloses_constant(self):
        """At 1/pi and the golden ratio the enclosure contains 2."""
        for text in ("1/pi", "(1+sqrt(5))/2"):
            result = a_sum_stream(SumRequest(x=parse_real(text), k=2, D=5))
            lo, hi = result.value.bounds()
            self.assertLessEqual(lo, 2, text)
            self.assertGreaterEqual(hi, 2, text)
            self.assertTrue(result.converged)
            self.assertGreater(result.steps, 1)

    def test_direct_needs_rational(self):
        with self.assertRaises(UnsupportedRepresentationError):
            a_sum_stream(SumRequest(x=parse_real("1/pi"), k=2, D=5, representation=Representation.DIRECT))

    def test_unconditioned_needs_even_k(self):
        with self.assertRaises(UnsupportedRepresentationError):
            a_sum_stream(SumRequest(x=parse_real("1/3"), k=3, D=5,
                                    representation=Representation.SIMPLE_UNCONDITIONED))

    def test_strict_depth_cap(self):
        request = SumRequest(x=parse_real("1/pi"), k=2, D=5, depth_cap=2, strict=True)
        with self.assertRaises(DepthExceededError) as context:
            a_sum_stream(request)
        self.assertFalse(context.exception.result.converged)

    def test_request_validation(self):
        with self.assertRaises(ValueError):
            SumRequest(x=parse_real("1/3"), k=1, D=5)
        with self.assertRaises(ValueError):
            SumRequest(x=parse_real("1/3"), k=2)

    def test_ledger_and_json(self):
        result = a_sum_stream(SumRequest(x=parse_real("7/3"), k=2, D=5))
        data = result.to_json(digits=6, with_ledger=True)
        self.assertTrue(data["exact"])
        self.assertEqual(data["representation"], "simple")
        self.assertEqual(len(data["ledger"]), len(result.ledger))
        self.assertEqual(sum(1 for row in result.ledger if row.included), result.terms)

    def test_bound_kinds(self):
        """Only the regular stream proves its tail; the negative stream reports an estimate."""
        exact = a_sum_stream(SumRequest(x=parse_real("7/3"), k=2, D=5))
        self.assertEqual(exact.bound_kind, "exact")
        self.assertIn("truncation_bound", exact.to_json())

        proven = a_sum_stream(SumRequest(x=parse_real("1/pi"), k=2, D=5))
        self.assertEqual(proven.bound_kind, "certified")

        estimated = a_sum_stream(SumRequest(x=parse_real("1/pi"), k=2, D=5, depth_cap=20,
                                            representation=Representation.GAMMA1_CONDITIONED))
        self.assertFalse(estimated.certified)
        self.assertEqual(estimated.bound_kind, "estimate")
        data = estimated.to_json(digits=6)
        self.assertEqual(data["bound_kind"], "estimate")
        self.assertIn("truncation_estimate", data)
        self.assertNotIn("truncation_bound", data)


class TestClassSums(unittest.TestCase):
    """Test cases for class-restricted sums and the star sums."""

    def test_star_sum_doubles_self_negative_class(self):
        """For D = 5 the only class is its own negative."""
        (form_class,) = class_decomposition(5, Group.GAMMA1)
        star = a_star_sum(form_class, 2, parse_real("7/3"))
        self.assertEqual(star.conditioned.value, Rational(Fraction(4)))

    def test_p_gamma_sum_terminates_at_rationals(self):
        result = p_gamma_sum(IntPoly.from_coeffs([-2, 0, 2]), parse_real("1/2"))
        self.assertEqual(result.value, Rational(Fraction(2)))
        result = p_gamma_sum(IntPoly.monomial(2), parse_real("1/2"))
        self.assertEqual(result.value, Rational(Fraction(5, 4)))


class TestOrbitLists(unittest.TestCase):
    """Test cases for the per-form orbit lists."""

    def test_lists_for_one_over_pi(self):
        lists = orbit_lists(5, parse_real("1/pi"), depth=8)
        self.assertEqual(len(lists), 2)
        self.assertEqual({item.simple_form for item in lists}, {QForm(1, 1, -1), QForm(1, -1, -1)})
        for item in lists:
            self.assertEqual(len(item.rows), 8)
        self.assertGreaterEqual(float(lists[0].included_sum), float(lists[1].included_sum))

    def test_lists_extend_to_included_rows(self):
        """Each list runs past the depth until it has the requested included rows."""
        lists = orbit_lists(5, parse_real("1/pi"), depth=8, min_included=5)
        for item in lists:
            self.assertGreaterEqual(sum(1 for row in item.rows if row.included), 5)
            self.assertLessEqual(len(item.rows), LIST_DEPTH_CAP)
        forms = [row.image.to_list() for item in lists for row in item.rows if row.included]
        self.assertIn([-5959340757998441, 3793834156817819, -603807459328429], forms)
        self.assertAlmostEqual(float(lists[0].included_sum + lists[1].included_sum), 2.0, delta=1e-5)

    def test_lists_stop_with_the_stream(self):
        """A rational stream ends the extension early."""
        lists = orbit_lists(5, parse_real("7/3"), depth=1, min_included=50)
        self.assertTrue(all(len(item.rows) <= 2 for item in lists))


class TestAudits(unittest.TestCase):
    """Test cases for the bijection audits."""

    def test_bijections_discriminant_five(self):
        gamma_class = class_decomposition(5, Group.GAMMA)[0]
        gamma1_class = class_decomposition(5, Group.GAMMA1)[0]
        for x in (Fraction(0), Fraction(1, 2), Fraction(2, 5), Fraction(7, 3)):
            self.assertTrue(bijection_audit(gamma_class, x, "simple").passed, x)
            self.assertTrue(bijection_audit(gamma_class, x, "reduced").passed, x)
            self.assertTrue(bijection_audit(gamma1_class, x, "gamma1").passed, x)

    def test_bijection_group_mismatch(self):
        gamma_class = class_decomposition(5, Group.GAMMA)[0]
        with self.assertRaises(UnsupportedRepresentationError):
            bijection_audit(gamma_class, Fraction(1, 2), "gamma1")

    def test_quartic_audit(self):
        report = quartic_audit(Fraction(1, 3), "simple", samples=3, seed=7)
        self.assertTrue(report.passed, report.counterexample)


if __name__ == "__main__":
    unittest.main()
