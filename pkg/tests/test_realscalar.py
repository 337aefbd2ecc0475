"""Tests for the real scalar module."""
import unittest
from fractions import Fraction

from mpmath import libmp

from src.realscalar import (
    DivisionByZeroError,
    DomainError,
    ExpressionSyntaxError,
    InsufficientPrecisionError,
    Interval,
    PrecisionLossError,
    QuadSurd,
    Rational,
    as_real,
    compare,
    conjugate,
    format_fixed,
    make_surd,
    mobius,
    parse_real,
    real_from_json,
)


class TestParsing(unittest.TestCase):
    """Test cases for parse_real."""

    def test_rationals_and_decimals(self):
        """Integers, fractions and decimals parse to exact rationals."""
        self.assertEqual(parse_real("7/3"), Rational(Fraction(7, 3)))
        self.assertEqual(parse_real("-2"), Rational(Fraction(-2)))
        self.assertEqual(parse_real("0.25"), Rational(Fraction(1, 4)))
        self.assertEqual(parse_real(" 1e-3 "), Rational(Fraction(1, 1000)))

    def test_surds(self):
        """Quadratic irrationals are normalized."""
        golden = parse_real("(1+sqrt(5))/2")
        self.assertEqual(golden, QuadSurd(1, 1, 2, 5))
        self.assertEqual(parse_real("sqrt(8)"), QuadSurd(0, 2, 1, 2))
        self.assertEqual(parse_real("1+sqrt(3)"), QuadSurd(1, 1, 1, 3))

    def test_constants_are_certified_intervals(self):
        """pi and 1/pi enclose their true values."""
        pi = parse_real("pi")
        self.assertIsInstance(pi, Interval)
        self.assertLess(pi.lo, Fraction("3.1415926535897932385"))
        self.assertGreater(pi.hi, Fraction("3.1415926535897932384"))
        self.assertLess(pi.width, Fraction(1, 10 ** 30))
        self.assertEqual(parse_real("1/pi").floor(), 0)
        self.assertEqual(parse_real("e").floor(), 2)
        self.assertEqual(parse_real("1/e").to_decimal(6), "0.367879")

    def test_malformed_input(self):
        """Malformed and invalid expressions raise typed errors."""
        with self.assertRaises(ExpressionSyntaxError):
            parse_real("")
        with self.assertRaises(ExpressionSyntaxError):
            parse_real("pie")
        with self.assertRaises(DomainError):
            parse_real("sqrt(4)")
        with self.assertRaises(DivisionByZeroError):
            parse_real("1/0")


class TestArithmetic(unittest.TestCase):
    """Test cases for exact and interval arithmetic."""

    def test_surd_field_operations(self):
        """Surd arithmetic stays in Q(sqrt(D))."""
        golden = parse_real("(1+sqrt(5))/2")
        self.assertEqual(golden * golden - golden, Rational(Fraction(1)))
        self.assertEqual(golden.reciprocal(), golden - 1)
        self.assertEqual(conjugate(golden), QuadSurd(1, -1, 2, 5))

    def test_surd_floor_and_sign(self):
        """Floors and signs of surds are exact."""
        self.assertEqual(parse_real("(1+sqrt(5))/2").floor(), 1)
        self.assertEqual(parse_real("(1-sqrt(5))/2").floor(), -1)
        self.assertEqual(parse_real("(3-sqrt(5))/2").sign(), 1)
        self.assertEqual(parse_real("(1+sqrt(5))/2").ceil(), 2)

    def test_make_surd_demotes_to_rational(self):
        """A vanishing irrational part yields a Rational."""
        self.assertEqual(make_surd(3, 0, 6, 5), Rational(Fraction(1, 2)))
        self.assertEqual(make_surd(1, 1, 1, 4), Rational(Fraction(3)))

    def test_division_by_zero(self):
        """Exact division by zero is an error."""
        with self.assertRaises(DivisionByZeroError):
            Rational(Fraction(1)) / 0

    def test_interval_contamination(self):
        """An interval operand makes the result an interval."""
        result = parse_real("pi") + 1
        self.assertIsInstance(result, Interval)
        self.assertEqual(result.floor(), 4)

    def test_interval_straddling_integer(self):
        """Floors and signs are refused when uncertified."""
        wide = Interval.build(Fraction(9, 10), Fraction(11, 10), 64)
        with self.assertRaises(InsufficientPrecisionError):
            wide.floor()
        with self.assertRaises(InsufficientPrecisionError):
            (wide - 1).sign()
        with self.assertRaises(InsufficientPrecisionError):
            (wide - 1).reciprocal()

    def test_precision_loss(self):
        """A divisor with too few correct bits is rejected."""
        narrow_but_loose = Interval.build(Fraction(1, 100), Fraction(1, 99), 64)
        with self.assertRaises(PrecisionLossError):
            narrow_but_loose.reciprocal()

    def test_compare(self):
        """compare returns the certified sign of a - b."""
        self.assertEqual(compare(parse_real("sqrt(2)"), parse_real("7/5")), 1)
        self.assertEqual(compare(parse_real("1/3"), parse_real("1/3")), 0)
        self.assertEqual(compare(parse_real("pi"), parse_real("e")), 1)


class TestMobiusAndFormatting(unittest.TestCase):
    """Test cases for the Möbius action and decimal rendering."""

    def test_mobius_infinity(self):
        """None stands for infinity on both sides."""
        self.assertEqual(mobius(None, 1, 0, 3, 1), Rational(Fraction(1, 3)))
        self.assertIsNone(mobius(None, 1, 0, 0, 1))
        self.assertIsNone(mobius(Rational(Fraction(-1, 3)), 1, 0, 3, 1))

    def test_mobius_exact(self):
        """Exact inputs map exactly."""
        self.assertEqual(mobius(Rational(Fraction(7, 3)), 0, 1, 1, -2), Rational(Fraction(3)))

    def test_format_fixed(self):
        """Rounding is done on the exact value."""
        self.assertEqual(format_fixed(Fraction(2, 3), 6), "0.666667")
        self.assertEqual(format_fixed(Fraction(-1, 8), 2), "-0.12")
        self.assertEqual(format_fixed(Fraction(5), 0), "5")

    def test_json_round_trip(self):
        """to_json and real_from_json are inverse."""
        for text in ("7/3", "(1+sqrt(5))/2", "-sqrt(3)"):
            value = parse_real(text)
            self.assertEqual(real_from_json(value.to_json()), value)
        pi = parse_real("pi")
        self.assertEqual(real_from_json(pi.to_json()).bounds(), pi.bounds())


class TestEnclosuresAndIdentities(unittest.TestCase):
    """Identities that must hold across representations and precisions."""

    PI_100 = Fraction("3.1415926535897932384626433832795028841971693993751058209749445923"
                      "078164062862089986280348253421170679")

    def test_enclosures_at_several_precisions(self):
        """Every precision gives a certified enclosure of pi and 1/pi."""
        below, above = self.PI_100, self.PI_100 + Fraction(1, 10 ** 100)
        for prec in (64, 128, 256):
            pi = parse_real("pi", prec)
            self.assertLessEqual(pi.lo, below, prec)
            self.assertGreaterEqual(pi.hi, above, prec)
            inverse = parse_real("1/pi", prec)
            self.assertLess(inverse.lo * above, 1, prec)
            self.assertGreater(inverse.hi * below, 1, prec)
        self.assertLess(parse_real("pi", 256).width, parse_real("pi", 64).width)

    def test_interval_bounds_are_plain_integers(self):
        """Bounds never carry the big-integer type of the mpmath backend."""
        for text in ("1/pi", "e", "pi"):
            for bound in parse_real(text).bounds():
                self.assertIs(type(bound.numerator), int, text)
                self.assertIs(type(bound.denominator), int, text)
        self.assertIs(type(parse_real("1/pi").floor()), int)

    def test_as_real_accepts_backend_integers(self):
        """mpmath integers are rationals like any other."""
        value = as_real(libmp.MPZ(3))
        self.assertEqual(value, Rational(Fraction(3)))
        self.assertIs(type(value.value.numerator), int)
        with self.assertRaises(TypeError):
            as_real(0.5)

    def test_ceil_is_minus_floor_of_negation(self):
        """ceil(x) = -floor(-x) for every kind of real."""
        samples = ["7/3", "-2", "0", "(1+sqrt(5))/2", "(1-sqrt(5))/2", "-sqrt(7)", "pi", "1/pi", "-e"]
        for text in samples:
            x = parse_real(text)
            self.assertEqual(x.ceil(), -(-x).floor(), text)

    def test_mixed_division(self):
        """Surds divide by rationals and rationals by surds."""
        golden = parse_real("(1+sqrt(5))/2")
        self.assertEqual(golden / Rational(Fraction(3)), make_surd(1, 1, 6, 5))
        self.assertEqual(golden / 3, make_surd(1, 1, 6, 5))
        self.assertEqual(Rational(Fraction(1)) / golden, make_surd(-1, 1, 2, 5))
        self.assertEqual(2 / parse_real("sqrt(2)"), parse_real("sqrt(2)"))
        self.assertEqual(parse_real("sqrt(2)/2"), QuadSurd(0, 1, 2, 2))
        self.assertEqual(golden / golden, Rational(Fraction(1)))
        with self.assertRaises(DivisionByZeroError):
            golden / 0

    def test_identity_map_fixes_surds(self):
        golden = parse_real("(1+sqrt(5))/2")
        self.assertEqual(mobius(golden, 1, 0, 0, 1), golden)
        self.assertEqual(mobius(golden, 1, 1, 0, 2), make_surd(3, 1, 4, 5))

    def test_continued_fraction_of_one_over_pi(self):
        """Digits of 1/pi come out of the interval stream at the default precision."""
        from src.cfrac import plus_cf
        self.assertEqual([step.digit for step in plus_cf(parse_real("1/pi"), 5)], [0, 3, 7, 15, 1])


if __name__ == "__main__":
    unittest.main()
