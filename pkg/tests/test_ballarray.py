"""
Tests for vectorised midpoint-radius enclosures.
"""

import operator
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from numerics.ballarray import BallArray, convolve
from numerics.errors import MixedArithmeticError, NotInvertibleError
from numerics.interval import ComplexInterval, Interval

elements = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False, allow_subnormal=False)


def ball_contains(ball: BallArray, exact_values) -> bool:
    """Exact rational check that every value lies within its ball."""
    for idx in np.ndindex(ball.shape):
        q = exact_values[idx] if ball.ndim else exact_values
        if abs(q - Fraction(float(ball.mid[idx]))) > Fraction(float(ball.rad[idx])):
            return False
    return True


def fraction_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    fa = np.vectorize(Fraction, otypes=[object])(a)
    fb = np.vectorize(Fraction, otypes=[object])(b)
    return fa.dot(fb)


@pytest.mark.unit
class TestBallArrayConstruction:
    """Promotion rules and conversions."""

    def test_exact_has_zero_radius(self):
        """exact() promotes binary64 data to point balls."""
        b = BallArray.exact([1.0, 2.0])
        assert np.all(b.rad == 0.0)
        assert not b.is_complex

    def test_negative_radius_rejected(self):
        """Radii must be nonnegative."""
        with pytest.raises(ValueError):
            BallArray([1.0], [-1.0])

    def test_binary64_mixing_refused(self):
        """Floats, numpy scalars and raw arrays are refused as operands."""
        b = BallArray.exact([1.0, 2.0])
        with pytest.raises(MixedArithmeticError):
            b + 0.5
        with pytest.raises(MixedArithmeticError):
            b * np.float64(2.0)
        with pytest.raises(MixedArithmeticError):
            b + np.ones(2)

    def test_integers_promote(self):
        """Integers combine with balls exactly."""
        b = BallArray.exact([1.0, 2.0]) * 2
        assert np.array_equal(b.mid, [2.0, 4.0])

    def test_from_fractions(self):
        """from_fractions encloses non-representable rationals."""
        b = BallArray.from_fractions(np.array([Fraction(1, 3), Fraction(1, 2)], dtype=object))
        assert ball_contains(b, np.array([Fraction(1, 3), Fraction(1, 2)], dtype=object))
        assert b.rad[1] == 0.0

    def test_to_scalar_rectangle(self):
        """A complex disk converts to a rectangle containing it."""
        z = BallArray(np.asarray(1 + 1j), 0.5).to_scalar()
        assert isinstance(z, ComplexInterval)
        assert z.re.contains(Interval(0.5, 1.5))
        assert z.im.contains(Interval(0.5, 1.5))

    def test_from_intervals_round_trip(self):
        """from_intervals followed by to_intervals keeps containment."""
        x = [Interval(0.0, 1.0), Interval(2.0)]
        back = BallArray.from_intervals(x).to_intervals()
        assert back[0].contains(x[0]) and back[1].contains(x[1])


@pytest.mark.unit
class TestBallArrayArithmetic:
    """Rigorous rounding-error accounting."""

    def test_reciprocal_of_zero_containing(self):
        """A ball containing zero has no reciprocal."""
        with pytest.raises(NotInvertibleError):
            BallArray([1.0], [2.0]).reciprocal()

    def test_division_encloses_third(self):
        """1/3 computed with balls encloses the rational 1/3."""
        third = BallArray.exact([1.0]) / BallArray.exact([3.0])
        assert ball_contains(third, np.array([Fraction(1, 3)], dtype=object))

    def test_mag_and_mig(self):
        """mag and mig bound |z| over the ball."""
        b = BallArray([3.0, -0.5], [1.0, 1.0])
        assert np.all(b.mag() >= [4.0, 1.5])
        assert b.mig()[0] <= 2.0 and b.mig()[1] == 0.0

    def test_widen_and_select(self):
        """widen grows radii, select zeroes masked entries."""
        b = BallArray.exact([1.0, 2.0]).widen(0.25)
        assert np.all(b.rad >= 0.25)
        s = b.select([True, False])
        assert s.mid[1] == 0.0 and s.rad[1] == 0.0

    @pytest.mark.property
    @given(arrays(np.float64, (4, 3), elements=elements), arrays(np.float64, (3, 2), elements=elements))
    def test_matmul_encloses(self, a, b):
        """Ball matrix products enclose the exact rational product."""
        product = BallArray.exact(a) @ BallArray.exact(b)
        assert ball_contains(product, fraction_matmul(a, b))

    @pytest.mark.property
    @given(arrays(np.float64, 5, elements=elements), arrays(np.float64, 4, elements=elements))
    def test_convolve_encloses(self, a, b):
        """Ball convolutions enclose the exact rational convolution."""
        fa = [Fraction(v) for v in a]
        fb = [Fraction(v) for v in b]
        full = np.array(
            [sum((fa[i] * fb[k - i] for i in range(len(fa)) if 0 <= k - i < len(fb)), Fraction(0)) for k in range(8)],
            dtype=object,
        )
        assert ball_contains(convolve(BallArray.exact(a), BallArray.exact(b)), full)

    @pytest.mark.property
    @given(arrays(np.float64, 6, elements=elements), arrays(np.float64, 6, elements=elements))
    def test_sum_and_products_enclose(self, a, b):
        """Elementwise products and their sum enclose the exact dot product."""
        total = (BallArray.exact(a) * BallArray.exact(b)).sum()
        exact_dot = sum((Fraction(x) * Fraction(y) for x, y in zip(a, b)), Fraction(0))
        assert ball_contains(total, exact_dot)


@pytest.mark.property
class TestContainmentSweep:
    """Seeded sweep of 10^5 operand pairs against exact rational arithmetic."""

    CASES = 100_000

    @pytest.fixture(scope="class")
    def operands(self):
        rng = np.random.default_rng(20240611)
        magnitude = 10.0 ** rng.uniform(-6, 6, size=(2, self.CASES))
        a, b = rng.normal(size=(2, self.CASES)) * magnitude
        return a, b

    @pytest.mark.parametrize("op", [operator.add, operator.sub, operator.mul, operator.truediv])
    def test_elementwise_encloses(self, operands, op):
        """Every elementwise result contains the exact rational value."""
        a, b = operands
        ball = op(BallArray.exact(a), BallArray.exact(b))
        exact_values = np.array([op(Fraction(x), Fraction(y)) for x, y in zip(a, b)], dtype=object)
        assert ball_contains(ball, exact_values)
