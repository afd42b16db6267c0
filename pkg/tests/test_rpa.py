"""
Tests for the contraction gate and the Newton iteration.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from numerics.interval import Interval
from numerics.rpa import interval_of_existence, newton, uniqueness_radius, upper_of, with_uniqueness
from numerics.vector_field import Df_array, f_array


def square_root_problem():
    return (lambda x: x ** 2 - 2.0), (lambda x: np.array([[2.0 * x[0]]]))


@pytest.mark.unit
class TestIntervalOfExistence:
    """r = sup Y / (1 - sup Z) on success."""

    def test_tiny_defect(self):
        """A near-exact solution gives a radius equal to the defect."""
        result = interval_of_existence(Interval(0.0, 8.27511e-17), Interval(6.9e-17, 3.33e-15), 8.27511e-16)
        assert result.success
        assert result.r_inf == pytest.approx(8.27511e-17, rel=1e-12)
        assert result.r_inf >= 8.27511e-17
        assert result.r_sup == 8.27511e-16

    def test_half_contraction(self):
        """Y = 0.1, Z = 0.5 gives r = 0.2 on an unbounded a priori ball."""
        result = interval_of_existence(Interval(0.1), Interval(0.5), math.inf)
        assert result.success
        assert result.r_inf == pytest.approx(0.2)
        assert result.r_inf >= 0.2

    def test_not_a_contraction(self):
        """Z >= 1 fails without a radius."""
        result = interval_of_existence(Interval(0.1), Interval(0.5, 1.0), math.inf)
        assert not result.success
        assert result.r_inf is None
        assert "no contraction" in str(result)

    def test_radius_beyond_a_priori_ball(self):
        """A radius larger than R fails but is still reported."""
        result = interval_of_existence(Interval(0.1), Interval(0.5), 0.1)
        assert not result.success
        assert result.r_inf == pytest.approx(0.2)

    def test_negative_inputs(self):
        """Negative bounds and radii are refused."""
        with pytest.raises(ValueError):
            interval_of_existence(Interval(-1.0, -0.5), Interval(0.5), 1.0)
        with pytest.raises(ValueError):
            interval_of_existence(Interval(0.1), Interval(0.5), -1.0)

    def test_display(self):
        """The printed form lists the radius interval and the outcome."""
        result = interval_of_existence(Interval(0.1), Interval(0.5), 1.0)
        assert str(result) == "([0.2, 1], true)"


@pytest.mark.unit
class TestUniqueness:
    """The larger root of Z1_rate r^2 - (1 - Z0) r + Y."""

    def test_root(self):
        """0.1 r^2 - 0.5 r + 0.1 = 0 at r = (0.5 + sqrt(0.21)) / 0.2."""
        r = uniqueness_radius(Interval(0.1), Interval(0.5), Interval(0.1), math.inf)
        assert r == pytest.approx(4.79129, rel=1e-5)
        assert r <= (0.5 + math.sqrt(0.21)) / 0.2 + 1e-12

    def test_capped_by_R(self):
        """The uniqueness radius never exceeds R."""
        assert uniqueness_radius(Interval(0.1), Interval(0.5), Interval(0.1), 1.0) == 1.0
        assert uniqueness_radius(Interval(0.1), Interval(0.5), Interval(0.0), 3.0) == 3.0

    def test_no_positive_root(self):
        """A negative discriminant gives no uniqueness radius."""
        assert uniqueness_radius(Interval(1.0), Interval(0.5), Interval(1.0), math.inf) is None
        assert uniqueness_radius(Interval(0.1), Interval(1.0), Interval(0.1), math.inf) is None

    def test_attached_to_success_only(self):
        """with_uniqueness leaves failed results untouched."""
        good = with_uniqueness(interval_of_existence(Interval(0.1), Interval(0.5), math.inf), Interval(0.5), Interval(0.1))
        assert good.r_unique == pytest.approx(4.79129, rel=1e-5)
        bad = interval_of_existence(Interval(0.1), Interval(1.5), math.inf)
        assert with_uniqueness(bad, Interval(1.5), Interval(0.1)) is bad


@pytest.mark.unit
class TestNewton:
    """Plain Newton iteration."""

    def test_square_root(self):
        """x^2 = 2 from x = 1."""
        F, DF = square_root_problem()
        result = newton(F, DF, np.array([1.0]))
        assert result.success
        assert result.x[0] == pytest.approx(math.sqrt(2.0), rel=1e-15)
        assert result.residuals[-1] <= 1e-14
        assert result.iterations == len(result.residuals) - 1

    def test_projection(self):
        """The projection is applied after every step."""
        F, DF = square_root_problem()
        result = newton(F, DF, np.array([-1.0]), project=np.abs)
        assert result.success
        assert result.x[0] > 0

    def test_singular_jacobian(self):
        """A singular Jacobian stops the iteration with a message."""
        result = newton(lambda x: x - 1.0, lambda x: np.zeros((1, 1)), np.array([0.0]))
        assert not result.success
        assert result.message.startswith("singular Jacobian")

    def test_iteration_limit(self):
        """Too few steps from a far start fail above tolerance."""
        F, DF = square_root_problem()
        result = newton(F, DF, np.array([100.0]), max_iter=1)
        assert not result.success
        assert "above tolerance" in result.message

    def test_already_converged(self):
        """A starting point within tolerance needs no step."""
        result = newton(lambda x: x, lambda x: np.eye(1), np.array([0.0]))
        assert result.success
        assert result.iterations == 0

    def test_quadratic_convergence_at_c1(self):
        """Residuals at the nontrivial equilibrium square from step to step."""
        result = newton(f_array, Df_array, np.array([0.75, 0.05, 1.1]))
        assert result.success
        assert np.allclose(result.x, [math.sqrt(0.45), 0.0, 1.0], atol=1e-14)
        r = result.residuals
        ratios = [r[k + 1] / r[k] ** 2 for k in range(len(r) - 1) if r[k + 1] > 1e-13]
        assert len(ratios) >= 2
        assert max(ratios) < 100.0

    def test_upper_of(self):
        """upper_of rounds exact rationals up."""
        assert Fraction(upper_of(Fraction(1, 3))) >= Fraction(1, 3)
        assert upper_of(Interval(0.0, 2.0)) == 2.0
