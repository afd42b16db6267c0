"""
Tests for the vector field, its Jacobian and the multiplication-operator table.
"""

from fractions import Fraction

import numpy as np
import pytest

from numerics.interval import Interval, exact, sqrt
from numerics.seqspace import ChebSeq, VecSeq3
from numerics.vector_field import Df, Df_array, Df_box, Params, df_vecfield_seq, f, f_array

MU = Fraction(21, 20)


def constant_triple(values) -> VecSeq3:
    return VecSeq3(tuple(ChebSeq(np.array([v])) for v in values))


@pytest.mark.unit
class TestVectorField:
    """f and Df over every scalar ring."""

    def test_exact_rationals(self):
        """Fractions stay exact."""
        out = f((Fraction(1), Fraction(2), Fraction(3)))
        assert out == (Fraction(2), Fraction(-7, 2), Fraction(-7, 20))

    def test_equilibria(self):
        """The origin and (sqrt(b), 0, 1) are zeros of f."""
        assert np.array_equal(f_array(np.zeros(3)), np.zeros(3))
        x = sqrt(exact(Fraction(9, 20)))
        for component in f((x, Interval(0.0), Interval(1.0))):
            assert component.contains(0)

    def test_vectorised(self):
        """f_array maps a (3, n) array of points to a (3, n) array."""
        u = np.random.default_rng(0).normal(size=(3, 5))
        out = f_array(u)
        assert out.shape == (3, 5)
        assert np.allclose(out[:, 2], f_array(u[:, 2]))

    def test_generic_jacobian_matches_array(self):
        """The generic Jacobian agrees with the float one."""
        u = (0.3, -1.2, 0.8)
        assert np.allclose(np.array(Df(u), dtype=float), Df_array(np.array(u)))

    def test_jacobian_finite_differences(self):
        """Df matches central differences of f at random points."""
        rng = np.random.default_rng(11)
        h = 1e-6
        for u in rng.normal(size=(20, 3)):
            J = Df_array(u)
            for j in range(3):
                e = np.zeros(3)
                e[j] = h
                fd = (f_array(u + e) - f_array(u - e)) / (2 * h)
                assert np.allclose(J[:, j], fd, atol=1e-7)

    def test_jacobian_box_encloses(self):
        """Df over a box contains Df at every point of the box."""
        box = [Interval(0.5, 0.7), Interval(-0.1, 0.1), Interval(0.9, 1.1)]
        J = Df_box(box)
        for u in ([0.55, -0.05, 0.95], [0.6, 0.0, 1.0], [0.65, 0.05, 1.05]):
            assert np.all(J.contains(Df_array(np.array(u))))

    def test_custom_parameters(self):
        """Parameters are passed in the ring of the arguments."""
        p = Params(a=Fraction(1, 2), b=Fraction(1, 4))
        assert p.for_values(Fraction(1)) == (Fraction(1, 2), Fraction(1, 4))
        assert p.for_values(1.0) == (0.5, 0.25)
        a, _ = p.for_values(Interval(1.0))
        assert a == Interval(0.5)
        assert Df_array(np.zeros(3), p)[1, 1] == -0.5


@pytest.mark.unit
class TestSequenceField:
    """f and Df acting on sequence triples."""

    def test_constant_sequences(self):
        """f of constant sequences is the constant f."""
        u = (0.4, -0.3, 1.2)
        out = f(constant_triple(u))
        assert isinstance(out, VecSeq3)
        assert np.allclose([c.coeffs[0] for c in out], f_array(np.array(u)))

    def test_multiplier_table(self):
        """The zero pattern and constant entries of Df(P)."""
        table = df_vecfield_seq(constant_triple((0.0, 0.0, 0.0)))
        assert table[0, 0] is None and table[0, 2] is None and table[2, 1] is None
        assert table[0, 1] == 1
        assert table[1, 1] == -0.75
        assert table[2, 2] == -0.45

    def test_as_sequence(self):
        """Constant entries are lifted onto the backend of the template."""
        P = constant_triple((0.0, 0.0, 0.0))
        table = df_vecfield_seq(P)
        one = table.as_sequence(0, 1, P[0])
        assert isinstance(one, ChebSeq)
        assert one.coeffs[0] == 1.0
        assert table.as_sequence(0, 0, P[0]) is None
        rigorous = df_vecfield_seq(P.rigorous()).as_sequence(1, 1, P[0].rigorous())
        assert rigorous.is_rigorous
        assert rigorous.coeffs[0].to_scalar().contains(-0.75)

    def test_opnorm_at_origin(self):
        """At P = 0 the largest column is |1| + |-a| = 1.75."""
        P = constant_triple((0.0, 0.0, 0.0))
        assert df_vecfield_seq(P).opnorm(MU).contains(1.75)
        assert df_vecfield_seq(P.rigorous()).opnorm(MU).contains(1.75)
