"""
The Shimizu-Morioka vector field f(x, y, z) = (y, x - a y - x z, -b z + x^2)
and its Jacobian, written once for every scalar ring in use.

The same functions evaluate binary64 scalars and arrays, Fractions, Intervals,
ComplexIntervals, BallArrays and the sequence algebras of ``seqspace`` (whose
``*`` is the Cauchy product or the Chebyshev convolution). The parameters are
supplied in the form matching the arguments: exact rationals for exact
arithmetic, enclosures for rigorous arithmetic and binary64 otherwise.
"""

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any

import numpy as np

from .ballarray import BallArray
from .interval import ComplexInterval, Interval, exact
from .seqspace import VecSeq3


@dataclass(frozen=True)
class Params:
    a: Fraction = Fraction(3, 4)
    b: Fraction = Fraction(9, 20)

    @property
    def a_interval(self) -> Interval:
        return exact(self.a)

    @property
    def b_interval(self) -> Interval:
        return exact(self.b)

    @property
    def a_float(self) -> float:
        return float(self.a)

    @property
    def b_float(self) -> float:
        return float(self.b)

    def for_values(self, sample) -> tuple[Any, Any]:
        """(a, b) in the scalar ring of `sample`."""
        if _is_enclosure(sample):
            return self.a_interval, self.b_interval
        if isinstance(sample, Rational) and not isinstance(sample, bool):
            return self.a, self.b
        return self.a_float, self.b_float


def _is_enclosure(value) -> bool:
    if isinstance(value, (Interval, ComplexInterval, BallArray)):
        return True
    return bool(getattr(value, "is_rigorous", False))


def _wrap(u, values):
    return VecSeq3(tuple(values)) if isinstance(u, VecSeq3) else tuple(values)


def f(u, p: Params = Params()):
    """Componentwise evaluation over the ring of u."""
    x, y, z = u
    a, b = p.for_values(x)
    return _wrap(u, (y, x - a * y - x * z, -b * z + x * x))


def Df(u, p: Params = Params()) -> list[list]:
    """Jacobian [[0, 1, 0], [1 - z, -a, -x], [2x, 0, -b]] over the ring of u."""
    x, y, z = u
    a, b = p.for_values(x)
    zero = x * 0
    one = zero + 1
    return [
        [zero, one, zero],
        [one - z, zero - a, -x],
        [x * 2, zero, zero - b],
    ]


def f_array(u: np.ndarray, p: Params = Params()) -> np.ndarray:
    """Float f on an array whose leading axis holds (x, y, z)."""
    return np.stack(f(tuple(np.asarray(u)), p))


def Df_array(u: np.ndarray, p: Params = Params()) -> np.ndarray:
    x, _, z = np.asarray(u)
    return np.array(
        [
            [0.0, 1.0, 0.0],
            [1.0 - z, -p.a_float, -x],
            [2.0 * x, 0.0, -p.b_float],
        ],
        dtype=np.result_type(x, z, np.float64),
    )


def Df_box(box, p: Params = Params()) -> BallArray:
    """Rigorous 3x3 enclosure of Df over a box of Interval/ComplexInterval components."""
    return BallArray.from_intervals(Df(tuple(box), p))


@dataclass(frozen=True)
class MultiplierTable:
    """Df(P) for a sequence triple P.

    Entry (i, j) is the multiplier m with (Df(P) h)_i = sum_j m_ij * h_j: a
    sequence, a scalar constant, or None for an identically zero block.
    """

    entries: tuple[tuple[Any, Any, Any], ...]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def as_sequence(self, i: int, j: int, like):
        """Entry (i, j) as a sequence on the backend of `like` (None stays None)."""
        m = self.entries[i][j]
        if m is None or hasattr(m, "coeffs"):
            return m
        return like.constant_like(m)

    def opnorm(self, weight) -> Interval:
        """Bound on ||Df(P)||: the largest column sum of multiplier norms (Banach algebra)."""
        best = Interval(0.0)
        for j in range(3):
            col = Interval(0.0)
            for i in range(3):
                m = self.entries[i][j]
                if m is None:
                    continue
                if hasattr(m, "coeffs"):
                    col = col + m.norm(weight)
                else:
                    col = col + abs(m if isinstance(m, (Interval, ComplexInterval)) else exact(m))
            best = Interval(max(best.lo, col.lo), max(best.hi, col.hi))
        return best


def df_vecfield_seq(P: VecSeq3, p: Params = Params()) -> MultiplierTable:
    """Multiplication-operator descriptors of Df at the sequence triple P."""
    x, _, z = P
    a, b = p.for_values(x)
    return MultiplierTable(
        (
            (None, 1, None),
            (1 - z, -a, -x),
            (x * 2, None, -b),
        )
    )
