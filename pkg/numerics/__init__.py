"""
Rigorous numerics: outward-rounded intervals, ball arrays, weighted sequence
spaces, interval linear algebra and the radii-polynomial contraction gate.
"""

from .ballarray import BallArray
from .errors import (
    DomainError,
    MixedArithmeticError,
    NotInvertibleError,
    NumericsError,
    ResonanceError,
    SingularMatrixError,
)
from .interval import ComplexInterval, Interval, exact, midpoint_radius, unit_circle
from .linop import (
    CoordinateLayout,
    IntervalMatrix,
    ProductVector,
    SeqOperator,
    WeightProfile,
    approx_inverse_float,
    make_tail_extended,
    product_space_norm,
    weighted_opnorm,
)
from .rpa import ExistenceResult, NewtonResult, interval_of_existence, newton
from .seqspace import ChebSeq, Taylor2Seq, VecSeq3
from .vector_field import Params, Df, df_vecfield_seq, f

__all__ = [
    "BallArray",
    "ChebSeq",
    "ComplexInterval",
    "CoordinateLayout",
    "Df",
    "DomainError",
    "ExistenceResult",
    "Interval",
    "IntervalMatrix",
    "MixedArithmeticError",
    "NewtonResult",
    "NotInvertibleError",
    "NumericsError",
    "Params",
    "ProductVector",
    "ResonanceError",
    "SeqOperator",
    "SingularMatrixError",
    "Taylor2Seq",
    "VecSeq3",
    "WeightProfile",
    "approx_inverse_float",
    "df_vecfield_seq",
    "exact",
    "f",
    "interval_of_existence",
    "make_tail_extended",
    "midpoint_radius",
    "newton",
    "product_space_norm",
    "unit_circle",
    "weighted_opnorm",
]

__version__ = "0.1.0"
