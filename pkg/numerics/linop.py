"""
Interval matrices and tail-extended operators on truncated sequence coordinates.

Coordinates of a product space are laid out as

    [ u(1) coords | u(2) coords | u(3) coords | scalar slots ]

where a Taylor component contributes its (K+1)^2 coefficients in row-major
(k1, k2) order and a Chebyshev component its K+1 coefficients. Every norm
and every assembled derivative in the proof stages uses this one layout.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import linalg

from .ballarray import BallArray, upper, lower
from .errors import SingularMatrixError
from .interval import ComplexInterval, Interval
from .seqspace import ChebSeq, Taylor2Seq, VecSeq3, cheb_weights, taylor_weights

logger = logging.getLogger(__name__)

Vector = Union[np.ndarray, BallArray]


@dataclass(frozen=True)
class WeightProfile:
    """Per-coordinate weights, held as lower and upper binary64 bounds."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        if self.lo.shape != self.hi.shape or np.any(self.lo <= 0):
            raise ValueError("weights must be positive and the bounds must have equal shape")

    def __len__(self) -> int:
        return self.lo.shape[0]

    @classmethod
    def ones(cls, n: int) -> "WeightProfile":
        return cls(np.ones(n), np.ones(n))

    @classmethod
    def concat(cls, parts: Sequence["WeightProfile"]) -> "WeightProfile":
        return cls(np.concatenate([p.lo for p in parts]), np.concatenate([p.hi for p in parts]))


@dataclass(frozen=True)
class CoordinateLayout:
    """Flattening of (VecSeq3, scalar slots) into one coordinate vector."""

    kind: str
    K: int
    n_scalars: int = 0

    def __post_init__(self):
        if self.kind not in ("taylor", "chebyshev"):
            raise ValueError(f"unknown sequence kind {self.kind!r}")

    @property
    def block_size(self) -> int:
        return (self.K + 1) ** 2 if self.kind == "taylor" else self.K + 1

    @property
    def size(self) -> int:
        return 3 * self.block_size + self.n_scalars

    def component_slice(self, i: int) -> slice:
        n = self.block_size
        return slice(i * n, (i + 1) * n)

    @property
    def scalar_slice(self) -> slice:
        return slice(3 * self.block_size, self.size)

    def weights(self, weight) -> WeightProfile:
        if self.kind == "taylor":
            lo, hi = taylor_weights(self.K, self.K, weight)
            block = WeightProfile(lo.ravel(), hi.ravel())
        else:
            block = WeightProfile(*cheb_weights(self.K, weight))
        return WeightProfile.concat([block, block, block, WeightProfile.ones(self.n_scalars)])

    def flatten(self, x: "ProductVector") -> Vector:
        if len(x.scalars) != self.n_scalars:
            raise ValueError(f"layout expects {self.n_scalars} scalar slots, got {len(x.scalars)}")
        blocks = [c.truncate(self.K).coeffs for c in x.seq]
        if x.seq.is_rigorous:
            parts = [b.ravel() for b in blocks]
            if self.n_scalars:
                parts.append(BallArray.stack([BallArray.coerce(s) for s in x.scalars]))
            return BallArray.concatenate(parts)
        parts = [np.ravel(b) for b in blocks]
        if self.n_scalars:
            parts.append(np.asarray(x.scalars))
        return np.concatenate(parts)

    def unflatten(self, v: Vector) -> "ProductVector":
        if v.shape != (self.size,):
            raise ValueError(f"coordinate vector of shape {v.shape} does not match layout size {self.size}")
        seq_type = Taylor2Seq if self.kind == "taylor" else ChebSeq
        shape = (self.K + 1, self.K + 1) if self.kind == "taylor" else (self.K + 1,)
        comps = tuple(seq_type(v[self.component_slice(i)].reshape(shape)) for i in range(3))
        tail = v[self.scalar_slice]
        if isinstance(v, BallArray):
            scalars = tuple(tail[i].to_scalar() for i in range(self.n_scalars))
        else:
            scalars = tuple(tail.tolist())
        return ProductVector(VecSeq3(comps), scalars)


@dataclass(frozen=True)
class ProductVector:
    """Element (u, scalars) of a product space: a sequence triple and scalar slots."""

    seq: VecSeq3
    scalars: tuple = field(default=())

    def project(self, K: int) -> "ProductVector":
        return ProductVector(self.seq.project(K), self.scalars)

    def tail(self, K: int) -> "ProductVector":
        zero = tuple(s * 0 for s in self.scalars)
        return ProductVector(self.seq.tail(K), zero)

    def rigorous(self) -> "ProductVector":
        scalars = tuple(s if isinstance(s, (Interval, ComplexInterval)) else BallArray.exact(np.asarray(s)).to_scalar() for s in self.scalars)
        return ProductVector(self.seq.rigorous(), scalars)


def _scalar_abs(s) -> Interval:
    if isinstance(s, (Interval, ComplexInterval)):
        return abs(s)
    ball = BallArray.exact(np.asarray(s))
    return Interval(float(ball.mig()), float(ball.mag()))


def vector_norm(v: Vector, w: WeightProfile | None = None) -> Interval:
    """Weighted l1 norm of a coordinate vector (plain l1 when no weights are given)."""
    ball = v if isinstance(v, BallArray) else BallArray.exact(np.asarray(v))
    ball = ball.ravel()
    w = w if w is not None else WeightProfile.ones(ball.size)
    n = ball.size
    return Interval(float(lower(w.lo @ ball.mig(), n + 2)), float(upper(w.hi @ ball.mag(), n + 2)))


def product_space_norm(x: ProductVector, weight) -> Interval:
    """Sum of the component sequence norms plus the moduli of the scalar slots."""
    total = x.seq.norm(weight)
    for s in x.scalars:
        total = total + _scalar_abs(s)
    return total


class IntervalMatrix:
    """Dense matrix of real intervals or complex disks backed by a BallArray."""

    __slots__ = ("ball",)

    def __init__(self, ball: BallArray):
        if ball.ndim != 2:
            raise ValueError(f"IntervalMatrix needs a 2-D ball array, got shape {ball.shape}")
        self.ball = ball

    @classmethod
    def from_float(cls, M: np.ndarray) -> "IntervalMatrix":
        return cls(BallArray.exact(np.atleast_2d(M)))

    @classmethod
    def from_intervals(cls, rows) -> "IntervalMatrix":
        return cls(BallArray.from_intervals(rows))

    @classmethod
    def identity(cls, n: int) -> "IntervalMatrix":
        return cls.from_float(np.eye(n))

    @property
    def shape(self) -> tuple[int, int]:
        return self.ball.shape

    @property
    def mid(self) -> np.ndarray:
        return self.ball.mid

    def __getitem__(self, ij) -> Interval | ComplexInterval:
        return self.ball[ij].to_scalar()

    def __matmul__(self, other):
        if isinstance(other, IntervalMatrix):
            return IntervalMatrix(self.ball @ other.ball)
        if isinstance(other, np.ndarray):
            other = BallArray.exact(other)
        return self.ball @ other

    def __sub__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        return IntervalMatrix(self.ball - other.ball)

    def __repr__(self) -> str:
        return f"IntervalMatrix(shape={self.shape})"


def _as_ball(M) -> BallArray:
    if isinstance(M, IntervalMatrix):
        return M.ball
    if isinstance(M, BallArray):
        return M
    return BallArray.exact(np.asarray(M))


def column_norms(M, w_out: WeightProfile) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper bounds of sum_k |M_kl| w_out(k) for every column l."""
    ball = _as_ball(M)
    if ball.shape[0] != len(w_out):
        raise ValueError(f"row weights of length {len(w_out)} do not match {ball.shape[0]} rows")
    n = ball.shape[0]
    hi = upper(w_out.hi @ ball.mag(), n + 2)
    lo = lower(w_out.lo @ ball.mig(), n + 2)
    return lo, hi


def weighted_opnorm(M, w_out: WeightProfile, w_in: WeightProfile) -> Interval:
    """Induced norm between weighted l1 spaces: sup_l (sum_k |M_kl| w_out(k)) / w_in(l)."""
    ball = _as_ball(M)
    if ball.shape[1] != len(w_in):
        raise ValueError(f"column weights of length {len(w_in)} do not match {ball.shape[1]} columns")
    if ball.shape[1] == 0:
        return Interval(0.0)
    lo, hi = column_norms(ball, w_out)
    return Interval(float(np.max(lower(lo / w_in.hi, 1))), float(np.max(upper(hi / w_in.lo, 1))))


def approx_inverse_float(M: np.ndarray) -> np.ndarray:
    """Numerical inverse via partial-pivoting LU; no rigor is claimed."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"approximate inverse needs a square matrix, got shape {M.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("error", linalg.LinAlgWarning)
        try:
            lu, piv = linalg.lu_factor(M, check_finite=True)
        except (linalg.LinAlgWarning, ValueError) as exc:
            raise SingularMatrixError(f"matrix is singular to working precision: {exc}") from exc
    diag = np.abs(np.diag(lu))
    if diag.min() <= np.finfo(np.float64).eps * max(diag.max(), 1.0) * M.shape[0]:
        raise SingularMatrixError("matrix is singular to working precision")
    A = linalg.lu_solve((lu, piv), np.eye(M.shape[0], dtype=lu.dtype))
    logger.debug("approximate inverse of a %dx%d matrix", *M.shape)
    return A


@dataclass(frozen=True)
class SeqOperator:
    """Finite block on the truncated coordinates, identity on the tail when tail_identity is set."""

    finite_block: IntervalMatrix
    layout: CoordinateLayout
    tail_identity: bool = True

    def __post_init__(self):
        n = self.layout.size
        if self.finite_block.shape != (n, n):
            raise ValueError(f"finite block of shape {self.finite_block.shape} does not match layout size {n}")

    def matvec(self, x: ProductVector) -> ProductVector:
        K = self.layout.K
        xr = x.rigorous()
        head = self.layout.unflatten(self.finite_block @ self.layout.flatten(xr.project(K)))
        if not self.tail_identity:
            return head
        tail = xr.seq.tail(K)
        seq = VecSeq3(tuple(h + t for h, t in zip(head.seq, tail)))
        return ProductVector(seq, head.scalars)

    def finite_opnorm(self, weight) -> Interval:
        w = self.layout.weights(weight)
        return weighted_opnorm(self.finite_block, w, w)

    def opnorm(self, weight) -> Interval:
        """max(||A_K||, 1) for the tail-extended operator."""
        n = self.finite_opnorm(weight)
        if not self.tail_identity:
            return n
        return Interval(max(n.lo, 1.0), max(n.hi, 1.0))


def matvec(A: SeqOperator, x: ProductVector) -> ProductVector:
    return A.matvec(x)


def make_tail_extended(A_finite: Union[IntervalMatrix, np.ndarray], layout: CoordinateLayout) -> SeqOperator:
    """A = A_K Pi_{<=K} + Pi_{>K}."""
    if not isinstance(A_finite, IntervalMatrix):
        A_finite = IntervalMatrix.from_float(A_finite)
    return SeqOperator(A_finite, layout, tail_identity=True)
