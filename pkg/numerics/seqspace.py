"""
Truncated coefficient sequences for the weighted l1 algebras used by the proofs.

Taylor2Seq holds bivariate Taylor coefficients u_(k1,k2) (norm
sum |u_k| nu^(k1+k2), Cauchy product). ChebSeq holds one-sided Chebyshev
coefficients of u(s) = u_0 + 2 sum_{k>=1} u_k T_k(s) (norm
|u_0| + 2 sum |u_k| mu^k, discrete convolution). VecSeq3 is a triple of
either kind.

Coefficients are stored densely either as a numpy array (the float path used
by Newton and tuning) or as a BallArray (the rigorous path used by the
bounds). The two paths share every operation; combining them requires an
explicit ``rigorous()`` promotion.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Union

import numpy as np
from scipy import signal

from .ballarray import BallArray, convolve, weighted_sum_lower, weighted_sum_upper
from .errors import DomainError, MixedArithmeticError, NotInvertibleError, ResonanceError
from .interval import ComplexInterval, Interval, exact

Coeffs = Union[np.ndarray, BallArray]
Enclosure = Union[Interval, ComplexInterval, BallArray]


def _is_ball(c) -> bool:
    return isinstance(c, BallArray)


def _same_backend(a: Coeffs, b: Coeffs) -> None:
    if _is_ball(a) != _is_ball(b):
        raise MixedArithmeticError("float and rigorous sequences cannot be mixed; call rigorous() first")


def _pad(c: Coeffs, shape: tuple[int, ...]) -> Coeffs:
    widths = [(0, s - cs) for s, cs in zip(shape, c.shape)]
    if not any(w for _, w in widths):
        return c
    return c.pad(widths) if _is_ball(c) else np.pad(c, widths)


def _scale(c: Coeffs, scalar) -> Coeffs:
    if _is_ball(c):
        return c * BallArray.coerce(scalar)
    if isinstance(scalar, (Interval, ComplexInterval, BallArray)):
        raise MixedArithmeticError("float sequence scaled by an enclosure; call rigorous() first")
    return c * scalar


def _conv(a: Coeffs, b: Coeffs) -> Coeffs:
    _same_backend(a, b)
    if _is_ball(a):
        return convolve(a, b)
    return signal.convolve(a, b, mode="full", method="direct")


def _abs_bounds(c: Coeffs) -> tuple[np.ndarray, np.ndarray]:
    ball = c if _is_ball(c) else BallArray.exact(c)
    return ball.mig(), ball.mag()


# -- weights ---------------------------------------------------------------


@lru_cache(maxsize=128)
def _powers(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    base = Interval(lo, hi)
    p = Interval(1.0)
    out_lo, out_hi = [1.0], [1.0]
    for _ in range(n):
        p = p * base
        out_lo.append(p.lo)
        out_hi.append(p.hi)
    lo_arr, hi_arr = np.array(out_lo), np.array(out_hi)
    lo_arr.setflags(write=False)
    hi_arr.setflags(write=False)
    return lo_arr, hi_arr


def weight_powers(n: int, base) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper bounds of base**k for k = 0..n."""
    b = exact(base)
    if b.lo < 0:
        raise DomainError(f"weight base {b} must be nonnegative")
    return _powers(n, b.lo, b.hi)


def taylor_weights(K1: int, K2: int, nu) -> tuple[np.ndarray, np.ndarray]:
    """Bounds of nu^(k1+k2) on the (K1+1) x (K2+1) grid."""
    lo, hi = weight_powers(K1 + K2, nu)
    deg = np.add.outer(np.arange(K1 + 1), np.arange(K2 + 1))
    return lo[deg], hi[deg]


def cheb_weights(K: int, mu) -> tuple[np.ndarray, np.ndarray]:
    """Bounds of the Chebyshev weights (1, 2mu, 2mu^2, ...)."""
    lo, hi = weight_powers(K, mu)
    lo, hi = 2.0 * lo, 2.0 * hi
    lo[0] = hi[0] = 1.0
    return lo, hi


def _norm(c: Coeffs, w_lo: np.ndarray, w_hi: np.ndarray) -> Interval:
    mig, mag = _abs_bounds(c)
    return Interval(float(weighted_sum_lower(mig, w_lo)), float(weighted_sum_upper(mag, w_hi)))


# -- Taylor ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Taylor2Seq:
    """Bivariate Taylor coefficients, row index k1, column index k2."""

    coeffs: Coeffs

    def __post_init__(self):
        if self.coeffs.ndim != 2:
            raise ValueError(f"Taylor2Seq needs a 2-D coefficient array, got shape {self.coeffs.shape}")

    @classmethod
    def zeros(cls, K1: int, K2: int, complex_: bool = False, rigorous: bool = False) -> "Taylor2Seq":
        if rigorous:
            return cls(BallArray.zeros((K1 + 1, K2 + 1), complex_=complex_))
        return cls(np.zeros((K1 + 1, K2 + 1), dtype=np.complex128 if complex_ else np.float64))

    @classmethod
    def from_dict(cls, terms: dict[tuple[int, int], complex], K1: int | None = None, K2: int | None = None) -> "Taylor2Seq":
        K1 = max(k for k, _ in terms) if K1 is None else K1
        K2 = max(k for _, k in terms) if K2 is None else K2
        dtype = np.complex128 if any(isinstance(v, complex) for v in terms.values()) else np.float64
        c = np.zeros((K1 + 1, K2 + 1), dtype=dtype)
        for (k1, k2), v in terms.items():
            c[k1, k2] = v
        return cls(c)

    @property
    def order(self) -> tuple[int, int]:
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    @property
    def is_rigorous(self) -> bool:
        return _is_ball(self.coeffs)

    @property
    def is_complex(self) -> bool:
        return self.coeffs.is_complex if self.is_rigorous else np.iscomplexobj(self.coeffs)

    def rigorous(self) -> "Taylor2Seq":
        return self if self.is_rigorous else Taylor2Seq(BallArray.exact(self.coeffs))

    def midpoint(self) -> "Taylor2Seq":
        return Taylor2Seq(self.coeffs.mid) if self.is_rigorous else self

    # -- algebra ----------------------------------------------------------

    def _lift(self, other) -> "Taylor2Seq":
        if isinstance(other, Taylor2Seq):
            return other
        return NotImplemented

    def _aligned(self, other: "Taylor2Seq") -> tuple[Coeffs, Coeffs]:
        _same_backend(self.coeffs, other.coeffs)
        shape = tuple(max(a, b) for a, b in zip(self.coeffs.shape, other.coeffs.shape))
        return _pad(self.coeffs, shape), _pad(other.coeffs, shape)

    def __add__(self, other):
        if not isinstance(other, Taylor2Seq):
            return self + self.constant_like(other)
        a, b = self._aligned(other)
        return Taylor2Seq(a + b)

    __radd__ = __add__

    def __neg__(self) -> "Taylor2Seq":
        return Taylor2Seq(-self.coeffs)

    def __sub__(self, other):
        if not isinstance(other, Taylor2Seq):
            return self - self.constant_like(other)
        a, b = self._aligned(other)
        return Taylor2Seq(a - b)

    def __rsub__(self, other):
        return self.constant_like(other) - self

    def __mul__(self, other):
        if isinstance(other, Taylor2Seq):
            return cauchy_product(self, other)
        return Taylor2Seq(_scale(self.coeffs, other))

    __rmul__ = __mul__

    def constant_like(self, value) -> "Taylor2Seq":
        """Order-(0,0) sequence holding `value`, on the same backend."""
        if self.is_rigorous:
            return Taylor2Seq(BallArray.coerce(value).reshape(1, 1))
        if isinstance(value, (Interval, ComplexInterval, BallArray)):
            raise MixedArithmeticError("float sequence combined with an enclosure; call rigorous() first")
        return Taylor2Seq(np.asarray([[value]]))

    # -- structure ----------------------------------------------------------

    def _index_grid(self) -> tuple[np.ndarray, np.ndarray]:
        K1, K2 = self.order
        return np.meshgrid(np.arange(K1 + 1), np.arange(K2 + 1), indexing="ij")

    def project(self, K: int) -> "Taylor2Seq":
        k1, k2 = self._index_grid()
        return self._masked(np.maximum(k1, k2) <= K)

    def tail(self, K: int) -> "Taylor2Seq":
        k1, k2 = self._index_grid()
        return self._masked(np.maximum(k1, k2) > K)

    def _masked(self, mask: np.ndarray) -> "Taylor2Seq":
        if self.is_rigorous:
            return Taylor2Seq(self.coeffs.select(mask))
        return Taylor2Seq(np.where(mask, self.coeffs, 0))

    def truncate(self, K: int) -> "Taylor2Seq":
        """Square (K+1) x (K+1) coefficient block, zero padded when needed."""
        c = _pad(self.coeffs, (max(K + 1, self.coeffs.shape[0]), max(K + 1, self.coeffs.shape[1])))
        return Taylor2Seq(c[: K + 1, : K + 1])

    def conj_swap(self) -> "Taylor2Seq":
        """Coefficients conj(u_(k2,k1)); fixed points are real-valued on conjugate pairs."""
        c = self.coeffs
        return Taylor2Seq(c.T.conj() if self.is_rigorous else np.conj(c.T))

    def norm(self, nu) -> Interval:
        K1, K2 = self.order
        w_lo, w_hi = taylor_weights(K1, K2, nu)
        return _norm(self.coeffs, w_lo, w_hi)

    def eval(self, theta1, theta2):
        return eval_taylor(self, theta1, theta2)

    def partial(self, j: int) -> "Taylor2Seq":
        return partial_taylor(self, j)


def cauchy_product(u: Taylor2Seq, w: Taylor2Seq) -> Taylor2Seq:
    """(u*w)_k = sum_{l <= k} u_{k-l} w_l; the result has the summed orders."""
    return Taylor2Seq(_conv(u.coeffs, w.coeffs))


def norm_taylor(u: Taylor2Seq, nu) -> Interval:
    return u.norm(nu)


def project(u, K: int):
    return u.project(K)


def tail(u, K: int):
    return u.tail(K)


def _enclosure_ball(value) -> BallArray:
    return BallArray.coerce(value)


def eval_taylor(u: Taylor2Seq, theta1, theta2):
    """Evaluate sum u_k theta1^k1 theta2^k2.

    On the float path theta may be complex scalars or arrays (broadcast).
    On the rigorous path theta are enclosures and an Interval or
    ComplexInterval is returned.
    """
    if not u.is_rigorous:
        if isinstance(theta1, (Interval, ComplexInterval, BallArray)):
            raise MixedArithmeticError("rigorous evaluation requires rigorous coefficients")
        return np.polynomial.polynomial.polyval2d(theta1, theta2, u.coeffs)
    t1, t2 = _enclosure_ball(theta1), _enclosure_ball(theta2)
    c = u.coeffs
    K1, K2 = u.order
    rows = c[:, K2]
    for j in range(K2 - 1, -1, -1):
        rows = rows * t2 + c[:, j]
    acc = rows[K1]
    for i in range(K1 - 1, -1, -1):
        acc = acc * t1 + rows[i]
    return acc.to_scalar()


def partial_taylor(u: Taylor2Seq, j: int) -> Taylor2Seq:
    """Coefficients of the partial derivative with respect to theta_j."""
    if j not in (1, 2):
        raise ValueError(f"partial derivative index must be 1 or 2, got {j}")
    c = u.coeffs
    K1, K2 = u.order
    if j == 1:
        if K1 == 0:
            return Taylor2Seq.zeros(0, K2, complex_=u.is_complex, rigorous=u.is_rigorous)
        factors = np.arange(1, K1 + 1, dtype=np.float64)[:, None] * np.ones((1, K2 + 1))
        body = c[1:, :]
    else:
        if K2 == 0:
            return Taylor2Seq.zeros(K1, 0, complex_=u.is_complex, rigorous=u.is_rigorous)
        factors = np.ones((K1 + 1, 1)) * np.arange(1, K2 + 1, dtype=np.float64)[None, :]
        body = c[:, 1:]
    if u.is_rigorous:
        return Taylor2Seq(body * BallArray.exact(factors))
    return Taylor2Seq(body * factors)


def lt_divisors(K1: int, K2: int, lam1, lam2) -> Coeffs:
    """Entries 1/(k1*lam1 + k2*lam2) for k1+k2 >= 2, zero elsewhere."""
    k1, k2 = np.meshgrid(np.arange(K1 + 1), np.arange(K2 + 1), indexing="ij")
    mask = (k1 + k2) >= 2
    if isinstance(lam1, (Interval, ComplexInterval, BallArray)):
        l1, l2 = BallArray.coerce(lam1), BallArray.coerce(lam2)
        divisor = BallArray.exact(k1.astype(np.float64)) * l1 + BallArray.exact(k2.astype(np.float64)) * l2
        divisor = divisor.select(mask) + BallArray.exact((~mask).astype(np.float64))
        try:
            return divisor.reciprocal().select(mask)
        except NotInvertibleError as exc:
            raise ResonanceError("resonant or near-resonant eigenvalues: k1*lambda1 + k2*lambda2 may vanish") from exc
    divisor = k1 * lam1 + k2 * lam2
    if np.any(divisor[mask] == 0):
        raise ResonanceError("resonant or near-resonant eigenvalues: k1*lambda1 + k2*lambda2 vanishes")
    return np.where(mask, 1.0 / np.where(mask, divisor, 1.0), 0.0)


def apply_LT(u: Taylor2Seq, lam1, lam2) -> Taylor2Seq:
    """Scale coefficient k by 1/(k1*lam1 + k2*lam2) when k1+k2 >= 2, zero it otherwise."""
    K1, K2 = u.order
    d = lt_divisors(K1, K2, lam1, lam2)
    _same_backend(u.coeffs, d)
    return Taylor2Seq(u.coeffs * d)


def taylor_index(K: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major (k1, k2) multi-indices of the (K+1)^2 truncation."""
    k1, k2 = np.divmod(np.arange((K + 1) ** 2), K + 1)
    return k1, k2


def taylor_mult_matrix(m: Taylor2Seq, rows: tuple[np.ndarray, np.ndarray], cols: tuple[np.ndarray, np.ndarray]) -> Coeffs:
    """Matrix of h -> m*h restricted to the given row and column multi-indices."""
    M1, M2 = m.order
    d1 = rows[0][:, None] - cols[0][None, :]
    d2 = rows[1][:, None] - cols[1][None, :]
    valid = (d1 >= 0) & (d1 <= M1) & (d2 >= 0) & (d2 <= M2)
    i1, i2 = np.clip(d1, 0, M1), np.clip(d2, 0, M2)
    c = m.coeffs
    if _is_ball(c):
        return BallArray._make(c.mid[i1, i2], c.rad[i1, i2]).select(valid)
    return np.where(valid, c[i1, i2], 0)


# -- Chebyshev ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChebSeq:
    """One-sided Chebyshev coefficients u_0..u_K of u_0 + 2 sum u_k T_k."""

    coeffs: Coeffs

    def __post_init__(self):
        if self.coeffs.ndim != 1:
            raise ValueError(f"ChebSeq needs a 1-D coefficient array, got shape {self.coeffs.shape}")

    @classmethod
    def zeros(cls, K: int, rigorous: bool = False) -> "ChebSeq":
        return cls(BallArray.zeros((K + 1,)) if rigorous else np.zeros(K + 1))

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def is_rigorous(self) -> bool:
        return _is_ball(self.coeffs)

    def rigorous(self) -> "ChebSeq":
        return self if self.is_rigorous else ChebSeq(BallArray.exact(self.coeffs))

    def midpoint(self) -> "ChebSeq":
        return ChebSeq(self.coeffs.mid) if self.is_rigorous else self

    def _aligned(self, other: "ChebSeq") -> tuple[Coeffs, Coeffs]:
        _same_backend(self.coeffs, other.coeffs)
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        return _pad(self.coeffs, (n,)), _pad(other.coeffs, (n,))

    def constant_like(self, value) -> "ChebSeq":
        if self.is_rigorous:
            return ChebSeq(BallArray.coerce(value).reshape(1))
        if isinstance(value, (Interval, ComplexInterval, BallArray)):
            raise MixedArithmeticError("float sequence combined with an enclosure; call rigorous() first")
        return ChebSeq(np.asarray([value], dtype=np.result_type(value, self.coeffs)))

    def __add__(self, other):
        if not isinstance(other, ChebSeq):
            return self + self.constant_like(other)
        a, b = self._aligned(other)
        return ChebSeq(a + b)

    __radd__ = __add__

    def __neg__(self) -> "ChebSeq":
        return ChebSeq(-self.coeffs)

    def __sub__(self, other):
        if not isinstance(other, ChebSeq):
            return self - self.constant_like(other)
        a, b = self._aligned(other)
        return ChebSeq(a - b)

    def __rsub__(self, other):
        return self.constant_like(other) - self

    def __mul__(self, other):
        if isinstance(other, ChebSeq):
            return cheb_convolution(self, other)
        return ChebSeq(_scale(self.coeffs, other))

    __rmul__ = __mul__

    def project(self, K: int) -> "ChebSeq":
        mask = np.arange(self.order + 1) <= K
        return ChebSeq(self.coeffs.select(mask) if self.is_rigorous else np.where(mask, self.coeffs, 0))

    def tail(self, K: int) -> "ChebSeq":
        mask = np.arange(self.order + 1) > K
        return ChebSeq(self.coeffs.select(mask) if self.is_rigorous else np.where(mask, self.coeffs, 0))

    def truncate(self, K: int) -> "ChebSeq":
        c = _pad(self.coeffs, (max(K + 1, self.coeffs.shape[0]),))
        return ChebSeq(c[: K + 1])

    def norm(self, mu) -> Interval:
        w_lo, w_hi = cheb_weights(self.order, mu)
        return _norm(self.coeffs, w_lo, w_hi)

    def eval(self, s):
        return eval_cheb(self, s)


def _two_sided(c: Coeffs) -> Coeffs:
    if _is_ball(c):
        return BallArray.concatenate([c[:0:-1], c])
    return np.concatenate([c[:0:-1], c])


def cheb_convolution(u: ChebSeq, w: ChebSeq) -> ChebSeq:
    """(u*w)_k = sum_{l in Z} u_|k-l| w_|l|, output order K_u + K_w."""
    full = _conv(_two_sided(u.coeffs), _two_sided(w.coeffs))
    return ChebSeq(full[u.order + w.order:])


def norm_cheb(u: ChebSeq, mu) -> Interval:
    return u.norm(mu)


def eval_cheb(u: ChebSeq, s):
    """Clenshaw evaluation of u_0 + 2 sum u_k T_k(s).

    The float path accepts scalars or arrays in [-1, 1]; the rigorous path
    takes an Interval and returns an Interval.
    """
    c = u.coeffs
    K = u.order
    if not u.is_rigorous:
        if isinstance(s, (Interval, BallArray)):
            raise MixedArithmeticError("rigorous evaluation requires rigorous coefficients")
        s = np.asarray(s, dtype=np.float64)
        if np.any(np.abs(s) > 1.0):
            raise DomainError("Chebyshev evaluation outside [-1, 1]")
        b1 = np.zeros_like(s)
        b2 = np.zeros_like(s)
        for k in range(K, 0, -1):
            b1, b2 = 2.0 * c[k] + 2.0 * s * b1 - b2, b1
        return c[0] + s * b1 - b2
    s_int = exact(s)
    if s_int.lo < -1.0 or s_int.hi > 1.0:
        raise DomainError(f"Chebyshev evaluation outside [-1, 1]: {s_int}")
    sb = BallArray.coerce(s_int)
    two_s = sb * 2
    b1 = BallArray.zeros(())
    b2 = BallArray.zeros(())
    for k in range(K, 0, -1):
        b1, b2 = c[k] * 2 + two_s * b1 - b2, b1
    return (c[0] + sb * b1 - b2).to_scalar()


def eval_at_one(u: ChebSeq):
    """u(1) = u_0 + 2 sum_{k>=1} u_k."""
    c = u.coeffs
    if u.is_rigorous:
        if u.order == 0:
            return c[0].to_scalar()
        return (c[0] + c[1:].sum() * 2).to_scalar()
    return c[0] + 2.0 * np.sum(c[1:])


def evaluation_row(K: int) -> np.ndarray:
    """The functional u -> u(1) as the row (1, 2, 2, ...)."""
    row = np.full(K + 1, 2.0)
    row[0] = 1.0
    return row


@lru_cache(maxsize=32)
def lc_matrix_exact(K: int) -> np.ndarray:
    """Exact (K+2) x (K+1) matrix of the antiderivative operator s -> int_{-1}^s u."""
    M = np.full((K + 2, K + 1), Fraction(0), dtype=object)
    M[0, 0] = Fraction(1)
    if K >= 1:
        M[0, 1] = Fraction(-1, 2)
    for l in range(2, K + 1):
        M[0, l] = Fraction(2 * (-1) ** (l + 1), l * l - 1)
    for k in range(1, K + 2):
        if k - 1 <= K:
            M[k, k - 1] += Fraction(1, 2 * k)
        if k + 1 <= K:
            M[k, k + 1] -= Fraction(1, 2 * k)
    M.setflags(write=False)
    return M


@lru_cache(maxsize=32)
def lc_matrix(K: int) -> BallArray:
    return BallArray.from_fractions(lc_matrix_exact(K))


@lru_cache(maxsize=32)
def derivative_matrix_exact(K: int) -> np.ndarray:
    """Exact K x (K+1) matrix of d/ds on one-sided coefficients (order K -> K-1)."""
    D = np.full((max(K, 1), K + 1), Fraction(0), dtype=object)
    for col in range(1, K + 1):
        d = [Fraction(0)] * (K + 2)
        a = [Fraction(0)] * (K + 1)
        a[col] = Fraction(2)
        for k in range(K, 0, -1):
            d[k - 1] = d[k + 1] + 2 * k * a[k]
        for k in range(K):
            D[k, col] = d[k] / 2
    D.setflags(write=False)
    return D


def _apply_exact_matrix(exact_matrix: np.ndarray, ball_matrix: Callable[[], BallArray], c: Coeffs) -> Coeffs:
    if _is_ball(c):
        return ball_matrix() @ c
    if c.dtype == object:
        return exact_matrix.dot(c)
    return ball_matrix().mid @ c


def apply_LC(u: ChebSeq) -> ChebSeq:
    """Chebyshev coefficients of s -> int_{-1}^s u, order K+1."""
    K = u.order
    return ChebSeq(_apply_exact_matrix(lc_matrix_exact(K), lambda: lc_matrix(K), u.coeffs))


def cheb_derivative(u: ChebSeq) -> ChebSeq:
    """Chebyshev coefficients of du/ds, order K-1."""
    K = u.order
    return ChebSeq(
        _apply_exact_matrix(
            derivative_matrix_exact(K), lambda: BallArray.from_fractions(derivative_matrix_exact(K)), u.coeffs
        )
    )


def lc_norm(mu) -> Interval:
    """||L_C|| on the Chebyshev weighted l1 space: 1 + mu (attained on the constant mode)."""
    return 1 + exact(mu)


def lc_corner_norm(K: int, mu) -> Interval:
    """||Pi_{<=0} L_C Pi_{>K+1}|| = mu^-(K+2) / ((K+2)^2 - 1)."""
    m = exact(mu)
    return 1 / (m ** (K + 2) * ((K + 2) ** 2 - 1))


def lc_tail_norm(K: int, mu) -> Interval:
    """||Pi_{>K} L_C Pi_{>K+1}|| = mu^-1 / (2(K+1)) + mu / (2(K+3))."""
    m = exact(mu)
    return 1 / (m * (2 * (K + 1))) + m / (2 * (K + 3))


def evaluation_tail_norm(K: int, mu) -> Interval:
    """||E Pi_{>K}|| = mu^-(K+1) for the evaluation functional u -> u(1)."""
    return 1 / exact(mu) ** (K + 1)


def cheb_mult_matrix(m: ChebSeq, K_in: int, K_out: int) -> Coeffs:
    """Matrix of h -> m*h from orders <= K_in to orders <= K_out."""
    M = m.order
    k = np.arange(K_out + 1)[:, None]
    j = np.arange(K_in + 1)[None, :]
    d = np.abs(k - j)
    s = k + j
    first = d <= M
    second = (s <= M) & (j >= 1)
    i1, i2 = np.clip(d, 0, M), np.clip(s, 0, M)
    c = m.coeffs
    if _is_ball(c):
        return BallArray._make(c.mid[i1], c.rad[i1]).select(first) + BallArray._make(c.mid[i2], c.rad[i2]).select(second)
    return np.where(first, c[i1], 0) + np.where(second, c[i2], 0)


def lobatto_nodes(K: int) -> np.ndarray:
    """Chebyshev-Lobatto nodes cos(j pi / K), j = 0..K, from 1 down to -1."""
    return np.cos(np.pi * np.arange(K + 1) / K)


def cheb_interpolate(values: np.ndarray) -> tuple[ChebSeq, ...]:
    """Interpolants through values at lobatto_nodes(K), one sequence per trailing column.

    Naive O(K^2) discrete cosine transform; 1-D values give a single sequence.
    """
    values = np.asarray(values, dtype=np.float64)
    K = values.shape[0] - 1
    j = np.arange(K + 1)
    C = np.cos(np.pi * np.outer(j, j) / K)
    halves = np.ones(K + 1)
    halves[0] = halves[-1] = 0.5
    a = (2.0 / K) * (C @ (halves[:, None] * values.reshape(K + 1, -1)))
    u = a / 2.0
    u[K] /= 2.0
    return tuple(ChebSeq(u[:, i].copy()) for i in range(u.shape[1]))


# -- triples -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VecSeq3:
    """Triple of sequences of the same kind; norm is the sum of component norms."""

    components: tuple

    def __post_init__(self):
        if len(self.components) != 3:
            raise ValueError("VecSeq3 needs exactly three components")
        kinds = {type(c) for c in self.components}
        if len(kinds) != 1:
            raise ValueError("VecSeq3 components must be of the same sequence kind")

    def __iter__(self) -> Iterator:
        return iter(self.components)

    def __getitem__(self, i: int):
        return self.components[i]

    def __len__(self) -> int:
        return 3

    def map(self, fn: Callable) -> "VecSeq3":
        return VecSeq3(tuple(fn(c) for c in self.components))

    def __add__(self, other: "VecSeq3") -> "VecSeq3":
        return VecSeq3(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other: "VecSeq3") -> "VecSeq3":
        return VecSeq3(tuple(a - b for a, b in zip(self, other)))

    def __neg__(self) -> "VecSeq3":
        return self.map(lambda c: -c)

    def __mul__(self, scalar) -> "VecSeq3":
        return self.map(lambda c: c * scalar)

    __rmul__ = __mul__

    def project(self, K: int) -> "VecSeq3":
        return self.map(lambda c: c.project(K))

    def tail(self, K: int) -> "VecSeq3":
        return self.map(lambda c: c.tail(K))

    def truncate(self, K: int) -> "VecSeq3":
        return self.map(lambda c: c.truncate(K))

    def rigorous(self) -> "VecSeq3":
        return self.map(lambda c: c.rigorous())

    def midpoint(self) -> "VecSeq3":
        return self.map(lambda c: c.midpoint())

    @property
    def is_rigorous(self) -> bool:
        return self.components[0].is_rigorous

    def norm(self, weight) -> Interval:
        total = Interval(0.0)
        for c in self.components:
            total = total + c.norm(weight)
        return total


# -- serialization -------------------------------------------------------------


def seq_to_json(seq: Union[Taylor2Seq, ChebSeq]) -> dict:
    """{kind, orders, scalar_kind, coeffs: [[re_lo, re_hi, im_lo, im_hi], ...]} in row-major order.

    Rigorous complex sequences also carry their disks as mid ([re, im] pairs) and rad.
    """
    ball = seq.coeffs if seq.is_rigorous else BallArray.exact(seq.coeffs)
    kind = "taylor2" if isinstance(seq, Taylor2Seq) else "chebyshev"
    orders = list(seq.order) if isinstance(seq, Taylor2Seq) else [seq.order]
    out = {
        "kind": kind,
        "orders": orders,
        "scalar_kind": "complex" if ball.is_complex else "real",
        "coeffs": ball.to_lists(),
    }
    if seq.is_rigorous and ball.is_complex:
        # disks rebuilt from their bounding rectangles would grow by sqrt(2)
        out["mid"] = [[float(z.real), float(z.imag)] for z in ball.mid.ravel()]
        out["rad"] = [float(r) for r in ball.rad.ravel()]
    return out


def seq_from_json(data: dict) -> Union[Taylor2Seq, ChebSeq]:
    """Inverse of seq_to_json; point enclosures come back on the float path."""
    shape = tuple(o + 1 for o in data["orders"])
    raw = np.asarray(data["coeffs"], dtype=np.float64).reshape(shape + (4,))
    is_complex = data["scalar_kind"] == "complex"
    if "mid" in data:
        mid = np.asarray(data["mid"], dtype=np.float64).reshape(shape + (2,))
        c = BallArray(mid[..., 0] + 1j * mid[..., 1], np.asarray(data["rad"], dtype=np.float64).reshape(shape))
        return Taylor2Seq(c) if data["kind"] == "taylor2" else ChebSeq(c)
    point = np.all(raw[..., 0] == raw[..., 1]) and np.all(raw[..., 2] == raw[..., 3])
    if point:
        c = raw[..., 0] + 1j * raw[..., 2] if is_complex else raw[..., 0].copy()
    else:
        entries = np.empty(shape, dtype=object)
        for idx in np.ndindex(shape):
            lo_hi = raw[idx]
            re = Interval(lo_hi[0], lo_hi[1])
            entries[idx] = ComplexInterval(re, Interval(lo_hi[2], lo_hi[3])) if is_complex else re
        c = BallArray.from_intervals(entries)
    return Taylor2Seq(c) if data["kind"] == "taylor2" else ChebSeq(c)
