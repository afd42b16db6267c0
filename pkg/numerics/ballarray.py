"""
Vectorised midpoint-radius enclosures.

A BallArray holds a binary64 (or complex128) midpoint array and a real
nonnegative radius array; entry i encloses every number z with
|z - mid[i]| <= rad[i]. Complex entries are disks. Operations are carried
out in round-to-nearest numpy/scipy arithmetic and every rounding error is
accounted for in the returned radius using the standard gamma_n bounds, so
large matrix products and convolutions stay rigorous at BLAS speed.
"""

from fractions import Fraction
from numbers import Integral, Rational

import numpy as np
from scipy import signal

from .errors import MixedArithmeticError, NotInvertibleError
from .interval import ComplexInterval, Interval, add_down, add_up, exact

U = 2.0 ** -53
ETA = 2.0 ** -1074


def gamma(n: int) -> float:
    return n * U / (1.0 - n * U)


def upper(x: np.ndarray, n: int) -> np.ndarray:
    """Upper bound of a nonnegative quantity evaluated with at most n roundings."""
    return x * (1.0 + 4.0 * (n + 2) * U) + (n + 2) * ETA


def lower(x: np.ndarray, n: int) -> np.ndarray:
    """Lower bound of a quantity evaluated with at most n roundings, clipped at 0."""
    return np.maximum(x * (1.0 - 4.0 * (n + 2) * U) - (n + 2) * ETA, 0.0)


def _as_mid(mid) -> np.ndarray:
    arr = np.asarray(mid)
    if np.iscomplexobj(arr):
        return arr.astype(np.complex128, copy=False)
    return arr.astype(np.float64, copy=False)


class BallArray:
    """Array of midpoint-radius enclosures (real intervals or complex disks)."""

    __slots__ = ("mid", "rad")
    __array_ufunc__ = None

    mid: np.ndarray
    rad: np.ndarray

    def __init__(self, mid, rad=None):
        mid = _as_mid(mid)
        if rad is None:
            rad = np.zeros(mid.shape)
        else:
            rad = np.broadcast_to(np.asarray(rad, dtype=np.float64), mid.shape)
            if np.any(rad < 0) or not np.all(np.isfinite(rad)):
                raise ValueError("ball radii must be finite and nonnegative")
        if not np.all(np.isfinite(mid)):
            raise ValueError("ball midpoints must be finite")
        self.mid = mid
        self.rad = np.array(rad, dtype=np.float64)

    @classmethod
    def _make(cls, mid: np.ndarray, rad: np.ndarray) -> "BallArray":
        obj = cls.__new__(cls)
        obj.mid = mid
        obj.rad = rad
        return obj

    # -- constructors ---------------------------------------------------

    @classmethod
    def exact(cls, values) -> "BallArray":
        """Promote binary64 data, treated as exact, to zero-radius balls."""
        mid = _as_mid(values)
        return cls._make(mid, np.zeros(mid.shape))

    @classmethod
    def zeros(cls, shape, complex_: bool = False) -> "BallArray":
        dtype = np.complex128 if complex_ else np.float64
        return cls._make(np.zeros(shape, dtype=dtype), np.zeros(shape))

    @classmethod
    def from_rounded(cls, values, ulps: float = 1.0) -> "BallArray":
        """Balls around values known to be within `ulps` units in the last place of the truth."""
        mid = _as_mid(values)
        return cls._make(mid, ulps * np.spacing(np.abs(mid)))

    @classmethod
    def from_fractions(cls, values) -> "BallArray":
        """Tightest balls around an object array of exact rationals."""
        arr = np.asarray(values, dtype=object)
        mid = np.empty(arr.shape, dtype=np.float64)
        rad = np.zeros(arr.shape)
        for idx, q in np.ndenumerate(arr):
            q = Fraction(q)
            f = float(q)
            mid[idx] = f
            if Fraction(f) != q:
                rad[idx] = np.spacing(abs(f))
        return cls._make(mid, rad)

    @classmethod
    def from_scalar(cls, value) -> "BallArray":
        """0-d ball enclosing an Interval, ComplexInterval or exact number."""
        if isinstance(value, BallArray):
            return value
        if isinstance(value, ComplexInterval):
            m = complex(value.re.mid, value.im.mid)
            r = upper(np.hypot(value.re.rad, value.im.rad), 2)
            return cls._make(np.asarray(m, dtype=np.complex128), np.asarray(r, dtype=np.float64))
        if isinstance(value, (float, complex)):
            raise MixedArithmeticError(f"binary64 value {value!r} mixed with balls; promote it explicitly")
        if isinstance(value, (Integral, Rational)):
            value = exact(value)
        if isinstance(value, Interval):
            return cls._make(np.asarray(value.mid, dtype=np.float64), np.asarray(value.rad, dtype=np.float64))
        raise TypeError(f"cannot promote {type(value).__name__} to a ball")

    @classmethod
    def from_intervals(cls, values) -> "BallArray":
        """Ball array from a (nested) sequence of Interval or ComplexInterval."""
        arr = np.asarray(values, dtype=object)
        is_complex = any(isinstance(v, ComplexInterval) for v in arr.flat)
        mid = np.empty(arr.shape, dtype=np.complex128 if is_complex else np.float64)
        rad = np.empty(arr.shape)
        for idx, v in np.ndenumerate(arr):
            b = cls.from_scalar(v)
            mid[idx] = b.mid
            rad[idx] = b.rad
        return cls._make(mid, rad)

    @classmethod
    def coerce(cls, value) -> "BallArray":
        if isinstance(value, BallArray):
            return value
        if isinstance(value, np.ndarray):
            raise MixedArithmeticError("raw numpy arrays must be promoted with BallArray.exact")
        return cls.from_scalar(value)

    @classmethod
    def concatenate(cls, parts, axis: int = 0) -> "BallArray":
        parts = [cls.coerce(p) for p in parts]
        return cls._make(
            np.concatenate([p.mid for p in parts], axis=axis),
            np.concatenate([p.rad for p in parts], axis=axis),
        )

    @classmethod
    def stack(cls, parts, axis: int = 0) -> "BallArray":
        parts = [cls.coerce(p) for p in parts]
        return cls._make(np.stack([p.mid for p in parts], axis=axis), np.stack([p.rad for p in parts], axis=axis))

    # -- shape ------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mid.shape

    @property
    def ndim(self) -> int:
        return self.mid.ndim

    @property
    def size(self) -> int:
        return self.mid.size

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.mid)

    def __len__(self) -> int:
        return len(self.mid)

    def __getitem__(self, idx) -> "BallArray":
        return BallArray._make(self.mid[idx], self.rad[idx])

    def reshape(self, *shape) -> "BallArray":
        return BallArray._make(self.mid.reshape(*shape), self.rad.reshape(*shape))

    def ravel(self) -> "BallArray":
        return BallArray._make(self.mid.ravel(), self.rad.ravel())

    @property
    def T(self) -> "BallArray":
        return BallArray._make(self.mid.T, self.rad.T)

    def pad(self, pad_width) -> "BallArray":
        return BallArray._make(np.pad(self.mid, pad_width), np.pad(self.rad, pad_width))

    def select(self, mask) -> "BallArray":
        """Zero every entry where mask is False."""
        mask = np.asarray(mask, dtype=bool)
        return BallArray._make(np.where(mask, self.mid, 0), np.where(mask, self.rad, 0.0))

    def copy(self) -> "BallArray":
        return BallArray._make(self.mid.copy(), self.rad.copy())

    def astype_complex(self) -> "BallArray":
        return BallArray._make(self.mid.astype(np.complex128), self.rad)

    # -- parts ------------------------------------------------------------

    @property
    def real(self) -> "BallArray":
        return BallArray._make(np.real(self.mid).astype(np.float64), self.rad)

    @property
    def imag(self) -> "BallArray":
        return BallArray._make(np.imag(self.mid).astype(np.float64), self.rad)

    def conj(self) -> "BallArray":
        return BallArray._make(np.conj(self.mid), self.rad)

    def mag(self) -> np.ndarray:
        """Upper bounds of |z| over each ball."""
        return upper(np.abs(self.mid) + self.rad, 2)

    def mig(self) -> np.ndarray:
        """Lower bounds of |z| over each ball."""
        return lower(np.abs(self.mid) - self.rad, 2)

    def widen(self, extra) -> "BallArray":
        return BallArray._make(self.mid, upper(self.rad + np.asarray(extra, dtype=np.float64), 1))

    def contains(self, values) -> np.ndarray:
        """Elementwise membership test (binary64 distance, for diagnostics and tests)."""
        return np.abs(np.asarray(values) - self.mid) <= self.rad

    def contains_zero(self) -> np.ndarray:
        return np.abs(self.mid) <= self.rad

    # -- conversion -------------------------------------------------------

    def to_scalar(self) -> Interval | ComplexInterval:
        """Rectangular enclosure of a 0-d (or single-element) ball."""
        if self.size != 1:
            raise ValueError("to_scalar needs a single-element ball array")
        m = self.mid.reshape(()).item()
        r = float(self.rad.reshape(()))
        if self.is_complex:
            return ComplexInterval(
                Interval(add_down(m.real, -r), add_up(m.real, r)),
                Interval(add_down(m.imag, -r), add_up(m.imag, r)),
            )
        return Interval(add_down(m, -r), add_up(m, r))

    def to_intervals(self) -> np.ndarray:
        """Object array of Interval / ComplexInterval enclosures."""
        out = np.empty(self.shape, dtype=object)
        for idx in np.ndindex(self.shape):
            out[idx] = self[idx].to_scalar()
        return out

    def to_lists(self) -> list:
        """Flat row-major list of [re_lo, re_hi, im_lo, im_hi] entries."""
        rows = []
        for idx in np.ndindex(self.shape):
            s = self[idx].to_scalar()
            if isinstance(s, Interval):
                rows.append([s.lo, s.hi, 0.0, 0.0])
            else:
                rows.append(s.to_list())
        return rows

    # -- arithmetic -------------------------------------------------------

    def __neg__(self) -> "BallArray":
        return BallArray._make(-self.mid, self.rad)

    def __add__(self, other) -> "BallArray":
        other = BallArray.coerce(other)
        m = self.mid + other.mid
        return BallArray._make(m, upper(self.rad + other.rad + U * np.abs(m), 3))

    __radd__ = __add__

    def __sub__(self, other) -> "BallArray":
        return self + (-BallArray.coerce(other))

    def __rsub__(self, other) -> "BallArray":
        return BallArray.coerce(other) + (-self)

    def __mul__(self, other) -> "BallArray":
        other = BallArray.coerce(other)
        m = self.mid * other.mid
        a, b = np.abs(self.mid), np.abs(other.mid)
        r = a * other.rad + self.rad * (b + other.rad) + 4.0 * U * (a * b)
        return BallArray._make(m, upper(r, 8))

    __rmul__ = __mul__

    def reciprocal(self) -> "BallArray":
        a = np.abs(self.mid)
        gap = lower(a - self.rad, 2)
        if np.any(gap <= 0.0):
            raise NotInvertibleError("not invertible: a ball contains zero")
        c = 1.0 / self.mid
        r = self.rad / (lower(a, 1) * gap) + 8.0 * U * np.abs(c)
        return BallArray._make(c, upper(r, 6))

    def __truediv__(self, other) -> "BallArray":
        return self * BallArray.coerce(other).reciprocal()

    def __rtruediv__(self, other) -> "BallArray":
        return BallArray.coerce(other) * self.reciprocal()

    def __matmul__(self, other) -> "BallArray":
        return matmul(self, BallArray.coerce(other))

    def sum(self, axis=None) -> "BallArray":
        n = self.size if axis is None else self.shape[axis]
        m = self.mid.sum(axis=axis)
        r = self.rad.sum(axis=axis) + gamma(max(n - 1, 1)) * np.abs(self.mid).sum(axis=axis)
        return BallArray._make(np.asarray(m), np.asarray(upper(r, n + 2)))

    def __repr__(self) -> str:
        return f"BallArray(shape={self.shape}, complex={self.is_complex}, max_rad={self.rad.max() if self.size else 0.0:.3e})"


def matmul(a: BallArray, b: BallArray) -> BallArray:
    """Rigorous product of ball matrices (or matrix-vector)."""
    n = a.shape[-1]
    m = a.mid @ b.mid
    abs_a, abs_b = np.abs(a.mid), np.abs(b.mid)
    r = gamma(2 * n + 4) * (abs_a @ abs_b)
    a_exact = not a.rad.any()
    b_exact = not b.rad.any()
    if not b_exact:
        r = r + abs_a @ b.rad
    if not a_exact:
        r = r + a.rad @ (abs_b + b.rad)
    return BallArray._make(m, upper(r, n + 8))


def convolve(a: BallArray, b: BallArray) -> BallArray:
    """Full linear convolution of ball arrays of equal dimension (1-D or 2-D)."""
    a, b = BallArray.coerce(a), BallArray.coerce(b)
    terms = min(a.size, b.size)
    m = signal.convolve(a.mid, b.mid, mode="full", method="direct")
    abs_a, abs_b = np.abs(a.mid), np.abs(b.mid)
    r = gamma(2 * terms + 4) * signal.convolve(abs_a, abs_b, mode="full", method="direct")
    if b.rad.any():
        r = r + signal.convolve(abs_a, b.rad, mode="full", method="direct")
    if a.rad.any():
        r = r + signal.convolve(a.rad, abs_b + b.rad, mode="full", method="direct")
    return BallArray._make(np.asarray(m), upper(np.asarray(r, dtype=np.float64), terms + 8))


def weighted_sum_upper(values: np.ndarray, weights: np.ndarray, axis=None) -> np.ndarray:
    """Upper bound of sum(values * weights) for nonnegative values and weights."""
    n = values.size if axis is None else values.shape[axis]
    return upper(np.sum(values * weights, axis=axis), n + 2)


def weighted_sum_lower(values: np.ndarray, weights: np.ndarray, axis=None) -> np.ndarray:
    n = values.size if axis is None else values.shape[axis]
    return lower(np.sum(values * weights, axis=axis), n + 2)
