"""
Directed-rounding real intervals and rectangular complex intervals.

Endpoints are binary64. Every basic operation is computed in round-to-nearest
and the endpoint is pushed one ulp outward only when an error-free
transformation shows the rounded value is inexact, so that exactly
representable results such as 3/4 stay point intervals. No rounding-mode
state is touched; all values are immutable.

Mixing a bare binary64 with an interval is refused (MixedArithmeticError).
Integers and Fractions are exact and promote silently; floats must be
promoted explicitly with ``exact`` or ``Interval(x)``.
"""

import math
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction
from numbers import Integral, Rational
from typing import Iterable, Sequence, Union

from .errors import DomainError, MixedArithmeticError, NotInvertibleError

_INF = math.inf
_SPLITTER = 134217729.0  # 2**27 + 1
_SAFE_MAX = 2.0 ** 995
_SAFE_MIN = 2.0 ** -969
_TRANSCENDENTAL_ULPS = 2

PI_LO = 3.141592653589793
PI_HI = math.nextafter(PI_LO, _INF)

Exact = Union[int, Fraction]


def next_down(x: float) -> float:
    return math.nextafter(x, -_INF)


def next_up(x: float) -> float:
    return math.nextafter(x, _INF)


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def add_down(x: float, y: float) -> float:
    s, e = _two_sum(x, y)
    if not math.isfinite(e):
        return next_down(s)
    return next_down(s) if e < 0 else s


def add_up(x: float, y: float) -> float:
    s, e = _two_sum(x, y)
    if not math.isfinite(e):
        return next_up(s)
    return next_up(s) if e > 0 else s


def _mul_error_sign(x: float, y: float, p: float) -> float | None:
    """Sign of x*y - p, or None when the error-free product is unsafe."""
    if max(abs(x), abs(y)) > _SAFE_MAX or abs(p) < _SAFE_MIN or not math.isfinite(p):
        return None
    return _two_prod(x, y)[1]


def mul_down(x: float, y: float) -> float:
    if x == 0.0 or y == 0.0:
        return 0.0
    p = x * y
    e = _mul_error_sign(x, y, p)
    if e is None:
        return next_down(p)
    return next_down(p) if e < 0 else p


def mul_up(x: float, y: float) -> float:
    if x == 0.0 or y == 0.0:
        return 0.0
    p = x * y
    e = _mul_error_sign(x, y, p)
    if e is None:
        return next_up(p)
    return next_up(p) if e > 0 else p


def _div_error_sign(x: float, y: float, q: float) -> float | None:
    """Sign of x/y - q, or None when the remainder cannot be formed exactly."""
    if (
        not math.isfinite(q)
        or abs(q) < _SAFE_MIN
        or max(abs(q), abs(x), abs(y)) > _SAFE_MAX
        or abs(y) < _SAFE_MIN
    ):
        return None
    p, e = _two_prod(q, y)
    rem = (x - p) - e
    return rem if y > 0 else -rem


def div_down(x: float, y: float) -> float:
    if x == 0.0:
        return 0.0
    q = x / y
    e = _div_error_sign(x, y, q)
    if e is None:
        return next_down(q)
    return next_down(q) if e < 0 else q


def div_up(x: float, y: float) -> float:
    if x == 0.0:
        return 0.0
    q = x / y
    e = _div_error_sign(x, y, q)
    if e is None:
        return next_up(q)
    return next_up(q) if e > 0 else q


def _sqrt_bracket(x: float) -> tuple[float, float]:
    if x == 0.0:
        return 0.0, 0.0
    s = math.sqrt(x)
    if x < _SAFE_MIN or x > _SAFE_MAX:
        return next_down(s), next_up(s)
    p, e = _two_prod(s, s)
    rem = (x - p) - e
    if rem > 0:
        return s, next_up(s)
    if rem < 0:
        return next_down(s), s
    return s, s


def _widen(lo: float, hi: float, ulps: int = _TRANSCENDENTAL_ULPS) -> tuple[float, float]:
    for _ in range(ulps):
        lo, hi = next_down(lo), next_up(hi)
    return lo, hi


def _format_endpoint(x: float, rounding: str) -> str:
    d = Context(prec=6, rounding=rounding).plus(Decimal(x))
    text = format(d, "g")
    mantissa, _, exponent = text.partition("e")
    if "." in mantissa:
        mantissa = mantissa.rstrip("0").rstrip(".")
    return f"{mantissa}e{exponent}" if exponent else mantissa


class Interval:
    """Closed real interval [lo, hi] with binary64 endpoints."""

    __slots__ = ("lo", "hi")

    lo: float
    hi: float

    def __init__(self, lo: float, hi: float | None = None):
        if hi is None:
            hi = lo
        lo, hi = float(lo), float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"empty interval: lo={lo!r} > hi={hi!r}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    def __reduce__(self):
        return (Interval, (self.lo, self.hi))

    # -- coercion -------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Interval":
        if isinstance(other, Interval):
            return other
        if isinstance(other, float):
            raise MixedArithmeticError(
                f"binary64 value {other!r} mixed with an interval; promote it with exact()"
            )
        if isinstance(other, (Integral, Rational)):
            return exact(other)
        return NotImplemented

    # -- queries --------------------------------------------------------

    @property
    def mid(self) -> float:
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def rad(self) -> float:
        m = self.mid
        return max(add_up(self.hi, -m), add_up(m, -self.lo))

    @property
    def width(self) -> float:
        return add_up(self.hi, -self.lo)

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self) -> float:
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def contains(self, value) -> bool:
        if isinstance(value, Interval):
            return self.lo <= value.lo and value.hi <= self.hi
        return self.lo <= value <= self.hi

    def __contains__(self, value) -> bool:
        return self.contains(value)

    def subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def isdisjoint(self, other: "Interval") -> bool:
        return self.hi < other.lo or other.hi < self.lo

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def is_positive(self) -> bool:
        return self.lo > 0.0

    def is_negative(self) -> bool:
        return self.hi < 0.0

    def is_point(self) -> bool:
        return self.lo == self.hi

    # -- arithmetic -----------------------------------------------------

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> "Interval":
        return self

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Interval(add_down(self.lo, other.lo), add_up(self.hi, other.hi))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Interval(add_down(self.lo, -other.hi), add_up(self.hi, -other.lo))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        pairs = [(x, y) for x in (self.lo, self.hi) for y in (other.lo, other.hi)]
        return Interval(min(mul_down(x, y) for x, y in pairs), max(mul_up(x, y) for x, y in pairs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.lo <= 0.0 <= other.hi:
            raise NotInvertibleError(f"not invertible: divisor {other} contains zero")
        pairs = [(x, y) for x in (self.lo, self.hi) for y in (other.lo, other.hi)]
        return Interval(min(div_down(x, y) for x, y in pairs), max(div_up(x, y) for x, y in pairs))

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, n: int) -> "Interval":
        if not isinstance(n, Integral):
            raise TypeError("only integer powers are supported")
        n = int(n)
        if n == 0:
            return Interval(1.0)
        if n < 0:
            return 1 / self ** (-n)
        if n % 2 == 1:
            return self * self ** (n - 1)
        lo, hi = self.mig, self.mag
        plo, phi = 1.0, 1.0
        for _ in range(n):
            plo, phi = mul_down(plo, lo), mul_up(phi, hi)
        return Interval(plo, phi)

    def __abs__(self) -> "Interval":
        return Interval(self.mig, self.mag)

    # -- comparison and display -----------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, Interval):
            return self.lo == other.lo and self.hi == other.hi
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self) -> str:
        return f"[{_format_endpoint(self.lo, ROUND_FLOOR)}, {_format_endpoint(self.hi, ROUND_CEILING)}]"

    def to_list(self) -> list[float]:
        return [self.lo, self.hi]


def exact(value) -> Interval:
    """Tightest enclosure of an exact number (int, Fraction, decimal string, or binary64)."""
    if isinstance(value, Interval):
        return value
    if isinstance(value, float):
        return Interval(value)
    q = Fraction(value)
    f = float(q)
    fq = Fraction(f)
    if fq == q:
        return Interval(f)
    if fq < q:
        return Interval(f, next_up(f))
    return Interval(next_down(f), f)


def pi_interval() -> Interval:
    return Interval(PI_LO, PI_HI)


def midpoint_radius(mid: Sequence[float], rad: "Interval | float") -> list[Interval]:
    """Box of intervals [mid_i - rad, mid_i + rad], outward rounded."""
    r = rad.hi if isinstance(rad, Interval) else float(rad)
    if r < 0:
        raise ValueError(f"radius must be nonnegative, got {r!r}")
    return [Interval(add_down(float(m), -r), add_up(float(m), r)) for m in mid]


def hull_of(values: Iterable[Interval]) -> Interval:
    values = list(values)
    return Interval(min(v.lo for v in values), max(v.hi for v in values))


# -- elementary functions ---------------------------------------------


def sqrt(x: Interval) -> Interval:
    x = exact(x)
    if x.lo < 0.0:
        raise DomainError(f"sqrt of {x} which contains negative numbers")
    return Interval(_sqrt_bracket(x.lo)[0], _sqrt_bracket(x.hi)[1])


def log(x: Interval) -> Interval:
    x = exact(x)
    if x.lo <= 0.0:
        raise DomainError(f"log of {x} which is not strictly positive")

    def bracket(v: float) -> tuple[float, float]:
        if v == 1.0:
            return 0.0, 0.0
        y = math.log(v)
        return _widen(y, y)

    return Interval(bracket(x.lo)[0], bracket(x.hi)[1])


def exp(x: Interval) -> Interval:
    x = exact(x)

    def bracket(v: float) -> tuple[float, float]:
        if v == 0.0:
            return 1.0, 1.0
        try:
            y = math.exp(v)
        except OverflowError as exc:
            raise DomainError(f"exp overflows at {v!r}") from exc
        lo, hi = _widen(y, y)
        if not math.isfinite(hi):
            raise DomainError(f"exp overflows at {v!r}")
        return max(lo, 0.0), hi

    return Interval(bracket(x.lo)[0], bracket(x.hi)[1])


def _touches_multiple_of_pi(x: Interval, offset: Fraction) -> list[int]:
    """Integers m with (m + offset)*pi possibly inside x."""
    first = math.floor(x.lo / PI_HI - float(offset)) - 1
    last = math.ceil(x.hi / PI_LO - float(offset)) + 1
    hits = []
    pi = pi_interval()
    for m in range(first, last + 1):
        point = exact(Fraction(m) + offset) * pi
        if not point.isdisjoint(x):
            hits.append(m)
    return hits


def _periodic(x: Interval, fn, offset: Fraction) -> Interval:
    if x.width >= 2 * PI_LO:
        return Interval(-1.0, 1.0)
    a, b = fn(x.lo), fn(x.hi)
    lo, hi = _widen(min(a, b), max(a, b))
    for m in _touches_multiple_of_pi(x, offset):
        if m % 2 == 0:
            hi = 1.0
        else:
            lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


def cos(x: Interval) -> Interval:
    return _periodic(exact(x), math.cos, Fraction(0))


def sin(x: Interval) -> Interval:
    return _periodic(exact(x), math.sin, Fraction(1, 2))


def iabs(x: Interval) -> Interval:
    return abs(exact(x))


# -- complex intervals ---------------------------------------------------


class ComplexInterval:
    """Rectangle re x im of real intervals."""

    __slots__ = ("re", "im")

    re: Interval
    im: Interval

    def __init__(self, re, im=None):
        re = re if isinstance(re, Interval) else exact(re)
        im = Interval(0.0) if im is None else (im if isinstance(im, Interval) else exact(im))
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def __setattr__(self, name, value):
        raise AttributeError("ComplexInterval is immutable")

    def __reduce__(self):
        return (ComplexInterval, (self.re, self.im))

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexInterval":
        z = complex(z)
        return cls(Interval(z.real), Interval(z.imag))

    @staticmethod
    def _coerce(other) -> "ComplexInterval":
        if isinstance(other, ComplexInterval):
            return other
        if isinstance(other, Interval):
            return ComplexInterval(other)
        if isinstance(other, (float, complex)):
            raise MixedArithmeticError(
                f"binary64 value {other!r} mixed with a complex interval; promote it explicitly"
            )
        if isinstance(other, (Integral, Rational)):
            return ComplexInterval(exact(other))
        return NotImplemented

    # -- queries --------------------------------------------------------

    @property
    def mid(self) -> complex:
        return complex(self.re.mid, self.im.mid)

    @property
    def mag(self) -> float:
        return sqrt(Interval(self.re.mag) ** 2 + Interval(self.im.mag) ** 2).hi

    @property
    def mig(self) -> float:
        return sqrt(Interval(self.re.mig) ** 2 + Interval(self.im.mig) ** 2).lo

    def conj(self) -> "ComplexInterval":
        return ComplexInterval(self.re, -self.im)

    def contains(self, value) -> bool:
        if isinstance(value, ComplexInterval):
            return self.re.contains(value.re) and self.im.contains(value.im)
        if isinstance(value, (Interval, Integral, Rational)):
            return self.re.contains(value) and self.im.contains(0)
        z = complex(value)
        return self.re.contains(z.real) and self.im.contains(z.imag)

    def __contains__(self, value) -> bool:
        return self.contains(value)

    def isdisjoint(self, other: "ComplexInterval") -> bool:
        return self.re.isdisjoint(other.re) or self.im.isdisjoint(other.im)

    def hull(self, other: "ComplexInterval") -> "ComplexInterval":
        return ComplexInterval(self.re.hull(other.re), self.im.hull(other.im))

    # -- arithmetic -----------------------------------------------------

    def __neg__(self) -> "ComplexInterval":
        return ComplexInterval(-self.re, -self.im)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ComplexInterval(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ComplexInterval(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ComplexInterval(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        den = other.re ** 2 + other.im ** 2
        if den.lo <= 0.0:
            raise NotInvertibleError(f"not invertible: divisor {other} may vanish")
        num = self * other.conj()
        return ComplexInterval(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, n: int) -> "ComplexInterval":
        if not isinstance(n, Integral) or n < 0:
            raise TypeError("only nonnegative integer powers are supported")
        result = ComplexInterval(1)
        for _ in range(int(n)):
            result = result * self
        return result

    def __abs__(self) -> Interval:
        return sqrt(self.re ** 2 + self.im ** 2)

    def __eq__(self, other) -> bool:
        if isinstance(other, ComplexInterval):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        return f"ComplexInterval({self.re!r}, {self.im!r})"

    def __str__(self) -> str:
        return f"{self.re} + {self.im}im"

    def to_list(self) -> list[float]:
        return [self.re.lo, self.re.hi, self.im.lo, self.im.hi]


def unit_circle(alpha) -> tuple[ComplexInterval, ComplexInterval]:
    """Enclosures of (e^{i alpha}, e^{-i alpha})."""
    alpha = exact(alpha)
    c, s = cos(alpha), sin(alpha)
    return ComplexInterval(c, s), ComplexInterval(c, -s)


def unit_circle_derivative(alpha) -> tuple[ComplexInterval, ComplexInterval]:
    """Enclosures of d/dalpha (e^{i alpha}, e^{-i alpha}) = (i e^{i alpha}, -i e^{-i alpha})."""
    alpha = exact(alpha)
    c, s = cos(alpha), sin(alpha)
    return ComplexInterval(-s, c), ComplexInterval(-s, -c)
