"""
The contraction gate and the floating-point Newton iteration shared by all stages.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .interval import Interval, exact, sqrt

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExistenceResult:
    """Outcome of the radii-polynomial test.

    ``r_inf`` is the certified radius sup(Y)/(1 - sup Z) rounded up (None
    when Z is not a contraction constant); ``R`` is the a priori radius on
    which Z was bounded and may be ``math.inf``.
    """

    success: bool
    r_inf: Optional[float]
    r_sup: float
    Y: Interval
    Z: Interval
    R: float
    r_unique: Optional[float] = None

    def __str__(self) -> str:
        if self.r_inf is None:
            return f"(no contraction: Z = {self.Z}, {str(self.success).lower()})"
        return f"([{self.r_inf:.6g}, {self.r_sup:.6g}], {str(self.success).lower()})"


def interval_of_existence(Y: Interval, Z: Interval, R: float) -> ExistenceResult:
    """Contraction holds on B(x_bar, r) for every r in [sup Y / (1 - sup Z), R]."""
    if Y.hi < 0 or Z.hi < 0:
        raise ValueError(f"Y and Z bounds must be nonnegative, got Y={Y}, Z={Z}")
    R = float(R)
    if math.isnan(R) or R < 0:
        raise ValueError(f"a priori radius must be nonnegative, got {R!r}")
    if Z.hi >= 1.0:
        logger.info("contraction gate failed: Z = %s", Z)
        return ExistenceResult(False, None, R, Y, Z, R)
    r = (Interval(Y.hi) / (1 - Interval(Z.hi))).hi
    success = r <= R
    if not success:
        logger.info("contraction gate failed: r = %.6g exceeds R = %.6g", r, R)
    return ExistenceResult(success, r, R, Y, Z, R)


def uniqueness_radius(Y: Interval, Z0: Interval, Z1_rate: Interval, R: float) -> Optional[float]:
    """Largest r <= R (rounded down) with Z1_rate r^2 - (1 - Z0) r + Y <= 0.

    Z1_rate is the coefficient of r in the Lipschitz part Z1(r) = Z1_rate * r.
    Returns None when the radii polynomial may have no positive root.
    """
    gap = 1 - Interval(Z0.hi)
    if gap.hi <= 0:
        return None
    if Z1_rate.hi == 0.0:
        return float(R)
    c = Interval(Z1_rate.hi)
    disc = gap * gap - 4 * c * Interval(Y.hi)
    if disc.lo < 0:
        return None
    root = ((gap + sqrt(Interval(disc.lo))) / (2 * c)).lo
    return min(root, float(R))


def with_uniqueness(result: ExistenceResult, Z0: Interval, Z1_rate: Interval) -> ExistenceResult:
    if not result.success:
        return result
    r_unique = uniqueness_radius(result.Y, Z0, Z1_rate, result.R)
    return ExistenceResult(result.success, result.r_inf, result.r_sup, result.Y, result.Z, result.R, r_unique)


@dataclass
class NewtonResult:
    x: np.ndarray
    success: bool
    iterations: int
    residuals: list[float] = field(default_factory=list)
    message: str = ""


def _l1(v: np.ndarray) -> float:
    return float(np.sum(np.abs(v)))


def newton(
    F: Callable[[np.ndarray], np.ndarray],
    DF: Callable[[np.ndarray], np.ndarray],
    x0,
    tol: float = 1e-14,
    max_iter: int = 20,
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> NewtonResult:
    """Plain Newton iteration; success iff ||F(x)||_1 <= tol within max_iter steps.

    ``project`` is applied after every step (used to keep parameters inside
    their admissible domain).
    """
    x = np.array(x0, dtype=np.result_type(np.asarray(x0), np.float64), copy=True)
    r = _l1(F(x))
    residuals = [r]
    logger.debug("newton: initial residual %.3e", r)
    for k in range(1, max_iter + 1):
        if r <= tol:
            return NewtonResult(x, True, k - 1, residuals)
        try:
            step = linalg.solve(DF(x), F(x))
        except (linalg.LinAlgError, ValueError) as exc:
            return NewtonResult(x, False, k - 1, residuals, f"singular Jacobian: {exc}")
        x = x - step
        if project is not None:
            x = project(x)
        r = _l1(F(x))
        residuals.append(r)
        logger.debug("newton: step %d residual %.3e", k, r)
        if not math.isfinite(r):
            return NewtonResult(x, False, k, residuals, "residual is not finite")
    if r <= tol:
        return NewtonResult(x, True, max_iter, residuals)
    return NewtonResult(x, False, max_iter, residuals, f"residual {r:.3e} above tolerance {tol:.1e}")


def upper_of(value) -> float:
    """Upper bound of a nonnegative Interval or exact number."""
    return exact(value).hi
