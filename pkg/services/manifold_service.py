"""
Local stable and unstable manifolds by the parameterization method.

P(theta) = sum P_k theta1^k1 theta2^k2 solves P - phi - L_T f(P) = 0 where
phi(theta) = c + v1 theta1 + v2 theta2 and L_T divides coefficient k by
k1 lambda1 + k2 lambda2 (orders k1 + k2 >= 2).
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dependencies.config import PipelineConfig
from models import Bounds, EigenCertificate, EquilibriumCertificate, ManifoldCertificate, enclosure_to_list
from numerics.ballarray import BallArray, upper
from numerics.errors import ResonanceError, SingularMatrixError
from numerics.interval import ComplexInterval, Interval, exact
from numerics.linop import (
    CoordinateLayout,
    ProductVector,
    approx_inverse_float,
    column_norms,
    make_tail_extended,
    product_space_norm,
    weighted_opnorm,
)
from numerics.rpa import interval_of_existence, newton, with_uniqueness
from numerics.seqspace import (
    Taylor2Seq,
    VecSeq3,
    apply_LT,
    lt_divisors,
    seq_from_json,
    seq_to_json,
    taylor_index,
    taylor_mult_matrix,
    taylor_weights,
)
from numerics.vector_field import MultiplierTable, Params, df_vecfield_seq, f
from services.errors import GuessError, NewtonFailure, ProofFailure

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ManifoldData:
    """Equilibrium and eigen data feeding one manifold proof."""

    side: str
    equilibrium: EquilibriumCertificate
    e1: EigenCertificate
    e2: EigenCertificate

    @property
    def is_real(self) -> bool:
        return not (self.e1.is_complex or self.e2.is_complex)

    @property
    def name(self) -> str:
        return f"{self.side}_{self.equilibrium.name}"

    def mids(self):
        """(c, lambda1, lambda2, v1, v2) on the float path."""
        c = np.asarray(self.equilibrium.c_bar)
        lams = [self.e1.lambda_mid(), self.e2.lambda_mid()]
        vs = [np.asarray(self.e1.v_mid()), np.asarray(self.e2.v_mid())]
        if self.is_real:
            return c, lams[0].real, lams[1].real, vs[0].real, vs[1].real
        return c, lams[0], lams[1], vs[0], vs[1]

    def enclosures(self):
        """(c, lambda1, lambda2, v1, v2) as certified enclosures."""
        c = self.equilibrium.box()
        lams = [self.e1.eigenvalue_enclosure(), self.e2.eigenvalue_enclosure()]
        vs = [self.e1.eigenvector_enclosure(), self.e2.eigenvector_enclosure()]
        if self.is_real:
            return c, lams[0].re, lams[1].re, [x.re for x in vs[0]], [x.re for x in vs[1]]
        return c, lams[0], lams[1], vs[0], vs[1]


def select_eigenpairs(
    side: str, equilibrium: EquilibriumCertificate, eigenpairs: list[EigenCertificate]
) -> ManifoldData:
    """The two eigenpairs of the given stability at an equilibrium (Im > 0 member first)."""
    chosen = [e for e in eigenpairs if e.equilibrium == equilibrium.name and e.stability == side]
    if len(chosen) != 2:
        raise ProofFailure(f"{side} manifold of {equilibrium.name} needs two {side} eigenvalues, found {len(chosen)}")
    chosen.sort(key=lambda e: (-e.eigenvalue_mid[1], e.eigenvalue_mid[0]))
    return ManifoldData(side, equilibrium, chosen[0], chosen[1])


def build_phi(c, v1, v2, scale: float) -> VecSeq3:
    """phi(theta) = c + scale (v1 theta1 + v2 theta2) as order-(1,1) Taylor sequences."""
    values = [*c, *v1, *v2]
    if any(isinstance(x, (Interval, ComplexInterval)) for x in values):
        s = exact(scale)

        def enc(x):
            return x if isinstance(x, (Interval, ComplexInterval)) else exact(float(x))

        comps = []
        for i in range(3):
            entries = np.empty((2, 2), dtype=object)
            entries[0, 0] = enc(c[i])
            entries[1, 0] = enc(v1[i]) * s
            entries[0, 1] = enc(v2[i]) * s
            entries[1, 1] = exact(0)
            comps.append(Taylor2Seq(BallArray.from_intervals(entries)))
        return VecSeq3(tuple(comps))
    dtype = np.result_type(*[np.asarray(x) for x in values], np.float64)
    return VecSeq3(
        tuple(Taylor2Seq(np.array([[c[i], v2[i] * scale], [v1[i] * scale, 0.0]], dtype=dtype)) for i in range(3))
    )


def F_manifold(P: VecSeq3, phi: VecSeq3, lam1, lam2, p: Params) -> VecSeq3:
    """P - phi - L_T f(P), order 2K for P of order K."""
    fP = f(P, p)
    return VecSeq3(tuple(Pi - phii - apply_LT(fi, lam1, lam2) for Pi, phii, fi in zip(P, phi, fP)))


class ManifoldDerivative:
    """DF(P) = I - Diag(L_T) Df(P), materialised on chosen row and column multi-indices."""

    def __init__(self, table: MultiplierTable, lam1, lam2, like: Taylor2Seq):
        self.table = table
        self.lam1 = lam1
        self.lam2 = lam2
        self.like = like

    @classmethod
    def at(cls, P: VecSeq3, lam1, lam2, p: Params) -> "ManifoldDerivative":
        return cls(df_vecfield_seq(P, p), lam1, lam2, P[0])

    @property
    def rigorous(self) -> bool:
        return self.like.is_rigorous

    def _zeros(self, shape, complex_: bool):
        if self.rigorous:
            return BallArray.zeros(shape, complex_=complex_)
        return np.zeros(shape, dtype=np.complex128 if complex_ else np.float64)

    def apply(self, h: VecSeq3) -> VecSeq3:
        """Action on a sequence triple (full order, no truncation)."""
        out = []
        for i in range(3):
            acc = None
            for j in range(3):
                m = self.table.as_sequence(i, j, self.like)
                if m is None:
                    continue
                term = m * h[j]
                acc = term if acc is None else acc + term
            out.append(h[i] - apply_LT(acc, self.lam1, self.lam2))
        return VecSeq3(tuple(out))

    def block_row(self, i: int, rows, cols, identity: bool = True):
        """Blocks (i, 0..2) side by side for the given row and column multi-indices."""
        K_max = int(max(rows[0].max(), rows[1].max()))
        lt = lt_divisors(K_max, K_max, self.lam1, self.lam2)[rows[0], rows[1]]
        complex_ = self.like.is_complex or isinstance(self.lam1, (complex, ComplexInterval))
        blocks = []
        for j in range(3):
            m = self.table.as_sequence(i, j, self.like)
            if m is None:
                block = self._zeros((rows[0].size, cols[0].size), complex_)
            else:
                M = taylor_mult_matrix(m, rows, cols)
                block = -(lt.reshape(-1, 1) * M) if self.rigorous else -(lt[:, None] * M)
            if identity and i == j:
                eye = ((rows[0][:, None] == cols[0][None, :]) & (rows[1][:, None] == cols[1][None, :])).astype(np.float64)
                block = block + (BallArray.exact(eye) if self.rigorous else eye)
            blocks.append(block)
        if self.rigorous:
            return BallArray.concatenate(blocks, axis=1)
        return np.concatenate(blocks, axis=1)

    def matrix(self, rows, cols, identity: bool = True):
        parts = [self.block_row(i, rows, cols, identity) for i in range(3)]
        if self.rigorous:
            return BallArray.concatenate(parts, axis=0)
        return np.concatenate(parts, axis=0)


def solve_manifold(data: ManifoldData, K: int, scale: float, p: Params, tol: float = 1e-12, max_iter: int = 20) -> VecSeq3:
    """Newton on the order-K truncation starting from phi; returns float coefficients."""
    c, lam1, lam2, v1, v2 = data.mids()
    phi = build_phi(c, v1, v2, scale)
    layout = CoordinateLayout("taylor", K)
    idx = taylor_index(K)

    def F(x: np.ndarray) -> np.ndarray:
        P = layout.unflatten(x).seq
        return layout.flatten(ProductVector(F_manifold(P, phi, lam1, lam2, p).truncate(K)))

    def DF(x: np.ndarray) -> np.ndarray:
        P = layout.unflatten(x).seq
        return ManifoldDerivative.at(P, lam1, lam2, p).matrix(idx, idx)

    x0 = layout.flatten(ProductVector(phi))
    try:
        result = newton(F, DF, x0, tol=tol, max_iter=max_iter)
    except ResonanceError as exc:
        raise ProofFailure(f"{data.name}: {exc}") from exc
    if not result.success:
        raise NewtonFailure(f"{data.name}: Newton failed at scale {scale:.6g} ({result.message}); try a smaller scale")
    logger.debug("%s: Newton converged in %d steps, residual %.3e", data.name, result.iterations, result.residuals[-1])
    P = layout.unflatten(result.x).seq
    if data.is_real:
        return P.map(lambda s: Taylor2Seq(np.real(s.coeffs).astype(np.float64)))
    # midpoints satisfy P_(k1,k2) = conj(P_(k2,k1)) exactly
    return P.map(lambda s: Taylor2Seq(0.5 * (s.coeffs + np.conj(s.coeffs.T))))


def invariance_residual(P: VecSeq3, lam1, lam2, p: Params, n: int = 50) -> float:
    """max |DP(theta) Lambda theta - f(P(theta))| over n points of the unit torus (float)."""
    j = np.arange(n)
    t1 = np.exp(2j * np.pi * j / n)
    t2 = np.exp(2j * np.pi * ((j * 0.6180339887498949) % 1.0))
    values = tuple(s.eval(t1, t2) for s in P)
    lhs = [s.partial(1).eval(t1, t2) * lam1 * t1 + s.partial(2).eval(t1, t2) * lam2 * t2 for s in P]
    rhs = f(values, p)
    return float(max(np.max(np.abs(l - r)) for l, r in zip(lhs, rhs)))


def boundary_magnitude(P: VecSeq3, scale_ratio: float) -> float:
    """max |P_k| scale_ratio^(k1+k2) over max(k1, k2) = K, using P_s(theta) = P_1(s theta)."""
    K = P[0].order[0]
    k1, k2 = np.meshgrid(np.arange(K + 1), np.arange(K + 1), indexing="ij")
    mask = np.maximum(k1, k2) == K
    with np.errstate(divide="ignore"):
        logs = [np.log(np.abs(s.coeffs[mask])) + (k1 + k2)[mask] * math.log(scale_ratio) for s in P]
    return float(np.exp(max(np.max(x) for x in logs)))


def convergent_solution(data: ManifoldData, K: int, p: Params, tol: float, max_iter: int = 20) -> tuple[VecSeq3, float]:
    """Newton solution at the first scale 1, 1/2, 1/4, ... where Newton converges."""
    s0 = 1.0
    for _ in range(12):
        try:
            return solve_manifold(data, K, s0, p, tol=tol, max_iter=max_iter), s0
        except NewtonFailure:
            logger.warning("%s: Newton failed at scale %.6g, halving", data.name, s0)
            s0 /= 2
    raise GuessError(f"{data.name}: no scale with a convergent Newton iteration")


def rescale(P: VecSeq3, ratio: float) -> VecSeq3:
    """P_s from P_1: coefficient (k1, k2) times ratio^(k1+k2)."""
    K1, K2 = P[0].order
    factor = float(ratio) ** np.add.outer(np.arange(K1 + 1), np.arange(K2 + 1))
    return P.map(lambda s: Taylor2Seq(s.coeffs * factor))


def decay_scale(P: VecSeq3, s0: float, decay_target: float) -> float:
    """Scale whose order-K boundary coefficients are about decay_target, P solved at s0."""

    def excess(s: float) -> float:
        return boundary_magnitude(P, s / s0) - decay_target

    lo = hi = s0
    while excess(hi) < 0:
        hi *= 2
    while excess(lo) > 0:
        lo /= 2
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
    return float(f"{lo:.6g}")


def tail_contraction(P: VecSeq3, lam1, lam2, nu, K: int, p: Params) -> Interval:
    """Tail part of Z0: tail factor * ||Df(P)||."""
    return tail_factor(K, lam1, lam2) * df_vecfield_seq(P.rigorous(), p).opnorm(nu)


def contraction_scale(
    data: ManifoldData, P: VecSeq3, s0: float, upper: float, K: int, nu, p: Params, z_target: float
) -> float:
    """Largest scale up to upper keeping the tail part of Z0 below z_target, P solved at s0.

    ||Df(P_s)|| grows with s, so this is a bisection on [0, upper].
    """
    _, lam1, lam2, _, _ = data.enclosures()

    def z_tail(s: float) -> float:
        return tail_contraction(rescale(P, s / s0), lam1, lam2, nu, K, p).hi

    if z_tail(upper) <= z_target:
        return upper
    floor = z_tail(0.0)
    if floor > z_target:
        raise GuessError(
            f"{data.name}: tail bound {floor:.6g} at the equilibrium exceeds {z_target:.6g}; raise manifold.K"
        )
    lo, hi = 0.0, upper
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if z_tail(mid) > z_target:
            hi = mid
        else:
            lo = mid
    scale = float(f"{lo * (1 - 1e-5):.6g}")
    if scale <= 0:
        raise GuessError(f"{data.name}: no positive scale keeps the tail part of Z0 below {z_target:.6g}")
    logger.info("%s: scale %.6g -> %.6g keeps the tail part of Z0 below %.6g", data.name, upper, scale, z_target)
    return scale


def min_real_part(lam1, lam2) -> float:
    """Lower bound of min |Re lambda_i|; both real parts must share a sign."""
    re = [x if isinstance(x, Interval) else x.re for x in (lam1, lam2)]
    if all(r.hi < 0 for r in re) or all(r.lo > 0 for r in re):
        return min(r.mig for r in re)
    raise ProofFailure(f"eigenvalue real parts {re[0]} and {re[1]} are not in the same open half-plane")


def tail_factor(K: int, lam1, lam2) -> Interval:
    """Upper bound of sup over max(k1, k2) > K of 1/|k1 lambda1 + k2 lambda2|."""
    return 1 / (exact(K + 1) * Interval(min_real_part(lam1, lam2)))


class ManifoldService:
    """Validation of the local stable manifold of c0 and the local unstable manifold of c1"""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.params = Params(config.model.a, config.model.b)

    def scale_for(self, side: str) -> Optional[float]:
        return self.config.manifold.scale_s if side == "stable" else self.config.manifold.scale_u

    def tune(self, data: ManifoldData) -> float:
        return self.tuned(data)[0]

    def tuned(self, data: ManifoldData) -> tuple[float, ManifoldCertificate]:
        """Scale meeting the decay target whose proof passes the gate, with its certificate.

        Starts from the decay-target scale capped by the tail part of Z0, then
        shrinks by manifold.scale_shrink after every failed gate.
        """
        cfg = self.config.manifold
        p = self.params
        P, s0 = convergent_solution(data, cfg.K, p, cfg.newton_tol, self.config.newton.max_iter)
        scale = decay_scale(P, s0, cfg.decay_target)
        scale = contraction_scale(data, P, s0, scale, cfg.K, cfg.nu, p, cfg.z_target)
        for _ in range(cfg.tune_attempts):
            try:
                cert = self.validate(data, scale)
            except ProofFailure as exc:
                if exc.result is None:
                    raise
                logger.warning("%s: gate failed at scale %.6g (Z = %s), shrinking", data.name, scale, exc.result.Z)
                scale = float(f"{scale * cfg.scale_shrink:.6g}")
                continue
            logger.info("%s: tuned eigenvector scale %.6g", data.name, scale)
            return scale, cert
        raise GuessError(f"{data.name}: contraction gate failed at every scale tried; raise manifold.K")

    def validate(self, data: ManifoldData, scale: Optional[float] = None) -> ManifoldCertificate:
        cfg = self.config.manifold
        p = self.params
        K, nu = cfg.K, cfg.nu
        if scale is None:
            scale = self.scale_for(data.side)
        if scale is None:
            return self.tuned(data)[1]

        P_bar = solve_manifold(data, K, scale, p, tol=cfg.newton_tol, max_iter=self.config.newton.max_iter)
        _, lam1_mid, lam2_mid, _, _ = data.mids()
        residual = invariance_residual(P_bar, lam1_mid, lam2_mid, p)

        c, lam1, lam2, v1, v2 = data.enclosures()
        tail = tail_factor(K, lam1, lam2)
        layout = CoordinateLayout("taylor", K)
        idx = taylor_index(K)
        try:
            A_K = approx_inverse_float(ManifoldDerivative.at(P_bar, lam1_mid, lam2_mid, p).matrix(idx, idx))
        except SingularMatrixError as exc:
            raise ProofFailure(f"{data.name}: {exc}") from exc
        A = make_tail_extended(A_K, layout)

        # Y = ||A F(P_bar)||, F evaluated with certified c, lambda, v
        P_r = P_bar.rigorous()
        phi_r = build_phi(c, v1, v2, scale)
        try:
            F_r = F_manifold(P_r, phi_r, lam1, lam2, p)
        except ResonanceError as exc:
            raise ProofFailure(f"{data.name}: {exc}") from exc
        Y = product_space_norm(A.matvec(ProductVector(F_r)), nu)

        Z0 = self._z0(P_r, A_K, lam1, lam2, nu, K, tail)
        Z1_rate = self._z1_rate(A_K, lam1, lam2, nu, K, tail)
        R = float((Interval(Y.hi) * exact(cfg.R_factor)).hi)
        Z1 = Z1_rate * exact(R)
        Z = Interval(0.0, (Z0 + Z1).hi)
        existence = interval_of_existence(Y, Z, R)
        if self.config.rpa.report_uniqueness_radius:
            existence = with_uniqueness(existence, Z0, Z1_rate)
        logger.info("%s manifold: Y = %s, Z0 = %s, Z1 = %s -> %s", data.name, Y, Z0, Z1, existence)
        if not existence.success:
            raise ProofFailure(f"{data.name} manifold: contraction gate failed", existence)

        return ManifoldCertificate(
            name=data.name,
            side=data.side,
            equilibrium=data.equilibrium.name,
            eigenpairs=[data.e1.name, data.e2.name],
            K=K,
            nu=str(nu),
            scale=scale,
            eigenvalues=[enclosure_to_list(lam1), enclosure_to_list(lam2)],
            eigenvalue_mids=[[float(np.real(x)), float(np.imag(x))] for x in (lam1_mid, lam2_mid)],
            coefficients=[seq_to_json(s) for s in P_bar],
            r=existence.r_inf,
            invariance_residual=residual,
            bounds=Bounds.from_result(existence, Z0, Z1),
        )

    def _z0(self, P_r: VecSeq3, A_K: np.ndarray, lam1, lam2, nu, K: int, tail: Interval) -> Interval:
        """max(||Pi_K - A DF(P_bar) Pi_K||, tail factor * ||Df(P_bar)||)."""
        p = self.params
        deriv = ManifoldDerivative.at(P_r, lam1, lam2, p)
        cols = taylor_index(K)
        layout = CoordinateLayout("taylor", K)
        w = layout.weights(nu)

        B_top = deriv.matrix(cols, cols)
        C_top = BallArray.exact(np.eye(A_K.shape[0])) - BallArray.exact(A_K) @ B_top
        sums = column_norms(C_top, w)[1]

        # rows K < max(k1, k2) <= 2K, where A acts as the identity
        r1, r2 = taylor_index(2 * K)
        keep = np.maximum(r1, r2) > K
        rows = (r1[keep], r2[keep])
        w_lo, w_hi = taylor_weights(2 * K, 2 * K, nu)
        w_rows = w_hi[rows]
        for i in range(3):
            block = deriv.block_row(i, rows, cols, identity=False)
            sums = upper(sums + upper(w_rows @ block.mag(), rows[0].size + 2), 1)
        finite = float(np.max(upper(sums / w.lo, 1)))
        tail_part = tail * deriv.table.opnorm(nu)
        logger.debug("Z0 finite part %.6g, tail part %s", finite, tail_part)
        return Interval(0.0, max(finite, tail_part.hi))

    def _z1_rate(self, A_K: np.ndarray, lam1, lam2, nu, K: int, tail: Interval) -> Interval:
        """2 max(||A_K Diag(L_T) Pi_K||, tail factor); Z1(R) is this times R."""
        lt = lt_divisors(K, K, lam1, lam2).ravel()
        lt3 = BallArray.concatenate([lt, lt, lt])
        scaled = BallArray.exact(A_K) * lt3.reshape(1, -1)
        w = CoordinateLayout("taylor", K).weights(nu)
        finite = weighted_opnorm(scaled, w, w)
        return 2 * Interval(0.0, max(finite.hi, tail.hi))


def load_manifold(cert: ManifoldCertificate) -> VecSeq3:
    """Midpoint coefficients stored in a certificate."""
    return VecSeq3(tuple(seq_from_json(c) for c in cert.coefficients))
