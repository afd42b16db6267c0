"""
Connecting orbit from the unstable manifold of c1 to the stable manifold of c0.

The orbit on [0, tau] is rescaled to s in [-1, 1] and expanded in Chebyshev
polynomials. Unknowns are x = (u, alpha, theta1, theta2) with tau fixed:

    u - e0 P(gamma(alpha)) - (tau/2) L_C f(u) = 0
    u(1) - Q(theta1, theta2)                  = 0

where gamma(alpha) = (e^{i alpha}, e^{-i alpha}) walks the unit circle of the
unstable chart P and Q is the stable chart.
"""
import logging
import math
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import least_squares

from dependencies.config import OrbitSection, PipelineConfig
from models import Bounds, ConnectionCertificate, EquilibriumCertificate, ManifoldCertificate
from numerics.ballarray import BallArray, upper
from numerics.errors import DomainError, SingularMatrixError
from numerics.interval import ComplexInterval, Interval, exact, exp, log, midpoint_radius, unit_circle, unit_circle_derivative
from numerics.linop import (
    CoordinateLayout,
    ProductVector,
    WeightProfile,
    approx_inverse_float,
    column_norms,
    make_tail_extended,
    product_space_norm,
    weighted_opnorm,
)
from numerics.rpa import interval_of_existence, newton, with_uniqueness
from numerics.seqspace import (
    VecSeq3,
    apply_LC,
    cheb_derivative,
    cheb_interpolate,
    cheb_mult_matrix,
    cheb_weights,
    eval_at_one,
    evaluation_row,
    evaluation_tail_norm,
    lc_corner_norm,
    lc_matrix,
    lc_norm,
    lc_tail_norm,
    lobatto_nodes,
    seq_to_json,
)
from numerics.vector_field import Df_array, Params, df_vecfield_seq, f, f_array
from services.errors import GuessError, NewtonFailure, ProofFailure
from services.manifold_service import load_manifold

logger = logging.getLogger(__name__)

DECAY_LIMIT = 1e-10
ODE_RESIDUAL_LIMIT = 1e-8


# -- manifold charts ---------------------------------------------------------


def derivative_widening(r: float, delta: float, nu) -> float:
    """Bound on |d/dtheta_j (P* - Pbar)| over |theta_j| <= delta given ||P* - Pbar||_nu <= r.

    sup_k k delta^(k-1) / nu^k is 1/nu when delta <= nu/e and at most
    1 / (e delta ln(nu/delta)) otherwise.
    """
    nu_i = exact(nu)
    if delta >= nu_i.lo:
        raise DomainError(f"evaluation radius {delta} reaches the chart weight {nu}")
    r_i = exact(r)
    e = exp(exact(1))
    if (e * exact(delta)).hi <= nu_i.lo:
        return (r_i / nu_i).hi
    d = exact(delta)
    return (r_i / (e * d * log(nu_i / d))).hi


def _widen(x, rad: float):
    pad = Interval(-rad, rad)
    if isinstance(x, ComplexInterval):
        return ComplexInterval(x.re + pad, x.im + pad)
    return x + pad


def _modulus_bound(theta) -> float:
    if isinstance(theta, (Interval, ComplexInterval)):
        return abs(theta).hi
    return abs(theta)


class ManifoldChart:
    """A certified manifold parameterization with float and enclosure evaluation."""

    def __init__(self, cert: ManifoldCertificate):
        self.cert = cert
        self.P = load_manifold(cert)
        self.dP = (self.P.map(lambda s: s.partial(1)), self.P.map(lambda s: s.partial(2)))
        self.nu = Fraction(cert.nu)
        self._rigorous = None

    @property
    def r(self) -> float:
        return self.cert.r

    def value(self, t1, t2) -> np.ndarray:
        return np.array([s.eval(t1, t2) for s in self.P])

    def jacobian(self, t1, t2) -> np.ndarray:
        return np.array([[d[i].eval(t1, t2) for d in self.dP] for i in range(3)])

    def circle_value(self, alpha: float) -> np.ndarray:
        t = np.exp(1j * alpha)
        return self.value(t, np.conj(t)).real

    def circle_derivative(self, alpha: float) -> np.ndarray:
        t = np.exp(1j * alpha)
        J = self.jacobian(t, np.conj(t))
        return (J[:, 0] * 1j * t - J[:, 1] * 1j * np.conj(t)).real

    def _rigorous_parts(self):
        if self._rigorous is None:
            self._rigorous = (self.P.rigorous(), tuple(d.rigorous() for d in self.dP))
        return self._rigorous

    def enclose(self, theta1, theta2, on_unit_circle: bool = False):
        """Enclosures of P*(theta) and of its two partial derivatives."""
        return rigorous_eval_P(self, theta1, theta2, on_unit_circle)

    def enclose_circle(self, alpha) -> tuple[list[Interval], list[Interval]]:
        """Real enclosures of P*(gamma(alpha)) and d/dalpha P*(gamma(alpha))."""
        t1, t2 = unit_circle(alpha)
        dt1, dt2 = unit_circle_derivative(alpha)
        values, jac = self.enclose(t1, t2, on_unit_circle=True)
        out, derivs = [], []
        for i in range(3):
            v = values[i]
            if not v.im.contains(0):
                raise ProofFailure(
                    f"{self.cert.name}: imaginary part {v.im} of P(gamma(alpha)) excludes 0; "
                    "the chart is not conjugation symmetric"
                )
            out.append(v.re)
            derivs.append((jac[i][0] * dt1 + jac[i][1] * dt2).re)
        return out, derivs


def rigorous_eval_P(chart: ManifoldChart, theta1, theta2, on_unit_circle: bool = False):
    """Value and Jacobian enclosures of the true parameterization at theta.

    Values are Pbar(theta) widened by r; partials are those of Pbar widened
    by the derivative bound for the larger of |theta1|, |theta2| (exactly 1 on
    the unit circle).
    """
    P_r, dP_r = chart._rigorous_parts()
    if on_unit_circle:
        delta = 1.0
    else:
        delta = max(_modulus_bound(theta1), _modulus_bound(theta2))
    width = derivative_widening(chart.r, delta, chart.nu)
    values = [_widen(s.eval(theta1, theta2), chart.r) for s in P_r]
    jac = [[_widen(d[i].eval(theta1, theta2), width) for d in dP_r] for i in range(3)]
    return values, jac


# -- zero-finding problem ------------------------------------------------------


def F_het(x: ProductVector, tau: float, P: ManifoldChart, Q: ManifoldChart, p: Params) -> ProductVector:
    """Sequence part of order 2K+1 and the three boundary scalars."""
    u = x.seq
    alpha, th1, th2 = x.scalars
    if u.is_rigorous:
        half_tau = exact(tau) / 2
        p_val, _ = P.enclose_circle(alpha)
        q_val = [v for v in Q.enclose(th1, th2)[0]]
    else:
        half_tau = tau / 2
        p_val = P.circle_value(alpha)
        q_val = Q.value(th1, th2).real
    fu = f(u, p)
    seq = VecSeq3(tuple(u[i] - p_val[i] - apply_LC(fu[i]) * half_tau for i in range(3)))
    scalars = tuple(eval_at_one(u[i]) - q_val[i] for i in range(3))
    return ProductVector(seq, scalars)


def _block(values, rigorous: bool):
    if rigorous:
        return BallArray.from_intervals(values)
    return np.asarray(values, dtype=np.float64)


def _join(grid, rigorous: bool):
    if rigorous:
        return BallArray.concatenate([BallArray.concatenate(row, axis=1) for row in grid], axis=0)
    return np.block(grid)


def DF_het(
    x: ProductVector,
    tau: float,
    P: ManifoldChart,
    Q: ManifoldChart,
    p: Params,
    K_rows: int,
    K_cols: int,
    rigorous: bool = False,
    box_radius: float = 0.0,
):
    """Derivative at a float point x on Chebyshev orders <= K_rows (rows) and <= K_cols (columns).

    On the rigorous path the alpha and theta columns are enclosed over
    x +- box_radius.
    """
    u = x.seq.rigorous() if rigorous else x.seq
    alpha, th1, th2 = x.scalars
    table = df_vecfield_seq(u, p)
    like = u[0]
    # row 0 of L_C reads every order of m*h
    K_full = max(K_rows + 1, like.order + K_cols)
    if rigorous:
        half_tau = exact(tau) / 2
        a_box, t1_box, t2_box = midpoint_radius([alpha, th1, th2], box_radius)
        _, dpda = P.enclose_circle(a_box)
        dq = Q.enclose(t1_box, t2_box)[1]
        zero = exact(0)
        lc = lc_matrix(K_full)[: K_rows + 1]
    else:
        half_tau = tau / 2
        dpda = P.circle_derivative(alpha)
        dq = Q.jacobian(th1, th2).real
        zero = 0.0
        lc = lc_matrix(K_full).mid[: K_rows + 1]
    eye = (np.arange(K_rows + 1)[:, None] == np.arange(K_cols + 1)[None, :]).astype(np.float64)

    grid = []
    for i in range(3):
        row = []
        for j in range(3):
            m = table.as_sequence(i, j, like)
            if m is None:
                block = BallArray.zeros((K_rows + 1, K_cols + 1)) if rigorous else np.zeros((K_rows + 1, K_cols + 1))
            else:
                block = -((lc @ cheb_mult_matrix(m, K_cols, K_full)) * half_tau)
            if i == j:
                block = block + (BallArray.exact(eye) if rigorous else eye)
            row.append(block)
        corner = np.full((K_rows + 1, 3), zero, dtype=object)
        corner[0, 0] = -dpda[i]
        row.append(_block(corner, rigorous))
        grid.append(row)
    eval_rows = []
    for j in range(3):
        E = np.full((3, K_cols + 1), zero, dtype=object)
        E[j, :] = [exact(float(v)) if rigorous else float(v) for v in evaluation_row(K_cols)]
        eval_rows.append(_block(E, rigorous))
    corner = np.full((3, 3), zero, dtype=object)
    for i in range(3):
        for j in range(2):
            corner[i, 1 + j] = -dq[i][j]
    eval_rows.append(_block(corner, rigorous))
    grid.append(eval_rows)
    return _join(grid, rigorous)


# -- initial guess and tuning scans ---------------------------------------------


def rk4(w0: np.ndarray, tau: float, steps: int, p: Params) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fixed-step RK4 on [0, tau]: times, states and vector field values."""
    h = tau / steps
    W = np.empty((steps + 1, 3))
    W[0] = w0
    w = np.asarray(w0, dtype=np.float64)
    for n in range(steps):
        k1 = f_array(w, p)
        k2 = f_array(w + 0.5 * h * k1, p)
        k3 = f_array(w + 0.5 * h * k2, p)
        k4 = f_array(w + h * k3, p)
        w = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        W[n + 1] = w
    t = np.linspace(0.0, tau, steps + 1)
    dW = np.array([f_array(v, p) for v in W])
    return t, W, dW


def fit_theta(Q: ManifoldChart, target: np.ndarray, bound: float) -> tuple[np.ndarray, float]:
    """Least-squares theta with Q(theta) ~ target inside |theta_j| <= bound."""
    result = least_squares(
        lambda th: Q.value(th[0], th[1]).real - target,
        x0=np.zeros(2),
        jac=lambda th: Q.jacobian(th[0], th[1]).real,
        bounds=(-bound, bound),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    return result.x, float(np.max(np.abs(result.fun)))


def generate_initial_guess(
    P: ManifoldChart, Q: ManifoldChart, alpha0: float, tau: float, K: int, orbit: OrbitSection, p: Params
) -> ProductVector:
    """Integrate from P(gamma(alpha0)), interpolate at Chebyshev-Lobatto nodes, fit theta."""
    w0 = P.circle_value(alpha0)
    t, W, dW = rk4(w0, tau, orbit.rk4_steps, p)
    spline = CubicHermiteSpline(t, W, dW, axis=0)
    s = lobatto_nodes(K)
    u = VecSeq3(cheb_interpolate(spline(tau * (s + 1.0) / 2.0)))
    theta, residual = fit_theta(Q, W[-1], orbit.theta_max)
    logger.debug("initial guess: endpoint fit residual %.3e at theta = %s", residual, theta)
    if residual > orbit.fit_tol:
        raise GuessError(
            f"orbit endpoint is {residual:.3e} away from the stable chart; increase tau or adjust alpha0"
        )
    return ProductVector(u, (float(alpha0), float(theta[0]), float(theta[1])))


def exit_direction(c0: np.ndarray, p: Params) -> np.ndarray:
    """Left eigenvector of Df(c0) for its unstable eigenvalue."""
    lam, V = np.linalg.eig(Df_array(c0, p).T)
    k = int(np.argmax(lam.real))
    if lam[k].real <= 0 or lam[k].imag != 0:
        raise GuessError(f"Df({c0}) has no real unstable eigenvalue")
    return V[:, k].real


def _trajectory(w0: np.ndarray, t_max: float, p: Params, n: int = 3841):
    sol = solve_ivp(
        lambda _t, w: f_array(w, p),
        (0.0, t_max),
        w0,
        method="DOP853",
        t_eval=np.linspace(0.0, t_max, n),
        rtol=1e-12,
        atol=1e-12,
    )
    return sol.t, sol.y.T


def exit_profile(P: ManifoldChart, alpha: float, c0: np.ndarray, ell: np.ndarray, orbit: OrbitSection, p: Params):
    """(exit side, closest distance to c0) of the trajectory from P(gamma(alpha))."""
    _, W = _trajectory(P.circle_value(alpha), orbit.t_max, p)
    dist = np.linalg.norm(W - c0, axis=1)
    i_near = int(np.argmin(dist))
    xi = (W[i_near:] - c0) @ ell
    leaving = np.flatnonzero(np.abs(xi) >= orbit.exit_radius)
    side = xi[leaving[0]] if leaving.size else xi[-1]
    return float(np.sign(side)), float(dist[i_near])


def scan_alpha(P: ManifoldChart, c0: np.ndarray, orbit: OrbitSection, p: Params) -> float:
    """Angle whose trajectory separates the two exit sides of c0, by scan and bisection."""
    ell = exit_direction(c0, p)
    grid = np.linspace(0.0, 2 * np.pi, orbit.alpha_grid, endpoint=False)
    profiles = [exit_profile(P, a, c0, ell, orbit, p) for a in grid]
    candidates = []
    for k in range(len(grid)):
        lo, hi = grid[k], grid[k] + 2 * np.pi / orbit.alpha_grid
        s_lo, s_hi = profiles[k][0], profiles[(k + 1) % len(grid)][0]
        if s_lo == s_hi:
            continue
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            s_mid, _ = exit_profile(P, mid, c0, ell, orbit, p)
            if s_mid == s_lo:
                lo = mid
            else:
                hi = mid
        alpha = float(0.5 * (lo + hi) % (2 * np.pi))
        _, dmin = exit_profile(P, alpha, c0, ell, orbit, p)
        logger.debug("exit-side change at alpha = %.15g, closest approach %.3e", alpha, dmin)
        if dmin <= orbit.near_radius:
            candidates.append((dmin, alpha))
    if not candidates:
        raise GuessError("no angle on the unstable chart yields a trajectory approaching c0")
    return min(candidates)[1]


def choose_tau(P: ManifoldChart, Q: ManifoldChart, alpha0: float, c0: np.ndarray, orbit: OrbitSection, p: Params) -> float:
    """First time (a multiple of 1/64) at which the trajectory fits the stable chart with |theta| <= theta_target."""
    n = int(orbit.t_max * 64) + 1
    t, W = _trajectory(P.circle_value(alpha0), orbit.t_max, p, n=n)
    dist = np.linalg.norm(W - c0, axis=1)
    for k in np.flatnonzero(dist <= orbit.entry_radius):
        theta, residual = fit_theta(Q, W[k], orbit.theta_max)
        if residual <= orbit.fit_tol and np.max(np.abs(theta)) <= orbit.theta_target:
            return math.ceil(t[k] * 64) / 64
    raise GuessError(f"trajectory from alpha = {alpha0:.15g} never fits the stable chart before t = {orbit.t_max}")


def decay_ratio(u: VecSeq3) -> float:
    """max_i |u_K| / max_k |u_k| over the three components."""
    return float(max(abs(c.coeffs[-1]) / np.max(np.abs(c.coeffs)) for c in u))


# -- service ---------------------------------------------------------------------


class ConnectionService:
    """Validation of the connecting orbit between the two certified manifolds"""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.params = Params(config.model.a, config.model.b)

    def layout(self, K: Optional[int] = None) -> CoordinateLayout:
        return CoordinateLayout("chebyshev", self.config.orbit.K if K is None else K, 3)

    def solve(self, P: ManifoldChart, Q: ManifoldChart, x0: ProductVector, tau: float, K: int) -> ProductVector:
        """Newton on the order-K truncation, keeping |theta_j| <= theta_max."""
        orbit = self.config.orbit
        p = self.params
        layout = self.layout(K)

        def F(v: np.ndarray) -> np.ndarray:
            return layout.flatten(F_het(layout.unflatten(v), tau, P, Q, p))

        def DF(v: np.ndarray) -> np.ndarray:
            return DF_het(layout.unflatten(v), tau, P, Q, p, K, K)

        def project(v: np.ndarray) -> np.ndarray:
            v = v.copy()
            v[-2:] = np.clip(v[-2:], -orbit.theta_max, orbit.theta_max)
            return v

        result = newton(
            F, DF, layout.flatten(x0), tol=orbit.newton_tol, max_iter=self.config.newton.max_iter, project=project
        )
        if not result.success:
            raise NewtonFailure(f"connection: Newton failed ({result.message}); increase tau or adjust alpha0")
        logger.debug("connection: Newton converged in %d steps, residual %.3e", result.iterations, result.residuals[-1])
        return layout.unflatten(result.x)

    def tune(self, P_cert: ManifoldCertificate, Q_cert: ManifoldCertificate, c0: EquilibriumCertificate) -> dict:
        """alpha0, tau and an orbit order with Chebyshev decay below 1e-10."""
        orbit = self.config.orbit
        p = self.params
        P, Q = ManifoldChart(P_cert), ManifoldChart(Q_cert)
        c = np.asarray(c0.c_bar)
        alpha0 = orbit.alpha0 if orbit.alpha0 is not None else scan_alpha(P, c, orbit, p)
        tau = orbit.tau if orbit.tau is not None else choose_tau(P, Q, alpha0, c, orbit, p)
        K = orbit.K
        while True:
            x = self.solve(P, Q, generate_initial_guess(P, Q, alpha0, tau, K, orbit, p), tau, K)
            ratio = decay_ratio(x.seq)
            if ratio <= DECAY_LIMIT:
                break
            if K + 20 > orbit.max_K:
                logger.warning("orbit decay ratio %.3e at K = %d; max_K reached", ratio, K)
                break
            logger.warning("orbit decay ratio %.3e at K = %d, raising the order", ratio, K)
            K += 20
        logger.info("connection tuning: alpha0 = %.15g, tau = %s, K = %d", alpha0, tau, K)
        return {"alpha0": alpha0, "tau": tau, "K": K}

    def validate(
        self,
        P_cert: ManifoldCertificate,
        Q_cert: ManifoldCertificate,
        equilibria: list[EquilibriumCertificate],
    ) -> ConnectionCertificate:
        orbit = self.config.orbit
        p = self.params
        K, mu = orbit.K, orbit.mu
        P, Q = ManifoldChart(P_cert), ManifoldChart(Q_cert)
        alpha0, tau = orbit.alpha0, orbit.tau
        if alpha0 is None or tau is None:
            c0 = next(e for e in equilibria if e.name == Q_cert.equilibrium)
            resolved = self.tune(P_cert, Q_cert, c0)
            alpha0, tau, K = resolved["alpha0"], resolved["tau"], resolved["K"]

        x_bar = self.solve(P, Q, generate_initial_guess(P, Q, alpha0, tau, K, orbit, p), tau, K)
        layout = self.layout(K)
        try:
            A_K = approx_inverse_float(DF_het(x_bar, tau, P, Q, p, K, K))
        except SingularMatrixError as exc:
            raise ProofFailure(f"connection: {exc}") from exc
        A = make_tail_extended(A_K, layout)

        Y = product_space_norm(A.matvec(F_het(x_bar.rigorous(), tau, P, Q, p)), mu)
        R = float((Interval(Y.hi) * exact(orbit.R_factor)).hi)
        Z0 = self._z0(x_bar, A_K, tau, P, Q, K, mu, R)
        Z1_rate = self._z1_rate(A_K, tau, K, mu)
        Z1 = Z1_rate * exact(R)
        Z = Interval(0.0, (Z0 + Z1).hi)
        existence = interval_of_existence(Y, Z, R)
        if self.config.rpa.report_uniqueness_radius:
            existence = with_uniqueness(existence, Z0, Z1_rate)
        logger.info("connection: Y = %s, Z0 = %s, Z1 = %s -> %s", Y, Z0, Z1, existence)
        if not existence.success:
            raise ProofFailure("connection: contraction gate failed", existence)

        r = existence.r_inf
        alpha, th1, th2 = x_bar.scalars
        margin = float((Interval(max(abs(th1), abs(th2))) + exact(r)).hi)
        if margin >= 1.0:
            raise ProofFailure(f"connection: |theta| + r = {margin:.6g} leaves the stable chart domain")
        consistent = self._endpoint_consistent(x_bar, Q, r)
        if not consistent:
            raise ProofFailure("connection: u(1) and Q(theta) enclosures are disjoint")
        residual = check_ode_residual(x_bar.seq, tau, p)

        return ConnectionCertificate(
            K=K,
            mu=str(mu),
            tau=tau,
            alpha=alpha,
            theta=[th1, th2],
            coefficients=[seq_to_json(c) for c in x_bar.seq],
            r=r,
            unstable_manifold=P_cert.name,
            stable_manifold=Q_cert.name,
            equilibria=[P_cert.equilibrium, Q_cert.equilibrium],
            contraction_success=existence.success,
            endpoint_consistent=consistent,
            domain_margin=margin,
            ode_residual=residual,
            bounds=Bounds.from_result(existence, Z0, Z1),
        )

    def _z0(self, x_bar, A_K, tau, P, Q, K: int, mu, R: float) -> Interval:
        """max of the finite part on columns <= 2K+1 and the tail part beyond."""
        p = self.params
        K_in, K_out = 2 * K + 1, 3 * K + 3
        B = DF_het(x_bar, tau, P, Q, p, K_out, K_in, rigorous=True, box_radius=R)
        n_out = K_out + 1
        extra = [i * n_out + K_out for i in range(3)]
        if np.any(B[extra].mag() != 0):
            raise ProofFailure(f"connection: derivative has nonzero rows of order {K_out}")

        head = np.concatenate([np.arange(i * n_out, i * n_out + K + 1) for i in range(3)] + [3 * n_out + np.arange(3)])
        tail = np.concatenate([np.arange(i * n_out + K + 1, i * n_out + K_out) for i in range(3)])
        # identity rows: the same coordinate of the column layout
        n_in = K_in + 1
        col_of_head = np.concatenate([np.arange(i * n_in, i * n_in + K + 1) for i in range(3)] + [3 * n_in + np.arange(3)])
        tail_len = K_out - K - 1
        orders = np.arange(K + 1, K_in + 1)
        row_of_tail = np.concatenate([i * tail_len + orders - K - 1 for i in range(3)])
        col_of_tail = np.concatenate([i * n_in + orders for i in range(3)])
        n_cols = B.shape[1]
        E_head = np.zeros((head.size, n_cols))
        E_head[np.arange(head.size), col_of_head] = 1.0
        E_tail = np.zeros((tail.size, n_cols))
        E_tail[row_of_tail, col_of_tail] = 1.0

        C_head = BallArray.exact(E_head) - BallArray.exact(A_K) @ B[head]
        C_tail = BallArray.exact(E_tail) - B[tail]
        w_head = self.layout(K).weights(mu)
        lo, hi = cheb_weights(K_out - 1, mu)
        w_tail = WeightProfile(np.tile(lo[K + 1:], 3), np.tile(hi[K + 1:], 3))
        sums = upper(column_norms(C_head, w_head)[1] + column_norms(C_tail, w_tail)[1], 1)
        w_in = self.layout(K_in).weights(mu)
        finite = float(np.max(upper(sums / w_in.lo, 1)))

        a_norms = upper(column_norms(A_K, w_head)[1] / w_head.lo, 1)
        n_head = K + 1
        a_order0 = float(max(a_norms[i * n_head] for i in range(3)))
        a_scalars = float(np.max(a_norms[3 * n_head:]))
        M = Interval(a_order0) * lc_corner_norm(K, mu) + lc_tail_norm(K, mu)
        df = df_vecfield_seq(x_bar.seq.rigorous(), p).opnorm(mu)
        tail_part = M * (exact(tau) / 2) * df + Interval(a_scalars) * evaluation_tail_norm(K_in, mu)
        logger.debug("Z0 finite part %.6g, tail part %s", finite, tail_part)
        return Interval(0.0, max(finite, tail_part.hi))

    def _z1_rate(self, A_K, tau, K: int, mu) -> Interval:
        """2 (tau/2) max(||A_K||, 1) ||L_C||; Z1(R) is this times R."""
        w = self.layout(K).weights(mu)
        a_norm = weighted_opnorm(A_K, w, w)
        return 2 * (exact(tau) / 2) * Interval(max(a_norm.hi, 1.0)) * lc_norm(mu)

    def _endpoint_consistent(self, x_bar: ProductVector, Q: ManifoldChart, r: float) -> bool:
        """u*(1) and Q*(theta*) enclosures must meet for every component."""
        _, th1, th2 = x_bar.scalars
        t1, t2 = midpoint_radius([th1, th2], r)
        q_vals = Q.enclose(t1, t2)[0]
        for i, c in enumerate(x_bar.seq.rigorous()):
            u1 = _widen(eval_at_one(c), r)
            q = _widen(q_vals[i], r)
            if u1.isdisjoint(q):
                return False
        return True


def ode_residual(u: VecSeq3, tau: float, p: Params, n: int = 100) -> float:
    """sup over n points of |du/ds - (tau/2) f(u(s))| on the float path."""
    s = np.linspace(-1.0, 1.0, n)
    values = np.array([c.eval(s) for c in u])
    derivs = np.array([cheb_derivative(c).eval(s) for c in u])
    rhs = np.array(f(tuple(values), p))
    return float(np.max(np.abs(derivs - 0.5 * tau * rhs)))


def check_ode_residual(u: VecSeq3, tau: float, p: Params) -> float:
    """ode_residual, refusing orbits that miss the ODE by more than ODE_RESIDUAL_LIMIT."""
    residual = ode_residual(u, tau, p)
    if residual > ODE_RESIDUAL_LIMIT:
        raise ProofFailure(f"connection: ODE residual {residual:.3e} exceeds {ODE_RESIDUAL_LIMIT:g}")
    return residual
