"""
Point proofs: validated equilibria and validated eigenpairs of Df at them.
"""
import logging
from typing import Optional

import numpy as np

from dependencies.config import PipelineConfig
from models import Bounds, EigenCertificate, EquilibriumCertificate, enclosure_to_list, interval_to_list
from numerics.ballarray import BallArray
from numerics.errors import SingularMatrixError
from numerics.interval import Interval, exact, midpoint_radius
from numerics.linop import WeightProfile, approx_inverse_float, vector_norm, weighted_opnorm
from numerics.rpa import interval_of_existence, newton
from numerics.vector_field import Df_array, Df_box, Params, f, f_array
from services.errors import GuessError, NewtonFailure, ProofFailure

logger = logging.getLogger(__name__)

# name -> Newton starting point
EQUILIBRIA = {
    "c0": (0.0, 0.0, 0.0),
    "c1": (1.0, 0.0, 1.0),
}


def _opnorm_l1(M: BallArray) -> Interval:
    rows, cols = M.shape
    return weighted_opnorm(M, WeightProfile.ones(rows), WeightProfile.ones(cols))


def _stability(re: Interval) -> str:
    if re.hi < 0:
        return "stable"
    if re.lo > 0:
        return "unstable"
    return "indefinite"


def eigen_initial_guesses(J: np.ndarray) -> list[tuple[complex, np.ndarray, int]]:
    """Numerical eigenpairs (lambda, v, l_star) of a 3x3 matrix.

    Each v is scaled so its largest-magnitude component (index l_star,
    0-based) equals 1. Pairs are ordered by real part, then imaginary part.
    """
    lam, V = np.linalg.eig(np.asarray(J, dtype=np.float64))
    scale = max(1.0, float(np.max(np.abs(lam))))
    for i in range(len(lam)):
        for j in range(i + 1, len(lam)):
            if abs(lam[i] - lam[j]) < 1e-8 * scale:
                raise GuessError(f"clustered eigenvalues {lam[i]} and {lam[j]} are not supported")
    guesses = []
    for k in np.lexsort((lam.imag, lam.real)):
        v = V[:, k].astype(np.complex128)
        l_star = int(np.argmax(np.abs(v)))
        v = v / v[l_star]
        v[l_star] = 1.0
        lam_k = complex(lam[k])
        if lam_k.imag == 0.0:
            v = v.real.astype(np.complex128)
        guesses.append((lam_k, v, l_star))
    return guesses


def conjugate_pair(cert: EigenCertificate, name: Optional[str] = None) -> EigenCertificate:
    """Certificate for the complex conjugate eigenpair (f has real coefficients)."""

    def conj(v: list[float]) -> list[float]:
        return [v[0], v[1], -v[3], -v[2]]

    if name is None:
        name = cert.conjugate_of if cert.conjugate_of is not None else f"{cert.name}_conj"
    return cert.model_copy(
        update={
            "name": name,
            "eigenvalue": conj(cert.eigenvalue),
            "eigenvalue_mid": [cert.eigenvalue_mid[0], -cert.eigenvalue_mid[1]],
            "eigenvector": [conj(v) for v in cert.eigenvector],
            "eigenvector_mid": [[re, -im] for re, im in cert.eigenvector_mid],
            "conjugate_of": None if cert.conjugate_of is not None else cert.name,
        }
    )


class PointProofService:
    """Validated equilibria and eigenpairs"""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.params = Params(config.model.a, config.model.b)

    def validate_equilibrium(self, name: str, c_init, R_factor: float = 10.0) -> EquilibriumCertificate:
        """Newton, approximate inverse, Y and box Z bounds, then the contraction gate"""
        p = self.params
        result = newton(
            lambda c: f_array(c, p),
            lambda c: Df_array(c, p),
            np.asarray(c_init, dtype=np.float64),
            tol=self.config.newton.tol,
            max_iter=self.config.newton.max_iter,
        )
        if not result.success:
            raise NewtonFailure(f"equilibrium {name}: Newton failed from {tuple(c_init)}: {result.message}")
        c_bar = result.x
        try:
            A = BallArray.exact(approx_inverse_float(Df_array(c_bar, p)))
        except SingularMatrixError as exc:
            raise ProofFailure(f"equilibrium {name}: {exc}") from exc

        point = [exact(float(v)) for v in c_bar]
        F = BallArray.from_intervals(list(f(tuple(point), p)))
        Y = vector_norm(A @ F)
        R = float((Interval(Y.hi) * exact(R_factor)).hi)

        box = midpoint_radius(c_bar, R)
        Z = _opnorm_l1(BallArray.exact(np.eye(3)) - A @ Df_box(box, p))
        existence = interval_of_existence(Y, Z, R)
        logger.info("equilibrium %s: Y = %s, Z = %s, R = %.6g -> %s", name, Y, Z, R, existence)
        if not existence.success:
            raise ProofFailure(f"equilibrium {name}: contraction gate failed", existence)

        r = existence.r_inf
        return EquilibriumCertificate(
            name=name,
            c_bar=[float(v) for v in c_bar],
            r=r,
            enclosure=[interval_to_list(x) for x in midpoint_radius(c_bar, r)],
            bounds=Bounds.from_result(existence, Z, Interval(0.0)),
        )

    def validate_eigenpair(
        self,
        equilibrium: EquilibriumCertificate,
        guess: tuple[complex, np.ndarray, int],
        name: str,
        R_factor: float = 10.0,
    ) -> EigenCertificate:
        """Validate a zero of (Jv - lambda v, v[l*] - 1) with J = Df over the equilibrium box"""
        p = self.params
        lam0, v0, l_star = guess
        J = Df_array(np.asarray(equilibrium.c_bar), p)
        e = np.zeros(3)
        e[l_star] = 1.0

        def G(z: np.ndarray) -> np.ndarray:
            v, lam = z[:3], z[3]
            return np.concatenate([J @ v - lam * v, [v[l_star] - 1.0]])

        def DG(z: np.ndarray) -> np.ndarray:
            v, lam = z[:3], z[3]
            top = np.hstack([J - lam * np.eye(3), -v[:, None]])
            return np.vstack([top, np.concatenate([e, [0.0]])[None, :]])

        def G_real(x: np.ndarray) -> np.ndarray:
            g = G(x[:4] + 1j * x[4:])
            return np.concatenate([g.real, g.imag])

        def DG_real(x: np.ndarray) -> np.ndarray:
            D = DG(x[:4] + 1j * x[4:])
            return np.block([[D.real, -D.imag], [D.imag, D.real]])

        z0 = np.concatenate([v0, [lam0]]).astype(np.complex128)
        result = newton(
            G_real,
            DG_real,
            np.concatenate([z0.real, z0.imag]),
            tol=self.config.newton.tol,
            max_iter=self.config.newton.max_iter,
        )
        if not result.success:
            raise NewtonFailure(f"eigenpair {name}: Newton failed: {result.message}")
        z_bar = result.x[:4] + 1j * result.x[4:]
        is_real = not np.any(z_bar.imag)
        if is_real:
            z_bar = z_bar.real
        v_bar, lam_bar = z_bar[:3], z_bar[3]

        try:
            A = BallArray.exact(approx_inverse_float(DG(z_bar)))
        except SingularMatrixError as exc:
            raise ProofFailure(f"eigenpair {name}: {exc}") from exc

        J_box = Df_box(equilibrium.box(), p)
        v_ball = BallArray.exact(v_bar)
        lam_ball = BallArray.exact(np.asarray(lam_bar))
        G_ball = BallArray.concatenate([J_box @ v_ball - lam_ball * v_ball, BallArray.zeros((1,))])
        Y = vector_norm(A @ G_ball)
        R = float((Interval(Y.hi) * exact(R_factor)).hi)

        v_box = BallArray(v_bar, R)
        lam_box = BallArray(np.asarray(lam_bar), R)
        top = BallArray.concatenate(
            [J_box - BallArray.exact(np.eye(3)) * lam_box, -v_box.reshape(3, 1)], axis=1
        )
        DG_box = BallArray.concatenate([top, BallArray.exact(np.concatenate([e, [0.0]])[None, :])])
        Z = _opnorm_l1(BallArray.exact(np.eye(4)) - A @ DG_box)
        existence = interval_of_existence(Y, Z, R)
        logger.info("eigenpair %s: Y = %s, Z = %s -> %s", name, Y, Z, existence)
        if not existence.success:
            raise ProofFailure(f"eigenpair {name}: contraction gate failed", existence)

        r = existence.r_inf
        enclosure = BallArray(z_bar, r).to_intervals()
        if is_real:
            # a real center and a unique zero in a conjugation-symmetric ball force a real zero
            enclosure = [z if isinstance(z, Interval) else z.re for z in enclosure]
        lam_enc = enclosure[3]
        re = lam_enc if isinstance(lam_enc, Interval) else lam_enc.re
        stability = _stability(re)
        if stability == "indefinite":
            logger.warning("eigenpair %s: real part %s is not sign-definite", name, re)
        return EigenCertificate(
            name=name,
            equilibrium=equilibrium.name,
            eigenvalue=enclosure_to_list(lam_enc),
            eigenvalue_mid=[float(np.real(lam_bar)), float(np.imag(lam_bar))],
            eigenvector=[enclosure_to_list(x) for x in enclosure[:3]],
            eigenvector_mid=[[float(np.real(x)), float(np.imag(x))] for x in v_bar],
            normalization_index=l_star + 1,
            r=r,
            stability=stability,
            bounds=Bounds.from_result(existence, Z, Interval(0.0)),
        )

    def validate_eigenpairs(self, equilibrium: EquilibriumCertificate) -> list[EigenCertificate]:
        """All three eigenpairs; for a complex pair only Im > 0 is validated"""
        J = Df_array(np.asarray(equilibrium.c_bar), self.params)
        guesses = eigen_initial_guesses(J)
        certs: list[Optional[EigenCertificate]] = [None] * len(guesses)
        for k, guess in enumerate(guesses):
            if guess[0].imag > 0:
                certs[k] = self.validate_eigenpair(equilibrium, guess, f"{equilibrium.name}_lambda{k + 1}")
        for k, guess in enumerate(guesses):
            if guess[0].imag < 0:
                partner = next(
                    j for j, g in enumerate(guesses) if g[0].imag > 0 and abs(g[0] - guess[0].conjugate()) < 1e-8
                )
                certs[k] = conjugate_pair(certs[partner], name=f"{equilibrium.name}_lambda{k + 1}")
            elif guess[0].imag == 0:
                certs[k] = self.validate_eigenpair(equilibrium, guess, f"{equilibrium.name}_lambda{k + 1}")
        return [c for c in certs if c is not None]

    def run(self) -> tuple[list[EquilibriumCertificate], list[EigenCertificate]]:
        equilibria = [self.validate_equilibrium(name, c) for name, c in EQUILIBRIA.items()]
        eigenpairs: list[EigenCertificate] = []
        for eq in equilibria:
            eigenpairs.extend(self.validate_eigenpairs(eq))
        return equilibria, eigenpairs


def summarize(eigenpairs: list[EigenCertificate], equilibrium: str) -> str:
    """Plain-words eigenvalue summary of one equilibrium, stable groups first."""
    words = {1: "one", 2: "two", 3: "three"}
    groups: dict[tuple[str, str], int] = {}
    for e in eigenpairs:
        if e.equilibrium != equilibrium:
            continue
        kind = "complex conjugate" if e.is_complex else "real"
        groups[(kind, e.stability)] = groups.get((kind, e.stability), 0) + 1
    parts = []
    for (kind, stability), n in sorted(groups.items(), key=lambda kv: (kv[0][1] != "stable", kv[0][0])):
        noun = "eigenvalue" if n == 1 else "eigenvalues"
        parts.append(f"{words.get(n, str(n))} {kind} {stability} {noun}")
    return " and ".join(parts)
