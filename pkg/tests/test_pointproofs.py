"""
Tests for validated equilibria and eigenpairs.
"""

from fractions import Fraction

import numpy as np
import pytest

from dependencies.services import get_point_proof_service
from services.errors import GuessError, NewtonFailure
from services.pointproof_service import PointProofService, conjugate_pair, eigen_initial_guesses, summarize
from tests.dependencies import get_test_settings

# roots of det(Df(c) - lambda I) at a = 3/4, b = 9/20
C0_EIGENVALUES = [-1.44300047, -0.45, 0.69300047]
C1_CHAR_POLY = [1.0, 1.2, 0.3375, 0.9]


@pytest.mark.unit
class TestEquilibria:
    """Newton plus the contraction gate on f(c) = 0."""

    def test_both_equilibria(self, equilibria):
        """c0 and c1 are certified."""
        assert set(equilibria) == {"c0", "c1"}
        assert all(c.bounds.success for c in equilibria.values())

    def test_nontrivial_equilibrium_encloses_sqrt_b(self, equilibria):
        """The c1 enclosure contains (sqrt(9/20), 0, 1) with a tiny radius."""
        c1 = equilibria["c1"]
        assert c1.r <= 1e-14
        (x_lo, x_hi), (y_lo, y_hi), (z_lo, z_hi) = c1.enclosure
        assert Fraction(x_lo) ** 2 <= Fraction(9, 20) <= Fraction(x_hi) ** 2
        assert y_lo <= 0.0 <= y_hi
        assert z_lo <= 1.0 <= z_hi

    def test_origin(self, equilibria):
        """The origin is certified with a point-sized enclosure around it."""
        c0 = equilibria["c0"]
        assert all(lo <= 0.0 <= hi for lo, hi in c0.enclosure)

    def test_mirror_equilibrium(self):
        """Starting from (-1, 0, 1) finds the mirror image of c1."""
        service = PointProofService(get_test_settings())
        cert = service.validate_equilibrium("c1_mirror", (-1.0, 0.0, 1.0))
        assert cert.c_bar[0] == pytest.approx(-np.sqrt(0.45))
        assert cert.bounds.success

    def test_newton_failure(self):
        """One Newton step from far away is not enough."""
        config = get_test_settings(newton={"max_iter": 1})
        with pytest.raises(NewtonFailure):
            PointProofService(config).validate_equilibrium("c1", (40.0, 3.0, -7.0))


@pytest.mark.unit
class TestEigenpairs:
    """Validated zeros of (Jv - lambda v, v[l*] - 1)."""

    def test_count_and_names(self, eigenpairs):
        """Three eigenpairs per equilibrium, numbered by real part."""
        names = [e.name for e in eigenpairs]
        assert names == [f"c{i}_lambda{k}" for i in (0, 1) for k in (1, 2, 3)]

    def test_origin_eigenvalues(self, eigenpairs):
        """The origin has real eigenvalues -1.443, -0.45 and 0.693."""
        values = [e.eigenvalue for e in eigenpairs if e.equilibrium == "c0"]
        for (lo, hi, im_lo, im_hi), expected in zip(values, C0_EIGENVALUES):
            assert lo <= hi
            assert abs((lo + hi) / 2 - expected) < 1e-6
            assert im_lo == im_hi == 0.0

    def test_real_eigenpairs_validated_directly(self, equilibria):
        """All three eigenpairs of the origin are real and certified on their own."""
        certs = get_point_proof_service(get_test_settings()).validate_eigenpairs(equilibria["c0"])
        assert [c.name for c in certs] == ["c0_lambda1", "c0_lambda2", "c0_lambda3"]
        for cert, expected in zip(certs, C0_EIGENVALUES):
            assert not cert.is_complex
            assert cert.conjugate_of is None
            assert cert.bounds.success
            lo, hi, im_lo, im_hi = cert.eigenvalue
            assert lo <= expected + 1e-6 and expected - 1e-6 <= hi
            assert im_lo == im_hi == 0.0
            assert all(v[2] == v[3] == 0.0 for v in cert.eigenvector)

    def test_nontrivial_eigenvalues(self, eigenpairs):
        """The c1 eigenvalues are the roots of the characteristic polynomial."""
        roots = sorted(np.roots(C1_CHAR_POLY), key=lambda z: (z.real, z.imag))
        mids = [e.lambda_mid() for e in eigenpairs if e.equilibrium == "c1"]
        for mid, root in zip(mids, roots):
            assert abs(mid - root) < 1e-6

    def test_eigenvalue_enclosures_are_thin(self, eigenpairs):
        """Every eigenpair radius is far below the eigenvalue gaps."""
        assert all(e.r < 1e-12 for e in eigenpairs)

    def test_conjugate_pair_is_linked(self, eigenpairs):
        """The Im < 0 member of the c1 pair is derived from its partner."""
        derived = [e for e in eigenpairs if e.conjugate_of is not None]
        assert len(derived) == 1
        partner = next(e for e in eigenpairs if e.name == derived[0].conjugate_of)
        assert derived[0].lambda_mid() == partner.lambda_mid().conjugate()

    def test_conjugate_pair_twice(self, eigenpairs):
        """Conjugating twice gives back the original enclosures."""
        cert = next(e for e in eigenpairs if e.is_complex and e.conjugate_of is None)
        back = conjugate_pair(conjugate_pair(cert), name=cert.name)
        assert back.eigenvalue == cert.eigenvalue
        assert back.eigenvector == cert.eigenvector
        assert back.conjugate_of is None

    def test_eigenvector_normalization(self, eigenpairs):
        """Component l* of the eigenvector enclosure contains 1."""
        for e in eigenpairs:
            re_lo, re_hi, im_lo, im_hi = e.eigenvector[e.normalization_index - 1]
            assert re_lo <= 1.0 <= re_hi
            assert im_lo <= 0.0 <= im_hi

    def test_summaries(self, eigenpairs):
        """Plain-words summaries of both equilibria."""
        assert summarize(eigenpairs, "c0") == "two real stable eigenvalues and one real unstable eigenvalue"
        c1 = summarize(eigenpairs, "c1")
        assert "two complex conjugate unstable eigenvalues" in c1
        assert "one real stable eigenvalue" in c1


@pytest.mark.unit
class TestInitialGuesses:
    """Numerical eigenpairs used to start Newton."""

    def test_sorted_and_normalized(self):
        """Guesses are ordered by real part and normalized at the largest entry."""
        J = np.diag([3.0, -1.0, 2.0])
        guesses = eigen_initial_guesses(J)
        assert [g[0].real for g in guesses] == [-1.0, 2.0, 3.0]
        for lam, v, l_star in guesses:
            assert v[l_star] == 1.0
            assert np.allclose(J @ v, lam * v)

    def test_clustered_eigenvalues(self):
        """A repeated eigenvalue is refused."""
        with pytest.raises(GuessError):
            eigen_initial_guesses(np.eye(3))
