import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opmono import hermitian as h
from opmono.errors import DimensionMismatchError, NotPositiveDefiniteError


def _op_norm(M):
    return np.linalg.norm(M, 2)


class TestConstruction:
    def test_symmetrizes_roundoff(self):
        M = np.array([[1.0, 2.0 + 1e-15], [2.0, 3.0]])
        H = h.hermitian(M)
        np.testing.assert_array_equal(H, h.dagger(H))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            h.hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_complex_entries_kept(self):
        M = np.array([[2.0, 1j], [-1j, 2.0]])
        np.testing.assert_allclose(h.eigvalsh(M), [1.0, 3.0])


class TestEigh:
    def test_identity(self):
        w, Q = h.eigh(np.eye(3))
        np.testing.assert_allclose(w, [1, 1, 1])
        np.testing.assert_allclose(Q.conj().T @ Q, np.eye(3), atol=1e-14)

    def test_diagonal(self):
        w, _ = h.eigh(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(w, [1, 2, 3])

    def test_two_by_two_by_hand(self):
        w, _ = h.eigh(np.array([[2.0, 1.0], [1.0, 2.0]]))
        np.testing.assert_allclose(w, [1, 3])

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_reconstruction_many(self, method):
        rng = np.random.default_rng(7)
        count = 1000 if method == "lapack" else 160
        worst_rec = worst_unit = 0.0
        for k in range(count):
            dim = 1 + k % 16
            M = h.random_pd(dim, (-2, 2), rng) - 10.0 ** rng.uniform(-2, 2) * np.eye(dim)
            w, Q = h.eigh(M, method=method)
            assert np.all(np.diff(w) >= 0)
            scale = max(1.0, _op_norm(M))
            worst_rec = max(worst_rec, _op_norm(h.reconstruct(w, Q) - M) / scale)
            worst_unit = max(worst_unit, _op_norm(Q.conj().T @ Q - np.eye(dim)))
        assert worst_rec <= 1e-10
        assert worst_unit <= 1e-10

    def test_jacobi_matches_lapack(self):
        M = h.random_pd(6, (-2, 2), 3)
        np.testing.assert_allclose(h.eigh(M, "jacobi").eigenvalues, h.eigh(M).eigenvalues, rtol=1e-12)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            h.eigh(np.eye(2), method="qr")


class TestLoewner:
    def test_identity_multiples(self):
        c = h.loewner_compare(np.eye(2), 2 * np.eye(2))
        assert c.verdict is h.Order.LEQ
        assert c.min_eig_diff == pytest.approx(1.0)

    def test_reflexive(self):
        A = h.random_pd(4, seed=1)
        assert h.loewner_compare(A, A).verdict is h.Order.EQUAL

    def test_incomparable(self):
        c = h.loewner_compare(np.diag([1.0, 3.0]), np.diag([2.0, 2.0]))
        assert c.verdict is h.Order.INCOMPARABLE

    def test_tolerance_used(self):
        A, B = np.diag([1.0, 5.0]), np.diag([2.0, 7.0])
        assert h.loewner_compare(A, B, 1e-6).tolerance_used == pytest.approx(7e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            h.loewner_compare(np.eye(2), np.eye(3))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 5))
    def test_antisymmetry_and_psd_link(self, seed, dim):
        rng = np.random.default_rng(seed)
        A = h.random_pd(dim, seed=rng)
        B = A + h.random_pd(dim, seed=rng) * rng.choice([-1.0, 1.0]) * 0.5
        fwd = h.loewner_compare(A, B).verdict
        back = h.loewner_compare(B, A).verdict
        assert (fwd is h.Order.LEQ) == (back is h.Order.GEQ)
        tol = 1e-8 * max(1.0, _op_norm(A), _op_norm(B)) / max(1.0, _op_norm(B - A))
        if fwd in (h.Order.LEQ, h.Order.EQUAL):
            assert h.is_psd(B - A, tol)

    def test_transitivity(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            A = h.random_pd(3, seed=rng)
            B = A + h.random_pd(3, seed=rng)
            C = B + h.random_pd(3, seed=rng)
            ab, bc = h.loewner_compare(A, B), h.loewner_compare(B, C)
            if ab.min_eig_diff > 2 * ab.tolerance_used and bc.min_eig_diff > 2 * bc.tolerance_used:
                assert h.loewner_compare(A, C).verdict is h.Order.LEQ


class TestDefiniteness:
    @pytest.mark.parametrize(
        "M, pd, psd",
        [
            (np.eye(4), True, True),
            (np.diag([1.0, 0.0]), False, True),
            (np.array([[1.0, 1.0], [1.0, 1.0]]), False, True),
            (-np.eye(2), False, False),
            (np.array([[3.0, 1.0], [1.0, 0.0]]), False, False),
        ],
    )
    def test_examples(self, M, pd, psd):
        assert h.is_pd(M) is pd
        assert h.is_psd(M) is psd


class TestConjugateInverse:
    def test_conjugate_examples(self):
        A = h.random_pd(2, seed=0)
        np.testing.assert_allclose(h.conjugate(np.eye(2), A), A)
        np.testing.assert_allclose(h.conjugate(2 * np.eye(2), A), 4 * A)
        np.testing.assert_allclose(h.conjugate(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])), np.diag([3.0, 16.0]))

    def test_conjugate_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            h.conjugate(np.eye(2), np.eye(3))

    def test_inverse_examples(self):
        np.testing.assert_allclose(h.inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))
        np.testing.assert_allclose(h.inverse(np.eye(5)), np.eye(5))
        np.testing.assert_allclose(
            h.inverse(np.array([[2.0, 1.0], [1.0, 2.0]])), np.array([[2.0, -1.0], [-1.0, 2.0]]) / 3, atol=1e-15
        )

    def test_inverse_requires_pd(self):
        with pytest.raises(NotPositiveDefiniteError):
            h.inverse(np.diag([1.0, 0.0]))

    def test_inverse_residual_and_involution(self):
        rng = np.random.default_rng(5)
        for dim in (1, 3, 8):
            M = h.random_pd(dim, (-2, 2), rng)
            cond = np.linalg.cond(M)
            assert _op_norm(M @ h.inverse(M) - np.eye(dim)) <= 1e-9 * cond
            err = np.linalg.norm(h.inverse(h.inverse(M)) - M) / np.linalg.norm(M)
            assert err <= 1e-8 * cond**2

    def test_sqrt_congruence_roundtrip(self):
        from opmono.spectral import inv_sqrt_pd, sqrt_pd

        rng = np.random.default_rng(6)
        A, C = h.random_pd(4, seed=rng), h.random_pd(4, seed=rng)
        S = sqrt_pd(C)
        back = h.conjugate(inv_sqrt_pd(C), h.conjugate(S, A))
        np.testing.assert_allclose(back, A, rtol=1e-8, atol=1e-8 * _op_norm(A))


class TestRandom:
    def test_degenerate_interval(self):
        np.testing.assert_allclose(h.random_pd(1, (0, 0), 42), [[1.0]])

    def test_spectrum_bounds(self):
        w = h.eigvalsh(h.random_pd(3, (-2, 2), 9))
        assert np.all(w >= 1e-2 * (1 - 1e-12)) and np.all(w <= 1e2 * (1 + 1e-12))

    def test_deterministic(self):
        np.testing.assert_array_equal(h.random_pd(4, seed=123), h.random_pd(4, seed=123))

    def test_batched_shape(self):
        assert h.random_pd(3, seed=0, size=7).shape == (7, 3, 3)

    def test_haar_unitary(self):
        U = h.haar_unitary(5, np.random.default_rng(0), (10,))
        np.testing.assert_allclose(U @ h.dagger(U), np.broadcast_to(np.eye(5), U.shape), atol=1e-13)

    def test_singular_examples(self):
        np.testing.assert_array_equal(h.random_psd_singular(2, 0, 1), np.zeros((2, 2)))
        M = h.random_psd_singular(3, 2, 1)
        assert h.is_psd(M) and not h.is_pd(M)
        M = h.random_psd_singular(4, 1, 1)
        assert np.trace(M).real > 0
        assert abs(np.linalg.det(M)) < 1e-12

    @pytest.mark.parametrize("rank", [-1, 3])
    def test_singular_rank_range(self, rank):
        with pytest.raises(ValueError):
            h.random_psd_singular(3, rank, 0)
