"""Dense Hermitian matrix arithmetic and the Loewner order.

Matrices are plain numpy arrays of shape ``(..., n, n)``; every function
broadcasts over the leading axes so that whole batches of random trials go
through LAPACK in one call.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError, EigenConvergenceError, NotPositiveDefiniteError

HERMITIAN_TOL = 1e-12
EIG_TOL = 1e-10
DEFAULT_TOL_REL = 1e-8
DEFAULT_LOG_EIG_RANGE = (-2.0, 2.0)
JACOBI_MAX_SWEEPS = 30
JACOBI_OFFDIAG_TOL = 1e-14


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class Order(str, enum.Enum):
    LEQ = "LEQ"
    GEQ = "GEQ"
    EQUAL = "EQUAL"
    INCOMPARABLE = "INCOMPARABLE"


@dataclass(frozen=True)
class LoewnerComparison:
    """Outcome of comparing ``A`` and ``B`` through the spectrum of ``B - A``."""

    verdict: Order
    min_eig_diff: float
    max_eig_diff: float
    tolerance_used: float


def dagger(M):
    return np.swapaxes(np.conj(M), -1, -2)


def symmetrize(M):
    """Average ``M`` with its conjugate transpose."""
    return 0.5 * (M + dagger(M))


def hermitian(M, check=True):
    """Return ``M`` as a symmetrized square array.

    With ``check`` the input must already be Hermitian up to roundoff;
    construction repairs asymmetry of that size rather than rejecting it.
    """
    M = np.asarray(M)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2] or M.shape[-1] < 1:
        raise ValueError(f"expected square matrices, got shape {M.shape}")
    if not np.issubdtype(M.dtype, np.inexact):
        M = M.astype(float)
    if check:
        scale = 1.0 + np.max(np.abs(M), axis=(-2, -1))
        skew = np.max(np.abs(M - dagger(M)), axis=(-2, -1))
        if np.any(skew > HERMITIAN_TOL * scale):
            raise ValueError(f"matrix is not Hermitian (skew part {np.max(skew):.3g})")
    return symmetrize(M)


def identity_like(M):
    n = M.shape[-1]
    return np.broadcast_to(np.eye(n, dtype=M.dtype), M.shape).copy()


def _check_same_shape(A, B):
    if A.shape[-1] != B.shape[-1]:
        raise DimensionMismatchError(f"dimension mismatch: {A.shape[-1]} vs {B.shape[-1]}")


def _jacobi_single(M):
    A = np.array(M, dtype=complex)
    n = A.shape[0]
    Q = np.eye(n, dtype=complex)
    threshold = JACOBI_OFFDIAG_TOL * np.linalg.norm(A)

    # computed directly: |A|^2 - |diag A|^2 cancels down to ~sqrt(eps)|A|
    def off_norm():
        return np.linalg.norm(A - np.diag(np.diag(A)))

    for _ in range(JACOBI_MAX_SWEEPS):
        if off_norm() <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                # phase-rotate column q so that A[p, q] is real, then a real rotation
                phase = apq / mag
                app, aqq = A[p, p].real, A[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                tan = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + tan * tan)
                s = tan * c
                G = np.array([[c, s], [-s / phase, c / phase]], dtype=complex)
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = G.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                Q[:, idx] = Q[:, idx] @ G
    else:
        if off_norm() > threshold:
            raise EigenConvergenceError(off_norm())
    w = np.diag(A).real
    order = np.argsort(w)
    return w[order], Q[:, order]


def eigh(M, method="lapack"):
    """Eigendecomposition of Hermitian matrices, eigenvalues ascending.

    ``method="lapack"`` defers to :func:`numpy.linalg.eigh`; ``method="jacobi"``
    runs cyclic complex Jacobi sweeps and is kept as an independent check.
    """
    M = np.asarray(M)
    if method == "lapack":
        w, Q = np.linalg.eigh(M)
        return SpectralDecomposition(w, Q)
    if method != "jacobi":
        raise ValueError(f"unknown eigensolver {method!r}")
    batch = M.shape[:-2]
    n = M.shape[-1]
    flat = M.reshape((-1, n, n))
    ws = np.empty((flat.shape[0], n))
    Qs = np.empty((flat.shape[0], n, n), dtype=complex)
    for k, Mk in enumerate(flat):
        ws[k], Qs[k] = _jacobi_single(Mk)
    return SpectralDecomposition(ws.reshape(batch + (n,)), Qs.reshape(batch + (n, n)))


def eigvalsh(M):
    return np.linalg.eigvalsh(M)


def spectral_norm(M):
    """Operator 2-norm of Hermitian matrices (largest absolute eigenvalue)."""
    w = np.linalg.eigvalsh(M)
    return np.maximum(np.abs(w[..., 0]), np.abs(w[..., -1]))


def reconstruct(w, Q):
    return symmetrize((Q * w[..., None, :]) @ dagger(Q))


def loewner_margin(A, B, scale=None):
    """Smallest eigenvalue of ``B - A`` divided by ``max(1, |A|, |B|)``.

    Nonnegative (up to roundoff) exactly when ``A <= B``.
    """
    if scale is None:
        scale = np.maximum(1.0, np.maximum(spectral_norm(A), spectral_norm(B)))
    return np.linalg.eigvalsh(symmetrize(B - A))[..., 0] / scale


def loewner_compare(A, B, tol_rel=DEFAULT_TOL_REL):
    A = hermitian(A)
    B = hermitian(B)
    _check_same_shape(A, B)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("loewner_compare takes single matrices")
    if tol_rel <= 0:
        raise ValueError("tol_rel must be positive")
    tol = tol_rel * max(1.0, float(spectral_norm(A)), float(spectral_norm(B)))
    w = np.linalg.eigvalsh(B - A)
    lo, hi = float(w[0]), float(w[-1])
    if abs(lo) <= tol and abs(hi) <= tol:
        verdict = Order.EQUAL
    elif lo >= -tol:
        verdict = Order.LEQ
    elif hi <= tol:
        verdict = Order.GEQ
    else:
        verdict = Order.INCOMPARABLE
    return LoewnerComparison(verdict, lo, hi, tol)


def is_pd(M, tol_rel=DEFAULT_TOL_REL):
    w = np.linalg.eigvalsh(hermitian(M))
    scale = np.maximum(1.0, np.maximum(np.abs(w[..., 0]), np.abs(w[..., -1])))
    return bool(np.all(w[..., 0] > tol_rel * scale))


def is_psd(M, tol_rel=DEFAULT_TOL_REL):
    w = np.linalg.eigvalsh(hermitian(M))
    scale = np.maximum(1.0, np.maximum(np.abs(w[..., 0]), np.abs(w[..., -1])))
    return bool(np.all(w[..., 0] >= -tol_rel * scale))


def conjugate(C, A):
    """Congruence ``C A C`` for Hermitian ``C``."""
    C = np.asarray(C)
    A = np.asarray(A)
    _check_same_shape(C, A)
    return symmetrize(C @ A @ C)


def require_pd(M, what="matrix", tol_rel=HERMITIAN_TOL):
    """Eigendecompose ``M`` and raise unless every eigenvalue clears ``tol_rel * max(1, |M|)``."""
    w, Q = np.linalg.eigh(M)
    scale = np.maximum(1.0, np.maximum(np.abs(w[..., 0]), np.abs(w[..., -1])))
    bad = w[..., 0] <= tol_rel * scale
    if np.any(bad):
        raise NotPositiveDefiniteError(f"{what} is not positive definite (smallest eigenvalue {np.min(w[..., 0]):.3g})")
    return w, Q


def inverse(M):
    """Inverse of positive definite matrices via reciprocal eigenvalues."""
    w, Q = require_pd(np.asarray(M))
    return reconstruct(1.0 / w, Q)


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary(dim, rng, size=()):
    """Haar-distributed unitaries from the QR factorization of complex Ginibre matrices."""
    shape = tuple(size) + (dim, dim)
    Z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (d / np.abs(d))[..., None, :]


def _size_tuple(size):
    if size is None:
        return ()
    if np.isscalar(size):
        return (int(size),)
    return tuple(size)


def random_pd(dim, log_eig_range=DEFAULT_LOG_EIG_RANGE, seed=None, size=None):
    """Random positive definite matrices ``Q diag(10**u) Q*``.

    Exponents ``u`` are uniform on ``log_eig_range`` and ``Q`` is Haar; the
    result is a single matrix unless ``size`` asks for a batch.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    lo, hi = log_eig_range
    if lo > hi:
        raise ValueError("empty log-eigenvalue interval")
    rng = _as_rng(seed)
    batch = _size_tuple(size)
    w = 10.0 ** rng.uniform(lo, hi, size=batch + (dim,))
    Q = haar_unitary(dim, rng, batch)
    return reconstruct(w, Q)


def random_psd_singular(dim, rank, seed=None, size=None, log_eig_range=DEFAULT_LOG_EIG_RANGE):
    """Random positive semidefinite matrices with exactly ``rank`` nonzero eigenvalues."""
    if not 0 <= rank < dim:
        raise ValueError(f"rank must satisfy 0 <= rank < dim, got rank={rank}, dim={dim}")
    rng = _as_rng(seed)
    batch = _size_tuple(size)
    lo, hi = log_eig_range
    w = np.zeros(batch + (dim,))
    w[..., :rank] = 10.0 ** rng.uniform(lo, hi, size=batch + (rank,))
    Q = haar_unitary(dim, rng, batch)
    return reconstruct(w, Q)
