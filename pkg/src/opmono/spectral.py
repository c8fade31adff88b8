"""Functional calculus ``f(M) = Q diag(f(w)) Q*`` for Hermitian matrices."""
from __future__ import annotations

import numpy as np

from .errors import DomainError
from .functions import BlackBox, ScalarFunction
from .hermitian import HERMITIAN_TOL, reconstruct, require_pd


def _boundary(w):
    scale = np.maximum(1.0, np.maximum(np.abs(w[..., 0]), np.abs(w[..., -1])))
    return HERMITIAN_TOL * scale


def apply(f, M):
    """Apply ``f`` to the spectrum of ``M``.

    Functions that extend continuously to 0 accept eigenvalues down to
    ``-1e-12 max(1, |M|)`` (clamped to 0); all others require every eigenvalue
    to exceed ``1e-12 max(1, |M|)``. Near-boundary spectra are errors, never
    silently clamped into the open domain.
    """
    if not isinstance(f, ScalarFunction):
        f = BlackBox(f)
    w, Q = np.linalg.eigh(np.asarray(M))
    bound = _boundary(w)[..., None]
    if f.closed_at_zero:
        bad = w < -bound
    else:
        bad = w <= bound
    if np.any(bad):
        raise DomainError(
            f"eigenvalue {float(np.min(w[bad])):.6g} outside the domain of {f}",
            value=float(np.min(w[bad])),
        )
    fw = f(np.maximum(w, 0.0))
    if not np.all(np.isfinite(fw)):
        raise DomainError(f"{f} is not finite on the spectrum")
    return reconstruct(fw, Q)


def sqrt_and_inv_sqrt(M):
    w, Q = require_pd(np.asarray(M))
    s = np.sqrt(w)
    return reconstruct(s, Q), reconstruct(1.0 / s, Q)


def sqrt_pd(M):
    w, Q = require_pd(np.asarray(M))
    return reconstruct(np.sqrt(w), Q)


def inv_sqrt_pd(M):
    w, Q = require_pd(np.asarray(M))
    return reconstruct(1.0 / np.sqrt(w), Q)


def power_pd(M, t):
    """``M**t`` for positive definite ``M``; ``t`` may vary along the batch axes."""
    w, Q = require_pd(np.asarray(M))
    t = np.asarray(t, dtype=float)
    if t.ndim:
        t = t[..., None]
    return reconstruct(np.power(w, t), Q)
