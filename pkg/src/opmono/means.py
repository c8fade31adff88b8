"""Operator connections and means on positive definite matrices.

The weighted arithmetic, harmonic and geometric means use their closed
forms. Every other connection goes through the single sandwich formula

    A sigma B = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}

where ``f`` is the representing function (``f(X) = I sigma X``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import functions as fn
from .errors import DimensionMismatchError, DomainError, LadderExhaustedError, NotPositiveDefiniteError, SpecParseError
from .hermitian import (
    DEFAULT_TOL_REL,
    hermitian,
    identity_like,
    inverse,
    is_psd,
    reconstruct,
    require_pd,
    spectral_norm,
    symmetrize,
)
from .spectral import apply, sqrt_and_inv_sqrt

DEFAULT_LADDER_RUNGS = 41
DEFAULT_LADDER_TOL = 1e-9


class Mean:
    """Base class for connection specs."""

    def rep(self) -> fn.ScalarFunction:
        raise NotImplementedError

    @property
    def spec(self) -> str:
        raise NotImplementedError

    @property
    def is_symmetric(self) -> bool:
        return False

    @property
    def is_mean(self) -> bool:
        return abs(float(self.rep()(1.0)) - 1.0) <= 1e-12

    def __str__(self):
        return self.spec


def _check_weight(t, name="t"):
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"weight {name} must lie in [0, 1], got {t}")


@dataclass(frozen=True)
class Arith(Mean):
    t: float = 0.5

    def __post_init__(self):
        _check_weight(self.t)

    def rep(self):
        return fn.QuasiArithmeticRep(1.0, self.t)

    @property
    def spec(self):
        return f"arith:t={fn._fmt(self.t)}"

    @property
    def is_symmetric(self):
        return self.t == 0.5


@dataclass(frozen=True)
class Harm(Mean):
    t: float = 0.5

    def __post_init__(self):
        _check_weight(self.t)

    def rep(self):
        return fn.QuasiArithmeticRep(-1.0, self.t)

    @property
    def spec(self):
        return f"harm:t={fn._fmt(self.t)}"

    @property
    def is_symmetric(self):
        return self.t == 0.5


@dataclass(frozen=True)
class Geom(Mean):
    t: float = 0.5

    def __post_init__(self):
        _check_weight(self.t)

    def rep(self):
        return fn.Power(self.t)

    @property
    def spec(self):
        return f"geom:t={fn._fmt(self.t)}"

    @property
    def is_symmetric(self):
        return self.t == 0.5


@dataclass(frozen=True)
class QuasiArithmetic(Mean):
    """Quasi-arithmetic power mean with exponent ``p`` and weight ``alpha``."""

    p: float
    alpha: float

    def __post_init__(self):
        fn.QuasiArithmeticRep(self.p, self.alpha)

    def rep(self):
        return fn.QuasiArithmeticRep(self.p, self.alpha)

    @property
    def spec(self):
        return f"qapm:p={fn._fmt(self.p)},a={fn._fmt(self.alpha)}"

    @property
    def is_symmetric(self):
        return self.alpha == 0.5


@dataclass(frozen=True)
class Symmetric(Mean):
    """The symmetric family: r = 1, 0, -1 give the arithmetic, geometric and harmonic means."""

    r: float

    def __post_init__(self):
        fn.SymmetricRep(self.r)

    def rep(self):
        return fn.SymmetricRep(self.r)

    @property
    def spec(self):
        return f"sym:r={fn._fmt(self.r)}"

    @property
    def is_symmetric(self):
        return True


@dataclass(frozen=True)
class FromFunction(Mean):
    """The connection whose representing function is ``f``."""

    f: fn.ScalarFunction

    def __post_init__(self):
        if isinstance(self.f, fn.BlackBox):
            raise TypeError("black-box functions carry no operator-monotone guarantee and cannot define a connection")

    def rep(self):
        return self.f

    @property
    def spec(self):
        return f"fromfn({self.f.spec})"

    @property
    def is_symmetric(self):
        return fn.is_symmetric_rep(self.f)


@dataclass(frozen=True)
class Adjoint(Mean):
    """``(A, B) -> (A^{-1} sigma B^{-1})^{-1}``."""

    inner: Mean

    def rep(self):
        return fn.dualize(self.inner.rep())

    @property
    def spec(self):
        return f"adjoint({self.inner.spec})"

    @property
    def is_symmetric(self):
        return self.inner.is_symmetric


def rep(m: Mean) -> fn.ScalarFunction:
    return m.rep()


def adjoint_of(m: Mean) -> Mean:
    return Adjoint(m)


def _weight(t, ndim):
    t = np.asarray(t, dtype=float)
    if t.ndim:
        t = t.reshape(t.shape + (1,) * ndim)
    return t


def arith_mean(A, B, t=0.5):
    t = _weight(t, 2)
    return symmetrize((1.0 - t) * A + t * B)


def harmonic_mean(A, B, t=0.5):
    """``[(1-t) A^{-1} + t B^{-1}]^{-1}``; exact at scalar ``t`` in {0, 1}."""
    if np.ndim(t) == 0:
        if t == 0:
            return np.array(A, copy=True)
        if t == 1:
            return np.array(B, copy=True)
    t = _weight(t, 2)
    return inverse((1.0 - t) * inverse(A) + t * inverse(B))


def geometric_mean(A, B, t=0.5):
    S, Si = sqrt_and_inv_sqrt(A)
    X = symmetrize(Si @ B @ Si)
    w, Q = require_pd(X, "A^{-1/2} B A^{-1/2}")
    t = np.asarray(t, dtype=float)
    if t.ndim:
        t = t[..., None]
    return symmetrize(S @ reconstruct(np.power(w, t), Q) @ S)


def kubo_ando(f, A, B):
    """Connection with representing function ``f``, anchored on ``A``."""
    S, Si = sqrt_and_inv_sqrt(A)
    X = symmetrize(Si @ B @ Si)
    return symmetrize(S @ apply(f, X) @ S)


def _check_pair(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape[-1] != B.shape[-1]:
        raise DimensionMismatchError(f"dimension mismatch: {A.shape[-1]} vs {B.shape[-1]}")
    return A, B


def evaluate(m: Mean, A, B):
    """Evaluate ``A m B`` for positive definite ``A``, ``B`` (batched)."""
    A, B = _check_pair(A, B)
    require_pd(A, "A")
    require_pd(B, "B")
    return _evaluate(m, A, B)


def _evaluate(m, A, B):
    if isinstance(m, Arith):
        return arith_mean(A, B, m.t)
    if isinstance(m, Harm):
        return harmonic_mean(A, B, m.t)
    if isinstance(m, Geom):
        return geometric_mean(A, B, m.t)
    return kubo_ando(m.rep(), A, B)


def evaluate_by_inversion(m: Adjoint, A, B):
    """The adjoint computed literally as ``(A^{-1} inner B^{-1})^{-1}``."""
    if not isinstance(m, Adjoint):
        raise TypeError("evaluate_by_inversion expects an Adjoint spec")
    A, B = _check_pair(A, B)
    return inverse(evaluate(m.inner, inverse(A), inverse(B)))


def default_ladder(scale, rungs=DEFAULT_LADDER_RUNGS):
    """``eps_k = 2**-k * scale`` for k = 0 .. rungs-1 (``scale`` may be batched)."""
    k = np.arange(rungs, dtype=float)
    return np.asarray(scale, dtype=float)[..., None] * 2.0**-k


@dataclass
class LadderResult:
    value: np.ndarray
    rungs_used: np.ndarray
    iterates: list
    eps: list


def evaluate_psd(m: Mean, A, B, eps_ladder=None, tol=DEFAULT_LADDER_TOL, rungs=DEFAULT_LADDER_RUNGS, full=False):
    """Evaluate a connection on positive semidefinite operands by regularization.

    The mean is computed at ``(A + eps I, B + eps I)`` down a decreasing ladder
    and the first iterate whose Frobenius step from its predecessor is at most
    ``tol * max(1, |A|, |B|)`` is returned. The default ladder is
    ``eps_k = 2**-k max(1, |A|, |B|)``; an explicit ``eps_ladder`` is used as
    given. With ``full=True`` a :class:`LadderResult` carrying every iterate is
    returned instead of the bare value.
    """
    A, B = _check_pair(hermitian(A), hermitian(B))
    if not (is_psd(A) and is_psd(B)):
        raise NotPositiveDefiniteError("operands must be positive semidefinite")
    scale = np.maximum(1.0, np.maximum(spectral_norm(A), spectral_norm(B)))
    batch = A.shape[:-2]

    def done(value, rungs_used, iterates, eps):
        if full:
            return LadderResult(value, np.broadcast_to(rungs_used, batch), iterates, eps)
        return value

    # no regularization needed
    if isinstance(m, Arith):
        return done(arith_mean(A, B, m.t), 1, [arith_mean(A, B, m.t)], [0.0])
    if isinstance(m, Harm) and m.t in (0.0, 1.0):
        value = harmonic_mean(A, B, m.t)
        return done(value, 1, [value], [0.0])

    if eps_ladder is None:
        ladder = default_ladder(scale, rungs)
    else:
        ladder = np.broadcast_to(np.asarray(eps_ladder, dtype=float), batch + (len(eps_ladder),))
        if np.any(np.diff(ladder, axis=-1) >= 0) or np.any(ladder <= 0):
            raise ValueError("eps_ladder must be strictly decreasing and positive")
    I = identity_like(A)
    result = np.zeros_like(A, dtype=np.result_type(A, B, float))
    converged = np.zeros(batch, dtype=bool)
    used = np.zeros(batch, dtype=int)
    iterates, eps_seen = [], []
    prev = None
    for k in range(ladder.shape[-1]):
        eps = ladder[..., k]
        e = np.asarray(eps)[..., None, None]
        try:
            X = _evaluate(m, A + e * I, B + e * I)
        except (DomainError, NotPositiveDefiniteError):
            break
        iterates.append(X)
        eps_seen.append(eps)
        if prev is not None:
            step = np.linalg.norm(X - prev, axis=(-2, -1))
            newly = (~converged) & (step <= tol * scale)
            result = np.where(newly[..., None, None], X, result)
            used = np.where(newly, k + 1, used)
            converged |= newly
            if np.all(converged):
                return done(result, used, iterates, eps_seen)
        prev = X
    raise LadderExhaustedError(
        f"regularization ladder exhausted after {len(iterates)} rungs without meeting tol={tol:g}",
        iterates=iterates[-2:],
        eps=eps_seen[-2:],
    )


_MEANS = {
    "arith": (Arith, ("t",)),
    "harm": (Harm, ("t",)),
    "geom": (Geom, ("t",)),
    "qapm": (QuasiArithmetic, ("p", "a")),
    "sym": (Symmetric, ("r",)),
}
_TOKEN = re.compile(r"^([a-z]+)(?::(.*))?$")


def parse_mean(text: str, default_t=None) -> Mean:
    """Parse e.g. ``"geom:t=0.5"``, ``"adjoint(qapm:p=-0.5,a=0.3)"``, ``"fromfn(logshift)"``.

    ``default_t`` fills in a missing weight for arith/harm/geom.
    """
    text = text.strip()
    inner = fn.unwrap(text, "adjoint")
    if inner is not None:
        return Adjoint(parse_mean(inner, default_t))
    inner = fn.unwrap(text, "fromfn")
    if inner is not None:
        return FromFunction(fn.parse_function(inner))
    m = _TOKEN.match(text)
    if not m or m.group(1) not in _MEANS:
        raise SpecParseError(f"unknown mean spec {text!r}")
    cls, keys = _MEANS[m.group(1)]
    params = m.group(2)
    if keys == ("t",) and not params and default_t is not None:
        params = f"t={default_t!r}"
    args = fn.parse_params(params, keys, text)
    try:
        return cls(*args)
    except ValueError as exc:
        raise SpecParseError(str(exc)) from None
