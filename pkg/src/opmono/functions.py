"""Positive scalar functions on (0, inf) and their duals ``f*(x) = 1/f(1/x)``.

Each function object is callable on numpy arrays without argument checks;
:func:`evaluate` is the checked entry point. Removable singularities of the
two-parameter families are handled by rewriting them in terms of ``expm1``,
``log1p`` and ``exprel``, which stay accurate right up to (and at) the
singular parameter values.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import exprel

from .errors import DomainError, SpecParseError

_EPS_CBRT = np.finfo(float).eps ** (1.0 / 3.0)


class ScalarFunction:
    """Base class. Subclasses implement ``__call__`` and ``spec``."""

    # True when the function extends continuously to x = 0 (e.g. sqrt, log(1+x)).
    closed_at_zero = False

    def __call__(self, x):
        raise NotImplementedError

    @property
    def spec(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.spec


def _fmt(v):
    return repr(float(v))


@dataclass(frozen=True)
class Power(ScalarFunction):
    alpha: float

    @property
    def closed_at_zero(self):
        return self.alpha >= 0

    def __call__(self, x):
        with np.errstate(divide="ignore"):
            return np.power(x, self.alpha)

    @property
    def spec(self):
        return f"power:a={_fmt(self.alpha)}"


@dataclass(frozen=True)
class LogShift(ScalarFunction):
    """``x -> log(1 + x)``."""

    closed_at_zero = True

    def __call__(self, x):
        return np.log1p(x)

    @property
    def spec(self):
        return "logshift"


@dataclass(frozen=True)
class QuasiArithmeticRep(ScalarFunction):
    """``(1 - alpha + alpha x**p)**(1/p)``, with ``x**alpha`` at ``p = 0``."""

    p: float
    alpha: float

    def __post_init__(self):
        if not -1.0 <= self.p <= 1.0:
            raise ValueError(f"qapm exponent p must lie in [-1, 1], got {self.p}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"qapm weight must lie in [0, 1], got {self.alpha}")

    @property
    def closed_at_zero(self):
        return self.p > 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.p == 0.0:
            with np.errstate(divide="ignore"):
                return np.power(x, self.alpha)
        with np.errstate(divide="ignore", invalid="ignore"):
            logx = np.log(x)
            return np.exp(np.log1p(self.alpha * np.expm1(self.p * logx)) / self.p)

    @property
    def spec(self):
        return f"qapm:p={_fmt(self.p)},a={_fmt(self.alpha)}"


@dataclass(frozen=True)
class SymmetricRep(ScalarFunction):
    """Representing function of the symmetric mean family.

    ``g_r(x) = (b/a) (x**a - 1) / (x**b - 1)`` with ``a = (3r+1)/2`` and
    ``b = (3r-1)/2``, evaluated as ``exprel(a log x) / exprel(b log x)``.
    """

    r: float

    def __post_init__(self):
        if not -1.0 <= self.r <= 1.0:
            raise ValueError(f"symmetric-mean parameter r must lie in [-1, 1], got {self.r}")

    def __call__(self, x):
        logx = np.log(np.asarray(x, dtype=float))
        a = (3.0 * self.r + 1.0) / 2.0
        b = (3.0 * self.r - 1.0) / 2.0
        return exprel(a * logx) / exprel(b * logx)

    @property
    def spec(self):
        return f"sym:r={_fmt(self.r)}"


@dataclass(frozen=True)
class Dual(ScalarFunction):
    """``x -> 1 / inner(1/x)``."""

    inner: ScalarFunction

    def __call__(self, x):
        with np.errstate(divide="ignore"):
            return 1.0 / self.inner(1.0 / np.asarray(x, dtype=float))

    @property
    def spec(self):
        return f"dual({self.inner.spec})"


@dataclass(frozen=True)
class Reciprocal(ScalarFunction):
    """``x -> 1 / inner(x)``; reverses the Loewner order of positive ``inner``."""

    inner: ScalarFunction

    def __call__(self, x):
        with np.errstate(divide="ignore"):
            return 1.0 / self.inner(np.asarray(x, dtype=float))

    @property
    def spec(self):
        return f"recip({self.inner.spec})"


@dataclass(frozen=True)
class Affine(ScalarFunction):
    """``x -> a + b x``."""

    a: float
    b: float
    closed_at_zero = True

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b <= 0:
            raise ValueError("affine needs a >= 0, b >= 0 and a + b > 0")

    def __call__(self, x):
        return self.a + self.b * np.asarray(x, dtype=float)

    @property
    def spec(self):
        return f"affine:a={_fmt(self.a)},b={_fmt(self.b)}"


@dataclass(frozen=True)
class BlackBox(ScalarFunction):
    """A user-supplied positive function; accepted by the classifier only."""

    fn: Callable = field(compare=False)
    name: str = "user"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        try:
            y = np.asarray(self.fn(x), dtype=float)
            if y.shape == x.shape:
                return y
        except Exception:
            pass
        return np.vectorize(self.fn, otypes=[float])(x)

    @property
    def spec(self):
        return f"blackbox:{self.name}"


def evaluate(f: ScalarFunction, x):
    """Evaluate ``f`` at positive ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("scalar functions are evaluated on (0, inf) only", value=float(np.min(x)))
    y = f(x)
    return float(y) if y.ndim == 0 else y


def dualize(f: ScalarFunction) -> ScalarFunction:
    if isinstance(f, Dual):
        return f.inner
    return Dual(f)


def derivative(f: ScalarFunction, x):
    """Central difference with step ``x * eps**(1/3)``."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("derivative requires x > 0", value=float(np.min(x)))
    h = x * _EPS_CBRT
    h = (x + h) - x
    if np.any(h <= 0):
        raise DomainError("finite-difference step underflowed", value=float(np.min(x)))
    d = (f(x + h) - f(x - h)) / (2.0 * h)
    return float(d) if d.ndim == 0 else d


def is_symmetric_rep(f: ScalarFunction, sample_count=64) -> bool:
    """Check ``f(x) == x f(1/x)`` on a log grid over [1e-3, 1e3]."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    x = np.logspace(-3.0, 3.0, sample_count)
    fx = f(x)
    return bool(np.all(np.abs(fx - x * f(1.0 / x)) <= 1e-10 * (1.0 + fx)))


_TOKEN = re.compile(r"^([a-z]+)(?::(.*))?$")
_FAMILIES = {
    "power": (Power, ("a",)),
    "logshift": (LogShift, ()),
    "qapm": (QuasiArithmeticRep, ("p", "a")),
    "sym": (SymmetricRep, ("r",)),
    "affine": (Affine, ("a", "b")),
}


def parse_params(text, expected, where):
    params = {}
    if text:
        for item in text.split(","):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in expected or key in params:
                raise SpecParseError(f"bad parameter {item!r} in {where!r}")
            try:
                params[key] = float(value)
            except ValueError:
                raise SpecParseError(f"parameter {key} is not a number in {where!r}") from None
    missing = [k for k in expected if k not in params]
    if missing:
        raise SpecParseError(f"missing parameter(s) {missing} in {where!r}")
    return [params[k] for k in expected]


def unwrap(text, head):
    """Return the argument of ``head(...)`` or None."""
    if text.startswith(head + "(") and text.endswith(")"):
        return text[len(head) + 1 : -1]
    return None


def parse_function(text: str) -> ScalarFunction:
    """Parse e.g. ``"power:a=0.5"``, ``"dual(logshift)"``, ``"recip(logshift)"``, ``"affine:a=1,b=2"``."""
    text = text.strip()
    inner = unwrap(text, "dual")
    if inner is not None:
        return Dual(parse_function(inner))
    inner = unwrap(text, "recip")
    if inner is not None:
        return Reciprocal(parse_function(inner))
    m = _TOKEN.match(text)
    if not m or m.group(1) not in _FAMILIES:
        raise SpecParseError(f"unknown function spec {text!r}")
    cls, keys = _FAMILIES[m.group(1)]
    args = parse_params(m.group(2), keys, text)
    try:
        return cls(*args)
    except ValueError as exc:
        raise SpecParseError(str(exc)) from None
