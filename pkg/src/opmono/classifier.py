"""Randomized classification of scalar functions as operator monotone.

Two families of evidence are combined:

* mean inequalities, e.g. ``f(A !_t B) <= f(A) !_t f(B)`` (holds for every
  operator monotone increasing ``f``) and ``f(A ! B) >= f(A) ! f(B)`` (for
  decreasing ones), tested on random positive definite pairs;
* divided-difference (Loewner) matrices, which are positive semidefinite at
  every point set exactly when ``f`` is operator monotone.

Passing trials only ever make a label *consistent*; a replayable
counterexample is the only definitive outcome.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from . import functions as fn
from . import means
from .errors import DomainError, NotPositiveDefiniteError
from .hermitian import (
    DEFAULT_LOG_EIG_RANGE,
    DEFAULT_TOL_REL,
    haar_unitary,
    loewner_margin,
    random_pd,
    spectral_norm,
    symmetrize,
)
from .io import matrix_from_json, matrix_to_json
from .spectral import apply

OMI = "OMI-consistent"
OMD = "OMD-consistent"
NEITHER = "NEITHER"
INCONCLUSIVE = "INCONCLUSIVE"

SYM_GRID = (-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)

# items whose statement carries a weight t; the others are fixed at t = 1/2
WEIGHTED = {"I3", "I5", "I7", "D3", "D5"}
MEAN_ITEMS = {f"I{k}" for k in range(2, 10)} | {f"D{k}" for k in range(2, 8)}
ORDER_ITEMS = {"monotone", "decreasing"}
LOEWNER_ITEMS = {"loewner", "loewner_nsd"}


def _split_id(inequality_id):
    if inequality_id.startswith("dual:"):
        return True, inequality_id[5:]
    return False, inequality_id


def known_id(inequality_id):
    _, base = _split_id(inequality_id)
    return base in MEAN_ITEMS | ORDER_ITEMS | LOEWNER_ITEMS


def default_sigma(item):
    """The fixed symmetric mean used for the 'some sigma' items."""
    return means.Symmetric(0.0)


def _sym_means(rs=SYM_GRID):
    return [means.Symmetric(r) for r in rs]


def _apply_f(f, M):
    return apply(f, M)


def _mean_sides(item, f, A, B, t, sigma):
    """Return ``(smaller, larger)`` lists of sides for mean item ``item``.

    For 'for all sigma' items several right-hand sides are returned and the
    margin is the minimum over them.
    """
    half = 0.5
    tw = t if item in WEIGHTED else half
    fA, fB = _apply_f(f, A), _apply_f(f, B)
    kind = item[0]
    k = int(item[1:])
    if kind == "I" and k in (2, 3):
        lhs = _apply_f(f, means.arith_mean(A, B, tw))
        return [(means.arith_mean(fA, fB, tw), lhs)]
    if kind == "I":
        lhs = _apply_f(f, means.harmonic_mean(A, B, tw))
        if k in (4, 5):
            rhs = [means.geometric_mean(fA, fB, tw)]
        elif k in (6, 7):
            rhs = [means.harmonic_mean(fA, fB, tw)]
        elif k == 8:
            rhs = [means.evaluate(s, fA, fB) for s in (sigma or _sym_means())]
        else:
            s = sigma[0] if sigma else default_sigma(item)
            rhs = [means.evaluate(s, fA, fB)]
        return [(lhs, r) for r in rhs]
    lhs = _apply_f(f, means.harmonic_mean(A, B, tw))
    if k in (2, 3):
        rhs = [means.geometric_mean(fA, fB, tw)]
    elif k in (4, 5):
        rhs = [means.harmonic_mean(fA, fB, tw)]
    elif k == 6:
        rhs = [means.evaluate(s, fA, fB) for s in (sigma or _sym_means())]
    else:
        s = sigma[0] if sigma else default_sigma(item)
        rhs = [means.evaluate(s, fA, fB)]
    return [(r, lhs) for r in rhs]


def loewner_matrix(f, points):
    """Divided-difference matrix of ``f`` at strictly ascending positive points.

    Off-diagonal entries are ``(f(x_i) - f(x_j)) / (x_i - x_j)``, the diagonal
    holds the central-difference derivative. ``points`` may carry batch axes.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise ValueError("need at least one point")
    if np.any(x <= 0):
        raise DomainError("Loewner points must be positive", value=float(np.min(x)))
    if np.any(np.diff(x, axis=-1) <= 0):
        raise ValueError("Loewner points must be strictly ascending (no duplicates)")
    fx = f(x)
    dx = x[..., :, None] - x[..., None, :]
    df = fx[..., :, None] - fx[..., None, :]
    n = x.shape[-1]
    off = ~np.eye(n, dtype=bool)
    L = np.zeros(x.shape + (n,))
    np.divide(df, dx, out=L, where=np.broadcast_to(off, L.shape))
    idx = np.arange(n)
    L[..., idx, idx] = fn.derivative(f, x)
    return 0.5 * (L + np.swapaxes(L, -1, -2))


def _normalized_min_eig(M):
    return np.linalg.eigvalsh(M)[..., 0] / np.maximum(1.0, spectral_norm(M))


def test_inequality(inequality_id, f, A, B=None, t=0.5, sigma=None):
    """Signed, normalized margin of one inequality at ``(A, B, t)``.

    The margin is the smallest eigenvalue of (larger side - smaller side)
    divided by ``max(1, |LHS|, |RHS|)``; values at or above ``-tol_rel`` mean
    the inequality holds. Ids:

    * ``I2`` .. ``I9``, ``D2`` .. ``D7``: the mean characterizations, with
      ``sigma`` a list of symmetric means for the 'for all / some sigma' items;
    * ``monotone`` / ``decreasing``: ``f(A) <= f(B)`` / ``f(A) >= f(B)`` for a
      pair with ``A <= B``;
    * ``loewner`` / ``loewner_nsd``: positive / negative semidefiniteness of
      the divided-difference matrix at the points ``diag(A)``.

    A ``dual:`` prefix runs the same test on ``f* = 1/f(1/x)``.
    """
    dual, item = _split_id(inequality_id)
    if dual:
        f = fn.dualize(f)
    if item in LOEWNER_ITEMS:
        points = np.real(np.diagonal(np.asarray(A), axis1=-2, axis2=-1))
        L = loewner_matrix(f, points)
        return _normalized_min_eig(L if item == "loewner" else -L)
    A = np.asarray(A)
    B = np.asarray(B)
    if item in ORDER_ITEMS:
        fA, fB = _apply_f(f, A), _apply_f(f, B)
        return loewner_margin(fA, fB) if item == "monotone" else loewner_margin(fB, fA)
    if item not in MEAN_ITEMS:
        raise ValueError(f"unknown inequality id {inequality_id!r}")
    pairs = _mean_sides(item, f, A, B, t, sigma)
    return np.min([loewner_margin(lo, hi) for lo, hi in pairs], axis=0)


@dataclass
class ClassifierConfig:
    dims: tuple = (2, 3, 5)
    trials_per_dim: int = 2000
    t_grid: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    seed: int = 0
    tol_rel: float = DEFAULT_TOL_REL
    loewner_points: int = 6
    margin: float = None
    random_t: int = 3
    log_eig_range: tuple = DEFAULT_LOG_EIG_RANGE

    def __post_init__(self):
        if self.margin is None:
            self.margin = 10.0 * self.tol_rel
        if self.trials_per_dim < 1:
            raise ValueError("trials_per_dim must be >= 1")
        if not self.dims or any(int(d) < 1 for d in self.dims):
            raise ValueError("dims must be a nonempty list of positive integers")
        if any(not 0.0 <= t <= 1.0 for t in self.t_grid):
            raise ValueError("t_grid must lie in [0, 1]")
        if self.loewner_points < 2:
            raise ValueError("loewner_points must be >= 2")


@dataclass
class CounterexampleRecord:
    inequality_id: str
    A: np.ndarray
    B: np.ndarray = None
    t: float = 0.5
    violation: float = 0.0
    seed_path: list = field(default_factory=list)
    function: str = ""
    sigma: str = None
    C: np.ndarray = None

    def replay(self, f):
        sigma = None
        if self.sigma is not None:
            sigma = [means.parse_mean(self.sigma)]
        return float(test_inequality(self.inequality_id, f, self.A, self.B, self.t, sigma))

    def to_json(self):
        out = {
            "inequality_id": self.inequality_id,
            "A": matrix_to_json(self.A),
            "B": None if self.B is None else matrix_to_json(self.B),
            "t": float(self.t),
            "violation": float(self.violation),
            "seed_path": [int(s) for s in self.seed_path],
            "function": self.function,
        }
        if self.sigma is not None:
            out["sigma"] = self.sigma
        if self.C is not None:
            out["C"] = matrix_to_json(self.C)
        return out

    @classmethod
    def from_json(cls, obj):
        def mat(key):
            v = obj.get(key)
            return None if v is None else matrix_from_json(v, check=False)

        return cls(
            inequality_id=obj["inequality_id"],
            A=mat("A"),
            B=mat("B"),
            t=obj.get("t", 0.5),
            violation=obj["violation"],
            seed_path=list(obj.get("seed_path", [])),
            function=obj.get("function", ""),
            sigma=obj.get("sigma"),
            C=mat("C"),
        )


@dataclass
class Evidence:
    trials: int = 0
    passes: int = 0
    errors: int = 0
    worst_margin: float = np.inf
    best_margin: float = -np.inf

    def merge(self, margins, threshold):
        """Fold in a (trials, slots) block of margins; NaN marks a domain failure."""
        margins = np.atleast_2d(np.asarray(margins, dtype=float))
        failed = np.isnan(margins).any(axis=1)
        ok = margins[~np.isnan(margins)]
        self.trials += margins.shape[0]
        self.errors += int(failed.sum())
        self.passes += int((~failed & (np.nan_to_num(margins, nan=0.0) >= -threshold).all(axis=1)).sum())
        if ok.size:
            self.worst_margin = min(self.worst_margin, float(ok.min()))
            self.best_margin = max(self.best_margin, float(ok.max()))

    def to_json(self):
        return {
            "trials": self.trials,
            "passes": self.passes,
            "errors": self.errors,
            "worst_margin": None if self.trials == self.errors else self.worst_margin,
            "best_margin": None if self.trials == self.errors else self.best_margin,
        }


@dataclass
class Verdict:
    label: str
    function: str
    certificates: list
    evidence: dict

    def to_json(self):
        return {
            "label": self.label,
            "function": self.function,
            "certificates": [c.to_json() for c in self.certificates],
            "evidence": {k: v.to_json() for k, v in self.evidence.items()},
        }


def stable_key(text):
    return zlib.crc32(text.encode())


def block_rng(seed, *key):
    """Generator for one block of trials, split from the master seed by ``key``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def psd_increment(dim, rng, size, log_eig_range=DEFAULT_LOG_EIG_RANGE):
    """Random rank-one positive semidefinite increments ``c v v*`` with |v| = 1."""
    U = haar_unitary(dim, rng, (size,))
    v = U[..., :, 0]
    c = 10.0 ** rng.uniform(*log_eig_range, size=size)
    return c[:, None, None] * (v[..., :, None] * np.conj(v[..., None, :]))


def _draw_block(item, dim, n, rng, cfg):
    """Operands for ``n`` trials of ``item`` at dimension ``dim``."""
    if item in LOEWNER_ITEMS:
        lo, hi = cfg.log_eig_range
        pts = np.sort(10.0 ** rng.uniform(lo, hi, size=(n, dim)), axis=-1)
        return np.zeros((n, dim, dim)) + pts[..., None] * np.eye(dim), None
    A = random_pd(dim, cfg.log_eig_range, rng, size=n)
    if item in ORDER_ITEMS:
        B = A + psd_increment(dim, rng, n, cfg.log_eig_range)
        return A, symmetrize(B)
    return A, random_pd(dim, cfg.log_eig_range, rng, size=n)


def _t_slots(item, n, rng, cfg):
    if _split_id(item)[1] not in WEIGHTED:
        return [0.5]
    slots = [float(t) for t in cfg.t_grid]
    slots += [rng.uniform(size=n) for _ in range(cfg.random_t)]
    return slots


def _margins_for(inequality_id, f, A, B, t, sigma):
    """Margins for a batch; trials hitting domain errors come back as NaN."""
    try:
        return np.asarray(test_inequality(inequality_id, f, A, B, t, sigma), dtype=float)
    except (DomainError, NotPositiveDefiniteError, FloatingPointError):
        pass
    out = np.full(A.shape[0], np.nan)
    for i in range(A.shape[0]):
        ti = t[i] if np.ndim(t) else t
        Bi = None if B is None else B[i]
        try:
            out[i] = float(test_inequality(inequality_id, f, A[i], Bi, ti, sigma))
        except (DomainError, NotPositiveDefiniteError, FloatingPointError):
            pass
    return out


def _dims_for(item, cfg):
    if _split_id(item)[1] in LOEWNER_ITEMS:
        return tuple(range(2, cfg.loewner_points + 1))
    return tuple(int(d) for d in cfg.dims)


def search(inequality_id, f, cfg, sigma=None, evidence=None, stop_at_first=True):
    """Randomized search for a violation beyond ``cfg.margin``.

    Trials run dimension by dimension (for Loewner items: point count by
    point count), ``cfg.trials_per_dim`` each. Returns the first violating
    record in trial order, or None; ``evidence`` is updated in place.
    """
    if not known_id(inequality_id):
        raise ValueError(f"unknown inequality id {inequality_id!r}")
    item = _split_id(inequality_id)[1]
    if evidence is None:
        evidence = Evidence()
    n = cfg.trials_per_dim
    key = stable_key(inequality_id)
    for dim in _dims_for(inequality_id, cfg):
        rng = block_rng(cfg.seed, key, dim)
        A, B = _draw_block(item, dim, n, rng, cfg)
        slots = _t_slots(inequality_id, n, rng, cfg)
        margins = np.column_stack([_margins_for(inequality_id, f, A, B, t, sigma) for t in slots])
        viol = margins < -cfg.margin
        hits = np.flatnonzero(viol.any(axis=1))
        if stop_at_first and hits.size:
            i = int(hits[0])
            j = int(np.flatnonzero(viol[i])[0])
            evidence.merge(margins[: i + 1], cfg.margin)
            t = slots[j][i] if np.ndim(slots[j]) else slots[j]
            return CounterexampleRecord(
                inequality_id=inequality_id,
                A=A[i],
                B=None if B is None else B[i],
                t=float(t),
                violation=float(margins[i, j]),
                seed_path=[cfg.seed, key, dim, i],
                function=f.spec,
                sigma=sigma[0].spec if sigma and len(sigma) == 1 else None,
            )
        evidence.merge(margins, cfg.margin)
    return None


def find_counterexample(inequality_id, f, cfg=None, sigma=None):
    return search(inequality_id, f, cfg or ClassifierConfig(), sigma=sigma)


def _decreasing_grid(f, cfg, evidence):
    lo, hi = cfg.log_eig_range
    x = np.logspace(lo, hi, 64)
    A = x[:-1, None, None]
    B = x[1:, None, None]
    try:
        margins = np.asarray(test_inequality("decreasing", f, A, B), dtype=float)
    except DomainError:
        margins = np.full(len(x) - 1, np.nan)
    evidence.merge(margins[:, None], cfg.margin)
    hits = np.flatnonzero(margins < -cfg.margin)
    if hits.size:
        i = int(hits[0])
        return CounterexampleRecord("decreasing", A[i], B[i], 0.5, float(margins[i]), [cfg.seed, i], f.spec)
    return None


OMI_TESTS = ("I7", "I3", "loewner", "dual:I7", "dual:loewner")
OMD_TESTS = ("D4", "decreasing", "loewner_nsd", "dual:D4", "dual:loewner_nsd")


def classify(f, cfg=None):
    """Label ``f`` as OMI-consistent, OMD-consistent, NEITHER or INCONCLUSIVE.

    Increasing side: Loewner matrices of ``f`` and ``f*`` are PSD and the
    harmonic-mean inequality ``f(A !_t B) <= f(A) !_t f(B)`` holds for ``f``
    and ``f*``. Decreasing side: ``f(A ! B) >= f(A) ! f(B)`` for ``f`` and
    ``f*``, ``f`` nonincreasing on a scalar grid, and the Loewner matrices of
    ``f`` and ``f*`` are negative semidefinite. A side without violations
    earns its label only with strict evidence (a concavity margin, resp. a
    D4 margin, above ``cfg.margin``) or when the other side is refuted, so
    functions like constants stay INCONCLUSIVE. NEITHER needs certificates
    against both sides.
    """
    if not isinstance(f, fn.ScalarFunction):
        f = fn.BlackBox(f)
    cfg = cfg or ClassifierConfig()
    evidence = {}
    certificates = []
    refuted = {"OMI": False, "OMD": False}
    clean = {"OMI": True, "OMD": True}
    for side, tests in (("OMI", OMI_TESTS), ("OMD", OMD_TESTS)):
        for test_id in tests:
            ev = evidence.setdefault(test_id, Evidence())
            if test_id == "decreasing":
                record = _decreasing_grid(f, cfg, ev)
            else:
                record = search(test_id, f, cfg, evidence=ev)
            if record is not None:
                certificates.append(record)
                refuted[side] = True
                break
            if ev.errors:
                clean[side] = False
    omi_strict = evidence.get("I3", Evidence()).best_margin > cfg.margin
    omd_strict = evidence.get("D4", Evidence()).best_margin > cfg.margin
    if refuted["OMI"] and refuted["OMD"]:
        label = NEITHER
    elif clean["OMI"] and not refuted["OMI"] and (omi_strict or refuted["OMD"]):
        label = OMI
    elif clean["OMD"] and not refuted["OMD"] and (omd_strict or refuted["OMI"]):
        label = OMD
    else:
        label = INCONCLUSIVE
    return Verdict(label, f.spec, certificates, evidence)


def replay(record: CounterexampleRecord, f=None):
    """Recompute a certificate's margin from its stored operands."""
    if f is None:
        f = fn.parse_function(record.function)
    return record.replay(f)

test_inequality.__test__ = False  # keep pytest from collecting it when imported by name
