"""Batch verification of the mean characterizations and derived inequalities.

Every check draws random operands block by block (one block per dimension
and parameter point, each from its own generator split off the master
seed), computes one normalized Loewner margin per trial and folds the
margins into a :class:`CheckResult`. A trial passes when its margin is at
least ``-10 * tol_rel``; every failing trial is stored as a counterexample.
Degenerate slices (``A = B``, ``B = C``) must instead land in the EQUAL band
``|eig| <= tol_rel * scale``.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import classifier as clf
from . import functions as fn
from . import means as mn
from .hermitian import (
    DEFAULT_LOG_EIG_RANGE,
    DEFAULT_TOL_REL,
    haar_unitary,
    identity_like,
    inverse,
    loewner_margin,
    random_pd,
    random_psd_singular,
    spectral_norm,
    symmetrize,
)
from .io import matrix_to_json
from .spectral import apply, power_pd

CHAIN_NOTE = (
    "paper-discrepancy: the weighted AM-GM-HM chain appears as A nabla_t B >= A !_t B >= A #_t B, "
    "with ! and # transposed. The ordering verified here is A nabla_t B >= A #_t B >= A !_t B, "
    "which is also the GM-HM inequality relied on for D5."
)
D4_NOTE = "D4 is read as a single condition: f(A ! B) >= f(A) ! f(B) and f decreasing (the source doubles the separator)."
SCOPE_NOTE = (
    "exp-like controls are outside the function grammar; they are classified through the Python API "
    "(BlackBox) and flagged out-of-catalog."
)

SYM_RS = clf.SYM_GRID
I_ITEMS = ("I2", "I3", "I4", "I5", "I6", "I7", "I8", "I9")
D_ITEMS = ("D2", "D3", "D4", "D5", "D6", "D7")


@dataclass
class SuiteConfig:
    dims: tuple = (2, 3, 5)
    trials: int = 500
    t_grid: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    seed: int = 0
    tol_rel: float = DEFAULT_TOL_REL
    log_eig_range: tuple = DEFAULT_LOG_EIG_RANGE

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError("dims must be a nonempty list of positive integers")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(not 0.0 <= t <= 1.0 for t in self.t_grid):
            raise ValueError("t_grid must lie in [0, 1]")

    @property
    def threshold(self):
        return 10.0 * self.tol_rel


@dataclass
class CheckResult:
    check_id: str
    params: dict
    control: str = "positive"
    trials: int = 0
    passes: int = 0
    worst_margin: float = np.inf
    counterexamples: list = field(default_factory=list)
    elapsed_s: float = 0.0
    error: str = None

    @property
    def ok(self):
        return self.error is None and self.passes == self.trials

    def add(self, margins, ops, threshold, seed_path):
        margins = np.asarray(margins, dtype=float)
        self.trials += margins.size
        failed = ~(margins >= -threshold)
        self.passes += int((~failed).sum())
        if margins.size:
            self.worst_margin = min(self.worst_margin, float(np.nanmin(margins)) if np.any(~np.isnan(margins)) else -np.inf)
        for i in np.flatnonzero(failed):
            t = ops.get("t", self.params.get("t", 0.5))
            self.counterexamples.append(
                clf.CounterexampleRecord(
                    inequality_id=self.check_id,
                    A=ops["A"][i],
                    B=ops["B"][i] if "B" in ops else None,
                    C=ops["C"][i] if "C" in ops else None,
                    t=float(t[i] if np.ndim(t) else t),
                    violation=float(margins[i]),
                    seed_path=list(seed_path) + [int(i)],
                )
            )

    def to_json(self):
        out = {
            "check_id": self.check_id,
            "params": self.params,
            "control": self.control,
            "trials": self.trials,
            "passes": self.passes,
            "worst_margin": None if not np.isfinite(self.worst_margin) else self.worst_margin,
            "counterexamples": [_record_json(r) for r in self.counterexamples],
            "elapsed_s": self.elapsed_s,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


def _record_json(r):
    out = {
        "inequality_id": r.inequality_id,
        "A": matrix_to_json(r.A),
        "B": None if r.B is None else matrix_to_json(r.B),
        "t": r.t,
        "violation": r.violation,
    }
    if r.C is not None:
        out["C"] = matrix_to_json(r.C)
    if r.sigma is not None:
        out["sigma"] = r.sigma
    return out


def _run(check_id, params, cfg, draw, margin_fn, control="positive", threshold=None):
    """Run one (check, parameter point) over every dimension in ``cfg.dims``."""
    if threshold is None:
        threshold = cfg.tol_rel if control == "degenerate" else cfg.threshold
    result = CheckResult(check_id, params, control)
    start = time.perf_counter()
    key = clf.stable_key(check_id + json.dumps(params, sort_keys=True))
    try:
        for dim in cfg.dims:
            rng = clf.block_rng(cfg.seed, key, dim)
            ops = draw(dim, cfg.trials, rng)
            result.add(margin_fn(ops), ops, threshold, [cfg.seed, key, dim])
    except Exception as exc:  # a failing check is a report entry, not an abort
        result.error = f"{type(exc).__name__}: {exc}"
    result.elapsed_s = time.perf_counter() - start
    return result


def _equality_margin(X, Y):
    """Minus the largest |eigenvalue| of X - Y, normalized like the Loewner margins."""
    scale = np.maximum(1.0, np.maximum(spectral_norm(X), spectral_norm(Y)))
    w = np.linalg.eigvalsh(symmetrize(X - Y))
    return -np.maximum(np.abs(w[..., 0]), np.abs(w[..., -1])) / scale


# operand draws


def _pd(cfg):
    return lambda dim, n, rng: random_pd(dim, cfg.log_eig_range, rng, size=n)


def draw_pair(cfg, same=False):
    def draw(dim, n, rng):
        A = _pd(cfg)(dim, n, rng)
        return {"A": A, "B": A.copy() if same else _pd(cfg)(dim, n, rng)}

    return draw


def draw_triple(cfg, same_bc=False):
    def draw(dim, n, rng):
        A = _pd(cfg)(dim, n, rng)
        B = _pd(cfg)(dim, n, rng)
        return {"A": A, "B": B, "C": B.copy() if same_bc else _pd(cfg)(dim, n, rng)}

    return draw


def draw_pair_random_t(cfg):
    def draw(dim, n, rng):
        ops = draw_pair(cfg)(dim, n, rng)
        ops["t"] = rng.uniform(size=n)
        return ops

    return draw


# mean catalog

CATALOG = (
    mn.Arith(0.5),
    mn.Harm(0.5),
    mn.Geom(0.5),
    mn.Arith(0.3),
    mn.Harm(0.7),
    mn.Geom(0.3),
    mn.QuasiArithmetic(0.5, 0.3),
    mn.QuasiArithmetic(-0.5, 0.7),
    mn.Symmetric(1.0 / 3.0),
    mn.Symmetric(-1.0 / 3.0),
    mn.Symmetric(2.0 / 3.0),
    mn.Adjoint(mn.QuasiArithmetic(0.5, 0.3)),
    mn.FromFunction(fn.LogShift()),
    mn.FromFunction(fn.Affine(1.0, 2.0)),
)


def _sigma_list(exclude=None):
    return [mn.Symmetric(r) for r in SYM_RS if r != exclude]


# axioms


def _m1_draw(cfg):
    def draw(dim, n, rng):
        A, B = _pd(cfg)(dim, n, rng), _pd(cfg)(dim, n, rng)
        C = symmetrize(A + clf.psd_increment(dim, rng, n, cfg.log_eig_range))
        D = symmetrize(B + clf.psd_increment(dim, rng, n, cfg.log_eig_range))
        return {"A": A, "B": B, "C": C, "D": D}

    return draw


CONGRUENCE_LOG_EIG_RANGE = (-1.0, 1.0)


def _m2_draw(cfg):
    """Half the C's are PD; the rest are singular of rank 1 and rank dim-1.

    C's spectrum is kept to ``10**CONGRUENCE_LOG_EIG_RANGE``: with invertible C
    both sides are equal, and ``cond(CAC) = cond(C)**2 cond(A)`` would
    otherwise let rounding alone exceed the violation threshold.
    """
    lr = CONGRUENCE_LOG_EIG_RANGE

    def draw(dim, n, rng):
        A, B = _pd(cfg)(dim, n, rng), _pd(cfg)(dim, n, rng)
        C = random_pd(dim, lr, rng, size=n)
        rank = np.full(n, dim)
        if dim > 1:
            half, three_q = n // 2, (3 * n) // 4
            C[half:three_q] = random_psd_singular(dim, 1, rng, size=three_q - half, log_eig_range=lr)
            C[three_q:] = random_psd_singular(dim, dim - 1, rng, size=n - three_q, log_eig_range=lr)
            rank[half:three_q], rank[three_q:] = 1, dim - 1
        return {"A": A, "B": B, "C": C, "rank": rank}

    return draw


def compressed_mean(m, X, Y, P):
    """``X m Y`` for PSD ``X``, ``Y`` supported on the range of the isometry ``P``.

    Regularizing both operands by ``eps I`` splits along ``range(P)`` and its
    complement, where the mean is ``eps f(1) -> 0``; the limit is therefore the
    mean of the compressions ``P* X P``, ``P* Y P`` pushed back through ``P``.
    """
    Ph = np.conj(np.swapaxes(P, -1, -2))
    inner = mn.evaluate(m, symmetrize(Ph @ X @ P), symmetrize(Ph @ Y @ P))
    return symmetrize(P @ inner @ Ph)


def _transformer_rhs(m, A, B, C, rank):
    CAC, CBC = symmetrize(C @ A @ C), symmetrize(C @ B @ C)
    out = np.empty_like(CAC)
    for r in np.unique(rank):
        sel = rank == r
        if r == C.shape[-1]:
            out[sel] = mn.evaluate(m, CAC[sel], CBC[sel])
        else:
            _, Q = np.linalg.eigh(C[sel])
            out[sel] = compressed_mean(m, CAC[sel], CBC[sel], Q[..., -r:])
    return out


def check_axioms(m, cfg):
    """(M1) monotonicity, (M2) transformer inequality, (M3) continuity from above."""
    out = []
    params = {"mean": m.spec}

    def m1(ops):
        lo = mn.evaluate(m, ops["A"], ops["B"])
        hi = mn.evaluate(m, ops["C"], ops["D"])
        return loewner_margin(lo, hi)

    out.append(_run("axioms.M1", params, cfg, _m1_draw(cfg), m1))

    def m2(ops):
        A, B, C = ops["A"], ops["B"], ops["C"]
        lhs = symmetrize(C @ mn.evaluate(m, A, B) @ C)
        return loewner_margin(lhs, _transformer_rhs(m, A, B, C, ops["rank"]))

    out.append(_run("axioms.M2", params, cfg, _m2_draw(cfg), m2))

    rungs_seen = []

    def m3(ops):
        A, B = ops["A"], ops["B"]
        res = mn.evaluate_psd(m, A, B, full=True)
        rungs_seen.append(int(np.max(res.rungs_used)))
        margins = np.full(A.shape[0], np.inf)
        for hi, lo in zip(res.iterates, res.iterates[1:]):
            margins = np.minimum(margins, loewner_margin(lo, hi))
        exact = mn.evaluate(m, A, B)
        scale = np.maximum(1.0, np.maximum(spectral_norm(A), spectral_norm(B)))
        err = np.linalg.norm(res.value - exact, axis=(-2, -1)) / scale
        # a limit off by more than 1e-7 counts as a failed trial
        return np.where(err > 1e-7, -err, np.minimum(margins, 0.0) if len(res.iterates) > 1 else 0.0)

    r3 = _run("axioms.M3", params, cfg, draw_pair(cfg), m3)
    r3.params = dict(params, max_rungs_used=max(rungs_seen) if rungs_seen else None)
    out.append(r3)
    return out


# mean chain


def check_chain(cfg, random_t=True):
    """Weighted arithmetic >= geometric >= harmonic, per t and with random t."""

    def margin(ops):
        t = ops.get("t", None)
        A, B = ops["A"], ops["B"]
        am = mn.arith_mean(A, B, t)
        gm = mn.geometric_mean(A, B, t)
        hm = mn.harmonic_mean(A, B, t)
        return np.minimum(loewner_margin(gm, am), loewner_margin(hm, gm))

    out = []
    for t in cfg.t_grid:
        draw = draw_pair(cfg)

        def fixed(dim, n, rng, t=t, draw=draw):
            ops = draw(dim, n, rng)
            ops["t"] = np.full(n, t)
            return ops

        out.append(_run("chain", {"t": t}, cfg, fixed, margin))
    if random_t:
        out.append(_run("chain", {"t": "uniform"}, cfg, draw_pair_random_t(cfg), margin))

    def degenerate(ops):
        A = ops["A"]
        t = ops["t"]
        am, gm, hm = mn.arith_mean(A, A, t), mn.geometric_mean(A, A, t), mn.harmonic_mean(A, A, t)
        return np.minimum(_equality_margin(am, A), np.minimum(_equality_margin(gm, A), _equality_margin(hm, A)))

    def draw_same(dim, n, rng):
        ops = draw_pair(cfg, same=True)(dim, n, rng)
        ops["t"] = rng.uniform(size=n)
        return ops

    out.append(_run("chain.degenerate", {"slice": "A=B"}, cfg, draw_same, degenerate, control="degenerate"))
    return out


# characterization theorems


def _item_points(item, cfg):
    """(t, sigma-list) parameter points for one theorem item."""
    if item in clf.WEIGHTED:
        return [(t, None) for t in cfg.t_grid]
    if item in ("I9", "D7"):
        excluded = 1.0 if item == "I9" else -1.0
        return [(0.5, [s]) for s in _sigma_list(exclude=excluded)]
    return [(0.5, None)]


def _check_items(prefix, f, items, cfg):
    out = []
    for item in items:
        for t, sigma in _item_points(item, cfg):
            params = {"f": f.spec, "item": item}
            if item in clf.WEIGHTED:
                params["t"] = t
            if sigma is not None:
                params["sigma"] = sigma[0].spec
            if item in ("I8", "D6"):
                params["sigma"] = "all sym(r), r in " + ",".join(f"{r:.4g}" for r in SYM_RS)

            def margin(ops, item=item, t=t, sigma=sigma):
                return clf.test_inequality(item, f, ops["A"], ops["B"], t, sigma)

            out.append(_run(f"{prefix}.{item}", params, cfg, draw_pair(cfg), margin))
    return out


def check_I(f, items=I_ITEMS, cfg=None):
    return _check_items("theorem_I", f, items, cfg or SuiteConfig())


def check_D(f, items=D_ITEMS, cfg=None):
    return _check_items("theorem_D", f, items, cfg or SuiteConfig())


# duality transfer


def duality_margins(f, g, h, sigma, eta, A, B, direction="leq"):
    """Margins of statement (1) at (A, B) and its starred form (2) at (A^-1, B^-1).

    ``direction="leq"``: (1) ``f(A sigma B) <= g(A) eta h(B)`` and
    (2) ``f*(A' sigma* B') >= g*(A') eta* h*(B')``; ``"geq"`` flips both.
    The starred side is computed through the adjoint connections (dual
    representing functions), not by inverting statement (1).
    """
    lhs1 = apply(f, mn.evaluate(sigma, A, B))
    rhs1 = mn.evaluate(eta, apply(g, A), apply(h, B))
    Ai, Bi = inverse(A), inverse(B)
    fs, gs, hs = fn.dualize(f), fn.dualize(g), fn.dualize(h)
    lhs2 = apply(fs, mn.kubo_ando(mn.Adjoint(sigma).rep(), Ai, Bi))
    rhs2 = mn.kubo_ando(mn.Adjoint(eta).rep(), apply(gs, Ai), apply(hs, Bi))
    if direction == "leq":
        return loewner_margin(lhs1, rhs1), loewner_margin(rhs2, lhs2)
    return loewner_margin(rhs1, lhs1), loewner_margin(lhs2, rhs2)


def check_duality(f, g, h, sigma, eta, cfg, direction="leq"):
    params = {"f": f.spec, "g": g.spec, "h": h.spec, "sigma": sigma.spec, "eta": eta.spec, "direction": direction}
    held = []

    def margin(ops):
        m1, m2 = duality_margins(f, g, h, sigma, eta, ops["A"], ops["B"], direction)
        holds = m1 >= -cfg.threshold
        held.append(int(holds.sum()))
        # the sign of (1) predicts the sign of (2)
        return np.where(holds, m2, -m2)

    res = _run("duality", params, cfg, draw_pair(cfg), margin)
    res.params = dict(params, statement1_held=int(sum(held)))
    return [res]


# power and distributivity inequalities

ALPHA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
R_GRID = (-1.0, -0.75, -0.5, -0.25, 0.0)
SINGULAR_RUNGS = (10, 20)


def _cor_power_margin(A, B, alpha, t):
    lhs = power_pd(mn.harmonic_mean(A, B, t), alpha)
    rhs = mn.harmonic_mean(power_pd(A, alpha), power_pd(B, alpha), t)
    return loewner_margin(lhs, rhs)


def _cor_power_common(ops, alpha, t):
    """Exact limits for PSD pairs supported on ``range(P)``, alpha > 0.

    Both sides vanish off ``range(P)``, so the comparison is done on the
    compressions, where the operands are positive definite.
    """
    A, B, P = ops["A"], ops["B"], ops["P"]
    Ph = np.conj(np.swapaxes(P, -1, -2))
    Ac, Bc = symmetrize(Ph @ A @ P), symmetrize(Ph @ B @ P)
    lhs = power_pd(mn.harmonic_mean(Ac, Bc, t), alpha)
    rhs = mn.harmonic_mean(power_pd(Ac, alpha), power_pd(Bc, alpha), t)
    return loewner_margin(symmetrize(P @ lhs @ Ph), symmetrize(P @ rhs @ Ph))


def check_cor_power(cfg):
    """``(A !_t B)^alpha <= A^alpha !_t B^alpha`` on PD and singular PSD pairs.

    Generic singular pairs are checked at the regularized operands
    ``A + eps I``, ``B + eps I`` for the ladder rungs in ``SINGULAR_RUNGS``.
    Pairs sharing their support are checked at the exact limit.
    """
    out = []

    def draw_singular(dim, n, rng):
        rank = max(dim - 1, 0)
        A = random_psd_singular(dim, rank, rng, size=n, log_eig_range=cfg.log_eig_range)
        B = random_psd_singular(dim, rank, rng, size=n, log_eig_range=cfg.log_eig_range)
        return {"A": A, "B": B}

    def draw_common(dim, n, rng):
        r = max(dim - 1, 1)
        P = haar_unitary(dim, rng, (n,))[..., :r]
        Ph = np.conj(np.swapaxes(P, -1, -2))
        A = symmetrize(P @ random_pd(r, cfg.log_eig_range, rng, size=n) @ Ph)
        B = symmetrize(P @ random_pd(r, cfg.log_eig_range, rng, size=n) @ Ph)
        return {"A": A, "B": B, "P": P}

    for alpha in ALPHA_GRID:
        for t in cfg.t_grid:
            params = {"alpha": alpha, "t": t}
            out.append(
                _run("cor_power", dict(params, operands="pd"), cfg, draw_pair(cfg),
                     lambda ops, a=alpha, t=t: _cor_power_margin(ops["A"], ops["B"], a, t))
            )

            def singular(ops, a=alpha, t=t):
                A, B = ops["A"], ops["B"]
                scale = np.maximum(1.0, np.maximum(spectral_norm(A), spectral_norm(B)))
                ladder = mn.default_ladder(scale)
                I = identity_like(A)
                margins = np.full(A.shape[0], np.inf)
                for k in SINGULAR_RUNGS:
                    e = ladder[..., k][..., None, None]
                    margins = np.minimum(margins, _cor_power_margin(A + e * I, B + e * I, a, t))
                return margins

            out.append(_run("cor_power", dict(params, operands="psd-singular"), cfg, draw_singular, singular))
            if alpha > 0:
                out.append(_run("cor_power", dict(params, operands="psd-common-support"), cfg, draw_common,
                                lambda ops, a=alpha, t=t: _cor_power_common(ops, a, t)))
    for alpha in ALPHA_GRID:

        def degenerate(ops, a=alpha):
            A = ops["A"]
            return _equality_margin(power_pd(mn.harmonic_mean(A, A, 0.5), a), mn.harmonic_mean(power_pd(A, a), power_pd(A, a), 0.5))

        out.append(_run("cor_power.degenerate", {"alpha": alpha, "slice": "A=B"}, cfg, draw_pair(cfg, same=True),
                        degenerate, control="degenerate"))
    return out


def check_thm_connection_distrib(sigma, cfg):
    """``A s (B !_t C) <= (A s B) !_t (A s C)`` and ``A s (B v_t C) >= (A s B) v_t (A s C)``."""
    out = []

    def sides(ops, t):
        A, B, C = ops["A"], ops["B"], ops["C"]
        AB, AC = mn.evaluate(sigma, A, B), mn.evaluate(sigma, A, C)
        h_lhs = mn.evaluate(sigma, A, mn.harmonic_mean(B, C, t))
        h_rhs = mn.harmonic_mean(AB, AC, t)
        a_lhs = mn.evaluate(sigma, A, mn.arith_mean(B, C, t))
        a_rhs = mn.arith_mean(AB, AC, t)
        return (h_lhs, h_rhs), (a_rhs, a_lhs)

    for t in cfg.t_grid:
        params = {"sigma": sigma.spec, "t": t}

        def harm(ops, t=t):
            (lo, hi), _ = sides(ops, t)
            return loewner_margin(lo, hi)

        def arith(ops, t=t):
            _, (lo, hi) = sides(ops, t)
            return loewner_margin(lo, hi)

        out.append(_run("thm_connection_distrib", dict(params, form="harmonic"), cfg, draw_triple(cfg), harm))
        out.append(_run("thm_connection_distrib", dict(params, form="arithmetic"), cfg, draw_triple(cfg), arith))

    def degenerate(ops):
        (h_lo, h_hi), (a_lo, a_hi) = sides(ops, 0.5)
        return np.minimum(_equality_margin(h_lo, h_hi), _equality_margin(a_lo, a_hi))

    out.append(_run("thm_connection_distrib.degenerate", {"sigma": sigma.spec, "slice": "B=C"}, cfg,
                    draw_triple(cfg, same_bc=True), degenerate, control="degenerate"))
    return out


def check_thm_symmetric_distrib(sigma, eta, cfg):
    """``A s (B ! C) <= (A s B) eta (A s C)`` and ``A s (B v C) >= (A s B) eta (A s C)``."""
    if not eta.is_symmetric:
        raise ValueError(f"{eta} is not a symmetric mean")
    params = {"sigma": sigma.spec, "eta": eta.spec}

    def sides(ops):
        A, B, C = ops["A"], ops["B"], ops["C"]
        mid = mn.evaluate(eta, mn.evaluate(sigma, A, B), mn.evaluate(sigma, A, C))
        h_lhs = mn.evaluate(sigma, A, mn.harmonic_mean(B, C, 0.5))
        a_lhs = mn.evaluate(sigma, A, mn.arith_mean(B, C, 0.5))
        return (h_lhs, mid), (mid, a_lhs)

    def harm(ops):
        (lo, hi), _ = sides(ops)
        return loewner_margin(lo, hi)

    def arith(ops):
        _, (lo, hi) = sides(ops)
        return loewner_margin(lo, hi)

    def degenerate(ops):
        (h_lo, h_hi), (a_lo, a_hi) = sides(ops)
        return np.minimum(_equality_margin(h_lo, h_hi), _equality_margin(a_lo, a_hi))

    return [
        _run("thm_symmetric_distrib", dict(params, form="harmonic"), cfg, draw_triple(cfg), harm),
        _run("thm_symmetric_distrib", dict(params, form="arithmetic"), cfg, draw_triple(cfg), arith),
        _run("thm_symmetric_distrib.degenerate", dict(params, slice="B=C"), cfg, draw_triple(cfg, same_bc=True),
             degenerate, control="degenerate"),
    ]


def check_cor_negative_power(cfg):
    """``(A !_t B)^r >= A^r #_t B^r >= A^r !_t B^r`` and ``(A ! B)^r >= A^r s B^r``, r in [-1, 0]."""
    out = []
    for r in R_GRID:
        for t in cfg.t_grid:

            def chain(ops, r=r, t=t):
                A, B = ops["A"], ops["B"]
                Ar, Br = power_pd(A, r), power_pd(B, r)
                lhs = power_pd(mn.harmonic_mean(A, B, t), r)
                mid = mn.geometric_mean(Ar, Br, t)
                low = mn.harmonic_mean(Ar, Br, t)
                return np.minimum(loewner_margin(mid, lhs), loewner_margin(low, mid))

            out.append(_run("cor_negative_power", {"r": r, "t": t}, cfg, draw_pair(cfg), chain))
        for s in _sigma_list():

            def sym(ops, r=r, s=s):
                A, B = ops["A"], ops["B"]
                lhs = power_pd(mn.harmonic_mean(A, B, 0.5), r)
                return loewner_margin(mn.evaluate(s, power_pd(A, r), power_pd(B, r)), lhs)

            out.append(_run("cor_negative_power.symmetric", {"r": r, "sigma": s.spec}, cfg, draw_pair(cfg), sym))

        def degenerate(ops, r=r):
            A = ops["A"]
            Ar = power_pd(A, r)
            lhs = power_pd(mn.harmonic_mean(A, A, 0.3), r)
            return np.minimum(_equality_margin(lhs, mn.geometric_mean(Ar, Ar, 0.3)),
                              _equality_margin(lhs, mn.harmonic_mean(Ar, Ar, 0.3)))

        out.append(_run("cor_negative_power.degenerate", {"r": r, "slice": "A=B"}, cfg, draw_pair(cfg, same=True),
                        degenerate, control="degenerate"))
    return out


# negative controls


def negative_control(f, cfg, trials_per_dim=2000):
    """Classify a function expected to be neither increasing nor decreasing."""
    start = time.perf_counter()
    ccfg = clf.ClassifierConfig(dims=cfg.dims, trials_per_dim=trials_per_dim, seed=cfg.seed, tol_rel=cfg.tol_rel)
    verdict = clf.classify(f, ccfg)
    res = CheckResult("negative_control", {"f": f.spec, "label": verdict.label}, control="negative")
    res.passes = sum(ev.passes for ev in verdict.evidence.values())
    res.counterexamples = list(verdict.certificates)
    res.trials = res.passes + len(res.counterexamples)
    margins = [ev.worst_margin for ev in verdict.evidence.values() if ev.trials > ev.errors]
    res.worst_margin = min(margins) if margins else np.inf
    if isinstance(f, fn.BlackBox):
        res.params["scope"] = "out-of-catalog"
    res.elapsed_s = time.perf_counter() - start
    return res


# full run

OMI_ROSTER = (
    fn.Power(0.0),
    fn.Power(0.25),
    fn.Power(0.5),
    fn.Power(1.0),
    fn.LogShift(),
    fn.QuasiArithmeticRep(0.5, 0.3),
    fn.QuasiArithmeticRep(-0.5, 0.7),
    fn.SymmetricRep(1.0 / 3.0),
    fn.SymmetricRep(-1.0 / 3.0),
    fn.Dual(fn.LogShift()),
)
OMD_ROSTER = (
    fn.Power(-1.0),
    fn.Power(-0.5),
    fn.Power(0.0),
    fn.Reciprocal(fn.LogShift()),
)
NEGATIVE_ROSTER = (fn.Power(2.0), fn.Power(-2.0))
SYMMETRIC_DISTRIB_SIGMAS = (mn.Geom(0.5), mn.Harm(0.3), mn.QuasiArithmetic(0.5, 0.3), mn.FromFunction(fn.LogShift()))


def run_all(cfg=None, include_blackbox=True):
    cfg = cfg or SuiteConfig()
    checks = []
    for m in CATALOG:
        checks += check_axioms(m, cfg)
    checks += check_chain(cfg)
    for f in OMI_ROSTER:
        checks += check_I(f, I_ITEMS, cfg)
    for f in OMD_ROSTER:
        checks += check_D(f, D_ITEMS, cfg)
    sqrt = fn.Power(0.5)
    checks += check_duality(sqrt, sqrt, sqrt, mn.Arith(0.5), mn.Arith(0.5), cfg, direction="geq")
    for t in cfg.t_grid:
        checks += check_duality(sqrt, sqrt, sqrt, mn.Harm(t), mn.Geom(t), cfg)
    checks += check_cor_power(cfg)
    for m in CATALOG:
        checks += check_thm_connection_distrib(m, cfg)
    for s in SYMMETRIC_DISTRIB_SIGMAS:
        for eta in _sigma_list():
            checks += check_thm_symmetric_distrib(s, eta, cfg)
    checks += check_cor_negative_power(cfg)
    for f in NEGATIVE_ROSTER:
        checks.append(negative_control(f, cfg))
    if include_blackbox:
        checks.append(negative_control(fn.BlackBox(np.exp, "exp"), cfg))
    return VerificationReport(cfg, checks)


@dataclass
class VerificationReport:
    cfg: SuiteConfig
    checks: list
    notes: list = field(default_factory=lambda: [CHAIN_NOTE, D4_NOTE, SCOPE_NOTE])

    def positive_failures(self):
        return [c for c in self.checks if c.control != "negative" and not c.ok]

    def negative_misses(self):
        return [c for c in self.checks if c.control == "negative" and not c.counterexamples]

    def to_json(self):
        checks = sorted(self.checks, key=lambda c: (c.check_id, json.dumps(c.params, sort_keys=True)))
        return {
            "version": __version__,
            "seed": self.cfg.seed,
            "tol_rel": self.cfg.tol_rel,
            "checks": [c.to_json() for c in checks],
            "notes": list(self.notes)
            + [
                f"tolerance policy: trial passes iff normalized margin >= -{self.cfg.threshold:g}; "
                f"degenerate slices must be EQUAL within {self.cfg.tol_rel:g}",
                f"dims={list(self.cfg.dims)} trials={self.cfg.trials} t_grid={list(self.cfg.t_grid)}",
            ],
        }


TIMING_KEYS = {"elapsed_s"}


def strip_timing(obj):
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def diff_reports(a, b, path="$"):
    """Structural differences between two report objects, ignoring timing."""
    a, b = strip_timing(a), strip_timing(b)
    out = []
    if type(a) is not type(b):
        out.append(f"{path}: {a!r} != {b!r}")
    elif isinstance(a, dict):
        for k in sorted(set(a) | set(b)):
            if k not in a or k not in b:
                out.append(f"{path}.{k}: present in only one report")
            else:
                out += diff_reports(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        if len(a) != len(b):
            out.append(f"{path}: length {len(a)} != {len(b)}")
        for i, (x, y) in enumerate(zip(a, b)):
            label = f"{path}[{i}]"
            if isinstance(x, dict) and "check_id" in x:
                label = f"{path}[{x['check_id']} {json.dumps(x.get('params'), sort_keys=True)}]"
            out += diff_reports(x, y, label)
    elif a != b:
        out.append(f"{path}: {a!r} != {b!r}")
    return out
