"""Exhaustive ground truth at desk scale.

Nothing here uses the exponent solver or the fast decoding path: exponent
minima come from brute-force enumeration of a conditional-type lattice, and
error probabilities from summing the channel law over every output sequence
decoded with the exhaustive rule.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .codec import Codebook, decide, satisfiers_exhaustive
from .exponents import RateConfig
from .types_core import Channel, Distribution, empirical_mutual_info, pair_index, simplex_lattice


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_outputs: int = 1 << 20
    max_grid_points: int = 60_000_000

    def __post_init__(self):
        if self.max_outputs < 1 or self.max_grid_points < 1:
            raise ValueError("oracle budgets must be positive")


# ---------------------------------------------------------------------------
# lattice minima


@dataclass(frozen=True)
class GridResult:
    value: float
    argmin: Channel | None
    k: int
    points: int


def _xlogx(a):
    return a * np.log2(np.where(a > 0, a, 1.0))


def _rowwise_kl_table(lattice, w_row):
    """D(c || w_row) for every lattice row ``c``; +inf on support violations."""
    out = np.zeros(lattice.shape[0])
    for i, c in enumerate(lattice):
        pos = c > 0
        if np.any(w_row[pos] <= 0):
            out[i] = np.inf
        else:
            out[i] = float(np.sum(c[pos] * np.log2(c[pos] / w_row[pos])))
    return out


def _half_terms(lattice, rows, weights, kl_tabs, ent, groups, nu):
    m, ny = lattice.shape
    combos = np.indices((m,) * len(rows)).reshape(len(rows), -1).T if rows else np.zeros((1, 0), dtype=int)
    N = combos.shape[0]
    d = np.zeros(N)
    h = np.zeros(N)
    q = np.zeros((N, ny))
    ind = np.zeros((N, nu, ny))
    for j, a in enumerate(rows):
        c = combos[:, j]
        d += weights[a] * kl_tabs[a][c]
        h += weights[a] * ent[c]
        q += weights[a] * lattice[c]
        ind[:, groups[a], :] += weights[a] * lattice[c]
    return combos, d, h, q, ind


def _lattice_minimum(weights, w, groups, pu, k, kind, lam, rate, pen_rate, budget: OracleBudget):
    weights = np.asarray(weights, dtype=float)
    w = np.asarray(w, dtype=float)
    ny = w.shape[1]
    nu = pu.size
    lattice = simplex_lattice(k, ny)
    m = lattice.shape[0]
    active = [a for a in range(weights.size) if weights[a] > 0]
    points = m ** len(active)
    if points > budget.max_grid_points:
        raise BudgetExceeded(f"{points} lattice points exceed the budget of {budget.max_grid_points}")
    ent = -_xlogx(lattice).sum(axis=1)
    kl_tabs = {a: _rowwise_kl_table(lattice, w[a]) for a in active}
    half = (len(active) + 1) // 2
    left, right = active[:half], active[half:]
    lc, ld, lh, lq, lind = _half_terms(lattice, left, weights, kl_tabs, ent, groups, nu)
    rc_, rd, rh, rq, rind = _half_terms(lattice, right, weights, kl_tabs, ent, groups, nu)
    NR = rd.size
    chunk = max(1, 2_000_000 // max(NR * ny * max(nu, 1), 1))
    best, best_flat = np.inf, -1
    for start in range(0, ld.size, chunk):
        sl = slice(start, start + chunk)
        with np.errstate(invalid="ignore"):
            d = ld[sl, None] + rd[None, :]
        q = lq[sl, None, :] + rq[None, :, :]
        hq = -_xlogx(q).sum(axis=2)
        info = np.maximum(hq - (lh[sl, None] + rh[None, :]), 0.0)
        d = np.maximum(d, 0.0)
        if kind == "sphere_packing":
            val = np.where(info <= rate, d, np.inf)
        else:
            val = d + lam * np.maximum(info - rate, 0.0)
            if kind == "penalized":
                ind = lind[sl, None] + rind[None, :]
                posu = pu > 0
                cond = ind[:, :, posu, :] / pu[posu][None, None, :, None]
                hu = -(pu[posu][None, None, :, None] * _xlogx(cond)).sum(axis=(2, 3))
                info_u = np.maximum(hq - hu, 0.0)
                val = val - np.maximum(info_u - pen_rate, 0.0)
        val = np.where(np.isfinite(d), val, np.inf)
        i = int(np.argmin(val))
        if val.flat[i] < best:
            best = float(val.flat[i])
            best_flat = start * NR + i
    if not np.isfinite(best):
        return GridResult(math.inf, None, k, points)
    li, ri = divmod(best_flat, NR)
    v = w.copy()
    for j, a in enumerate(left):
        v[a] = lattice[lc[li, j]]
    for j, a in enumerate(right):
        v[a] = lattice[rc_[ri, j]]
    return GridResult(best, Channel(v), k, points)


def grid_exponent(objective: str, k: int, p_ux, w_y, lam: float = 1.0, R1: float = 0.0, R2: float = 0.0,
                  R2_pen: float = 0.0, R: float = 0.0, budget: OracleBudget | None = None) -> GridResult:
    """Exact minimum of an exponent objective over the lattice of denominator ``k``.

    ``objective`` is one of ``marginal`` (uses ``lam, R2``), ``joint``
    (``lam, R1, R2``), ``penalized`` (``lam, R1, R2, R2_pen``) or
    ``sphere_packing`` (``R``).
    """
    budget = budget or OracleBudget()
    p = p_ux.probs if isinstance(p_ux, Distribution) else np.asarray(p_ux, dtype=float)
    w = w_y.matrix if isinstance(w_y, Channel) else np.asarray(w_y, dtype=float)
    nu, nx = p.shape
    pu = p.sum(axis=1)
    if objective == "marginal":
        w_u = np.full((nu, w.shape[1]), 1.0 / w.shape[1])
        for u in range(nu):
            if pu[u] > 0:
                w_u[u] = sum(p[u, x] / pu[u] * w[x] for x in range(nx))
        return _lattice_minimum(pu, w_u, np.arange(nu), pu, k, "modified", lam, R2, 0.0, budget)
    weights = p.reshape(-1)
    w_joint = np.array([w[x] for u in range(nu) for x in range(nx)])
    groups = np.repeat(np.arange(nu), nx)
    if objective == "joint":
        return _lattice_minimum(weights, w_joint, groups, pu, k, "modified", lam, R1 + R2, 0.0, budget)
    if objective == "penalized":
        return _lattice_minimum(weights, w_joint, groups, pu, k, "penalized", lam, R1 + R2, R2_pen, budget)
    if objective == "sphere_packing":
        return _lattice_minimum(weights, w_joint, groups, pu, k, "sphere_packing", 0.0, R, 0.0, budget)
    raise ValueError(f"unknown objective {objective!r}")


# ---------------------------------------------------------------------------
# exact error probabilities


def all_outputs(y_size: int, n: int, budget: OracleBudget | None = None) -> np.ndarray:
    """Every sequence in ``Y^n`` in mixed-radix order (first symbol most significant)."""
    budget = budget or OracleBudget()
    total = y_size**n
    if total > budget.max_outputs:
        raise BudgetExceeded(f"|Y|^n = {total} exceeds the budget of {budget.max_outputs}")
    return np.array(list(itertools.product(range(y_size), repeat=n)), dtype=np.int64).reshape(total, n)


def exact_scores(cb: Codebook, ys: np.ndarray, y_size: int):
    """Empirical MI of every output against every pair and every cloud center."""
    pairs = [pair_index(cb.u[m2], cb.x[m2, m1], cb.x_size) for m2 in range(cb.M2) for m1 in range(cb.M1)]
    a_size = cb.u_size * cb.x_size
    s_pairs = np.array([[empirical_mutual_info(c, y, a_size, y_size) for c in pairs] for y in ys])
    s_clouds = np.array([[empirical_mutual_info(u, y, cb.u_size, y_size) for u in cb.u] for y in ys])
    return s_pairs, s_clouds


CLASSES = ("correct", "undetected", "erased")


@dataclass(frozen=True)
class ExactProbs:
    """Exact probabilities of the four error events.

    ``cells[(c1, c2)]`` is the mass of outputs whose message-1 class is ``c1``
    and message-2 class is ``c2`` (each one of :data:`CLASSES`).
    """

    e1: float
    e1hat: float
    e2: float
    e2hat: float
    cells: dict = field(default_factory=dict)

    @property
    def correct(self) -> float:
        return self.cells[("correct", "correct")]

    @property
    def total_mass(self) -> float:
        return math.fsum(self.cells.values())

    def as_dict(self) -> dict:
        return {"e1": self.e1, "e1hat": self.e1hat, "e2": self.e2, "e2hat": self.e2hat}


def _classify(decoded, sent):
    if decoded is None:
        return "erased"
    return "correct" if decoded == sent else "undetected"


def output_likelihoods(x: np.ndarray, w: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """``W^n(y | x)`` for every row of ``ys``."""
    return np.prod(w[x[None, :], ys], axis=1)


def exact_error_probs(cb: Codebook, w_y, rc: RateConfig, transmitted=(0, 0), budget: OracleBudget | None = None) -> ExactProbs:
    """Sum the channel law over all outputs; ``transmitted=None`` averages over every message pair."""
    w = w_y.matrix if isinstance(w_y, Channel) else np.asarray(w_y, dtype=float)
    y_size = w.shape[1]
    ys = all_outputs(y_size, cb.n, budget)
    s_pairs, s_clouds = exact_scores(cb, ys, y_size)
    outcomes = [decide(sp, sc, cb.M1, rc, exhaustive=True) for sp, sc in zip(s_pairs, s_clouds)]
    if transmitted is None:
        sent_list = [(m1, m2) for m2 in range(cb.M2) for m1 in range(cb.M1)]
    else:
        sent_list = [tuple(transmitted)]
    acc = {(a, b): [] for a in CLASSES for b in CLASSES}
    for m1, m2 in sent_list:
        like = output_likelihoods(cb.x[m2, m1], w, ys)
        for o, pr in zip(outcomes, like):
            acc[(_classify(o.msg1, m1), _classify(o.msg2, m2))].append(pr)
    scale = 1.0 / len(sent_list)
    cells = {key: math.fsum(vals) * scale for key, vals in acc.items()}

    def total(j, cls):
        return math.fsum(v for key, v in cells.items() if key[j] in cls)

    return ExactProbs(
        e1=total(0, ("undetected", "erased")),
        e1hat=total(0, ("undetected",)),
        e2=total(1, ("undetected", "erased")),
        e2hat=total(1, ("undetected",)),
        cells=cells,
    )


# ---------------------------------------------------------------------------
# unambiguity audit


@dataclass(frozen=True)
class AuditResult:
    passed: bool
    outputs_checked: int
    witness: np.ndarray | None = None
    step1_satisfiers: tuple = ()
    step2_satisfiers: tuple = ()
    fast_path_mismatches: int = 0


def unambiguity_audit(cb: Codebook, rc: RateConfig, y_size: int, budget: OracleBudget | None = None,
                      compare_fast: bool = True) -> AuditResult:
    """Count satisfiers of both decoding rules on every output.

    Passes iff no output has more than one satisfier of either rule.  When
    ``compare_fast`` is set the fast decoder is also run on every output and
    disagreements with the exhaustive decoder are counted.
    """
    from .codec import decode_y_batch

    ys = all_outputs(y_size, cb.n, budget)
    s_pairs, s_clouds = exact_scores(cb, ys, y_size)
    fast = decode_y_batch(ys, cb, rc, y_size) if compare_fast else None
    mismatches = 0
    witness = None
    for t, (sp, sc) in enumerate(zip(s_pairs, s_clouds)):
        s1 = satisfiers_exhaustive(sp, rc.R12_tilde, rc.lambda12, rc.R12)
        s2 = satisfiers_exhaustive(sc, rc.R2_tilde, rc.lambda2, rc.R2)
        if witness is None and (len(s1) > 1 or len(s2) > 1):
            witness = (ys[t].copy(), tuple(s1), tuple(s2))
        if fast is not None and fast[t] != decide(sp, sc, cb.M1, rc, exhaustive=True):
            mismatches += 1
    if witness is None:
        return AuditResult(True, len(ys), fast_path_mismatches=mismatches)
    y, s1, s2 = witness
    return AuditResult(False, len(ys), y, s1, s2, mismatches)
