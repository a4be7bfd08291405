"""Modified, penalized and sphere-packing exponents for the degraded-message-set broadcast channel.

All minimizations run over conditional distributions ``V: U x X -> Y`` (or
``U -> Y`` for the marginal exponent).  The solver enumerates a coarse lattice
of conditional types, then polishes the most promising lattice points with a
multi-start pattern search (single-row and paired-row mass transfers with a
shrinking step).  For the convex objectives the seeds also include the
tilted-channel solution of the Lagrange dual, which doubles as a lower bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .types_core import (
    INF,
    Channel,
    Distribution,
    conditional_kl,
    conditional_mutual_information,
    mutual_information,
    simplex_lattice,
)

_FEAS_TOL = 0.0
_MIN_STEP = 1e-11


@dataclass(frozen=True)
class RateConfig:
    """Operating rates (bits/symbol) and decoder thresholds.

    ``strict=False`` skips the ``lambda >= 1`` / ``R_tilde >= R`` checks; it
    exists only to build deliberately invalid decoders for audits.
    """

    R1: float
    R2: float
    R1_tilde: float | None = None
    R2_tilde: float | None = None
    lambda12: float = 1.0
    lambda2: float = 1.0
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.R1_tilde is None:
            object.__setattr__(self, "R1_tilde", self.R1)
        if self.R2_tilde is None:
            object.__setattr__(self, "R2_tilde", self.R2)
        for name in ("R1", "R2", "R1_tilde", "R2_tilde", "lambda12", "lambda2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.R1 < 0 or self.R2 < 0:
            raise ValueError("rates must be non-negative")
        if self.lambda12 <= 0 or self.lambda2 <= 0:
            raise ValueError("thresholds lambda12, lambda2 must be positive")
        if self.strict:
            if self.R1_tilde < self.R1 or self.R2_tilde < self.R2:
                raise ValueError("need R1_tilde >= R1 and R2_tilde >= R2")
            if self.lambda12 < 1 or self.lambda2 < 1:
                raise ValueError("need lambda12 >= 1 and lambda2 >= 1")

    @property
    def R12(self) -> float:
        return self.R1 + self.R2

    @property
    def R12_tilde(self) -> float:
        return self.R1_tilde + self.R2_tilde

    @property
    def Delta2(self) -> float:
        return self.R2_tilde - self.R2

    @property
    def Delta12(self) -> float:
        return self.R12_tilde - self.R12

    def as_dict(self) -> dict:
        return {
            "R1": self.R1,
            "R2": self.R2,
            "R1_tilde": self.R1_tilde,
            "R2_tilde": self.R2_tilde,
            "lambda12": self.lambda12,
            "lambda2": self.lambda2,
        }


@dataclass(frozen=True)
class SolverSettings:
    grid_k: int = 20
    refine_steps: int = 200
    shrink: float = 0.7
    tolerance: float = 1e-3
    n_starts: int = 6
    max_grid_points: int = 500_000

    def __post_init__(self):
        if self.grid_k < 2:
            raise ValueError("grid_k must be >= 2")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.refine_steps < 0 or self.n_starts < 1 or self.max_grid_points < 1:
            raise ValueError("invalid solver budget")


@dataclass(frozen=True)
class Solution:
    """Result of one minimization.

    ``value`` is the objective re-evaluated at ``argmin``.  ``dual_bound`` is
    the Lagrange-dual estimate for convex objectives (``None`` otherwise);
    ``certified`` is true when primal and dual agree within the tolerance.
    """

    value: float
    argmin: Channel
    grid_k: int
    iterations: int
    n_starts: int
    dual_bound: float | None = None
    certified: bool | None = None


# ---------------------------------------------------------------------------
# channel helpers


def _joint_probs(p_ux) -> np.ndarray:
    p = p_ux.probs if isinstance(p_ux, Distribution) else np.asarray(p_ux, dtype=float)
    if p.ndim != 2:
        raise ValueError("P_UX must be a (|U|, |X|) joint distribution")
    return p


def _matrix(ch) -> np.ndarray:
    return ch.matrix if isinstance(ch, Channel) else np.asarray(ch, dtype=float)


def lift_channel(w_y, p_ux) -> Channel:
    """``W(y|u,x) := W_Y(y|x)`` as a channel on the product alphabet."""
    p = _joint_probs(p_ux)
    w = _matrix(w_y)
    nu, nx = p.shape
    if w.shape[0] == nu * nx and w.shape[0] != nx:
        return Channel(w)
    if w.shape[0] != nx:
        raise ValueError(f"W_Y has {w.shape[0]} inputs, P_UX has |X| = {nx}")
    return Channel(np.tile(w, (nu, 1)))


def induced_u_channel(v, p_ux) -> Channel:
    """Average a channel ``U x X -> Y`` over ``P_{X|U}``; rows with ``P(u) = 0`` are uniform."""
    p = _joint_probs(p_ux)
    vm = _matrix(v)
    nu, nx = p.shape
    if vm.shape[0] != nu * nx:
        raise ValueError(f"V must have {nu * nx} input rows, got {vm.shape[0]}")
    ny = vm.shape[1]
    pu = p.sum(axis=1)
    out = np.full((nu, ny), 1.0 / ny)
    vr = vm.reshape(nu, nx, ny)
    for u in range(nu):
        if pu[u] > 0:
            out[u] = (p[u] / pu[u]) @ vr[u]
    return Channel(out)


def u_channel(w_y, p_ux) -> Channel:
    """``W_{Y|U}(y|u) = sum_x W_Y(y|x) P_{X|U}(x|u)``."""
    return induced_u_channel(lift_channel(w_y, p_ux), p_ux)


def _pos(x: float) -> float:
    return x if x > 0 else 0.0


def j_joint(v, rc: RateConfig, p_ux) -> float:
    """``|I_V(UX ^ Y) - R12|^+``."""
    return _pos(mutual_information(_joint_probs(p_ux).reshape(-1), v) - rc.R12)


def j_marginal(v_hat, R2: float, p_u) -> float:
    """``|I_{V_hat}(U ^ Y) - R2|^+`` with ``U ~ p_u``."""
    return _pos(mutual_information(p_u, v_hat) - R2)


# ---------------------------------------------------------------------------
# reference objectives, evaluated with the types_core measures


def joint_objective(v, lam, R1_arg, R2_arg, p_ux, w_y) -> float:
    p = _joint_probs(p_ux)
    w = lift_channel(w_y, p)
    d = conditional_kl(v, w, p.reshape(-1))
    if d == INF:
        return INF
    return d + lam * _pos(mutual_information(p.reshape(-1), v) - (R1_arg + R2_arg))


def marginal_objective(v_hat, lam, R2_arg, p_ux, w_y) -> float:
    p = _joint_probs(p_ux)
    pu = p.sum(axis=1)
    d = conditional_kl(v_hat, u_channel(w_y, p), pu)
    if d == INF:
        return INF
    return d + lam * _pos(mutual_information(pu, v_hat) - R2_arg)


def penalized_objective(v, lam, R1_arg, R2_arg, R2_pen, p_ux, w_y) -> float:
    p = _joint_probs(p_ux)
    base = joint_objective(v, lam, R1_arg, R2_arg, p, w_y)
    if base == INF:
        return INF
    i_u = mutual_information(p.sum(axis=1), induced_u_channel(v, p))
    return base - _pos(i_u - R2_pen)


def sphere_objective(v, R_arg, p_ux, w_y) -> float:
    p = _joint_probs(p_ux)
    if mutual_information(p.reshape(-1), v) > R_arg + _FEAS_TOL:
        return INF
    return conditional_kl(v, lift_channel(w_y, p), p.reshape(-1))


# ---------------------------------------------------------------------------
# solver internals


@dataclass
class _Problem:
    p: np.ndarray  # (A,)
    w: np.ndarray  # (A, Y)
    groups: np.ndarray  # (A,)
    pu: np.ndarray  # (U,)
    kind: int
    lam: float = 1.0
    rate: float = 0.0
    pen_rate: float = 0.0

    def __post_init__(self):
        with np.errstate(divide="ignore"):
            self.logw = np.where(self.w > 0, np.log2(np.where(self.w > 0, self.w, 1.0)), -np.inf)
        self.active = np.flatnonzero(self.p > 0)

    def evaluate(self, vs) -> np.ndarray:
        return kernels.objective_batch(
            np.ascontiguousarray(vs, dtype=float),
            self.p,
            self.logw,
            self.groups,
            self.pu,
            self.lam,
            self.rate,
            self.pen_rate,
            self.kind,
            _FEAS_TOL,
        )

    def value(self, v) -> float:
        return float(self.evaluate(np.asarray(v, dtype=float)[None])[0])


def _joint_problem(p_ux, w_y, kind, **kw) -> _Problem:
    p = _joint_probs(p_ux)
    nu, nx = p.shape
    w = lift_channel(w_y, p).matrix
    return _Problem(p.reshape(-1).copy(), w.copy(), np.repeat(np.arange(nu), nx), p.sum(axis=1), kind, **kw)


def _marginal_problem(p_ux, w_y, **kw) -> _Problem:
    p = _joint_probs(p_ux)
    pu = p.sum(axis=1)
    w = u_channel(w_y, p).matrix
    nu = pu.size
    return _Problem(pu.copy(), w.copy(), np.arange(nu), pu.copy(), kernels.MODIFIED, **kw)


def _lattice_denominator(settings: SolverSettings, n_rows: int, ny: int) -> int:
    k = settings.grid_k
    while k > 1 and math.comb(k + ny - 1, ny - 1) ** max(n_rows, 1) > settings.max_grid_points:
        k -= 1
    return k


def _grid_starts(prob: _Problem, settings: SolverSettings):
    ny = prob.w.shape[1]
    k = _lattice_denominator(settings, prob.active.size, ny)
    lattice = simplex_lattice(k, ny)
    vals, choices = kernels.grid_scan(
        lattice,
        prob.p,
        prob.logw,
        prob.groups,
        prob.pu,
        prob.lam,
        prob.rate,
        prob.pen_rate,
        prob.kind,
        _FEAS_TOL,
        max(8 * settings.n_starts, 16),
    )
    picked: list[np.ndarray] = []
    for c in choices:
        v = prob.w.copy()
        act = c >= 0
        v[act] = lattice[c[act]]
        if all(np.abs(v - q).max() > 1.5 / k for q in picked):
            picked.append(v)
        if len(picked) >= settings.n_starts:
            break
    return k, picked


def _moves(prob: _Problem):
    singles = []
    for a in prob.active:
        supp = np.flatnonzero(prob.w[a] > 0)
        for i, j in itertools.permutations(supp, 2):
            singles.append((a, i, j))
    pairs = [(s, t) for s, t in itertools.combinations(singles, 2) if s[0] != t[0]]
    return singles, pairs


def _move_arrays(prob: _Problem):
    """Index arrays ``(row, to, from)`` for single moves and both halves of paired moves."""
    singles, pairs = _moves(prob)
    s = np.array(singles, dtype=np.int64).reshape(-1, 3)
    first = np.array([m for m, _ in pairs], dtype=np.int64).reshape(-1, 3)
    second = np.array([m for _, m in pairs], dtype=np.int64).reshape(-1, 3)
    return s, first, second


def _shift(cands, v, moves, step, offset):
    """Move up to ``step`` mass ``from -> to`` in candidate ``offset + n`` for move ``n``."""
    n = np.arange(len(moves)) + offset
    a, i, j = moves[:, 0], moves[:, 1], moves[:, 2]
    t = np.minimum(step, v[a, j])
    cands[n, a, i] += t
    cands[n, a, j] -= t


def _pattern_search(prob: _Problem, v0: np.ndarray, settings: SolverSettings, step0: float):
    singles, first, second = _move_arrays(prob)
    v = v0.copy()
    best = prob.value(v)
    step = step0
    it = 0
    if not len(singles):
        return v, best, it
    ns, npair = len(singles), len(first)
    while it < settings.refine_steps and step > _MIN_STEP:
        it += 1
        cands = np.broadcast_to(v, (ns + npair,) + v.shape).copy()
        _shift(cands, v, singles, step, 0)
        if npair:
            _shift(cands, v, first, step, ns)
            _shift(cands, v, second, step, ns)
        vals = prob.evaluate(cands)
        k = int(np.argmin(vals))
        if vals[k] < best - 1e-15:
            best = float(vals[k])
            v = cands[k]
        else:
            step *= settings.shrink
    return v, best, it


def _restrict_to_support(prob: _Problem, v: np.ndarray) -> np.ndarray | None:
    v = np.array(v, dtype=float)
    if v.shape != prob.w.shape:
        return None
    v = np.where(prob.w > 0, np.clip(v, 0, None), 0.0)
    s = v.sum(axis=1, keepdims=True)
    bad = s[:, 0] <= 0
    v[bad] = prob.w[bad]
    s[bad] = 1.0
    return v / s


def _minimize(prob: _Problem, settings: SolverSettings, seeds=()) -> Solution:
    k, starts = _grid_starts(prob, settings)
    extra = [prob.w.copy()]
    for s in seeds:
        r = _restrict_to_support(prob, _matrix(s))
        if r is not None:
            extra.append(r)
    best_v, best_val, total_it = prob.w.copy(), prob.value(prob.w), 0
    all_starts = starts + extra
    for v0 in all_starts:
        if not np.isfinite(prob.value(v0)):
            continue
        v, val, it = _pattern_search(prob, v0, settings, 1.0 / k)
        total_it += it
        if val < best_val - 1e-15:
            best_v, best_val = v, val
    # Exact re-evaluation keeps value and argmin consistent.
    best_v = _clean(best_v, prob)
    return Solution(prob.value(best_v), Channel(best_v), k, total_it, len(all_starts))


def _clean(v, prob):
    v = np.where(prob.w > 0, np.clip(v, 0, None), 0.0)
    return v / v.sum(axis=1, keepdims=True)


def _tilted(prob: _Problem, rho: float, q0=None, iters: int = 5000):
    """Minimize ``D(V||W|P) + rho * I(P, V)`` by alternating minimization.

    Returns the minimizing channel and its output law.  Each step sets
    ``V(y|a) ~ W(y|a)^(1/(1+rho)) Q(y)^(rho/(1+rho))`` and ``Q = P V``.
    """
    w, p = prob.w, prob.p
    if rho <= 0:
        return w.copy(), p @ w
    return kernels.tilted_channel(prob.logw, p, float(rho), p @ w if q0 is None else q0, iters, 1e-15)


def _d_and_i(prob: _Problem, v, q=None):
    """``D(V||W|P)`` and ``I(P, V)`` for ``V`` inside the support of ``W``."""
    p = prob.p
    if q is None:
        q = p @ v
    pos = v > 0
    lv = np.log2(np.where(pos, v, 1.0))
    lq = np.log2(np.where(q > 0, q, 1.0))
    d = float(np.sum(p[:, None] * np.where(pos, v * (lv - np.where(pos, prob.logw, 0.0)), 0.0)))
    i = float(np.sum(p[:, None] * np.where(pos, v * (lv - lq[None, :]), 0.0)))
    return max(d, 0.0), max(i, 0.0)


def _dual_modified(prob: _Problem, lam: float, rate: float):
    """Maximize ``F(rho) - rho R`` over ``rho in [0, lam]`` (golden section)."""
    warm = [None]

    def g(rho):
        v, q = _tilted(prob, rho, warm[0])
        warm[0] = q
        d, i = _d_and_i(prob, v, q)
        return d + rho * i - rho * rate, v

    lo, hi = 0.0, lam
    phi = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - phi * (hi - lo), lo + phi * (hi - lo)
    (f1, v1), (f2, v2) = g(x1), g(x2)
    for _ in range(60):
        if f1 < f2:
            lo, x1, f1, v1 = x1, x2, f2, v2
            x2 = lo + phi * (hi - lo)
            f2, v2 = g(x2)
        else:
            hi, x2, f2, v2 = x2, x1, f1, v1
            x1 = hi - phi * (hi - lo)
            f1, v1 = g(x1)
        if hi - lo < 1e-10:
            break
    cands = [(f1, v1), (f2, v2), g(0.0), g(lam)]
    f, v = max(cands, key=lambda c: c[0])
    return f, v


def _dca_penalized(convex: _Problem, pen_rate: float, v0: np.ndarray, iters: int = 40) -> np.ndarray:
    """Convex-concave iteration for ``f(V) - I_U(V) + pen_rate``, ``f`` the convex joint objective.

    ``I_U`` (mutual information of the channel induced on ``U``) is convex in
    ``V``; linearizing it at the current point leaves ``f`` minus a linear
    term, which is ``f`` with ``W`` tilted by ``2^g`` row by row.  Each step
    therefore reuses the tilted-channel dual solver and never increases the
    surrogate.
    """
    p, groups, pu = convex.p, convex.groups, convex.pu
    v = v0.copy()
    prev = INF
    for _ in range(iters):
        vu = np.zeros((pu.size, v.shape[1]))
        np.add.at(vu, groups, p[:, None] * v)
        vu = vu / np.where(pu > 0, pu, 1.0)[:, None]
        q = pu @ vu
        g = np.log2(np.maximum(vu[groups], 1e-300)) - np.log2(np.maximum(q, 1e-300))[None, :]
        w_t = convex.w * np.exp2(g - g.max(axis=1, keepdims=True))
        w_t /= w_t.sum(axis=1, keepdims=True)
        sub = _Problem(p, w_t, groups, pu, kernels.MODIFIED, convex.lam, convex.rate)
        _, v_new = _dual_modified(sub, convex.lam, convex.rate)
        v_new = _clean(v_new, convex)
        i_u = mutual_information(pu, _induced(v_new, p, groups, pu))
        val = convex.value(v_new) - i_u + pen_rate
        if not val < prev - 1e-13:
            break
        v, prev = v_new, val
    return v


def _induced(v, p, groups, pu):
    vu = np.zeros((pu.size, v.shape[1]))
    np.add.at(vu, groups, p[:, None] * v)
    out = np.full_like(vu, 1.0 / v.shape[1])
    act = pu > 0
    out[act] = vu[act] / pu[act, None]
    return out


def _certify(sol: Solution, dual: float, settings: SolverSettings) -> Solution:
    return Solution(
        sol.value, sol.argmin, sol.grid_k, sol.iterations, sol.n_starts, dual, bool(sol.value - dual <= settings.tolerance)
    )


# ---------------------------------------------------------------------------
# public exponents


def minimize_marginal(lam, R2_arg, p_ux, w_y, settings=None, starts=()) -> Solution:
    """``min over V_hat: D(V_hat || W_{Y|U} | P_U) + lam |I(P_U, V_hat) - R2_arg|^+``."""
    settings = settings or SolverSettings()
    if lam <= 0:
        raise ValueError("lambda must be positive")
    prob = _marginal_problem(p_ux, w_y, lam=float(lam), rate=float(R2_arg))
    dual, v_dual = _dual_modified(prob, float(lam), float(R2_arg))
    sol = _minimize(prob, settings, [v_dual, *starts])
    return _certify(sol, dual, settings)


def minimize_joint(lam, R1_arg, R2_arg, p_ux, w_y, settings=None, starts=()) -> Solution:
    """``min over V: D(V || W | P_UX) + lam |I_V(UX ^ Y) - (R1_arg + R2_arg)|^+``."""
    settings = settings or SolverSettings()
    if lam <= 0:
        raise ValueError("lambda must be positive")
    rate = float(R1_arg) + float(R2_arg)
    prob = _joint_problem(p_ux, w_y, kernels.MODIFIED, lam=float(lam), rate=rate)
    dual, v_dual = _dual_modified(prob, float(lam), rate)
    sol = _minimize(prob, settings, [v_dual, *starts])
    return _certify(sol, dual, settings)


def minimize_penalized(lam, R1_arg, R2_arg, R2_pen, p_ux, w_y, settings=None, starts=()) -> Solution:
    """Joint objective minus ``|I(U ^ Y) - R2_pen|^+`` of the channel induced on ``U``.

    The objective is a difference of convex functions, so the search is
    seeded from the lattice, from ``W``, and from the minimizer of the
    unpenalized convex part.
    """
    settings = settings or SolverSettings()
    if lam <= 0:
        raise ValueError("lambda must be positive")
    rate = float(R1_arg) + float(R2_arg)
    convex = _joint_problem(p_ux, w_y, kernels.MODIFIED, lam=float(lam), rate=rate)
    _, v_convex = _dual_modified(convex, float(lam), rate)
    prob = _joint_problem(p_ux, w_y, kernels.PENALIZED, lam=float(lam), rate=rate, pen_rate=float(R2_pen))
    seeds = [v_convex, *starts]
    sol = _minimize(prob, settings, seeds + [_dca_penalized(convex, float(R2_pen), v_convex)])
    # A final convex-concave pass from the best point, polished again.
    v = _dca_penalized(convex, float(R2_pen), sol.argmin.matrix)
    if prob.value(v) < sol.value:
        v, val, it = _pattern_search(prob, v, settings, 1.0 / sol.grid_k)
        v = _clean(v, prob)
        if prob.value(v) < sol.value:
            sol = Solution(prob.value(v), Channel(v), sol.grid_k, sol.iterations + it, sol.n_starts)
    return sol


def minimize_sphere_packing(R_arg, p_ux, w_y, settings=None, starts=()) -> Solution:
    """``min D(V || W | P_UX)`` subject to ``I_V(UX ^ Y) <= R_arg``; value ``+inf`` if infeasible."""
    settings = settings or SolverSettings()
    R_arg = float(R_arg)
    if R_arg < 0:
        raise ValueError("rate must be non-negative")
    prob = _joint_problem(p_ux, w_y, kernels.SPHERE, rate=R_arg)
    _, i_w = _d_and_i(prob, prob.w)
    if i_w <= R_arg:
        return Solution(0.0, Channel(prob.w), 0, 0, 1, 0.0, True)
    # Bracket the multiplier at which the tilted channel meets the rate.
    lo, hi = 0.0, 1.0
    v_hi, q_hi = _tilted(prob, hi)
    while _d_and_i(prob, v_hi, q_hi)[1] > R_arg and hi < 2.0**40:
        lo, hi = hi, hi * 2
        v_hi, q_hi = _tilted(prob, hi, q_hi)
    d_hi, i_hi = _d_and_i(prob, v_hi, q_hi)
    if i_hi > R_arg:
        # Tilting cannot reach the rate: the finite-divergence face is infeasible.
        sol = _minimize(prob, settings, list(starts))
        return _certify(sol, INF, settings)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        v_mid, q_mid = _tilted(prob, mid, q_hi)
        if _d_and_i(prob, v_mid, q_mid)[1] > R_arg:
            lo = mid
        else:
            hi, v_hi, q_hi = mid, v_mid, q_mid
        if hi - lo < 1e-12 * max(1.0, hi):
            break
    d_hi, i_hi = _d_and_i(prob, v_hi, q_hi)
    dual = d_hi + hi * (i_hi - R_arg)
    sol = _minimize(prob, settings, [v_hi, *starts])
    return _certify(sol, dual, settings)


def exponent_marginal(lam, R2_arg, p_ux, w_y, settings=None) -> float:
    return minimize_marginal(lam, R2_arg, p_ux, w_y, settings).value


def exponent_joint(lam, R1_arg, R2_arg, p_ux, w_y, settings=None) -> float:
    return minimize_joint(lam, R1_arg, R2_arg, p_ux, w_y, settings).value


def exponent_penalized(lam, R1_arg, R2_arg, R2_pen, p_ux, w_y, settings=None) -> float:
    return minimize_penalized(lam, R1_arg, R2_arg, R2_pen, p_ux, w_y, settings).value


def sphere_packing(R_arg, p_ux, w_y, settings=None) -> float:
    return minimize_sphere_packing(R_arg, p_ux, w_y, settings).value


# ---------------------------------------------------------------------------
# bounds


@dataclass(frozen=True)
class ExponentReport:
    """The four exponent lower bounds and every constituent used to build them.

    ``breakdown`` keys:

    ``pen_tilde``   penalized exponent at ``1/lambda12`` and the tilde rates
    ``pen_plain``   penalized exponent at ``lambda12`` and the plain rates
    ``joint_plain`` joint exponent at ``lambda12`` and the plain rates
    ``marg_tilde``  marginal exponent at ``1/lambda2`` and ``R2_tilde``
    ``marg_plain``  marginal exponent at ``lambda2`` and ``R2``
    ``Delta12``, ``Delta2`` rate gaps
    """

    e1_bound: float
    e1hat_bound: float
    e2_bound: float
    e2hat_bound: float
    breakdown: dict
    diagnostics: dict
    penalty_marginal: str = "induced"

    def as_dict(self) -> dict:
        return {
            "e1_bound": self.e1_bound,
            "e1hat_bound": self.e1hat_bound,
            "e2_bound": self.e2_bound,
            "e2hat_bound": self.e2hat_bound,
        }


def recombine(b: dict) -> dict:
    """Rebuild the four bounds from a breakdown.

    Penalized constituents may be negative; the bounds are clipped at 0
    because an exponent of a probability is never negative.
    """
    e1 = max(b["pen_tilde"], 0.0)
    e1hat = max(b["pen_plain"] + b["Delta12"], 0.0)
    first = b["joint_plain"] + b["Delta12"]
    e2 = max(min(first, max(b["pen_tilde"], b["marg_tilde"])), 0.0)
    e2hat = max(min(first, max(b["pen_tilde"], b["marg_plain"] + b["Delta2"])), 0.0)
    return {"e1_bound": e1, "e1hat_bound": e1hat, "e2_bound": e2, "e2hat_bound": e2hat}


def theorem_bounds(rc: RateConfig, p_ux, w_y, settings=None) -> ExponentReport:
    settings = settings or SolverSettings()
    l12, l2 = rc.lambda12, rc.lambda2
    joint_plain = minimize_joint(l12, rc.R1, rc.R2, p_ux, w_y, settings)
    pen_plain = minimize_penalized(l12, rc.R1, rc.R2, rc.R2, p_ux, w_y, settings, starts=[joint_plain.argmin])
    # With lambda = 1 and untilted thresholds the tilde problems are the plain ones.
    if l12 == 1.0 and rc.R1_tilde == rc.R1 and rc.R2_tilde == rc.R2:
        pen_tilde = pen_plain
    else:
        # Seeding with pen_plain's minimizer guarantees e1 <= e1hat pointwise.
        pen_tilde = minimize_penalized(
            1.0 / l12, rc.R1_tilde, rc.R2_tilde, rc.R2, p_ux, w_y, settings,
            starts=[pen_plain.argmin, joint_plain.argmin],
        )
    marg_plain = minimize_marginal(l2, rc.R2, p_ux, w_y, settings)
    if l2 == 1.0 and rc.R2_tilde == rc.R2:
        marg_tilde = marg_plain
    else:
        marg_tilde = minimize_marginal(1.0 / l2, rc.R2_tilde, p_ux, w_y, settings)
    breakdown = {
        "pen_tilde": pen_tilde.value,
        "pen_plain": pen_plain.value,
        "joint_plain": joint_plain.value,
        "marg_tilde": marg_tilde.value,
        "marg_plain": marg_plain.value,
        "Delta12": rc.Delta12,
        "Delta2": rc.Delta2,
    }
    bounds = recombine(breakdown)
    diagnostics = {
        "pen_tilde": pen_tilde,
        "pen_plain": pen_plain,
        "joint_plain": joint_plain,
        "marg_tilde": marg_tilde,
        "marg_plain": marg_plain,
    }
    return ExponentReport(breakdown=breakdown, diagnostics=diagnostics, **bounds)


@dataclass(frozen=True)
class RegionCheck:
    inside: bool
    slack: dict
    info: dict


def rate_region_check(p_ux, w_y, w_z, R1: float, R2: float) -> RegionCheck:
    """Check ``(R1, R2)`` against the superposition region for the given ``P_UX``."""
    p = _joint_probs(p_ux)
    i_xy_u = conditional_mutual_information(p, lift_channel(w_y, p))
    i_uz = mutual_information(p.sum(axis=1), u_channel(w_z, p))
    i_xy = mutual_information(p.sum(axis=0), w_y)
    info = {"I(X;Y|U)": i_xy_u, "I(U;Z)": i_uz, "I(X;Y)": i_xy}
    slack = {"R1": i_xy_u - R1, "R2": i_uz - R2, "R1+R2": i_xy - (R1 + R2)}
    return RegionCheck(all(s >= 0 for s in slack.values()), slack, info)
