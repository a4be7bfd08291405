"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` function for function and are used when the
compiled extension is unavailable.
"""

from __future__ import annotations

import numpy as np

MODIFIED = 0
PENALIZED = 1
SPHERE = 2

_NEG = -np.inf


def xlogx_table(n: int) -> np.ndarray:
    c = np.arange(n + 1, dtype=float)
    out = np.zeros(n + 1)
    out[1:] = c[1:] * np.log2(c[1:])
    return out


def batch_empirical_mi(codes, ys, size_a: int, size_y: int) -> np.ndarray:
    """Empirical mutual information (bits) of every ``(y, code)`` pair.

    ``codes`` is ``(M, n)`` over an alphabet of ``size_a`` symbols and ``ys``
    is ``(T, n)`` over ``size_y`` symbols; the result has shape ``(T, M)``.
    """
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    M, n = codes.shape
    T = ys.shape[0]
    f = xlogx_table(n)
    cells = size_a * size_y
    idx = codes[None, :, :] * size_y + ys[:, None, :]
    idx = idx + (np.arange(T * M, dtype=np.int64).reshape(T, M, 1) * cells)
    joint = np.bincount(idx.ravel(), minlength=T * M * cells).reshape(T, M, size_a, size_y)
    ca = joint.sum(axis=3)
    cb = joint.sum(axis=2)
    s = f[joint].sum(axis=(2, 3)) - f[ca].sum(axis=2) - f[cb].sum(axis=2) + f[n]
    return np.maximum(s / n, 0.0)


def _plogp_rows(v):
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * np.log2(v[pos])
    return out


def objective_batch(vs, p, logw, groups, pu, lam, rate, pen_rate, kind, feas_tol):
    """Objective value of every channel in ``vs`` (shape ``(B, A, Y)``).

    Rows with ``p == 0`` are ignored.  ``logw`` holds ``log2 W`` with ``-inf``
    on zeros.  ``groups[a]`` is the cloud symbol of row ``a`` and ``pu`` its
    marginal, used only by the penalized objective.
    """
    vs = np.asarray(vs, dtype=float)
    active = p > 0
    v = vs[:, active, :]
    pa = p[active]
    lw = logw[active]
    vlogv = _plogp_rows(v)
    with np.errstate(invalid="ignore"):
        cross = np.where(v > 0, v * lw[None], 0.0)
    d = (pa[None, :, None] * (vlogv - cross)).sum(axis=(1, 2))
    d = np.where(np.isnan(d), np.inf, d)
    d = np.maximum(d, 0.0)
    q = np.einsum("a,bay->by", pa, v)
    hq = -_plogp_rows(q).sum(axis=1)
    hcond = -(pa[None, :, None] * vlogv).sum(axis=(1, 2))
    info = np.maximum(hq - hcond, 0.0)
    if kind == SPHERE:
        return np.where(info <= rate + feas_tol, d, np.inf)
    val = d + lam * np.maximum(info - rate, 0.0)
    if kind == PENALIZED:
        g = groups[active]
        nu = pu.size
        ind = np.zeros((vs.shape[0], nu, vs.shape[2]))
        np.add.at(ind, (slice(None), g, slice(None)), pa[None, :, None] * v)
        posu = pu > 0
        ind[:, posu, :] /= pu[posu][None, :, None]
        hu = -(pu[None, :, None] * _plogp_rows(ind)).sum(axis=(1, 2))
        info_u = np.maximum(hq - hu, 0.0)
        val = val - np.maximum(info_u - pen_rate, 0.0)
    return val


def _insert_top(best_vals, best_idx, vals, flat_idx, keep):
    vals_all = np.concatenate([best_vals, vals])
    idx_all = np.concatenate([best_idx, flat_idx])
    order = np.lexsort((idx_all, vals_all))[:keep]
    return vals_all[order], idx_all[order]


def grid_scan(lattice, rows_p, logw, groups, pu, lam, rate, pen_rate, kind, feas_tol, keep):
    """Top ``keep`` lattice channels by objective, in lexicographic tie order.

    Every active row independently ranges over the rows of ``lattice``.
    Returns ``(values, choices)`` with ``choices`` of shape ``(keep, A)``
    holding lattice indices per row (``-1`` for inactive rows).
    """
    lattice = np.asarray(lattice, dtype=float)
    m = lattice.shape[0]
    active = np.flatnonzero(rows_p > 0)
    R = active.size
    A = rows_p.size
    s = 0
    while s < R and m ** (s + 1) <= 200_000:
        s += 1
    s = max(s, 1)
    pre = R - s
    suffix = np.indices((m,) * s).reshape(s, -1).T
    n_pre = m**pre
    best_vals = np.empty(0)
    best_idx = np.empty(0, dtype=np.int64)
    base = np.tile(lattice[0], (A, 1))
    for pidx in range(n_pre):
        choice_pre = np.unravel_index(pidx, (m,) * pre) if pre else ()
        vs = np.broadcast_to(base, (suffix.shape[0], A, lattice.shape[1])).copy()
        for j, c in enumerate(choice_pre):
            vs[:, active[j], :] = lattice[c]
        for j in range(s):
            vs[:, active[pre + j], :] = lattice[suffix[:, j]]
        vals = objective_batch(vs, rows_p, logw, groups, pu, lam, rate, pen_rate, kind, feas_tol)
        flat = pidx * suffix.shape[0] + np.arange(suffix.shape[0], dtype=np.int64)
        finite = np.isfinite(vals)
        if not finite.any():
            continue
        best_vals, best_idx = _insert_top(best_vals, best_idx, vals[finite], flat[finite], keep)
    choices = np.full((best_idx.size, A), -1, dtype=np.int64)
    if best_idx.size:
        digits = np.array(np.unravel_index(best_idx, (m,) * R)).T
        choices[:, active] = digits
    return best_vals, choices


def tilted_channel(logw, p, rho: float, q0, iters: int, tol: float):
    """Fixed point of ``V(y|a) ~ W(y|a)^(1/(1+rho)) Q(y)^(rho/(1+rho))``, ``Q = p V``.

    ``logw`` holds ``log2 W`` with ``-inf`` off the support.  Returns ``(V, Q)``.
    """
    logw = np.asarray(logw, dtype=float)
    p = np.asarray(p, dtype=float)
    a = 1.0 / (1.0 + rho)
    base = a * logw
    q = np.asarray(q0, dtype=float).copy()
    v = np.exp2(logw)
    for _ in range(iters):
        z = base + (1 - a) * np.log2(np.maximum(q, 1e-300))
        z -= z.max(axis=1, keepdims=True)
        v = np.exp2(z)
        v /= v.sum(axis=1, keepdims=True)
        q_new = p @ v
        done = np.abs(q_new - q).max() < tol
        q = q_new
        if done:
            break
    return v, q
