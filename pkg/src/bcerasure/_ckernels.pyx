# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Semantics match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log2, exp2, fabs, INFINITY, isfinite
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF MODIFIED = 0
DEF PENALIZED = 1
DEF SPHERE = 2


cdef inline double plogp(double x) nogil:
    if x > 0.0:
        return x * log2(x)
    return 0.0


def batch_empirical_mi(codes, ys, int size_a, int size_y):
    cdef const cnp.int64_t[:, ::1] c = np.ascontiguousarray(codes, dtype=np.int64)
    cdef const cnp.int64_t[:, ::1] y = np.ascontiguousarray(ys, dtype=np.int64)
    cdef Py_ssize_t M = c.shape[0], n = c.shape[1], T = y.shape[0]
    out_arr = np.empty((T, M), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] f = np.zeros(n + 1)
    cdef Py_ssize_t i, t, m, a, b
    cdef int cells = size_a * size_y
    cdef int *joint = <int *> malloc(cells * sizeof(int))
    cdef int *ca = <int *> malloc(size_a * sizeof(int))
    cdef int *cb = <int *> malloc(size_y * sizeof(int))
    cdef double s, term
    for i in range(1, n + 1):
        f[i] = i * log2(<double> i)
    try:
        with nogil:
            for t in range(T):
                for b in range(size_y):
                    cb[b] = 0
                for i in range(n):
                    cb[y[t, i]] += 1
                term = 0.0
                for b in range(size_y):
                    term = term + f[cb[b]]
                for m in range(M):
                    for a in range(cells):
                        joint[a] = 0
                    for a in range(size_a):
                        ca[a] = 0
                    for i in range(n):
                        joint[c[m, i] * size_y + y[t, i]] += 1
                        ca[c[m, i]] += 1
                    s = 0.0
                    for a in range(cells):
                        s = s + f[joint[a]]
                    for a in range(size_a):
                        s = s - f[ca[a]]
                    s = (s - term + f[n]) / n
                    out[t, m] = s if s > 0.0 else 0.0
    finally:
        free(joint)
        free(ca)
        free(cb)
    return out_arr


cdef double _objective(const double *v, const double[::1] p, const double[:, ::1] logw,
                       const cnp.int64_t[::1] groups, const double[::1] pu,
                       double lam, double rate, double pen_rate, int kind, double feas_tol,
                       int A, int Y, double *q, double *ind) nogil:
    cdef int a, y, u
    cdef int U = pu.shape[0]
    cdef double d = 0.0, hcond = 0.0, hq = 0.0, hu = 0.0, x, info, info_u, val
    for y in range(Y):
        q[y] = 0.0
    if kind == PENALIZED:
        for u in range(U * Y):
            ind[u] = 0.0
    for a in range(A):
        if p[a] <= 0.0:
            continue
        for y in range(Y):
            x = v[a * Y + y]
            if x > 0.0:
                if not isfinite(logw[a, y]):
                    return INFINITY
                d = d + p[a] * x * (log2(x) - logw[a, y])
                hcond = hcond - p[a] * x * log2(x)
                q[y] = q[y] + p[a] * x
                if kind == PENALIZED:
                    ind[groups[a] * Y + y] += p[a] * x
    if d < 0.0:
        d = 0.0
    for y in range(Y):
        hq = hq - plogp(q[y])
    info = hq - hcond
    if info < 0.0:
        info = 0.0
    if kind == SPHERE:
        if info <= rate + feas_tol:
            return d
        return INFINITY
    val = d
    if info > rate:
        val = val + lam * (info - rate)
    if kind == PENALIZED:
        for u in range(U):
            if pu[u] > 0.0:
                for y in range(Y):
                    hu = hu - pu[u] * plogp(ind[u * Y + y] / pu[u])
        info_u = hq - hu
        if info_u < 0.0:
            info_u = 0.0
        if info_u > pen_rate:
            val = val - (info_u - pen_rate)
    return val


def objective_batch(vs, p, logw, groups, pu, double lam, double rate, double pen_rate,
                    int kind, double feas_tol):
    cdef const double[:, :, ::1] v = np.ascontiguousarray(vs, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[:, ::1] lw = np.ascontiguousarray(logw, dtype=np.float64)
    cdef const cnp.int64_t[::1] g = np.ascontiguousarray(groups, dtype=np.int64)
    cdef const double[::1] puv = np.ascontiguousarray(pu, dtype=np.float64)
    cdef Py_ssize_t B = v.shape[0], b
    cdef int A = v.shape[1], Y = v.shape[2]
    out_arr = np.empty(B)
    cdef double[::1] out = out_arr
    cdef double *q = <double *> malloc(Y * sizeof(double))
    cdef double *ind = <double *> malloc(puv.shape[0] * Y * sizeof(double))
    try:
        with nogil:
            for b in range(B):
                out[b] = _objective(&v[b, 0, 0], pv, lw, g, puv, lam, rate, pen_rate,
                                    kind, feas_tol, A, Y, q, ind)
    finally:
        free(q)
        free(ind)
    return out_arr


def grid_scan(lattice, rows_p, logw, groups, pu, double lam, double rate, double pen_rate,
              int kind, double feas_tol, int keep):
    cdef const double[:, ::1] lat = np.ascontiguousarray(lattice, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(rows_p, dtype=np.float64)
    cdef const double[:, ::1] lw = np.ascontiguousarray(logw, dtype=np.float64)
    cdef const cnp.int64_t[::1] g = np.ascontiguousarray(groups, dtype=np.int64)
    cdef const double[::1] puv = np.ascontiguousarray(pu, dtype=np.float64)
    cdef int m = lat.shape[0], Y = lat.shape[1], A = pv.shape[0]
    cdef int U = puv.shape[0]
    active_np = np.flatnonzero(np.asarray(pv) > 0).astype(np.int64)
    cdef cnp.int64_t[::1] active = active_np
    cdef int R = active.shape[0]
    if R == 0:
        return np.zeros(1), np.full((1, A), -1, dtype=np.int64)

    # Per-row, per-candidate separable terms.
    dt_np = np.zeros((R, m))
    for j in range(R):
        a = active_np[j]
        for c in range(m):
            row = np.asarray(lat[c])
            pos = row > 0
            if np.any(~np.isfinite(np.asarray(lw[a])[pos])):
                dt_np[j, c] = np.inf
            else:
                dt_np[j, c] = pv[a] * float(np.sum(row[pos] * (np.log2(row[pos]) - np.asarray(lw[a])[pos])))
    hl_np = np.array([-(np.sum(r[r > 0] * np.log2(r[r > 0]))) for r in np.asarray(lat)])
    cdef double[:, ::1] dt = dt_np
    cdef double[::1] hl = hl_np

    top_vals_np = np.full(keep, np.inf)
    top_idx_np = np.full((keep, A), -1, dtype=np.int64)
    cdef double[::1] top_vals = top_vals_np
    cdef cnp.int64_t[:, ::1] top_idx = top_idx_np
    cdef int n_top = 0

    cdef double *accd = <double *> malloc((R + 1) * sizeof(double))
    cdef double *acch = <double *> malloc((R + 1) * sizeof(double))
    cdef double *accq = <double *> malloc((R + 1) * Y * sizeof(double))
    cdef double *accu = <double *> malloc((R + 1) * U * Y * sizeof(double))
    cdef int *choice = <int *> malloc(R * sizeof(int))
    cdef int depth, y, u, j2, pos_ins, k2
    cdef double pa, info, info_u, hq, hu, val, x
    cdef int a2, UY = U * Y
    try:
        with nogil:
            accd[0] = 0.0
            acch[0] = 0.0
            for y in range(Y):
                accq[y] = 0.0
            for u in range(UY):
                accu[u] = 0.0
            depth = 0
            choice[0] = -1
            while depth >= 0:
                choice[depth] += 1
                if choice[depth] >= m:
                    depth -= 1
                    continue
                a2 = active[depth]
                pa = pv[a2]
                accd[depth + 1] = accd[depth] + dt[depth, choice[depth]]
                if not isfinite(accd[depth + 1]):
                    continue
                acch[depth + 1] = acch[depth] + pa * hl[choice[depth]]
                for y in range(Y):
                    accq[(depth + 1) * Y + y] = accq[depth * Y + y] + pa * lat[choice[depth], y]
                if kind == PENALIZED:
                    for u in range(UY):
                        accu[(depth + 1) * UY + u] = accu[depth * UY + u]
                    for y in range(Y):
                        accu[(depth + 1) * UY + g[a2] * Y + y] += pa * lat[choice[depth], y]
                if depth + 1 < R:
                    depth += 1
                    choice[depth] = -1
                    continue
                # leaf
                hq = 0.0
                for y in range(Y):
                    hq = hq - plogp(accq[R * Y + y])
                info = hq - acch[R]
                if info < 0.0:
                    info = 0.0
                val = accd[R]
                if val < 0.0:
                    val = 0.0
                if kind == SPHERE:
                    if info > rate + feas_tol:
                        continue
                else:
                    if info > rate:
                        val = val + lam * (info - rate)
                    if kind == PENALIZED:
                        hu = 0.0
                        for u in range(U):
                            if puv[u] > 0.0:
                                for y in range(Y):
                                    x = accu[R * UY + u * Y + y] / puv[u]
                                    hu = hu - puv[u] * plogp(x)
                        info_u = hq - hu
                        if info_u < 0.0:
                            info_u = 0.0
                        if info_u > pen_rate:
                            val = val - (info_u - pen_rate)
                if n_top == keep and not (val < top_vals[keep - 1]):
                    continue
                pos_ins = n_top if n_top < keep else keep - 1
                while pos_ins > 0 and val < top_vals[pos_ins - 1]:
                    pos_ins -= 1
                k2 = (n_top if n_top < keep else keep - 1)
                while k2 > pos_ins:
                    top_vals[k2] = top_vals[k2 - 1]
                    for j2 in range(A):
                        top_idx[k2, j2] = top_idx[k2 - 1, j2]
                    k2 -= 1
                top_vals[pos_ins] = val
                for j2 in range(A):
                    top_idx[pos_ins, j2] = -1
                for j2 in range(R):
                    top_idx[pos_ins, active[j2]] = choice[j2]
                if n_top < keep:
                    n_top += 1
    finally:
        free(accd)
        free(acch)
        free(accq)
        free(accu)
        free(choice)
    return top_vals_np[:n_top].copy(), top_idx_np[:n_top].copy()


def tilted_channel(logw, p, double rho, q0, int iters, double tol):
    cdef const double[:, ::1] lw = np.ascontiguousarray(logw, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef int A = lw.shape[0], Y = lw.shape[1]
    q_arr = np.array(q0, dtype=np.float64)
    v_arr = np.empty((A, Y))
    cdef double[::1] q = q_arr
    cdef double[:, ::1] v = v_arr
    cdef double *qn = <double *> malloc(Y * sizeof(double))
    cdef double *lq = <double *> malloc(Y * sizeof(double))
    cdef double a = 1.0 / (1.0 + rho), z, zmax, s, diff
    cdef int it, i, y
    try:
        with nogil:
            for it in range(iters):
                for y in range(Y):
                    lq[y] = log2(q[y] if q[y] > 1e-300 else 1e-300)
                    qn[y] = 0.0
                for i in range(A):
                    zmax = -INFINITY
                    for y in range(Y):
                        if isfinite(lw[i, y]):
                            z = a * lw[i, y] + (1 - a) * lq[y]
                            if z > zmax:
                                zmax = z
                    s = 0.0
                    for y in range(Y):
                        if isfinite(lw[i, y]):
                            v[i, y] = exp2(a * lw[i, y] + (1 - a) * lq[y] - zmax)
                        else:
                            v[i, y] = 0.0
                        s = s + v[i, y]
                    for y in range(Y):
                        v[i, y] = v[i, y] / s
                        qn[y] = qn[y] + pv[i] * v[i, y]
                diff = 0.0
                for y in range(Y):
                    if fabs(qn[y] - q[y]) > diff:
                        diff = fabs(qn[y] - q[y])
                    q[y] = qn[y]
                if diff < tol:
                    break
    finally:
        free(qn)
        free(lq)
    return v_arr, q_arr
