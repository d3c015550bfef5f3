# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled compute backend.

Same lane layout and operation set as the numpy backend: truncated Taylor
coefficient lanes (m+1, width, npts) with the activation applied by
composing truncated series.  Inner loops run per unit and point in C with
fixed iteration order, so every result is deterministic and independent of
thread counts.  Local jet buffers are sized for orders through 10, well
past the catalog's closed-form ceiling.
"""

from libc.math cimport atan, exp, fabs, sqrt, tanh

import numpy as np

BACKEND_NAME = "compiled"

# Slot budget for per-point jets: order <= 10 (package uses <= 8).
DEF JMAX = 12
DEF TABROWS = 9
DEF TABCOLS = 10

cdef double[JMAX] _FACT_ARR


def _init_factorials():
    f = 1.0
    vals = []
    for j in range(JMAX):
        if j > 1:
            f *= j
        vals.append(f)
    return np.array(vals)


_FACT_NP = _init_factorials()
cdef int _fi
for _fi in range(JMAX):
    _FACT_ARR[_fi] = _FACT_NP[_fi]


cdef inline double polyrow(const double[:, ::1] tab, int l, double t) noexcept nogil:
    cdef double acc = tab[l, TABCOLS - 1]
    cdef int j
    for j in range(TABCOLS - 2, -1, -1):
        acc = acc * t + tab[l, j]
    return acc


cdef void act_derivs(int kind, double a, const double[:, ::1] tab, double z, int order, double* out) noexcept nogil:
    cdef int l
    cdef double ex, t, w, u, pw, sign, fact
    for l in range(order + 1):
        out[l] = 0.0
    if kind == 0:  # linear
        out[0] = z
        if order >= 1:
            out[1] = 1.0
    elif kind == 1:  # relu
        if z >= 0.0:
            out[0] = z
            if order >= 1:
                out[1] = 1.0
    elif kind == 2:  # elu
        if z >= 0.0:
            out[0] = z
            if order >= 1:
                out[1] = 1.0
        else:
            ex = exp(z)
            out[0] = ex - 1.0
            for l in range(1, order + 1):
                out[l] = ex
    elif kind == 3:  # softsign
        if z >= 0.0:
            w = 1.0 + z
            out[0] = z / w
            pw = w * w
            sign = 1.0
            fact = 1.0
            for l in range(1, order + 1):
                fact *= l
                out[l] = sign * (fact / pw)
                pw *= w
                sign = -sign
        else:
            w = 1.0 - z
            out[0] = z / w
            pw = w * w
            fact = 1.0
            for l in range(1, order + 1):
                fact *= l
                out[l] = fact / pw
                pw *= w
    elif kind == 4 or kind == 5:  # isrlu / isru
        if kind == 4 and z >= 0.0:
            out[0] = z
            if order >= 1:
                out[1] = 1.0
        else:
            u = 1.0 + a * z * z
            w = 1.0 / sqrt(u)
            pw = w
            out[0] = polyrow(tab, 0, z) * pw
            for l in range(1, order + 1):
                pw = pw * (w * w)
                out[l] = polyrow(tab, l, z) * pw
    elif kind == 6:  # sigmoid
        ex = exp(-fabs(z))
        if z >= 0.0:
            t = 1.0 / (1.0 + ex)
        else:
            t = ex / (1.0 + ex)
        for l in range(order + 1):
            out[l] = polyrow(tab, l, t)
    elif kind == 7:  # tanh
        t = tanh(z)
        for l in range(order + 1):
            out[l] = polyrow(tab, l, t)
    elif kind == 8:  # arctan
        out[0] = atan(z)
        if order >= 1:
            w = 1.0 / (1.0 + z * z)
            pw = 1.0
            for l in range(1, order + 1):
                pw = pw * w
                out[l] = polyrow(tab, l, z) * pw


cdef void _affine(const double[:, ::1] A, const double[::1] b, const double[:, :, ::1] Y, double[:, :, ::1] Z) noexcept nogil:
    cdef int lanes = Y.shape[0], wi = Y.shape[1], wo = Z.shape[1], n = Y.shape[2]
    cdef int j, u, w, p
    cdef double auw, bu
    for j in range(lanes):
        for u in range(wo):
            for p in range(n):
                Z[j, u, p] = 0.0
            for w in range(wi):
                auw = A[u, w]
                for p in range(n):
                    Z[j, u, p] += auw * Y[j, w, p]
            if j == 0:
                bu = b[u]
                for p in range(n):
                    Z[0, u, p] += bu
    return


cdef void _compose_inplace(int kind, double a, const double[:, ::1] tab, double[:, :, ::1] Z, int m) noexcept nogil:
    cdef int width = Z.shape[1], n = Z.shape[2]
    cdef int u, p, j, i, l
    cdef double zjet[JMAX]
    cdef double d[JMAX]
    cdef double wk[JMAX]
    cdef double wn[JMAX]
    cdef double acc
    for u in range(width):
        for p in range(n):
            for j in range(m + 1):
                zjet[j] = Z[j, u, p]
            act_derivs(kind, a, tab, zjet[0], m, d)
            if m == 0:
                Z[0, u, p] = d[0]
                continue
            wk[0] = d[m] / _FACT_ARR[m]
            for j in range(1, m + 1):
                wk[j] = 0.0
            for l in range(m - 1, -1, -1):
                for j in range(m, 0, -1):
                    acc = wk[0] * zjet[j]
                    for i in range(1, j):
                        acc += wk[i] * zjet[j - i]
                    wn[j] = acc
                wn[0] = d[l] / _FACT_ARR[l]
                for j in range(m + 1):
                    wk[j] = wn[j]
            for j in range(m + 1):
                Z[j, u, p] = wk[j]
    return


def jet_forward(layers, plan, X, v, int m):
    """Taylor lanes (m+1, out_width, npts) of the realization along ``v``."""
    cdef int kind = plan[0]
    cdef double a = plan[1]
    tab_arr = np.ascontiguousarray(plan[2], dtype=np.float64)
    cdef const double[:, ::1] tab = tab_arr
    X = np.ascontiguousarray(X, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    cdef int depth = len(layers)
    cdef Py_ssize_t n = X.shape[1]
    cur = np.zeros((m + 1, X.shape[0], n))
    cur[0] = X
    if m >= 1:
        cur[1] = np.asarray(v)[:, None]
    cdef int idx
    for idx in range(depth):
        A = np.ascontiguousarray(layers[idx][0], dtype=np.float64)
        b = np.ascontiguousarray(layers[idx][1], dtype=np.float64)
        nxt = np.empty((m + 1, A.shape[0], n))
        _affine(A, b, cur, nxt)
        if idx < depth - 1:
            _compose_inplace(kind, a, tab, nxt, m)
        cur = nxt
    return cur


cdef void _tape_forward(int kind, double a, const double[:, ::1] tab, const double[:, :, ::1] Z,
                        double[:, :, ::1] W, double[:, :, ::1] D, double[:, :, :, ::1] SP, int m) noexcept nogil:
    cdef int width = Z.shape[1], n = Z.shape[2]
    cdef int u, p, j, i, l
    cdef double zjet[JMAX]
    cdef double d[JMAX]
    cdef double sp[JMAX][JMAX]
    cdef double wout[JMAX]
    cdef double acc, c
    for u in range(width):
        for p in range(n):
            for j in range(m + 1):
                zjet[j] = Z[j, u, p]
            act_derivs(kind, a, tab, zjet[0], m + 1, d)
            for l in range(m + 1):
                for j in range(m + 1):
                    sp[l][j] = 0.0
            sp[0][0] = 1.0
            for l in range(1, m + 1):
                for j in range(1, m + 1):
                    acc = 0.0
                    for i in range(l - 1, j):
                        acc += sp[l - 1][i] * zjet[j - i]
                    sp[l][j] = acc
            for j in range(m + 1):
                wout[j] = 0.0
            for l in range(m + 1):
                c = d[l] / _FACT_ARR[l]
                for j in range(m + 1):
                    wout[j] += c * sp[l][j]
            for j in range(m + 1):
                W[j, u, p] = wout[j]
            for l in range(m + 2):
                D[l, u, p] = d[l]
            for l in range(m + 1):
                for j in range(m + 1):
                    SP[l, j, u, p] = sp[l][j]
    return


cdef void _tape_backward(const double[:, :, ::1] D, const double[:, :, :, ::1] SP,
                         const double[:, :, ::1] Wbar, double[:, :, ::1] Zbar, int m) noexcept nogil:
    cdef int width = Wbar.shape[1], n = Wbar.shape[2]
    cdef int u, p, j, i, l
    cdef double dot, acc, inv
    for u in range(width):
        for p in range(n):
            for j in range(m + 1):
                Zbar[j, u, p] = 0.0
            for l in range(m + 1):
                inv = 1.0 / _FACT_ARR[l]
                dot = 0.0
                for j in range(m + 1):
                    dot += Wbar[j, u, p] * SP[l, j, u, p]
                Zbar[0, u, p] += (D[l + 1, u, p] * inv) * dot
                if l >= 1:
                    for i in range(1, m + 1):
                        acc = 0.0
                        for j in range(i, m + 1):
                            acc += Wbar[j, u, p] * SP[l - 1, j - i, u, p]
                        Zbar[i, u, p] += (D[l, u, p] * (l * inv)) * acc
    return


cdef void _affine_back(const double[:, ::1] A, const double[:, :, ::1] Zbar, const double[:, :, ::1] Yin,
                       double[:, ::1] gA, double[::1] gb, double[:, :, ::1] Ybar, bint want_ybar) noexcept nogil:
    cdef int lanes = Zbar.shape[0], wo = Zbar.shape[1], wi = Yin.shape[1], n = Zbar.shape[2]
    cdef int j, u, w, p
    cdef double acc
    for u in range(wo):
        for w in range(wi):
            acc = 0.0
            for j in range(lanes):
                for p in range(n):
                    acc += Zbar[j, u, p] * Yin[j, w, p]
            gA[u, w] = acc
        acc = 0.0
        for p in range(n):
            acc += Zbar[0, u, p]
        gb[u] = acc
    if want_ybar:
        for j in range(lanes):
            for w in range(wi):
                for p in range(n):
                    Ybar[j, w, p] = 0.0
                for u in range(wo):
                    for p in range(n):
                        Ybar[j, w, p] += A[u, w] * Zbar[j, u, p]
    return


def jet_vjp(layers, plan, X, v, int m, cot):
    """Parameter gradient of sum over points and lanes of cot * lane."""
    cdef int kind = plan[0]
    cdef double a = plan[1]
    tab_arr = np.ascontiguousarray(plan[2], dtype=np.float64)
    cdef const double[:, ::1] tab = tab_arr
    X = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[1]
    cdef int depth = len(layers)
    cur = np.zeros((m + 1, X.shape[0], n))
    cur[0] = X
    if m >= 1:
        cur[1] = np.ascontiguousarray(v, dtype=np.float64)[:, None]
    inputs, pre_d, pre_sp = [], [], []
    cdef int idx
    for idx in range(depth):
        A = np.ascontiguousarray(layers[idx][0], dtype=np.float64)
        b = np.ascontiguousarray(layers[idx][1], dtype=np.float64)
        inputs.append(cur)
        nxt = np.empty((m + 1, A.shape[0], n))
        _affine(A, b, cur, nxt)
        if idx < depth - 1:
            W = np.empty_like(nxt)
            D = np.empty((m + 2, A.shape[0], n))
            SP = np.empty((m + 1, m + 1, A.shape[0], n))
            _tape_forward(kind, a, tab, nxt, W, D, SP, m)
            pre_d.append(D)
            pre_sp.append(SP)
            cur = W
        else:
            cur = nxt
    if cur.shape[1] != 1:
        raise ValueError("jet_vjp requires a scalar-output network")
    zbar = np.ascontiguousarray(cot, dtype=np.float64).reshape(m + 1, 1, n)
    grads = []
    for idx in range(depth - 1, -1, -1):
        A = np.ascontiguousarray(layers[idx][0], dtype=np.float64)
        gA = np.empty_like(A)
        gb = np.empty(A.shape[0])
        if idx > 0:
            ybar = np.empty((m + 1, A.shape[1], n))
            _affine_back(A, zbar, inputs[idx], gA, gb, ybar, True)
            zbar_new = np.empty_like(ybar)
            _tape_backward(pre_d[idx - 1], pre_sp[idx - 1], ybar, zbar_new, m)
            zbar = zbar_new
        else:
            dummy = np.empty((1, 1, 1))
            _affine_back(A, zbar, inputs[idx], gA, gb, dummy, False)
        grads.append(np.concatenate([gA.ravel(), gb]))
    return np.concatenate(grads[::-1])


cdef void _cross_act(int kind, double a, const double[:, ::1] tab, double[:, :, ::1] Z, int order_needed) noexcept nogil:
    # order_needed = 2 for forward lanes
    cdef int width = Z.shape[1], n = Z.shape[2]
    cdef int u, p
    cdef double d[JMAX]
    cdef double zv, zi, zj, zc
    for u in range(width):
        for p in range(n):
            zv = Z[0, u, p]
            zi = Z[1, u, p]
            zj = Z[2, u, p]
            zc = Z[3, u, p]
            act_derivs(kind, a, tab, zv, order_needed, d)
            Z[0, u, p] = d[0]
            Z[1, u, p] = d[1] * zi
            Z[2, u, p] = d[1] * zj
            Z[3, u, p] = d[1] * zc + d[2] * zi * zj
    return


def cross_forward(layers, plan, X, int axis_i, int axis_j):
    """Nested first-order jet lanes (value, d_i, d_j, d_i d_j)."""
    cdef int kind = plan[0]
    cdef double a = plan[1]
    tab_arr = np.ascontiguousarray(plan[2], dtype=np.float64)
    cdef const double[:, ::1] tab = tab_arr
    X = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[1]
    cdef int depth = len(layers)
    cur = np.zeros((4, X.shape[0], n))
    cur[0] = X
    cur[1, axis_i] = 1.0
    cur[2, axis_j] = 1.0
    cdef int idx
    for idx in range(depth):
        A = np.ascontiguousarray(layers[idx][0], dtype=np.float64)
        b = np.ascontiguousarray(layers[idx][1], dtype=np.float64)
        nxt = np.empty((4, A.shape[0], n))
        _affine(A, b, cur, nxt)
        if idx < depth - 1:
            _cross_act(kind, a, tab, nxt, 2)
        cur = nxt
    return cur


def cross_vjp(layers, plan, X, int axis_i, int axis_j, cot):
    """Parameter gradient of the cross-derivative lanes (scalar output)."""
    cdef int kind = plan[0]
    cdef double a = plan[1]
    tab_arr = np.ascontiguousarray(plan[2], dtype=np.float64)
    cdef const double[:, ::1] tab = tab_arr
    X = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[1]
    cdef int depth = len(layers)
    cur = np.zeros((4, X.shape[0], n))
    cur[0] = X
    cur[1, axis_i] = 1.0
    cur[2, axis_j] = 1.0
    inputs, pres, tabs = [], [], []
    cdef int idx
    for idx in range(depth):
        A = np.ascontiguousarray(layers[idx][0], dtype=np.float64)
        b = np.ascontiguousarray(layers[idx][1], dtype=np.float64)
        inputs.append(cur)
        nxt = np.empty((4, A.shape[0], n))
        _affine(A, b, cur, nxt)
        if idx < depth - 1:
            D = np.empty((4, A.shape[0], n))
            _act_table(kind, a, tab, nxt, D)
            pres.append(nxt.copy())
            tabs.append(D)
            out = np.empty_like(nxt)
            _cross_apply(nxt, D, out)
            cur = out
        else:
            cur = nxt
    if cur.shape[1] != 1:
        raise ValueError("cross_vjp requires a scalar-output network")
    zbar = np.ascontiguousarray(cot, dtype=np.float64).reshape(4, 1, n)
    grads = []
    for idx in range(depth - 1, -1, -1):
        A = np.ascontiguousarray(layers[idx][0], dtype=np.float64)
        gA = np.empty_like(A)
        gb = np.empty(A.shape[0])
        if idx > 0:
            ybar = np.empty((4, A.shape[1], n))
            _affine_back(A, zbar, inputs[idx], gA, gb, ybar, True)
            zbar_new = np.empty_like(ybar)
            _cross_back(pres[idx - 1], tabs[idx - 1], ybar, zbar_new)
            zbar = zbar_new
        else:
            dummy = np.empty((1, 1, 1))
            _affine_back(A, zbar, inputs[idx], gA, gb, dummy, False)
        grads.append(np.concatenate([gA.ravel(), gb]))
    return np.concatenate(grads[::-1])


cdef void _act_table(int kind, double a, const double[:, ::1] tab, const double[:, :, ::1] Z, double[:, :, ::1] D) noexcept nogil:
    cdef int width = Z.shape[1], n = Z.shape[2]
    cdef int u, p, l
    cdef double d[JMAX]
    for u in range(width):
        for p in range(n):
            act_derivs(kind, a, tab, Z[0, u, p], 3, d)
            for l in range(4):
                D[l, u, p] = d[l]
    return


cdef void _cross_apply(const double[:, :, ::1] Z, const double[:, :, ::1] D, double[:, :, ::1] out) noexcept nogil:
    cdef int width = Z.shape[1], n = Z.shape[2]
    cdef int u, p
    for u in range(width):
        for p in range(n):
            out[0, u, p] = D[0, u, p]
            out[1, u, p] = D[1, u, p] * Z[1, u, p]
            out[2, u, p] = D[1, u, p] * Z[2, u, p]
            out[3, u, p] = D[1, u, p] * Z[3, u, p] + D[2, u, p] * Z[1, u, p] * Z[2, u, p]
    return


cdef void _cross_back(const double[:, :, ::1] Z, const double[:, :, ::1] D, const double[:, :, ::1] Ybar, double[:, :, ::1] Zbar) noexcept nogil:
    cdef int width = Z.shape[1], n = Z.shape[2]
    cdef int u, p
    cdef double d1, d2, d3, zi, zj, zc
    for u in range(width):
        for p in range(n):
            d1 = D[1, u, p]
            d2 = D[2, u, p]
            d3 = D[3, u, p]
            zi = Z[1, u, p]
            zj = Z[2, u, p]
            zc = Z[3, u, p]
            Zbar[0, u, p] = (
                d1 * Ybar[0, u, p]
                + d2 * zi * Ybar[1, u, p]
                + d2 * zj * Ybar[2, u, p]
                + (d2 * zc + d3 * zi * zj) * Ybar[3, u, p]
            )
            Zbar[1, u, p] = d1 * Ybar[1, u, p] + d2 * zj * Ybar[3, u, p]
            Zbar[2, u, p] = d1 * Ybar[2, u, p] + d2 * zi * Ybar[3, u, p]
            Zbar[3, u, p] = d1 * Ybar[3, u, p]
    return
