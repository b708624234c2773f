# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Semantics match ``_pykernels`` exactly."""

import numpy as np

from libc.math cimport cos, fabs, INFINITY
from libc.stdlib cimport free, malloc

cdef double SIMPLEX_EPS = 1e-11
cdef int DEGENERATE_SWITCH = 50
cdef double PI = 3.141592653589793


cdef int _simplex(double* T, int* basis, int m, int n, int max_iter, double* value) noexcept nogil:
    # tableau is (m+1) x (n+m+1), row-major, objective in the last row
    cdef int W = n + m + 1
    cdef int it, i, j, col, best_row, degenerate = 0
    cdef double z, zmin, ratio, best_ratio, piv, f
    cdef double* prow
    cdef double* row
    for it in range(max_iter):
        col = -1
        if degenerate > DEGENERATE_SWITCH:
            for j in range(n + m):
                if T[m * W + j] < -SIMPLEX_EPS:
                    col = j
                    break
        else:
            zmin = -SIMPLEX_EPS
            for j in range(n + m):
                z = T[m * W + j]
                if z < zmin:
                    zmin = z
                    col = j
        if col < 0:
            value[0] = T[m * W + W - 1]
            return 0
        best_row = -1
        best_ratio = INFINITY
        for i in range(m):
            piv = T[i * W + col]
            if piv > SIMPLEX_EPS:
                ratio = T[i * W + W - 1] / piv
                if ratio < best_ratio - 1e-15 or (
                        best_row >= 0 and fabs(ratio - best_ratio) <= 1e-15
                        and basis[i] < basis[best_row]):
                    best_ratio = ratio
                    best_row = i
        if best_row < 0:
            return 1
        if best_ratio <= SIMPLEX_EPS:
            degenerate += 1
        else:
            degenerate = 0
        prow = T + best_row * W
        piv = prow[col]
        for j in range(W):
            prow[j] /= piv
        for i in range(m + 1):
            if i != best_row:
                row = T + i * W
                f = row[col]
                if f != 0.0:
                    for j in range(W):
                        row[j] -= f * prow[j]
        basis[best_row] = col
    return 2


cdef inline bint _add_row(double* T, int W, int* m, double rhs, double tol) noexcept nogil:
    # zero the row and set its rhs; caller fills coefficients
    cdef int j
    cdef double* row
    if rhs < -tol:
        return False
    row = T + m[0] * W
    for j in range(W):
        row[j] = 0.0
    row[W - 1] = rhs if rhs > 0.0 else 0.0
    m[0] += 1
    return True


cdef int _solve_branch(const double* kc, const double* km, const double* kn,
                       int nx, int ny, double I, double S, double tol, long long branch,
                       double* T, int* basis, double* m0, double* n0, double* sm, double* sn,
                       double* out_value, double* x_out) noexcept nogil:
    """Build and solve one branch. Returns -1 when infeasible, else simplex status."""
    cdef int P = nx * ny
    cdef int nv = 3 * P
    cdef int nsig = 0
    if S < 1.0:
        nsig = 2 * (nx * ny * (ny - 1) // 2 + ny * nx * (nx - 1) // 2)
    cdef int mmax = 5 * P + nsig
    cdef int W = nv + mmax + 1
    cdef int p, q, j, k, k2, j2, i, rows = 0, status
    cdef double L0, diff, offset = 0.0, value = 0.0
    cdef double* row
    for p in range(P):
        if (branch >> p) & 1:
            m0[p] = 1.0 - I
            sm[p] = 1.0
        else:
            m0[p] = I
            sm[p] = -1.0
        if (branch >> (P + p)) & 1:
            n0[p] = 1.0 - I
            sn[p] = 1.0
        else:
            n0[p] = I
            sn[p] = -1.0
    # signaling rows are checked first so infeasible branches exit early
    if S < 1.0:
        for j in range(nx):
            for k in range(ny):
                for k2 in range(k + 1, ny):
                    p = j * ny + k
                    q = j * ny + k2
                    diff = m0[p] - m0[q]
                    if S - diff < -tol or S + diff < -tol:
                        return -1
        for k in range(ny):
            for j in range(nx):
                for j2 in range(j + 1, nx):
                    p = j * ny + k
                    q = j2 * ny + k
                    diff = n0[p] - n0[q]
                    if S - diff < -tol or S + diff < -tol:
                        return -1
    for p in range(P):
        L0 = m0[p] + n0[p] - 1.0
        if L0 < 0.0:
            L0 = 0.0
        offset += kc[p] * L0 + km[p] * m0[p] + kn[p] * n0[p]
        _add_row(T, W, &rows, I, tol)
        T[(rows - 1) * W + 3 * p] = 1.0
        _add_row(T, W, &rows, I, tol)
        T[(rows - 1) * W + 3 * p + 1] = 1.0
        _add_row(T, W, &rows, L0 - (m0[p] + n0[p] - 1.0), tol)
        row = T + (rows - 1) * W
        row[3 * p + 2] = -1.0
        row[3 * p] = sm[p]
        row[3 * p + 1] = sn[p]
        _add_row(T, W, &rows, m0[p] - L0, tol)
        row = T + (rows - 1) * W
        row[3 * p + 2] = 1.0
        row[3 * p] = -sm[p]
        _add_row(T, W, &rows, n0[p] - L0, tol)
        row = T + (rows - 1) * W
        row[3 * p + 2] = 1.0
        row[3 * p + 1] = -sn[p]
    if S < 1.0:
        for j in range(nx):
            for k in range(ny):
                for k2 in range(k + 1, ny):
                    p = j * ny + k
                    q = j * ny + k2
                    diff = m0[p] - m0[q]
                    _add_row(T, W, &rows, S - diff, tol)
                    row = T + (rows - 1) * W
                    row[3 * p] += sm[p]
                    row[3 * q] -= sm[q]
                    _add_row(T, W, &rows, S + diff, tol)
                    row = T + (rows - 1) * W
                    row[3 * p] -= sm[p]
                    row[3 * q] += sm[q]
        for k in range(ny):
            for j in range(nx):
                for j2 in range(j + 1, nx):
                    p = j * ny + k
                    q = j2 * ny + k
                    diff = n0[p] - n0[q]
                    _add_row(T, W, &rows, S - diff, tol)
                    row = T + (rows - 1) * W
                    row[3 * p + 1] += sn[p]
                    row[3 * q + 1] -= sn[q]
                    _add_row(T, W, &rows, S + diff, tol)
                    row = T + (rows - 1) * W
                    row[3 * p + 1] -= sn[p]
                    row[3 * q + 1] += sn[q]
    # compact to width nv + rows + 1 in place: rebuild with the real row count
    cdef int Wr = nv + rows + 1
    cdef int r
    for r in range(rows):
        row = T + r * W
        # move rhs next to the slack block first, then shift the row
        row[nv + rows] = row[W - 1]
        for j in range(nv, nv + rows):
            row[j] = 0.0
        row[nv + r] = 1.0
        for j in range(Wr):
            T[r * Wr + j] = row[j]
    row = T + rows * Wr
    for j in range(Wr):
        row[j] = 0.0
    for p in range(P):
        row[3 * p] = -km[p] * sm[p]
        row[3 * p + 1] = -kn[p] * sn[p]
        row[3 * p + 2] = -kc[p]
    for i in range(rows):
        basis[i] = nv + i
    status = _simplex(T, basis, rows, nv, 10000, &value)
    out_value[0] = value + offset
    if x_out != NULL:
        for j in range(nv):
            x_out[j] = 0.0
        for i in range(rows):
            if basis[i] < nv:
                x_out[basis[i]] = T[i * Wr + Wr - 1]
    return status


def lp_branch_values(kc, km, kn, int nx, int ny, double I, double S, double tol, branches):
    """Optimal value of every listed branch (-inf when infeasible)."""
    cdef double[::1] ckc = np.ascontiguousarray(kc, dtype=np.float64)
    cdef double[::1] ckm = np.ascontiguousarray(km, dtype=np.float64)
    cdef double[::1] ckn = np.ascontiguousarray(kn, dtype=np.float64)
    cdef long long[::1] br = np.ascontiguousarray(branches, dtype=np.int64)
    cdef Py_ssize_t nb = br.shape[0], i
    out_arr = np.empty(nb, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef int P = nx * ny
    cdef int nsig = 2 * (nx * ny * (ny - 1) // 2 + ny * nx * (nx - 1) // 2)
    cdef int mmax = 5 * P + nsig
    cdef int W = 3 * P + mmax + 1
    cdef double* T = <double*> malloc((mmax + 1) * W * sizeof(double))
    cdef int* basis = <int*> malloc(mmax * sizeof(int))
    cdef double* work = <double*> malloc(4 * P * sizeof(double))
    cdef int status, failed = 0
    cdef long long failed_branch = 0
    cdef double value
    if T == NULL or basis == NULL or work == NULL:
        free(T); free(basis); free(work)
        raise MemoryError()
    try:
        with nogil:
            for i in range(nb):
                status = _solve_branch(&ckc[0], &ckm[0], &ckn[0], nx, ny, I, S, tol, br[i],
                                       T, basis, work, work + P, work + 2 * P, work + 3 * P,
                                       &value, NULL)
                if status == -1:
                    out[i] = -INFINITY
                elif status == 0:
                    out[i] = value
                else:
                    failed = status
                    failed_branch = br[i]
                    break
    finally:
        free(T)
        free(basis)
        free(work)
    if failed:
        raise RuntimeError(f"simplex failed on branch {failed_branch} (status {failed})")
    return out_arr


def lp_solve_branch(kc, km, kn, int nx, int ny, double I, double S, double tol, long long branch):
    """(value, x, status) for one branch; value is -inf if it is infeasible."""
    cdef double[::1] ckc = np.ascontiguousarray(kc, dtype=np.float64)
    cdef double[::1] ckm = np.ascontiguousarray(km, dtype=np.float64)
    cdef double[::1] ckn = np.ascontiguousarray(kn, dtype=np.float64)
    cdef int P = nx * ny
    cdef int nsig = 2 * (nx * ny * (ny - 1) // 2 + ny * nx * (nx - 1) // 2)
    cdef int mmax = 5 * P + nsig
    cdef int W = 3 * P + mmax + 1
    T_arr = np.zeros((mmax + 1) * W)
    basis_arr = np.zeros(mmax, dtype=np.intc)
    work_arr = np.zeros(4 * P)
    x_arr = np.zeros(3 * P)
    cdef double[::1] T = T_arr
    cdef int[::1] basis = basis_arr
    cdef double[::1] work = work_arr
    cdef double[::1] x = x_arr
    cdef double value = 0.0
    cdef int status = _solve_branch(&ckc[0], &ckm[0], &ckn[0], nx, ny, I, S, tol, branch,
                                    &T[0], &basis[0], &work[0], &work[P], &work[2 * P],
                                    &work[3 * P], &value, &x[0])
    if status == -1:
        return -np.inf, None, 0
    return value, x_arr, status


cdef inline double _f(double a, double b, double c) noexcept nogil:
    cdef double v = a * b + c / 4.0
    if a < v:
        v = a
    if b < v:
        v = b
    return v


def outcome_rhs_grid_max(double O, int n_grid):
    """Grid maximum of the per-lambda outcome-relaxed CHSH bound; see _pykernels."""
    cdef double h = 1.0 / (n_grid - 1)
    cdef int a, b, i, bi_m = 0, bi_mp = 0
    cdef double n, n2, m, vm, vmp, bm, bmp, total
    cdef double best = -INFINITY
    cdef int arg_a = 0, arg_b = 0, arg_m = 0, arg_mp = 0
    with nogil:
        for a in range(n_grid):
            n = a * h
            for b in range(n_grid):
                n2 = b * h
                bm = -INFINITY
                bmp = -INFINITY
                for i in range(n_grid):
                    m = i * h
                    vm = _f(1.0 - m, 1.0 - n, O) + _f(m, n2, O)
                    if vm > bm:
                        bm = vm
                        bi_m = i
                    vmp = _f(m, n, O) + _f(m, 1.0 - n2, O) - m
                    if vmp > bmp:
                        bmp = vmp
                        bi_mp = i
                total = 4.0 * (bm + bmp) - 2.0
                if total > best:
                    best = total
                    arg_a = a
                    arg_b = b
                    arg_m = bi_m
                    arg_mp = bi_mp
    return best, arg_m * h, arg_mp * h, arg_a * h, arg_b * h


cdef inline double _agree(double phi) noexcept nogil:
    if phi >= PI:
        return 0.0
    return (1.0 + cos(phi)) / (8.0 * (PI - phi))


cdef inline double _differ(double phi) noexcept nogil:
    if phi <= 0.0:
        return 0.0
    return (1.0 - cos(phi)) / (8.0 * phi)


cdef inline double _overlap(double p1, double p2, double d) noexcept nogil:
    cdef double hi = p1
    if d + p2 < hi:
        hi = d + p2
    if PI < hi:
        hi = PI
    cdef double first = hi - d
    if first < 0.0:
        first = 0.0
    cdef double second = p1
    if d + p2 - PI < second:
        second = d + p2 - PI
    if second < 0.0:
        second = 0.0
    return first + second


def hall_coplanar_grid(int n_grid):
    """Grid maximum of the coplanar variational distance; see _pykernels."""
    cdef double h = PI / (n_grid - 1)
    cdef int i, j, k
    cdef double p1, p2, d, A1, B1, A2, B2, L, v
    cdef double best = -1.0, bp1 = 0.0, bp2 = 0.0, bd = 0.0
    with nogil:
        for i in range(n_grid):
            p1 = i * h
            A1 = _agree(p1)
            B1 = _differ(p1)
            for j in range(n_grid):
                p2 = j * h
                A2 = _agree(p2)
                B2 = _differ(p2)
                for k in range(n_grid):
                    d = k * h
                    L = 2.0 * _overlap(p1, p2, d)
                    v = 2.0 * (L * fabs(B1 - B2) + (2.0 * p1 - L) * fabs(B1 - A2)
                               + (2.0 * p2 - L) * fabs(A1 - B2)
                               + (2.0 * PI - 2.0 * p1 - 2.0 * p2 + L) * fabs(A1 - A2))
                    if v > best:
                        best = v
                        bp1 = p1
                        bp2 = p2
                        bd = d
    return best, bp1, bp2, bd
