"""Pure-Python/numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` operation for operation and are used when the
compiled module is missing or ``BELLKIT_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np

SIMPLEX_EPS = 1e-11
DEGENERATE_SWITCH = 50


def simplex_max(A, b, c, max_iter=10_000):
    """Maximize c.x subject to A x <= b, x >= 0, with b >= 0.

    Dense tableau, Dantzig pricing, falling back to Bland's rule after a run of
    degenerate pivots. Returns (status, value, x) where status 0 is optimal,
    1 unbounded and 2 iteration cap reached.
    """
    m, n = A.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = list(range(n, n + m))
    degenerate = 0
    status = 2
    for _ in range(max_iter):
        z = T[m, :-1]
        if degenerate > DEGENERATE_SWITCH:
            cand = np.nonzero(z < -SIMPLEX_EPS)[0]
            if cand.size == 0:
                status = 0
                break
            col = int(cand[0])
        else:
            col = int(np.argmin(z))
            if z[col] >= -SIMPLEX_EPS:
                status = 0
                break
        colv = T[:m, col]
        best_row = -1
        best_ratio = math.inf
        for i in range(m):
            if colv[i] > SIMPLEX_EPS:
                ratio = T[i, -1] / colv[i]
                if ratio < best_ratio - 1e-15 or (
                        abs(ratio - best_ratio) <= 1e-15 and basis[i] < basis[best_row]):
                    best_ratio = ratio
                    best_row = i
        if best_row < 0:
            status = 1
            break
        degenerate = degenerate + 1 if best_ratio <= SIMPLEX_EPS else 0
        T[best_row] /= T[best_row, col]
        for i in range(m + 1):
            if i != best_row and T[i, col] != 0.0:
                T[i] -= T[i, col] * T[best_row]
        basis[best_row] = col
    x = np.zeros(n + m)
    for i, v in enumerate(basis):
        x[v] = T[i, -1]
    return status, float(T[m, -1]), x[:n]


def branch_lp(kc, km, kn, nx, ny, I, S, branch, tol):
    """Assemble the LP of one marginal-interval branch.

    Variables per pair p = j*ny + k are (dm, dn, e) at 3p..3p+2 with
    m = m0 + sm*dm, n = n0 + sn*dn, c = L0 + e. Returns None for a branch
    whose intervals cannot satisfy the signaling couplings, else
    (A, b, obj, offset).
    """
    P = nx * ny
    m0 = np.empty(P)
    n0 = np.empty(P)
    sm = np.empty(P)
    sn = np.empty(P)
    for p in range(P):
        up = (branch >> p) & 1
        m0[p], sm[p] = (1 - I, 1.0) if up else (I, -1.0)
        up = (branch >> (P + p)) & 1
        n0[p], sn[p] = (1 - I, 1.0) if up else (I, -1.0)
    L0 = np.maximum(0.0, m0 + n0 - 1)
    rows = []
    rhs = []
    nv = 3 * P

    def add(coeffs, value):
        if value < -tol:
            return False
        row = np.zeros(nv)
        for idx, v in coeffs:
            row[idx] += v
        rows.append(row)
        rhs.append(max(value, 0.0))
        return True

    for p in range(P):
        add([(3 * p, 1.0)], I)
        add([(3 * p + 1, 1.0)], I)
        add([(3 * p + 2, -1.0), (3 * p, sm[p]), (3 * p + 1, sn[p])], L0[p] - (m0[p] + n0[p] - 1))
        add([(3 * p + 2, 1.0), (3 * p, -sm[p])], m0[p] - L0[p])
        add([(3 * p + 2, 1.0), (3 * p + 1, -sn[p])], n0[p] - L0[p])
    if S < 1:
        for j in range(nx):
            for k in range(ny):
                for k2 in range(k + 1, ny):
                    p, q = j * ny + k, j * ny + k2
                    diff = m0[p] - m0[q]
                    if not add([(3 * p, sm[p]), (3 * q, -sm[q])], S - diff):
                        return None
                    if not add([(3 * p, -sm[p]), (3 * q, sm[q])], S + diff):
                        return None
        for k in range(ny):
            for j in range(nx):
                for j2 in range(j + 1, nx):
                    p, q = j * ny + k, j2 * ny + k
                    diff = n0[p] - n0[q]
                    if not add([(3 * p + 1, sn[p]), (3 * q + 1, -sn[q])], S - diff):
                        return None
                    if not add([(3 * p + 1, -sn[p]), (3 * q + 1, sn[q])], S + diff):
                        return None
    obj = np.empty(nv)
    obj[0::3] = km * sm
    obj[1::3] = kn * sn
    obj[2::3] = kc
    offset = float(np.sum(kc * L0 + km * m0 + kn * n0))
    return np.array(rows), np.array(rhs), obj, offset


def lp_solve_branch(kc, km, kn, nx, ny, I, S, tol, branch):
    """(value, x, status) for one branch; value is -inf if it is infeasible."""
    built = branch_lp(kc, km, kn, nx, ny, I, S, branch, tol)
    if built is None:
        return -math.inf, None, 0
    A, b, obj, offset = built
    status, value, x = simplex_max(A, b, obj)
    return value + offset, x, status


def lp_branch_values(kc, km, kn, nx, ny, I, S, tol, branches):
    """Optimal value of every listed branch (-inf when infeasible).

    Raises RuntimeError if any LP hits its iteration cap.
    """
    kc = np.ascontiguousarray(kc, dtype=float)
    km = np.ascontiguousarray(km, dtype=float)
    kn = np.ascontiguousarray(kn, dtype=float)
    out = np.empty(len(branches))
    for i, br in enumerate(branches):
        value, _, status = lp_solve_branch(kc, km, kn, nx, ny, I, S, tol, int(br))
        if status != 0:
            raise RuntimeError(f"simplex failed on branch {int(br)} (status {status})")
        out[i] = value
    return out


def _f(a, b, c):
    return np.minimum(np.minimum(a, b), a * b + c / 4)


def outcome_rhs_grid_max(O, n_grid):
    """Grid maximum of the per-lambda outcome-relaxed CHSH bound.

    The right-hand side 4[f(1-m,1-n) + f(m,n') + f(m',n) + f(m',1-n')] - 4m' - 2
    separates into an m part and an m' part once (n, n') is fixed.
    Returns (value, m, m', n, n').
    """
    g = np.linspace(0.0, 1.0, n_grid)
    n = g[:, None]
    n2 = g[None, :]
    best_m = np.full((n_grid, n_grid), -np.inf)
    arg_m = np.zeros((n_grid, n_grid), dtype=np.int64)
    best_mp = np.full((n_grid, n_grid), -np.inf)
    arg_mp = np.zeros((n_grid, n_grid), dtype=np.int64)
    for i, m in enumerate(g):
        vm = _f(1 - m, 1 - n, O) + _f(m, n2, O)
        upd = vm > best_m
        best_m[upd] = vm[upd]
        arg_m[upd] = i
        vmp = _f(m, n, O) + _f(m, 1 - n2, O) - m
        upd = vmp > best_mp
        best_mp[upd] = vmp[upd]
        arg_mp[upd] = i
    total = 4 * (best_m + best_mp) - 2
    flat = int(np.argmax(total))
    a, b = divmod(flat, n_grid)
    return float(total[a, b]), float(g[arg_m[a, b]]), float(g[arg_mp[a, b]]), float(g[a]), float(g[b])


def _arc_overlap(p1, p2, d):
    pi = math.pi
    first = np.maximum(0.0, np.minimum(np.minimum(p1, d + p2), pi) - d)
    second = np.maximum(0.0, np.minimum(p1, d + p2 - pi))
    return first + second


def hall_agree_density(phi):
    phi = np.asarray(phi, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (1 + np.cos(phi)) / (8 * (math.pi - phi))
    return np.where(phi >= math.pi, 0.0, v)


def hall_differ_density(phi):
    phi = np.asarray(phi, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (1 - np.cos(phi)) / (8 * phi)
    return np.where(phi <= 0.0, 0.0, v)


def hall_coplanar_distance(p1, p2, d):
    """Variational distance between the densities of two coplanar setting pairs.

    ``p1``, ``p2`` are the pair angles and ``d`` the offset between the arcs
    where the two signs differ; all in radians and broadcastable.
    """
    A1, B1 = hall_agree_density(p1), hall_differ_density(p1)
    A2, B2 = hall_agree_density(p2), hall_differ_density(p2)
    L = 2 * _arc_overlap(p1, p2, d)
    return 2 * (L * np.abs(B1 - B2) + (2 * p1 - L) * np.abs(B1 - A2)
                + (2 * p2 - L) * np.abs(A1 - B2)
                + (2 * math.pi - 2 * p1 - 2 * p2 + L) * np.abs(A1 - A2))


def hall_coplanar_grid(n_grid):
    """Grid maximum of the coplanar distance over [0, pi]^3; returns (value, p1, p2, d)."""
    g = np.linspace(0.0, math.pi, n_grid)
    best = -1.0
    arg = (0.0, 0.0, 0.0)
    P2, D = np.meshgrid(g, g, indexing="ij")
    for p1 in g:
        vals = hall_coplanar_distance(p1, P2, D)
        idx = int(np.argmax(vals))
        if vals.flat[idx] > best:
            best = float(vals.flat[idx])
            arg = (float(p1), float(P2.flat[idx]), float(D.flat[idx]))
    return (best,) + arg
