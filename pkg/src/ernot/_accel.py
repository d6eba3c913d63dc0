"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time from the ``ERNOT_USE_NUMBA``
environment variable (``"0"``, ``"false"`` or ``"no"`` selects numpy).  When
numba is missing the numpy path is used regardless of the flag.

Every kernel exposes both implementations (``*_numba`` / ``*_numpy``) so the
test-suite and ``benchmarks/bench_kernels.py`` can compare them side by side;
the unprefixed name is the one the rest of the package calls.
"""

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def _flag_enabled():
    raw = os.environ.get("ERNOT_USE_NUMBA", "1").strip().lower()
    return raw not in ("0", "false", "no", "off")


USE_NUMBA = HAVE_NUMBA and _flag_enabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(fn):
    """Compile ``fn`` with numba when it is available, else return it as is."""
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# Batched 3x3 symmetric eigendecomposition
# ---------------------------------------------------------------------------


@njit
def _jacobi3(a, w, v):
    # cyclic Jacobi on a private copy of a (3, 3); eigenvalues ascending
    for i in range(3):
        for j in range(3):
            v[i, j] = 1.0 if i == j else 0.0
    scale = 0.0
    for i in range(3):
        for j in range(3):
            scale += a[i, j] * a[i, j]
    if scale == 0.0:
        for i in range(3):
            w[i] = 0.0
        return
    tiny = 1e-36 * scale
    for _ in range(64):
        off = a[0, 1] * a[0, 1] + a[0, 2] * a[0, 2] + a[1, 2] * a[1, 2]
        if off <= tiny:
            break
        for p in range(2):
            for q in range(p + 1, 3):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(3):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(3):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(3):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    for i in range(3):
        w[i] = a[i, i]
    # insertion sort, columns of v follow
    for i in range(1, 3):
        j = i
        while j > 0 and w[j - 1] > w[j]:
            tmp = w[j - 1]
            w[j - 1] = w[j]
            w[j] = tmp
            for k in range(3):
                tmp = v[k, j - 1]
                v[k, j - 1] = v[k, j]
                v[k, j] = tmp
            j -= 1


@njit
def _sym3_eigh_loop(mats, w_out, v_out):
    a = np.empty((3, 3))
    for n in range(mats.shape[0]):
        for i in range(3):
            for j in range(3):
                a[i, j] = 0.5 * (mats[n, i, j] + mats[n, j, i])
        _jacobi3(a, w_out[n], v_out[n])


def sym3_eigh_numba(mats):
    mats = np.asarray(mats, dtype=np.float64)
    shape = mats.shape[:-2]
    flat = np.ascontiguousarray(mats.reshape(-1, 3, 3))
    w = np.empty((flat.shape[0], 3))
    v = np.empty((flat.shape[0], 3, 3))
    _sym3_eigh_loop(flat, w, v)
    return w.reshape(shape + (3,)), v.reshape(shape + (3, 3))


def sym3_eigh_numpy(mats):
    mats = np.asarray(mats, dtype=np.float64)
    return np.linalg.eigh(0.5 * (mats + np.swapaxes(mats, -1, -2)))


# ---------------------------------------------------------------------------
# Row-wise weighted log-sum-exp
# ---------------------------------------------------------------------------


@njit
def _lse_rows_loop(a, logw, out):
    n, m = a.shape
    for i in range(n):
        best = -np.inf
        for j in range(m):
            val = a[i, j] + logw[j]
            if val > best:
                best = val
        if best == -np.inf:
            out[i] = -np.inf
            continue
        acc = 0.0
        for j in range(m):
            acc += np.exp(a[i, j] + logw[j] - best)
        out[i] = best + np.log(acc)


def lse_rows_numba(a, logw):
    a = np.ascontiguousarray(a, dtype=np.float64)
    out = np.empty(a.shape[0])
    _lse_rows_loop(a, np.ascontiguousarray(logw, dtype=np.float64), out)
    return out


def lse_rows_numpy(a, logw):
    z = np.asarray(a, dtype=np.float64) + np.asarray(logw, dtype=np.float64)
    peak = np.max(z, axis=1)
    safe = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(divide="ignore"):
        return safe + np.log(np.sum(np.exp(z - safe[:, None]), axis=1))


# ---------------------------------------------------------------------------
# Transportation simplex (exact discrete OT value)
# ---------------------------------------------------------------------------


@njit
def _transport_simplex(a, b, cost, max_iter, tol):
    """Exact transportation LP by the u-v (MODI) simplex method.

    Initial basis by the least-cost rule, which crosses out exactly one line
    per allocation so the m + n - 1 basic cells always form a spanning tree
    (degenerate zero-flow cells included).  Entering cell: most negative
    reduced cost, ties to the smallest flat index.  Leaving cell: smallest
    flow on the minus cells of the cycle, ties to the first on the path.

    Returns (value, flows, iterations, status); status 0 = optimal,
    1 = iteration cap reached.
    """
    m = a.shape[0]
    n = b.shape[0]
    nb = m + n - 1
    flow = np.zeros((m, n))
    basic = np.zeros((m, n), dtype=np.bool_)
    bi = np.empty(nb, dtype=np.int64)
    bj = np.empty(nb, dtype=np.int64)

    supply = a.copy()
    demand = b.copy()
    row_done = np.zeros(m, dtype=np.bool_)
    col_done = np.zeros(n, dtype=np.bool_)
    order = np.argsort(cost.ravel(), kind="mergesort")
    k = 0
    rows_left = m
    cols_left = n
    for idx in order:
        if k == nb:
            break
        i = idx // n
        j = idx % n
        if row_done[i] or col_done[j]:
            continue
        if rows_left == 1 and cols_left == 1:
            x = supply[i]
            flow[i, j] = x
            basic[i, j] = True
            bi[k] = i
            bj[k] = j
            k += 1
            break
        if (supply[i] <= demand[j] and rows_left > 1) or cols_left == 1:
            x = supply[i]
            row_done[i] = True
            rows_left -= 1
            demand[j] -= x
            supply[i] = 0.0
        else:
            x = demand[j]
            col_done[j] = True
            cols_left -= 1
            supply[i] -= x
            demand[j] = 0.0
        flow[i, j] = x
        basic[i, j] = True
        bi[k] = i
        bj[k] = j
        k += 1

    nodes = m + n
    deg = np.zeros(nodes, dtype=np.int64)
    start = np.zeros(nodes + 1, dtype=np.int64)
    adj = np.empty(2 * nb, dtype=np.int64)
    adj_cell = np.empty(2 * nb, dtype=np.int64)
    fill = np.zeros(nodes, dtype=np.int64)
    pot = np.zeros(nodes)
    parent = np.empty(nodes, dtype=np.int64)
    parent_cell = np.empty(nodes, dtype=np.int64)
    seen = np.zeros(nodes, dtype=np.bool_)
    queue = np.empty(nodes, dtype=np.int64)
    path_cells = np.empty(nodes, dtype=np.int64)

    status = 1
    it = 0
    while it < max_iter:
        # adjacency of the basis tree (row nodes 0..m-1, column nodes m..m+n-1)
        deg[:] = 0
        for c in range(nb):
            deg[bi[c]] += 1
            deg[m + bj[c]] += 1
        start[0] = 0
        for v in range(nodes):
            start[v + 1] = start[v] + deg[v]
        fill[:] = 0
        for c in range(nb):
            r = bi[c]
            s = m + bj[c]
            adj[start[r] + fill[r]] = s
            adj_cell[start[r] + fill[r]] = c
            fill[r] += 1
            adj[start[s] + fill[s]] = r
            adj_cell[start[s] + fill[s]] = c
            fill[s] += 1

        # potentials u_i + v_j = C_ij on basic cells
        seen[:] = False
        seen[0] = True
        pot[0] = 0.0
        head = 0
        tail = 1
        queue[0] = 0
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(start[v], start[v + 1]):
                w = adj[e]
                if seen[w]:
                    continue
                c = adj_cell[e]
                pot[w] = cost[bi[c], bj[c]] - pot[v]
                seen[w] = True
                queue[tail] = w
                tail += 1

        best = -tol
        ei = -1
        ej = -1
        for i in range(m):
            ui = pot[i]
            for j in range(n):
                if basic[i, j]:
                    continue
                r = cost[i, j] - ui - pot[m + j]
                if r < best:
                    best = r
                    ei = i
                    ej = j
        if ei < 0:
            status = 0
            break

        # tree path from column node ej back to row node ei
        seen[:] = False
        seen[ei] = True
        parent[ei] = -1
        head = 0
        tail = 1
        queue[0] = ei
        target = m + ej
        while head < tail:
            v = queue[head]
            head += 1
            if v == target:
                break
            for e in range(start[v], start[v + 1]):
                w = adj[e]
                if seen[w]:
                    continue
                seen[w] = True
                parent[w] = v
                parent_cell[w] = adj_cell[e]
                queue[tail] = w
                tail += 1
        plen = 0
        v = target
        while v != ei:
            path_cells[plen] = parent_cell[v]
            plen += 1
            v = parent[v]

        # even positions on the path lose flow, odd positions gain
        theta = np.inf
        leave = -1
        for p in range(0, plen, 2):
            c = path_cells[p]
            f = flow[bi[c], bj[c]]
            if f < theta:
                theta = f
                leave = p
        for p in range(plen):
            c = path_cells[p]
            if p % 2 == 0:
                flow[bi[c], bj[c]] -= theta
            else:
                flow[bi[c], bj[c]] += theta
        flow[ei, ej] += theta
        c = path_cells[leave]
        flow[bi[c], bj[c]] = 0.0
        basic[bi[c], bj[c]] = False
        basic[ei, ej] = True
        bi[c] = ei
        bj[c] = ej
        it += 1

    value = 0.0
    for c in range(nb):
        value += flow[bi[c], bj[c]] * cost[bi[c], bj[c]]
    return value, flow, it, status


_transport_simplex_py = getattr(_transport_simplex, "py_func", _transport_simplex)


def transport_simplex_numba(a, b, cost, max_iter, tol):
    return _transport_simplex(a, b, cost, max_iter, tol)


def transport_simplex_numpy(a, b, cost, max_iter, tol):
    # interpreted twin of the compiled kernel (same source, no JIT)
    return _transport_simplex_py(a, b, cost, max_iter, tol)


if USE_NUMBA:
    sym3_eigh = sym3_eigh_numba
    lse_rows = lse_rows_numba
    transport_simplex = transport_simplex_numba
else:
    sym3_eigh = sym3_eigh_numpy
    lse_rows = lse_rows_numpy
    transport_simplex = transport_simplex_numpy
