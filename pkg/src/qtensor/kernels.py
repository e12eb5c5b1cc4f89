"""Hot numeric kernels.

Every kernel exists as a plain loop (the body numba compiles) and, where a
vectorised form is natural, as a numpy implementation. With numba enabled
the public names below point at the compiled loops; with ``QTENSOR_NUMBA=0``
they point at the numpy versions or the uncompiled loops.

Tensors reach the kernels in coordinate form: ``idx`` is an ``(nnz, m)``
int64 array of zero-based index tuples sorted lexicographically, ``vals`` the
matching float64 values. A "rectangular" tensor has its first index in
``0..nrows-1`` and the remaining ones in ``0..len(x)-1``.

Sums are accumulated entry by entry in storage order in both backends, so
``contract``/``jacobian`` agree bit for bit across backends.
"""

import numpy as np

from ._accel import NUMBA_ENABLED, njit

PATH_OK = 0
PATH_STEP_FAILURE = 1
PATH_BUDGET = 2


# ---------------------------------------------------------------------------
# contraction  (A x^{m-1})_i and its Jacobian
# ---------------------------------------------------------------------------

def _contract_loop(idx, vals, x, nrows):
    nnz, m = idx.shape
    out = np.zeros(nrows, dtype=x.dtype)
    for e in range(nnz):
        t = vals[e] * x[idx[e, 1]]
        for p in range(2, m):
            t = t * x[idx[e, p]]
        out[idx[e, 0]] += t
    return out


def _contract_numpy(idx, vals, x, nrows):
    m = idx.shape[1]
    out = np.zeros(nrows, dtype=np.result_type(x.dtype, np.float64))
    if idx.shape[0] == 0:
        return out
    t = vals * x[idx[:, 1]]
    for p in range(2, m):
        t = t * x[idx[:, p]]
    np.add.at(out, idx[:, 0], t)
    return out


def _jacobian_loop(idx, vals, x, nrows, ncols):
    nnz, m = idx.shape
    jac = np.zeros((nrows, ncols), dtype=x.dtype)
    for e in range(nnz):
        for p in range(1, m):
            t = vals[e] + 0.0 * x[0]
            for r in range(1, m):
                if r != p:
                    t = t * x[idx[e, r]]
            jac[idx[e, 0], idx[e, p]] += t
    return jac


def _jacobian_numpy(idx, vals, x, nrows, ncols):
    m = idx.shape[1]
    dtype = np.result_type(x.dtype, np.float64)
    jac = np.zeros((nrows, ncols), dtype=dtype)
    if idx.shape[0] == 0:
        return jac
    for p in range(1, m):
        t = vals + 0.0 * x[0]
        for r in range(1, m):
            if r != p:
                t = t * x[idx[:, r]]
        np.add.at(jac, (idx[:, 0], idx[:, p]), t)
    return jac


def _contract_dense_loop(flat, n, m, x):
    out = np.zeros(n, dtype=x.dtype)
    digits = np.zeros(m, dtype=np.int64)
    for f in range(flat.shape[0]):
        a = flat[f]
        if a != 0.0:
            rem = f
            for p in range(m - 1, -1, -1):
                digits[p] = rem % n
                rem //= n
            t = a * x[digits[1]]
            for p in range(2, m):
                t = t * x[digits[p]]
            out[digits[0]] += t
    return out


def _contract_dense_numpy(flat, n, m, x):
    nz = np.flatnonzero(flat)
    idx = np.stack(np.unravel_index(nz, (n,) * m), axis=1).astype(np.int64)
    return _contract_numpy(idx, flat[nz], x, n)


# ---------------------------------------------------------------------------
# batched evaluation for the falsifier searches: X has shape (S, ncols)
# ---------------------------------------------------------------------------

def _batch_contract_loop(idx, vals, X, nrows):
    nnz, m = idx.shape
    S = X.shape[0]
    out = np.zeros((S, nrows))
    for s in range(S):
        for e in range(nnz):
            t = vals[e] * X[s, idx[e, 1]]
            for p in range(2, m):
                t = t * X[s, idx[e, p]]
            out[s, idx[e, 0]] += t
    return out


def _batch_contract_numpy(idx, vals, X, nrows):
    m = idx.shape[1]
    if idx.shape[0] == 0:
        return np.zeros((X.shape[0], nrows))
    t = vals[None, :] * X[:, idx[:, 1]]
    for p in range(2, m):
        t = t * X[:, idx[:, p]]
    scatter = np.zeros((idx.shape[0], nrows))
    scatter[np.arange(idx.shape[0]), idx[:, 0]] = 1.0
    return t @ scatter


def _batch_jacobian_loop(idx, vals, X, nrows, ncols):
    nnz, m = idx.shape
    S = X.shape[0]
    jac = np.zeros((S, nrows, ncols))
    for s in range(S):
        for e in range(nnz):
            for p in range(1, m):
                t = vals[e]
                for r in range(1, m):
                    if r != p:
                        t = t * X[s, idx[e, r]]
                jac[s, idx[e, 0], idx[e, p]] += t
    return jac


def _batch_jacobian_numpy(idx, vals, X, nrows, ncols):
    m = idx.shape[1]
    S = X.shape[0]
    flat = np.zeros((nrows * ncols, S))
    for p in range(1, m):
        t = np.repeat(vals[None, :], S, axis=0)
        for r in range(1, m):
            if r != p:
                t = t * X[:, idx[:, r]]
        np.add.at(flat, idx[:, 0] * ncols + idx[:, p], t.T)
    return flat.T.reshape(S, nrows, ncols).copy()


# ---------------------------------------------------------------------------
# simplex projection
# ---------------------------------------------------------------------------

def _project_simplex_loop(v):
    n = v.shape[0]
    u = np.sort(v)[::-1]
    css = 0.0
    theta = 0.0
    for j in range(n):
        css += u[j]
        cand = (css - 1.0) / (j + 1)
        if u[j] - cand > 0.0:
            theta = cand
    out = np.empty(n)
    for j in range(n):
        out[j] = max(v[j] - theta, 0.0)
    return out


def project_simplex_batch(V):
    """Euclidean projection of every row of ``V`` onto the unit simplex."""
    S, n = V.shape
    U = -np.sort(-V, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    ks = np.arange(1, n + 1)
    cond = U - css / ks > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(S), rho] / (rho + 1)
    return np.maximum(V - theta[:, None], 0.0)


# ---------------------------------------------------------------------------
# total-degree homotopy path tracking (projective, random affine chart)
# ---------------------------------------------------------------------------
#
# Unknowns X = (X_0..X_{k-1}, X_k) where X_k homogenises the constant slot of
# the rectangular tensor (idx, vals). Target F(X) = C X^{d}, start system
# G_l(X) = X_l^d - X_k^d, H = (1-t) gamma G + t F, plus the chart a.X = 1.

def _homotopy_system(idx, vals, k, d, gamma, a, X, t):
    n1 = k + 1
    F = contract(idx, vals, X, k)
    JF = jacobian(idx, vals, X, k, n1)
    H = np.zeros(n1, dtype=np.complex128)
    J = np.zeros((n1, n1), dtype=np.complex128)
    Ht = np.zeros(n1, dtype=np.complex128)
    x0d = X[k] ** d
    x0d1 = d * X[k] ** (d - 1)
    w = (1.0 - t) * gamma
    for l in range(k):
        g = X[l] ** d - x0d
        H[l] = w * g + t * F[l]
        Ht[l] = F[l] - gamma * g
        for c in range(n1):
            J[l, c] = t * JF[l, c]
        J[l, l] += w * d * X[l] ** (d - 1)
        J[l, k] -= w * x0d1
    acc = 0.0 + 0.0j
    for c in range(n1):
        acc += a[c] * X[c]
        J[k, c] = a[c]
    H[k] = acc - 1.0
    return H, J, Ht


def _cnorm(v):
    s = 0.0
    for i in range(v.shape[0]):
        s += v[i].real * v[i].real + v[i].imag * v[i].imag
    return np.sqrt(s)


def _tangent(idx, vals, k, d, gamma, a, X, t):
    H, J, Ht = homotopy_system(idx, vals, k, d, gamma, a, X, t)
    return np.linalg.solve(J, -Ht)


def _track_path_loop(idx, vals, k, d, gamma, a, X0, max_steps, h_max):
    X = X0.copy()
    t = 0.0
    h = 0.5 * h_max
    streak = 0
    steps = 0
    h_min = 1e-13
    while t < 1.0:
        if steps >= max_steps:
            return X, t, steps, PATH_BUDGET
        steps += 1
        if h > 1.0 - t:
            h = 1.0 - t
        k1 = tangent(idx, vals, k, d, gamma, a, X, t)
        k2 = tangent(idx, vals, k, d, gamma, a, X + 0.5 * h * k1, t + 0.5 * h)
        k3 = tangent(idx, vals, k, d, gamma, a, X + 0.5 * h * k2, t + 0.5 * h)
        k4 = tangent(idx, vals, k, d, gamma, a, X + h * k3, t + h)
        Xp = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t_new = t + h
        if t_new > 1.0:
            t_new = 1.0
        Xc = Xp.copy()
        ok = False
        first = 0.0
        scale = 1.0 + cnorm(Xp)
        for it in range(4):
            H, J, Ht = homotopy_system(idx, vals, k, d, gamma, a, Xc, t_new)
            dX = np.linalg.solve(J, -H)
            Xc = Xc + dX
            nd = cnorm(dX)
            if it == 0:
                first = nd
            if nd <= 1e-11 * scale:
                ok = True
                break
            if it > 0 and nd > 0.5 * first:
                break
        if ok and first <= 1e-3 * scale:
            X = Xc
            t = t_new
            streak += 1
            if streak >= 3:
                h = min(2.0 * h, h_max)
                streak = 0
        else:
            h *= 0.5
            streak = 0
            if h < h_min:
                return X, t, steps, PATH_STEP_FAILURE
    for it in range(30):
        H, J, Ht = homotopy_system(idx, vals, k, d, gamma, a, X, 1.0)
        dX = np.linalg.solve(J, -H)
        X = X + dX
        if cnorm(dX) <= 1e-14 * (1.0 + cnorm(X)):
            break
    return X, t, steps, PATH_OK


# ---------------------------------------------------------------------------
# projected extragradient on the unit simplex for the lifted map
#   F(x, s) = (A x^{m-1} + s q + s e ; s)
# ---------------------------------------------------------------------------

def _lifted_map(idx, vals, n, q, y):
    x = y[:n].copy()
    s = y[n]
    g = contract(idx, vals, x, n)
    out = np.empty(n + 1)
    for i in range(n):
        out[i] = g[i] + s * q[i] + s
    out[n] = s
    return out


def _vi_residual(idx, vals, n, q, y):
    Fy = lifted_map(idx, vals, n, q, y)
    p = project_simplex(y - Fy)
    r = 0.0
    for i in range(n + 1):
        v = abs(y[i] - p[i])
        if v > r:
            r = v
    return r


def _vi_extragradient_loop(idx, vals, n, q, y0, max_iter, tol, gamma0):
    y = y0.copy()
    gamma = gamma0
    res = vi_residual(idx, vals, n, q, y)
    it = 0
    while it < max_iter:
        if res < tol:
            break
        it += 1
        Fy = lifted_map(idx, vals, n, q, y)
        while True:
            yb = project_simplex(y - gamma * Fy)
            Fb = lifted_map(idx, vals, n, q, yb)
            num = 0.0
            den = 0.0
            for i in range(n + 1):
                num += (Fy[i] - Fb[i]) ** 2
                den += (y[i] - yb[i]) ** 2
            if gamma * np.sqrt(num) <= 0.9 * np.sqrt(den) or gamma < 1e-12:
                break
            gamma *= 0.5
        y = project_simplex(y - gamma * Fb)
        gamma = min(gamma * 1.25, 1e3)
        res = vi_residual(idx, vals, n, q, y)
    return y, res, it


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:
    contract = njit(_contract_loop)
    jacobian = njit(_jacobian_loop)
    contract_dense = njit(_contract_dense_loop)
    batch_contract = njit(_batch_contract_loop)
    batch_jacobian = njit(_batch_jacobian_loop)
else:
    contract = _contract_numpy
    jacobian = _jacobian_numpy
    contract_dense = _contract_dense_numpy
    batch_contract = _batch_contract_numpy
    batch_jacobian = _batch_jacobian_numpy

project_simplex = njit(_project_simplex_loop)
cnorm = njit(_cnorm)
homotopy_system = njit(_homotopy_system)
tangent = njit(_tangent)
track_path = njit(_track_path_loop)
lifted_map = njit(_lifted_map)
vi_residual = njit(_vi_residual)
vi_extragradient = njit(_vi_extragradient_loop)

NUMPY_KERNELS = {
    "contract": _contract_numpy,
    "jacobian": _jacobian_numpy,
    "contract_dense": _contract_dense_numpy,
    "batch_contract": _batch_contract_numpy,
    "batch_jacobian": _batch_jacobian_numpy,
}


def warmup():
    """Trigger compilation of every kernel on tiny inputs."""
    idx = np.array([[0, 0, 0], [1, 1, 0]], dtype=np.int64)
    vals = np.array([1.0, -1.0])
    x = np.array([0.5, 0.25])
    contract(idx, vals, x, 2)
    jacobian(idx, vals, x, 2, 2)
    contract(idx, vals, x.astype(np.complex128), 2)
    jacobian(idx, vals, x.astype(np.complex128), 2, 2)
    contract_dense(np.ones(8), 2, 3, x)
    batch_contract(idx, vals, np.ones((2, 2)), 2)
    batch_jacobian(idx, vals, np.ones((2, 2)), 2, 2)
    ridx = np.array([[0, 0, 0], [0, 1, 1]], dtype=np.int64)
    rvals = np.array([1.0, -1.0])
    a = np.array([0.3 + 0.1j, 0.7 - 0.2j])
    X0 = np.array([1.0 + 0j, 1.0 + 0j]) / (a[0] + a[1])
    try:
        track_path(ridx, rvals, 1, 2, 0.6 + 0.8j, a, X0, 50, 0.1)
    except Exception:
        pass
    vi_extragradient(idx, vals, 2, np.array([-1.0, -1.0]), np.full(3, 1.0 / 3.0), 2, 1e-10, 1.0)
