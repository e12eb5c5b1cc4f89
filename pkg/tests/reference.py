"""Independent reference computations for the tests.

Nothing here imports the solver modules: contractions are brute-force loops
over every index tuple of a dense array, and the matrix LCP reference is a
plain support enumeration with numpy linear algebra.
"""

import itertools

import numpy as np
from scipy.optimize import linprog


def dense_of(entries, m, n):
    """Dense array from 1-based ``{index tuple: value}``."""
    a = np.zeros((n,) * m)
    for key, v in entries.items():
        a[tuple(i - 1 for i in key)] = v
    return a


def brute_contract(a, x):
    m, n = a.ndim, a.shape[0]
    out = np.zeros(n)
    for i in range(n):
        for rest in itertools.product(range(n), repeat=m - 1):
            t = a[(i,) + rest]
            for j in rest:
                t *= x[j]
            out[i] += t
    return out


def brute_polyval(a, x):
    m, n = a.ndim, a.shape[0]
    s = 0.0
    for tup in itertools.product(range(n), repeat=m):
        t = a[tup]
        for j in tup:
            t *= x[j]
        s += t
    return s


def lcp_solutions(M, q, tol=1e-9):
    """All solutions of LCP(q, M) for a matrix whose principal blocks are
    nonsingular (generic random matrices)."""
    n = len(q)
    sols = []
    if np.all(q >= 0):
        sols.append(np.zeros(n))
    for r in range(1, n + 1):
        for J in itertools.combinations(range(n), r):
            J = list(J)
            xJ = np.linalg.solve(M[np.ix_(J, J)], -q[J])
            if np.any(xJ <= 0):
                continue
            x = np.zeros(n)
            x[J] = xJ
            w = M @ x + q
            if np.all(w >= -tol):
                sols.append(x)
    return sols


def rsystem_feasible(M, allow_t):
    """Matrix R-system: x >= 0, sum(x) = 1, t >= 0 (t = 0 unless ``allow_t``),
    (Mx)_i + t = 0 where x_i > 0 and >= 0 elsewhere. One LP per support J
    maximising tau with x_J >= tau; feasible iff some optimum has tau > 0."""
    n = M.shape[0]
    for r in range(1, n + 1):
        for J in itertools.combinations(range(n), r):
            J = list(J)
            K = [k for k in range(n) if k not in J]
            # variables: x_J (r), t, tau
            c = np.zeros(r + 2)
            c[-1] = -1.0
            A_eq = np.vstack([
                np.hstack([M[np.ix_(J, J)], np.ones((r, 1)), np.zeros((r, 1))]),
                np.hstack([np.ones((1, r)), np.zeros((1, 2))]),
            ])
            b_eq = np.concatenate([np.zeros(r), [1.0]])
            A_ub = [np.hstack([-np.eye(r), np.zeros((r, 1)), np.ones((r, 1))])]
            b_ub = [np.zeros(r)]
            if K:
                A_ub.append(np.hstack([-M[np.ix_(K, J)], -np.ones((len(K), 1)), np.zeros((len(K), 1))]))
                b_ub.append(np.zeros(len(K)))
            t_bounds = (0.0, None) if allow_t else (0.0, 0.0)
            res = linprog(c, A_ub=np.vstack(A_ub), b_ub=np.concatenate(b_ub), A_eq=A_eq, b_eq=b_eq,
                          bounds=[(None, None)] * r + [t_bounds, (None, 1.0)], method="highs")
            if res.status == 0 and -res.fun > 1e-9:
                return True
    return False


def hausdorff(P, Q):
    if not P and not Q:
        return 0.0
    if not P or not Q:
        return np.inf
    d = lambda a, B: min(float(np.max(np.abs(a - b))) for b in B)
    return max(max(d(p, Q) for p in P), max(d(q, P) for q in Q))
