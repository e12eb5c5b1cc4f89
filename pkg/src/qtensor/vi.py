"""A scalable heuristic for TCP(q, A) through a variational inequality on a simplex.

Lift to ``y = (x, s)`` on the unit simplex of R^{n+1} and use

    F(y) = (A x^{m-1} + s q + s e ; s).

At a solution of VI(S, F) every positive coordinate of ``F(y)`` attains the
common minimum ``omega`` and the zero coordinates sit above it. If ``s > 0``
then ``omega = s`` and ``z = x / s^{1/(m-1)}`` solves TCP(q, A). For an
R-tensor ``s`` cannot vanish at such a point, so ``s <= s_min`` is reported
as a sign that A may fail the R condition.

The VI point is found by projected extragradient with a backtracking step. F
need not be monotone, so convergence is not guaranteed; failures are
returned as data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels, polysys
from .engine import DEFAULT_SEED, TcpInstance, TcpSolution, verify_solution
from .tensor import principal_subtensor


@dataclass
class ViOptions:
    tol: float = 1e-9
    vi_tol: float = 1e-10
    s_min: float = 1e-8
    starts: int = 8
    max_iter: int = 20000
    gamma0: float = 0.5
    seed: int = DEFAULT_SEED
    polish: bool = True


@dataclass
class SimplexViState:
    y: np.ndarray
    omega: float
    kkt_residual: float

    @property
    def s(self) -> float:
        return float(self.y[-1])


@dataclass
class ViResult:
    status: str  # "converged" | "r_condition_suspect" | "stalled"
    solution: TcpSolution | None
    state: SimplexViState | None
    best_residual: float
    starts_tried: int
    iterations: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.solution is not None

    def to_dict(self) -> dict:
        out = {"status": self.status, "best_residual": self.best_residual, "starts": self.starts_tried}
        if self.solution is not None:
            out.update(self.solution.to_dict())
        if self.state is not None:
            out["s"] = self.state.s
            out["omega"] = self.state.omega
        out["method"] = "vi"
        return out


def lifted_map(inst: TcpInstance, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    return kernels.lifted_map(inst.A.idx, inst.A.vals, inst.n, inst.q, y)


def kkt_state(inst: TcpInstance, y, zero_tol: float = 1e-12) -> SimplexViState:
    """``omega`` and the projection residual ``||y - P_S(y - F(y))||_inf``."""
    y = np.asarray(y, dtype=np.float64)
    Fy = lifted_map(inst, y)
    pos = y > zero_tol
    omega = float(Fy[pos].min()) if pos.any() else float(Fy.min())
    res = float(kernels.vi_residual(inst.A.idx, inst.A.vals, inst.n, inst.q, y))
    return SimplexViState(y.copy(), omega, res)


def _starts(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    Y = np.empty((max(count, 1), n + 1))
    Y[0] = 1.0 / (n + 1)
    if count > 1:
        Y[1:] = rng.dirichlet(np.ones(n + 1), size=count - 1)
    return Y


def _polish(inst: TcpInstance, z: np.ndarray) -> np.ndarray:
    """Newton on the support system of ``z``; returns ``z`` if that fails."""
    J = tuple(int(i) for i in np.flatnonzero(z > 1e-8 * (1.0 + float(z.max()))))
    if not J:
        return np.zeros_like(z)
    sub = principal_subtensor(inst.A, J)
    system = polysys.support_system(sub.idx, sub.vals, inst.q[list(J)], inst.m)
    if inst.q[list(J)].any():
        yJ, _, ok = polysys.newton(system, z[list(J)])
        if ok and np.all(yJ > 0):
            out = np.zeros_like(z)
            out[list(J)] = yJ
            return out
    out = np.zeros_like(z)
    out[list(J)] = z[list(J)]
    return out


def solve_vi(inst: TcpInstance, opts: ViOptions | None = None) -> ViResult:
    opts = opts or ViOptions()
    n, m = inst.n, inst.m
    rng = np.random.default_rng(opts.seed)
    A = inst.A
    best = None
    suspect = None
    iters = []
    for k, y0 in enumerate(_starts(n, opts.starts, rng)):
        y, res, it = kernels.vi_extragradient(A.idx, A.vals, n, inst.q, y0, opts.max_iter, opts.vi_tol, opts.gamma0)
        iters.append(int(it))
        state = kkt_state(inst, y)
        if best is None or state.kkt_residual < best.kkt_residual:
            best = state
        converged = res < opts.vi_tol
        if not converged:
            continue
        s = float(y[n])
        if s <= opts.s_min:
            suspect = suspect or state
            continue
        z = y[:n] / s ** (1.0 / (m - 1))
        z[z < 0] = 0.0
        candidates = [_polish(inst, z), z] if opts.polish else [z]
        for cand in candidates:
            sol = verify_solution(inst, cand, opts.tol)
            if sol:
                sol.method = "vi"
                return ViResult("converged", sol, state, state.kkt_residual, k + 1, iters)
    status = "r_condition_suspect" if suspect is not None else "stalled"
    return ViResult(status, None, suspect or best, best.kkt_residual, opts.starts, iters)
