"""Solving and verifying the tensor complementarity problem TCP(q, A).

Find ``x >= 0`` with ``w = q + A x^{m-1} >= 0`` and ``x . w = 0``.

:func:`solve_enumerate` splits the problem by complementary support: on a
support J the positive part of x solves a square polynomial system and the
slack off J must stay nonnegative. Each support is settled by the cheapest
exact argument available (a sign pattern that rules it out, a linear solve
for m = 2, a scalar equation for |J| = 1, univariate roots) and otherwise by
total-degree homotopy continuation backed up by multi-start Newton.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from . import polysys
from .tensor import DimensionMismatch, Tensor, check_support, principal_subtensor

DEFAULT_SEED = 0x5EED


class EnumerationCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class TcpInstance:
    A: Tensor
    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64).reshape(-1)
        if q.shape[0] != self.A.dim:
            raise DimensionMismatch(f"q has length {q.shape[0]}, tensor has dim {self.A.dim}")
        q = q.copy()
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.A.dim

    @property
    def m(self) -> int:
        return self.A.order


@dataclass(frozen=True)
class Residuals:
    min_x: float
    min_w: float
    comp: float


@dataclass
class TcpSolution:
    x: np.ndarray
    w: np.ndarray
    support: tuple[int, ...]
    residuals: Residuals
    method: str = "verify"

    @property
    def residual(self) -> float:
        return max(0.0, -self.residuals.min_w, -self.residuals.min_x, self.residuals.comp)

    def to_dict(self, complete: bool | None = None) -> dict:
        out = {
            "x": [float(v) for v in self.x],
            "w": [float(v) for v in self.w],
            "support": [j + 1 for j in self.support],
            "residuals": {
                "min_x": self.residuals.min_x,
                "min_w": self.residuals.min_w,
                "comp": self.residuals.comp,
            },
            "method": self.method,
        }
        if complete is not None:
            out["complete"] = bool(complete)
        return out


@dataclass
class RSystemWitness:
    """``x >= 0, x != 0`` and ``t >= 0`` with ``(A x^{m-1})_i + t`` zero on
    the support of x and nonnegative off it."""

    x: np.ndarray
    t: float

    def residual(self, A: Tensor) -> float:
        g = A.contract(self.x) + self.t
        pos = self.x > 0
        on = float(np.max(np.abs(g[pos]))) if pos.any() else math.inf
        off = float(np.max(np.maximum(-g[~pos], 0.0))) if (~pos).any() else 0.0
        return max(on, off)


@dataclass
class Violation:
    """First violated condition of a candidate TCP solution."""

    condition: str  # "x_nonnegative" | "w_nonnegative" | "complementarity"
    index: int | None
    magnitude: float
    w: np.ndarray

    def __bool__(self):
        return False


@dataclass
class SolverOptions:
    tol: float = 1e-9
    nonneg_tol: float = 1e-12
    support_tol: float = 1e-10
    cap: int = 16
    seed: int = DEFAULT_SEED
    newton_factor: int = 8
    newton_iter: int = 60
    max_paths: int = 4096
    homotopy: bool = True
    dedup: float = 1e-6


@dataclass
class SupportResult:
    support: tuple[int, ...]
    solutions: list
    complete: bool
    method: str
    degenerate: bool = False
    note: str = ""


@dataclass
class EnumerationResult:
    instance: TcpInstance
    solutions: list
    complete: bool
    supports: list = field(default_factory=list)

    @property
    def certified_empty(self) -> bool:
        return self.complete and not self.solutions

    @property
    def incomplete_supports(self) -> list:
        return [s.support for s in self.supports if not s.complete]

    def nonzero(self) -> list:
        return [s for s in self.solutions if s.support]


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def verify_solution(inst: TcpInstance, x, tol: float = 1e-9, nonneg_tol: float = 1e-12):
    """Check ``x`` against TCP(q, A); returns a TcpSolution or a Violation."""
    x = np.array(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != inst.n:
        raise DimensionMismatch(f"x has length {x.shape[0]}, expected {inst.n}")
    min_x = float(x.min()) if x.size else 0.0
    x[(x < 0) & (x > -nonneg_tol)] = 0.0
    w = inst.q + inst.A.contract(x)
    if min_x < -nonneg_tol:
        i = int(np.argmin(x))
        return Violation("x_nonnegative", i, -min_x, w)
    min_w = float(w.min())
    if min_w < -tol:
        i = int(np.argmin(w))
        return Violation("w_nonnegative", i, -min_w, w)
    comp = abs(float(np.dot(x, w)))
    if comp > tol * (1.0 + float(np.linalg.norm(x)) * float(np.linalg.norm(w))):
        return Violation("complementarity", None, comp, w)
    support = tuple(int(i) for i in np.flatnonzero(x > 0))
    return TcpSolution(x, w, support, Residuals(min_x, min_w, comp))


# ---------------------------------------------------------------------------
# per-support exact arguments
# ---------------------------------------------------------------------------

def _in_support_mask(n: int, J: Sequence[int]) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    mask[list(J)] = True
    return mask


def sign_certificate(A: Tensor, q: np.ndarray, J: Sequence[int]) -> str | None:
    """A reason why no solution has support exactly J, from signs alone.

    For x > 0 on J every monomial in x_J is positive, so a row whose
    coefficients (restricted to J) and constant share a sign, not all zero,
    cannot vanish on J; and an off-support slack with nonpositive coefficients
    and negative constant cannot be nonnegative.
    """
    n = A.dim
    mask = _in_support_mask(n, J)
    if A.nnz:
        inner = mask[A.idx[:, 1:]].all(axis=1)
        rows = A.idx[inner, 0]
        vals = A.vals[inner]
    else:
        rows = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    has_pos = np.zeros(n, dtype=bool)
    has_neg = np.zeros(n, dtype=bool)
    has_pos[rows[vals > 0]] = True
    has_neg[rows[vals < 0]] = True
    for i in J:
        if not has_neg[i] and q[i] >= 0 and (has_pos[i] or q[i] > 0):
            return f"row {i + 1} is positive on the support"
        if not has_pos[i] and q[i] <= 0 and (has_neg[i] or q[i] < 0):
            return f"row {i + 1} is negative on the support"
    for j in np.flatnonzero(~mask):
        if not has_pos[j] and q[j] < 0:
            return f"slack {j + 1} is negative for every x supported on J"
    return None


def _support_rng(seed: int, J: Sequence[int]) -> np.random.Generator:
    code = sum(1 << j for j in J)
    return np.random.default_rng([seed, code & 0xFFFFFFFF, code >> 32])


def _finish(inst, J, xs, opts, method) -> list:
    """Embed support roots, keep the verified ones with x_J > 0."""
    out = []
    n = inst.n
    for xJ in xs:
        if not np.all(np.isfinite(xJ)):
            continue
        if np.min(xJ) <= opts.support_tol * (1.0 + float(np.max(np.abs(xJ)))):
            continue
        x = np.zeros(n)
        x[list(J)] = xJ
        sol = verify_solution(inst, x, opts.tol, opts.nonneg_tol)
        if sol:
            sol.method = method
            out.append(sol)
    return dedup_solutions(out, opts.dedup)


def _solve_linear(inst: TcpInstance, J, opts) -> SupportResult:
    n = inst.n
    M = inst.A.dense(cap=max(n * n, 1))
    q = inst.q
    Jl = list(J)
    MJJ = M[np.ix_(Jl, Jl)]
    try:
        cond = np.linalg.cond(MJJ)
    except np.linalg.LinAlgError:
        cond = np.inf
    if np.isfinite(cond) and cond < 1e12:
        xJ = np.linalg.solve(MJJ, -q[Jl])
        return SupportResult(tuple(J), _finish(inst, J, [xJ], opts, "enumerate"), True, "linear")
    # Singular principal block: decide by LP whether a point with x_J > 0 exists.
    off = [j for j in range(n) if j not in J]
    r = len(Jl)
    c = np.zeros(r + 1)
    c[-1] = -1.0
    A_ub = [np.concatenate([-np.eye(r), np.ones((r, 1))], axis=1)]
    b_ub = [np.zeros(r)]
    if off:
        A_ub.append(np.concatenate([-M[np.ix_(off, Jl)], np.zeros((len(off), 1))], axis=1))
        b_ub.append(q[off])
    res = linprog(
        c,
        A_ub=np.vstack(A_ub),
        b_ub=np.concatenate(b_ub),
        A_eq=np.concatenate([MJJ, np.zeros((r, 1))], axis=1),
        b_eq=-q[Jl],
        bounds=[(0, None)] * r + [(None, 1.0)],
        method="highs",
    )
    if res.status == 0 and -res.fun > opts.support_tol:
        sols = _finish(inst, J, [res.x[:r]], opts, "enumerate")
        return SupportResult(tuple(J), sols, True, "linear-lp", degenerate=bool(sols))
    if res.status in (0, 2):
        return SupportResult(tuple(J), [], True, "linear-lp")
    return SupportResult(tuple(J), [], False, "linear-lp", note=res.message)


def _u_interval(q_off: np.ndarray, c_off: np.ndarray, tol: float):
    """Interval of u > 0 with ``q_off + u c_off >= 0``; ``None`` if empty."""
    lo, hi = 0.0, math.inf
    for qj, cj in zip(q_off, c_off):
        if cj > tol:
            lo = max(lo, -qj / cj)
        elif cj < -tol:
            hi = min(hi, -qj / cj)
        elif qj < -tol:
            return None
    if hi <= 0 or hi < lo:
        return None
    return lo, hi


def _pick_u(lo: float, hi: float) -> float:
    return min(max(1.0, lo), hi)


def _solve_scalar(inst: TcpInstance, J, opts) -> SupportResult:
    (j,) = J
    A, q, m = inst.A, inst.q, inst.m
    on = (A.idx[:, 1:] == j).all(axis=1)
    c = np.zeros(inst.n)
    np.add.at(c, A.idx[on, 0], A.vals[on])
    a = c[j]
    if a != 0.0:
        u = -q[j] / a
        if u <= 0:
            return SupportResult(tuple(J), [], True, "scalar")
        return SupportResult(tuple(J), _finish(inst, J, [np.array([u ** (1.0 / (m - 1))])], opts, "enumerate"), True, "scalar")
    if q[j] != 0.0:
        return SupportResult(tuple(J), [], True, "scalar")
    off = np.array([i for i in range(inst.n) if i != j], dtype=np.int64)
    iv = _u_interval(q[off], c[off], opts.tol)
    if iv is None:
        return SupportResult(tuple(J), [], True, "scalar")
    u = _pick_u(*iv)
    sols = _finish(inst, J, [np.array([u ** (1.0 / (m - 1))])], opts, "enumerate")
    return SupportResult(tuple(J), sols, True, "scalar", degenerate=bool(sols))


def _solve_power_linear(inst: TcpInstance, sub: Tensor, J, opts) -> SupportResult | None:
    """Pure-power support: every entry of A_J is ``a_{i j .. j}``, so
    ``(A_J x^{m-1})_i = sum_j M_ij u_j`` with ``u = x^{m-1}``. A nonsingular M
    settles the support with one linear solve; otherwise returns None."""
    if sub.nnz == 0 or not (sub.idx[:, 1:] == sub.idx[:, 1:2]).all():
        return None
    r, m = sub.dim, inst.m
    M = np.zeros((r, r))
    np.add.at(M, (sub.idx[:, 0], sub.idx[:, 1]), sub.vals)
    if not np.linalg.cond(M) < 1e12:
        return None
    u = np.linalg.solve(M, -inst.q[list(J)])
    if np.min(u) <= 0:
        return SupportResult(tuple(J), [], True, "power-linear")
    xs = [u ** (1.0 / (m - 1))]
    return SupportResult(tuple(J), _finish(inst, J, xs, opts, "enumerate"), True, "power-linear")


def _polish_general(system, ys, opts):
    out = []
    for y in ys:
        y2, res, ok = polysys.newton(system, y, max_iter=opts.newton_iter)
        if ok:
            out.append(y2)
    return out


def _solve_general(inst: TcpInstance, J, opts) -> SupportResult:
    """r >= 2 and q_J not identically zero: an isolated-root system."""
    m, q = inst.m, inst.q
    sub = principal_subtensor(inst.A, J)
    fast = _solve_power_linear(inst, sub, J, opts)
    if fast is not None:
        return fast
    system = polysys.support_system(sub.idx, sub.vals, q[list(J)], m)
    r = len(J)
    rng = _support_rng(opts.seed, J)
    candidates = []
    complete = False
    method = "newton"
    if opts.homotopy and (m - 1) ** r <= opts.max_paths:
        rep = polysys.homotopy_roots(system, rng)
        candidates += polysys.real_candidates(rep.finite + rep.suspect)
        complete = rep.complete
        method = "homotopy"
    radius = 1.0 + max(1.0, float(np.max(np.abs(q)))) ** (1.0 / (m - 1))
    starts = polysys.newton_starts(r, opts.newton_factor * r, radius, rng)
    roots, _ = polysys.newton_multistart(system, starts, opts.newton_iter)
    candidates = _polish_general(system, candidates, opts) + roots
    return SupportResult(tuple(J), _finish(inst, J, candidates, opts, "enumerate"), complete, method)


def _solve_homogeneous(inst: TcpInstance, J, opts) -> SupportResult:
    """r >= 2 and q_J = 0: solutions are rays; fix the last coordinate to 1."""
    m, q, n = inst.m, inst.q, inst.n
    sub = principal_subtensor(inst.A, J)
    r = len(J)
    rng = _support_rng(opts.seed, J)
    mix = rng.normal(size=(r - 1, r))
    system = polysys.dehomogenised_system(sub.idx, sub.vals, r, m, mix)
    full = polysys.RectSystem(sub.idx, sub.vals, r, m - 1)  # all r equations at (y, 1)
    candidates = []
    complete = False
    degenerate = False
    method = "newton"
    if r == 2:
        roots = polysys.univariate_roots(system)
        method = "univariate"
        if roots is None:
            candidates = [np.ones(1)]
            complete = True
            degenerate = True
        else:
            candidates = polysys.real_candidates(roots)
            complete = True
    elif opts.homotopy and (m - 1) ** (r - 1) <= opts.max_paths:
        rep = polysys.homotopy_roots(system, rng)
        candidates = polysys.real_candidates(rep.finite + rep.suspect)
        complete = rep.complete
        method = "homotopy"
    if r > 2:
        radius = 2.0
        starts = polysys.newton_starts(r - 1, opts.newton_factor * (r - 1), radius, rng)
        roots, _ = polysys.newton_multistart(system, starts, opts.newton_iter)
        candidates = _polish_general(system, candidates, opts) + roots
    else:
        candidates = _polish_general(system, candidates, opts) if not degenerate else candidates

    off = np.array([i for i in range(n) if i not in J], dtype=np.int64)
    xs = []
    for y in candidates:
        v = np.append(y, 1.0)
        if np.min(v) <= opts.support_tol * (1.0 + float(np.max(np.abs(v)))):
            continue
        x = np.zeros(n)
        x[list(J)] = v / v[0]
        g = inst.A.contract(x)
        if np.max(np.abs(g[list(J)])) > opts.tol * full.scale * (1.0 + float(np.max(x))) ** (m - 1):
            continue
        iv = _u_interval(q[off], g[off], opts.tol)
        if iv is None:
            continue
        xs.append(x[list(J)] * _pick_u(*iv) ** (1.0 / (m - 1)))
        degenerate = degenerate or bool(np.any(q[off]))
    sols = _finish(inst, J, xs, opts, "enumerate")
    return SupportResult(tuple(J), sols, complete, method, degenerate=degenerate and bool(sols))


def solve_support(inst: TcpInstance, support: Sequence[int], opts: SolverOptions | None = None) -> SupportResult:
    """All solutions whose positive part is exactly ``support`` (0-based).

    ``complete`` is True when the support was settled exactly (sign pattern,
    linear algebra, scalar or univariate equation) or by a homotopy whose
    every path ended cleanly; Newton-only searches are never complete.
    ``degenerate`` marks a continuum of solutions represented by one point.
    """
    opts = opts or SolverOptions()
    J = check_support(support, inst.n)
    cert = sign_certificate(inst.A, inst.q, J)
    if cert is not None:
        return SupportResult(J, [], True, "sign", note=cert)
    if inst.m == 2:
        return _solve_linear(inst, J, opts)
    if len(J) == 1:
        return _solve_scalar(inst, J, opts)
    if not np.any(inst.q[list(J)]):
        return _solve_homogeneous(inst, J, opts)
    return _solve_general(inst, J, opts)


def supports(n: int):
    """Nonempty supports in order of size, then lexicographically."""
    for r in range(1, n + 1):
        yield from itertools.combinations(range(n), r)


def dedup_solutions(sols: list, rel: float = 1e-6) -> list:
    """Drop near-duplicates (l-inf distance), keeping the smaller residual."""
    kept: list = []
    for s in sols:
        for pos, k in enumerate(kept):
            if np.max(np.abs(s.x - k.x)) <= rel * (1.0 + float(np.max(np.abs(k.x)))):
                if s.residual < k.residual:
                    kept[pos] = s
                break
        else:
            kept.append(s)
    return kept


def solve_enumerate(inst: TcpInstance, opts: SolverOptions | None = None) -> EnumerationResult:
    """Every solution found over all 2^n - 1 supports (plus 0 when q >= 0)."""
    opts = opts or SolverOptions()
    if inst.n > opts.cap:
        raise EnumerationCapExceeded(
            f"dimension {inst.n} exceeds the enumeration cap {opts.cap}; "
            "raise the cap or use the simplex VI solver (method='vi')"
        )
    found = []
    results = []
    if np.all(inst.q >= 0):
        zero = verify_solution(inst, np.zeros(inst.n), opts.tol, opts.nonneg_tol)
        zero.method = "enumerate"
        found.append(zero)
    for J in supports(inst.n):
        sr = solve_support(inst, J, opts)
        results.append(sr)
        found.extend(sr.solutions)
    found = dedup_solutions(found, opts.dedup)
    return EnumerationResult(inst, found, all(s.complete for s in results), results)
