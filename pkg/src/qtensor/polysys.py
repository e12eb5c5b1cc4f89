"""Square polynomial systems arising from a fixed complementary support.

On a support J the complementarity problem reduces to
``(A_J x^{m-1})_i + q_i = 0`` for i in J. Such a system is stored as a
*rectangular* coordinate tensor over the augmented vector ``(y, 1)``: the
last coordinate is a constant slot, so the constant ``q_i`` becomes the
entry ``(i, k, ..., k)``. The same tensor, with the constant slot promoted to
a variable, is the homogenised system used by the homotopy tracker.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import kernels


@dataclass(frozen=True)
class RectSystem:
    """``F(y) = C (y, 1)^{d}`` with ``k`` equations in ``k`` unknowns."""

    idx: np.ndarray
    vals: np.ndarray
    k: int
    degree: int

    def augmented(self, y) -> np.ndarray:
        X = np.empty(self.k + 1, dtype=np.result_type(np.asarray(y).dtype, np.float64))
        X[: self.k] = y
        X[self.k] = 1.0
        return X

    def value(self, y) -> np.ndarray:
        return kernels.contract(self.idx, self.vals, self.augmented(y), self.k)

    def jac(self, y) -> np.ndarray:
        X = self.augmented(y)
        return kernels.jacobian(self.idx, self.vals, X, self.k, self.k + 1)[:, : self.k]

    @property
    def scale(self) -> float:
        return 1.0 + (float(np.max(np.abs(self.vals))) if self.vals.size else 0.0)


def support_system(sub_idx: np.ndarray, sub_vals: np.ndarray, q_J: np.ndarray, order: int) -> RectSystem:
    """System ``A_J x^{m-1} + q_J = 0``; ``sub_*`` is the principal sub-tensor."""
    r = q_J.shape[0]
    rows = [sub_idx]
    vals = [sub_vals]
    nz = np.flatnonzero(q_J)
    if nz.size:
        const = np.full((nz.size, order), r, dtype=np.int64)
        const[:, 0] = nz
        rows.append(const)
        vals.append(q_J[nz])
    return RectSystem(np.concatenate(rows), np.concatenate(vals), r, order - 1)


def dehomogenised_system(sub_idx: np.ndarray, sub_vals: np.ndarray, r: int, order: int, mix: np.ndarray) -> RectSystem:
    """Square system for ``A_J x^{m-1} = 0`` with ``x_last = 1``.

    The r equations in r-1 unknowns are replaced by ``mix @ equations`` for a
    generic ``(r-1, r)`` matrix ``mix``; the last local index doubles as the
    constant slot, so column indices carry over unchanged.
    """
    k = r - 1
    rows = []
    vals = []
    for l in range(k):
        coef = mix[l, sub_idx[:, 0]]
        keep = coef != 0.0
        block = sub_idx[keep].copy()
        block[:, 0] = l
        rows.append(block)
        vals.append(coef[keep] * sub_vals[keep])
    return RectSystem(np.concatenate(rows), np.concatenate(vals), k, order - 1)


# ---------------------------------------------------------------------------
# Newton
# ---------------------------------------------------------------------------

def newton(system: RectSystem, y0, max_iter: int = 60, tol: float = 1e-13):
    """Damped Newton from ``y0``. Returns ``(y, residual_inf, converged)``."""
    y = np.array(y0, dtype=np.float64)
    F = system.value(y)
    res = float(np.max(np.abs(F)))
    scale = system.scale
    for _ in range(max_iter):
        if res <= tol * scale:
            return y, res, True
        J = system.jac(y)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            return y, res, False
        lam = 1.0
        for _ in range(30):
            y_new = y + lam * step
            F_new = system.value(y_new)
            res_new = float(np.max(np.abs(F_new)))
            if res_new < res or lam < 1e-8:
                break
            lam *= 0.5
        if not np.isfinite(res_new):
            return y, res, False
        small_step = float(np.max(np.abs(lam * step))) <= 1e-15 * (1.0 + float(np.max(np.abs(y))))
        y, F, res = y_new, F_new, res_new
        if small_step:
            break
    return y, res, res <= 1e-10 * scale


def newton_starts(k: int, count: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Scrambled Halton points on ``[0, radius]^k``."""
    sampler = qmc.Halton(d=k, scramble=True, seed=rng)
    return sampler.random(count) * radius


def newton_multistart(system: RectSystem, starts: np.ndarray, max_iter: int = 60):
    """Run Newton from every start. Returns ``(roots, n_converged)``."""
    roots = []
    for y0 in starts:
        y, res, ok = newton(system, y0, max_iter=max_iter)
        if ok and np.all(np.isfinite(y)):
            roots.append(y)
    return roots, len(roots)


# ---------------------------------------------------------------------------
# univariate exact path
# ---------------------------------------------------------------------------

def univariate_coefficients(system: RectSystem) -> np.ndarray:
    """Coefficients (ascending powers) of a ``k = 1`` system."""
    assert system.k == 1
    powers = np.count_nonzero(system.idx[:, 1:] == 0, axis=1)
    coeffs = np.zeros(system.degree + 1)
    np.add.at(coeffs, powers, system.vals)
    return coeffs


def univariate_roots(system: RectSystem):
    """All complex roots, or ``None`` when the polynomial vanishes identically."""
    c = univariate_coefficients(system)
    if not np.any(np.abs(c) > 0.0):
        return None
    c = np.trim_zeros(c, "b")
    if c.size == 1:
        return np.array([], dtype=np.complex128)
    return np.polynomial.polynomial.polyroots(c).astype(np.complex128)


# ---------------------------------------------------------------------------
# homotopy continuation
# ---------------------------------------------------------------------------

@dataclass
class HomotopyReport:
    finite: list = field(default_factory=list)  # complex y at nonsingular finite endpoints
    suspect: list = field(default_factory=list)  # singular or failed finite endpoints
    at_infinity: int = 0
    failures: int = 0
    paths: int = 0
    complete: bool = True


def _start_points(k: int, d: int, a: np.ndarray):
    roots = np.exp(2j * np.pi * np.arange(d) / d)
    for combo in itertools.product(range(d), repeat=k):
        X = np.empty(k + 1, dtype=np.complex128)
        X[:k] = roots[list(combo)]
        X[k] = 1.0
        yield X / np.dot(a, X)


def _track(system, gamma, a, X0, max_steps, h_max):
    try:
        return kernels.track_path(system.idx, system.vals, system.k, system.degree, gamma, a, X0, max_steps, h_max)
    except Exception:  # singular linear solve inside the kernel
        return X0, 0.0, 0, kernels.PATH_STEP_FAILURE


def _affine_jac_cond(system: RectSystem, y) -> float:
    J = system.jac(np.asarray(y, dtype=np.complex128))
    try:
        return float(np.linalg.cond(J))
    except np.linalg.LinAlgError:
        return np.inf


def homotopy_roots(
    system: RectSystem,
    rng: np.random.Generator,
    max_steps: int = 4000,
    h_max: float = 0.1,
    singular_cond: float = 1e9,
) -> HomotopyReport:
    """Track all ``d^k`` paths of a total-degree homotopy.

    Endpoints are sorted into nonsingular finite roots, points at infinity
    and suspects (singular or failed finite endpoints). ``complete`` holds
    when there are no suspects and no two nonsingular paths share an endpoint;
    with a random ``gamma`` every isolated root is then reached with
    probability one.
    """
    k, d = system.k, system.degree
    theta = rng.uniform(0.0, 2.0 * np.pi)
    gamma = np.exp(1j * theta)
    a = rng.normal(size=k + 1) + 1j * rng.normal(size=k + 1)
    rep = HomotopyReport()
    starts = list(_start_points(k, d, a))
    rep.paths = len(starts)

    def run(X0, hm):
        X, t, steps, status = _track(system, gamma, a, X0, max_steps, hm)
        lead = abs(X[k])
        size = float(np.linalg.norm(X))
        if not np.all(np.isfinite(X)):
            return "fail", None
        if lead <= 1e-8 * max(size, 1e-300):
            return "inf", None
        y = X[:k] / X[k]
        if status != kernels.PATH_OK or t < 1.0:
            if t < 1.0 - 1e-3:
                return "fail", y
            if lead <= 1e-4 * size:
                return "inf", None
            return "suspect", y
        if _affine_jac_cond(system, y) > singular_cond:
            if lead <= 1e-4 * size:
                return "inf", None
            return "suspect", y
        return "ok", y

    outcomes = [run(X0, h_max) for X0 in starts]
    finite_ids = [i for i, (kind, _) in enumerate(outcomes) if kind == "ok"]

    def duplicates(ids):
        bad = set()
        for i, j in itertools.combinations(ids, 2):
            yi, yj = outcomes[i][1], outcomes[j][1]
            if np.max(np.abs(yi - yj)) <= 1e-7 * (1.0 + float(np.max(np.abs(yi)))):
                bad.update((i, j))
        return bad

    bad = duplicates(finite_ids)
    if bad:
        for i in bad:
            outcomes[i] = run(starts[i], h_max / 8.0)
        finite_ids = [i for i, (kind, _) in enumerate(outcomes) if kind == "ok"]
        if duplicates(finite_ids):
            rep.complete = False

    for kind, y in outcomes:
        if kind == "ok":
            rep.finite.append(y)
        elif kind == "inf":
            rep.at_infinity += 1
        elif kind == "suspect":
            rep.suspect.append(y)
        else:
            rep.failures += 1
            rep.complete = False
    if rep.suspect and rep.complete:
        # Singular endpoints are roots only if the solution set is finite.
        rep.complete = is_zero_dimensional(system)
    return rep


def is_zero_dimensional(system: RectSystem, max_vars: int = 4) -> bool:
    """Exact test (Groebner basis over the rationals) that the affine system
    has finitely many complex solutions. Floats convert to their exact binary
    rational values. Returns False when the system is too large to try.
    """
    import sympy

    k = system.k
    if k > max_vars:
        return False
    gens = sympy.symbols(f"y0:{k}")
    polys = [sympy.Integer(0)] * k
    for row, v in zip(system.idx, system.vals):
        term = sympy.Rational(float(v))
        for c in row[1:]:
            if c < k:
                term *= gens[c]
        polys[row[0]] += term
    polys = [sympy.expand(p) for p in polys]
    if any(p == 0 for p in polys):
        return False
    basis = sympy.groebner(polys, *gens, order="grevlex", domain="QQ")
    if list(basis) == [1]:
        return True
    return bool(basis.is_zero_dimensional)


def real_candidates(points, rel_tol: float = 1e-6):
    """Real parts of complex points whose imaginary part is negligible."""
    out = []
    for y in points:
        y = np.asarray(y)
        if np.max(np.abs(y.imag)) <= rel_tol * (1.0 + float(np.max(np.abs(y)))):
            out.append(y.real.copy())
    return out
