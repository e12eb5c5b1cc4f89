"""Batched multi-start searches used by the class falsifiers.

Each search runs face by face: for a support J the variables are the
components of x on J, so every quantity reduces to the principal sub-tensor
``A_J``. Three objectives are supported:

``"sp"``   ``max_k (A_J x^{m-1})_k`` on the open simplex of J (semi-positivity)
``"cop"``  ``A_J x^m`` on the open simplex of J (copositivity)
``"p"``    ``max_k x_k (A_J x^{m-1})_k`` on the unit sphere of R^J (P / P0)

The nonsmooth max is replaced by a log-sum-exp with a shrinking temperature
and minimised by Adam in unconstrained coordinates (softmax for the simplex,
radial normalisation for the sphere). The exact objective is tracked at every
step, so the reported value is always a true evaluation at the reported point.
Structured candidates (face barycentres, sign vectors) are scored first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .tensor import Tensor, principal_subtensor

KINDS = ("sp", "cop", "p")


@dataclass
class SearchOptions:
    starts: int = 64
    steps: int = 300
    lr: float = 0.05
    seed: int = 0x5EED
    max_full_faces: int = 12  # enumerate every face when n is at most this
    sampled_faces: int = 2048
    sign_vectors_up_to: int = 8  # all {-1,1}^J candidates on faces up to this size


@dataclass
class SearchHit:
    value: float
    x: np.ndarray  # full-length vector, zero off the face
    face: tuple[int, ...]
    evaluations: int


def faces(n: int, opts: SearchOptions, rng: np.random.Generator):
    """All nonempty supports by size then lex, or a seeded sample for large n."""
    if n <= opts.max_full_faces:
        for r in range(1, n + 1):
            yield from itertools.combinations(range(n), r)
        return
    seen = set()
    for i in range(n):
        seen.add((i,))
        yield (i,)
    full = tuple(range(n))
    seen.add(full)
    yield full
    for _ in range(opts.sampled_faces):
        r = int(rng.integers(2, n))
        J = tuple(sorted(int(v) for v in rng.choice(n, size=r, replace=False)))
        if J not in seen:
            seen.add(J)
            yield J


def exact_values(sub: Tensor, kind: str, X: np.ndarray) -> np.ndarray:
    """Exact objective for each row of ``X`` (already on the face)."""
    G = kernels.batch_contract(sub.idx, sub.vals, X, sub.dim)
    if kind == "sp":
        return G.max(axis=1)
    if kind == "cop":
        return np.einsum("si,si->s", X, G)
    return (X * G).max(axis=1)


def _smooth_grad(sub: Tensor, kind: str, X: np.ndarray, mu: float):
    """Exact values and the gradient of the smoothed objective w.r.t. x."""
    r, m = sub.dim, sub.order
    G = kernels.batch_contract(sub.idx, sub.vals, X, r)
    if kind == "cop":
        return np.einsum("si,si->s", X, G), m * G
    Jac = kernels.batch_jacobian(sub.idx, sub.vals, X, r, r)
    V = G if kind == "sp" else X * G
    exact = V.max(axis=1)
    Z = (V - exact[:, None]) / mu
    P = np.exp(Z)
    P /= P.sum(axis=1, keepdims=True)
    if kind == "sp":
        grad = np.einsum("si,sij->sj", P, Jac)
    else:
        grad = P * G + np.einsum("si,sij->sj", P * X, Jac)
    return exact, grad


def _to_face(theta: np.ndarray, kind: str) -> np.ndarray:
    if kind == "p":
        return theta / np.linalg.norm(theta, axis=1, keepdims=True)
    z = theta - theta.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _pullback(theta, X, grad, kind):
    inner = np.einsum("sj,sj->s", X, grad)[:, None]
    if kind == "p":
        return (grad - inner * X) / np.linalg.norm(theta, axis=1, keepdims=True)
    return X * (grad - inner)


def structured_candidates(r: int, kind: str, opts: SearchOptions, rng) -> np.ndarray:
    """Face barycentre for simplex kinds; sign vectors for the sphere."""
    if kind != "p":
        return np.full((1, r), 1.0 / r)
    if r <= opts.sign_vectors_up_to:
        S = np.array(list(itertools.product((-1.0, 1.0), repeat=r)))
    else:
        S = rng.choice((-1.0, 1.0), size=(2 * opts.starts, r))
    return S / np.sqrt(r)


def optimise_face(sub: Tensor, kind: str, opts: SearchOptions, rng: np.random.Generator):
    """Best ``(value, x_face, evaluations)`` on one face."""
    r = sub.dim
    cand = structured_candidates(r, kind, opts, rng)
    vals = exact_values(sub, kind, cand)
    b = int(np.argmin(vals))
    best_v, best_x = float(vals[b]), cand[b].copy()
    evals = cand.shape[0]
    if r == 1:
        # A single variable on the simplex is a point; on the sphere it is +-1.
        return best_v, best_x, evals
    if kind == "p":
        theta = rng.normal(size=(opts.starts, r))
    else:
        theta = rng.normal(scale=2.0, size=(opts.starts, r))
    mom = np.zeros_like(theta)
    sec = np.zeros_like(theta)
    scale = max(1e-12, float(np.max(np.abs(sub.vals))) if sub.nnz else 1.0)
    for t in range(1, opts.steps + 1):
        X = _to_face(theta, kind)
        mu = scale * max(0.05 * 0.97 ** t, 1e-7)
        exact, grad = _smooth_grad(sub, kind, X, mu)
        evals += X.shape[0]
        b = int(np.argmin(exact))
        if exact[b] < best_v:
            best_v, best_x = float(exact[b]), X[b].copy()
        g = _pullback(theta, X, grad, kind)
        mom = 0.9 * mom + 0.1 * g
        sec = 0.999 * sec + 0.001 * g * g
        step = opts.lr * (mom / (1 - 0.9 ** t)) / (np.sqrt(sec / (1 - 0.999 ** t)) + 1e-12)
        theta = theta - step
        if kind == "p":
            theta = _to_face(theta, kind)
    X = _to_face(theta, kind)
    exact = exact_values(sub, kind, X)
    b = int(np.argmin(exact))
    if exact[b] < best_v:
        best_v, best_x = float(exact[b]), X[b].copy()
    return best_v, best_x, evals + X.shape[0]


def search(A: Tensor, kind: str, stop, opts: SearchOptions | None = None, face_filter=None) -> tuple[SearchHit | None, int]:
    """Scan faces in order; return the best hit of the first face where
    ``stop(value, face)`` holds, and the number of faces visited. When no face
    qualifies the overall minimiser is returned instead.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown search kind {kind!r}")
    opts = opts or SearchOptions()
    rng = np.random.default_rng(opts.seed)
    n = A.dim
    overall = None
    count = 0
    total = 0
    for J in faces(n, opts, rng):
        if face_filter is not None and not face_filter(J):
            continue
        count += 1
        sub = principal_subtensor(A, J)
        v, xf, ev = optimise_face(sub, kind, opts, rng)
        total += ev
        x = np.zeros(n)
        x[list(J)] = xf
        hit = SearchHit(v, x, tuple(J), total)
        if stop(v, tuple(J)):
            return hit, count
        if overall is None or v < overall.value:
            overall = hit
    if overall is not None:
        overall.evaluations = total
    return overall, count
