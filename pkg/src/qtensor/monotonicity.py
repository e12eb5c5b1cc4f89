"""Monotonicity and P-type properties of ``F(x) = A x^{m-1} + q`` on the orthant.

For a pair ``(x, y)`` each property is a single inequality, so a violating
pair is a certificate. Weaker violations carry over literally: a
pseudo-monotone violation has ``(F(x)-F(y)).(x-y) < 0``, a P0 violation makes
every product negative, and so on, which keeps the verdict table ordered

    strongly monotone => strictly monotone => monotone => pseudo-monotone
    uniformly P       => P function        => P0 function
    strictly monotone => P function,  monotone => P0 function

Nothing here claims membership from a finite sample; strong and uniform
variants report the smallest modulus seen, in the Euclidean norm.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .engine import DEFAULT_SEED, TcpInstance
from .oracles import (
    NO_COUNTEREXAMPLE,
    NON_MEMBER,
    ClassVerdict,
    OracleOptions,
    Witness,
    falsify_p,
    p_value,
)
from .tensor import Tensor

PROPERTIES = (
    "pseudo-monotone",
    "monotone",
    "strictly-monotone",
    "strongly-monotone",
    "p0-function",
    "p-function",
    "uniformly-p-function",
)

# stronger property -> properties it implies
IMPLIES = {
    "strongly-monotone": ("strictly-monotone", "uniformly-p-function"),
    "strictly-monotone": ("monotone", "p-function"),
    "monotone": ("pseudo-monotone", "p0-function"),
    "uniformly-p-function": ("p-function",),
    "p-function": ("p0-function",),
}


@dataclass
class MonotonicityOptions:
    tol: float = 1e-9
    zero_tol: float = 1e-12
    radius: float = 4.0
    random_pairs: int = 4096
    scales: tuple = (0.25, 0.5, 1.0, 2.0)
    seed: int = DEFAULT_SEED


@dataclass
class PairCheck:
    property: str
    x: np.ndarray
    y: np.ndarray
    lhs: float
    rhs: float
    violated: bool

    @property
    def modulus(self) -> float | None:
        """``lhs / ||x - y||^2`` for the strong and uniform variants."""
        if self.property in ("strongly-monotone", "uniformly-p-function"):
            return self.lhs / self.rhs
        return None

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "pair": {"x": [float(v) for v in self.x], "y": [float(v) for v in self.y]},
            "lhs": self.lhs,
            "rhs": self.rhs,
            "violated": self.violated,
        }


def _check_property(prop: str) -> str:
    if prop not in PROPERTIES:
        raise ValueError(f"unknown property {prop!r}; expected one of {', '.join(PROPERTIES)}")
    return prop


def F(inst: TcpInstance, x) -> np.ndarray:
    return inst.A.contract(np.asarray(x, dtype=np.float64)) + inst.q


def _batch_F(inst: TcpInstance, X: np.ndarray) -> np.ndarray:
    A = inst.A
    return kernels.batch_contract(A.idx, A.vals, np.ascontiguousarray(X), A.dim) + inst.q[None, :]


def _sides(prop, X, Y, FX, FY):
    """Vectorised ``(lhs, rhs)`` for rows of pairs."""
    D = X - Y
    if prop == "pseudo-monotone":
        return np.einsum("si,si->s", D, FY), np.einsum("si,si->s", D, FX)
    prod = D * (FX - FY)
    if prop in ("monotone", "strictly-monotone"):
        return prod.sum(axis=1), np.zeros(len(D))
    if prop == "strongly-monotone":
        return prod.sum(axis=1), np.einsum("si,si->s", D, D)
    if prop == "p0-function":
        masked = np.where(D != 0, prod, -np.inf)
        return masked.max(axis=1), np.zeros(len(D))
    if prop == "p-function":
        return prod.max(axis=1), np.zeros(len(D))
    return prod.max(axis=1), np.einsum("si,si->s", D, D)


def _violated(prop, lhs, rhs, tol, zero_tol):
    if prop == "pseudo-monotone":
        return (lhs >= 0) & (rhs < -tol)
    if prop in ("monotone", "p0-function"):
        return lhs < -tol
    return lhs <= zero_tol


def check_pair(inst: TcpInstance, x, y, prop: str, opts: MonotonicityOptions | None = None) -> PairCheck:
    """Evaluate the defining inequality of ``prop`` on one pair."""
    opts = opts or MonotonicityOptions()
    _check_property(prop)
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    y = np.asarray(y, dtype=np.float64).reshape(1, -1)
    if x.shape != y.shape or x.shape[1] != inst.n:
        raise ValueError(f"pair shapes {x.shape[1:]} and {y.shape[1:]} do not match dimension {inst.n}")
    if np.array_equal(x, y):
        raise ValueError("the pair must consist of distinct vectors")
    FX = F(inst, x[0])[None, :]
    FY = F(inst, y[0])[None, :]
    lhs, rhs = _sides(prop, x, y, FX, FY)
    bad = bool(_violated(prop, lhs, rhs, opts.tol, opts.zero_tol)[0])
    return PairCheck(prop, x[0].copy(), y[0].copy(), float(lhs[0]) + 0.0, float(rhs[0]) + 0.0, bad)


def structured_pairs(n: int, scales=(0.25, 0.5, 1.0, 2.0)):
    """Coordinate pairs ``(e_i, s e_j)``, ``(e, s e_j)`` and pairs against 0."""
    I = np.eye(n)
    e = np.ones(n)
    for s in scales:
        for i, j in itertools.permutations(range(n), 2):
            yield I[i], s * I[j]
        for j in range(n):
            yield e, s * I[j]
    for i in range(n):
        yield I[i], np.zeros(n)
        for s in scales:
            if s != 1.0:
                yield I[i], s * I[i]
    yield e, np.zeros(n)
    for s in scales:
        if s != 1.0:
            yield e, s * e


def pair_batch(n: int, opts: MonotonicityOptions, extra=()):
    X, Y = [], []
    for x, y in itertools.chain(extra, structured_pairs(n, opts.scales)):
        X.append(x)
        Y.append(y)
    rng = np.random.default_rng(opts.seed)
    R = rng.uniform(0.0, opts.radius, size=(2, opts.random_pairs, n))
    X = np.vstack([np.array(X).reshape(-1, n), R[0]])
    Y = np.vstack([np.array(Y).reshape(-1, n), R[1]])
    keep = np.any(X != Y, axis=1)
    return X[keep], Y[keep]


@dataclass
class FalsifyReport:
    verdict: ClassVerdict
    pairs_checked: int
    modulus_inf: float | None = None
    extra: dict = field(default_factory=dict)


def falsify(inst: TcpInstance, prop: str, opts: MonotonicityOptions | None = None, extra_pairs=()) -> ClassVerdict:
    """First violating pair in a fixed order (structured, then seeded random)."""
    return falsify_report(inst, prop, opts, extra_pairs).verdict


def falsify_report(inst: TcpInstance, prop: str, opts: MonotonicityOptions | None = None, extra_pairs=()) -> FalsifyReport:
    opts = opts or MonotonicityOptions()
    _check_property(prop)
    X, Y = pair_batch(inst.n, opts, extra_pairs)
    FX, FY = _batch_F(inst, X), _batch_F(inst, Y)
    lhs, rhs = _sides(prop, X, Y, FX, FY)
    bad = _violated(prop, lhs, rhs, opts.tol, opts.zero_tol)
    modulus = None
    if prop in ("strongly-monotone", "uniformly-p-function"):
        modulus = float(np.min(lhs / rhs))
    for k in np.flatnonzero(bad):
        # Re-evaluate on the scalar path; the batched sum order may differ.
        pc = check_pair(inst, X[k], Y[k], prop, opts)
        if not pc.violated:
            continue
        k = int(k)
        w = Witness(
            "vector_pair",
            {"x": pc.x, "y": pc.y, "lhs": pc.lhs, "rhs": pc.rhs},
            prop,
            abs(pc.rhs) if prop == "pseudo-monotone" else abs(pc.lhs),
        )
        v = ClassVerdict(prop, NON_MEMBER, w, True, [], note=f"pair {k} of {len(X)}")
        return FalsifyReport(v, k + 1, modulus)
    note = f"{len(X)} pairs in [0, {opts.radius}]^{inst.n}, seed {opts.seed}"
    if modulus is not None:
        note += f"; smallest modulus seen {modulus:.6g}"
    return FalsifyReport(ClassVerdict(prop, NO_COUNTEREXAMPLE, None, False, [], note=note), len(X), modulus)


def replay_pair(inst: TcpInstance, witness: Witness, opts: MonotonicityOptions | None = None) -> bool:
    p = witness.payload
    return check_pair(inst, p["x"], p["y"], witness.violated_condition, opts).violated


def falsify_all(inst: TcpInstance, opts: MonotonicityOptions | None = None) -> dict:
    return {p: falsify(inst, p, opts) for p in PROPERTIES}


def ladder_audit(verdicts: dict) -> list:
    """A certified violation of a weaker property must show up for every
    stronger one searched on the same pair set."""
    out = []
    for strong, weaker in IMPLIES.items():
        for weak in weaker:
            vs, vw = verdicts.get(strong), verdicts.get(weak)
            if vs is None or vw is None:
                continue
            if vw.verdict == NON_MEMBER and vs.verdict != NON_MEMBER:
                out.append(f"{weak} violated but no violation recorded for {strong}")
    return out


def p_function_implies_r_probe(A: Tensor, opts: MonotonicityOptions | None = None, oracle_opts: OracleOptions | None = None) -> dict:
    """Cross-check the chain "F = A x^{m-1} is a P function => A is P on the orthant".

    The pair set includes ``(x, 0)`` for sampled ``x >= 0``; for such a pair
    the P-function inequality is exactly ``max_i x_i (A x^{m-1})_i > 0``. If
    the P-function search finds nothing, no sampled x may violate the
    P-tensor inequality, otherwise the report flags an inconsistency.
    """
    opts = opts or MonotonicityOptions()
    inst = TcpInstance(A, np.zeros(A.dim))
    rng = np.random.default_rng(opts.seed + 1)
    samples = np.vstack([np.eye(A.dim), np.ones((1, A.dim)), rng.uniform(0.0, opts.radius, size=(256, A.dim))])
    zero = np.zeros(A.dim)
    pf = falsify(inst, "p-function", opts, extra_pairs=[(x, zero) for x in samples])
    orthant_hits = [x for x in samples if p_value(A, x) <= opts.zero_tol]
    consistent = not (pf.verdict == NO_COUNTEREXAMPLE and orthant_hits)
    ptensor = falsify_p(A, oracle_opts)
    return {
        "p_function": pf.to_dict(),
        "p_tensor": ptensor.to_dict(),
        "orthant_p_violations": len(orthant_hits),
        "consistent": consistent,
    }
