"""Membership oracles for the structured tensor classes.

Every oracle returns a three-valued :class:`ClassVerdict`:

* ``member`` only from an exact argument: a cited theorem, a definitional
  observation (e.g. a nonnegative tensor is semi-positive), or a complete
  support enumeration;
* ``non_member`` only with a :class:`Witness` that :func:`replay` confirms
  against the raw definition;
* ``no_counterexample_found`` when a search came back empty.

Tolerances: a violated strict inequality (``< 0``) must be violated by more
than ``tol``; a violated non-strict one (``<= 0``, as in the P-tensor,
strictly semi-positive and strictly copositive definitions) is accepted up to
``zero_tol`` of rounding, measured at a normalised witness (unit sphere or
unit simplex).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import search as _search
from .engine import (
    DEFAULT_SEED,
    EnumerationCapExceeded,
    RSystemWitness,
    SolverOptions,
    TcpInstance,
    solve_enumerate,
)
from .tensor import Tensor, diagonal, is_nonnegative, is_symmetric

MEMBER = "member"
NON_MEMBER = "non_member"
NO_COUNTEREXAMPLE = "no_counterexample_found"

CLASSES = (
    "R0",
    "R",
    "Q",
    "P",
    "P0",
    "semi_positive",
    "strictly_semi_positive",
    "copositive",
    "strictly_copositive",
)

# Short statements of the results the exact paths rely on.
THEOREMS = {
    "R0-iff-TCP(0)-trivial": "A is R0 iff TCP(0, A) has only the zero solution",
    "R-iff-R0-and-TCP(e)-trivial": "A is R iff A is R0 and TCP(e, A) has only the zero solution",
    "R-implies-Q": "every R-tensor is a Q-tensor",
    "semi-positive-R0-implies-R": "a semi-positive R0-tensor is an R-tensor",
    "strictly-semi-positive-implies-R": "strictly semi-positive tensors are R- and R0-tensors",
    "nonnegative-Q-iff-positive-diagonal": "a nonnegative A is Q iff every diagonal entry is positive",
    "nonnegative-is-semi-positive": "A >= 0 gives A x^{m-1} >= 0 for x >= 0",
    "nonnegative-positive-diagonal-is-strictly-semi-positive": "A >= 0 with a_{k..k} > 0 gives (A x^{m-1})_k >= a_{k..k} x_k^{m-1} > 0",
    "nonnegative-is-copositive": "A >= 0 gives A x^m >= 0 for x >= 0",
    "symmetric-nonnegative-strictly-copositive-iff-positive-diagonal": "a symmetric nonnegative A is strictly copositive iff its diagonal is positive",
    "copositive-diagonal-necessary": "(strictly) copositive forces a_{i..i} >= 0 (> 0)",
}


class NotSymmetricError(ValueError):
    pass


@dataclass
class Witness:
    kind: str  # "vector" | "vector_pair" | "rsystem" | "q_vector"
    payload: dict
    violated_condition: str
    magnitude: float = 0.0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "payload": {k: _jsonable(v) for k, v in self.payload.items()},
            "violated_condition": self.violated_condition,
            "magnitude": float(self.magnitude),
        }


@dataclass
class TheoremCitation:
    name: str
    detail: str = ""

    @property
    def statement(self) -> str:
        return THEOREMS.get(self.name, "")

    def to_dict(self) -> dict:
        return {"kind": "theorem", "name": self.name, "statement": self.statement, "detail": self.detail}


@dataclass
class EnumerationRecord:
    q: np.ndarray
    supports: int
    incomplete: list
    solutions: int

    def to_dict(self) -> dict:
        return {
            "kind": "enumeration",
            "q": _jsonable(self.q),
            "supports_checked": self.supports,
            "incomplete_supports": [[j + 1 for j in J] for J in self.incomplete],
            "solutions": self.solutions,
        }


@dataclass
class SearchRecord:
    searched: str
    faces: int
    evaluations: int
    best_value: float | None

    def to_dict(self) -> dict:
        return {
            "kind": "search",
            "searched": self.searched,
            "faces": self.faces,
            "evaluations": self.evaluations,
            "best_value": self.best_value,
        }


@dataclass
class ClassVerdict:
    class_name: str
    verdict: str
    certificate: object = None
    complete: bool = False
    citations: list = field(default_factory=list)
    note: str = ""

    @property
    def is_member(self) -> bool:
        return self.verdict == MEMBER

    @property
    def is_non_member(self) -> bool:
        return self.verdict == NON_MEMBER

    def to_dict(self) -> dict:
        cert = self.certificate.to_dict() if self.certificate is not None else None
        out = {
            "class": self.class_name,
            "verdict": self.verdict,
            "certificate": cert,
            "complete": bool(self.complete),
            "citations": list(self.citations),
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class OracleOptions:
    tol: float = 1e-9
    zero_tol: float = 1e-12
    residual_tol: float = 1e-10
    seed: int = DEFAULT_SEED
    solver: SolverOptions = field(default_factory=SolverOptions)
    search: _search.SearchOptions = field(default_factory=_search.SearchOptions)
    q_random: int = 8
    q_batch: list = field(default_factory=list)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [float(t) for t in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(t) for t in v]
    return v


def _theorem(class_name, name, detail="", complete=True, verdict=MEMBER, witness=None):
    cert = witness if witness is not None else TheoremCitation(name, detail)
    return ClassVerdict(class_name, verdict, cert, complete, [name])


# ---------------------------------------------------------------------------
# replay of witnesses against the raw definitions
# ---------------------------------------------------------------------------

def p_value(A: Tensor, x) -> float:
    """``max_i x_i (A x^{m-1})_i``; a P-violation when ``<= 0``."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.max(x * A.contract(x)))


def p0_value(A: Tensor, x) -> float:
    """``max_{i: x_i != 0} x_i (A x^{m-1})_i``; a P0-violation when ``< 0``."""
    x = np.asarray(x, dtype=np.float64)
    nz = x != 0
    return float(np.max((x * A.contract(x))[nz]))


def sp_value(A: Tensor, x) -> float:
    """``max_{k: x_k > 0} (A x^{m-1})_k`` for ``x >= 0``."""
    x = np.asarray(x, dtype=np.float64)
    pos = x > 0
    return float(np.max(A.contract(x)[pos]))


def rsystem_residual(A: Tensor, x, t: float) -> float:
    """How far ``(x, t)`` is from solving the R-system."""
    return RSystemWitness(np.asarray(x, dtype=np.float64), float(t)).residual(A)


def replay(A: Tensor, witness: Witness, opts: OracleOptions | None = None) -> bool:
    """True when the witness violates the definition it names."""
    opts = opts or OracleOptions()
    p = witness.payload
    cond = witness.violated_condition
    if witness.kind == "rsystem":
        x = np.asarray(p["x"], dtype=np.float64)
        t = float(p["t"])
        if np.any(x < 0) or not np.any(x > 0) or t < 0:
            return False
        if cond == "R0" and t != 0.0:
            return False
        return rsystem_residual(A, x, t) <= opts.residual_tol * (1.0 + float(np.max(x)) ** (A.order - 1))
    if witness.kind == "q_vector":
        res = solve_enumerate(TcpInstance(A, np.asarray(p["q"], dtype=np.float64)), opts.solver)
        return res.certified_empty
    x = np.asarray(p["x"], dtype=np.float64)
    if not np.any(x != 0):
        return False
    if cond == "P":
        return p_value(A, x) <= opts.zero_tol
    if cond == "P0":
        return p0_value(A, x) < -opts.tol
    if cond in ("semi_positive", "strictly_semi_positive", "copositive", "strictly_copositive"):
        if np.any(x < 0):
            return False
        if cond == "semi_positive":
            return sp_value(A, x) < -opts.tol
        if cond == "strictly_semi_positive":
            return sp_value(A, x) <= opts.zero_tol
        v = A.polyval(x)
        return v < -opts.tol if cond == "copositive" else v <= opts.zero_tol
    raise ValueError(f"unknown violated condition {cond!r}")


# ---------------------------------------------------------------------------
# R0 / R
# ---------------------------------------------------------------------------

def _enum_record(res) -> EnumerationRecord:
    return EnumerationRecord(res.instance.q.copy(), len(res.supports), res.incomplete_supports, len(res.solutions))


def _pick_witness(sols):
    """Largest support first, then enumeration order."""
    return max(enumerate(sols), key=lambda p: (len(p[1].support), -p[0]))[1]


def _normalise_ray(x: np.ndarray, m: int):
    """Scale so the first positive component is 1; returns (x, lambda)."""
    lead = x[np.flatnonzero(x > 0)[0]]
    lam = 1.0 / lead
    return x * lam, lam


def check_r0(A: Tensor, opts: OracleOptions | None = None) -> ClassVerdict:
    opts = opts or OracleOptions()
    res = solve_enumerate(TcpInstance(A, np.zeros(A.dim)), opts.solver)
    nz = res.nonzero()
    if nz:
        sol = _pick_witness(nz)
        x, _ = _normalise_ray(sol.x, A.order)
        w = Witness("rsystem", {"x": x, "t": 0.0}, "R0", rsystem_residual(A, x, 0.0))
        return ClassVerdict("R0", NON_MEMBER, w, True, ["R0-iff-TCP(0)-trivial"])
    if res.complete:
        v = ClassVerdict("R0", MEMBER, _enum_record(res), True, ["R0-iff-TCP(0)-trivial"])
        return v
    return ClassVerdict("R0", NO_COUNTEREXAMPLE, _enum_record(res), False, note="support enumeration incomplete")


def rsystem_from_e_solution(x: np.ndarray, m: int):
    """A nonzero solution of TCP(e, A) gives ``(lambda x, lambda^{m-1})`` solving the R-system."""
    xn, lam = _normalise_ray(x, m)
    return xn, lam ** (m - 1)


def check_r(A: Tensor, opts: OracleOptions | None = None, r0: ClassVerdict | None = None) -> ClassVerdict:
    opts = opts or OracleOptions()
    r0 = r0 or check_r0(A, opts)
    if r0.is_non_member:
        # t = 0 is allowed in the R-system, so the same point witnesses both.
        return ClassVerdict("R", NON_MEMBER, r0.certificate, True, ["R0-iff-TCP(0)-trivial"], note="R0 witness")
    if r0.is_member and is_nonnegative(A):
        return ClassVerdict(
            "R", MEMBER, TheoremCitation("semi-positive-R0-implies-R", "A is nonnegative, hence semi-positive"),
            True, ["semi-positive-R0-implies-R", "nonnegative-is-semi-positive"],
        )
    res = solve_enumerate(TcpInstance(A, np.ones(A.dim)), opts.solver)
    nz = res.nonzero()
    if nz:
        sol = _pick_witness(nz)
        x, t = rsystem_from_e_solution(sol.x, A.order)
        w = Witness("rsystem", {"x": x, "t": t}, "R", rsystem_residual(A, x, t))
        return ClassVerdict("R", NON_MEMBER, w, True, ["R-iff-R0-and-TCP(e)-trivial"])
    if res.complete and r0.is_member:
        return ClassVerdict("R", MEMBER, _enum_record(res), True, ["R-iff-R0-and-TCP(e)-trivial"])
    return ClassVerdict("R", NO_COUNTEREXAMPLE, _enum_record(res), False, note="support enumeration incomplete")


# ---------------------------------------------------------------------------
# Q
# ---------------------------------------------------------------------------

def proof_q(A: Tensor, k: int) -> np.ndarray:
    """``q_k = -1`` and ``q_i = 1`` elsewhere: unsolvable when A >= 0 and a_{k..k} = 0."""
    q = np.ones(A.dim)
    q[k] = -1.0
    return q


def q_battery(n: int, opts: OracleOptions) -> list:
    qs = [-np.ones(n), np.ones(n)]
    for k in range(n):
        v = np.zeros(n)
        v[k] = -1.0
        qs.append(v)
    rng = np.random.default_rng(opts.seed)
    qs.extend(rng.uniform(-2.0, 2.0, size=(opts.q_random, n)))
    qs.extend(np.asarray(q, dtype=np.float64) for q in opts.q_batch)
    return qs


def check_q(A: Tensor, opts: OracleOptions | None = None, r: ClassVerdict | None = None) -> ClassVerdict:
    opts = opts or OracleOptions()
    n = A.dim
    if is_nonnegative(A):
        d = diagonal(A)
        name = "nonnegative-Q-iff-positive-diagonal"
        if np.all(d > 0):
            return _theorem("Q", name, "A >= 0 and every diagonal entry is positive")
        k = int(np.flatnonzero(d <= 0)[0])
        q = proof_q(A, k)
        payload = {"q": q, "zero_diagonal_index": k + 1}
        complete = True
        if n <= opts.solver.cap:
            res = solve_enumerate(TcpInstance(A, q), opts.solver)
            payload["certified_empty"] = res.certified_empty
            complete = res.complete
        w = Witness("q_vector", payload, "Q", 0.0)
        return ClassVerdict("Q", NON_MEMBER, w, complete, [name])
    if n > opts.solver.cap:
        return ClassVerdict("Q", NO_COUNTEREXAMPLE, None, False, note="dimension exceeds the enumeration cap")
    r = r or check_r(A, opts)
    if r.is_member:
        return ClassVerdict("Q", MEMBER, TheoremCitation("R-implies-Q", "A is an R-tensor"), True, ["R-implies-Q"] + r.citations)
    tried = 0
    for q in q_battery(n, opts):
        tried += 1
        res = solve_enumerate(TcpInstance(A, q), opts.solver)
        if res.certified_empty:
            w = Witness("q_vector", {"q": q, "certified_empty": True}, "Q", 0.0)
            return ClassVerdict("Q", NON_MEMBER, w, True, [])
    return ClassVerdict("Q", NO_COUNTEREXAMPLE, None, False, note=f"{tried} q vectors all had solutions or were inconclusive")


# ---------------------------------------------------------------------------
# falsifiers
# ---------------------------------------------------------------------------

FACE_TAU = 1e-7


def _witness_candidates(x: np.ndarray):
    """The hit with components below ``FACE_TAU * max|x|`` zeroed, then the raw hit.
    Either is only reported after an exact replay."""
    tiny = np.abs(x) < FACE_TAU * float(np.max(np.abs(x)))
    if tiny.any():
        clean = np.where(tiny, 0.0, x)
        yield clean
    yield x


def _search_verdict(class_name, A, kind, stop, value_fn, cond, opts, face_filter=None, searched=""):
    hit, nfaces = _search.search(A, kind, stop, opts.search, face_filter)
    if hit is not None and stop(hit.value, hit.face):
        for x in _witness_candidates(hit.x):
            face = [int(j) + 1 for j in np.flatnonzero(x != 0)]
            w = Witness("vector", {"x": x, "face": face}, cond, max(0.0, -value_fn(A, x)))
            if replay(A, w, opts):
                return ClassVerdict(class_name, NON_MEMBER, w, True, [])
    best = None if hit is None else float(hit.value)
    rec = SearchRecord(searched or kind, nfaces, 0 if hit is None else hit.evaluations, best)
    return ClassVerdict(class_name, NO_COUNTEREXAMPLE, rec, False)


def falsify_p(A: Tensor, opts: OracleOptions | None = None) -> ClassVerdict:
    """Search the unit sphere for x != 0 with ``max_i x_i (A x^{m-1})_i <= 0``."""
    opts = opts or OracleOptions()
    n = A.dim

    def stop(v, J):
        full = v if len(J) == n else max(v, 0.0)
        return full <= opts.zero_tol

    return _search_verdict("P", A, "p", stop, p_value, "P", opts, searched="unit sphere, by support")


def falsify_p0(A: Tensor, opts: OracleOptions | None = None) -> ClassVerdict:
    """Search for x != 0 with ``x_i (A x^{m-1})_i < 0`` wherever ``x_i != 0``."""
    opts = opts or OracleOptions()
    return _search_verdict("P0", A, "p", lambda v, J: v < -opts.tol, p0_value, "P0", opts, searched="unit sphere, by support")


def falsify_semi_positive(A: Tensor, opts: OracleOptions | None = None) -> ClassVerdict:
    opts = opts or OracleOptions()
    return _search_verdict("semi_positive", A, "sp", lambda v, J: v < -opts.tol, sp_value, "semi_positive", opts, searched="simplex faces")


def falsify_strictly_semi_positive(A: Tensor, opts: OracleOptions | None = None) -> ClassVerdict:
    opts = opts or OracleOptions()
    return _search_verdict(
        "strictly_semi_positive", A, "sp", lambda v, J: v <= opts.zero_tol, sp_value, "strictly_semi_positive", opts,
        searched="simplex faces",
    )


def check_semi_positive(A: Tensor, opts: OracleOptions | None = None) -> ClassVerdict:
    if is_nonnegative(A):
        return _theorem("semi_positive", "nonnegative-is-semi-positive")
    return falsify_semi_positive(A, opts)


def check_strictly_semi_positive(A: Tensor, opts: OracleOptions | None = None) -> ClassVerdict:
    if is_nonnegative(A) and np.all(diagonal(A) > 0):
        return _theorem("strictly_semi_positive", "nonnegative-positive-diagonal-is-strictly-semi-positive")
    return falsify_strictly_semi_positive(A, opts)


def check_copositive(A: Tensor, strict: bool = False, opts: OracleOptions | None = None) -> ClassVerdict:
    opts = opts or OracleOptions()
    name = "strictly_copositive" if strict else "copositive"
    if not is_symmetric(A):
        raise NotSymmetricError("copositivity is defined for symmetric tensors; symmetrize first")
    d = diagonal(A)
    bad = np.flatnonzero(d <= opts.zero_tol) if strict else np.flatnonzero(d < -opts.tol)
    if bad.size:
        k = int(bad[0])
        x = np.zeros(A.dim)
        x[k] = 1.0
        w = Witness("vector", {"x": x, "face": [k + 1]}, name, max(0.0, -float(d[k])))
        return ClassVerdict(name, NON_MEMBER, w, True, ["copositive-diagonal-necessary"])
    if is_nonnegative(A):
        if strict:
            return _theorem(name, "symmetric-nonnegative-strictly-copositive-iff-positive-diagonal")
        return _theorem(name, "nonnegative-is-copositive")
    stop = (lambda v, J: v <= opts.zero_tol) if strict else (lambda v, J: v < -opts.tol)
    return _search_verdict(name, A, "cop", stop, lambda B, x: B.polyval(x), name, opts, searched="simplex faces")


# ---------------------------------------------------------------------------
# all classes at once
# ---------------------------------------------------------------------------

@dataclass
class ClassificationReport:
    order: int
    dim: int
    verdicts: dict
    ladder_violations: list
    skipped: dict

    @property
    def consistent(self) -> bool:
        return not self.ladder_violations

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "dim": self.dim,
            "verdicts": [v.to_dict() for v in self.verdicts.values()],
            "ladder": {"consistent": self.consistent, "violations": list(self.ladder_violations)},
            "skipped": dict(self.skipped),
        }


LADDER = (
    # (premise class, premise verdict, conclusion class, forbidden verdict)
    ("P", MEMBER, "strictly_semi_positive", NON_MEMBER),
    ("P", MEMBER, "P0", NON_MEMBER),
    ("P0", MEMBER, "semi_positive", NON_MEMBER),
    ("strictly_semi_positive", MEMBER, "semi_positive", NON_MEMBER),
    ("strictly_semi_positive", MEMBER, "R", NON_MEMBER),
    ("strictly_semi_positive", MEMBER, "R0", NON_MEMBER),
    ("R", MEMBER, "R0", NON_MEMBER),
    ("R", MEMBER, "Q", NON_MEMBER),
    ("strictly_copositive", MEMBER, "copositive", NON_MEMBER),
)


def ladder_audit(verdicts: dict, nonnegative_symmetric: bool = False) -> list:
    """Implications between classes that the verdict table must respect."""
    out = []

    def v(name):
        c = verdicts.get(name)
        return None if c is None else c.verdict

    for a, va, b, vb in LADDER:
        if v(a) == va and v(b) == vb:
            out.append(f"{a}={va} but {b}={vb}")
    if v("semi_positive") == MEMBER and v("R0") == MEMBER and v("R") == NON_MEMBER:
        out.append("semi_positive=member and R0=member but R=non_member")
    if nonnegative_symmetric:
        q, sc = v("Q"), v("strictly_copositive")
        if {q, sc} == {MEMBER, NON_MEMBER}:
            out.append(f"nonnegative symmetric tensor with Q={q} but strictly_copositive={sc}")
    return out


def classify_all(A: Tensor, opts: OracleOptions | None = None) -> ClassificationReport:
    opts = opts or OracleOptions()
    verdicts: dict = {}
    skipped: dict = {}
    try:
        r0 = check_r0(A, opts)
        verdicts["R0"] = r0
        verdicts["R"] = check_r(A, opts, r0=r0)
    except EnumerationCapExceeded as exc:
        skipped["R0"] = skipped["R"] = str(exc)
    verdicts["Q"] = check_q(A, opts, r=verdicts.get("R"))
    verdicts["P"] = falsify_p(A, opts)
    verdicts["P0"] = falsify_p0(A, opts)
    verdicts["semi_positive"] = check_semi_positive(A, opts)
    verdicts["strictly_semi_positive"] = check_strictly_semi_positive(A, opts)
    sym = is_symmetric(A)
    if sym:
        verdicts["copositive"] = check_copositive(A, False, opts)
        verdicts["strictly_copositive"] = check_copositive(A, True, opts)
    else:
        skipped["copositive"] = skipped["strictly_copositive"] = "tensor is not symmetric"
    ladder = ladder_audit(verdicts, nonnegative_symmetric=sym and is_nonnegative(A))
    return ClassificationReport(A.order, A.dim, verdicts, ladder, skipped)
