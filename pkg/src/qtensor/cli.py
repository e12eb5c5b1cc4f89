"""Command-line interface: ``qtensor {solve,classify,falsify,gen,verify}``.

Exit codes: 0 solved / member, 2 certified negative, 3 inconclusive,
1 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import generators, monotonicity, oracles
from .engine import DEFAULT_SEED, EnumerationCapExceeded, SolverOptions, TcpInstance, solve_enumerate, verify_solution
from .tensor import DimensionMismatch, Tensor, TensorFormatError, load_tensor
from .vi import ViOptions, solve_vi

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

CLASS_PROPERTIES = {
    "p": "P",
    "p0": "P0",
    "semi-positive": "semi_positive",
    "strictly-semi-positive": "strictly_semi_positive",
    "copositive": "copositive",
    "strictly-copositive": "strictly_copositive",
}


class InputError(Exception):
    pass


def parse_vector(text: str, flag: str = "--q") -> np.ndarray:
    parts = [p.strip() for p in text.split(",")]
    out = []
    for pos, p in enumerate(parts, start=1):
        try:
            out.append(float(p))
        except ValueError:
            raise InputError(f"{flag}: entry {pos} ({p!r}) is not a number") from None
    if not np.all(np.isfinite(out)):
        raise InputError(f"{flag}: entries must be finite")
    return np.array(out)


def parse_q_batch(text: str, n: int) -> tuple[int, list]:
    """``"seed:count"`` -> ``count`` vectors uniform on [-2, 2]^n."""
    try:
        seed_s, count_s = text.split(":")
        seed, count = int(seed_s), int(count_s)
    except ValueError:
        raise InputError(f"--q-batch: expected 'seed:count', got {text!r}") from None
    if count < 0:
        raise InputError("--q-batch: count must be nonnegative")
    rng = np.random.default_rng(seed)
    return seed, list(rng.uniform(-2.0, 2.0, size=(count, n)))


def _load(args) -> Tensor:
    if getattr(args, "example", None):
        try:
            return generators.paper_example(args.example, args.m, args.n)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    if not args.tensor:
        raise InputError("no tensor given: pass a tensor JSON file or --example")
    try:
        return load_tensor(args.tensor)
    except OSError as exc:
        raise InputError(f"{args.tensor}: {exc.strerror}") from None
    except TensorFormatError as exc:
        raise InputError(f"{args.tensor}: {exc}") from None


def _q(args, n: int, default=None) -> np.ndarray:
    if args.q is None:
        if default is None:
            raise InputError("--q is required")
        return default
    q = parse_vector(args.q)
    if q.shape[0] != n:
        raise InputError(f"--q: has {q.shape[0]} entries, tensor dimension is {n}")
    return q


def _solver_opts(args) -> SolverOptions:
    return SolverOptions(tol=args.tol, cap=args.cap, seed=args.seed)


def _emit(args, obj: dict, table: str) -> None:
    if args.format == "json":
        print(json.dumps(obj, indent=2))
    else:
        print(table)


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{float(t):.10g}" for t in v) + ")"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    A = _load(args)
    q = _q(args, A.dim)
    inst = TcpInstance(A, q)
    method = args.method
    note = ""
    if method == "enumerate" and A.dim > args.cap:
        method = "vi"
        note = f"dimension {A.dim} exceeds cap {args.cap}; switched to the simplex VI solver"
    if method == "vi":
        res = solve_vi(inst, ViOptions(tol=args.tol, seed=args.seed))
        obj = {"seed": args.seed, "method": "vi", "status": res.status, "complete": False, "note": note}
        obj["solutions"] = [res.solution.to_dict()] if res.success else []
        obj["best_residual"] = res.best_residual
        lines = [f"method vi, status {res.status}, seed {args.seed}"]
        if res.success:
            lines.append(f"x = {_fmt_vec(res.solution.x)}  residual {res.solution.residual:.3g}")
        _emit(args, obj, "\n".join(lines))
        return EXIT_OK if res.success else EXIT_INCONCLUSIVE
    res = solve_enumerate(inst, _solver_opts(args))
    sols = [s.to_dict() for s in res.solutions]
    obj = {
        "seed": args.seed,
        "method": "enumerate",
        "complete": res.complete,
        "certified_empty": res.certified_empty,
        "incomplete_supports": [[j + 1 for j in J] for J in res.incomplete_supports],
        "solutions": sols,
    }
    lines = [f"method enumerate, complete {res.complete}, seed {args.seed}, {len(sols)} solution(s)"]
    for s in res.solutions:
        lines.append(f"x = {_fmt_vec(s.x)}  support {[j + 1 for j in s.support]}  residual {s.residual:.3g}")
    if res.certified_empty:
        lines.append("no solution: every support was ruled out")
    _emit(args, obj, "\n".join(lines))
    if res.solutions:
        return EXIT_OK
    return EXIT_NEGATIVE if res.certified_empty else EXIT_INCONCLUSIVE


def _oracle_opts(args, n: int) -> oracles.OracleOptions:
    opts = oracles.OracleOptions(tol=args.tol, seed=args.seed, solver=_solver_opts(args))
    opts.search.seed = args.seed
    if getattr(args, "q_batch", None):
        _, qs = parse_q_batch(args.q_batch, n)
        opts.q_batch = qs
    return opts


def cmd_classify(args) -> int:
    A = _load(args)
    opts = _oracle_opts(args, A.dim)
    rep = oracles.classify_all(A, opts)
    obj = rep.to_dict()
    obj["seed"] = args.seed
    if args.q_batch:
        obj["q_batch"] = args.q_batch
    lines = [f"{'class':<24}{'verdict':<26}via"]
    for name, v in rep.verdicts.items():
        via = ", ".join(v.citations) if v.citations else (v.certificate.to_dict()["kind"] if v.certificate else "-")
        lines.append(f"{name:<24}{v.verdict:<26}{via}")
    for name, why in rep.skipped.items():
        lines.append(f"{name:<24}{'skipped':<26}{why}")
    lines.append("ladder: consistent" if rep.consistent else "ladder: " + "; ".join(rep.ladder_violations))
    lines.append(f"seed {args.seed}")
    _emit(args, obj, "\n".join(lines))
    return EXIT_OK if rep.consistent else EXIT_INCONCLUSIVE


def cmd_falsify(args) -> int:
    A = _load(args)
    prop = args.property.strip().lower()
    if prop in CLASS_PROPERTIES:
        opts = _oracle_opts(args, A.dim)
        name = CLASS_PROPERTIES[prop]
        if name in ("copositive", "strictly_copositive"):
            try:
                v = oracles.check_copositive(A, strict=name == "strictly_copositive", opts=opts)
            except oracles.NotSymmetricError as exc:
                raise InputError(str(exc)) from None
        else:
            fn = {
                "P": oracles.falsify_p,
                "P0": oracles.falsify_p0,
                "semi_positive": oracles.falsify_semi_positive,
                "strictly_semi_positive": oracles.falsify_strictly_semi_positive,
            }[name]
            v = fn(A, opts)
    elif prop in monotonicity.PROPERTIES:
        q = _q(args, A.dim, default=np.zeros(A.dim))
        v = monotonicity.falsify(TcpInstance(A, q), prop, monotonicity.MonotonicityOptions(tol=args.tol, seed=args.seed))
    else:
        known = ", ".join(sorted(CLASS_PROPERTIES) + list(monotonicity.PROPERTIES))
        raise InputError(f"--property: unknown property {args.property!r}; expected one of {known}")
    obj = v.to_dict()
    obj["seed"] = args.seed
    if v.is_non_member:
        p = v.certificate.payload
        if "y" in p:
            obj["pair"] = {"x": [float(t) for t in p["x"]], "y": [float(t) for t in p["y"]]}
            table = f"{prop}: violated by x = {_fmt_vec(p['x'])}, y = {_fmt_vec(p['y'])}"
        else:
            table = f"{prop}: violated by x = {_fmt_vec(p['x'])}"
    else:
        detail = v.note or (json.dumps(v.certificate.to_dict()) if v.certificate else "")
        table = f"{prop}: {v.verdict.replace('_', ' ')} ({detail})" if v.verdict != "member" else f"{prop}: member ({', '.join(v.citations)})"
    _emit(args, obj, table + f"\nseed {args.seed}")
    if v.is_non_member:
        return EXIT_NEGATIVE
    return EXIT_OK if v.is_member else EXIT_INCONCLUSIVE


def cmd_gen(args) -> int:
    try:
        if args.spec:
            try:
                spec = generators.GenSpec.from_dict(json.loads(args.spec))
            except (json.JSONDecodeError, TypeError) as exc:
                raise InputError(f"--spec: {exc}") from None
            A = generators.random(spec)
            seed = spec.seed
        elif args.example:
            A = generators.paper_example(args.example, args.m, args.n)
            seed = None
        elif args.random:
            kind = args.random if args.random.startswith("random_") else "random_" + args.random
            spec = generators.GenSpec(kind, m=args.m or 3, n=args.n or 2, seed=args.seed, density=args.density)
            A = generators.random(spec)
            seed = args.seed
        else:
            raise InputError("gen: pass --example, --random or --spec")
    except ValueError as exc:
        raise InputError(str(exc)) from None
    text = A.to_json()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        if seed is not None:
            print(f"wrote {args.output} (seed {seed})", file=sys.stderr)
    else:
        sys.stdout.write(text)
        if seed is not None:
            print(f"seed {seed}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    A = _load(args)
    q = _q(args, A.dim)
    x = parse_vector(args.x, "--x")
    if x.shape[0] != A.dim:
        raise InputError(f"--x: has {x.shape[0]} entries, tensor dimension is {A.dim}")
    res = verify_solution(TcpInstance(A, q), x, args.tol)
    if res:
        obj = {"valid": True, **res.to_dict()}
        table = f"valid: w = {_fmt_vec(res.w)}, residual {res.residual:.3g}"
        code = EXIT_OK
    else:
        idx = None if res.index is None else res.index + 1
        obj = {"valid": False, "condition": res.condition, "index": idx, "magnitude": res.magnitude, "w": [float(t) for t in res.w]}
        table = f"invalid: {res.condition}" + (f" at index {idx}" if idx else "") + f", magnitude {res.magnitude:.3g}"
        code = EXIT_NEGATIVE
    _emit(args, obj, table)
    return code


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="residual tolerance (default 1e-9)")
    common.add_argument("--cap", type=int, default=16, help="largest n for support enumeration (default 16)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for every randomised step")
    common.add_argument("--format", choices=("json", "table"), default="json")

    tensor_in = argparse.ArgumentParser(add_help=False)
    tensor_in.add_argument("tensor", nargs="?", help="tensor JSON file")
    tensor_in.add_argument("--example", help="built-in example instead of a file: ex2.1, ex2.2, ex2.3")
    tensor_in.add_argument("--m", type=int, help="order for ex2.1")
    tensor_in.add_argument("--n", type=int, help="dimension for ex2.1")

    p = argparse.ArgumentParser(prog="qtensor", description="Tensor complementarity problems and structured tensor classes.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common, tensor_in], help="solve TCP(q, A)")
    s.add_argument("--q", required=True, help="comma-separated q")
    s.add_argument("--method", choices=("enumerate", "vi"), default="enumerate")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("classify", parents=[common, tensor_in], help="run every class oracle")
    c.add_argument("--q-batch", help="extra Q probes, 'seed:count', entries uniform on [-2, 2]")
    c.set_defaults(func=cmd_classify)

    f = sub.add_parser("falsify", parents=[common, tensor_in], help="search for a counterexample to one property")
    f.add_argument("--property", required=True)
    f.add_argument("--q", help="q for monotonicity properties of F(x) = A x^{m-1} + q (default 0)")
    f.set_defaults(func=cmd_falsify)

    g = sub.add_parser("gen", parents=[common], help="write a tensor in canonical JSON")
    g.add_argument("--example")
    g.add_argument("--random", help="nonnegative | symmetric | general")
    g.add_argument("--spec", help="GenSpec as JSON")
    g.add_argument("--m", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--density", type=float, default=1.0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", parents=[common, tensor_in], help="check a candidate solution")
    v.add_argument("--q", required=True)
    v.add_argument("--x", required=True)
    v.set_defaults(func=cmd_verify)
    return p


VECTOR_FLAGS = ("--q", "--x")


def _join_vector_flags(argv: list) -> list:
    """Let ``--q -1,-1`` through: argparse would read the value as a flag."""
    out = []
    it = iter(range(len(argv)))
    for i in it:
        tok = argv[i]
        if tok in VECTOR_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2] not in ("-", ""):
            out.append(f"{tok}={argv[i + 1]}")
            next(it, None)
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _join_vector_flags(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "tol", 1.0) <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "cap", 1) < 1:
        print("error: --cap must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, DimensionMismatch, EnumerationCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
