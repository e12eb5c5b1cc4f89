import math

import numpy as np
import pytest

from reference import hausdorff, lcp_solutions
from qtensor import (
    EnumerationCapExceeded,
    SolverOptions,
    Tensor,
    TcpInstance,
    Violation,
    solve_enumerate,
    solve_support,
    verify_solution,
)
from qtensor.engine import RSystemWitness, dedup_solutions, sign_certificate, supports
from qtensor.generators import GenSpec, all_ones, example_2_2, example_2_3, identity_diagonal, random


def test_instance_validates_q():
    with pytest.raises(ValueError):
        TcpInstance(example_2_2(), [1.0, 2.0, 3.0])
    inst = TcpInstance(example_2_2(), [1, 2])
    assert inst.q.dtype == np.float64 and not inst.q.flags.writeable


def test_verify_solution_conditions():
    inst = TcpInstance(example_2_3(), [-1.0, -1.0])
    sol = verify_solution(inst, [0.0, 1.0])
    assert sol and sol.support == (1,) and sol.residual == 0.0
    assert sol.to_dict()["support"] == [2]
    bad = verify_solution(inst, [-0.1, 1.0])
    assert isinstance(bad, Violation) and not bad and bad.condition == "x_nonnegative"
    bad = verify_solution(inst, [0.0, 0.0])
    assert bad.condition == "w_nonnegative" and bad.index == 0
    bad = verify_solution(TcpInstance(example_2_3(), [1.0, 1.0]), [0.0, 1.0])
    assert bad.condition == "complementarity"


def test_sign_certificate():
    A = all_ones(3, 2)
    # all coefficients positive and q >= 0: no support can vanish
    assert sign_certificate(A, np.array([1.0, 0.0]), (0,)) is not None
    assert sign_certificate(A, np.array([-1.0, -1.0]), (0,)) is None
    # slack 2 has no positive coefficient on J = {1} and q_2 < 0
    D = identity_diagonal(3, 2)
    assert "slack 2" in sign_certificate(D, np.array([-1.0, -1.0]), (0,))


def test_supports_order():
    assert list(supports(3)) == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]


def test_example_2_3_golden():
    A = example_2_3()
    res = solve_enumerate(TcpInstance(A, [-1.0, -1.0]))
    assert res.complete
    assert any(np.allclose(s.x, [0.0, 1.0], atol=1e-12) for s in res.solutions)
    res = solve_enumerate(TcpInstance(A, [-1.0, 0.5]))
    assert res.complete
    assert any(np.allclose(s.x, [math.sqrt(1.5), math.sqrt(2.5)], atol=1e-12) for s in res.solutions)


def test_example_2_2_empty_and_rays():
    A = example_2_2()
    res = solve_enumerate(TcpInstance(A, [-1.0, -1.0]))
    assert res.certified_empty
    # TCP(e) has the nonzero solution lambda (1, sqrt(6)/2) with lambda^2 = 2
    res = solve_enumerate(TcpInstance(A, [1.0, 1.0]))
    assert res.complete and len(res.nonzero()) == 1
    x = res.nonzero()[0].x
    assert np.allclose(x / x[0], [1.0, math.sqrt(6) / 2], atol=1e-10)
    # TCP(0) only has zero
    res = solve_enumerate(TcpInstance(A, [0.0, 0.0]))
    assert res.complete and not res.nonzero()


def test_example_2_3_singular_support_counts_as_complete():
    res = solve_enumerate(TcpInstance(example_2_3(), [1.0, 1.0]))
    assert res.complete and [s.support for s in res.solutions] == [()]


def test_homogeneous_ray_found():
    # a_{111} = 1 only: (A x^2) = (x1^2, 0), so the ray x = (0, s) solves TCP(0)
    inst = TcpInstance(Tensor.from_entries(3, 2, [((1, 1, 1), 1.0)]), [0.0, 0.0])
    res = solve_enumerate(inst)
    assert any(s.support == (1,) for s in res.solutions)


def test_solve_support_direct():
    inst = TcpInstance(example_2_3(), [-1.0, 0.5])
    sr = solve_support(inst, (0, 1))
    assert sr.complete and len(sr.solutions) == 1
    sr = solve_support(inst, (1,))
    assert sr.complete and not sr.solutions


def test_random_instances_verify():
    for seed in range(6):
        A = random(GenSpec("random_general", 3, 3, seed=seed))
        q = np.random.default_rng(seed).normal(size=3)
        res = solve_enumerate(TcpInstance(A, q))
        for s in res.solutions:
            assert verify_solution(res.instance, s.x)


def test_enumeration_agrees_with_matrix_reference():
    rng = np.random.default_rng(8)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        M = rng.normal(size=(n, n))
        q = rng.normal(size=n)
        res = solve_enumerate(TcpInstance(Tensor.from_dense(M), q))
        assert res.complete
        assert hausdorff([s.x for s in res.solutions], lcp_solutions(M, q)) < 1e-9


def test_cap():
    A = identity_diagonal(2, 5)
    with pytest.raises(EnumerationCapExceeded, match="cap"):
        solve_enumerate(TcpInstance(A, np.ones(5)), SolverOptions(cap=4))


def test_dedup():
    inst = TcpInstance(example_2_3(), [-1.0, -1.0])
    a = verify_solution(inst, [0.0, 1.0])
    b = verify_solution(inst, [0.0, 1.0 + 1e-11])
    assert len(dedup_solutions([a, b])) == 1


def test_rsystem_witness_residual():
    A = example_2_2()
    assert RSystemWitness(np.array([1.0, math.sqrt(6) / 2]), 0.5).residual(A) < 1e-15
    assert RSystemWitness(np.array([1.0, 1.0]), 0.5).residual(A) > 0.1
