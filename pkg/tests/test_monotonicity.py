import numpy as np
import pytest

from qtensor import TcpInstance, check_pair, falsify
from qtensor.generators import example_2_3, identity_diagonal
from qtensor.monotonicity import (
    IMPLIES,
    PROPERTIES,
    MonotonicityOptions,
    falsify_all,
    falsify_report,
    ladder_audit,
    p_function_implies_r_probe,
    replay_pair,
    structured_pairs,
)
from qtensor.oracles import NO_COUNTEREXAMPLE, NON_MEMBER


@pytest.fixture
def ex24():
    return TcpInstance(example_2_3(), [0.5, 0.5])


def test_pseudo_monotone_pair(ex24):
    pc = check_pair(ex24, [1.0, 0.0], [0.0, 0.25], "pseudo-monotone")
    assert pc.lhs == 27 / 64 and pc.rhs == -1 / 8
    assert pc.violated


def test_p0_pair(ex24):
    # x - y = (1, 3/4); products (1)(-1/16) and (3/4)(-17/16)
    pc = check_pair(ex24, [1.0, 1.0], [0.0, 0.25], "p0-function")
    assert pc.violated and pc.lhs == pytest.approx(-1 / 16)


def test_falsify_finds_paper_violations(ex24):
    for prop in ("pseudo-monotone", "p0-function"):
        v = falsify(ex24, prop)
        assert v.verdict == NON_MEMBER and v.complete
        assert replay_pair(ex24, v.certificate)


def test_weaker_violations_propagate(ex24):
    verdicts = falsify_all(ex24)
    assert all(v.verdict == NON_MEMBER for v in verdicts.values())
    assert ladder_audit(verdicts) == []


def test_identity_even_order_is_monotone_in_sample():
    # x -> x^3 componentwise is strictly monotone on the orthant
    inst = TcpInstance(identity_diagonal(4, 3), [0.0, -1.0, 1.0])
    rep = falsify_report(inst, "strictly-monotone")
    assert rep.verdict.verdict == NO_COUNTEREXAMPLE
    assert not rep.verdict.complete
    # strong monotonicity fails near 0 where the modulus decays
    strong = falsify_report(inst, "strongly-monotone")
    assert strong.modulus_inf is not None and strong.modulus_inf >= 0


def test_check_pair_validation(ex24):
    with pytest.raises(ValueError, match="distinct"):
        check_pair(ex24, [1.0, 1.0], [1.0, 1.0], "monotone")
    with pytest.raises(ValueError, match="unknown property"):
        check_pair(ex24, [1.0, 0.0], [0.0, 1.0], "convex")
    with pytest.raises(ValueError):
        check_pair(ex24, [1.0, 0.0, 0.0], [0.0, 1.0], "monotone")


def test_structured_pairs_distinct():
    for x, y in structured_pairs(3):
        assert x.shape == (3,) and np.all(x >= 0) and np.all(y >= 0)


def test_implications_cover_properties():
    named = set(IMPLIES) | {p for v in IMPLIES.values() for p in v}
    assert named == set(PROPERTIES)


def test_seeded_reproducible(ex24):
    opts = MonotonicityOptions(seed=11)
    a = falsify(ex24, "monotone", opts)
    b = falsify(ex24, "monotone", opts)
    assert a.to_dict() == b.to_dict()


def test_p_function_probe():
    out = p_function_implies_r_probe(identity_diagonal(4, 2))
    assert out["consistent"]
    out = p_function_implies_r_probe(example_2_3())
    assert out["consistent"] and out["p_tensor"]["verdict"] == NON_MEMBER
