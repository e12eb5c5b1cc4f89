"""Tensor complementarity problems TCP(q, A) and structured tensor classes."""

from ._accel import NUMBA_ENABLED, backend_name
from .engine import (
    EnumerationCapExceeded,
    EnumerationResult,
    RSystemWitness,
    SolverOptions,
    TcpInstance,
    TcpSolution,
    Violation,
    solve_enumerate,
    solve_support,
    verify_solution,
)
from .generators import GenSpec, identity_diagonal, paper_example, random
from .monotonicity import check_pair, falsify, p_function_implies_r_probe
from .oracles import (
    ClassVerdict,
    OracleOptions,
    Witness,
    check_copositive,
    check_q,
    check_r,
    check_r0,
    classify_all,
    falsify_p,
    falsify_p0,
    falsify_semi_positive,
    falsify_strictly_semi_positive,
    replay,
)
from .tensor import (
    DimensionMismatch,
    Tensor,
    TensorFormatError,
    contract,
    diagonal,
    is_nonnegative,
    is_symmetric,
    load_tensor,
    polyval,
    principal_subtensor,
    save_tensor,
    symmetrize,
)
from .vi import SimplexViState, ViOptions, solve_vi

__version__ = "0.1.0"
