"""Named example tensors and seeded random generators."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, symmetrize

KINDS = ("paper_example", "random_nonnegative", "random_symmetric", "random_general")
EXAMPLES = ("ex2.1", "ex2.2", "ex2.3")


def all_ones(m: int, n: int) -> Tensor:
    """Every entry equal to 1, so ``(A x^{m-1})_i = (x_1 + ... + x_n)^{m-1}``."""
    idx = np.array(list(itertools.product(range(n), repeat=m)), dtype=np.int64).reshape(-1, m)
    return Tensor(m, n, idx, np.ones(idx.shape[0]))


def example_2_2() -> Tensor:
    return Tensor.from_entries(3, 2, [((1, 1, 1), 1.0), ((1, 2, 2), -1.0), ((2, 1, 1), -2.0), ((2, 2, 2), 1.0)])


def example_2_3() -> Tensor:
    return Tensor.from_entries(3, 2, [((1, 1, 1), -1.0), ((1, 2, 2), 1.0), ((2, 1, 1), -2.0), ((2, 2, 2), 1.0)])


def identity_diagonal(m: int, n: int) -> Tensor:
    """``a_{i..i} = 1`` and zero elsewhere; P-tensor and monotone for even m."""
    idx = np.repeat(np.arange(n, dtype=np.int64)[:, None], m, axis=1)
    return Tensor(m, n, idx, np.ones(n))


_EX21 = re.compile(r"^ex2\.1(?:\((\d+)\s*,\s*(\d+)\))?$")


def paper_example(name: str, m: int | None = None, n: int | None = None) -> Tensor:
    """``ex2.1`` (all ones; order/dim from the arguments or ``ex2.1(m,n)``), ``ex2.2``, ``ex2.3``."""
    key = name.strip().lower()
    hit = _EX21.match(key)
    if hit:
        if hit.group(1):
            m, n = int(hit.group(1)), int(hit.group(2))
        m = 3 if m is None else m
        n = 2 if n is None else n
        if m < 2 or n < 1:
            raise ValueError(f"ex2.1 needs m >= 2 and n >= 1, got m={m}, n={n}")
        return all_ones(m, n)
    if key == "ex2.2":
        return example_2_2()
    if key == "ex2.3":
        return example_2_3()
    raise ValueError(f"unknown example {name!r}; expected one of ex2.1(m,n), ex2.2, ex2.3")


@dataclass(frozen=True)
class GenSpec:
    kind: str
    m: int = 3
    n: int = 2
    seed: int = 0
    density: float = 1.0
    scale: float = 1.0
    name: str = ""  # for paper_example

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.m < 2:
            raise ValueError(f"order m must be >= 2, got {self.m}")
        if self.n < 1:
            raise ValueError(f"dimension n must be >= 1, got {self.n}")
        if not 0.0 < self.density <= 1.0:
            raise ValueError(f"density must lie in (0, 1], got {self.density}")
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @classmethod
    def from_dict(cls, d: dict) -> "GenSpec":
        return cls(**d)


def _draw(spec: GenSpec, rng: np.random.Generator):
    m, n = spec.m, spec.n
    size = n ** m
    keep = np.ones(size, dtype=bool) if spec.density >= 1.0 else rng.random(size) < spec.density
    vals = rng.normal(scale=spec.scale, size=size)
    if spec.kind == "random_nonnegative":
        vals = np.abs(vals)
    flat = np.flatnonzero(keep & (vals != 0.0))
    idx = np.stack(np.unravel_index(flat, (n,) * m), axis=1).astype(np.int64)
    return idx, vals[flat]


def random(spec: GenSpec) -> Tensor:
    """Reproducible random tensor. Symmetric tensors average each drawn tuple
    over all of its permutations, so symmetry is exact."""
    if spec.kind == "paper_example":
        return paper_example(spec.name or "ex2.1", spec.m, spec.n)
    rng = np.random.default_rng(spec.seed)
    idx, vals = _draw(spec, rng)
    A = Tensor(spec.m, spec.n, idx, vals)
    if spec.kind == "random_symmetric":
        A = symmetrize(A)
    return A


def with_zero_diagonal(A: Tensor, k: int) -> Tensor:
    """Copy of A with the diagonal entry ``a_{k..k}`` removed."""
    keep = ~(A.idx == k).all(axis=1)
    return Tensor(A.order, A.dim, A.idx[keep], A.vals[keep])
