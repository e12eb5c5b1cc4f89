"""Order-m, dimension-n real tensors in canonical coordinate form.

A :class:`Tensor` stores its nonzero entries as a lexicographically sorted
array of zero-based index tuples plus values. File formats and reports use
1-based indices; everything in memory is 0-based.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels

DENSE_CAP = 10**7


class TensorFormatError(ValueError):
    """Raised when tensor data (JSON or entries) is malformed."""


class DimensionMismatch(ValueError):
    pass


def _as_vector(x, n: int) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != n:
        raise DimensionMismatch(f"expected a vector of length {n}, got shape {v.shape}")
    return v


class Tensor:
    """Immutable real tensor with ``order`` m >= 2 and ``dim`` n >= 1."""

    __slots__ = ("order", "dim", "idx", "vals", "_sym", "_dense")

    def __init__(self, order: int, dim: int, idx: np.ndarray, vals: np.ndarray):
        # Trusted constructor: idx sorted, unique, zero-based, no zero values.
        self.order = int(order)
        self.dim = int(dim)
        idx = np.ascontiguousarray(idx, dtype=np.int64).reshape(-1, self.order)
        vals = np.ascontiguousarray(vals, dtype=np.float64).reshape(-1)
        idx.setflags(write=False)
        vals.setflags(write=False)
        self.idx = idx
        self.vals = vals
        self._sym = None
        self._dense = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_entries(
        cls,
        order: int,
        dim: int,
        entries: Mapping[Sequence[int], float] | Iterable[tuple[Sequence[int], float]],
        one_based: bool = True,
    ) -> "Tensor":
        """Build a tensor from ``(index tuple, value)`` pairs.

        Duplicate tuples and out-of-range indices raise
        :class:`TensorFormatError`. Explicit zeros are dropped.
        """
        if int(order) != order or order < 2:
            raise TensorFormatError(f"order must be an integer >= 2, got {order!r}")
        if int(dim) != dim or dim < 1:
            raise TensorFormatError(f"dim must be an integer >= 1, got {dim!r}")
        order, dim = int(order), int(dim)
        items = entries.items() if isinstance(entries, Mapping) else entries
        offset = 1 if one_based else 0
        seen: dict[tuple, float] = {}
        for pos, (key, val) in enumerate(items):
            key = tuple(int(i) for i in key)
            if len(key) != order:
                raise TensorFormatError(
                    f"entries[{pos}]: index tuple {list(key)} has length {len(key)}, expected {order}"
                )
            zb = tuple(i - offset for i in key)
            if any(i < 0 or i >= dim for i in zb):
                raise TensorFormatError(
                    f"entries[{pos}]: index tuple {list(key)} out of range 1..{dim}"
                    if one_based
                    else f"entries[{pos}]: index tuple {list(key)} out of range 0..{dim - 1}"
                )
            if zb in seen:
                raise TensorFormatError(f"entries[{pos}]: duplicate index tuple {list(key)}")
            v = float(val)
            if not math.isfinite(v):
                raise TensorFormatError(f"entries[{pos}]: value {val!r} is not finite")
            seen[zb] = v
        keys = sorted(k for k, v in seen.items() if v != 0.0)
        idx = np.array(keys, dtype=np.int64).reshape(-1, order)
        vals = np.array([seen[k] for k in keys], dtype=np.float64)
        return cls(order, dim, idx, vals)

    @classmethod
    def from_dense(cls, array) -> "Tensor":
        a = np.asarray(array, dtype=np.float64)
        if a.ndim < 2 or len(set(a.shape)) != 1:
            raise TensorFormatError(f"dense tensor must be a hypercube of order >= 2, got {a.shape}")
        nz = np.flatnonzero(a)  # C order == lexicographic
        idx = np.stack(np.unravel_index(nz, a.shape), axis=1).astype(np.int64)
        return cls(a.ndim, a.shape[0], idx, a.reshape(-1)[nz])

    @classmethod
    def zeros(cls, order: int, dim: int) -> "Tensor":
        return cls(order, dim, np.zeros((0, order), dtype=np.int64), np.zeros(0))

    # -- basic views --------------------------------------------------------

    @property
    def nnz(self) -> int:
        return int(self.vals.shape[0])

    def __repr__(self) -> str:
        return f"Tensor(order={self.order}, dim={self.dim}, nnz={self.nnz})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return (
            self.order == other.order
            and self.dim == other.dim
            and np.array_equal(self.idx, other.idx)
            and np.array_equal(self.vals, other.vals)
        )

    __hash__ = None

    def entries(self) -> dict[tuple[int, ...], float]:
        """Nonzero entries keyed by zero-based index tuples."""
        return {tuple(int(i) for i in row): float(v) for row, v in zip(self.idx, self.vals)}

    def __getitem__(self, key) -> float:
        key = tuple(int(i) for i in key)
        if len(key) != self.order:
            raise IndexError(f"need {self.order} indices")
        row = np.array(key, dtype=np.int64)
        pos = np.flatnonzero((self.idx == row).all(axis=1))
        return float(self.vals[pos[0]]) if pos.size else 0.0

    def dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        """Dense ``(n,)*m`` array; refused when n^m exceeds ``cap``."""
        size = self.dim**self.order
        if size > cap:
            raise MemoryError(f"dense buffer of {size} entries exceeds cap {cap}")
        if self._dense is None:
            a = np.zeros(size)
            if self.nnz:
                flat = np.ravel_multi_index(tuple(self.idx.T), (self.dim,) * self.order)
                a[flat] = self.vals
            a.setflags(write=False)
            self._dense = a
        return self._dense.reshape((self.dim,) * self.order)

    # -- algebra ------------------------------------------------------------

    def contract(self, x, storage: str = "coo") -> np.ndarray:
        return contract(self, x, storage=storage)

    def polyval(self, x) -> float:
        return polyval(self, x)

    def principal(self, support: Sequence[int]) -> "Tensor":
        return principal_subtensor(self, support)

    def diagonal(self) -> np.ndarray:
        return diagonal(self)

    @property
    def symmetric(self) -> bool:
        if self._sym is None:
            self._sym = is_symmetric(self)
        return self._sym

    @property
    def nonnegative(self) -> bool:
        return is_nonnegative(self)

    def scaled(self, factor: float) -> "Tensor":
        if factor == 0:
            return Tensor.zeros(self.order, self.dim)
        return Tensor(self.order, self.dim, self.idx, self.vals * float(factor))

    # -- serialisation ------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "order": self.order,
            "dim": self.dim,
            "entries": [
                {"idx": [int(i) + 1 for i in row], "val": float(v)}
                for row, v in zip(self.idx, self.vals)
            ],
        }

    def to_json(self) -> str:
        """Canonical JSON text: lexicographic entries, one per line."""
        lines = [
            "{",
            f'  "order": {self.order},',
            f'  "dim": {self.dim},',
            '  "entries": [',
        ]
        body = [
            '    {"idx": ' + json.dumps([int(i) + 1 for i in row]) + ', "val": ' + json.dumps(float(v)) + "}"
            for row, v in zip(self.idx, self.vals)
        ]
        if body:
            lines.append(",\n".join(body))
        lines += ["  ]", "}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json_obj(cls, obj) -> "Tensor":
        if not isinstance(obj, dict):
            raise TensorFormatError("top level: expected an object with order, dim, entries")
        for key in ("order", "dim", "entries"):
            if key not in obj:
                raise TensorFormatError(f"top level: missing key {key!r}")
        order, dim, entries = obj["order"], obj["dim"], obj["entries"]
        if not isinstance(order, int) or isinstance(order, bool):
            raise TensorFormatError(f"order: expected integer, got {order!r}")
        if not isinstance(dim, int) or isinstance(dim, bool):
            raise TensorFormatError(f"dim: expected integer, got {dim!r}")
        if not isinstance(entries, list):
            raise TensorFormatError("entries: expected a list")
        pairs = []
        for pos, e in enumerate(entries):
            if not isinstance(e, dict) or "idx" not in e or "val" not in e:
                raise TensorFormatError(f"entries[{pos}]: expected {{\"idx\": [...], \"val\": number}}")
            ix, val = e["idx"], e["val"]
            if not isinstance(ix, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in ix):
                raise TensorFormatError(f"entries[{pos}].idx: expected a list of integers")
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise TensorFormatError(f"entries[{pos}].val: expected a number")
            pairs.append((ix, val))
        return cls.from_entries(order, dim, pairs, one_based=True)

    @classmethod
    def from_json(cls, text: str) -> "Tensor":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TensorFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_json_obj(obj)


def load_tensor(path) -> Tensor:
    with open(path, encoding="utf-8") as fh:
        return Tensor.from_json(fh.read())


def save_tensor(A: Tensor, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(A.to_json())


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def contract(A: Tensor, x, storage: str = "coo") -> np.ndarray:
    """Return the vector ``A x^{m-1}``."""
    v = _as_vector(x, A.dim)
    if storage == "dense":
        return kernels.contract_dense(np.ascontiguousarray(A.dense().reshape(-1)), A.dim, A.order, v)
    if storage != "coo":
        raise ValueError(f"unknown storage {storage!r}")
    return kernels.contract(A.idx, A.vals, v, A.dim)


def polyval(A: Tensor, x) -> float:
    """Return the homogeneous form ``A x^m = x . (A x^{m-1})``."""
    v = _as_vector(x, A.dim)
    return float(np.dot(v, kernels.contract(A.idx, A.vals, v, A.dim)))


def check_support(support: Sequence[int], n: int) -> tuple[int, ...]:
    J = tuple(int(j) for j in support)
    if not J:
        raise ValueError("support must be nonempty")
    if any(b <= a for a, b in zip(J, J[1:])):
        raise ValueError(f"support {J} must be strictly increasing")
    if J[0] < 0 or J[-1] >= n:
        raise ValueError(f"support {J} out of range for dimension {n}")
    return J


def principal_subtensor(A: Tensor, support: Sequence[int]) -> Tensor:
    """Entries with every index in ``support`` (0-based), reindexed to 0..r-1."""
    J = check_support(support, A.dim)
    if len(J) == A.dim:
        return A
    remap = np.full(A.dim, -1, dtype=np.int64)
    remap[list(J)] = np.arange(len(J))
    mapped = remap[A.idx]
    keep = (mapped >= 0).all(axis=1)
    # remap is increasing on J, so lexicographic order is preserved
    return Tensor(A.order, len(J), mapped[keep], A.vals[keep])


def diagonal(A: Tensor) -> np.ndarray:
    d = np.zeros(A.dim)
    if A.nnz:
        on = (A.idx == A.idx[:, :1]).all(axis=1)
        d[A.idx[on, 0]] = A.vals[on]
    return d


def is_nonnegative(A: Tensor) -> bool:
    return bool(np.all(A.vals >= 0.0))


def _num_permutations(key: tuple) -> int:
    counts = defaultdict(int)
    for i in key:
        counts[i] += 1
    out = math.factorial(len(key))
    for c in counts.values():
        out //= math.factorial(c)
    return out


def is_symmetric(A: Tensor, tol: float = 0.0) -> bool:
    """Check invariance of every stored entry under index permutations."""
    groups: dict[tuple, list[float]] = defaultdict(list)
    for row, v in zip(A.idx, A.vals):
        groups[tuple(sorted(int(i) for i in row))].append(float(v))
    for key, vs in groups.items():
        if len(vs) != _num_permutations(key):
            return False
        if max(vs) - min(vs) > tol * max(1.0, max(abs(v) for v in vs)):
            return False
    return True


def symmetrize(A: Tensor) -> Tensor:
    """Average over all index permutations.

    Each multiset of indices gets one value, ``sum / (#distinct arrangements)``,
    written to every arrangement, so the result is exactly symmetric.
    """
    sums: dict[tuple, float] = defaultdict(float)
    for row, v in zip(A.idx, A.vals):
        sums[tuple(sorted(int(i) for i in row))] += float(v)
    out: dict[tuple, float] = {}
    for key, total in sums.items():
        value = total / _num_permutations(key)
        for perm in set(itertools.permutations(key)):
            out[perm] = value
    return Tensor.from_entries(A.order, A.dim, out, one_based=False)
