"""Brute-force oracle for the n-local bound.

Deterministic edge strategies assign +-1 to each of the ``2**(m-1)`` inputs and
must satisfy every input constraint exactly. Exhaustive enumeration covers
``m <= 5``; ``m = 6`` (2**32 candidates) is solved by meet-in-the-middle on
the two halves of the input range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .encoding import EncodingTable
from .errors import DomainError, ResourceError

__all__ = [
    "EXHAUSTIVE_MAX_M",
    "SPLIT_MAX_M",
    "DeterministicStrategy",
    "EtaResult",
    "all_assignments",
    "is_valid",
    "eta",
    "enumerate_valid_strategies",
    "eta_max",
    "eta_max_unconstrained",
    "classical_delta_max",
    "product_inequality_check",
    "classical_report",
]

EXHAUSTIVE_MAX_M = 5
SPLIT_MAX_M = 6
MAX_DELTA_COMBINATIONS = 10**7


@dataclass(frozen=True)
class DeterministicStrategy:
    m: int
    assignment: tuple[int, ...]
    valid: bool

    def lex_key(self) -> tuple[int, ...]:
        # +1 sorts before -1
        return tuple(0 if a > 0 else 1 for a in self.assignment)


@dataclass(frozen=True)
class EtaResult:
    m: int
    eta_max: int
    witness: DeterministicStrategy
    strategy_count: int

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "eta_max": self.eta_max,
            "strategy_count": self.strategy_count,
            "witness": list(self.witness.assignment),
        }


def all_assignments(length: int) -> np.ndarray:
    """Every +-1 vector of ``length`` entries, in lexicographic order (+1 first)."""
    idx = np.arange(2**length, dtype=np.int64)
    shifts = np.arange(length - 1, -1, -1, dtype=np.int64)
    bits = (idx[:, None] >> shifts) & 1
    return (1 - 2 * bits).astype(np.int8)


def is_valid(table: EncodingTable, assignment) -> bool:
    a = np.asarray(assignment, dtype=np.int64)
    if a.shape != (table.num_inputs,) or not np.all(np.abs(a) == 1):
        raise DomainError(f"assignment must be {table.num_inputs} entries of +-1")
    return bool(np.all(table.constraint_signs @ a == 0))


def eta(table: EncodingTable, assignment) -> int:
    """``sum_i |sum_x S[i, x] a_x|``."""
    a = np.asarray(assignment, dtype=np.int64)
    return int(np.abs(table.signs @ a).sum())


def _exhaustive(table: EncodingTable) -> np.ndarray:
    cand = all_assignments(table.num_inputs)
    if table.num_constraints == 0:
        return cand
    ok = np.all(cand.astype(np.int64) @ table.constraint_signs.T == 0, axis=1)
    return cand[ok]


def _split(table: EncodingTable) -> np.ndarray:
    nx = table.num_inputs
    if table.num_constraints == 0:
        return all_assignments(nx)
    h = nx // 2
    left = all_assignments(h)
    right = all_assignments(nx - h)
    c = table.constraint_signs.astype(np.int64)
    cl = left.astype(np.int64) @ c[:, :h].T
    cr = right.astype(np.int64) @ c[:, h:].T

    buckets: dict[bytes, list[int]] = {}
    for j, row in enumerate(cr):
        buckets.setdefault(row.tobytes(), []).append(j)
    rows = []
    for i, row in enumerate(cl):
        # right indices are appended in increasing order, keeping lex order
        for j in buckets.get((-row).tobytes(), ()):
            rows.append(np.concatenate([left[i], right[j]]))
    if not rows:
        return np.zeros((0, nx), dtype=np.int8)
    return np.array(rows, dtype=np.int8)


def _valid_matrix(table: EncodingTable, method: str = "auto") -> np.ndarray:
    if method == "auto":
        method = "exhaustive" if table.m <= EXHAUSTIVE_MAX_M else "split"
    if method == "exhaustive":
        if table.m > EXHAUSTIVE_MAX_M:
            raise ResourceError(
                f"exhaustive enumeration is capped at m={EXHAUSTIVE_MAX_M}",
                dimension=2**table.num_inputs,
                cap=2 ** (2 ** (EXHAUSTIVE_MAX_M - 1)),
            )
        return _exhaustive(table)
    if method == "split":
        if table.m > SPLIT_MAX_M:
            raise ResourceError(
                f"split enumeration is capped at m={SPLIT_MAX_M}",
                dimension=2**table.num_inputs,
                cap=2 ** (2 ** (SPLIT_MAX_M - 1)),
            )
        return _split(table)
    raise DomainError(f"unknown enumeration method {method!r}")


def enumerate_valid_strategies(
    table: EncodingTable, method: str = "auto"
) -> list[DeterministicStrategy]:
    """All constraint-satisfying deterministic strategies, in lexicographic order."""
    mat = _valid_matrix(table, method)
    return [DeterministicStrategy(table.m, tuple(int(v) for v in row), True) for row in mat]


def eta_max(table: EncodingTable, method: str = "auto") -> EtaResult:
    """Maximum of :func:`eta` over valid strategies, with the lex-smallest witness."""
    mat = _valid_matrix(table, method)
    if len(mat) == 0:
        raise DomainError(f"no valid strategies for m={table.m}")
    etas = np.abs(mat.astype(np.int64) @ table.signs.T).sum(axis=1)
    best = int(np.argmax(etas))  # first maximum is the lex-smallest
    witness = DeterministicStrategy(table.m, tuple(int(v) for v in mat[best]), True)
    return EtaResult(m=table.m, eta_max=int(etas[best]), witness=witness, strategy_count=len(mat))


def eta_max_unconstrained(table: EncodingTable) -> int:
    """Maximum of :func:`eta` over all assignments, ignoring the constraints."""
    if table.m > EXHAUSTIVE_MAX_M:
        raise ResourceError(
            f"unconstrained enumeration is capped at m={EXHAUSTIVE_MAX_M}",
            dimension=2**table.num_inputs,
            cap=2 ** (2 ** (EXHAUSTIVE_MAX_M - 1)),
        )
    cand = all_assignments(table.num_inputs).astype(np.int64)
    return int(np.abs(cand @ table.signs.T).sum(axis=1).max())


def classical_delta_max(table: EncodingTable, n: int, method: str = "auto") -> float:
    """Maximum inequality value over deterministic n-local models.

    Every party picks a valid strategy independently and the central party
    picks a +-1 outcome for each input; the model value is
    ``sum_i |b_i prod_k (S_i . a^k)|^(1/n)``.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    mat = _valid_matrix(table, method).astype(np.int64)
    sums = mat @ table.signs.T  # (N, m)
    count = len(sums) ** n * 2**table.m
    if count > MAX_DELTA_COMBINATIONS:
        raise ResourceError(
            f"{count} strategy combinations exceed cap {MAX_DELTA_COMBINATIONS}",
            dimension=count,
            cap=MAX_DELTA_COMBINATIONS,
        )
    central = np.array(list(product((1, -1), repeat=table.m)), dtype=np.int64)  # (2^m, m)
    best = 0.0
    for combo in product(range(len(sums)), repeat=n):
        z = np.prod(sums[list(combo)], axis=0)  # (m,)
        vals = (np.abs(central * z) ** (1.0 / n)).sum(axis=1)
        best = max(best, float(vals.max()))
    return best


def product_inequality_check(z, tol: float = 1e-12) -> bool:
    """Check ``sum_i (prod_k z[i, k])^(1/n) <= prod_k (sum_i z[i, k])^(1/n)``.

    ``z`` is an ``(m, n)`` array of non-negative numbers.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise DomainError(f"z must be a 2-D array, got shape {z.shape}")
    if np.any(z < 0):
        raise DomainError("z must be non-negative")
    n = z.shape[1]
    lhs = float(np.sum(np.prod(z, axis=1) ** (1.0 / n)))
    rhs = float(np.prod(np.sum(z, axis=0) ** (1.0 / n)))
    return lhs <= rhs + tol


def classical_report(table: EncodingTable, n: int = 1) -> str:
    result = eta_max(table)
    payload = result.to_dict()
    payload["n"] = n
    return json.dumps(payload, sort_keys=True)
