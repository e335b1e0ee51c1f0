"""Correlators, inequality values and joint distributions.

Sources are independent and ``B_i`` factorizes over sources, so every
correlator is a product of ``n`` two-party expectations. The full joint
Hilbert space is only built for small instances (joint distributions and
cross-checks).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np
from scipy.optimize import brentq

from .algebra import QuantumRealization
from .encoding import EncodingTable
from .errors import DomainError, ResourceError

__all__ = [
    "MAX_JOINT_PAIRS",
    "ScenarioValue",
    "JointDistribution",
    "combination",
    "source_expectation",
    "correlator",
    "correlator_full",
    "correlators_from_distribution",
    "delta_value",
    "delta_from_correlators",
    "bipartite_bell_value",
    "joint_distribution",
    "check_probability_constraints",
    "werner_delta",
    "critical_visibility",
    "werner_sweep",
    "sweep_to_csv",
    "scenario_to_json",
]

#: Joint distributions are built only when ``n * floor(m/2)`` Bell pairs fit.
MAX_JOINT_PAIRS = 4


@dataclass(frozen=True)
class ScenarioValue:
    n: int
    m: int
    correlators: tuple[float, ...]
    delta: float
    classical_bound: int
    quantum_opt: float
    visibility: float = 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["correlators"] = list(self.correlators)
        return d


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """``P(a_1..a_n, b | x_1..x_n, i)``.

    ``table`` has axes ``(a_1, .., a_n, b, x_1, .., x_n, i)``; outcome 0 is
    eigenvalue +1 and outcome 1 is eigenvalue -1.
    """

    n: int
    m: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = 2 ** (self.m - 1)
        shape = (2,) * (self.n + 1) + (x,) * self.n + (self.m,)
        if self.table.shape != shape:
            raise DomainError(f"distribution has shape {self.table.shape}, expected {shape}")

    def slice_sums(self) -> np.ndarray:
        return self.table.sum(axis=tuple(range(self.n + 1)))

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "shape": list(self.table.shape),
                "table": self.table.ravel().tolist()}


def _check(real: QuantumRealization, table: EncodingTable) -> None:
    if real.m != table.m:
        raise DomainError(f"realization has m={real.m} but table has m={table.m}")


def combination(real: QuantumRealization, table: EncodingTable, k: int, i: int) -> np.ndarray:
    """Signed edge combination ``sum_x S[i, x] A^k_x``."""
    _check(real, table)
    return np.einsum("x,xab->ab", table.signs[i].astype(float), real.edge_observables[k])


def source_expectation(state: np.ndarray, edge_op: np.ndarray, central_op: np.ndarray) -> float:
    """``<state| edge_op (x) central_op |state>`` for a state ordered edge-first."""
    d = edge_op.shape[0]
    t = state.reshape(d, d)
    return float(np.vdot(t, edge_op @ t @ central_op.T).real)


def _factor_matrix(real: QuantumRealization, table: EncodingTable) -> np.ndarray:
    """``F[k, i] = <psi_k| comb(k, i) (x) b^k_i |psi_k>``."""
    f = np.empty((real.n, real.m))
    for k in range(real.n):
        for i in range(real.m):
            f[k, i] = source_expectation(
                real.source_states[k], combination(real, table, k, i), real.central_factors[k, i]
            )
    return f


def correlator(real: QuantumRealization, table: EncodingTable, i: int) -> float:
    """``I_i`` as a product of per-source expectations."""
    _check(real, table)
    if not 0 <= i < real.m:
        raise IndexError(f"central input {i} out of range [0, {real.m})")
    return float(np.prod([
        source_expectation(
            real.source_states[k], combination(real, table, k, i), real.central_factors[k, i]
        )
        for k in range(real.n)
    ]))


def delta_from_correlators(correlators, n: int) -> float:
    return float(np.sum(np.abs(np.asarray(correlators, dtype=float)) ** (1.0 / n)))


def delta_value(real: QuantumRealization, table: EncodingTable) -> ScenarioValue:
    _check(real, table)
    corr = np.prod(_factor_matrix(real, table), axis=0)
    return ScenarioValue(
        n=real.n,
        m=real.m,
        correlators=tuple(float(c) for c in corr),
        delta=delta_from_correlators(corr, real.n),
        classical_bound=table.classical_bound,
        quantum_opt=table.quantum_optimum,
    )


def bipartite_bell_value(
    real: QuantumRealization, table: EncodingTable, k: int, align_signs: bool = False
) -> float:
    """Two-party Bell value ``sum_i <comb(k, i) (x) b^k_i>`` on source ``k``.

    With ``align_signs`` each ``b^k_i`` is replaced by ``+-b^k_i``, whichever
    makes its term non-negative; that is the largest value reachable by
    relabelling the central party's outcomes.
    """
    _check(real, table)
    if not 0 <= k < real.n:
        raise IndexError(f"party {k} out of range [0, {real.n})")
    terms = [
        source_expectation(
            real.source_states[k], combination(real, table, k, i), real.central_factors[k, i]
        )
        for i in range(real.m)
    ]
    return float(np.sum(np.abs(terms)) if align_signs else np.sum(terms))


# --- full joint space ----------------------------------------------------------

def _check_joint_cap(real: QuantumRealization) -> None:
    pairs = real.n * (real.m // 2)
    if pairs > MAX_JOINT_PAIRS:
        raise ResourceError(
            f"joint space needs {pairs} Bell pairs (local dimension {real.dim}**{2 * real.n}),"
            f" cap is {MAX_JOINT_PAIRS}",
            dimension=real.dim ** (2 * real.n),
            cap=2 ** (2 * MAX_JOINT_PAIRS),
        )


def _full_state(real: QuantumRealization) -> np.ndarray:
    """Product state as a tensor with axes ``(A_1, B_1, A_2, B_2, ...)``."""
    d = real.dim
    psi = np.ones((), dtype=complex)
    for k in range(real.n):
        psi = np.multiply.outer(psi, real.source_states[k].reshape(d, d))
    return psi


def _apply(psi: np.ndarray, op: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(op, psi, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _apply_central(real: QuantumRealization, psi: np.ndarray, i: int) -> np.ndarray:
    for k in range(real.n):
        psi = _apply(psi, real.central_factors[k, i], 2 * k + 1)
    return psi


def correlator_full(real: QuantumRealization, table: EncodingTable, i: int) -> float:
    """``I_i`` evaluated on the full ``n``-source state (small instances only)."""
    _check(real, table)
    _check_joint_cap(real)
    psi = _full_state(real)
    phi = _apply_central(real, psi, i)
    for k in range(real.n):
        phi = _apply(phi, combination(real, table, k, i), 2 * k)
    return float(np.vdot(psi, phi).real)


def joint_distribution(real: QuantumRealization, table: EncodingTable) -> JointDistribution:
    """Outcome probabilities from projectors ``(1 +- A)/2`` and ``(1 +- B)/2``."""
    _check(real, table)
    _check_joint_cap(real)
    n, m = real.n, real.m
    nx = table.num_inputs
    d = real.dim
    eye = np.eye(d)
    proj = np.empty((n, nx, 2, d, d), dtype=complex)
    for k in range(n):
        for x in range(nx):
            a = real.edge_observables[k, x]
            proj[k, x, 0] = (eye + a) / 2
            proj[k, x, 1] = (eye - a) / 2

    psi = _full_state(real)
    out = np.zeros((2,) * (n + 1) + (nx,) * n + (m,))
    for xs in product(range(nx), repeat=n):
        for outcomes in product((0, 1), repeat=n):
            phi = psi
            for k in range(n):
                phi = _apply(phi, proj[k, xs[k], outcomes[k]], 2 * k)
            norm = float(np.vdot(phi, phi).real)
            for i in range(m):
                b_val = float(np.vdot(phi, _apply_central(real, phi, i)).real)
                out[outcomes + (0,) + xs + (i,)] = (norm + b_val) / 2
                out[outcomes + (1,) + xs + (i,)] = (norm - b_val) / 2
    np.clip(out, 0.0, 1.0, out=out)
    return JointDistribution(n=n, m=m, table=out)


def correlators_from_distribution(dist: JointDistribution, table: EncodingTable) -> np.ndarray:
    """``I_i`` from outcome statistics: ``sum (-1)^(sum a + b) P`` weighted by signs."""
    n = dist.n
    parity = np.ones((2,) * (n + 1))
    for ax in range(n + 1):
        shape = [1] * (n + 1)
        shape[ax] = 2
        parity = parity * np.array([1.0, -1.0]).reshape(shape)
    corr = np.tensordot(parity, dist.table, axes=(list(range(n + 1)), list(range(n + 1))))
    # corr has axes (x_1..x_n, i)
    out = np.empty(dist.m)
    for i in range(dist.m):
        c = corr[..., i]
        s = table.signs[i].astype(float)
        for _ in range(n):
            c = np.tensordot(s, c, axes=([0], [0]))
        out[i] = float(c)
    return out


def check_probability_constraints(dist: JointDistribution, table: EncodingTable) -> np.ndarray:
    """Residuals of the probability-level input balances.

    For party ``k`` and constraint ``l`` the balance reads
    ``sum_{x in U_l} P(a_k=0, ..|x, ..) + sum_{x not in U_l} P(a_k=1, ..|x, ..)``
    equals the same with ``a_k`` flipped, for every value of the central input,
    central outcome and the other parties' inputs and outcomes. The result has
    shape ``(n, L, 2, .., 2, 2, X, .., X, m)`` with ``n-1`` outcome axes before
    the central outcome and ``n-1`` input axes after it.
    """
    n = dist.n
    if table.m != dist.m:
        raise DomainError(f"distribution has m={dist.m} but table has m={table.m}")
    csigns = table.constraint_signs.astype(float)
    res = []
    for k in range(n):
        diff = np.take(dist.table, 0, axis=k) - np.take(dist.table, 1, axis=k)
        # x_k sits at axis n + 1 + k in the full table, one less after removing a_k
        xk_axis = n + k
        bal = np.tensordot(csigns, diff, axes=([1], [xk_axis]))
        res.append(np.abs(bal))
    return np.array(res)


# --- noise ---------------------------------------------------------------------

def _werner_factor(state: np.ndarray, edge_op: np.ndarray, central_op: np.ndarray, v: float) -> float:
    d = edge_op.shape[0]
    mixed = float((np.trace(edge_op) * np.trace(central_op)).real) / (d * d)
    return v * source_expectation(state, edge_op, central_op) + (1.0 - v) * mixed


def werner_delta(real: QuantumRealization, table: EncodingTable, v: float) -> ScenarioValue:
    """Inequality value with each source replaced by ``v |psi><psi| + (1-v) 1/d^2``."""
    _check(real, table)
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"visibility must lie in [0, 1], got {v}")
    f = np.empty((real.n, real.m))
    for k in range(real.n):
        for i in range(real.m):
            f[k, i] = _werner_factor(
                real.source_states[k],
                combination(real, table, k, i),
                real.central_factors[k, i],
                v,
            )
    corr = np.prod(f, axis=0)
    return ScenarioValue(
        n=real.n,
        m=real.m,
        correlators=tuple(float(c) for c in corr),
        delta=delta_from_correlators(corr, real.n),
        classical_bound=table.classical_bound,
        quantum_opt=table.quantum_optimum,
        visibility=float(v),
    )


def critical_visibility(real: QuantumRealization, table: EncodingTable) -> float | None:
    """Smallest ``v`` with ``delta(v) = classical bound``; ``None`` if never violated."""
    bound = table.classical_bound
    g = lambda v: werner_delta(real, table, v).delta - bound  # noqa: E731
    if g(1.0) <= 0:
        return None
    if g(0.0) >= 0:
        return 0.0
    return float(brentq(g, 0.0, 1.0, xtol=1e-14, rtol=1e-14))


def werner_sweep(
    real: QuantumRealization, table: EncodingTable, num: int = 101
) -> list[tuple[float, float, int]]:
    """``(v, delta(v), bound)`` on ``num`` evenly spaced visibilities in ``[0, 1]``."""
    vs = np.linspace(0.0, 1.0, num)
    vs = [round(float(v), 12) for v in vs]
    return [(v, werner_delta(real, table, v).delta, table.classical_bound) for v in vs]


def sweep_to_csv(rows) -> str:
    """CSV with columns ``v, delta, bound, crossing``.

    ``crossing`` is 1 on the first grid row whose delta exceeds the bound.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["v", "delta", "bound", "crossing"])
    flagged = False
    for v, delta, bound in rows:
        mark = 0
        if not flagged and delta > bound + 1e-12:
            mark, flagged = 1, True
        w.writerow([repr(v), repr(delta), bound, mark])
    return buf.getvalue()


def scenario_to_json(value: ScenarioValue) -> str:
    return json.dumps(value.to_dict(), sort_keys=True)
