"""Concrete quantum realization of the optimal star-network strategy.

Each source distributes ``floor(m/2)`` Bell pairs, regrouped as one maximally
entangled state of local dimension ``d = 2**floor(m/2)``. On that space the
``m`` pairwise anticommuting generators ``gamma_i`` are built with a
Jordan-Wigner ladder, edge observables are ``A_x = sum_i S[i, x] gamma_i / sqrt(m)``
and the per-source central factors are ``b_i = sigma_i * gamma_i^T``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .encoding import EncodingTable, build_encoding
from .errors import DomainError, ResourceError

__all__ = [
    "DIM_CAP_ENV",
    "DEFAULT_DIM_CAP",
    "OPERATOR_TOL",
    "SCALAR_TOL",
    "HermitianOperator",
    "GeneratorSet",
    "QuantumRealization",
    "dimension_cap",
    "anticommutator",
    "build_generators",
    "build_edge_observables",
    "build_central_factor",
    "build_source_state",
    "build_realization",
    "operator_to_json",
    "state_to_json",
]

#: Environment variable overriding the per-side, per-source dimension cap.
DIM_CAP_ENV = "NLOCALITY_DIM_CAP"
DEFAULT_DIM_CAP = 2**6

OPERATOR_TOL = 1e-10
SCALAR_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def dimension_cap() -> int:
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise DomainError(f"{DIM_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 2:
        raise DomainError(f"{DIM_CAP_ENV} must be >= 2, got {cap}")
    return cap


def _local_dim(m: int) -> int:
    return 2 ** (m // 2)


def _check_dim(m: int) -> int:
    if m < 2:
        raise DomainError(f"m must be >= 2, got {m}")
    dim = _local_dim(m)
    cap = dimension_cap()
    if dim > cap:
        raise ResourceError(
            f"m={m} needs local dimension {dim}, above cap {cap}", dimension=dim, cap=cap
        )
    return dim


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense Hermitian matrix, optionally declared dichotomic (squares to 1).

    Construction validates the declared properties.
    """

    entries: np.ndarray
    dichotomic: bool = False

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"operator must be square, got shape {a.shape}")
        if not self.is_hermitian(a):
            raise DomainError("operator is not Hermitian")
        if self.dichotomic and not self.is_involution(a):
            raise DomainError("operator declared dichotomic but does not square to identity")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @staticmethod
    def is_hermitian(a: np.ndarray, tol: float = SCALAR_TOL) -> bool:
        return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)

    @staticmethod
    def is_involution(a: np.ndarray, tol: float = OPERATOR_TOL) -> bool:
        return bool(np.max(np.abs(a @ a - np.eye(a.shape[0])), initial=0.0) <= tol)


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """``m`` pairwise anticommuting Hermitian involutions, stacked ``(m, d, d)``."""

    m: int
    dim: int
    gamma: np.ndarray

    def operators(self) -> list[HermitianOperator]:
        return [HermitianOperator(g, dichotomic=True) for g in self.gamma]


@dataclass(frozen=True, eq=False)
class QuantumRealization:
    """Observables and states for ``n`` sources.

    Every source ``k`` carries its own copy of the edge observables, central
    factors and state so that single parties can be perturbed independently;
    the canonical construction uses identical copies.

    Attributes:
        n: number of edge parties (and sources).
        m: number of central inputs.
        dim: local dimension on each side of a source.
        edge_observables: ``(n, 2**(m-1), d, d)``; ``[k, x]`` is party ``k``'s
            observable for input ``x``.
        central_factors: ``(n, m, d, d)``; ``[k, i]`` is the factor of ``B_i``
            acting on source ``k``, so ``B_i`` is the tensor product over ``k``.
        source_states: ``(n, d*d)`` pure states, edge system first.
    """

    n: int
    m: int
    dim: int
    edge_observables: np.ndarray
    central_factors: np.ndarray
    source_states: np.ndarray

    def __post_init__(self):
        d = self.dim
        x = 2 ** (self.m - 1)
        if self.edge_observables.shape != (self.n, x, d, d):
            raise DomainError(f"edge observables have shape {self.edge_observables.shape}")
        if self.central_factors.shape != (self.n, self.m, d, d):
            raise DomainError(f"central factors have shape {self.central_factors.shape}")
        if self.source_states.shape != (self.n, d * d):
            raise DomainError(f"source states have shape {self.source_states.shape}")
        for arr in (self.edge_observables, self.central_factors, self.source_states):
            arr.setflags(write=False)

    def replace(self, *, edge_observables=None, central_factors=None, source_states=None):
        """Return a copy with some components swapped out."""
        return QuantumRealization(
            n=self.n,
            m=self.m,
            dim=self.dim,
            edge_observables=np.array(
                self.edge_observables if edge_observables is None else edge_observables,
                dtype=complex,
            ),
            central_factors=np.array(
                self.central_factors if central_factors is None else central_factors,
                dtype=complex,
            ),
            source_states=np.array(
                self.source_states if source_states is None else source_states, dtype=complex
            ),
        )

    def central_observable(self, i: int) -> np.ndarray:
        """Full ``B_i`` on Bob's ``n`` subsystems (ordered by source)."""
        return reduce(np.kron, self.central_factors[:, i])


def _kron_all(ops) -> np.ndarray:
    return reduce(np.kron, ops, np.eye(1, dtype=complex))


def build_generators(m: int) -> GeneratorSet:
    """Jordan-Wigner generators on ``c = floor(m/2)`` qubits.

    Generator ``2t`` is ``Y^(t) (x) Z (x) 1`` and generator ``2t+1`` is
    ``Y^(t) (x) X (x) 1`` for slot ``t``; if ``m`` is odd the last generator
    is the full chain ``Y^(c)``. Here ``Y^(t)`` is ``Y`` on each of the first
    ``t`` slots.
    """
    dim = _check_dim(m)
    c = m // 2
    gens = []
    for t in range(c):
        for local in (_Z, _X):
            gens.append(_kron_all([_Y] * t + [local] + [_I2] * (c - t - 1)))
    if m % 2:
        gens.append(_kron_all([_Y] * c))
    gamma = np.array(gens, dtype=complex)
    gamma.setflags(write=False)
    return GeneratorSet(m=m, dim=dim, gamma=gamma)


def build_edge_observables(table: EncodingTable, gens: GeneratorSet) -> np.ndarray:
    """Edge observables ``A_x`` as a ``(2**(m-1), d, d)`` stack."""
    if table.m != gens.m:
        raise DomainError(f"table has m={table.m} but generators have m={gens.m}")
    signs = table.signs.astype(float)
    obs = np.einsum("ix,iab->xab", signs, gens.gamma) / np.sqrt(table.m)
    return obs


def build_source_state(m: int) -> np.ndarray:
    """Maximally entangled state ``sum_j |j>|j> / sqrt(d)`` with ``d = 2**floor(m/2)``."""
    dim = _check_dim(m)
    psi = np.eye(dim, dtype=complex).reshape(dim * dim) / np.sqrt(dim)
    return psi


def _pair_expectation(state: np.ndarray, a: np.ndarray, b: np.ndarray) -> complex:
    d = a.shape[0]
    t = state.reshape(d, d)
    return complex(np.vdot(t, a @ t @ b.T))


def build_central_factor(
    table: EncodingTable, gens: GeneratorSet, state: np.ndarray, i: int
) -> HermitianOperator:
    """Per-source central factor ``b_i = sigma * gamma_i^T``.

    The sign ``sigma`` is fixed numerically so that
    ``<state| gamma_i (x) b_i |state> = +1``.
    """
    if table.m != gens.m:
        raise DomainError(f"table has m={table.m} but generators have m={gens.m}")
    if not 0 <= i < gens.m:
        raise IndexError(f"central input {i} out of range [0, {gens.m})")
    g = gens.gamma[i]
    b = g.T.copy()
    e = _pair_expectation(state, g, b).real
    if abs(abs(e) - 1.0) > 1e-9:
        raise DomainError(
            f"state is not maximally correlated for generator {i} (<g (x) g^T> = {e:.6g})"
        )
    if e < 0:
        b = -b
    return HermitianOperator(b, dichotomic=True)


def build_realization(n: int, m: int) -> QuantumRealization:
    """Canonical optimal realization for ``n`` sources and ``m`` central inputs."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    table = build_encoding(m)
    gens = build_generators(m)
    state = build_source_state(m)
    edge = build_edge_observables(table, gens)
    central = np.array(
        [build_central_factor(table, gens, state, i).entries for i in range(m)]
    )
    for i in range(m):
        for j in range(i + 1, m):
            if np.max(np.abs(anticommutator(central[i], central[j]))) > OPERATOR_TOL:
                raise AssertionError(f"central factors {i}, {j} do not anticommute")
    return QuantumRealization(
        n=n,
        m=m,
        dim=gens.dim,
        edge_observables=np.broadcast_to(edge, (n,) + edge.shape).copy(),
        central_factors=np.broadcast_to(central, (n,) + central.shape).copy(),
        source_states=np.broadcast_to(state, (n,) + state.shape).copy(),
    )


def _complex_pairs(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(a).ravel()]


def operator_to_json(op: np.ndarray | HermitianOperator) -> str:
    """Row-major ``[re, im]`` pairs plus the dimension."""
    a = op.entries if isinstance(op, HermitianOperator) else np.asarray(op)
    return json.dumps({"dim": int(a.shape[0]), "entries": _complex_pairs(a)})


def state_to_json(state: np.ndarray) -> str:
    return json.dumps({"dim": int(state.shape[0]), "amplitudes": _complex_pairs(state)})
