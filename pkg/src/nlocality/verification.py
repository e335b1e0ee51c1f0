"""Pointwise certificates of optimality.

The sum-of-squares decomposition is checked on concrete realizations rather
than solved as an SDP. For central input ``i`` let ``u_k`` be the normalized
vector ``comb(k, i)|psi_k> / omega^k_i`` and ``w_k = b^k_i|psi_k>``. The
residual of input ``i`` is

    |M_i|^2 = 2 - 2 * prod_k |<w_k|u_k>|^(1/n)

which is non-negative by Cauchy-Schwarz and turns the weighted sum
``gamma = sum_i omega_i^(1/n) / 2 * |M_i|^2`` into exactly
``sum_i omega_i^(1/n) - delta``. It vanishes iff every ``u_k`` is parallel
to ``w_k``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import unitary_group

from . import __version__
from .algebra import QuantumRealization
from .correlations import bipartite_bell_value, combination, delta_value
from .encoding import EncodingTable
from .errors import DegenerateRealizationError, DomainError

__all__ = [
    "TOLERANCES",
    "VerificationReport",
    "omega_norm",
    "omega_matrix",
    "sos_residual",
    "sos_residuals",
    "gamma_value",
    "gamma_direct",
    "gamma_probe",
    "delta_m_value",
    "omega_square_sum",
    "gram_error",
    "constraint_error",
    "givens_rotation",
    "rotate_edge_observable",
    "randomize_realization",
    "conjugate_party",
    "self_test_report",
]

TOLERANCES = {
    "operator": 1e-10,
    "residual": 1e-10,
    "value": 1e-9,
    "gamma_floor": -1e-9,
}


def _edge_vector(real: QuantumRealization, k: int, op: np.ndarray) -> np.ndarray:
    d = real.dim
    t = real.source_states[k].reshape(d, d)
    return (op @ t).ravel()


def _central_vector(real: QuantumRealization, k: int, i: int) -> np.ndarray:
    d = real.dim
    t = real.source_states[k].reshape(d, d)
    return (t @ real.central_factors[k, i].T).ravel()


def omega_norm(real: QuantumRealization, table: EncodingTable, i: int, k: int) -> float:
    """``|| comb(k, i) |psi_k> ||``."""
    return float(np.linalg.norm(_edge_vector(real, k, combination(real, table, k, i))))


def omega_matrix(real: QuantumRealization, table: EncodingTable) -> np.ndarray:
    """``(n, m)`` array of :func:`omega_norm` values."""
    return np.array(
        [[omega_norm(real, table, i, k) for i in range(real.m)] for k in range(real.n)]
    )


def _residual_squared(real: QuantumRealization, table: EncodingTable, i: int) -> float:
    n = real.n
    logs = 0.0
    for k in range(n):
        v = _edge_vector(real, k, combination(real, table, k, i))
        om = float(np.linalg.norm(v))
        if om < 1e-14:
            raise DegenerateRealizationError(f"omega vanishes for party {k}, input {i}")
        u = v / om
        w = _central_vector(real, k, i)
        s = 1.0 if np.vdot(w, u).real >= 0 else -1.0
        # |<w|u>| = 1 - r^2/2 for unit vectors; r avoids cancellation near 1
        r2 = float(np.linalg.norm(u - s * w)) ** 2
        with np.errstate(divide="ignore"):
            logs += np.log1p(-min(r2, 2.0) / 2)
    return float(-2.0 * np.expm1(logs / n))


def sos_residual(real: QuantumRealization, table: EncodingTable, i: int) -> float:
    """``|M_i|psi>|`` for central input ``i``.

    Raises:
        DegenerateRealizationError: if some ``omega^k_i`` vanishes.
    """
    if real.m != table.m:
        raise DomainError(f"realization has m={real.m} but table has m={table.m}")
    if not 0 <= i < real.m:
        raise IndexError(f"central input {i} out of range [0, {real.m})")
    return float(np.sqrt(abs(max(_residual_squared(real, table, i), 0.0))))


def sos_residuals(real: QuantumRealization, table: EncodingTable) -> np.ndarray:
    return np.array([sos_residual(real, table, i) for i in range(real.m)])


def gamma_value(real: QuantumRealization, table: EncodingTable) -> float:
    """``sum_i omega_i^(1/n) / 2 * |M_i|^2`` with ``omega_i = prod_k omega^k_i``."""
    om = np.prod(omega_matrix(real, table), axis=0) ** (1.0 / real.n)
    res2 = np.array([_residual_squared(real, table, i) for i in range(real.m)])
    return float(np.sum(om / 2 * res2))


def gamma_direct(real: QuantumRealization, table: EncodingTable) -> float:
    """``sum_i omega_i^(1/n) - delta``; equals :func:`gamma_value` identically."""
    om = np.prod(omega_matrix(real, table), axis=0) ** (1.0 / real.n)
    return float(np.sum(om) - delta_value(real, table).delta)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def randomize_realization(real: QuantumRealization, rng) -> QuantumRealization:
    """Conjugate each party's edge observables by a random unitary and draw
    fresh random pure source states; central factors are kept."""
    rng = _rng(rng)
    d = real.dim
    edge = np.array(real.edge_observables)
    for k in range(real.n):
        u = unitary_group.rvs(d, random_state=rng) if d > 1 else np.eye(1)
        edge[k] = u @ edge[k] @ u.conj().T
    states = rng.normal(size=(real.n, d * d)) + 1j * rng.normal(size=(real.n, d * d))
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    return real.replace(edge_observables=edge, source_states=states)


def gamma_probe(
    real: QuantumRealization, table: EncodingTable, trials: int, rng=0
) -> float:
    """Minimum of :func:`gamma_value` over ``real`` and ``trials`` random perturbations."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    rng = _rng(rng)
    best = gamma_value(real, table)
    for _ in range(trials):
        best = min(best, gamma_value(randomize_realization(real, rng), table))
    return best


def delta_m_value(real: QuantumRealization, table: EncodingTable, k: int) -> float:
    """``(2^(m-1) - m) 2^(m-1) - sum_l <psi_l|psi_l>`` on source ``k``."""
    total = 0.0
    for l in range(table.num_constraints):
        op = np.einsum("x,xab->ab", table.constraint_signs[l].astype(float), real.edge_observables[k])
        v = _edge_vector(real, k, op)
        total += float(np.vdot(v, v).real)
    x = table.num_inputs
    return float(table.num_constraints * x - total)


def omega_square_sum(real: QuantumRealization, table: EncodingTable, k: int) -> float:
    return float(np.sum(omega_matrix(real, table)[k] ** 2))


def _spectral(a: np.ndarray) -> np.ndarray:
    return np.linalg.norm(a, ord=2, axis=(-2, -1))


def gram_error(real: QuantumRealization, table: EncodingTable) -> float:
    """Largest operator-norm deviation of ``{A_j, A_j'}`` from ``G[j, j'] * 1``."""
    g = table.gram_array()
    eye = np.eye(real.dim)
    worst = 0.0
    for k in range(real.n):
        a = real.edge_observables[k]
        prod = np.einsum("xab,ybc->xyac", a, a)
        anti = prod + prod.transpose(1, 0, 2, 3)
        dev = anti - g[:, :, None, None] * eye
        worst = max(worst, float(_spectral(dev).max()))
    return worst


def constraint_error(real: QuantumRealization, table: EncodingTable) -> float:
    """Largest operator norm of ``sum_x C[l, x] A^k_x`` over parties and constraints."""
    if table.num_constraints == 0:
        return 0.0
    c = table.constraint_signs.astype(float)
    ops = np.einsum("lx,kxab->klab", c, real.edge_observables)
    return float(_spectral(ops).max())


def givens_rotation(dim: int, theta: float, rng) -> np.ndarray:
    """Rotation by ``theta`` in a random real 2-plane of ``R^dim``."""
    rng = _rng(rng)
    q, _ = np.linalg.qr(rng.normal(size=(dim, 2)))
    u, v = q[:, 0], q[:, 1]
    return (
        np.eye(dim)
        + (np.cos(theta) - 1) * (np.outer(u, u) + np.outer(v, v))
        + np.sin(theta) * (np.outer(v, u) - np.outer(u, v))
    )


def rotate_edge_observable(
    real: QuantumRealization, k: int, x: int, theta: float, rng=0, min_shift: float = 1e-3
) -> QuantumRealization:
    """Conjugate ``A^k_x`` by a random-plane Givens rotation.

    Planes whose rotation barely moves the observable (commutator norm below
    ``min_shift``) are redrawn.
    """
    rng = _rng(rng)
    a = real.edge_observables[k, x]
    for _ in range(1000):
        r = givens_rotation(real.dim, theta, rng)
        rotated = r @ a @ r.T
        if np.linalg.norm(rotated - a, ord=2) >= min_shift * abs(np.sin(theta)):
            break
    else:  # pragma: no cover
        raise DomainError("could not find a rotation plane that moves the observable")
    edge = np.array(real.edge_observables)
    edge[k, x] = rotated
    return real.replace(edge_observables=edge)


def conjugate_party(
    real: QuantumRealization, k: int, u_edge: np.ndarray, u_central: np.ndarray
) -> QuantumRealization:
    """Apply local unitaries on source ``k`` to its observables and its state."""
    edge = np.array(real.edge_observables)
    central = np.array(real.central_factors)
    states = np.array(real.source_states)
    edge[k] = u_edge @ edge[k] @ u_edge.conj().T
    central[k] = u_central @ central[k] @ u_central.conj().T
    d = real.dim
    t = states[k].reshape(d, d)
    states[k] = (u_edge @ t @ u_central.T).ravel()
    return real.replace(edge_observables=edge, central_factors=central, source_states=states)


@dataclass
class VerificationReport:
    n: int
    m: int
    delta: float
    quantum_opt: float
    classical_bound: int
    sos_residuals: list[float]
    gamma_value: float
    gram_error: float
    constraint_error: float
    omega: list[list[float]]
    delta_m: list[float]
    bell_values: list[float]
    correspondence_gap: float
    checks: dict[str, bool] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=lambda: dict(TOLERANCES))
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def self_test_report(real: QuantumRealization, table: EncodingTable) -> VerificationReport:
    """Aggregate every optimality check for one realization.

    ``correspondence_gap`` is ``prod_k B_k^(1/n) - delta`` where ``B_k`` is the
    sign-aligned bipartite Bell value of source ``k``; it is zero at the optimum
    and non-negative for any realization.
    """
    tol = TOLERANCES
    value = delta_value(real, table)
    residuals = sos_residuals(real, table)
    gamma = gamma_value(real, table)
    gerr = gram_error(real, table)
    cerr = constraint_error(real, table)
    omega = omega_matrix(real, table)
    dms = [delta_m_value(real, table, k) for k in range(real.n)]
    bells = [bipartite_bell_value(real, table, k) for k in range(real.n)]
    aligned = [bipartite_bell_value(real, table, k, align_signs=True) for k in range(real.n)]
    gap = float(np.prod(np.array(aligned) ** (1.0 / real.n)) - value.delta)

    x = table.num_inputs
    omega_opt = x / np.sqrt(real.m)
    checks = {
        "delta_optimal": abs(value.delta - table.quantum_optimum) <= tol["value"],
        "sos_residuals": bool(np.all(residuals <= tol["residual"])),
        "gamma_zero": abs(gamma) <= tol["value"],
        "gram": gerr <= tol["operator"],
        "constraints": cerr <= tol["operator"],
        "omega": bool(np.all(np.abs(omega - omega_opt) <= tol["operator"])),
        "delta_m": all(abs(v - table.num_constraints * x) <= tol["value"] for v in dms),
        "bell": all(abs(b - table.quantum_optimum) <= tol["value"] for b in bells),
        "correspondence": abs(gap) <= tol["value"],
    }
    return VerificationReport(
        n=real.n,
        m=real.m,
        delta=value.delta,
        quantum_opt=table.quantum_optimum,
        classical_bound=table.classical_bound,
        sos_residuals=residuals.tolist(),
        gamma_value=gamma,
        gram_error=gerr,
        constraint_error=cerr,
        omega=omega.tolist(),
        delta_m=dms,
        bell_values=bells,
        correspondence_gap=gap,
        checks=checks,
    )
