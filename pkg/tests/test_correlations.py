"""Tests for correlators, inequality values, joint distributions and noise."""

import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from nlocality.algebra import build_realization
from nlocality.correlations import (
    MAX_JOINT_PAIRS,
    bipartite_bell_value,
    check_probability_constraints,
    correlator,
    correlator_full,
    correlators_from_distribution,
    critical_visibility,
    delta_from_correlators,
    delta_value,
    joint_distribution,
    scenario_to_json,
    sweep_to_csv,
    werner_delta,
    werner_sweep,
)
from nlocality.encoding import build_encoding
from nlocality.errors import DomainError, ResourceError
from nlocality.verification import conjugate_party, randomize_realization, rotate_edge_observable

SMALL = [(n, m) for n in (1, 2) for m in (2, 3, 4)]


def _setup(n, m):
    return build_realization(n, m), build_encoding(m)


@pytest.mark.parametrize(
    "n, m, expected",
    [(2, 3, 6.92820323), (1, 4, 16.0), (2, 2, 2.82842712), (3, 2, 2.82842712)],
)
def test_optimal_delta_examples(n, m, expected):
    value = delta_value(*_setup(n, m))
    assert value.delta == pytest.approx(expected, abs=1e-8)
    assert value.classical_bound == 2 ** (m - 1)


@pytest.mark.parametrize("n, m", [(1, 3), (2, 3), (3, 4)])
def test_correlator_magnitude_at_optimum(n, m):
    real, table = _setup(n, m)
    per_source = 2 ** (m - 1) / np.sqrt(m)
    for i in range(m):
        assert correlator(real, table, i) == pytest.approx(per_source**n, rel=1e-12)


def test_delta_from_correlators_uses_modulus():
    assert delta_from_correlators([-4.0, 9.0], 2) == pytest.approx(5.0)


@pytest.mark.parametrize("n, m", SMALL)
def test_factorized_matches_full_tensor(n, m):
    real, table = _setup(n, m)
    for i in range(m):
        assert abs(correlator(real, table, i) - correlator_full(real, table, i)) <= 1e-10


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(SMALL), st.integers(0, 2**32 - 1))
def test_factorized_matches_full_tensor_random(nm, seed):
    real, table = _setup(*nm)
    real = randomize_realization(real, seed)
    for i in range(table.m):
        assert abs(correlator(real, table, i) - correlator_full(real, table, i)) <= 1e-10


@pytest.mark.parametrize("n, m", SMALL)
def test_joint_distribution_is_normalized(n, m):
    real, table = _setup(n, m)
    dist = joint_distribution(real, table)
    assert np.all(dist.table >= 0) and np.all(dist.table <= 1)
    assert np.allclose(dist.slice_sums(), 1.0, atol=1e-10)
    from_dist = correlators_from_distribution(dist, table)
    assert np.allclose(from_dist, delta_value(real, table).correlators, atol=1e-10)


@pytest.mark.parametrize("n, m", [(1, 3), (2, 3), (1, 4), (2, 4)])
def test_probability_balances_hold_at_optimum(n, m):
    real, table = _setup(n, m)
    res = check_probability_constraints(joint_distribution(real, table), table)
    assert res.shape[:2] == (n, table.num_constraints)
    assert res.max() <= 1e-10


def test_probability_balances_break_when_perturbed():
    real, table = _setup(1, 3)
    bad = rotate_edge_observable(real, 0, 1, 0.3, rng=1)
    res = check_probability_constraints(joint_distribution(bad, table), table)
    assert res.max() > 1e-3


def test_joint_distribution_cap():
    real, table = _setup(MAX_JOINT_PAIRS + 1, 2)
    with pytest.raises(ResourceError):
        joint_distribution(real, table)
    with pytest.raises(ResourceError):
        correlator_full(real, table, 0)


def test_mismatched_m_rejected():
    with pytest.raises(DomainError):
        delta_value(build_realization(1, 3), build_encoding(4))


@pytest.mark.parametrize("n, m", [(1, 3), (2, 3), (2, 4), (3, 2)])
def test_delta_invariant_under_local_unitaries(n, m):
    real, table = _setup(n, m)
    base = delta_value(real, table).delta
    rng = np.random.default_rng(7)
    for k in range(n):
        ua = unitary_group.rvs(real.dim, random_state=rng)
        ub = unitary_group.rvs(real.dim, random_state=rng)
        real = conjugate_party(real, k, ua, ub)
    assert delta_value(real, table).delta == pytest.approx(base, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_delta_invariant_under_unitaries_off_optimum(seed):
    real, table = _setup(2, 3)
    real = randomize_realization(real, seed)
    base = delta_value(real, table).delta
    rng = np.random.default_rng(seed)
    u = unitary_group.rvs(real.dim, random_state=rng)
    w = unitary_group.rvs(real.dim, random_state=rng)
    moved = conjugate_party(real, 1, u, w)
    assert delta_value(moved, table).delta == pytest.approx(base, abs=1e-9)


@pytest.mark.parametrize("k, i", [(0, 0), (1, 2), (0, 1)])
def test_central_sign_flip(k, i):
    real, table = _setup(2, 3)
    before = delta_value(real, table)
    central = np.array(real.central_factors)
    central[k, i] *= -1
    after = delta_value(real.replace(central_factors=central), table)
    assert after.correlators[i] == pytest.approx(-before.correlators[i])
    assert after.delta == pytest.approx(before.delta, abs=1e-12)


@pytest.mark.parametrize("n, m", [(1, 2), (2, 3), (3, 4)])
def test_werner_linear_in_visibility(n, m):
    real, table = _setup(n, m)
    full = delta_value(real, table).delta
    for v in np.linspace(0.05, 0.95, 10):
        assert werner_delta(real, table, v).delta == pytest.approx(v * full, abs=1e-9)
    assert werner_delta(real, table, 0.0).delta == 0.0


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_critical_visibility(m):
    real, table = _setup(2, m)
    v_star = critical_visibility(real, table)
    assert v_star == pytest.approx(1 / np.sqrt(m), abs=1e-9)
    assert werner_delta(real, table, v_star).delta == pytest.approx(2 ** (m - 1), abs=1e-9)


def test_werner_rejects_bad_visibility():
    real, table = _setup(1, 2)
    for v in (-0.1, 1.5):
        with pytest.raises(DomainError):
            werner_delta(real, table, v)


@pytest.mark.parametrize("m, v_cross", [(4, 0.51), (3, 0.58)])
def test_sweep_csv(m, v_cross):
    real, table = _setup(2, m)
    rows = werner_sweep(real, table)
    assert len(rows) == 101 and rows[0][0] == 0.0 and rows[-1][0] == 1.0
    assert rows[-1][1] == pytest.approx(delta_value(real, table).delta)
    parsed = list(csv.DictReader(io.StringIO(sweep_to_csv(rows))))
    assert list(parsed[0]) == ["v", "delta", "bound", "crossing"]
    flagged = [float(r["v"]) for r in parsed if r["crossing"] == "1"]
    assert flagged == [v_cross]
    assert abs(flagged[0] - 1 / np.sqrt(m)) <= 0.01 + 1e-12


def test_bipartite_bell_value_at_optimum():
    real, table = _setup(2, 4)
    for k in range(2):
        assert bipartite_bell_value(real, table, k) == pytest.approx(16.0, abs=1e-9)
    with pytest.raises(IndexError):
        bipartite_bell_value(real, table, 2)


def test_aligned_bell_value_dominates_raw():
    real, table = _setup(1, 3)
    central = np.array(real.central_factors)
    central[0, 0] *= -1
    flipped = real.replace(central_factors=central)
    raw = bipartite_bell_value(flipped, table, 0)
    aligned = bipartite_bell_value(flipped, table, 0, align_signs=True)
    assert raw < aligned
    assert aligned == pytest.approx(4 * np.sqrt(3))


def test_scenario_json():
    value = delta_value(*_setup(2, 3))
    payload = json.loads(scenario_to_json(value))
    assert payload["n"] == 2 and payload["classical_bound"] == 4
    assert payload["delta"] == pytest.approx(4 * np.sqrt(3))
    assert len(payload["correlators"]) == 3


def test_distribution_json():
    dist = joint_distribution(*_setup(1, 2))
    payload = dist.to_dict()
    assert payload["shape"] == [2, 2, 2, 2]
    assert len(payload["table"]) == 16
