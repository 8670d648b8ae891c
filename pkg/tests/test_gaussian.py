import json

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from openchain.errors import InvalidArgumentError, InvalidStateError, NumericalSingularityError
from openchain.gaussian import (
    GaussianState,
    StructuralMatrices,
    analytic_equal_temp_fidelity,
    basis_change,
    direct_sum,
    fidelity,
    partial_trace,
    symplectic_eigenvalues,
    symplectic_to_passive,
    thermal_occupation,
    thermal_state,
    vacuum_state,
)

from _states import random_state, seeds, single_mode

# 1 / (e^0.1 - 1) and 2n + 1, evaluated with mpmath at 30 digits
NBAR_1_10 = 9.50833194477504962
TAU_1_10 = 20.0166638895500992


def test_frozen_occupation_matches_mpmath():
    mp.mp.dps = 30
    n = 1 / (mp.e ** mp.mpf("0.1") - 1)
    assert float(n) == pytest.approx(NBAR_1_10, rel=1e-16)
    assert float(2 * n + 1) == pytest.approx(TAU_1_10, rel=1e-16)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_structural_matrices(n):
    s = StructuralMatrices.for_modes(n)
    eye = np.eye(2 * n)
    assert np.array_equal(s.omega @ s.omega, -eye)
    assert np.array_equal(s.zmat @ s.zmat, eye)
    assert np.array_equal(s.xmat @ s.xmat, eye)


def test_vacuum():
    v = vacuum_state(3)
    assert np.array_equal(v.cov, np.eye(6))
    assert np.array_equal(v.disp, np.zeros(6))
    assert np.allclose(symplectic_eigenvalues(vacuum_state(1)), [1.0])
    assert np.array_equal(vacuum_state(2).c2, np.zeros((2, 2)))
    with pytest.raises(InvalidArgumentError):
        vacuum_state(0)


def test_thermal_occupation():
    assert thermal_occupation(1.0, 0.0) == 0.0
    assert thermal_occupation(1.0, 10.0) == pytest.approx(NBAR_1_10, rel=1e-14)
    assert 2 * thermal_occupation(1.0, 10.0) + 1 == pytest.approx(TAU_1_10, rel=1e-14)
    assert np.allclose(thermal_occupation(np.array([1.0, 2.0]), 0.0), 0.0)
    for bad in (0.0, -1.0):
        with pytest.raises(InvalidArgumentError):
            thermal_occupation(bad, 1.0)


def test_thermal_state():
    assert thermal_state([2.0], 0.0).allclose(vacuum_state(1), atol=0)
    s = thermal_state([1.0, 1.0], 10.0)
    assert np.allclose(s.cov, TAU_1_10 * np.eye(4), rtol=1e-14, atol=0)
    s = thermal_state([1.0, 2.0], 10.0)
    assert np.count_nonzero(s.cov - np.diag(np.diag(s.cov))) == 0
    assert np.array_equal(s.c2, np.zeros((2, 2)))
    with pytest.raises(InvalidArgumentError):
        thermal_state([1.0, -1.0], 1.0)


def test_symplectic_eigenvalues_of_thermal_mode():
    assert symplectic_eigenvalues(thermal_state([1.0], 10.0)) == pytest.approx([TAU_1_10], rel=1e-14)


def test_state_validation():
    with pytest.raises(InvalidStateError):
        GaussianState(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(InvalidStateError):
        GaussianState(np.diag([1.0, 2.0]))  # C1^T block mismatch
    with pytest.raises(InvalidStateError):
        GaussianState(np.eye(2), np.array([1.0, 2.0]))
    with pytest.raises(InvalidStateError):
        GaussianState(np.eye(3))


def test_state_is_read_only():
    s = vacuum_state(1)
    with pytest.raises(ValueError):
        s.cov[0, 0] = 2.0


def test_json_round_trip():
    s = random_state(np.random.default_rng(3), 2)
    back = GaussianState.from_json(json.loads(json.dumps(s.to_json())))
    assert np.array_equal(back.cov, s.cov) and np.array_equal(back.disp, s.disp)
    assert set(s.to_json()) == {"n_modes", "cov_re", "cov_im", "disp_re", "disp_im"}


def test_partial_trace():
    prod = thermal_state([1.0, 2.0, 3.0], 2.0)
    assert partial_trace(prod, [0]).allclose(thermal_state([1.0], 2.0), atol=1e-15)
    s = random_state(np.random.default_rng(0), 3)
    assert partial_trace(s, [0, 1, 2]).allclose(s, atol=0)
    for bad in ([], [3], [-1], [0, 0]):
        with pytest.raises(InvalidArgumentError):
            partial_trace(s, bad)


def test_partial_trace_of_direct_sum_recovers_factor():
    rng = np.random.default_rng(5)
    a, b = random_state(rng, 2), random_state(rng, 1)
    joint = direct_sum([a, b])
    assert partial_trace(joint, [0, 1]).allclose(a, atol=1e-15)
    assert partial_trace(joint, [2]).allclose(b, atol=1e-15)


def test_basis_change():
    rng = np.random.default_rng(1)
    s = random_state(rng, 3)
    assert basis_change(s, np.eye(6)).allclose(s, atol=1e-14)
    from scipy.stats import unitary_group

    u = symplectic_to_passive(unitary_group.rvs(3, random_state=rng))
    assert basis_change(basis_change(s, u), u.conj().T).allclose(s, atol=1e-12)
    with pytest.raises(InvalidArgumentError):
        basis_change(s, 2 * np.eye(6))
    with pytest.raises(InvalidArgumentError):
        basis_change(s, np.eye(6)[::-1])  # unitary but mixes a and a^dag


@given(seeds)
def test_basis_change_preserves_symplectic_spectrum(seed):
    from scipy.stats import unitary_group

    rng = np.random.default_rng(seed)
    taus = 1 + 2 * rng.uniform(0, 3, 3)
    s = GaussianState.from_blocks(np.diag(taus))
    u = symplectic_to_passive(unitary_group.rvs(3, random_state=rng))
    assert np.allclose(symplectic_eigenvalues(basis_change(s, u)), np.sort(taus), atol=1e-10)


@given(seeds, st.integers(1, 3))
def test_random_states_are_physical(seed, n):
    assert random_state(np.random.default_rng(seed), n).is_physical()


def test_unphysical_state_detected():
    assert not GaussianState(0.5 * np.eye(2)).is_physical()


# -- fidelity


def test_fidelity_vacuum_vs_thermal():
    # Uhlmann root fidelity of |0> and a thermal mode is sqrt(p_0) = 1 / sqrt(n + 1)
    thermal = GaussianState(3.0 * np.eye(2))  # n = 1
    assert fidelity(vacuum_state(1), thermal) == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_fidelity_of_thermal_pair_closed_form():
    n1, n2 = 1.0, 2.0
    expected = 1 / (np.sqrt((n1 + 1) * (n2 + 1)) - np.sqrt(n1 * n2))
    assert fidelity(GaussianState(3.0 * np.eye(2)), GaussianState(5.0 * np.eye(2))) == pytest.approx(expected, abs=1e-12)


def test_fidelity_of_coherent_states():
    # |<alpha|beta>| = exp(-|alpha - beta|^2 / 2)
    a, b = 0.3 + 0.4j, -0.2 + 0.1j
    assert fidelity(single_mode(0.0, 0.0, a), single_mode(0.0, 0.0, b)) == pytest.approx(np.exp(-abs(a - b) ** 2 / 2), abs=1e-12)


def test_fidelity_errors():
    with pytest.raises(InvalidArgumentError):
        fidelity(vacuum_state(1), vacuum_state(2))
    singular = GaussianState(np.zeros((2, 2)))
    with pytest.raises(NumericalSingularityError):
        fidelity(singular, singular)


@settings(max_examples=60)
@given(seeds, st.integers(1, 3))
def test_fidelity_axioms(seed, n):
    rng = np.random.default_rng(seed)
    a, b = random_state(rng, n), random_state(rng, n)
    fab, fba = fidelity(a, b), fidelity(b, a)
    assert fab == pytest.approx(fba, abs=1e-10)
    assert 0 < fab <= 1
    assert fidelity(a, a) == pytest.approx(1.0, abs=1e-8)


@given(seeds)
def test_fidelity_below_one_for_distinct_states(seed):
    rng = np.random.default_rng(seed)
    a = random_state(rng, 2)
    shifted = GaussianState(a.cov, a.disp + np.array([0.05, 0, 0.05, 0]))
    assert fidelity(a, shifted) < 1 - 1e-6


@given(seeds)
def test_fidelity_is_invariant_under_common_passive_unitary(seed):
    from scipy.stats import unitary_group

    rng = np.random.default_rng(seed)
    a, b = random_state(rng, 2), random_state(rng, 2)
    u = symplectic_to_passive(unitary_group.rvs(2, random_state=rng))
    assert fidelity(basis_change(a, u), basis_change(b, u)) == pytest.approx(fidelity(a, b), abs=1e-10)


def test_fidelity_multiplicative_on_products():
    rng = np.random.default_rng(11)
    a1, b1, a2, b2 = (random_state(rng, 1) for _ in range(4))
    joint = fidelity(direct_sum([a1, a2]), direct_sum([b1, b2]))
    assert joint == pytest.approx(fidelity(a1, b1) * fidelity(a2, b2), abs=1e-12)


def test_analytic_fidelity_basic():
    assert analytic_equal_temp_fidelity(1.0, 0.0, 10.0) == pytest.approx(1.0, abs=1e-15)
    gs = np.linspace(0.0, 0.7, 30)
    vals = [analytic_equal_temp_fidelity(1.0, g, 10.0) for g in gs]
    assert np.all(np.diff(vals) <= 1e-15)
    with pytest.raises(InvalidArgumentError):
        analytic_equal_temp_fidelity(1.0, 0.75, 10.0)
    with pytest.raises(InvalidArgumentError):
        analytic_equal_temp_fidelity(1.0, -0.1, 10.0)


def test_analytic_fidelity_single_factor_against_thermal_closed_form():
    # each factor is the fidelity of two thermal modes; check one against 1/(sqrt((n1+1)(n2+1)) - sqrt(n1 n2))
    t1, t2 = 3.0, 5.0
    factor = 4 * (np.sqrt((t2**2 - 1) * (t1**2 - 1)) + t1 * t2 + 1) ** 2 / (t1 + t2) ** 4
    n1, n2 = (t1 - 1) / 2, (t2 - 1) / 2
    assert factor**0.25 == pytest.approx(1 / (np.sqrt((n1 + 1) * (n2 + 1)) - np.sqrt(n1 * n2)), abs=1e-14)
