import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from openchain.bath import DiscretizedBath, SpectralDensity, discretize, evaluate, lamb_shift, lamb_shift_closed_form
from openchain.errors import InvalidArgumentError, SingularityError

FLAT = SpectralDensity("flat", 1.0, 3.0)
OHMIC = SpectralDensity("ohmic", 1.0, 3.0)


def pv_mpmath(model, eta, cutoff, omega, eps="1e-25"):
    """Symmetric-window principal value at 40 digits, independent of the subtraction method."""
    mp.mp.dps = 40
    w0, e = mp.mpf(omega), mp.mpf(eps)
    j = (lambda w: eta) if model == "flat" else (lambda w: eta * w)
    f = lambda w: j(w) / (w0 - w)
    return float(mp.quad(f, [0, w0 - e]) + mp.quad(f, [w0 + e, cutoff]))


def test_evaluate():
    assert evaluate(FLAT, 1.0) == 1.0
    assert evaluate(OHMIC, 2.0) == 2.0
    assert evaluate(FLAT, 5.0) == 0.0 and evaluate(OHMIC, 5.0) == 0.0
    assert np.allclose(evaluate(OHMIC, np.array([0.5, 1.0, 4.0])), [0.5, 1.0, 0.0])
    with pytest.raises(InvalidArgumentError):
        evaluate(FLAT, 0.0)


def test_model_names_and_validation():
    assert SpectralDensity("ohmic-hard-cutoff").model == "ohmic"
    for kwargs in ({"model": "lorentzian"}, {"amplitude": 0.0}, {"cutoff": -1.0}):
        with pytest.raises(InvalidArgumentError):
            SpectralDensity(**kwargs)
    assert SpectralDensity.from_json({"model": "flat"}, default_cutoff=4.0) == SpectralDensity("flat", 1.0, 4.0)
    assert SpectralDensity.from_json(OHMIC.to_json()) == OHMIC


def test_lamb_shift_examples():
    assert lamb_shift(FLAT, 1.0) == pytest.approx(-0.693147180559945309, abs=1e-12)
    assert lamb_shift(OHMIC, 1.0) == pytest.approx(-3.69314718055994531, abs=1e-12)
    assert lamb_shift(FLAT, 1.5) == pytest.approx(0.0, abs=1e-13)


def test_lamb_shift_frozen_values_match_mpmath():
    assert pv_mpmath("flat", 1, 3, 1) == pytest.approx(-0.693147180559945309, abs=1e-14)
    assert pv_mpmath("ohmic", 1, 3, 1) == pytest.approx(-3.69314718055994531, abs=1e-14)


@pytest.mark.parametrize("spectral", [FLAT, OHMIC, SpectralDensity("ohmic", 0.7, 2.5)])
def test_lamb_shift_against_closed_form_on_grid(spectral):
    grid = np.linspace(0.05, spectral.cutoff - 0.05, 20)
    for w in grid:
        assert lamb_shift(spectral, w) == pytest.approx(lamb_shift_closed_form(spectral, w), abs=1e-8)


@pytest.mark.parametrize("omega", [0.3, 1.0, 2.2])
def test_lamb_shift_against_mpmath(omega):
    assert lamb_shift(OHMIC, omega) == pytest.approx(pv_mpmath("ohmic", 1, 3, omega), abs=1e-10)


def test_lamb_shift_boundary_is_singular():
    for w in (1e-12, 3.0 - 1e-12, 3.0, 4.0):
        with pytest.raises(SingularityError):
            lamb_shift(FLAT, w)


def test_discretize_examples():
    b = discretize(FLAT, 3, 1.0)
    assert np.allclose(b.mode_freqs, [0.5, 1.5, 2.5], atol=1e-15)
    assert np.allclose(b.couplings, [1.0, 1.0, 1.0], atol=1e-15)
    assert np.allclose(discretize(OHMIC, 3, 1.0).couplings, np.sqrt([0.5, 1.5, 2.5]), atol=1e-15)
    cold = discretize(OHMIC, 4, 0.0)
    assert np.array_equal(cold.cov, np.eye(8))
    with pytest.raises(InvalidArgumentError):
        discretize(FLAT, 0, 1.0)


def test_bath_thermal_covariance():
    b = discretize(OHMIC, 5, 2.0)
    diag = 2.0 / np.expm1(b.mode_freqs / 2.0) + 1.0
    assert np.allclose(b.cov, np.diag(np.concatenate([diag, diag])), rtol=1e-14)


def test_bath_validation():
    with pytest.raises(InvalidArgumentError):
        DiscretizedBath(np.array([1.0, 0.5]), np.array([1.0, 1.0]), 1.0)
    with pytest.raises(InvalidArgumentError):
        DiscretizedBath(np.array([0.5, 1.0]), np.array([1.0, -1.0]), 1.0)
    with pytest.raises(InvalidArgumentError):
        DiscretizedBath(np.array([0.5]), np.array([1.0]), -1.0)


@given(st.integers(1, 400), st.sampled_from(["flat", "ohmic"]))
def test_discretisation_sum_rule(m, model):
    # sum h_k^2 is the midpoint rule for int J; it is exact for both linear models
    spectral = SpectralDensity(model, 1.3, 3.0)
    total = 1.3 * 3.0 if model == "flat" else 1.3 * 4.5
    b = discretize(spectral, m, 1.0)
    assert abs(np.sum(b.couplings**2) - total) / total < 1 / m


@given(st.integers(1, 60))
def test_discretised_grid_invariants(m):
    b = discretize(OHMIC, m, 3.0)
    assert np.all(np.diff(b.mode_freqs) > 0)
    assert b.mode_freqs[0] > 0 and b.mode_freqs[-1] <= OHMIC.cutoff
    assert np.all(b.couplings >= 0)
