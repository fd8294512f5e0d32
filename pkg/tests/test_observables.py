import math

import numpy as np
import pytest

from ipq.observables import (
    InitialState,
    bloch_from_moments,
    clamp_series,
    effective_state,
    fidelity_bloch,
    infidelity,
    initial_expectations,
    system_moments,
    trace_distance_bloch,
)


def test_pure_state_requires_normalization():
    with pytest.raises(ValueError):
        InitialState.pure(1.0, 1.0)


def test_mixed_state_validation():
    with pytest.raises(ValueError):
        InitialState.mixed(np.diag([1.5, -0.5]))
    assert InitialState.mixed(np.eye(2) / 2).amplitudes is None


def test_bloch_of_basis_states():
    one = initial_expectations(InitialState.pure(0, 1))
    plus = initial_expectations(InitialState.pure(math.sqrt(0.5), math.sqrt(0.5)))
    assert np.allclose(bloch_from_moments(one), [0, 0, 1])
    assert np.allclose(bloch_from_moments(plus), [1, 0, 0])


def test_a_representation_of_dark_state():
    dfs = InitialState.pure(-math.sqrt(0.5), math.sqrt(0.5))
    m = initial_expectations(dfs, "a")
    # all population in a0
    assert np.allclose(m, np.diag([1, 0]))


def test_identity_coefficients_keep_moments():
    m0 = initial_expectations(InitialState.pure(0.6, 0.8))
    assert np.allclose(system_moments(np.eye(2), m0), m0)


def test_anomalous_coefficients_add_vacuum_term():
    m0 = np.zeros((2, 2))
    out = system_moments(np.zeros((2, 2)), m0, 0.1 * np.eye(2))
    assert np.allclose(out, 0.01 * np.eye(2))


def test_fidelity_of_pure_states():
    assert fidelity_bloch([1, 0, 0], [1, 0, 0]) == pytest.approx(1.0)
    assert fidelity_bloch([1, 0, 0], [-1, 0, 0]) == pytest.approx(0.0)
    assert fidelity_bloch([0, 0, 1], [1, 0, 0]) == pytest.approx(0.5)


def test_fidelity_matches_uhlmann_for_mixed_states():
    from scipy.linalg import sqrtm

    r, s = np.array([0.3, -0.2, 0.5]), np.array([-0.1, 0.4, 0.2])
    rho, sig = effective_state(r).rho, effective_state(s).rho
    sq = sqrtm(rho)
    f = np.real(np.trace(sqrtm(sq @ sig @ sq))) ** 2
    assert infidelity(rho, sig) == pytest.approx(1 - f, abs=1e-12)


def test_effective_state_clamps():
    st = effective_state([1.2, 0, 0], warn=False)
    assert st.clamped and np.allclose(st.bloch, [1, 0, 0])


def test_clamp_series_flags_rows():
    out, flags = clamp_series(np.array([[0.5, 0, 0], [0, 2.0, 0]]))
    assert flags.tolist() == [False, True]
    assert np.allclose(out[1], [0, 1, 0])


def test_trace_distance():
    assert trace_distance_bloch([1, 0, 0], [-1, 0, 0]) == pytest.approx(1.0)
