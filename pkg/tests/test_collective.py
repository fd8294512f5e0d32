import math

import numpy as np
import pytest

from ipq.bath import LorentzianSpectrum
from ipq.collective import (
    CollectiveScenario,
    GateKind,
    SolverSettings,
    a_to_c,
    check_quadrature,
    run_collective,
    simulate,
)
from ipq.errors import ConvergenceError
from ipq.observables import InitialState
from ipq.pulses import PulseTrain

SPEC = LorentzianSpectrum(5.0, 0.5, 100.0)
DFS = InitialState.pure(-math.sqrt(0.5), math.sqrt(0.5))
PLUS = InitialState.pure(math.sqrt(0.5), math.sqrt(0.5))


def scenario(beta=math.inf, initial=PLUS, leo=False, gate=GateKind(), T=math.pi):
    train = PulseTrain(50.0, 0.02 * math.pi, 0.005 * math.pi, T) if leo else PulseTrain.off(T)
    return CollectiveScenario(gate, SPEC, 100.0, beta, train, T, initial)


def test_initial_coefficients_are_identity():
    co = simulate(scenario(T=0.5))
    assert np.allclose(co.A[0], np.eye(2))
    assert np.allclose(co.C[0], np.eye(2))
    assert np.allclose(a_to_c(co.A), co.C)


def test_dark_mode_is_decoherence_free_at_zero_temperature():
    res = run_collective(scenario(initial=DFS))
    assert np.max(res.bloch.infidelity) <= 1e-10
    assert np.allclose(res.bloch.bloch[-1], [-1, 0, 0], atol=1e-10)


def test_dark_mode_picks_up_thermal_population():
    # the a1 mode is filled by the bath even though the a0 coefficient is untouched
    res = run_collective(scenario(beta=0.01, initial=DFS))
    assert np.max(res.bloch.infidelity) > 0.1
    assert res.bloch.excitations[-1, 0] == pytest.approx(res.bloch.excitations[-1, 1], rel=1e-10)


def test_leo_suppresses_storage_infidelity():
    off = run_collective(scenario(beta=0.01))
    on = run_collective(scenario(beta=0.01, leo=True))
    assert np.max(off.bloch.infidelity) > 1e-2
    assert on.bloch.infidelity[-1] <= 5e-3


def test_x_gate_rotates_closed_system():
    one = InitialState.pure(0.0, 1.0)
    sc = scenario(gate=GateKind("x", 1.0), initial=one, T=math.pi / 4).closed()
    res = run_collective(sc, reference=False)
    # G Jx for G t = pi/4 turns the Bloch vector by pi/2 about x
    r = res.bloch.bloch[-1]
    assert abs(r[0]) <= 1e-10 and abs(r[2]) <= 1e-10
    assert abs(abs(r[1]) - 1) <= 1e-10


def test_quadrature_node_doubling_check_is_recorded():
    res = run_collective(scenario(beta=0.01))
    assert res.quad_change is not None and res.quad_change <= 1e-4


def test_check_quadrature_raises_when_nodes_disagree():
    with pytest.raises(ConvergenceError):
        check_quadrature(np.ones(3), 1.1 * np.ones(3), 1e-4)


def test_solver_settings_defaults():
    s = SolverSettings()
    assert s.quad_nodes == 128
