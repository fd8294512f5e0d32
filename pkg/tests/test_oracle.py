import math

import numpy as np
import pytest

from ipq.bath import LorentzianSpectrum
from ipq.checks import collective_oracle_error
from ipq.collective import CollectiveScenario, GateKind, run_collective
from ipq.errors import SolverError
from ipq.observables import InitialState
from ipq.oracle import QuadraticModel, collective_model, individual_model, propagate, thermal_expectation
from ipq.pulses import PulseTrain

SPEC = LorentzianSpectrum(5.0, 0.5, 100.0)
PLUS = InitialState.pure(math.sqrt(0.5), math.sqrt(0.5))
GRID = np.linspace(0, math.pi, 201)

# [DERIVED] oracle endpoint, collective storage without LEO, beta = 0.01, T = pi, grid of 201 points
ORACLE_M400 = (0.672996977637493, 0.336498488818756)  # (Jx, n0)
ORACLE_M800 = (0.673046490345464, 0.336523245172737)


def _endpoint(M):
    tr = propagate(collective_model(SPEC, 100.0, PulseTrain.off(math.pi), M), GRID)
    r = thermal_expectation(tr, [0.01], PLUS)
    return r["bloch"][-1], r["excitations"][-1]


def test_frozen_oracle_endpoint_m400():
    b, n = _endpoint(400)
    assert abs(b[0] - ORACLE_M400[0]) <= 1e-9
    assert abs(n[0] - ORACLE_M400[1]) <= 1e-9
    assert abs(b[1]) <= 1e-12 and abs(b[2]) <= 1e-12
    assert n[0] == pytest.approx(n[1], abs=1e-12)


def test_volterra_endpoint_close_to_large_oracle():
    sc = CollectiveScenario(GateKind(), SPEC, 100.0, 0.01, PulseTrain.off(math.pi), math.pi, PLUS)
    res = run_collective(sc, reference=False)
    assert abs(res.bloch.bloch[-1, 0] - ORACLE_M800[0]) <= 1e-3
    assert abs(res.bloch.excitations[-1, 0] - ORACLE_M800[1]) <= 1e-3


def test_oracle_converges_with_modes():
    assert abs(ORACLE_M800[0] - ORACLE_M400[0]) < 1e-4


def test_collective_rows_stay_unitary():
    tr = propagate(collective_model(SPEC, 100.0, PulseTrain(50.0, 0.02 * math.pi, 0.005 * math.pi, 1.0), 100), np.linspace(0, 1, 101))
    norms = np.sum(np.abs(tr.rows) ** 2, axis=-1)
    assert np.max(np.abs(norms - 1)) <= 1e-10


def test_bogoliubov_rows_keep_symplectic_metric():
    m = individual_model((SPEC, SPEC), (100.0, 100.0), PulseTrain.off(0.5), 50)
    tr = propagate(m, np.linspace(0, 0.5, 51))
    assert tr.metric_defect() <= 1e-8
    assert tr.Cbar is not None


def test_model_validation():
    with pytest.raises(ValueError):
        QuadraticModel("collective", [], (100.0, 100.0), PulseTrain.off(1.0))


def test_flipped_kernel_is_detected():
    good = collective_oracle_error(duration=1.0, modes=200)
    bad = collective_oracle_error(duration=1.0, modes=200, kernel_sign=-1.0)
    assert good <= 2e-3 < bad


def test_symplectic_violation_raises(monkeypatch):
    from ipq import oracle

    monkeypatch.setattr(oracle, "SYMPLECTIC_TOL", -1.0)
    m = individual_model((SPEC, SPEC), (100.0, 100.0), PulseTrain.off(0.1), 20)
    with pytest.raises(SolverError):
        propagate(m, np.linspace(0, 0.1, 3))
