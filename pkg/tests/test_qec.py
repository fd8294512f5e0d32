import numpy as np
import pytest

from ipq.errors import DimensionError, SyndromeError
from ipq.fock import IPQModes, destroy
from ipq.qec import (
    CodeSpace,
    ErrorSet,
    binomial_code,
    binomial_errors,
    binomial_recovery,
    binomial_recovery_unitary,
    code_epsilon_threshold,
    dipole_error,
    fidelity,
    ipq_code,
    ipq_errors,
    kl_matrix,
    parity_measure,
    parity_syndrome,
    qec_report,
    random_one_particle,
    spectral_epsilon_threshold,
    wwm_recover,
    wwm_trials,
)

# [DERIVED] (1/sqrt2)^2 * 2 <x0><x1>-type cross term between the IPQ codewords
IPQ_KL_RESIDUAL = 1.0
# [DERIVED] smallest eps for each WWM construction at cutoff 4
CODE_THRESHOLD = 1.0
SPECTRAL_THRESHOLD = 1.0432


@pytest.fixture(scope="module")
def modes():
    return IPQModes.build(4)


def test_binomial_code_satisfies_kl():
    r = kl_matrix(binomial_code(), binomial_errors())
    assert r.satisfied and r.residual <= 1e-12
    assert np.allclose(r.C, [[1, 0], [0, 2]])


def test_ipq_code_fails_kl_with_pinned_residual(modes):
    r = kl_matrix(ipq_code(modes), ipq_errors(modes))
    assert not r.satisfied
    assert abs(r.residual - IPQ_KL_RESIDUAL) <= 1e-12


def test_second_order_errors_available(modes):
    e = ipq_errors(modes, second_order=True)
    assert e.labels[:2] == ("I", "x") and len(e.operators) == 5


def test_kl_dimension_check(modes):
    with pytest.raises(DimensionError):
        kl_matrix(binomial_code(), ipq_errors(modes))


def test_code_space_validation():
    with pytest.raises(ValueError):
        CodeSpace((np.array([1, 0]), np.array([1, 0])))
    with pytest.raises(ValueError):
        ErrorSet(())


def test_parity_syndrome(modes):
    psi = modes.ket(0.6, 0.8)
    assert parity_syndrome(psi, modes) == 1
    assert parity_syndrome(dipole_error(modes) @ psi, modes) == -1
    with pytest.raises(SyndromeError):
        parity_syndrome(psi + modes.vacuum, modes)


def test_parity_measure_branches(modes):
    mixed = (modes.ket(1, 0) + modes.vacuum) / np.sqrt(2)
    even, odd = sorted(parity_measure(mixed, modes), key=lambda b: b.outcome)
    assert even.probability == pytest.approx(0.5) and odd.probability == pytest.approx(0.5)
    assert np.allclose(odd.post_state, modes.ket(1, 0))


def test_epsilon_thresholds(modes):
    x, code = dipole_error(modes), ipq_code(modes)
    assert code_epsilon_threshold(x, code) == pytest.approx(CODE_THRESHOLD, abs=1e-12)
    assert spectral_epsilon_threshold(x, code) == pytest.approx(SPECTRAL_THRESHOLD, abs=1e-4)


def test_code_recovery_is_exact(modes):
    eps, runs = wwm_trials(25, seed=3)
    assert eps == pytest.approx(SPECTRAL_THRESHOLD, abs=1e-4)
    for r in runs:
        assert abs(1 - r.fidelity0) <= 1e-10
        assert r.unitarity_defect <= 1e-10
        assert abs(r.probability0 + r.probability1 - 1) <= 1e-10
        assert (r.syndrome_before, r.syndrome_after) == (1, -1)


def test_spectral_recovery_loses_fidelity():
    _, runs = wwm_trials(25, seed=3, method="spectral")
    assert max(r.unitarity_defect for r in runs) <= 1e-10
    assert np.mean([r.fidelity0 for r in runs]) < 0.9


def test_below_threshold_is_flagged(modes):
    x, code = dipole_error(modes), ipq_code(modes)
    psi = random_one_particle(modes, np.random.default_rng(0))
    _, _, diag = wwm_recover(0.5 * x @ psi, 0.5, x, psi, "code", code)
    assert diag.non_unitary and diag.notes


def test_recover_rejects_bad_inputs(modes):
    x = dipole_error(modes)
    with pytest.raises(ValueError):
        wwm_recover(np.zeros(x.shape[0]), 1.0, x, method="spectral")
    with pytest.raises(ValueError):
        wwm_recover(x[:, 1], 1.0, x, method="code")


def test_binomial_recovery_after_loss():
    code = binomial_code()
    a = destroy(4)
    U = binomial_recovery_unitary()
    assert np.allclose(U.conj().T @ U, np.eye(5), atol=1e-12)
    rng = np.random.default_rng(1)
    for _ in range(10):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = code.encode(z / np.linalg.norm(z))
        out = binomial_recovery(a @ psi)
        assert fidelity(out, psi) == pytest.approx(1.0, abs=1e-12)


def test_binomial_recovery_rejects_even_support():
    with pytest.raises(ValueError):
        binomial_recovery(binomial_code().encode([1, 0]))


def test_report_is_seeded():
    a = qec_report(trials=5, seed=11)
    b = qec_report(trials=5, seed=11)
    assert a == b
