import math

import numpy as np
import pytest

from ipq.errors import CapacityError
from ipq.fock import (
    FockSpec,
    IPQModes,
    build_mode_ops,
    collective_modes,
    commutator,
    cphase_unitary,
    dag,
    destroy,
    leo_reflection,
    leo_reflection_expm,
    number,
    one_particle_projector,
    parity_operator,
    su2_generators,
)


@pytest.fixture
def pair():
    spec = FockSpec(2, 2)
    c0, c1 = build_mode_ops(spec)
    return spec, c0, c1


def test_destroy_lowers_levels():
    a = destroy(3)
    ket = np.zeros(4)
    ket[2] = 1
    assert np.allclose(a @ ket, math.sqrt(2) * np.eye(4)[1])


def test_modes_commute_across_sites(pair):
    _, c0, c1 = pair
    assert np.max(np.abs(commutator(c0, c1))) == 0
    assert np.max(np.abs(commutator(c0, dag(c1)))) == 0


def test_canonical_commutator_below_cutoff(pair):
    spec, c0, _ = pair
    comm = commutator(c0, dag(c0))
    # exact except on the top level of mode 0
    n0 = np.rint(np.real(np.diag(number(c0))))
    keep = n0 < spec.cutoff_per_mode
    assert np.allclose(comm[np.ix_(keep, keep)], np.eye(keep.sum()))


def test_capacity_error_on_oversized_space():
    with pytest.raises(CapacityError):
        build_mode_ops(FockSpec(13, 1))


def test_su2_algebra_on_one_particle_sector():
    spec = FockSpec(2, 1)
    c0, c1 = build_mode_ops(spec)
    jx, jy, jz = su2_generators(c0, c1)
    P = one_particle_projector(c0, c1, spec.vacuum())
    r = lambda op: dag(P) @ op @ P  # noqa: E731
    assert np.max(np.abs(r(commutator(jx, jz)) + 2j * r(jy))) <= 1e-12
    assert np.max(np.abs(r(commutator(jx, jy)) - 2j * r(jz))) <= 1e-12
    # Pauli matrices in the ordering {|1>, |0>}
    assert np.allclose(r(jz), np.diag([1, -1]))
    assert np.allclose(r(jx), [[0, 1], [1, 0]])


def test_jz_sign_convention():
    m = IPQModes.build(1)
    _, _, jz = su2_generators(m.c0, m.c1)
    one = m.ket(0, 1)
    assert np.vdot(one, jz @ one).real == pytest.approx(1.0)


def test_collective_modes_are_orthonormal(pair):
    _, c0, c1 = pair
    a0, a1 = collective_modes(c0, c1)
    # truncation spoils commutators only on the top level, so check N <= 1
    low = np.rint(np.real(np.diag(number(c0) + number(c1)))) <= 1
    sub = lambda op: op[np.ix_(low, low)]  # noqa: E731
    assert np.max(np.abs(sub(commutator(a0, dag(a1))))) <= 1e-15
    assert np.allclose(sub(commutator(a1, dag(a1))), np.eye(low.sum()))
    assert np.allclose(number(a0) + number(a1), number(c0) + number(c1))


def test_leo_reflection_matches_expm(pair):
    _, c0, c1 = pair
    assert np.allclose(leo_reflection(c0, c1), leo_reflection_expm(c0, c1), atol=1e-12)


def test_parity_is_plus_one_on_code():
    m = IPQModes.build(2)
    P = parity_operator(m.c0, m.c1)
    for ket in (m.logical.ket0, m.logical.ket1):
        assert np.allclose(P @ ket, ket)
    assert np.allclose(P @ m.vacuum, -m.vacuum)


def test_cphase_diagonal():
    U = cphase_unitary(np.diag([0.0, 1.0]), np.diag([0.0, 1.0]), math.pi)
    assert np.allclose(np.diag(U), [1, -1])


def test_ipq_ket_is_linear_in_amplitudes():
    m = IPQModes.build(1)
    psi = m.ket(0.6, 0.8j)
    assert np.allclose(psi, 0.6 * m.logical.ket0 + 0.8j * m.logical.ket1)
    assert np.vdot(psi, psi).real == pytest.approx(1.0)
