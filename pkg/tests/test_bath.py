import math

import numpy as np
import pytest
from scipy.integrate import quad

from ipq.bath import (
    LorentzianSpectrum,
    MemoryKernel,
    discretize,
    nonrwa_kernel,
    quadrature_window,
    rwa_kernel,
    spectral_density,
    spectral_quadrature,
    thermal_occupancy,
)

SPEC = LorentzianSpectrum(Gamma=5.0, gamma=0.5, Omega=100.0)

# [DERIVED] QUADPACK (QAWF) value of int J(w) exp(-i (w - w0) tau) dw at tau = 0.7, w0 = Omega
KERNEL_AT_07 = 0.8808601121291225
# [DERIVED] QUADPACK value of int J(w) nbar(w) dw over the default window [85, 115], beta = 0.01
THERMAL_WINDOW_INTEGRAL = 0.712607772144084


def test_total_weight_matches_numerical_integral():
    val, _ = quad(lambda w: spectral_density(SPEC, w), -np.inf, np.inf)
    assert val == pytest.approx(SPEC.total_weight, rel=1e-10)


def test_cumulative_limits():
    assert SPEC.cumulative(-1e12) == pytest.approx(0.0, abs=1e-10)
    assert SPEC.cumulative(SPEC.Omega) == pytest.approx(0.5 * SPEC.total_weight)


def test_rwa_kernel_matches_frozen_quadpack():
    k = rwa_kernel(SPEC, SPEC.Omega)
    assert abs(k(0.7) - KERNEL_AT_07) <= 1e-9
    assert k(0.7) == pytest.approx(0.5 * SPEC.Gamma * SPEC.gamma * math.exp(-0.35), rel=1e-14)


def test_rwa_kernel_detuning_phase():
    k = rwa_kernel(SPEC, 99.0)
    tau = 0.3
    assert k(tau) == pytest.approx(SPEC.total_weight * np.exp(-(SPEC.gamma + 1j) * tau))


def test_nonrwa_kernel_is_odd_sine_transform():
    k = nonrwa_kernel(SPEC)
    assert abs(k(0.0)) <= 1e-15
    tau = 0.4
    expected = -2j * SPEC.total_weight * math.exp(-SPEC.gamma * tau) * math.sin(SPEC.Omega * tau)
    assert k(tau) == pytest.approx(expected, rel=1e-12)


def test_kernel_rejects_growing_terms():
    with pytest.raises(ValueError):
        MemoryKernel(terms=((1.0, -0.5),))


def test_sampled_kernel_interpolates():
    k = rwa_kernel(SPEC, SPEC.Omega).sampled(2.0, 1e-3)
    assert abs(k(0.7005) - rwa_kernel(SPEC, SPEC.Omega)(0.7005)) <= 1e-6


def test_thermal_occupancy():
    assert thermal_occupancy(100.0, math.inf) == 0.0
    assert thermal_occupancy(100.0, 0.01) == pytest.approx(1 / (math.e - 1))
    with pytest.raises(ValueError):
        thermal_occupancy(0.0, 1.0)


def test_quadrature_matches_quadpack_on_window():
    lo, hi = quadrature_window(SPEC)
    assert (lo, hi) == (85.0, 115.0)
    q = spectral_quadrature(SPEC, 128)
    val = q.integrate(thermal_occupancy(q.omegas, 0.01))
    assert abs(val - THERMAL_WINDOW_INTEGRAL) <= 1e-10
    ref, _ = quad(lambda w: spectral_density(SPEC, w) * thermal_occupancy(w, 0.01), lo, hi, points=[SPEC.Omega], limit=400)
    assert val == pytest.approx(ref, rel=1e-10)


def test_quadrature_weights_carry_the_density():
    q = spectral_quadrature(SPEC, 64)
    assert q.weights.sum() == pytest.approx(SPEC.cumulative(115.0) - SPEC.cumulative(85.0), rel=1e-12)


def test_discretization_keeps_full_weight():
    b = discretize(SPEC, 400)
    assert np.sum(b.couplings**2) == pytest.approx(SPEC.total_weight, rel=1e-12)
    assert b.size == 400
    assert np.all(np.diff(b.omegas) > 0)
    with pytest.raises(ValueError):
        discretize(SPEC, 1)
