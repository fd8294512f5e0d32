import numpy as np
import pytest

from ipq.bath import MemoryKernel
from ipq.checks import generic_order, scalar_problem
from ipq.errors import DimensionError, SolverError
from ipq.volterra import ExpDrive, LinearMemorySystem, integrate


def test_exponential_path_is_exact_on_scalar_problem():
    sys, exact = scalar_problem()
    grid = np.linspace(0, 4, 41)
    x = integrate(sys, np.array([1.0 + 0j]), grid).states[:, 0]
    assert np.max(np.abs(x - exact(grid))) <= 1e-12


def test_generic_path_is_second_order():
    r = generic_order()
    assert abs(r["order"] - 2.0) <= 0.05


def test_richardson_raises_order_to_four():
    r = generic_order(steps=(20, 40, 80), richardson=True)
    assert abs(r["order"] - 4.0) <= 0.3


def test_rk4_stepper_agrees():
    sys, exact = scalar_problem()
    grid = np.linspace(0, 4, 801)
    x = integrate(sys, np.array([1.0 + 0j]), grid, stepper="rk4").states[-1, 0]
    assert abs(x - exact(4.0)[0]) <= 1e-9


def test_sampled_kernel_runs_on_generic_path():
    sys, exact = scalar_problem()
    k = sys.memory[0][0]
    sampled = LinearMemorySystem(1, sys.drift, [(k.sampled(4.0, 1e-4), sys.memory[0][1])])
    grid = np.linspace(0, 4, 321)
    x = integrate(sampled, np.array([1.0 + 0j]), grid, "generic", richardson=True).states[-1, 0]
    assert abs(x - exact(4.0)[0]) <= 1e-6


def test_exp_drive_matches_rk4():
    k = MemoryKernel(terms=((0.5, 1.0 + 2.0j),))
    drive = ExpDrive(np.array([1.0, 0.0]), np.array([3.0]))
    A = np.array([[-0.2j, 0.1], [0.1, -0.4j]])
    sys = LinearMemorySystem(2, lambda t: A, [(k, -np.eye(2))], drive)
    grid = np.linspace(0, 3, 601)
    a = integrate(sys, np.zeros((2, 1), dtype=complex), grid).states
    b = integrate(sys, np.zeros((2, 1), dtype=complex), grid, stepper="rk4").states
    assert np.max(np.abs(a - b)) <= 1e-9


def test_dimension_mismatch():
    sys, _ = scalar_problem()
    with pytest.raises(DimensionError):
        integrate(sys, np.zeros(2, dtype=complex), np.linspace(0, 1, 5))


def test_blowup_is_reported():
    sys = LinearMemorySystem(1, lambda t: np.array([[30.0]]), [])
    with pytest.raises(SolverError):
        integrate(sys, np.array([1.0 + 0j]), np.linspace(0, 2, 11))


def test_unknown_method():
    sys, _ = scalar_problem()
    with pytest.raises(ValueError):
        integrate(sys, np.array([1.0 + 0j]), np.linspace(0, 1, 3), "euler")
