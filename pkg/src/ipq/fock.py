"""Truncated Fock-space operators for the two IPQ modes, toy bath modes and ancillas.

Mode 0 is the least-significant (fastest varying) index of the tensor product, so the
basis index of the occupation tuple ``(n_0, n_1, ..., n_{m-1})`` is
``sum_k n_k * d**k`` with ``d = cutoff + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.linalg import expm

from .errors import CapacityError, DimensionError

MAX_DIM = 4096


@dataclass(frozen=True)
class FockSpec:
    """Shape of a truncated multi-mode Fock space."""

    mode_count: int
    cutoff_per_mode: int

    def __post_init__(self):
        if self.mode_count < 1:
            raise ValueError("mode_count must be positive")
        if self.cutoff_per_mode < 1:
            raise ValueError("cutoff_per_mode must be at least 1")

    @property
    def local_dim(self) -> int:
        return self.cutoff_per_mode + 1

    @property
    def dim(self) -> int:
        return self.local_dim ** self.mode_count

    def index(self, occupations) -> int:
        """Basis index of an occupation tuple (mode 0 first)."""
        occ = tuple(int(n) for n in occupations)
        if len(occ) != self.mode_count:
            raise DimensionError("occupation tuple has wrong length")
        if any(n < 0 or n > self.cutoff_per_mode for n in occ):
            raise ValueError(f"occupation {occ} outside truncation")
        return sum(n * self.local_dim ** k for k, n in enumerate(occ))

    def basis_state(self, occupations) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(occupations)] = 1.0
        return v

    def vacuum(self) -> np.ndarray:
        return self.basis_state((0,) * self.mode_count)


@dataclass(frozen=True)
class LogicalBasis:
    """The two IPQ logical kets, ``|0> = c0^dag|vac>`` and ``|1> = c1^dag|vac>``."""

    ket0: np.ndarray
    ket1: np.ndarray


def destroy(cutoff: int) -> np.ndarray:
    """Single-mode annihilation operator with levels 0..cutoff."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def build_mode_ops(spec: FockSpec, max_dim: int = MAX_DIM) -> list[np.ndarray]:
    """One annihilation operator per mode on the full truncated space."""
    if spec.dim > max_dim:
        raise CapacityError(f"Fock dimension {spec.dim} exceeds limit {max_dim}")
    d = spec.local_dim
    a = destroy(spec.cutoff_per_mode)
    eye = np.eye(d, dtype=complex)
    ops = []
    for k in range(spec.mode_count):
        # kron order puts the last factor on the least-significant index
        factors = [a if j == k else eye for j in reversed(range(spec.mode_count))]
        ops.append(reduce(np.kron, factors))
    return ops


def dag(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _check_pair(c0: np.ndarray, c1: np.ndarray) -> None:
    if c0.shape != c1.shape or c0.ndim != 2 or c0.shape[0] != c0.shape[1]:
        raise DimensionError("mode operators must be square matrices of equal size")


def number(c: np.ndarray) -> np.ndarray:
    return dag(c) @ c


def su2_generators(c0: np.ndarray, c1: np.ndarray):
    """Return ``(Jx, Jy, Jz)`` with ``Jz = n1 - n0``.

    On the one-particle sector in the ordering ``{|1>, |0>}`` these are the Pauli matrices.
    """
    _check_pair(c0, c1)
    jx = dag(c0) @ c1 + dag(c1) @ c0
    jy = 1j * (dag(c0) @ c1 - c0 @ dag(c1))
    jz = number(c1) - number(c0)
    return jx, jy, jz


def collective_modes(c0: np.ndarray, c1: np.ndarray):
    """Return ``(a0, a1)`` with ``a1 = (c1 + c0)/sqrt2`` and ``a0 = (c1 - c0)/sqrt2``."""
    _check_pair(c0, c1)
    s = np.sqrt(0.5)
    return s * (c1 - c0), s * (c1 + c0)


def parity_operator(c0: np.ndarray, c1: np.ndarray) -> np.ndarray:
    """Stabilizer ``(-1)^(n0 + n1 + 1)``: +1 on odd total occupation."""
    _check_pair(c0, c1)
    n = np.rint(np.real(np.diag(number(c0) + number(c1)))).astype(int)
    return np.diag((-1.0) ** (n + 1)).astype(complex)


def leo_reflection(c0: np.ndarray, c1: np.ndarray) -> np.ndarray:
    """``R_L = exp(-i pi N)`` with ``N = n0 + n1``, built from the diagonal of N."""
    _check_pair(c0, c1)
    # .diagonal() also accepts scipy sparse operators
    n = np.rint(np.real((number(c0) + number(c1)).diagonal())).astype(int)
    return np.diag((-1.0) ** n).astype(complex)


def leo_reflection_expm(c0: np.ndarray, c1: np.ndarray) -> np.ndarray:
    """Same operator as :func:`leo_reflection`, via a dense matrix exponential."""
    return expm(-1j * np.pi * (number(c0) + number(c1)))


def cphase_unitary(n0_alpha: np.ndarray, n0_beta: np.ndarray, alpha_cp: float) -> np.ndarray:
    """``exp(-i alpha_cp n0_alpha n0_beta)`` for diagonal number operators."""
    if n0_alpha.shape != n0_beta.shape:
        raise DimensionError("number operators must share a space")
    h = n0_alpha @ n0_beta
    diag = np.diag(h)
    if np.allclose(h, np.diag(diag)):
        return np.diag(np.exp(-1j * alpha_cp * diag))
    return expm(-1j * alpha_cp * h)


def logical_basis(c0: np.ndarray, c1: np.ndarray, vacuum: np.ndarray) -> LogicalBasis:
    return LogicalBasis(ket0=dag(c0) @ vacuum, ket1=dag(c1) @ vacuum)


def one_particle_projector(c0: np.ndarray, c1: np.ndarray, vacuum: np.ndarray) -> np.ndarray:
    """Isometry (dim x 2) whose columns are ``|1>`` and ``|0>`` in that order."""
    basis = logical_basis(c0, c1, vacuum)
    return np.column_stack([basis.ket1, basis.ket0])


def quadrature(c: np.ndarray) -> np.ndarray:
    """Dimensionless position quadrature ``(c + c^dag)/sqrt2``."""
    return (c + dag(c)) / np.sqrt(2.0)


def truncation_defect(a: np.ndarray, cutoff: int) -> np.ndarray:
    """Expected value of ``[a, a^dag]`` for a single truncated mode."""
    d = cutoff + 1
    out = np.eye(d, dtype=complex)
    out[-1, -1] -= d
    return out


@dataclass(frozen=True)
class IPQModes:
    """Convenience bundle of the two IPQ modes on a two-mode space."""

    spec: FockSpec
    c0: np.ndarray
    c1: np.ndarray

    @classmethod
    def build(cls, cutoff: int = 1) -> "IPQModes":
        spec = FockSpec(2, cutoff)
        c0, c1 = build_mode_ops(spec)
        return cls(spec, c0, c1)

    @property
    def vacuum(self) -> np.ndarray:
        return self.spec.vacuum()

    @property
    def logical(self) -> LogicalBasis:
        return logical_basis(self.c0, self.c1, self.vacuum)

    def ket(self, alpha0: complex, alpha1: complex) -> np.ndarray:
        b = self.logical
        return alpha0 * b.ket0 + alpha1 * b.ket1
