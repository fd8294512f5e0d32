"""Initial-state moments, Bloch components, excitation numbers and effective-state fidelity.

Everything is expressed through one-body correlation matrices ``M[j, k] = <c_j^dag c_k>``
in the c-mode representation (index 0 is mode ``c_0``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

log = logging.getLogger(__name__)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# c-mode to a-mode change of basis: a_i = sum_k V[i, k] c_k with a_0 = (c1-c0)/sqrt2, a_1 = (c1+c0)/sqrt2
V_CA = np.array([[-1.0, 1.0], [1.0, 1.0]]) / np.sqrt(2.0)


@dataclass(frozen=True)
class InitialState:
    """One-particle initial state, pure ``alpha0|0> + alpha1|1>`` or a 2x2 density matrix.

    ``rho`` is indexed by mode label: ``rho[k, l] = <k|rho|l>`` with ``|k> = c_k^dag|vac>``.
    """

    rho: np.ndarray
    amplitudes: Optional[tuple] = None

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError("initial density matrix must be 2x2")
        if not np.allclose(rho, rho.conj().T, atol=1e-12):
            raise ValueError("initial density matrix must be Hermitian")
        if abs(np.trace(rho) - 1) > 1e-10:
            raise ValueError("initial density matrix must have unit trace")
        if np.min(np.linalg.eigvalsh(rho)) < -1e-12:
            raise ValueError("initial density matrix must be positive semidefinite")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def pure(cls, alpha0: complex, alpha1: complex) -> "InitialState":
        amp = np.array([alpha0, alpha1], dtype=complex)
        norm = np.vdot(amp, amp).real
        if abs(norm - 1) > 1e-10:
            raise ValueError(f"amplitudes not normalized (|a0|^2+|a1|^2 = {norm})")
        return cls(np.outer(amp, amp.conj()), (complex(alpha0), complex(alpha1)))

    @classmethod
    def mixed(cls, rho) -> "InitialState":
        return cls(np.asarray(rho))


def initial_expectations(state: InitialState, representation: str = "c") -> np.ndarray:
    """``M[j, k] = <m_j^dag m_k>`` for ``m = c`` or ``m = a`` modes.

    For a one-particle state ``<c_j^dag c_k> = rho[k, j]``.
    """
    m = state.rho.T.copy()
    if representation == "c":
        return m
    if representation == "a":
        return V_CA.conj() @ m @ V_CA.T
    raise ValueError("representation must be 'c' or 'a'")


def bloch_from_moments(m: np.ndarray) -> np.ndarray:
    """Bloch vector from c-mode moments ``m[..., j, k]``; returns ``[..., (Jx, Jy, Jz)]``."""
    jx = m[..., 0, 1] + m[..., 1, 0]
    jy = 1j * (m[..., 0, 1] - m[..., 1, 0])
    jz = m[..., 1, 1] - m[..., 0, 0]
    return np.real(np.stack([jx, jy, jz], axis=-1))


def excitations_from_moments(m: np.ndarray) -> np.ndarray:
    return np.real(np.stack([m[..., 0, 0], m[..., 1, 1]], axis=-1))


def system_moments(C: np.ndarray, m0: np.ndarray, Cbar: Optional[np.ndarray] = None) -> np.ndarray:
    """Propagate initial moments through coefficients.

    ``C[..., j, i]`` is the coefficient of ``c_i(0)`` in ``c_j(t)`` and ``Cbar`` that of
    ``c_i(0)^dag``. Returns ``<c_j^dag(t) c_k(t)>`` restricted to the system part.
    """
    out = np.einsum("...ji,il,...kl->...jk", C.conj(), m0, C)
    if Cbar is not None:
        # <c_i c_l^dag> = delta_il + <c_l^dag c_i>
        anti = np.eye(2) + m0.T
        out = out + np.einsum("...ji,il,...kl->...jk", Cbar.conj(), anti, Cbar)
    return out


@dataclass
class BlochTrajectory:
    times: np.ndarray
    bloch: np.ndarray
    excitations: np.ndarray
    infidelity: Optional[np.ndarray] = None
    trace_distance: Optional[np.ndarray] = None
    clamped: Optional[np.ndarray] = None
    moments: Optional[np.ndarray] = None

    def columns(self) -> dict:
        cols = {
            "time": self.times,
            "n0": self.excitations[:, 0],
            "n1": self.excitations[:, 1],
            "Jx": self.bloch[:, 0],
            "Jy": self.bloch[:, 1],
            "Jz": self.bloch[:, 2],
        }
        if self.infidelity is not None:
            cols["infidelity"] = self.infidelity
            cols["trace_distance"] = self.trace_distance
            cols["clamped"] = self.clamped.astype(int)
        return cols


def bloch_series(times, C, init: InitialState, thermal=None, Cbar=None) -> BlochTrajectory:
    """Bloch and excitation series from c-representation coefficients plus thermal moments.

    ``thermal`` holds bath-induced moments ``[..., j, k]`` on the same grid, or None.
    """
    m = system_moments(np.asarray(C), initial_expectations(init, "c"), Cbar)
    if thermal is not None:
        thermal = np.asarray(thermal)
        if thermal.shape != m.shape:
            raise ValueError("thermal series does not share the coefficient time grid")
        m = m + thermal
    return BlochTrajectory(np.asarray(times), bloch_from_moments(m), excitations_from_moments(m), moments=m)


def excitation_series(times, C, init: InitialState, thermal=None, Cbar=None) -> np.ndarray:
    return bloch_series(times, C, init, thermal, Cbar).excitations


@dataclass(frozen=True)
class EffectiveState:
    bloch: np.ndarray
    rho: np.ndarray
    clamped: bool = False


def effective_state(bloch, warn: bool = True) -> EffectiveState:
    """``rho = (I + r.sigma)/2``, rescaling ``r`` to unit length if it leaves the ball."""
    r = np.asarray(bloch, dtype=float).copy()
    norm = np.linalg.norm(r)
    clamped = False
    if norm > 1 + 1e-12:
        if warn:
            log.warning("Bloch vector norm %.6f > 1 clamped (leakage out of the qubit picture)", norm)
        r = r / norm
        clamped = True
    rho = 0.5 * (np.eye(2) + r[0] * PAULI_X + r[1] * PAULI_Y + r[2] * PAULI_Z)
    return EffectiveState(r, rho, clamped)


def _as_bloch(s) -> np.ndarray:
    if isinstance(s, EffectiveState):
        return s.bloch
    s = np.asarray(s)
    if s.shape == (2, 2):
        if np.min(np.linalg.eigvalsh(0.5 * (s + s.conj().T))) < -1e-10:
            raise ValueError("state is not positive semidefinite")
        return np.real([np.trace(s @ p) for p in (PAULI_X, PAULI_Y, PAULI_Z)])
    if np.linalg.norm(s) > 1 + 1e-10:
        raise ValueError("Bloch vector outside the unit ball")
    return s.astype(float)


def fidelity_bloch(r, s) -> np.ndarray:
    """Uhlmann fidelity of qubit states from Bloch vectors (vectorized on the last axis)."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    rr = np.clip(1 - np.sum(r * r, axis=-1), 0, None)
    ss = np.clip(1 - np.sum(s * s, axis=-1), 0, None)
    f = 0.5 * (1 + np.sum(r * s, axis=-1) + np.sqrt(rr * ss))
    return np.clip(f, 0.0, 1.0)


def infidelity(rho, rho_ref) -> float:
    """``1 - F`` with Uhlmann fidelity ``F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``."""
    return float(1 - fidelity_bloch(_as_bloch(rho), _as_bloch(rho_ref)))


def trace_distance_bloch(r, s) -> np.ndarray:
    return 0.5 * np.linalg.norm(np.asarray(r) - np.asarray(s), axis=-1)


def clamp_series(bloch: np.ndarray):
    norms = np.linalg.norm(bloch, axis=-1)
    clamped = norms > 1 + 1e-12
    if np.any(clamped):
        log.warning("%d Bloch vectors outside the unit ball were clamped", int(clamped.sum()))
    scale = np.where(clamped, 1 / np.where(norms > 0, norms, 1), 1.0)
    return bloch * scale[:, None], clamped


def attach_fidelity(traj: BlochTrajectory, reference: BlochTrajectory) -> BlochTrajectory:
    """Fill infidelity, trace distance and clamp flags against a reference run."""
    r, clamped = clamp_series(traj.bloch)
    s, _ = clamp_series(reference.bloch)
    traj.infidelity = 1 - fidelity_bloch(r, s)
    traj.trace_distance = trace_distance_bloch(r, s)
    traj.clamped = clamped
    return traj
