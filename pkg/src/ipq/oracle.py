"""Brute-force reference: explicit discretized baths and exact matrix exponentials.

The Heisenberg operators of a quadratic Hamiltonian stay linear in the initial modes,
``v(t) = M(t) v(0)`` with ``M' = -i K(t) M``. Under RWA ``v`` holds only annihilators and
``K`` is the Hermitian one-particle matrix; otherwise ``v = [a; a^dag]`` and ``K`` is the
Bogoliubov generator ``[[H, Delta], [-conj(Delta), -conj(H)]]``.

Everything runs in the lab frame with the system modes at their physical frequencies,
independently of the frame and kernel choices made by the Volterra models.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh, expm

from .bath import discretize
from .errors import SolverError
from .observables import InitialState, bloch_from_moments, excitations_from_moments, initial_expectations, system_moments
from .pulses import PulseTrain

SYMPLECTIC_TOL = 1e-8


@dataclass
class QuadraticModel:
    """Two system modes plus discretized baths.

    ``kind`` is ``"collective"`` (one bath coupled to ``(c0 + c1)/sqrt2`` under RWA) or
    ``"individual"`` (bath ``i`` coupled to ``c_i + c_i^dag``, or to ``c_i`` under RWA).
    """

    kind: str
    baths: list
    omega0_pair: tuple
    train: PulseTrain
    gx: float = 0.0
    gz: float = 0.0
    rwa: bool = True

    def __post_init__(self):
        if self.kind not in ("collective", "individual"):
            raise ValueError("kind must be 'collective' or 'individual'")
        if self.kind == "collective" and (len(self.baths) != 1 or not self.rwa):
            raise ValueError("collective oracle takes one bath and the RWA coupling")
        if self.kind == "individual" and len(self.baths) != 2:
            raise ValueError("individual oracle takes two baths")

    @property
    def n_modes(self) -> int:
        return 2 + sum(b.size for b in self.baths)

    @property
    def dim(self) -> int:
        return self.n_modes if self.rwa else 2 * self.n_modes

    def _coupling(self) -> np.ndarray:
        """``G[j, k]``: coupling of system mode ``j`` to bath mode ``k`` (bath index flattened)."""
        G = np.zeros((2, self.n_modes - 2))
        if self.kind == "collective":
            g = self.baths[0].couplings
            G[0] = G[1] = g / np.sqrt(2.0)
        else:
            off = 0
            for i, b in enumerate(self.baths):
                G[i, off: off + b.size] = b.couplings
                off += b.size
        return G

    def bath_frequencies(self) -> np.ndarray:
        return np.concatenate([b.omegas for b in self.baths])

    def one_particle(self, mu: float) -> np.ndarray:
        n = self.n_modes
        H = np.zeros((n, n), dtype=complex)
        w0, w1 = self.omega0_pair
        H[0, 0] = w0 + mu - self.gz
        H[1, 1] = w1 + mu + self.gz
        H[0, 1] = H[1, 0] = self.gx
        G = self._coupling()
        H[:2, 2:] = G
        H[2:, :2] = G.T
        H[2:, 2:] = np.diag(self.bath_frequencies())
        return H

    def generator(self, mu: float) -> np.ndarray:
        H = self.one_particle(mu)
        if self.rwa:
            return H
        n = self.n_modes
        Delta = np.zeros((n, n), dtype=complex)
        G = self._coupling()
        Delta[:2, 2:] = G
        Delta[2:, :2] = G.T
        K = np.zeros((2 * n, 2 * n), dtype=complex)
        K[:n, :n] = H
        K[:n, n:] = Delta
        K[n:, :n] = -Delta.conj()
        K[n:, n:] = -H.conj()
        return K


@dataclass
class OracleTrajectory:
    """System rows of ``M(t)``: ``rows[t, j, :]`` is the expansion of ``c_j(t)``."""

    model: QuadraticModel
    times: np.ndarray
    rows: np.ndarray

    @property
    def C(self) -> np.ndarray:
        return self.rows[:, :2, :2]

    @property
    def B(self) -> np.ndarray:
        n = self.model.n_modes
        return self.rows[:, :2, 2:n]

    @property
    def Cbar(self) -> Optional[np.ndarray]:
        if self.model.rwa:
            return None
        n = self.model.n_modes
        return self.rows[:, :2, n: n + 2]

    @property
    def Bbar(self) -> Optional[np.ndarray]:
        if self.model.rwa:
            return None
        n = self.model.n_modes
        return self.rows[:, :2, n + 2:]

    def metric_defect(self) -> float:
        """Max deviation of ``sum|annihilator coeffs|^2 - sum|creator coeffs|^2`` from 1."""
        n = self.model.n_modes
        p = np.sum(np.abs(self.rows[:, :, :n]) ** 2, axis=-1)
        if not self.model.rwa:
            p = p - np.sum(np.abs(self.rows[:, :, n:]) ** 2, axis=-1)
        return float(np.max(np.abs(p - 1)))


def _mu_steps(train: PulseTrain, grid: np.ndarray) -> np.ndarray:
    return train.mu(0.5 * (grid[:-1] + grid[1:]))


def propagate(model: QuadraticModel, grid, all_rows: bool = False) -> OracleTrajectory:
    """Exact propagation, one matrix exponential per distinct ``(mu, step)``.

    A constant Hermitian generator (RWA, no LEO) goes through one eigendecomposition; a
    constant Bogoliubov generator advances the kept rows step by step. By
    default only the two system rows are kept; ``all_rows`` keeps every annihilator row.
    """
    grid = np.asarray(grid, dtype=float)
    mus = _mu_steps(model.train, grid)
    D = model.dim
    sys_rows = list(range(model.n_modes)) if all_rows else [0, 1]
    if np.all(mus == mus[0]):
        K = model.generator(float(mus[0]))
        t = grid - grid[0]
        if model.rwa:
            lam, V = eigh(K)
            left = V[sys_rows, :]
            rows = np.einsum("jk,tk,lk->tjl", left, np.exp(-1j * np.outer(t, lam)), V.conj())
        else:
            # rows(t + h) = rows(t) expm(-i K h); one exponential per distinct step
            cache: dict = {}
            rows = np.empty((len(grid), len(sys_rows), D), dtype=complex)
            rows[0] = np.eye(D, dtype=complex)[sys_rows]
            for i in range(len(grid) - 1):
                h = grid[i + 1] - grid[i]
                key = round(h, 15)
                E = cache.get(key)
                if E is None:
                    E = expm(-1j * K * h)
                    cache[key] = E
                rows[i + 1] = rows[i] @ E
    else:
        cache: dict = {}
        M = np.eye(D, dtype=complex)
        rows = np.empty((len(grid), len(sys_rows), D), dtype=complex)
        rows[0] = M[sys_rows]
        for i, mu in enumerate(mus):
            h = grid[i + 1] - grid[i]
            key = (float(mu), round(h, 15))
            E = cache.get(key)
            if E is None:
                E = expm(-1j * model.generator(float(mu)) * h)
                cache[key] = E
            M = E @ M
            rows[i + 1] = M[sys_rows]
    traj = OracleTrajectory(model, grid, rows)
    if not model.rwa:
        defect = traj.metric_defect()
        if defect > SYMPLECTIC_TOL:
            raise SolverError(f"symplectic metric violated by {defect:.2e}")
    return traj


def thermal_expectation(traj: OracleTrajectory, betas: Sequence[float], init: InitialState) -> dict:
    """Moments, excitations and Bloch vector for thermal baths and a one-particle initial state."""
    model = traj.model
    m0 = initial_expectations(init, "c")
    m = system_moments(traj.C, m0, traj.Cbar)
    nbar = np.concatenate([b.occupancies(beta) for b, beta in zip(model.baths, betas)])
    B = traj.B
    m = m + np.einsum("tjk,tlk,k->tjl", B.conj(), B, nbar)
    if traj.Bbar is not None:
        Bb = traj.Bbar
        m = m + np.einsum("tjk,tlk,k->tjl", Bb.conj(), Bb, nbar + 1)
    return {"moments": m, "excitations": excitations_from_moments(m), "bloch": bloch_from_moments(m)}


def total_excitation(traj: OracleTrajectory, init: InitialState, betas: Sequence[float]) -> np.ndarray:
    """``sum <n_k(t)>`` over system and bath modes; needs ``all_rows`` propagation under RWA."""
    model = traj.model
    if not model.rwa or traj.rows.shape[1] != model.n_modes:
        raise ValueError("total excitation needs an RWA trajectory with all rows")
    m0 = np.zeros((model.n_modes, model.n_modes), dtype=complex)
    m0[:2, :2] = initial_expectations(init, "c")
    nbar = np.concatenate([b.occupancies(beta) for b, beta in zip(model.baths, betas)])
    m0[2:, 2:] = np.diag(nbar)
    R = traj.rows
    return np.real(np.einsum("tji,il,tjl->t", R.conj(), m0, R))


def collective_model(spectrum, omega0: float, train: PulseTrain, modes: int = 400, coverage: float = 20.0, gx=0.0, gz=0.0) -> QuadraticModel:
    bath = discretize(spectrum, modes, coverage)
    return QuadraticModel("collective", [bath], (omega0, omega0), train, gx, gz, rwa=True)


def individual_model(spectra, omega0_pair, train: PulseTrain, modes: int = 400, coverage: float = 20.0, gx=0.0, gz=0.0, rwa=False) -> QuadraticModel:
    baths = [discretize(s, modes, coverage) for s in spectra]
    return QuadraticModel("individual", baths, tuple(omega0_pair), train, gx, gz, rwa=rwa)


def rotate_to_frame(C: np.ndarray, times: np.ndarray, frame: float) -> np.ndarray:
    """Coefficients seen from a frame rotating at ``frame``: ``C exp(i frame t)``."""
    return C * np.exp(1j * frame * times)[:, None, None]
