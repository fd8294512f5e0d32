"""Collective decoherence: both IPQ modes couple to one reservoir through ``a_1``.

The dynamics is solved in the frame rotating at ``omega0``; since ``omega0 N`` commutes
with the full Hamiltonian this is exact and leaves every bilinear observable unchanged.

Coefficients are stored as 2x2 matrices ``A[j, i]`` with ``a_j(t) = sum_i A[j, i] a_i(0) + bath``.
The 4-vector used by :func:`build_system` is ``[A_1^1, A_0^1, A_1^0, A_0^0]`` with
``A_i^j = A[j, i]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bath import (
    LorentzianSpectrum,
    SpectralQuadrature,
    rwa_kernel,
    spectral_quadrature,
    thermal_occupancy,
)
from .errors import ConvergenceError
from .observables import V_CA, BlochTrajectory, InitialState, attach_fidelity, bloch_series
from .pulses import PulseTrain, build_grid
from .volterra import ExpDrive, LinearMemorySystem, default_step, integrate

GATE_TAGS = ("storage", "x", "z")

# label ordering (1, 0) version of V_CA; maps a-vectors to c-vectors
P_LABEL = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
U_A = np.kron(P_LABEL, P_LABEL)


@dataclass(frozen=True)
class GateKind:
    """Gate applied during the run, named in the c-representation.

    ``x`` drives ``G J_x`` and ``z`` drives ``G J_z``. Storage has no gate term.
    """

    tag: str = "storage"
    strength: float = 0.0

    def __post_init__(self):
        if self.tag not in GATE_TAGS:
            raise ValueError(f"gate must be one of {GATE_TAGS}")
        if self.strength < 0:
            raise ValueError("gate strength must be non-negative")

    @property
    def gx(self) -> float:
        return self.strength if self.tag == "x" else 0.0

    @property
    def gz(self) -> float:
        return self.strength if self.tag == "z" else 0.0


@dataclass(frozen=True)
class SolverSettings:
    method: str = "exponential"
    step: Optional[float] = None
    points_per_cycle: int = 50
    quad_nodes: int = 128
    quad_width: float = 30.0
    quad_check: bool = True
    quad_tol: float = 1e-4
    richardson: bool = False


@dataclass(frozen=True)
class CollectiveScenario:
    gate: GateKind
    spectrum: LorentzianSpectrum
    omega0: float
    beta: float
    leo: PulseTrain
    duration: float
    initial: InitialState = field(default_factory=lambda: InitialState.pure(np.sqrt(0.5), np.sqrt(0.5)))

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if abs(self.leo.total_duration - self.duration) > 1e-12 * self.duration:
            object.__setattr__(self, "leo", replace(self.leo, total_duration=self.duration))

    def closed(self) -> "CollectiveScenario":
        """Same scenario with the reservoir coupling switched off."""
        return replace(self, spectrum=replace(self.spectrum, Gamma=0.0))


def gate_matrix_a(mu: float, gx: float, gz: float) -> np.ndarray:
    """One-body Hamiltonian on ``(a_1, a_0)``: ``J_x -> n_a1 - n_a0``, ``J_z -> a1^dag a0 + h.c.``."""
    return np.array([[mu + gx, gz], [gz, mu - gx]], dtype=complex)


def _memory(spectrum: LorentzianSpectrum, omega0: float, size: int):
    kernel = rwa_kernel(spectrum, omega0)
    if not kernel.terms:
        return []
    mask = np.zeros((size, size), dtype=complex)
    # only a_1 rows feel the reservoir
    if size == 4:
        mask[0, 0] = mask[1, 1] = -1.0
    else:
        mask[0, 0] = -1.0
    return [(kernel, mask)]


def collective_system(spectrum, omega0, train: PulseTrain, gx: float = 0.0, gz: float = 0.0) -> LinearMemorySystem:
    """4-dim coefficient system; raises if both gate strengths are nonzero."""
    if gx != 0 and gz != 0:
        raise ValueError("simultaneous X and Z gates are not supported")
    eye = np.eye(2)

    def drift(t):
        return -1j * np.kron(gate_matrix_a(float(train.mu(t)), gx, gz), eye)

    return LinearMemorySystem(4, drift, _memory(spectrum, omega0, 4))


def build_system(scenario: CollectiveScenario) -> LinearMemorySystem:
    return collective_system(scenario.spectrum, scenario.omega0, scenario.leo, scenario.gate.gx, scenario.gate.gz)


def response_system(scenario: CollectiveScenario, detunings) -> LinearMemorySystem:
    """2-dim system for ``B'`` on ``(a_1, a_0)``, one column per frequency node."""
    g = scenario.gate
    train = scenario.leo

    def drift(t):
        return -1j * gate_matrix_a(float(train.mu(t)), g.gx, g.gz)

    drive = ExpDrive(np.array([1.0, 0.0]), np.asarray(detunings, dtype=float))
    return LinearMemorySystem(2, drift, _memory(scenario.spectrum, scenario.omega0, 2), drive)


def time_grid(scenario: CollectiveScenario, settings: SolverSettings = SolverSettings(), extra_scales=()) -> np.ndarray:
    if settings.step is not None:
        h = settings.step
    else:
        k = rwa_kernel(scenario.spectrum, scenario.omega0)
        scales = [scenario.leo.strength, scenario.gate.strength, k.max_rate, *extra_scales]
        width = scenario.leo.width if scenario.leo.active else None
        h = default_step(width, scales, settings.points_per_cycle)
    return build_grid(scenario.leo, h)


def default_quadrature(scenario: CollectiveScenario, settings: SolverSettings = SolverSettings(), nodes=None) -> SpectralQuadrature:
    return spectral_quadrature(scenario.spectrum, nodes or settings.quad_nodes, width=settings.quad_width)


def response_scales(scenario, settings: SolverSettings = SolverSettings()):
    q = default_quadrature(scenario, settings, 2 * settings.quad_nodes)
    return [float(np.max(np.abs(q.omegas - scenario.omega0)))]


@dataclass
class CoefficientTrajectory:
    times: np.ndarray
    A: np.ndarray
    C: np.ndarray
    representation: str = "a"

    @property
    def vector_a(self) -> np.ndarray:
        """``[A_1^1, A_0^1, A_1^0, A_0^0]`` per time."""
        return np.stack([self.A[:, 1, 1], self.A[:, 1, 0], self.A[:, 0, 1], self.A[:, 0, 0]], axis=-1)

    @property
    def vector_c(self) -> np.ndarray:
        return np.stack([self.C[:, 1, 1], self.C[:, 1, 0], self.C[:, 0, 1], self.C[:, 0, 0]], axis=-1)


def a_to_c(A: np.ndarray) -> np.ndarray:
    """``C = V A V`` (``V`` is symmetric and its own inverse)."""
    return V_CA @ A @ V_CA


def _vec_to_matrix(v: np.ndarray) -> np.ndarray:
    A = np.empty(v.shape[:-1] + (2, 2), dtype=complex)
    A[..., 1, 1], A[..., 1, 0], A[..., 0, 1], A[..., 0, 0] = v[..., 0], v[..., 1], v[..., 2], v[..., 3]
    return A


def simulate(scenario: CollectiveScenario, settings: SolverSettings = SolverSettings(), grid=None) -> CoefficientTrajectory:
    """Integrate the coefficient equations from ``A(0) = I``."""
    if grid is None:
        grid = time_grid(scenario, settings, response_scales(scenario, settings))
    sys = build_system(scenario)
    x0 = np.array([1, 0, 0, 1], dtype=complex)
    kw = {"richardson": True} if (settings.method == "generic" and settings.richardson) else {}
    traj = integrate(sys, x0, grid, settings.method, **kw)
    A = _vec_to_matrix(traj.states)
    return CoefficientTrajectory(traj.times, A, a_to_c(A))


@dataclass
class BathResponse:
    """``B'[t, j, node]`` in the c-representation for every quadrature node."""

    times: np.ndarray
    omegas: np.ndarray
    weights: np.ndarray
    Bc: np.ndarray
    Ba: Optional[np.ndarray] = None
    Bbar_c: Optional[np.ndarray] = None


def bath_response(scenario: CollectiveScenario, quad: SpectralQuadrature, grid, settings: SolverSettings = SolverSettings()) -> BathResponse:
    sys = response_system(scenario, quad.omegas - scenario.omega0)
    x0 = np.zeros((2, len(quad.omegas)), dtype=complex)
    kw = {"richardson": True} if (settings.method == "generic" and settings.richardson) else {}
    traj = integrate(sys, x0, grid, settings.method, **kw)
    Ba = np.empty_like(traj.states)
    # state rows are (a_1, a_0); store as natural index (a_0, a_1)
    Ba[:, 0], Ba[:, 1] = traj.states[:, 1], traj.states[:, 0]
    Bc = np.einsum("jk,tkn->tjn", V_CA, Ba)
    return BathResponse(traj.times, quad.omegas, quad.weights, Bc, Ba)


def thermal_moments(response: BathResponse, beta: float) -> np.ndarray:
    """``<c_j^dag c_k>_bath = int J nbar conj(B'_j) B'_k``, shape ``(T, 2, 2)``."""
    if np.isinf(beta):
        return np.zeros((len(response.times), 2, 2), dtype=complex)
    w = response.weights * thermal_occupancy(response.omegas, beta)
    out = np.einsum("tjn,tkn,n->tjk", response.Bc.conj(), response.Bc, w)
    if response.Bbar_c is not None:
        wb = response.weights * (thermal_occupancy(response.omegas, beta) + 1)
        out = out + np.einsum("tjn,tkn,n->tjk", response.Bbar_c.conj(), response.Bbar_c, wb)
    return out


def thermal_terms(response: BathResponse, beta: float) -> dict:
    """Thermal contributions to ``Jx, Jy, Jz, n0, n1`` as time series."""
    m = thermal_moments(response, beta)
    return {
        "Jx": np.real(m[:, 0, 1] + m[:, 1, 0]),
        "Jy": np.real(1j * (m[:, 0, 1] - m[:, 1, 0])),
        "Jz": np.real(m[:, 1, 1] - m[:, 0, 0]),
        "n0": np.real(m[:, 0, 0]),
        "n1": np.real(m[:, 1, 1]),
    }


def check_quadrature(coarse: np.ndarray, fine: np.ndarray, tol: float) -> float:
    """Relative change between two thermal-moment series; raises above ``tol``."""
    scale = max(float(np.max(np.abs(fine))), 1e-14)
    rel = float(np.max(np.abs(fine - coarse))) / scale
    if rel > tol:
        raise ConvergenceError(f"thermal quadrature changed by {rel:.2e} (> {tol:.1e}) on node doubling")
    return rel


@dataclass
class CollectiveResult:
    scenario: CollectiveScenario
    coefficients: CoefficientTrajectory
    bloch: BlochTrajectory
    thermal: np.ndarray
    response: Optional[BathResponse] = None
    quad_change: Optional[float] = None


def thermal_series(scenario, grid, settings: SolverSettings = SolverSettings(), betas=None):
    """Thermal moments for ``scenario.beta`` (and optionally more betas) with the refinement check."""
    betas = [scenario.beta] if betas is None else list(betas)
    if scenario.spectrum.Gamma == 0 or all(np.isinf(b) for b in betas):
        zero = np.zeros((len(grid), 2, 2), dtype=complex)
        return [zero for _ in betas], None, None
    quad = default_quadrature(scenario, settings)
    resp = bath_response(scenario, quad, grid, settings)
    out = [thermal_moments(resp, b) for b in betas]
    change = None
    if settings.quad_check:
        quad2 = default_quadrature(scenario, settings, 2 * settings.quad_nodes)
        resp2 = bath_response(scenario, quad2, grid, settings)
        fine = [thermal_moments(resp2, b) for b in betas]
        change = max(check_quadrature(c, f, settings.quad_tol) for c, f in zip(out, fine))
    return out, resp, change


def run_collective(scenario: CollectiveScenario, settings: SolverSettings = SolverSettings(), reference: bool = True) -> CollectiveResult:
    """Coefficients, thermal terms and Bloch series, with infidelity against the closed run."""
    grid = time_grid(scenario, settings, response_scales(scenario, settings))
    coeffs = simulate(scenario, settings, grid)
    (thermal,), resp, change = thermal_series(scenario, grid, settings)
    bloch = bloch_series(grid, coeffs.C, scenario.initial, thermal)
    if reference:
        ref = simulate(scenario.closed(), settings, grid)
        attach_fidelity(bloch, bloch_series(grid, ref.C, scenario.initial))
    return CollectiveResult(scenario, coeffs, bloch, thermal, resp, change)
