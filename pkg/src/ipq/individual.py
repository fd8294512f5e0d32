"""Individual decoherence: each IPQ mode couples to its own reservoir.

Coupling ``(c_i + c_i^dag)(b_i + b_i^dag)`` keeps the counter-rotating terms. Writing
``c_j(t) = sum_i C[j,i] c_i + Cbar[j,i] c_i^dag + bath`` and ``D = conj(Cbar)``::

    C' = -i h C - int f_j (C + D)
    D' = +i h D - int conj(f_j) (D + C)

with ``f_j(tau) = -2i int J_j(w) sin(w tau) dw`` and one-body Hamiltonian
``h = [[w00 + mu - Gz, Gx], [Gx, w01 + mu + Gz]]`` on ``(c_0, c_1)``.

With ``rwa`` the ``D`` block is dropped and each mode feels its own RWA kernel. That
variant runs in a frame rotating at the mean mode frequency, which is exact because the
RWA Hamiltonian conserves the total excitation number.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bath import nonrwa_kernel, rwa_kernel, spectral_quadrature, thermal_occupancy
from .collective import GateKind, SolverSettings, check_quadrature
from .observables import BlochTrajectory, InitialState, attach_fidelity, bloch_series
from .pulses import PulseTrain, build_grid
from .volterra import ExpDrive, LinearMemorySystem, default_step, integrate


@dataclass(frozen=True)
class IndividualScenario:
    gate: GateKind
    spectra: tuple
    omega0_pair: tuple
    betas: tuple
    leo: PulseTrain
    duration: float
    initial: InitialState = field(default_factory=lambda: InitialState.pure(np.sqrt(0.5), np.sqrt(0.5)))
    rwa: bool = False

    def __post_init__(self):
        if len(self.spectra) != 2 or len(self.omega0_pair) != 2 or len(self.betas) != 2:
            raise ValueError("individual scenarios need two spectra, two frequencies and two betas")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        object.__setattr__(self, "spectra", tuple(self.spectra))
        object.__setattr__(self, "omega0_pair", tuple(float(w) for w in self.omega0_pair))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if abs(self.leo.total_duration - self.duration) > 1e-12 * self.duration:
            object.__setattr__(self, "leo", replace(self.leo, total_duration=self.duration))

    @property
    def frame(self) -> float:
        """Rotating-frame frequency (nonzero only for the RWA variant)."""
        return 0.5 * sum(self.omega0_pair) if self.rwa else 0.0

    def closed(self) -> "IndividualScenario":
        return replace(self, spectra=tuple(replace(s, Gamma=0.0) for s in self.spectra))


def one_body(mu: float, omega0_pair, gx: float, gz: float, frame: float = 0.0) -> np.ndarray:
    w0, w1 = omega0_pair
    return np.array([[w0 + mu - gz - frame, gx], [gx, w1 + mu + gz - frame]], dtype=complex)


def kernels(scenario: IndividualScenario):
    if scenario.rwa:
        return [rwa_kernel(s, scenario.frame) for s in scenario.spectra]
    return [nonrwa_kernel(s) for s in scenario.spectra]


def column_memory(scenario: IndividualScenario) -> list:
    """(kernel, mask) pairs for one coefficient column."""
    mem = []
    if scenario.rwa:
        for j, k in enumerate(kernels(scenario)):
            if k.terms:
                m = np.zeros((2, 2), dtype=complex)
                m[j, j] = -1.0
                mem.append((k, m))
        return mem
    for j, k in enumerate(kernels(scenario)):
        if not k.terms:
            continue
        cj, dj = j, 2 + j
        m = np.zeros((4, 4), dtype=complex)
        m[cj, cj] = m[cj, dj] = -1.0
        mem.append((k, m))
        mc = np.zeros((4, 4), dtype=complex)
        mc[dj, dj] = mc[dj, cj] = -1.0
        mem.append((k.conj(), mc))
    return mem


def column_drift(scenario: IndividualScenario):
    g, train = scenario.gate, scenario.leo

    def drift(t):
        h = one_body(float(train.mu(t)), scenario.omega0_pair, g.gx, g.gz, scenario.frame)
        if scenario.rwa:
            return -1j * h
        out = np.zeros((4, 4), dtype=complex)
        out[:2, :2] = -1j * h
        out[2:, 2:] = 1j * h.conj()
        return out

    return drift


def column_dim(scenario: IndividualScenario) -> int:
    return 2 if scenario.rwa else 4


def column_system(scenario: IndividualScenario, drive=None) -> LinearMemorySystem:
    return LinearMemorySystem(column_dim(scenario), column_drift(scenario), column_memory(scenario), drive)


def build_individual_system(scenario: IndividualScenario) -> LinearMemorySystem:
    """Full coefficient system over ``[C, Cbar*]`` flattened row-major (8 components; 4 under RWA).

    Each coefficient column evolves independently, so this is the column system tensored
    with the 2x2 identity.
    """
    col = column_system(scenario)
    n = col.dim
    drift = col.drift

    def big_drift(t):
        return _col_to_full(drift(t), n)

    mem = [(k, _col_to_full(m, n)) for k, m in col.memory]
    return LinearMemorySystem(2 * n, big_drift, mem)


def _col_to_full(mat: np.ndarray, n: int) -> np.ndarray:
    # rows (block, j) of the column system, expanded over column index i as the fast index
    return np.kron(mat, np.eye(2))


def time_grid(scenario: IndividualScenario, settings: SolverSettings = SolverSettings(), extra_scales=()) -> np.ndarray:
    if settings.step is not None:
        h = settings.step
    else:
        rates = [k.max_rate for k in kernels(scenario)]
        free = [abs(w - scenario.frame) for w in scenario.omega0_pair]
        scales = [scenario.leo.strength, scenario.gate.strength, *rates, *free, *extra_scales]
        width = scenario.leo.width if scenario.leo.active else None
        h = default_step(width, scales, settings.points_per_cycle)
    return build_grid(scenario.leo, h)


def quadratures(scenario: IndividualScenario, settings: SolverSettings = SolverSettings(), nodes=None):
    return [spectral_quadrature(s, nodes or settings.quad_nodes, width=settings.quad_width) for s in scenario.spectra]


def response_scales(scenario: IndividualScenario, settings: SolverSettings = SolverSettings()):
    out = []
    for q in quadratures(scenario, settings, 2 * settings.quad_nodes):
        out.append(float(np.max(np.abs(q.omegas - scenario.frame))))
    return out


@dataclass
class ExtendedCoefficients:
    times: np.ndarray
    C: np.ndarray
    Cbar: np.ndarray


def simulate_individual(scenario: IndividualScenario, settings: SolverSettings = SolverSettings(), grid=None) -> ExtendedCoefficients:
    """Integrate from ``C(0) = I``, ``Cbar(0) = 0``."""
    if grid is None:
        grid = time_grid(scenario, settings, response_scales(scenario, settings))
    sys = build_individual_system(scenario)
    n = column_dim(scenario)
    x0 = np.zeros(2 * n, dtype=complex)
    # flattened index is (row, column) with column fastest
    x0[0] = x0[3] = 1.0
    kw = {"richardson": True} if (settings.method == "generic" and settings.richardson) else {}
    traj = integrate(sys, x0, grid, settings.method, **kw)
    S = traj.states.reshape(len(grid), n, 2)
    C = S[:, :2, :]
    Cbar = np.conj(S[:, 2:, :]) if n == 4 else np.zeros_like(C)
    return ExtendedCoefficients(traj.times, C, Cbar)


@dataclass
class IndividualResponse:
    """Responses to bath ``index``: ``B'[t, j, node]`` and ``Bbar'[t, j, node]``."""

    index: int
    times: np.ndarray
    omegas: np.ndarray
    weights: np.ndarray
    B: np.ndarray
    Bbar: Optional[np.ndarray] = None


def individual_bath_response(scenario: IndividualScenario, quad, grid, bath_index: int, settings: SolverSettings = SolverSettings()) -> IndividualResponse:
    """Driven integration with the drive on the rows of the owning mode only.

    RWA: drive ``exp(-i (w - frame) t)`` on ``C_b``. Without RWA the ``D_b`` row gets
    ``-exp(-i w t)`` as well, and ``Bbar' = conj(D)``.
    """
    n = column_dim(scenario)
    amp = np.zeros(n, dtype=complex)
    amp[bath_index] = 1.0
    if not scenario.rwa:
        amp[2 + bath_index] = -1.0
    drive = ExpDrive(amp, quad.omegas - scenario.frame)
    sys = column_system(scenario, drive)
    x0 = np.zeros((n, len(quad.omegas)), dtype=complex)
    kw = {"richardson": True} if (settings.method == "generic" and settings.richardson) else {}
    traj = integrate(sys, x0, grid, settings.method, **kw)
    B = traj.states[:, :2, :]
    Bbar = np.conj(traj.states[:, 2:, :]) if n == 4 else None
    return IndividualResponse(bath_index, traj.times, quad.omegas, quad.weights, B, Bbar)


def bath_moments(resp: IndividualResponse, beta: float) -> np.ndarray:
    """Contribution of one bath to ``<c_j^dag c_k>``."""
    nbar = thermal_occupancy(resp.omegas, beta)
    out = np.einsum("tjn,tkn,n->tjk", resp.B.conj(), resp.B, resp.weights * nbar)
    if resp.Bbar is not None:
        out = out + np.einsum("tjn,tkn,n->tjk", resp.Bbar.conj(), resp.Bbar, resp.weights * (nbar + 1))
    return out


def individual_thermal_terms(responses, betas) -> np.ndarray:
    """Sum of both baths' moments; ``Jz`` part is ``int J1 B1 n1 - int J0 B0 n0`` in storage."""
    if len(responses) != len(betas):
        raise ValueError("need one beta per response")
    shapes = {r.B.shape[0] for r in responses}
    if len(shapes) != 1:
        raise ValueError("responses live on different time grids")
    return sum(bath_moments(r, b) for r, b in zip(responses, betas))


def moments_to_terms(m: np.ndarray) -> dict:
    return {
        "Jx": np.real(m[:, 0, 1] + m[:, 1, 0]),
        "Jy": np.real(1j * (m[:, 0, 1] - m[:, 1, 0])),
        "Jz": np.real(m[:, 1, 1] - m[:, 0, 0]),
        "n0": np.real(m[:, 0, 0]),
        "n1": np.real(m[:, 1, 1]),
    }


def thermal_series(scenario: IndividualScenario, grid, settings: SolverSettings = SolverSettings(), beta_sets=None):
    """Bath moments for one or more beta pairs, with the node-doubling check."""
    beta_sets = [scenario.betas] if beta_sets is None else [tuple(b) for b in beta_sets]
    active = [i for i, s in enumerate(scenario.spectra) if s.Gamma > 0]
    zero = np.zeros((len(grid), 2, 2), dtype=complex)
    if not active:
        return [zero for _ in beta_sets], [], None
    if scenario.rwa and all(all(np.isinf(b) for b in bs) for bs in beta_sets):
        return [zero for _ in beta_sets], [], None

    def compute(nodes):
        qs = quadratures(scenario, settings, nodes)
        resps = [individual_bath_response(scenario, qs[i], grid, i, settings) for i in active]
        return resps, [sum((bath_moments(r, bs[r.index]) for r in resps), zero) for bs in beta_sets]

    resps, out = compute(settings.quad_nodes)
    change = None
    if settings.quad_check:
        _, fine = compute(2 * settings.quad_nodes)
        change = max(check_quadrature(c, f, settings.quad_tol) for c, f in zip(out, fine))
    return out, resps, change


@dataclass
class IndividualResult:
    scenario: IndividualScenario
    coefficients: ExtendedCoefficients
    bloch: BlochTrajectory
    thermal: np.ndarray
    responses: list
    quad_change: Optional[float] = None


def run_individual(scenario: IndividualScenario, settings: SolverSettings = SolverSettings(), reference: bool = True) -> IndividualResult:
    grid = time_grid(scenario, settings, response_scales(scenario, settings))
    coeffs = simulate_individual(scenario, settings, grid)
    (thermal,), resps, change = thermal_series(scenario, grid, settings)
    cbar = None if scenario.rwa else coeffs.Cbar
    bloch = bloch_series(grid, coeffs.C, scenario.initial, thermal, cbar)
    if reference:
        ref = simulate_individual(scenario.closed(), settings, grid)
        attach_fidelity(bloch, bloch_series(grid, ref.C, scenario.initial, None, None if scenario.rwa else ref.Cbar))
    return IndividualResult(scenario, coeffs, bloch, thermal, resps, change)
