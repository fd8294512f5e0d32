"""Property checks shared by ``ipq verify`` and the test-suite.

Each check returns a :class:`CheckResult`; ``value`` is the measured quantity and
``threshold`` the bound it is compared against.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from functools import reduce
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from .bath import LorentzianSpectrum, MemoryKernel
from .collective import (
    CollectiveScenario,
    GateKind,
    SolverSettings,
    _vec_to_matrix,
    a_to_c,
    collective_system,
    time_grid,
)
from .errors import ConfigError
from .fock import (
    FockSpec,
    build_mode_ops,
    commutator,
    cphase_unitary,
    dag,
    destroy,
    leo_reflection,
    number,
    one_particle_projector,
    su2_generators,
)
from .observables import InitialState
from .oracle import collective_model, propagate
from .pulses import PulseTrain
from .volterra import LinearMemorySystem, integrate

log = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.value:.3e} (bound {self.threshold:.1e}) {self.detail} [{self.seconds:.2f}s]".rstrip()


def _norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------- algebra


def algebra_residuals(mu: float = 0.7) -> dict:
    """SU(2) relations on the one-particle sector and the LEO commutators."""
    spec = FockSpec(2, 1)
    c0, c1 = build_mode_ops(spec)
    jx, jy, jz = su2_generators(c0, c1)
    P = one_particle_projector(c0, c1, spec.vacuum())
    r = lambda op: dag(P) @ op @ P  # noqa: E731
    out = {
        "[Jx,Jz]+2iJy": _norm(r(commutator(jx, jz)) + 2j * r(jy)),
        "[Jx,Jy]-2iJz": _norm(r(commutator(jx, jy)) - 2j * r(jz)),
    }
    hc = mu * (number(c0) + number(c1))
    for name, j in (("Jx", jx), ("Jy", jy), ("Jz", jz)):
        out[f"[H_C,{name}]"] = _norm(commutator(hc, j))
    # two IPQs: modes (c0a, c1a, c0b, c1b)
    spec2 = FockSpec(4, 1)
    c0a, c1a, c0b, c1b = build_mode_ops(spec2)
    h_cp = math.pi * number(c0a) @ number(c0b)
    h_leo = mu * sum(number(c) for c in (c0a, c1a, c0b, c1b))
    out["[H_C,H_cp]"] = _norm(commutator(h_leo, h_cp))
    return out


def cphase_residuals(alpha: float = math.pi) -> dict:
    """Logical matrix of ``exp(-i alpha n0a n0b)`` (basis ``|11>, |10>, |01>, |00>``) against diag(1,1,1,-1)."""
    spec = FockSpec(4, 1)
    c0a, c1a, c0b, c1b = build_mode_ops(spec)
    U = cphase_unitary(number(c0a), number(c0b), alpha)
    vac = spec.vacuum()
    ket = {"1": (c1a, c1b), "0": (c0a, c0b)}
    cols = []
    for la in "10":
        for lb in "10":
            cols.append(dag(ket[la][0]) @ dag(ket[lb][1]) @ vac)
    B = np.column_stack(cols)
    L = dag(B) @ U @ B
    target = np.diag([1, 1, 1, -1]).astype(complex)
    phase = L[0, 0] / abs(L[0, 0])
    h_leo = sum(number(c) for c in (c0a, c1a, c0b, c1b))
    return {"gate_error": _norm(L / phase - target), "[U,H_LEO]": _norm(commutator(U, h_leo))}


def toy_bath_hamiltonians(M: int = 8, omega0: float = 100.0, Omega: float = 100.0, seed: int = 0):
    """``(R_L, H_SB, H_a)`` on two IPQ modes plus ``M`` bath modes (cutoff 1 each).

    ``H_SB`` couples ``c_i + c_i^dag`` linearly to every bath mode; ``H_a`` holds the free
    system, bath and gate terms.
    """
    rng = np.random.default_rng(seed)
    spec = FockSpec(2 + M, 1)
    # sparse operators; dense products cost seconds at M = 8
    a, eye = sparse.csr_matrix(destroy(1)), sparse.identity(2, format="csr")
    ops = [
        reduce(lambda x, y: sparse.kron(x, y, format="csr"), [a if j == k else eye for j in reversed(range(spec.mode_count))])
        for k in range(spec.mode_count)
    ]
    c0, c1, bath = ops[0], ops[1], ops[2:]
    R = np.real(np.diag(leo_reflection(c0, c1)))
    g = rng.uniform(0.1, 1.0, size=(2, M))
    w = Omega + rng.uniform(-5, 5, size=M)
    h_sb = sum(g[i, k] * (c + dag(c)) @ (b + dag(b)) for i, c in enumerate((c0, c1)) for k, b in enumerate(bath))
    jx, jy, jz = su2_generators(c0, c1)
    h_a = omega0 * (number(c0) + number(c1)) + sum(wk * number(b) for wk, b in zip(w, bath)) + 0.3 * jx + 0.2 * jz
    return R, h_sb.toarray(), h_a.toarray()


def leo_identity_residuals(M: int = 8) -> dict:
    R, h_sb, h_a = toy_bath_hamiltonians(M)
    conj = lambda H: R[:, None] * H * R[None, :]  # noqa: E731  (R_L is diagonal)
    return {"R H_SB R + H_SB": _norm(conj(h_sb) + h_sb), "R H_a R - H_a": _norm(conj(h_a) - h_a)}


# ---------------------------------------------------------------- solver gates


def scalar_problem(a: complex = -0.3 + 1.1j, c: complex = 0.8, lam: complex = 0.5 + 2.0j):
    """``x' = a x - c int exp(-lam (t-s)) x(s) ds`` with its exact solution via the augmented ODE."""
    kernel = MemoryKernel(terms=((c, lam),))
    sys = LinearMemorySystem(1, lambda t: np.array([[a]]), [(kernel, np.array([[-1.0]]))])
    L = np.array([[a, -c], [1.0, -lam]])

    def exact(t):
        return np.array([expm(L * tt)[0, 0] for tt in np.atleast_1d(t)])

    return sys, exact


def generic_order(steps=(40, 80, 160, 320), T: float = 4.0, richardson: bool = False) -> dict:
    sys, exact = scalar_problem()
    ref = exact(T)[0]
    errs = []
    for n in steps:
        grid = np.linspace(0, T, n + 1)
        x = integrate(sys, np.array([1.0 + 0j]), grid, "generic", richardson=richardson).states[-1, 0]
        errs.append(abs(x - ref))
    errs = np.array(errs)
    orders = np.log2(errs[:-1] / errs[1:])
    return {"errors": errs, "orders": orders, "order": float(orders[-1])}


def exponential_vs_generic(model: str, scenario, settings: SolverSettings = SolverSettings(), max_step: float = 0.005, richardson: bool = True) -> float:
    """Max coefficient difference between the two integration paths.

    Both run on the scenario grid, refined uniformly until no step exceeds ``max_step``.
    """
    from . import individual as ind
    from .pulses import refine_grid

    if model == "collective":
        grid = time_grid(scenario, settings)
        sys = collective_system(scenario.spectrum, scenario.omega0, scenario.leo, scenario.gate.gx, scenario.gate.gz)
        x0 = np.array([1, 0, 0, 1], dtype=complex)
    else:
        grid = ind.time_grid(scenario, settings)
        sys = ind.build_individual_system(scenario)
        x0 = np.zeros(sys.dim, dtype=complex)
        x0[0] = x0[3] = 1.0
    grid = refine_grid(grid, max(1, math.ceil(np.max(np.diff(grid)) / max_step - 1e-9)))
    a = integrate(sys, x0, grid, "exponential").states
    b = integrate(sys, x0, grid, "generic", richardson=richardson).states
    return float(np.max(np.abs(a - b)))


def preset_points():
    """``(tag, config)`` for every preset variant and sweep point."""
    from .config import PRESETS, expand_variants, preset
    from .runner import apply_axis

    for name in sorted(PRESETS):
        cfg = preset(name)
        sw = cfg.get("sweep")
        if sw:
            base = {k: v for k, v in cfg.items() if k != "sweep"}
            for v in sw["values"]:
                yield f"{name}[{v:g}]", apply_axis(base, sw["axis"], v, sw.get("mean_beta"))
        else:
            for label, c in expand_variants(cfg):
                yield f"{name}/{label}", c


def _hottest(model: str, scenario) -> float:
    return min([scenario.beta] if model == "collective" else list(scenario.betas))


def solver_gate_groups() -> list:
    """Preset points grouped by coefficient dynamics.

    Temperature and initial state do not enter the integrated equations (they only weight
    the bath responses), so each group is integrated once. The representative is the
    hottest member, where the thermal terms carry the most weight.
    """
    from .runner import build_scenario

    groups: dict = {}
    for tag, cfg in preset_points():
        model, sc = build_scenario(cfg)
        neutral = InitialState.pure(1.0, 0.0)
        if model == "collective":
            bare = replace(sc, beta=math.inf, initial=neutral)
        else:
            bare = replace(sc, betas=(math.inf, math.inf), initial=neutral)
        g = groups.setdefault(repr(bare), {"tags": [], "model": model, "scenario": sc, "config": cfg})
        g["tags"].append(tag)
        if _hottest(model, sc) < _hottest(g["model"], g["scenario"]):
            g.update(scenario=sc, config=cfg)
    return list(groups.values())


def preset_solver_gates() -> list:
    """``(tags, exponential-vs-generic difference, grid-refinement change, refine_tol)`` per group."""
    from .runner import refinement_change, solve, solver_settings

    out = []
    for g in solver_gate_groups():
        model, sc, cfg = g["model"], g["scenario"], g["config"]
        settings = solver_settings(cfg)
        diff = exponential_vs_generic(model, sc, settings)
        sol = solve(model, sc, settings, reference=False)
        change = refinement_change(model, sc, settings, sol.grid, sol)
        out.append((tuple(g["tags"]), diff, change, float(cfg["solver"]["refine_tol"])))
    return out


# ---------------------------------------------------------------- oracle agreement


def collective_oracle_error(duration: float = 4.0, modes: int = 400, leo: bool = False, kernel_sign: float = 1.0) -> float:
    """Volterra vs oracle coefficients (collective RWA storage, Gamma=5, gamma=0.5, Omega=omega0=100), c-representation.

    ``kernel_sign = -1`` flips the memory kernel, which the comparison must detect.
    """
    sp = LorentzianSpectrum(5.0, 0.5, 100.0)
    w0 = 100.0
    train = PulseTrain(50.0, 0.02 * math.pi, 0.005 * math.pi, duration) if leo else PulseTrain.off(duration)
    sc = CollectiveScenario(GateKind(), sp, w0, 0.01, train, duration)
    grid = time_grid(sc, SolverSettings())
    sys = collective_system(sp, w0, train)
    if kernel_sign != 1.0:
        sys = replace(sys, memory=[(k.scaled(kernel_sign), m) for k, m in sys.memory])
    states = integrate(sys, np.array([1, 0, 0, 1], dtype=complex), grid).states
    C = a_to_c(_vec_to_matrix(states)) * np.exp(-1j * w0 * grid)[:, None, None]
    traj = propagate(collective_model(sp, w0, train, modes), grid)
    return float(np.max(np.abs(C - traj.C)))


def individual_oracle_error(duration: float = 4.0, modes: int = 400) -> tuple:
    """Volterra vs oracle ``(C, Cbar)`` errors, individual non-RWA storage with the collective bath parameters."""
    from .individual import IndividualScenario, simulate_individual
    from .individual import time_grid as ind_grid
    from .oracle import individual_model

    sp = LorentzianSpectrum(5.0, 0.5, 100.0)
    train = PulseTrain.off(duration)
    sc = IndividualScenario(GateKind(), (sp, sp), (100.0, 100.0), (0.01, 0.01), train, duration)
    grid = ind_grid(sc, SolverSettings())
    co = simulate_individual(sc, SolverSettings(), grid)
    traj = propagate(individual_model((sp, sp), (100.0, 100.0), train, modes), grid)
    return float(np.max(np.abs(co.C - traj.C))), float(np.max(np.abs(co.Cbar - traj.Cbar)))


# ---------------------------------------------------------------- config


def tampered_units_rejected() -> bool:
    from .config import PRESETS, normalize

    bad = dict(PRESETS["fig1b"])
    bad["units"] = "Gamma"
    try:
        normalize(bad)
    except ConfigError:
        return True
    return False


# ---------------------------------------------------------------- verify


def _timed(name: str, fn: Callable[[], tuple]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        passed, value, threshold, detail = fn()
    except Exception as exc:  # report, never abort the suite
        passed, value, threshold, detail = False, float("nan"), float("nan"), f"raised {type(exc).__name__}: {exc}"
    return CheckResult(name, bool(passed), float(value), float(threshold), detail, time.perf_counter() - t0)


def verify(kernel_sign: float = 1.0, seed: int = 0) -> list:
    """Reduced-scale property suite; ``kernel_sign`` is a sensitivity hook for the oracle check."""
    from .collective import run_collective
    from .qec import binomial_code, binomial_errors, ipq_code, ipq_errors, kl_matrix, wwm_trials
    from .fock import IPQModes

    def algebra():
        r = algebra_residuals()
        v = max(r.values())
        return v <= 1e-12, v, 1e-12, ""

    def leo():
        r = leo_identity_residuals(6)
        v = max(r.values())
        return v <= 1e-12, v, 1e-12, "M=6"

    def cphase():
        r = cphase_residuals()
        v = max(r.values())
        return v <= 1e-10, v, 1e-10, ""

    def dfs():
        sc = CollectiveScenario(
            GateKind(), LorentzianSpectrum(5.0, 0.5, 100.0), 100.0, math.inf, PulseTrain.off(1.0), 1.0,
            InitialState.pure(-math.sqrt(0.5), math.sqrt(0.5)),
        )
        v = float(np.max(run_collective(sc).bloch.infidelity))
        return v <= 1e-10, v, 1e-10, "zero temperature, t<=1"

    def oracle():
        v = collective_oracle_error(duration=2.0, modes=200, kernel_sign=kernel_sign)
        return v <= 2e-3, v, 2e-3, f"M=200, t<=2, kernel sign {kernel_sign:+g}"

    def order():
        r = generic_order(steps=(40, 80, 160))
        return abs(r["order"] - 2) <= 0.2, r["order"], 2.0, "observed order (bound: target)"

    def wwm():
        _, runs = wwm_trials(20, seed=seed)
        v = max(max(1 - t.fidelity0, t.unitarity_defect, abs(t.probability0 + t.probability1 - 1)) for t in runs)
        return v <= 1e-10, v, 1e-10, "20 random states"

    def kl():
        b = kl_matrix(binomial_code(), binomial_errors())
        m = IPQModes.build(4)
        i = kl_matrix(ipq_code(m), ipq_errors(m))
        return b.satisfied and not i.satisfied and i.residual > 0.1, b.residual, 1e-12, f"ipq residual {i.residual:.3f}"

    def schema():
        ok = tampered_units_rejected()
        return ok, 0.0 if ok else 1.0, 0.0, "tampered units rejected"

    checks = [
        ("algebra", algebra),
        ("leo identity", leo),
        ("c-phase", cphase),
        ("dfs storage", dfs),
        ("oracle agreement", oracle),
        ("generic order", order),
        ("wwm recovery", wwm),
        ("knill-laflamme", kl),
        ("config schema", schema),
    ]
    return [_timed(name, fn) for name, fn in checks]
