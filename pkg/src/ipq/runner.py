"""Scenario pipeline behind the CLI: config to scenario, solve, emit CSV plus JSON sidecar."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import collective as coll
from . import individual as ind
from . import oracle as orc
from .bath import LorentzianSpectrum
from .collective import CollectiveScenario, GateKind, SolverSettings
from .config import expand_variants, get_path, set_path, validate
from .errors import ConfigError, ConvergenceError
from .individual import IndividualScenario
from .observables import BlochTrajectory, InitialState, attach_fidelity, bloch_series, clamp_series, fidelity_bloch
from .pulses import PulseTrain, refine_grid
from .qec import qec_report

log = logging.getLogger(__name__)

BASE_COLUMNS = ("time", "n0", "n1", "Jx", "Jy", "Jz", "infidelity", "trace_distance", "clamped")
ORACLE_COLUMNS = ("n0", "n1", "Jx", "Jy", "Jz", "infidelity")


# ---------------------------------------------------------------- config to scenario


def _spectrum(d: dict) -> LorentzianSpectrum:
    return LorentzianSpectrum(float(d["Gamma"]), float(d["gamma"]), float(d["Omega"]))


def _initial(d: dict) -> InitialState:
    a0 = complex(*d["alpha0"])
    a1 = complex(*d["alpha1"])
    return InitialState.pure(a0, a1)


def _train(cfg: dict, duration: float) -> PulseTrain:
    leo = cfg["leo"]
    if not leo.get("enabled", False):
        return PulseTrain.off(duration)
    return PulseTrain(float(leo["strength"]), float(leo["width"]), float(leo["spacing"]), duration)


def solver_settings(cfg: dict) -> SolverSettings:
    s = cfg["solver"]
    return SolverSettings(
        method=s["method"],
        step=s["step"],
        points_per_cycle=int(s["points_per_cycle"]),
        quad_nodes=int(s["quad_nodes"]),
        quad_width=float(s["quad_width"]),
        quad_check=bool(s["quad_check"]),
        quad_tol=float(s["quad_tol"]),
        richardson=bool(s["richardson"]),
    )


def _beta(cfg: dict) -> float:
    return float(cfg.get("beta", math.inf))


def build_scenario(cfg: dict, duration: Optional[float] = None):
    """``(model, scenario)`` with ``model`` either ``"collective"`` or ``"individual"``."""
    kind = cfg["kind"]
    gate = GateKind(cfg["gate"]["type"], float(cfg["gate"]["strength"]))
    init = _initial(cfg["initial"])
    if kind == "thermalization":
        T = float(duration or cfg.get("duration", 10.0))
        sp = _spectrum(cfg["bath"])
        w0 = float(cfg["omega0"])
        beta = _beta(cfg)
        if cfg["coupling"] == "collective":
            return "collective", CollectiveScenario(GateKind(), sp, w0, beta, PulseTrain.off(T), T, init)
        return "individual", IndividualScenario(GateKind(), (sp, sp), (w0, w0), (beta, beta), PulseTrain.off(T), T, init, rwa=bool(cfg["rwa"]))
    T = float(duration or cfg["duration"])
    if kind == "collective":
        return "collective", CollectiveScenario(gate, _spectrum(cfg["bath"]), float(cfg["omega0"]), _beta(cfg), _train(cfg, T), T, init)
    if kind == "individual":
        spectra = tuple(_spectrum(b) for b in cfg["baths"])
        betas = tuple(float(b) for b in cfg["betas"])
        return "individual", IndividualScenario(gate, spectra, tuple(cfg["omega0_pair"]), betas, _train(cfg, T), T, init, rwa=bool(cfg["rwa"]))
    raise ConfigError(f"kind {kind!r} has no dynamics scenario")


# ---------------------------------------------------------------- solving


@dataclass
class Solution:
    model: str
    scenario: object
    grid: np.ndarray
    bloch: BlochTrajectory
    C: np.ndarray
    Cbar: Optional[np.ndarray]
    quad_change: Optional[float]


def default_grid(model: str, scenario, settings: SolverSettings) -> np.ndarray:
    mod = coll if model == "collective" else ind
    return mod.time_grid(scenario, settings, mod.response_scales(scenario, settings))


def _coefficients(model, scenario, settings, grid):
    if model == "collective":
        return coll.simulate(scenario, settings, grid).C, None
    ext = ind.simulate_individual(scenario, settings, grid)
    return ext.C, (None if scenario.rwa else ext.Cbar)


def solve(model: str, scenario, settings: SolverSettings, grid=None, reference: bool = True) -> Solution:
    """Coefficients, thermal moments and Bloch series, with infidelity against the closed run."""
    if grid is None:
        grid = default_grid(model, scenario, settings)
    C, Cbar = _coefficients(model, scenario, settings, grid)
    mod = coll if model == "collective" else ind
    (thermal,), _, change = mod.thermal_series(scenario, grid, settings)
    bloch = bloch_series(grid, C, scenario.initial, thermal, Cbar)
    if reference:
        Cr, Cbr = _coefficients(model, scenario.closed(), settings, grid)
        attach_fidelity(bloch, bloch_series(grid, Cr, scenario.initial, None, Cbr))
    return Solution(model, scenario, grid, bloch, C, Cbar, change)


def refinement_change(model: str, scenario, settings: SolverSettings, grid, sol: Solution) -> float:
    """Endpoint change of the Bloch vector and excitations when every step is halved."""
    fine = solve(model, scenario, settings, refine_grid(grid, 2), reference=False)
    a = np.concatenate([sol.bloch.bloch[-1], sol.bloch.excitations[-1]])
    b = np.concatenate([fine.bloch.bloch[-1], fine.bloch.excitations[-1]])
    return float(np.max(np.abs(a - b)))


def _plateau(x: np.ndarray, times: np.ndarray, tol: float) -> float:
    """Largest relative change of ``x`` between 0.9 T and T (per column)."""
    i = int(np.searchsorted(times, 0.9 * times[-1]))
    d = np.abs(x[-1] - x[i])
    return float(np.max(d / np.maximum(np.abs(x[-1]), 1.0)))


def steady_state(cfg: dict, settings: SolverSettings):
    """Extend the window (doubling) until the excitations plateau; returns ``(Solution, drift)``."""
    tol = float(cfg["steady"]["tol"])
    T = float(cfg.get("duration", 10.0))
    T_max = float(cfg["steady"]["max_duration"])
    while True:
        model, sc = build_scenario(cfg, T)
        sol = solve(model, sc, settings, reference=False)
        drift = _plateau(sol.bloch.excitations, sol.grid, tol)
        if drift <= tol:
            return sol, drift
        if T >= T_max:
            raise ConvergenceError(f"no plateau by t={T:g} (relative drift {drift:.2e} > {tol:g})")
        T = min(2 * T, T_max)


# ---------------------------------------------------------------- oracle columns


def oracle_columns(sol: Solution, cfg: dict) -> dict:
    o = cfg["oracle"]
    sc = sol.scenario
    train = sc.leo
    if sol.model == "collective":
        model = orc.collective_model(sc.spectrum, sc.omega0, train, o["modes"], o["coverage"], sc.gate.gx, sc.gate.gz)
        betas = [sc.beta]
    else:
        model = orc.individual_model(sc.spectra, sc.omega0_pair, train, o["modes"], o["coverage"], sc.gate.gx, sc.gate.gz, rwa=sc.rwa)
        betas = list(sc.betas)
    traj = orc.propagate(model, sol.grid)
    res = orc.thermal_expectation(traj, betas, sc.initial)
    cols = {
        "n0": res["excitations"][:, 0],
        "n1": res["excitations"][:, 1],
        "Jx": res["bloch"][:, 0],
        "Jy": res["bloch"][:, 1],
        "Jz": res["bloch"][:, 2],
    }
    if sol.bloch.infidelity is not None:
        r, _ = clamp_series(res["bloch"])
        # same closed Volterra reference as the main columns
        Cr, Cbr = _coefficients(sol.model, sc.closed(), solver_settings(cfg), sol.grid)
        ref = bloch_series(sol.grid, Cr, sc.initial, None, Cbr).bloch
        s, _ = clamp_series(ref)
        cols["infidelity"] = 1 - fidelity_bloch(r, s)
    return cols


# ---------------------------------------------------------------- output


def _stride_index(n: int, max_rows: int) -> np.ndarray:
    stride = max(1, math.ceil((n - 1) / (max_rows - 1)))
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12e}"


def table(sol: Solution, cfg: dict, oracle: Optional[dict] = None) -> dict:
    cols = dict(sol.bloch.columns())
    if cfg["output"].get("coefficients"):
        for j in range(2):
            for i in range(2):
                cols[f"C{j}{i}_re"] = sol.C[:, j, i].real
                cols[f"C{j}{i}_im"] = sol.C[:, j, i].imag
    if oracle:
        for k in ORACLE_COLUMNS:
            if k in oracle:
                cols[f"{k}_oracle"] = oracle[k]
    return cols


def unit_line(cfg: dict, label: str) -> str:
    u = cfg["units"]
    tu = "1/G" if u == "G" else "1/Gamma"
    return f"# ipq {__version__} run={label} units: time[{tu}] energies[{u}]; n0 n1 Jx Jy Jz infidelity trace_distance dimensionless; clamped flag"


def write_csv(path: Path, cols: dict, header: str, max_rows: int) -> str:
    names = list(cols)
    n = len(cols[names[0]])
    idx = _stride_index(n, max_rows)
    lines = [header, ",".join(names)]
    for i in idx:
        lines.append(",".join(_fmt(cols[k][i]) for k in names))
    data = ("\n".join(lines) + "\n").encode()
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


@dataclass
class RunRecord:
    label: str
    version: str
    config: dict
    timing_s: float
    refinement: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def write_record(path: Path, rec: RunRecord) -> None:
    path.write_text(json.dumps(asdict(rec), indent=2, sort_keys=True, default=_json_default) + "\n")


def _summary(sol: Solution) -> dict:
    b = sol.bloch
    out = {
        "t_end": float(sol.grid[-1]),
        "n0_end": float(b.excitations[-1, 0]),
        "n1_end": float(b.excitations[-1, 1]),
        "Jx_end": float(b.bloch[-1, 0]),
        "Jy_end": float(b.bloch[-1, 1]),
        "Jz_end": float(b.bloch[-1, 2]),
    }
    if b.infidelity is not None:
        out["infidelity_end"] = float(b.infidelity[-1])
        out["infidelity_max"] = float(np.max(b.infidelity))
        out["clamped_any"] = bool(np.any(b.clamped))
    return out


def run_one(cfg: dict, label: str, out_dir: Optional[Path] = None, with_oracle: bool = False) -> RunRecord:
    """Solve one (variant) config; writes ``<label>.csv`` and ``<label>.json`` when ``out_dir`` is set."""
    t0 = time.perf_counter()
    settings = solver_settings(cfg)
    refinement: dict = {}
    if cfg["kind"] == "thermalization":
        sol, drift = steady_state(cfg, settings)
        refinement["plateau_drift"] = drift
    else:
        model, sc = build_scenario(cfg)
        sol = solve(model, sc, settings)
    refinement["quadrature_change"] = sol.quad_change
    if cfg["solver"].get("refine_check"):
        change = refinement_change(sol.model, sol.scenario, settings, sol.grid, sol)
        refinement["grid_change"] = change
        if change > cfg["solver"]["refine_tol"]:
            raise ConvergenceError(f"grid refinement moved endpoint by {change:.2e} (> {cfg['solver']['refine_tol']:.1e})")
    oracle = None
    if with_oracle or cfg["oracle"].get("enabled"):
        oracle = oracle_columns(sol, cfg)
        refinement["oracle_max_abs_bloch_diff"] = float(np.max(np.abs(np.stack([oracle[k] for k in ("Jx", "Jy", "Jz")], -1) - sol.bloch.bloch)))
    rec = RunRecord(label, __version__, cfg, 0.0, refinement, {}, _summary(sol))
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{label}.csv"
        rec.outputs[csv_path.name] = write_csv(csv_path, table(sol, cfg, oracle), unit_line(cfg, label), int(cfg["output"]["max_rows"]))
    rec.timing_s = time.perf_counter() - t0
    if out_dir is not None:
        write_record(out_dir / f"{label}.json", rec)
    return rec


def run(cfg: dict, out_dir: Optional[Path] = None, with_oracle: bool = False) -> list:
    """Run every variant of a config; QEC configs produce a JSON report instead."""
    if cfg["kind"] == "qec":
        return [run_qec(cfg, out_dir)]
    if cfg.get("sweep"):
        raise ConfigError("config declares a sweep; use the sweep subcommand")
    return [run_one(c, label, out_dir, with_oracle) for label, c in expand_variants(cfg)]


def run_qec(cfg: dict, out_dir: Optional[Path] = None, seed: Optional[int] = None) -> dict:
    q = cfg["qec"]
    report = qec_report(int(q["trials"]), q["epsilon"], int(q["cutoff"]), int(cfg["seed"] if seed is None else seed))
    report["version"] = __version__
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "qec.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n")
    return report


# ---------------------------------------------------------------- sweeps


def apply_axis(cfg: dict, axis: str, value: float, mean_beta: Optional[float] = None) -> dict:
    """Config for one sweep point.

    ``temperature`` sets ``1/beta`` (0 means zero temperature) on every bath,
    ``beta_difference`` sets ``betas = (mean - d/2, mean + d/2)``; anything else is a
    dotted config path.
    """
    value = float(value)
    if axis == "temperature":
        if value < 0:
            raise ConfigError("temperature must be non-negative")
        if cfg["kind"] == "individual":
            return set_path(cfg, "betas", [math.inf if value == 0 else 1 / value] * 2)
        if value == 0:
            out = dict(cfg)
            out.pop("beta", None)
            return out
        return set_path(cfg, "beta", 1 / value)
    if axis == "beta_difference":
        if cfg["kind"] != "individual":
            raise ConfigError("beta_difference needs an individual config")
        if mean_beta is None:
            mean_beta = float(np.mean(cfg["betas"]))
        b0, b1 = mean_beta - value / 2, mean_beta + value / 2
        if b0 <= 0 or b1 <= 0:
            raise ConfigError("beta difference leaves a non-positive beta")
        return set_path(cfg, "betas", [b0, b1])
    try:
        get_path(cfg, axis)
    except (KeyError, TypeError):
        raise ConfigError(f"sweep axis {axis!r} is not a config parameter") from None
    return set_path(cfg, axis, value)


def sweep(cfg: dict, out_dir: Optional[Path] = None, with_oracle: bool = False, axis: Optional[str] = None, values=None) -> list:
    """One run per axis value, in the given order; writes ``summary.csv``."""
    sw = cfg.get("sweep") or {}
    axis = axis or sw.get("axis")
    values = list(values if values is not None else sw.get("values", []))
    if not axis:
        raise ConfigError("no sweep axis given")
    if not values:
        raise ConfigError("sweep axis has no values")
    if cfg.get("variants"):
        raise ConfigError("sweeps over configs with variants are not supported")
    base = {k: v for k, v in cfg.items() if k != "sweep"}
    rows = []
    for k, v in enumerate(values):
        point = apply_axis(base, axis, v, sw.get("mean_beta"))
        validate({k2: v2 for k2, v2 in point.items()})
        rec = run_one(point, f"point{k:03d}", out_dir, with_oracle)
        rows.append((v, rec))
    if out_dir is not None:
        keys = sorted({key for _, r in rows for key in r.summary if not isinstance(r.summary[key], bool)})
        lines = [unit_line(cfg, "summary") + f"; axis {axis}", ",".join([axis, *keys])]
        for v, r in rows:
            lines.append(",".join([_fmt(float(v)), *(_fmt(r.summary.get(key, float("nan"))) for key in keys)]))
        (out_dir / "summary.csv").write_text("\n".join(lines) + "\n")
    return rows
