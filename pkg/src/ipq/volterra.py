"""Linear integro-differential systems with memory.

The systems have the form::

    x'(t) = A(t) x(t) + sum_q int_0^t k_q(t - s) M_q x(s) ds + d(t)

with ``A`` piecewise constant between grid points. States may be vectors ``(dim,)`` or
matrices ``(dim, ncols)`` whose columns evolve independently.

Two integrators are provided:

* :func:`integrate_exponential` replaces every exponential memory term by an auxiliary
  pseudo-mode and propagates the enlarged ODE. With no drive, or a drive of the form
  ``a exp(-i nu t)``, each step is an exact matrix exponential; otherwise classical RK4.
* :func:`integrate_generic` is a second-order exponential product-trapezoidal scheme
  that only needs kernel values, so it also accepts sampled kernels.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, SolverError
from .pulses import refine_grid

log = logging.getLogger(__name__)

BLOWUP_BOUND = 1e8


@dataclass(frozen=True)
class ExpDrive:
    """``d(t)[:, c] = amplitude * exp(-i frequencies[c] t)``."""

    amplitude: np.ndarray
    frequencies: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitude", np.asarray(self.amplitude, dtype=complex))
        object.__setattr__(self, "frequencies", np.atleast_1d(np.asarray(self.frequencies, dtype=float)))

    def __call__(self, t: float) -> np.ndarray:
        return self.amplitude[:, None] * np.exp(-1j * self.frequencies * t)[None, :]


Drive = Union[None, ExpDrive, Callable[[float], np.ndarray]]


@dataclass
class LinearMemorySystem:
    """``x' = A(t) x + sum_q int k_q(t-s) M_q x(s) ds + d(t)``.

    ``drift`` is evaluated at step midpoints and must be constant on each grid step.
    Memory signs live in the masks.
    """

    dim: int
    drift: Callable[[float], np.ndarray]
    memory: list = field(default_factory=list)
    drive: Drive = None

    def __post_init__(self):
        mem = []
        for kernel, mask in self.memory:
            mask = np.asarray(mask, dtype=complex)
            if mask.shape != (self.dim, self.dim):
                raise DimensionError("memory mask does not match system dimension")
            mem.append((kernel, mask))
        self.memory = mem
        a = np.asarray(self.drift(0.0))
        if a.shape != (self.dim, self.dim):
            raise DimensionError("drift does not match system dimension")

    @property
    def is_exponential(self) -> bool:
        return all(k.is_exponential for k, _ in self.memory)

    def drive_at(self, t: float, ncols: Optional[int]) -> np.ndarray:
        if self.drive is None:
            return 0.0
        d = np.asarray(self.drive(t))
        if ncols is None and d.ndim == 2:
            d = d[:, 0]
        return d


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def default_step(width: Optional[float], scales: Sequence[float], points_per_cycle: int = 50) -> float:
    """``min(width/8, 2 pi / (points_per_cycle * max scale))``."""
    s = max([abs(x) for x in scales] + [1e-12])
    h = 2 * np.pi / (points_per_cycle * s)
    if width is not None:
        h = min(h, width / 8)
    return h


def _prepare(x0, grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")
    x0 = np.asarray(x0, dtype=complex)
    vector = x0.ndim == 1
    X0 = x0[:, None] if vector else x0
    return grid, X0, vector


def _check_blowup(x: np.ndarray, t: float) -> None:
    m = np.max(np.abs(x))
    if not np.isfinite(m) or m > BLOWUP_BOUND:
        raise SolverError(f"state norm {m:.3e} exceeded bound at t={t:.6g}")


def _rate_blocks(sys: LinearMemorySystem):
    """Group exponential memory terms by decay rate: list of (rate, coupling matrix)."""
    blocks: dict = {}
    for kernel, mask in sys.memory:
        for c, lam in kernel.terms:
            key = (round(lam.real, 12), round(lam.imag, 12))
            if key in blocks:
                blocks[key] = (blocks[key][0], blocks[key][1] + c * mask)
            else:
                blocks[key] = (lam, c * mask)
    return [blocks[k] for k in sorted(blocks)]


def _augmented(A: np.ndarray, blocks, n: int) -> np.ndarray:
    R = len(blocks)
    D = n * (1 + R)
    L = np.zeros((D, D), dtype=complex)
    L[:n, :n] = A
    for r, (lam, B) in enumerate(blocks):
        sl = slice(n * (r + 1), n * (r + 2))
        L[:n, sl] = B
        L[sl, :n] = np.eye(n)
        L[sl, sl] = -lam * np.eye(n)
    return L


def integrate_exponential(sys: LinearMemorySystem, x0, grid, stepper: str = "auto") -> Trajectory:
    """Pseudo-mode augmentation for exponential-sum kernels.

    Each term ``c exp(-lambda tau)`` gets an auxiliary ``z`` with ``z' = -lambda z + x``;
    the memory integral becomes ``sum c M z``. ``stepper`` is ``"expm"`` (exact per step,
    needs no drive or an :class:`ExpDrive`), ``"rk4"`` or ``"auto"``.
    """
    if not sys.is_exponential:
        log.info("non-exponential kernel routed to the generic integrator")
        return integrate_generic(sys, x0, grid)
    grid, X0, vector = _prepare(x0, grid)
    n, ncols = X0.shape
    if n != sys.dim:
        raise DimensionError("initial state does not match system dimension")
    if stepper == "auto":
        stepper = "expm" if (sys.drive is None or isinstance(sys.drive, ExpDrive)) else "rk4"
    blocks = _rate_blocks(sys)
    R = len(blocks)
    D = n * (1 + R)
    W = np.zeros((D, ncols), dtype=complex)
    W[:n] = X0
    out = np.empty((len(grid), n, ncols), dtype=complex)
    out[0] = X0
    cache: dict = {}

    if stepper == "expm":
        drive = sys.drive
        if drive is not None and not isinstance(drive, ExpDrive):
            raise ValueError("expm stepper needs no drive or an ExpDrive")
        if drive is not None:
            nus = np.broadcast_to(drive.frequencies, (ncols,))
            U = np.exp(-1j * nus * grid[0])
            W = np.vstack([W, U[None, :]])
        for i in range(len(grid) - 1):
            t0, t1 = grid[i], grid[i + 1]
            h = t1 - t0
            A = np.asarray(sys.drift(0.5 * (t0 + t1)), dtype=complex)
            key = (A.tobytes(), round(h, 15))
            P = cache.get(key)
            if P is None:
                L = _augmented(A, blocks, n)
                if drive is None:
                    P = expm(L * h)
                else:
                    Lb = np.zeros((ncols, D + 1, D + 1), dtype=complex)
                    Lb[:, :D, :D] = L
                    Lb[:, :n, D] = drive.amplitude
                    Lb[:, D, D] = -1j * nus
                    P = expm(Lb * h)
                cache[key] = P
            if drive is None:
                W = P @ W
            else:
                W = np.einsum("cij,jc->ic", P, W)
            out[i + 1] = W[:n]
            if i % 256 == 0:
                _check_blowup(W[:n], t1)
    elif stepper == "rk4":
        def rhs(t, A, Wc):
            d = np.zeros((D, ncols), dtype=complex)
            x = Wc[:n]
            acc = A @ x
            for r, (lam, B) in enumerate(blocks):
                z = Wc[n * (r + 1): n * (r + 2)]
                acc = acc + B @ z
                d[n * (r + 1): n * (r + 2)] = -lam * z + x
            if sys.drive is not None:
                dv = np.asarray(sys.drive(t))
                acc = acc + (dv if dv.ndim == 2 else dv[:, None])
            d[:n] = acc
            return d

        for i in range(len(grid) - 1):
            t0, t1 = grid[i], grid[i + 1]
            h = t1 - t0
            A = np.asarray(sys.drift(0.5 * (t0 + t1)), dtype=complex)
            k1 = rhs(t0, A, W)
            k2 = rhs(t0 + h / 2, A, W + h / 2 * k1)
            k3 = rhs(t0 + h / 2, A, W + h / 2 * k2)
            k4 = rhs(t1, A, W + h * k3)
            W = W + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            out[i + 1] = W[:n]
            if i % 256 == 0:
                _check_blowup(W[:n], t1)
    else:
        raise ValueError(f"unknown stepper {stepper!r}")
    _check_blowup(out[-1], grid[-1])
    return Trajectory(grid, out[:, :, 0] if vector else out)


def _phi_blocks(A: np.ndarray, h: float):
    """``(E, h phi1(Ah), h phi2(Ah))`` from one block exponential."""
    n = A.shape[0]
    Z = np.zeros((3 * n, 3 * n), dtype=complex)
    Z[:n, :n] = A * h
    Z[:n, n:2 * n] = np.eye(n)
    Z[n:2 * n, 2 * n:] = np.eye(n)
    F = expm(Z)
    return F[:n, :n], h * F[:n, n:2 * n], h * F[:n, 2 * n:]


def _generic_pass(sys: LinearMemorySystem, X0: np.ndarray, grid: np.ndarray) -> np.ndarray:
    n, ncols = X0.shape
    N = len(grid)
    hs = np.diff(grid)
    out = np.empty((N, n, ncols), dtype=complex)
    out[0] = X0
    flat = out.reshape(N, n * ncols)
    masks = [m for _, m in sys.memory]
    kernels = [k for k, _ in sys.memory]
    K0 = sum((complex(k(0.0)) * m for k, m in sys.memory), np.zeros((n, n), dtype=complex))
    cache: dict = {}
    eye = np.eye(n)

    def drive(t):
        if sys.drive is None:
            return 0.0
        d = np.asarray(sys.drive(t))
        return d if d.ndim == 2 else d[:, None]

    def history(i: int) -> np.ndarray:
        """Trapezoid memory sum at ``t_{i+1}`` over points ``0..i``; the weight of ``x_{i+1}`` is left out."""
        if not masks:
            return np.zeros((n, ncols), dtype=complex)
        taus = grid[i + 1] - grid[: i + 1]
        w = np.empty(i + 1)
        w[0] = hs[0] / 2
        w[1:] = 0.5 * (hs[:i] + hs[1: i + 1])
        acc = np.zeros((n, ncols), dtype=complex)
        for k, m in zip(kernels, masks):
            kv = k(taus) * w
            acc += m @ (kv @ flat[: i + 1]).reshape(n, ncols)
        return acc

    F_prev = drive(grid[0]) + np.zeros((n, ncols))
    for i in range(N - 1):
        t0, t1 = grid[i], grid[i + 1]
        h = hs[i]
        A = np.asarray(sys.drift(0.5 * (t0 + t1)), dtype=complex)
        key = (A.tobytes(), round(h, 15))
        blk = cache.get(key)
        if blk is None:
            E, P1, P2 = _phi_blocks(A, h)
            lhs = eye - P2 @ (0.5 * h * K0)
            blk = (E, P1 - P2, P2, np.linalg.inv(lhs))
            cache[key] = blk
        E, Q1, P2, lhs_inv = blk
        x = out[i]
        H = history(i)
        rhs = E @ x + Q1 @ F_prev + P2 @ (H + drive(t1))
        x_new = lhs_inv @ rhs
        out[i + 1] = x_new
        F_prev = H + 0.5 * h * (K0 @ x_new) + drive(t1)
        if i % 256 == 0:
            _check_blowup(x_new, t1)
    _check_blowup(out[-1], grid[-1])
    return out


def integrate_generic(sys: LinearMemorySystem, x0, grid, richardson: bool = False) -> Trajectory:
    """Exponential product-trapezoidal integration, second order.

    The local step integrates ``exp(A(h-u)) F(u)`` exactly for linear ``F`` (phi functions)
    and the history integral uses the trapezoid rule on the grid. With ``richardson`` the
    run is repeated on the grid refined by two and combined as ``(4 x_{h/2} - x_h)/3``.
    """
    grid, X0, vector = _prepare(x0, grid)
    if X0.shape[0] != sys.dim:
        raise DimensionError("initial state does not match system dimension")
    out = _generic_pass(sys, X0, grid)
    if richardson:
        fine = _generic_pass(sys, X0, refine_grid(grid, 2))[::2]
        out = (4 * fine - out) / 3
    return Trajectory(grid, out[:, :, 0] if vector else out)


def integrate(sys: LinearMemorySystem, x0, grid, method: str = "exponential", **kw) -> Trajectory:
    if method == "exponential":
        return integrate_exponential(sys, x0, grid, **kw)
    if method == "generic":
        return integrate_generic(sys, x0, grid, **kw)
    raise ValueError(f"unknown method {method!r}")
