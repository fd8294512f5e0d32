"""Rectangular LEO pulse trains ``mu(t)`` and pulse-resolving time grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_GRID = 2_000_000


@dataclass(frozen=True)
class PulseTrain:
    """Pulses of height ``strength`` and length ``width`` separated by gaps of ``spacing``.

    The first pulse starts at ``start_offset``. Each pulse is closed on the left and open
    on the right. ``strength = 0`` switches the train off.
    """

    strength: float
    width: float
    spacing: float
    total_duration: float
    start_offset: float = 0.0

    def __post_init__(self):
        if self.strength < 0:
            raise ValueError("pulse strength must be non-negative")
        if not self.width > 0:
            raise ValueError("pulse width must be positive")
        if self.spacing < 0:
            raise ValueError("pulse spacing must be non-negative")
        if not self.total_duration > 0:
            raise ValueError("duration must be positive")

    @classmethod
    def off(cls, total_duration: float) -> "PulseTrain":
        return cls(0.0, 1.0, 0.0, total_duration)

    @property
    def period(self) -> float:
        return self.width + self.spacing

    @property
    def active(self) -> bool:
        return self.strength > 0

    @property
    def phase_per_pulse(self) -> float:
        return self.strength * self.width

    def _check(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        tol = 1e-12 * max(1.0, self.total_duration)
        if np.any(t < -tol) or np.any(t > self.total_duration + tol):
            raise ValueError("time outside [0, total_duration]")
        return t

    def _local(self, t: np.ndarray) -> np.ndarray:
        """Position within the current period, measured from the pulse start."""
        local = np.mod(t - self.start_offset, self.period)
        # a pulse start that rounds to just below a period boundary belongs to the pulse
        return np.where(self.period - local < 1e-9 * self.period, 0.0, local)

    def mu(self, t) -> np.ndarray:
        t = self._check(t)
        if not self.active:
            return np.zeros_like(t)
        inside = self._local(t) < self.width - 1e-9 * self.period
        return np.where(inside, self.strength, 0.0)

    def _raw_phase(self, t: np.ndarray) -> np.ndarray:
        # phase measured from the first pulse start, valid for any real t
        s = t - self.start_offset
        k = np.floor(s / self.period)
        local = s - k * self.period
        return self.strength * (k * self.width + np.minimum(local, self.width))

    def phase(self, t) -> np.ndarray:
        """``int_0^t mu``, closed form."""
        t = self._check(t)
        if not self.active:
            return np.zeros_like(t)
        return self._raw_phase(t) - self._raw_phase(np.zeros(1))[0]

    def edges(self) -> np.ndarray:
        """Pulse switch times strictly inside ``(0, total_duration)``."""
        if not self.active:
            return np.empty(0)
        k0 = np.floor(-self.start_offset / self.period) - 1
        k1 = np.ceil((self.total_duration - self.start_offset) / self.period) + 1
        k = np.arange(k0, k1 + 1)
        starts = self.start_offset + k * self.period
        ed = np.concatenate([starts, starts + self.width])
        ed = ed[(ed > 0) & (ed < self.total_duration)]
        return np.unique(ed)


def mu_at(train: PulseTrain, t):
    return train.mu(t)


def phase_integral(train: PulseTrain, t):
    return train.phase(t)


def build_grid(train: PulseTrain, base_step: float, min_steps_per_pulse: int = 8, cap: int = MAX_GRID) -> np.ndarray:
    """Time grid containing every pulse edge; each segment is split uniformly.

    Segments are cut into ``ceil(length / base_step)`` equal steps, raised so each pulse
    holds at least ``min_steps_per_pulse`` steps.
    """
    if not base_step > 0:
        raise ValueError("base_step must be positive")
    T = train.total_duration
    breaks = np.concatenate([[0.0], train.edges(), [T]])
    # drop slivers produced by rounding at coincident edges
    keep = np.concatenate([[True], np.diff(breaks) > 1e-12 * max(1.0, T)])
    breaks = breaks[keep]
    breaks[-1] = T
    est = int(np.sum(np.ceil(np.diff(breaks) / base_step)))
    if est > cap:
        raise ValueError(f"grid of {est} points exceeds cap {cap}")
    pieces = [np.array([0.0])]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = int(np.ceil((b - a) / base_step - 1e-9))
        n = max(n, 1)
        if train.active and train.mu(0.5 * (a + b)) > 0:
            n = max(n, min_steps_per_pulse)
        pieces.append(np.linspace(a, b, n + 1)[1:])
    grid = np.concatenate(pieces)
    if len(grid) > cap:
        raise ValueError(f"grid of {len(grid)} points exceeds cap {cap}")
    return grid


def refine_grid(grid: np.ndarray, factor: int) -> np.ndarray:
    """Split every step of ``grid`` into ``factor`` equal sub-steps."""
    if factor == 1:
        return np.asarray(grid, dtype=float)
    a, b = grid[:-1], grid[1:]
    frac = np.arange(factor) / factor
    inner = (a[:, None] + (b - a)[:, None] * frac[None, :]).ravel()
    return np.concatenate([inner, grid[-1:]])
