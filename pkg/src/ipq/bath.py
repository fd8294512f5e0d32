"""Lorentzian reservoirs: spectral density, memory kernels, occupancy and discretization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

INF_BETA = np.inf


@dataclass(frozen=True)
class LorentzianSpectrum:
    """``J(w) = Gamma gamma^2 / (2 pi ((w - Omega)^2 + gamma^2))``."""

    Gamma: float
    gamma: float
    Omega: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.Gamma < 0:
            raise ValueError("Gamma must be non-negative")

    @property
    def total_weight(self) -> float:
        """Full-line integral of J."""
        return 0.5 * self.Gamma * self.gamma

    def cumulative(self, omega) -> np.ndarray:
        """``int_{-inf}^{omega} J``, exact via arctan."""
        x = (np.asarray(omega, dtype=float) - self.Omega) / self.gamma
        return self.total_weight * (0.5 + np.arctan(x) / np.pi)


def spectral_density(spec: LorentzianSpectrum, omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    return spec.Gamma * spec.gamma**2 / (2 * np.pi * ((omega - spec.Omega) ** 2 + spec.gamma**2))


@dataclass(frozen=True)
class MemoryKernel:
    """``k(tau) = sum_m c_m exp(-lambda_m tau)``, optionally backed by samples.

    When ``samples`` is given the kernel is evaluated by linear interpolation on the
    uniform grid ``tau_k = k * sample_step`` and the exponential terms are ignored.
    """

    terms: tuple = ()
    samples: Optional[np.ndarray] = None
    sample_step: Optional[float] = None

    def __post_init__(self):
        terms = tuple((complex(c), complex(lam)) for c, lam in self.terms)
        object.__setattr__(self, "terms", terms)
        for _, lam in terms:
            if not lam.real > 0:
                raise ValueError("decay rates must have positive real part")
        if self.samples is not None:
            if self.sample_step is None or self.sample_step <= 0:
                raise ValueError("sampled kernel needs a positive sample_step")
            object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))

    @property
    def is_exponential(self) -> bool:
        return self.samples is None

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=complex)

    @property
    def rates(self) -> np.ndarray:
        return np.array([lam for _, lam in self.terms], dtype=complex)

    def __call__(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        if self.samples is not None:
            grid = np.arange(len(self.samples)) * self.sample_step
            if np.any(tau > grid[-1] + 1e-12):
                raise ValueError("kernel evaluated beyond its sampled range")
            return np.interp(tau, grid, self.samples.real) + 1j * np.interp(tau, grid, self.samples.imag)
        out = np.zeros(tau.shape, dtype=complex)
        for c, lam in self.terms:
            out = out + c * np.exp(-lam * tau)
        return out

    def conj(self) -> "MemoryKernel":
        """Kernel ``tau -> conj(k(tau))``."""
        if self.samples is not None:
            return MemoryKernel(samples=self.samples.conj(), sample_step=self.sample_step)
        return MemoryKernel(terms=tuple((np.conj(c), np.conj(lam)) for c, lam in self.terms))

    def scaled(self, factor: complex) -> "MemoryKernel":
        if self.samples is not None:
            return MemoryKernel(samples=self.samples * factor, sample_step=self.sample_step)
        return MemoryKernel(terms=tuple((c * factor, lam) for c, lam in self.terms))

    def sampled(self, t_max: float, step: float) -> "MemoryKernel":
        """Tabulate this kernel for use as a generic sampled kernel."""
        n = int(np.ceil(t_max / step)) + 1
        return MemoryKernel(samples=self(np.arange(n) * step), sample_step=step)

    @property
    def max_rate(self) -> float:
        if not self.terms:
            return 0.0
        return float(np.max(np.abs(self.rates)))


ZERO_KERNEL = MemoryKernel()


def rwa_kernel(spec: LorentzianSpectrum, omega0: float) -> MemoryKernel:
    """Single exponential ``(Gamma gamma/2) exp(-(gamma + i(Omega - omega0)) tau)``."""
    if spec.Gamma == 0:
        return ZERO_KERNEL
    return MemoryKernel(terms=((spec.total_weight, spec.gamma + 1j * (spec.Omega - omega0)),))


def nonrwa_kernel(spec: LorentzianSpectrum) -> MemoryKernel:
    """``f(tau) = -2i int J(w) sin(w tau) dw`` over the full line.

    Closing the contour gives ``(Gamma gamma/2)(exp(-(gamma + i Omega) tau) - exp(-(gamma - i Omega) tau))``.
    """
    if spec.Gamma == 0:
        return ZERO_KERNEL
    w = spec.total_weight
    return MemoryKernel(
        terms=((w, spec.gamma + 1j * spec.Omega), (-w, spec.gamma - 1j * spec.Omega))
    )


def thermal_occupancy(omega, beta: float) -> np.ndarray:
    """Bose-Einstein occupancy; exactly zero at ``beta = inf``."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("thermal occupancy requires positive frequencies")
    if np.isinf(beta):
        return np.zeros_like(omega)
    if not beta > 0:
        raise ValueError("beta must be positive or inf")
    return 1.0 / np.expm1(beta * omega)


@dataclass(frozen=True)
class BathDiscretization:
    """Discrete bath modes ``(omega_k, g_k)`` standing in for a continuum."""

    omegas: np.ndarray
    couplings: np.ndarray
    beta: float = INF_BETA

    def __post_init__(self):
        if len(self.omegas) != len(self.couplings):
            raise ValueError("omegas and couplings differ in length")
        if np.any(np.diff(self.omegas) <= 0):
            raise ValueError("frequencies must be strictly increasing")

    @property
    def size(self) -> int:
        return len(self.omegas)

    def occupancies(self, beta: Optional[float] = None) -> np.ndarray:
        return thermal_occupancy(self.omegas, self.beta if beta is None else beta)


def discretize(
    spec: LorentzianSpectrum,
    mode_count: int,
    coverage: float = 20.0,
    beta: float = INF_BETA,
    tails: bool = True,
) -> BathDiscretization:
    """Uniform midpoint grid on ``[Omega - k gamma, Omega + k gamma]`` clipped to ``w > 0``.

    Couplings are bin integrals ``g_k^2 = int_bin J``; with ``tails`` the spectral mass
    beyond the window (and below zero frequency) is folded into the outermost bins, so
    ``sum g^2`` equals the full-line weight up to rounding.
    """
    if mode_count < 2:
        raise ValueError("need at least two bath modes")
    if coverage < 5:
        raise ValueError("coverage must be at least 5 half-widths")
    lo = max(spec.Omega - coverage * spec.gamma, 0.0)
    hi = spec.Omega + coverage * spec.gamma
    if hi <= lo:
        raise ValueError("empty frequency window after clipping")
    edges = np.linspace(lo, hi, mode_count + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    cum = spec.cumulative(edges)
    weights = np.diff(cum)
    if tails:
        weights[0] += cum[0]
        weights[-1] += spec.total_weight - cum[-1]
    return BathDiscretization(omegas=mids, couplings=np.sqrt(weights), beta=beta)


def quadrature_window(spec: LorentzianSpectrum, width: float = 30.0) -> tuple[float, float]:
    return max(0.0, spec.Omega - width * spec.gamma), spec.Omega + width * spec.gamma


@dataclass(frozen=True)
class SpectralQuadrature:
    """Nodes and weights for ``int_window J(w) F(w) dw``.

    Gauss-Legendre in ``theta`` with ``w = Omega + gamma tan(theta)``; this absorbs the
    Lorentzian so the weights already include ``J``.
    """

    omegas: np.ndarray
    weights: np.ndarray

    def integrate(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        return np.tensordot(values, self.weights, axes=([axis], [0]))


def spectral_quadrature(
    spec: LorentzianSpectrum, nodes: int = 64, window: Optional[Sequence[float]] = None, width: float = 30.0
) -> SpectralQuadrature:
    lo, hi = window if window is not None else quadrature_window(spec, width)
    th_lo = np.arctan((lo - spec.Omega) / spec.gamma)
    th_hi = np.arctan((hi - spec.Omega) / spec.gamma)
    x, w = np.polynomial.legendre.leggauss(nodes)
    theta = 0.5 * (th_hi - th_lo) * x + 0.5 * (th_hi + th_lo)
    omegas = spec.Omega + spec.gamma * np.tan(theta)
    # J(w) dw = (Gamma gamma / 2pi) dtheta
    weights = w * 0.5 * (th_hi - th_lo) * spec.Gamma * spec.gamma / (2 * np.pi)
    return SpectralQuadrature(omegas=omegas, weights=weights)
