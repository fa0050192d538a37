"""Separation density of the two-particle component and particle-number histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from .basis import ModelParams, TruncatedBasis
from .wavepackets import pair_index_table


def pair_wavefunction(n: int, y, params: ModelParams):
    """Relative wavefunction of the pair |n, -n> at separation ``y``."""
    L = params.L
    y = np.asarray(y, dtype=float)
    if n == 0:
        return np.full_like(y, math.sqrt(2.0 / L))[()]
    return (2.0 / math.sqrt(L) * np.cos(2.0 * math.pi * n / L * y))[()]


@dataclass
class SeparationDensity:
    y: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def integral(self) -> float:
        return float(trapezoid(self.values, self.y))

    def first_moment(self) -> float:
        return float(trapezoid(self.y * self.values, self.y))

    def mean_separation(self) -> float:
        w = self.integral()
        return self.first_moment() / w if w > 0 else float("nan")


def separation_grid(params: ModelParams, grid_size: int = 512) -> np.ndarray:
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    return np.linspace(0.0, params.L / 2.0, grid_size)


def pair_amplitudes(psi: np.ndarray, basis: TruncatedBasis) -> dict[int, complex]:
    return {m: psi[i] for m, i in pair_index_table(basis).items()}


def separation_density(psi: np.ndarray, basis: TruncatedBasis, grid_size: int = 512) -> SeparationDensity:
    """<rho(y)> = |sum_n c_n phi_n(y)|^2 on a uniform grid over [0, L/2]."""
    y = separation_grid(basis.params, grid_size)
    amp = np.zeros_like(y, dtype=complex)
    weight = 0.0
    for m, c in pair_amplitudes(psi, basis).items():
        amp += c * pair_wavefunction(m, y, basis.params)
        weight += abs(c) ** 2
    return SeparationDensity(y, np.abs(amp) ** 2, {"two_particle_weight": weight})


def occupation_histogram(psi: np.ndarray, basis: TruncatedBasis) -> dict[int, float]:
    probs = np.abs(psi) ** 2
    out = {}
    for n in sorted(set(basis.particle_numbers.tolist())):
        out[n] = float(probs[basis.particle_numbers == n].sum())
    return out


def _mirrored(density: SeparationDensity) -> tuple[np.ndarray, np.ndarray]:
    # rho(y) = rho(L - y), so reflecting about L/2 puts the central peak inside the grid
    y, v = density.y, density.values
    half = y[-1]
    return np.concatenate([y, 2 * half - y[-2::-1]]), np.concatenate([v, v[-2::-1]])


def fringe_spacing(density: SeparationDensity, rel_height: float = 0.2) -> float:
    """Median gap between neighbouring dark fringes (local minima) of the density.

    The density is reflected about y = L/2 first. The bright region is the
    span of maxima above ``rel_height`` of the peak; the minima inside it
    and the nearest minimum on either side are used. Minima are less
    pulled by the envelope slope than maxima. Returns NaN with fewer than
    two minima.
    """
    y, v = _mirrored(density)
    peaks, _ = find_peaks(v, height=rel_height * v.max())
    if len(peaks) == 0:
        return float("nan")
    lo, hi = peaks.min(), peaks.max()
    dips, _ = find_peaks(-v)
    inner = dips[(dips > lo) & (dips < hi)]
    below, above = dips[dips < lo], dips[dips > hi]
    keep = np.concatenate([below[-1:], inner, above[:1]])
    if len(keep) < 2:
        return float("nan")
    return float(np.median(np.diff(y[keep])))


def envelope_width(density: SeparationDensity, center: float | None = None) -> float:
    """RMS distance of the density from ``center`` (default: the far end, y = L/2)."""
    c = density.y[-1] if center is None else center
    w = density.integral()
    return math.sqrt(float(trapezoid((density.y - c) ** 2 * density.values, density.y)) / w)


def collision_time(times, first_moments) -> float:
    """Time at which the first moment of the separation density is smallest."""
    return float(np.asarray(times)[int(np.argmin(first_moments))])
