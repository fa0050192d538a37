"""Free-theory initial state: two back-to-back Gaussian packets at separation L/2."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .basis import TruncatedBasis, dispersion, pair_state


class EmptySupport(ValueError):
    pass


class WidthWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WavepacketSpec:
    p0: float
    delta: float

    def __post_init__(self):
        if not self.p0 > 0:
            raise ValueError("p0 must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def check_width(self, L: float) -> bool:
        ok = 1.0 / self.p0 < self.delta < L
        if not ok:
            warnings.warn(
                f"packet width delta={self.delta} outside 1/p0={1 / self.p0:.3g} << delta << L={L}",
                WidthWarning,
                stacklevel=3,
            )
        return ok


def pair_index_table(basis: TruncatedBasis) -> dict[int, int]:
    """Map m >= 0 to the basis index of |m, -m>; absent pairs are omitted."""
    out = {}
    for m in range(basis.mode_window + 1):
        i = basis.index_of(pair_state(m))
        if i is not None:
            out[m] = i
    return out


def pair_coefficient(m: int, spec: WavepacketSpec, L: float) -> float:
    """Unnormalised amplitude on the normalised pair state |m, -m>."""
    if m == 0:
        return math.sqrt(2.0) * math.exp(-(spec.p0 * spec.delta) ** 2)
    k = 2.0 * math.pi * m / L
    d2 = spec.delta**2
    return (-1) ** m * (math.exp(-((spec.p0 - k) ** 2) * d2) + math.exp(-((spec.p0 + k) ** 2) * d2))


def two_packet_state(basis: TruncatedBasis, spec: WavepacketSpec) -> np.ndarray:
    """Unit-norm complex amplitude vector over ``basis``.

    Packets sit at 0 and L/2 with momenta +p0 and -p0; the pair sum is
    cut to the pairs that fit in the basis.
    """
    spec.check_width(basis.params.L)
    table = pair_index_table(basis)
    if not table:
        raise EmptySupport("basis contains no |m,-m> pair states")
    psi = np.zeros(len(basis), dtype=complex)
    for m, i in table.items():
        psi[i] = pair_coefficient(m, spec, basis.params.L)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise EmptySupport("all pair amplitudes underflow to zero")
    return psi / norm


def basis_state(basis: TruncatedBasis, i: int) -> np.ndarray:
    psi = np.zeros(len(basis), dtype=complex)
    psi[i] = 1.0
    return psi


def pair_energy(m: int, basis: TruncatedBasis) -> float:
    return 2.0 * dispersion(abs(m), basis.params)[1]
