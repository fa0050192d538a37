"""Truncated free-boson eigenbasis on a circle.

Fock states are stored as tuples of ``(mode, occupation)`` pairs sorted by
mode index, with zero occupations omitted. The empty tuple is the vacuum.
Only the zero-momentum, parity-even sector is built.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

import numpy as np

FockState = tuple  # tuple[tuple[int, int], ...]

VACUUM: FockState = ()


class CutoffTooSmall(ValueError):
    pass


class DegenerateBoundary(UserWarning):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Mass ``M``, circumference ``L`` and quartic coupling ``g``."""

    M: float = 1.0
    L: float = 16.0
    g: float = 1.0

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError(f"mass must be positive, got {self.M}")
        if not self.L > 0:
            raise ValueError(f"circumference must be positive, got {self.L}")
        if not self.g >= 0:
            raise ValueError(f"coupling must be non-negative, got {self.g}")

    def with_coupling(self, g: float) -> "ModelParams":
        return ModelParams(M=self.M, L=self.L, g=g)


@dataclass(frozen=True)
class TruncationSpec:
    """Either an energy cutoff (``mode='energy'``) or a qubit budget (``mode='qubits'``)."""

    mode: str
    value: float

    def __post_init__(self):
        if self.mode == "energy":
            if not self.value >= 0:
                raise ValueError("energy cutoff must be >= 0")
        elif self.mode == "qubits":
            if int(self.value) != self.value or self.value < 1:
                raise ValueError("qubit count must be a positive integer")
        else:
            raise ValueError(f"unknown truncation mode {self.mode!r}")

    @classmethod
    def energy(cls, e_max: float) -> "TruncationSpec":
        return cls("energy", float(e_max))

    @classmethod
    def qubits(cls, n_q: int) -> "TruncationSpec":
        return cls("qubits", int(n_q))


@lru_cache(maxsize=None)
def dispersion(n: int, params: ModelParams) -> tuple[float, float]:
    """Return ``(k_n, omega_n)`` for mode ``n``."""
    k = 2.0 * math.pi * n / params.L
    return k, math.sqrt(k * k + params.M * params.M)


def omega(n: int, params: ModelParams) -> float:
    return dispersion(abs(n), params)[1]


def make_state(occupations: Mapping[int, int] | Iterable[tuple[int, int]]) -> FockState:
    items = occupations.items() if isinstance(occupations, Mapping) else occupations
    out = {}
    for n, r in items:
        if r < 0:
            raise ValueError(f"negative occupation {r} in mode {n}")
        if r:
            out[int(n)] = out.get(int(n), 0) + int(r)
    return tuple(sorted(out.items()))


def particle_number(s: FockState) -> int:
    return sum(r for _, r in s)


def total_momentum(s: FockState) -> int:
    """Total momentum in units of 2*pi/L."""
    return sum(n * r for n, r in s)


def state_energy(s: FockState, params: ModelParams) -> float:
    # summed per |n| in a fixed order so degenerate states get identical floats
    counts: dict[int, int] = {}
    for n, r in s:
        counts[abs(n)] = counts.get(abs(n), 0) + r
    return math.fsum(c * omega(a, params) for a, c in sorted(counts.items()))


def parity_image(s: FockState) -> FockState:
    return tuple((-n, r) for n, r in reversed(s))


def order_key(s: FockState) -> tuple:
    """Total order on occupation maps: particle number, then occupations by mode."""
    return (particle_number(s), s)


def canonical(s: FockState) -> FockState:
    p = parity_image(s)
    return s if order_key(s) <= order_key(p) else p


def format_state(s: FockState) -> str:
    return ";".join(f"{n}:{r}" for n, r in s)


def parse_state(text: str) -> FockState:
    text = text.strip()
    if not text:
        return VACUUM
    pairs = []
    for item in text.split(";"):
        n, r = item.split(":")
        pairs.append((int(n), int(r)))
    return make_state(pairs)


@dataclass(frozen=True)
class ParityClass:
    representative: FockState
    energy: float
    particle_number: int

    @property
    def self_conjugate(self) -> bool:
        return parity_image(self.representative) == self.representative

    @property
    def beta(self) -> float:
        return 0.5 if self.self_conjugate else 1.0 / math.sqrt(2.0)

    @property
    def label(self) -> str:
        return format_state(self.representative)


@dataclass
class TruncatedBasis:
    params: ModelParams
    spec: TruncationSpec
    states: list[ParityClass]
    even_only: bool = False
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            for i, c in enumerate(self.states):
                self._index[c.representative] = i
                self._index[parity_image(c.representative)] = i
        self.energies = np.array([c.energy for c in self.states])
        self.particle_numbers = np.array([c.particle_number for c in self.states], dtype=int)
        self.mode_window = max((abs(n) for c in self.states for n, _ in c.representative), default=0)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[ParityClass]:
        return iter(self.states)

    def __getitem__(self, i: int) -> ParityClass:
        return self.states[i]

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def n_qubits(self) -> int:
        return qubits_for(self.dim)

    @property
    def e_ceiling(self) -> float:
        """Energy of the highest kept state."""
        return float(self.energies[-1])

    def index_of(self, s: FockState) -> int | None:
        """Position of the parity class containing ``s`` (either orbit member)."""
        return self._index.get(s)

    def __contains__(self, s: FockState) -> bool:
        return s in self._index


def qubits_for(dim: int) -> int:
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    return (dim - 1).bit_length()


def mode_limit(e_max: float, params: ModelParams) -> int:
    """Largest |n| with omega_n <= e_max (-1 when even the zero mode is too heavy)."""
    if e_max < params.M:
        return -1
    n = int(math.floor(params.L / (2 * math.pi) * math.sqrt(max(e_max**2 - params.M**2, 0.0))))
    while n >= 0 and omega(n, params) > e_max:
        n -= 1
    while omega(n + 1, params) <= e_max:
        n += 1
    return n


def _one_sided(n_max: int, e_max: float, params: ModelParams) -> list[tuple[int, float, tuple]]:
    """All multisets over modes 1..n_max with energy <= e_max: (momentum, energy, occ)."""
    out = []
    w = [omega(n, params) for n in range(n_max + 1)]

    def rec(n, e, p, occ):
        if n > n_max:
            out.append((p, e, tuple(occ)))
            return
        r = 0
        while e + r * w[n] <= e_max * (1 + 1e-12):
            if r:
                occ.append((n, r))
            rec(n + 1, e + r * w[n], p + r * n, occ)
            if r:
                occ.pop()
            r += 1
            if w[n] * r > e_max * (1 + 1e-12) - e:
                break

    rec(1, 0.0, 0, [])
    return out


def _enumerate_energy(params: ModelParams, e_max: float, even_only: bool) -> list[ParityClass]:
    n_max = mode_limit(e_max, params)
    if n_max < 0:
        return [ParityClass(VACUUM, 0.0, 0)]
    sided = _one_sided(n_max, e_max, params)
    by_p: dict[int, list] = {}
    for p, e, occ in sided:
        by_p.setdefault(p, []).append((e, occ))
    for lst in by_p.values():
        lst.sort()
    M = params.M
    found = {}
    for p, lst in by_p.items():
        for ea, a in lst:
            for eb, b in lst:
                if ea + eb > e_max * (1 + 1e-12):
                    break
                neg = tuple((-n, r) for n, r in reversed(b))
                r0 = 0
                while ea + eb + r0 * M <= e_max * (1 + 1e-12):
                    s = neg + (((0, r0),) if r0 else ()) + a
                    r0 += 1
                    if even_only and particle_number(s) % 2:
                        continue
                    c = canonical(s)
                    if c in found:
                        continue
                    e = state_energy(c, params)
                    if e <= e_max:
                        found[c] = ParityClass(c, e, particle_number(c))
    return sorted(found.values(), key=lambda c: (c.energy, c.particle_number, c.representative))


def enumerate_basis(params: ModelParams, spec: TruncationSpec, even_only: bool = False) -> TruncatedBasis:
    """Zero-momentum, parity-even Fock basis sorted by free energy.

    In qubit mode the lowest ``2**n_q`` states are kept; the search ceiling
    grows geometrically until enough states are found.
    """
    if spec.mode == "energy":
        states = _enumerate_energy(params, spec.value, even_only)
        return TruncatedBasis(params, spec, states, even_only)

    target = 2 ** int(spec.value)
    e_max = 2.0 * params.M
    ceiling = 1e4 * params.M
    while True:
        states = _enumerate_energy(params, e_max, even_only)
        if len(states) > target or (len(states) == target and e_max >= ceiling):
            break
        if e_max >= ceiling:
            raise CutoffTooSmall(f"sector has only {len(states)} states below {e_max:g}, need {target}")
        e_max = min(e_max * 2 ** 0.25, ceiling)
    if len(states) > target and math.isclose(states[target - 1].energy, states[target].energy, rel_tol=1e-12, abs_tol=1e-12):
        warnings.warn(
            f"state {target - 1} and the first dropped state share energy {states[target].energy:.12g}",
            DegenerateBoundary,
            stacklevel=2,
        )
    return TruncatedBasis(params, spec, states[:target], even_only)


def pair_state(m: int) -> FockState:
    """The two-particle state |m, -m>; m = 0 gives two particles at rest."""
    m = abs(m)
    return ((0, 2),) if m == 0 else ((-m, 1), (m, 1))
