"""Exact and product-formula time evolution, and adiabatic coupling ramps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import expm_multiply

from .hamiltonian import HamiltonianParts, HermitianOperator

EXACT_MAX_DIM = 2**14
EIGH_MAX_DIM = 2**12


class DimensionMismatch(ValueError):
    pass


class DimensionTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class RampSchedule:
    """Linear turn-on of the coupling over ``steps + 1`` factors of length tau/steps.

    Step ``a`` of the printed product carries coupling ``1 - a/steps``; the
    factor with zero coupling acts first, so the state sees the coupling
    grow from 0 to 1.
    """

    tau: float
    steps: int

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("ramp time must be >= 0")
        if self.steps < 1:
            raise ValueError("ramp needs at least one step")

    @property
    def delta_tau(self) -> float:
        return self.tau / self.steps

    @property
    def duration(self) -> float:
        """Time spent ramping: ``steps + 1`` factors of ``delta_tau``."""
        return (self.steps + 1) * self.delta_tau

    def coupling(self, a: int) -> float:
        return 1.0 - a / self.steps

    def couplings_in_time_order(self) -> list[float]:
        return [self.coupling(a) for a in range(self.steps, -1, -1)]


def _check(dim: int, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (dim,):
        raise DimensionMismatch(f"state has shape {psi.shape}, operator has dim {dim}")
    return psi


def exact_evolve(h: HermitianOperator, psi: np.ndarray, t: float, max_dim: int = EXACT_MAX_DIM) -> np.ndarray:
    """exp(-i H t) psi from the (cached) eigendecomposition of ``h``."""
    psi = _check(h.dim, psi)
    if h.dim > max_dim:
        raise DimensionTooLarge(f"dim {h.dim} exceeds dense ceiling {max_dim}")
    if t == 0:
        return psi.copy()
    w, u = h.eigh()
    return u @ (np.exp(-1j * w * t) * (u.T @ psi))


def _phase_evolve(h: HermitianOperator, psi: np.ndarray, t: float) -> np.ndarray:
    if h.dim <= EIGH_MAX_DIM:
        return exact_evolve(h, psi, t)
    return expm_multiply(-1j * t * h.matrix.tocsc(), psi, traceA=0.0)


class TrotterStepper:
    """First-order split exp(-i H0 dt) exp(-i s V dt) with V diagonalised once."""

    def __init__(self, parts: HamiltonianParts, dt: float, scale: float = 1.0):
        if dt == 0:
            raise ValueError("dt must be nonzero")
        self.parts = parts
        self.dt = dt
        self.scale = scale
        w, u = parts.v.eigh()
        self._u = u
        self._v_phase = np.exp(-1j * scale * w * dt)
        self._h0_phase = np.exp(-1j * parts.h0 * dt)

    def step(self, psi: np.ndarray) -> np.ndarray:
        return self._h0_phase * (self._u @ (self._v_phase * (self._u.T @ psi)))

    def step_inverse(self, psi: np.ndarray) -> np.ndarray:
        return self._u @ (np.conj(self._v_phase) * (self._u.T @ (np.conj(self._h0_phase) * psi)))


def n_steps(t: float, dt: float) -> int:
    return int(round(abs(t) / abs(dt)))


def trotter_evolve(
    parts: HamiltonianParts,
    psi: np.ndarray,
    t: float,
    dt: float,
    scale: float = 1.0,
    path: str = "eigen",
) -> np.ndarray:
    """Apply round(t/dt) first-order product steps.

    ``path='eigen'`` uses the exact V exponential; ``path='pauli'`` mirrors
    the circuit by multiplying exponentials of the Pauli terms of H.
    """
    psi = _check(parts.dim, psi)
    n = n_steps(t, dt)
    if path == "pauli":
        from .circuits import PauliStepper

        stepper = PauliStepper.from_parts(parts, dt, scale=scale)
        return stepper.evolve(psi, n)
    if path != "eigen":
        raise ValueError(f"unknown Trotter path {path!r}")
    stepper = TrotterStepper(parts, dt, scale)
    for _ in range(n):
        psi = stepper.step(psi)
    return psi


def _ramp_factors(ramp: RampSchedule):
    """(lambda, duration) pairs in time order, then the backward full-H translation.

    The translation runs for the whole ramp duration so that at zero
    coupling the sequence is exactly the identity.
    """
    return [(lam, ramp.delta_tau) for lam in ramp.couplings_in_time_order()] + [(1.0, -ramp.duration)]


class _RampEngine:
    def __init__(self, parts: HamiltonianParts, method: str, dt: float | None):
        if method not in ("exact", "trotter"):
            raise ValueError(f"unknown ramp method {method!r}")
        if method == "trotter" and not dt:
            raise ValueError("trotter ramp needs dt")
        self.parts = parts
        self.method = method
        self.dt = dt
        self._ops: dict[float, HermitianOperator] = {}
        if method == "trotter":
            self._w, self._u = parts.v.eigh()

    def _op(self, lam: float) -> HermitianOperator:
        if lam not in self._ops:
            self._ops[lam] = self.parts.h if lam == 1.0 else self.parts.ramp(lam)
        return self._ops[lam]

    def apply(self, psi: np.ndarray, lam: float, duration: float, inverse: bool = False) -> np.ndarray:
        """exp(-i (H0 + lam V) duration) psi, or its inverse."""
        if self.method == "exact":
            return _phase_evolve(self._op(lam), psi, duration if not inverse else -duration)
        n = n_steps(duration, self.dt)
        if n == 0:
            return psi
        step = duration / n
        h0_phase = np.exp(-1j * self.parts.h0 * step)
        v_phase = np.exp(-1j * lam * self._w * step)
        u = self._u
        for _ in range(n):
            if inverse:
                psi = u @ (np.conj(v_phase) * (u.T @ (np.conj(h0_phase) * psi)))
            else:
                psi = h0_phase * (u @ (v_phase * (u.T @ psi)))
        return psi


def adiabatic_prepare(
    parts: HamiltonianParts,
    psi_free: np.ndarray,
    ramp: RampSchedule,
    method: str = "exact",
    dt: float | None = None,
) -> np.ndarray:
    """Ramp the coupling from 0 to full, then evolve back by tau under the full H.

    With ``method='trotter'`` each factor is split into product steps of
    size ``dt``; otherwise each factor is exponentiated exactly.
    """
    psi = _check(parts.dim, psi_free)
    engine = _RampEngine(parts, method, dt)
    for lam, duration in _ramp_factors(ramp):
        psi = engine.apply(psi, lam, duration)
    return psi


def ramp_down(
    parts: HamiltonianParts,
    psi: np.ndarray,
    ramp: RampSchedule,
    method: str = "exact",
    dt: float | None = None,
) -> np.ndarray:
    """Exact inverse of :func:`adiabatic_prepare` with the same settings."""
    psi = _check(parts.dim, psi)
    engine = _RampEngine(parts, method, dt)
    for lam, duration in reversed(_ramp_factors(ramp)):
        psi = engine.apply(psi, lam, duration, inverse=True)
    return psi


def expectation(op: HermitianOperator, psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, op @ psi)))
