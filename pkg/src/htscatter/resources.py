"""Qubit-count comparisons between Hamiltonian truncation and a field-on-lattice encoding."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .basis import ModelParams, TruncationSpec, enumerate_basis, mode_limit, qubits_for

ENUMERATION_LIMIT = 4096


class NoBracket(ValueError):
    pass


class InsufficientPoints(ValueError):
    pass


# --- HT state counting --------------------------------------------------------


@dataclass
class StateCount:
    lower: int
    upper: int
    bin_width: float

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def qubits(self) -> int | None:
        """Qubit count when both bounds agree on it, else None."""
        lo, hi = qubits_for(max(self.lower, 1)), qubits_for(max(self.upper, 1))
        return lo if lo == hi else None


def _count_with_weights(weights, zero_weight, n_max, budget, p_max, even_only):
    # f[par, p, e]: multisets over positive modes with momentum p, energy bin e, particle parity par
    f = np.zeros((2, p_max + 1, budget + 1))
    f[0, 0, 0] = 1.0
    for n in range(1, n_max + 1):
        w = weights[n]
        if w > budget:
            continue
        for p in range(n, p_max + 1):
            f[0, p, w:] += f[1, p - n, : budget + 1 - w]
            f[1, p, w:] += f[0, p - n, : budget + 1 - w]
    z = np.zeros((2, budget + 1))
    for r in range(budget // zero_weight + 1):
        z[r % 2, r * zero_weight] = 1.0

    def trunc_conv(a, b):
        return fftconvolve(a, b)[: budget + 1]

    total = np.zeros((2, budget + 1))
    for p in range(p_max + 1):
        fa = f[:, p, :]
        if not fa.any():
            continue
        for pa in (0, 1):
            for pb in (0, 1):
                total[(pa + pb) % 2] += trunc_conv(fa[pa], fa[pb])
    full = np.zeros((2, budget + 1))
    for pa in (0, 1):
        for pz in (0, 1):
            full[(pa + pz) % 2] += trunc_conv(total[pa], z[pz])
    # parity-symmetric states: negative side mirrors the positive side, even particle count there
    mirror = np.zeros(budget + 1)
    fsum = f.sum(axis=(0, 1))
    mirror[0 : budget + 1 : 2] = fsum[: budget // 2 + 1]
    sym = np.zeros((2, budget + 1))
    for pz in (0, 1):
        sym[pz] += trunc_conv(mirror, z[pz])
    pick = [0] if even_only else [0, 1]
    n_total = sum(np.rint(full[k]).sum() for k in pick)
    n_sym = sum(np.rint(sym[k]).sum() for k in pick)
    return int(round((n_total + n_sym) / 2))


def count_states(params: ModelParams, e_max: float, even_only: bool = False, bins: int = 4000) -> StateCount:
    """Bounds on the zero-momentum parity-even sector size below ``e_max``.

    Mode energies are rounded down (upper bound) and up (lower bound) onto
    a grid of ``bins`` cells, so the true count is always bracketed.
    """
    if e_max < params.M:
        return StateCount(1, 1, 0.0)
    h = e_max / bins
    n_max = mode_limit(e_max, params)
    p_max = int(math.floor(e_max * params.L / (2 * math.pi)))
    from .basis import omega

    w = [omega(n, params) for n in range(n_max + 1)]
    lo_w = [int(math.ceil(x / h)) for x in w]
    hi_w = [max(1, int(math.floor(x / h))) for x in w]
    budget = bins
    upper = _count_with_weights(hi_w, hi_w[0], n_max, budget, p_max, even_only)
    lower = _count_with_weights(lo_w, lo_w[0], n_max, budget, p_max, even_only)
    return StateCount(lower, upper, h)


def ht_dimension(params: ModelParams, e_max: float, even_only: bool = False) -> StateCount:
    """Sector size, enumerated exactly when small and bracketed by counting otherwise."""
    c = count_states(params, e_max, even_only, bins=2000)
    if c.upper <= ENUMERATION_LIMIT:
        n = len(enumerate_basis(params, TruncationSpec.energy(e_max), even_only))
        return StateCount(n, n, 0.0)
    bins = 2000
    while c.qubits is None and bins < 64000:
        bins *= 2
        c = count_states(params, e_max, even_only, bins=bins)
    return c


def ht_qubits_vs_emax(params: ModelParams, e_max: float, even_only: bool = False) -> int:
    if e_max <= 0:
        raise ValueError("e_max must be positive")
    c = ht_dimension(params, e_max, even_only)
    q = c.qubits
    return q if q is not None else qubits_for(c.upper)


def lattice_qubits_vs_emax(n_q_per_site: int, ML: float, e_over_m: float) -> int:
    """n_q (ML)(E_max/M), with the lattice spacing matched as a = 1/E_max."""
    if n_q_per_site <= 0 or ML <= 0 or e_over_m <= 0:
        raise ValueError("inputs must be positive")
    return int(round(n_q_per_site * ML * e_over_m))


# --- closed-form error estimates ---------------------------------------------


def ht_truncation_error(g: float, m: float, e_max: float) -> float:
    return (24.0 * g) ** 2 / (4.0 * math.pi * e_max**2 * m**2)


def emax_for_error(epsilon: float, g: float, m: float) -> float:
    """Inverse of :func:`ht_truncation_error` in ``e_max``."""
    return 24.0 * g / (m * math.sqrt(4.0 * math.pi * epsilon))


def interparticle_potential(r: float, g: float, m: float) -> float:
    return -18.0 * g**2 / m**3 / math.sqrt(math.pi * m * r) * math.exp(-2.0 * m * r)


def potential_derivative(r: float, g: float, m: float) -> float:
    return -interparticle_potential(r, g, m) * (0.5 / r + 2.0 * m)


def force_ratio(r0: float, m: float) -> float:
    """dV/dr at r0 relative to its value at r = 1/m (coupling cancels)."""
    return potential_derivative(r0, 1.0, m) / potential_derivative(1.0 / m, 1.0, m)


@dataclass
class VolumeResult:
    L: float
    r0: float
    bracketed: bool = True


def min_volume_for_epsilon(epsilon: float, g: float, m: float, rtol: float = 1e-12) -> VolumeResult:
    """Smallest volume L = 6 r0 with force ratio at r0 no larger than ``epsilon``."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    lo = 1.0 / m
    if force_ratio(lo, m) <= epsilon:
        return VolumeResult(6.0 * lo, lo, bracketed=False)
    hi = 2.0 * lo
    while force_ratio(hi, m) > epsilon:
        lo, hi = hi, 2.0 * hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if force_ratio(mid, m) > epsilon:
            lo = mid
        else:
            hi = mid
    r0 = 0.5 * (lo + hi)
    return VolumeResult(6.0 * r0, r0)


def lattice_spacing_for_epsilon(epsilon: float, m: float) -> float:
    """a from the discretisation error estimate epsilon = 4 (m a)^2."""
    return math.sqrt(epsilon / 4.0) / m


def lattice_qubits_per_site(epsilon: float, sqrt_s: float, L: float, a: float, m: float) -> int:
    arg = 1.0 + 4.0 * sqrt_s / (m * math.pi) * (1.0 + math.sqrt(L / (a * epsilon))) ** 2
    return int(math.ceil(math.log2(arg)))


@dataclass
class PrecisionRow:
    epsilon: float
    a: float
    L: float
    r0: float
    sites: int
    qubits_per_site: int
    lattice_qubits: int
    e_max: float
    ht_dim_lower: int
    ht_dim_upper: int
    ht_qubits: int


def precision_comparison(
    epsilons,
    g: float = 1.0,
    m: float = 1.0,
    sqrt_s: float = 5.0,
    even_only: bool = False,
) -> list[PrecisionRow]:
    """Qubits needed for 2->4 scattering at each precision target.

    The volume from the force criterion is shared by both methods; the HT
    cutoff comes from the truncation error estimate.
    """
    eps = list(epsilons)
    if not eps:
        raise ValueError("empty epsilon grid")
    rows = []
    for e in eps:
        if not 0 < e < 1:
            raise ValueError(f"epsilon {e} outside (0, 1)")
        vol = min_volume_for_epsilon(e, g, m)
        a = lattice_spacing_for_epsilon(e, m)
        sites = int(math.ceil(vol.L / a))
        nq = lattice_qubits_per_site(e, sqrt_s, vol.L, a, m)
        e_max = emax_for_error(e, g, m)
        c = ht_dimension(ModelParams(M=m, L=vol.L, g=g), e_max, even_only)
        q = c.qubits if c.qubits is not None else qubits_for(c.upper)
        rows.append(PrecisionRow(e, a, vol.L, vol.r0, sites, nq, nq * sites, e_max, c.lower, c.upper, q))
    return rows


# --- sparsity -----------------------------------------------------------------


@dataclass
class SparsityPoint:
    n_qubits: int
    dim: int
    d: int
    nnz: int


@dataclass
class SparsityFit:
    slope: float
    intercept: float
    residuals: np.ndarray
    points: list


def sparsity_scan(params: ModelParams, qubit_range, even_only: bool = False) -> list[SparsityPoint]:
    from .hamiltonian import assemble, sparsity

    out = []
    for nq in qubit_range:
        basis = enumerate_basis(params, TruncationSpec.qubits(nq), even_only)
        rep = sparsity(assemble(basis).h)
        out.append(SparsityPoint(rep.n_qubits, len(basis), rep.d, rep.total_nonzeros))
    return out


def fit_sparsity(n_qubits, d, skip: int = 5) -> SparsityFit:
    """Least-squares line through (ln N_q, ln d), dropping the ``skip`` smallest N_q."""
    pts = sorted(zip(n_qubits, d))
    if len(pts) < skip + 2:
        raise InsufficientPoints(f"need at least {skip + 2} points, got {len(pts)}")
    use = pts[skip:]
    x = np.log([p[0] for p in use])
    y = np.log([p[1] for p in use])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    return SparsityFit(float(slope), float(intercept), y - (slope * x + intercept), use)
