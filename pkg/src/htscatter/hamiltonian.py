"""Truncated phi^4 Hamiltonian: diagonal free part plus normal-ordered quartic interaction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
import scipy.sparse as sp

from .basis import (
    FockState,
    ModelParams,
    TruncatedBasis,
    omega,
    parity_image,
    state_energy,
)


class SymmetryViolation(RuntimeError):
    pass


class HermitianOperator:
    """Real symmetric sparse matrix over a truncated basis.

    The eigendecomposition is computed lazily and cached.
    """

    def __init__(self, matrix, check: bool = True):
        m = sp.csr_matrix(matrix, dtype=float)
        m.sum_duplicates()
        m.sort_indices()
        m.eliminate_zeros()
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got {m.shape}")
        self.matrix = m
        self.symmetric = False
        if check:
            self.verify_symmetry()
        self._eig = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def verify_symmetry(self) -> None:
        diff = self.matrix - self.matrix.T
        if diff.count_nonzero():
            raise SymmetryViolation(f"{diff.count_nonzero()} asymmetric entries")
        self.symmetric = True

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eig is None:
            self._eig = np.linalg.eigh(self.toarray())
        return self._eig

    def __matmul__(self, x):
        return self.matrix @ x

    def scaled(self, factor: float) -> "HermitianOperator":
        out = HermitianOperator(self.matrix * factor, check=False)
        out.symmetric = self.symmetric
        if self._eig is not None and factor != 0:
            w, u = self._eig
            out._eig = (w * factor, u) if factor > 0 else (w[::-1] * factor, u[:, ::-1])
        return out

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.matrix + other.matrix)

    def permuted(self, perm) -> "HermitianOperator":
        """Operator in a relabelled basis where new index ``i`` is old index ``perm[i]``."""
        m = self.matrix[perm][:, perm]
        return HermitianOperator(m)


@dataclass
class SparsityReport:
    n_qubits: int
    d: int
    total_nonzeros: int


def sparsity(op: HermitianOperator) -> SparsityReport:
    m = op.matrix.copy()
    m.eliminate_zeros()
    per_row = np.diff(m.indptr)
    d = int(per_row.max()) if op.dim else 0
    return SparsityReport(n_qubits=(op.dim - 1).bit_length(), d=d, total_nonzeros=int(m.nnz))


# --- interaction ------------------------------------------------------------


@lru_cache(maxsize=32)
def _creation_table(params: ModelParams, window: int, size: int):
    """Multisets of ``size`` modes in [-window, window], grouped by total momentum.

    Each entry is ``(energy, weight, counts)`` where weight carries
    prod (L w)^-1/2 / prod(multiplicity!). Entries are sorted by energy.
    """
    modes = range(-window, window + 1)
    table: dict[int, list] = {}
    for combo in combinations_with_replacement(modes, size):
        counts: dict[int, int] = {}
        for n in combo:
            counts[n] = counts.get(n, 0) + 1
        w = 1.0
        e = 0.0
        for n, c in counts.items():
            w *= (params.L * omega(n, params)) ** (-0.5 * c) / math.factorial(c)
            e += c * omega(n, params)
        table.setdefault(sum(combo), []).append((e, w, tuple(sorted(counts.items()))))
    for lst in table.values():
        lst.sort(key=lambda x: x[0])
    return table


def _annihilation_sets(occ: dict, size: int):
    """Multisets of ``size`` occupied modes respecting occupations, with ladder factors."""
    modes = sorted(occ)
    out = []

    def rec(i, left, chosen):
        if left == 0:
            out.append(dict(chosen))
            return
        if i == len(modes):
            return
        n = modes[i]
        for a in range(min(left, occ[n]), -1, -1):
            if a:
                chosen.append((n, a))
            rec(i + 1, left - a, chosen)
            if a:
                chosen.pop()

    rec(0, size, [])
    return out


def apply_monomial_sum(
    s: FockState,
    params: ModelParams,
    window: int | None = None,
    e_cap: float = math.inf,
    g: float | None = None,
) -> dict[FockState, float]:
    """Image ``V|s>`` expanded over Fock states.

    Created modes are restricted to ``|n| <= window`` (default: modes already
    needed by ``s`` plus enough for four fresh quanta) and image states
    above ``e_cap`` are dropped.
    """
    g = params.g if g is None else g
    occ = dict(s)
    if window is None:
        window = max([abs(n) for n in occ] + [0])
    e_s = state_energy(s, params)
    pref = g * params.L / 4.0 * 24.0
    out: dict[FockState, float] = {}
    tol = 1e-12 * max(1.0, abs(e_cap)) if math.isfinite(e_cap) else 0.0
    for c in range(5):
        table = _creation_table(params, window, c) if c else {0: [(0.0, 1.0, ())]}
        for ann in _annihilation_sets(occ, 4 - c):
            w_a = 1.0
            lad = 1.0
            e_a = 0.0
            mid = dict(occ)
            p_a = 0
            for n, a in ann.items():
                w_a *= (params.L * omega(n, params)) ** (-0.5 * a) / math.factorial(a)
                lad *= math.sqrt(math.factorial(occ[n]) / math.factorial(occ[n] - a))
                e_a += a * omega(n, params)
                p_a += n * a
                mid[n] -= a
                if not mid[n]:
                    del mid[n]
            budget = e_cap - (e_s - e_a) + tol
            for e_c, w_c, counts in table.get(p_a, ()):
                if e_c > budget:
                    break
                img = dict(mid)
                lad_c = 1.0
                for n, k in counts:
                    r = img.get(n, 0)
                    lad_c *= math.sqrt(math.factorial(r + k) / math.factorial(r))
                    img[n] = r + k
                t = tuple(sorted(img.items()))
                out[t] = out.get(t, 0.0) + pref * w_a * w_c * lad * lad_c
    return out


def matrix_element_v(i, j, params: ModelParams, window: int | None = None) -> float:
    """<i|V|j> between parity-even classes ``i`` and ``j``."""
    rep_i, rep_j = i.representative, j.representative
    if window is None:
        window = max([abs(n) for n, _ in rep_i + rep_j] + [0])
    img = apply_monomial_sum(rep_j, params, window)
    mult = 2.0 if i.self_conjugate else 1.0
    targets = {rep_i, parity_image(rep_i)}
    acc = sum(a for t, a in img.items() if t in targets)
    return 2.0 * i.beta * j.beta * mult * acc


@dataclass
class HamiltonianParts:
    """``H = diag(h0) + g * v_unit`` over ``basis``."""

    basis: TruncatedBasis
    h0: np.ndarray
    v_unit: HermitianOperator
    g: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return len(self.h0)

    @property
    def v(self) -> HermitianOperator:
        if "v" not in self._cache:
            self._cache["v"] = self.v_unit.scaled(self.g)
        return self._cache["v"]

    @property
    def h0_op(self) -> HermitianOperator:
        if "h0" not in self._cache:
            self._cache["h0"] = HermitianOperator(sp.diags(self.h0), check=False)
        return self._cache["h0"]

    @property
    def h(self) -> HermitianOperator:
        if "h" not in self._cache:
            self._cache["h"] = HermitianOperator(sp.diags(self.h0) + self.v.matrix)
        return self._cache["h"]

    def at_coupling(self, g: float) -> "HamiltonianParts":
        return HamiltonianParts(self.basis, self.h0, self.v_unit, g)

    def ramp(self, lam: float) -> HermitianOperator:
        return HermitianOperator(sp.diags(self.h0) + self.v.matrix * lam)


def assemble_v_unit(basis: TruncatedBasis) -> HermitianOperator:
    """Interaction at unit coupling restricted to ``basis``.

    Each unordered pair is computed once (from the higher-energy column) and
    mirrored, so the stored matrix is exactly symmetric.
    """
    params = basis.params
    window = basis.mode_window
    rows, cols, vals = [], [], []
    for j, cj in enumerate(basis.states):
        img = apply_monomial_sum(cj.representative, params, window, e_cap=cj.energy, g=1.0)
        acc: dict[int, float] = {}
        for t, a in img.items():
            i = basis.index_of(t)
            if i is None or i > j:
                continue
            acc[i] = acc.get(i, 0.0) + a
        for i, a in acc.items():
            ci = basis.states[i]
            val = 2.0 * ci.beta * cj.beta * (2.0 if ci.self_conjugate else 1.0) * a
            if val == 0.0:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(val)
            if i != j:
                rows.append(j)
                cols.append(i)
                vals.append(val)
    n = len(basis)
    m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return HermitianOperator(m)


def assemble(basis: TruncatedBasis, g: float | None = None) -> HamiltonianParts:
    if len(basis) == 0:
        raise ValueError("empty basis")
    g = basis.params.g if g is None else g
    return HamiltonianParts(basis, basis.energies.copy(), assemble_v_unit(basis), g)


# --- coordinate text format ---------------------------------------------------


def write_coo(op: HermitianOperator, path) -> None:
    m = op.matrix.tocoo()
    order = np.lexsort((m.col, m.row))
    with open(path, "w") as f:
        f.write(f"{op.dim} {m.nnz}\n")
        for k in order:
            f.write(f"{m.row[k]} {m.col[k]} {m.data[k]:.17g}\n")


def read_coo(path) -> HermitianOperator:
    with open(path) as f:
        dim, nnz = (int(x) for x in f.readline().split())
        rows, cols, vals = [], [], []
        for line in f:
            if not line.strip():
                continue
            i, j, v = line.split()
            rows.append(int(i))
            cols.append(int(j))
            vals.append(float(v))
    if len(vals) != nnz:
        raise ValueError(f"header promises {nnz} entries, found {len(vals)}")
    return HermitianOperator(sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)))
