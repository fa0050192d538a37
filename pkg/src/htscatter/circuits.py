"""Circuit form of the truncated problem.

Qubit ``q`` carries bit ``q`` of the basis index (little-endian), and a
Pauli string's character ``q`` acts on qubit ``q``. Gates: H, X, RX, RY,
RZ, CNOT with RZ(t) = exp(-i t Z / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .hamiltonian import HamiltonianParts, HermitianOperator

INTERPRETER_MAX_QUBITS = 14
ROTATIONS = ("RX", "RY", "RZ")
TWO_QUBIT = ("CNOT",)


class DimensionNotPadded(ValueError):
    pass


class QubitOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    string: str

    @property
    def support(self) -> list[int]:
        return [q for q, c in enumerate(self.string) if c != "I"]

    def is_identity(self) -> bool:
        return not self.support


# --- Pauli decomposition ----------------------------------------------------------

_TO_PAULI = np.array(
    [
        [0.5, 0, 0, 0.5],  # I
        [0, 0.5, 0.5, 0],  # X
        [0, 0.5j, -0.5j, 0],  # Y
        [0.5, 0, 0, -0.5],  # Z
    ]
)
_LETTERS = "IXYZ"


def pad_operator(h: np.ndarray, penalty: float | None = None) -> np.ndarray:
    """Embed ``h`` in the next power-of-two dimension with a decoupled diagonal block."""
    dim = h.shape[0]
    n = max(1, (dim - 1).bit_length())
    if dim == 2**n:
        return np.asarray(h)
    if penalty is None:
        penalty = float(np.max(np.abs(h))) * 2.0 + 1.0
    out = np.zeros((2**n, 2**n), dtype=h.dtype)
    out[:dim, :dim] = h
    out[dim:, dim:] = np.eye(2**n - dim) * penalty
    return out


def pauli_coefficients(h: np.ndarray) -> np.ndarray:
    """Array ``c`` of shape (4,)*n with c[P_{n-1}, ..., P_0] = tr(P h) / 2**n.

    Cost O(n 4**n): one 4x4 transform per qubit on the interleaved tensor.
    """
    dim = h.shape[0]
    n = (dim - 1).bit_length()
    if dim != 2**n or n == 0 and dim != 1:
        raise DimensionNotPadded(f"dimension {dim} is not a power of two")
    if n == 0:
        return np.asarray(h, dtype=complex).reshape(())
    t = np.asarray(h, dtype=complex).reshape((2,) * (2 * n))
    order = [ax for k in range(n) for ax in (k, n + k)]
    t = t.transpose(order).reshape((4,) * n)
    for k in range(n):
        t = np.moveaxis(np.tensordot(_TO_PAULI, t, axes=([1], [k])), 0, k)
    return t


def pauli_decompose(h, drop_threshold: float = 0.0) -> list[PauliTerm]:
    """Real Pauli expansion of a real symmetric operator of power-of-two dimension."""
    if isinstance(h, HermitianOperator):
        h = h.toarray()
    h = np.asarray(h)
    c = pauli_coefficients(h)
    n = c.ndim
    if np.max(np.abs(c.imag), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(c.real), initial=0.0)):
        raise ValueError("operator is not real symmetric")
    cr = c.real
    terms = []
    for idx in zip(*np.nonzero(np.abs(cr) > drop_threshold)) if n else [()]:
        val = float(cr[idx])
        if val == 0.0:
            continue
        # axis k of c is qubit n-1-k
        s = "".join(_LETTERS[idx[n - 1 - q]] for q in range(n))
        terms.append(PauliTerm(val, s))
    return terms


def dropped_weight(h, drop_threshold: float) -> float:
    """Sum of |c_P| removed by a nonzero threshold (bounds the operator-norm error)."""
    c = pauli_coefficients(np.asarray(h.toarray() if isinstance(h, HermitianOperator) else h)).real
    small = np.abs(c) <= drop_threshold
    return float(np.abs(c[small]).sum())


_MATS = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(string: str) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for ch in reversed(string):
        out = np.kron(out, _MATS[ch])
    return out


def reconstruct(terms: list[PauliTerm], n_qubits: int) -> np.ndarray:
    out = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
    for t in terms:
        out += t.coefficient * pauli_matrix(t.string)
    return out


def apply_pauli(string: str, psi: np.ndarray) -> np.ndarray:
    idx = np.arange(len(psi))
    x_mask = z_mask = 0
    n_y = 0
    for q, ch in enumerate(string):
        if ch in "XY":
            x_mask |= 1 << q
        if ch in "YZ":
            z_mask |= 1 << q
        n_y += ch == "Y"
    sign = _parity_sign(idx & z_mask)
    out = np.empty_like(psi)
    out[idx ^ x_mask] = (1j**n_y) * sign * psi
    return out


def _parity_sign(v: np.ndarray) -> np.ndarray:
    """(-1)**popcount(v), elementwise."""
    v = np.asarray(v, dtype=np.int64)
    par = np.zeros_like(v)
    while v.any():
        par ^= v & 1
        v = v >> 1
    return 1 - 2 * par


def apply_pauli_exponential(term: PauliTerm, dt: float, psi: np.ndarray) -> np.ndarray:
    """exp(-i c P dt) psi, using P^2 = 1."""
    theta = term.coefficient * dt
    if term.is_identity():
        return np.exp(-1j * theta) * psi
    return math.cos(theta) * psi - 1j * math.sin(theta) * apply_pauli(term.string, psi)


class PauliStepper:
    """Product of Pauli-term exponentials, in the same order the circuit emits them."""

    def __init__(self, terms: list[PauliTerm], dt: float, dim: int):
        self.terms = terms
        self.dt = dt
        self.dim = dim
        self.n_qubits = len(terms[0].string) if terms else max(1, (dim - 1).bit_length())

    @classmethod
    def from_parts(cls, parts: HamiltonianParts, dt: float, scale: float = 1.0, penalty: float | None = None):
        h = np.diag(parts.h0) + scale * parts.v.toarray()
        return cls(pauli_decompose(pad_operator(h, penalty)), dt, parts.dim)

    def step(self, psi_padded: np.ndarray) -> np.ndarray:
        for t in self.terms:
            psi_padded = apply_pauli_exponential(t, self.dt, psi_padded)
        return psi_padded

    def evolve(self, psi: np.ndarray, n: int) -> np.ndarray:
        full = np.zeros(2**self.n_qubits, dtype=complex)
        full[: len(psi)] = psi
        for _ in range(n):
            full = self.step(full)
        return full[: self.dim] if self.dim < len(full) else full


# --- circuits -----------------------------------------------------------------


class Gate(NamedTuple):
    kind: str
    qubits: tuple
    angle: float | None = None


@dataclass
class CircuitIR:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)
    global_phase: float = 0.0

    def add(self, kind: str, *qubits: int, angle: float | None = None) -> None:
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise QubitOutOfRange(f"qubit {q} outside register of {self.num_qubits}")
        if kind in ROTATIONS and (angle is None or not math.isfinite(angle)):
            raise ValueError(f"{kind} needs a finite angle")
        self.gates.append(Gate(kind, tuple(qubits), angle))

    def extend(self, other: "CircuitIR") -> "CircuitIR":
        if other.num_qubits > self.num_qubits:
            raise QubitOutOfRange("appended circuit is wider than the register")
        self.gates.extend(other.gates)
        self.global_phase += other.global_phase
        return self

    def __len__(self) -> int:
        return len(self.gates)


def emit_trotter_step(terms: list[PauliTerm], dt: float, num_qubits: int | None = None) -> CircuitIR:
    """One product step prod_P exp(-i c_P P dt) as CNOT-ladder gadgets."""
    if not terms:
        raise ValueError("no terms to emit")
    n = num_qubits or len(terms[0].string)
    c = CircuitIR(n)
    for t in terms:
        qs = t.support
        if not qs:
            c.global_phase -= t.coefficient * dt
            continue
        for q in qs:
            if t.string[q] == "X":
                c.add("H", q)
            elif t.string[q] == "Y":
                c.add("RX", q, angle=math.pi / 2)
        for a, b in zip(qs, qs[1:]):
            c.add("CNOT", a, b)
        c.add("RZ", qs[-1], angle=2.0 * t.coefficient * dt)
        for a, b in reversed(list(zip(qs, qs[1:]))):
            c.add("CNOT", a, b)
        for q in qs:
            if t.string[q] == "X":
                c.add("H", q)
            elif t.string[q] == "Y":
                c.add("RX", q, angle=-math.pi / 2)
    return c


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def _uniformly_controlled(c: CircuitIR, kind: str, target: int, controls: list[int], angles, tol: float = 1e-14):
    """Rotation on ``target`` by angles[j] when the controls read pattern j (bit l = controls[l])."""
    angles = np.asarray(angles, dtype=float)
    if np.all(np.abs(angles) < tol):
        return
    m = len(controls)
    if m == 0:
        c.add(kind, target, angle=float(angles[0]))
        return
    size = 2**m
    b = np.arange(size)[:, None]
    g = np.array([_gray(i) for i in range(size)])[None, :]
    sign = _parity_sign(b & g)
    phis = sign.T @ angles / size
    for i in range(size):
        if abs(phis[i]) >= tol:
            c.add(kind, target, angle=float(phis[i]))
        flip = _gray(i) ^ _gray((i + 1) % size)
        c.add("CNOT", controls[flip.bit_length() - 1], target)


def prep_circuit(amplitudes, num_qubits: int | None = None) -> CircuitIR:
    """Uniformly-controlled-rotation circuit taking |0...0> to ``amplitudes``.

    The state is reproduced exactly, including its global phase.
    """
    psi = np.asarray(amplitudes, dtype=complex)
    dim = len(psi)
    k = (dim - 1).bit_length()
    if dim != 2**k:
        raise DimensionNotPadded(f"state length {dim} is not a power of two")
    norm = np.linalg.norm(psi)
    if not np.isclose(norm, 1.0, atol=1e-10):
        raise ValueError(f"state norm {norm} is not 1")
    c = CircuitIR(num_qubits if num_qubits is not None else max(k, 1))
    real = np.all(psi.imag == 0)
    mag = np.abs(psi)
    for t in range(k - 1, -1, -1):
        controls = list(range(t + 1, k))
        blocks = mag.reshape(2 ** (k - t - 1), 2, 2**t)
        if t == 0 and real:
            leaf = psi.real.reshape(-1, 2)
            theta = 2.0 * np.arctan2(leaf[:, 1], leaf[:, 0])
        else:
            norms = np.sqrt((blocks**2).sum(axis=2))
            theta = 2.0 * np.arctan2(norms[:, 1], norms[:, 0])
        _uniformly_controlled(c, "RY", t, controls, theta)
    if real:
        if k == 0 and psi[0].real < 0:
            c.global_phase += math.pi
        return c
    omega = np.where(mag > 0, np.angle(psi), 0.0)
    for t in range(k):
        pairs = omega.reshape(-1, 2)
        alpha = pairs[:, 1] - pairs[:, 0]
        _uniformly_controlled(c, "RZ", t, list(range(t + 1, k)), alpha)
        omega = pairs.mean(axis=1)
    c.global_phase += float(omega[0])
    return c


# --- interpreter -------------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    if kind == "H":
        return _H
    if kind == "X":
        return _X
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.diag([complex(c, -s), complex(c, s)])
    raise ValueError(f"unknown gate {kind}")


def interpret(circuit: CircuitIR, state: np.ndarray | None = None) -> np.ndarray:
    """Apply ``circuit`` to ``state`` (default |0...0>) and return the new vector."""
    n = circuit.num_qubits
    if n > INTERPRETER_MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds interpreter ceiling {INTERPRETER_MAX_QUBITS}")
    if state is None:
        psi = np.zeros(2**n, dtype=complex)
        psi[0] = 1.0
    else:
        psi = np.array(state, dtype=complex)
        if psi.shape != (2**n,):
            raise ValueError(f"state length {psi.shape} does not match {n} qubits")
    idx = np.arange(2**n)
    t = psi.reshape((2,) * n) if n else psi
    for g in circuit.gates:
        for q in g.qubits:
            if not 0 <= q < n:
                raise QubitOutOfRange(f"gate {g} touches qubit {q} of {n}")
        if g.kind == "CNOT":
            ctl, tgt = g.qubits
            flat = t.reshape(-1)
            sel = (idx >> ctl) & 1 == 1
            src = idx[sel] ^ (1 << tgt)
            new = flat.copy()
            new[idx[sel]] = flat[src]
            t = new.reshape((2,) * n)
        else:
            (q,) = g.qubits
            ax = n - 1 - q
            t = np.moveaxis(np.tensordot(gate_matrix(g.kind, g.angle), t, axes=([1], [ax])), 0, ax)
    return t.reshape(-1) * np.exp(1j * circuit.global_phase)


def circuit_unitary(circuit: CircuitIR) -> np.ndarray:
    n = circuit.num_qubits
    return np.column_stack([interpret(circuit, col) for col in np.eye(2**n, dtype=complex)])


@dataclass
class GateReport:
    total_gates: int
    two_qubit_gates: int
    depth: int


def gate_report(circuit: CircuitIR) -> GateReport:
    level = [0] * circuit.num_qubits
    two = 0
    for g in circuit.gates:
        d = max(level[q] for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = d
        two += len(g.qubits) == 2
    return GateReport(len(circuit.gates), two, max(level, default=0))


# --- basis reordering ----------------------------------------------------------


def reorder_for_state_prep(support, dim: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Permutation moving ``support`` indices to the front.

    Returns ``(perm, inverse, k)`` where new index ``i`` holds old index
    ``perm[i]`` and the support fits in the first ``2**k`` slots.
    """
    support = sorted(set(int(i) for i in support))
    if not support:
        raise ValueError("empty support")
    rest = [i for i in range(dim) if i not in set(support)]
    perm = np.array(support + rest)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(dim)
    k = (len(support) - 1).bit_length()
    return perm, inv, k


# --- text format -------------------------------------------------------------


def dumps(circuit: CircuitIR) -> str:
    lines = [f"qubits {circuit.num_qubits}", f"# phase {circuit.global_phase:.17g}"]
    for g in circuit.gates:
        args = [str(q) for q in g.qubits]
        if g.angle is not None:
            args.append(f"{g.angle:.17g}")
        lines.append(f"{g.kind} {','.join(args)}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> CircuitIR:
    c = None
    phase = 0.0
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "phase":
                phase = float(parts[1])
            continue
        kind, _, rest = line.partition(" ")
        if kind == "qubits":
            c = CircuitIR(int(rest))
            continue
        if c is None:
            raise ValueError(f"line {ln}: gate before 'qubits' header")
        args = rest.split(",") if rest else []
        if kind in ROTATIONS:
            c.add(kind, *(int(a) for a in args[:-1]), angle=float(args[-1]))
        else:
            c.add(kind, *(int(a) for a in args))
    if c is None:
        raise ValueError("missing 'qubits' header")
    c.global_phase = phase
    return c


# --- composite pipelines -----------------------------------------------------------


def ramp_circuit(
    h0: np.ndarray,
    v: np.ndarray,
    ramp,
    dt: float,
    n_qubits: int,
    penalty: float | None = None,
    drop_threshold: float = 0.0,
) -> CircuitIR:
    """Adiabatic turn-on plus backward full-H translation as Pauli product steps.

    ``h0`` is the free diagonal and ``v`` the dense coupling-scaled
    interaction. Each ramp factor of length tau/N is cut into
    round(delta_tau/dt) product steps, and the backward translation over
    the full ramp duration into round(duration/dt).
    """
    c = CircuitIR(n_qubits)
    h0m = np.diag(h0)
    n = max(1, int(round(ramp.delta_tau / dt)))
    for lam in ramp.couplings_in_time_order():
        terms = pauli_decompose(pad_operator(h0m + lam * v, penalty), drop_threshold)
        step = emit_trotter_step(terms, ramp.delta_tau / n, n_qubits)
        for _ in range(n):
            c.extend(step)
    if ramp.tau > 0:
        n_back = max(1, int(round(ramp.duration / dt)))
        terms = pauli_decompose(pad_operator(h0m + v, penalty), drop_threshold)
        step = emit_trotter_step(terms, -ramp.duration / n_back, n_qubits)
        for _ in range(n_back):
            c.extend(step)
    return c


@dataclass
class CompiledPipeline:
    prep: CircuitIR
    evolution: CircuitIR
    perm: np.ndarray
    inverse: np.ndarray
    prep_qubits: int

    @property
    def n_qubits(self) -> int:
        return self.evolution.num_qubits

    def full_circuit(self) -> CircuitIR:
        c = CircuitIR(self.n_qubits)
        return c.extend(self.prep).extend(self.evolution)

    def run(self, dim: int) -> np.ndarray:
        """Interpret the circuit and return amplitudes in the original basis order."""
        out = interpret(self.full_circuit())[:dim]
        return out[self.inverse]


def compile_adiabatic_pipeline(
    parts: HamiltonianParts,
    psi_free: np.ndarray,
    ramp,
    dt: float,
    reorder: bool = True,
    drop_threshold: float = 0.0,
) -> CompiledPipeline:
    """State preparation and adiabatic ramp for ``psi_free`` as one circuit.

    With ``reorder`` the basis is relabelled so the state's support sits in
    the lowest ``2**k`` indices and preparation touches only ``k`` qubits.
    """
    dim = parts.dim
    n = max(1, (dim - 1).bit_length())
    if reorder:
        perm, inv, k = reorder_for_state_prep(np.flatnonzero(psi_free), dim)
    else:
        perm = inv = np.arange(dim)
        k = n
    k = max(k, 1)
    psi = np.asarray(psi_free, dtype=complex)[perm]
    local = np.zeros(2**k, dtype=complex)
    m = min(dim, 2**k)
    if np.linalg.norm(psi[m:]) > 0:
        raise ValueError("state support does not fit in the prepared register")
    local[:m] = psi[:m]
    prep = prep_circuit(local, n)
    h0 = parts.h0[perm]
    v = parts.v.toarray()[np.ix_(perm, perm)]
    evo = ramp_circuit(h0, v, ramp, dt, n, drop_threshold=drop_threshold)
    return CompiledPipeline(prep, evo, perm, inv, k)
