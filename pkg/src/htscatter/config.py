"""JSON run configuration with validation errors that point at the offending line."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path

from .basis import ModelParams, TruncationSpec
from .evolution import RampSchedule
from .wavepackets import WavepacketSpec


class ConfigError(ValueError):
    pass


@dataclass
class ModelConfig:
    M: float = 1.0
    L: float = 16.0
    g: float = 1.0


@dataclass
class TruncationConfig:
    mode: str = "qubits"
    value: float = 10
    evenParticleNumberOnly: bool = True


@dataclass
class PacketConfig:
    p0: float = 2.5
    delta: float = 0.75


@dataclass
class ScheduleConfig:
    freeDisplacementTime: float = 1.5
    rampTau: float = 1.0
    rampSteps: int = 100
    rampMethod: str = "trotter"
    dt: float = 0.01
    tMax: float = 8.0
    sampleEvery: int = 10


@dataclass
class ObservablesConfig:
    gridSize: int = 512


@dataclass
class OutputsConfig:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv"])


@dataclass
class SweepConfig:
    parameter: str = ""
    values: list = field(default_factory=list)


@dataclass
class ResourcesConfig:
    ML: float = 16.0
    nQubitsPerSite: int = 2
    eMaxOverM: list = field(default_factory=lambda: [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0])
    epsilons: list = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.02, 0.01])
    sqrtS: float = 5.0
    sparsityQubits: list = field(default_factory=lambda: list(range(2, 13)))
    sparsitySkip: int = 5


@dataclass
class CircuitConfig:
    reorder: bool = True
    dropThreshold: float = 0.0
    minFidelity: float = 0.999


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    truncation: TruncationConfig = field(default_factory=TruncationConfig)
    packet: PacketConfig = field(default_factory=PacketConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    observables: ObservablesConfig = field(default_factory=ObservablesConfig)
    outputs: OutputsConfig = field(default_factory=OutputsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    resources: ResourcesConfig = field(default_factory=ResourcesConfig)
    circuit: CircuitConfig = field(default_factory=CircuitConfig)

    # typed views --------------------------------------------------------

    def model_params(self) -> ModelParams:
        m = self.model
        return ModelParams(M=m.M, L=m.L, g=m.g)

    def truncation_spec(self) -> TruncationSpec:
        t = self.truncation
        return TruncationSpec.qubits(int(t.value)) if t.mode == "qubits" else TruncationSpec.energy(float(t.value))

    def packet_spec(self) -> WavepacketSpec:
        return WavepacketSpec(self.packet.p0, self.packet.delta)

    def ramp(self) -> RampSchedule:
        return RampSchedule(self.schedule.rampTau, self.schedule.rampSteps)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# --- key positions ------------------------------------------------------------


def key_lines(text: str) -> dict[tuple, int]:
    """Line number of every object key in ``text``, keyed by its path."""
    out: dict[tuple, int] = {}
    stack: list = []  # entries: [kind, current_key]
    line = 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
        elif ch == '"':
            j = i + 1
            while text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            s = json.loads(text[i : j + 1])
            k = j + 1
            while k < len(text) and text[k] in " \t\r\n":
                k += 1
            if k < len(text) and text[k] == ":" and stack and stack[-1][0] == "{":
                stack[-1][1] = s
                path = tuple(e[1] for e in stack if e[0] == "{")
                out[path] = line
            i = j
        elif ch in "{[":
            stack.append([ch, None])
        elif ch in "}]":
            stack.pop()
        i += 1
    return out


def _fail(msg: str, path: tuple, lines: dict, source: str) -> None:
    ln = lines.get(path)
    where = f"{source}:{ln}" if ln else source
    raise ConfigError(f"{where}: {'.'.join(path)}: {msg}")


_NUMBER = (int, float)


def _coerce(cls, data, path, lines, source):
    if not isinstance(data, dict):
        _fail("expected an object", path, lines, source)
    obj = cls()
    known = {f.name: f for f in fields(cls)}
    for key, val in data.items():
        p = path + (key,)
        if key not in known:
            _fail(f"unknown key (allowed: {', '.join(known)})", p, lines, source)
        default = getattr(obj, key)
        if is_dataclass(default):
            setattr(obj, key, _coerce(type(default), val, p, lines, source))
            continue
        if isinstance(default, bool):
            if not isinstance(val, bool):
                _fail(f"expected true/false, got {val!r}", p, lines, source)
        elif known[key].type == "int":
            if isinstance(val, bool) or not isinstance(val, int):
                _fail(f"expected an integer, got {val!r}", p, lines, source)
        elif isinstance(default, _NUMBER):
            if isinstance(val, bool) or not isinstance(val, _NUMBER):
                _fail(f"expected a number, got {val!r}", p, lines, source)
            if not math.isfinite(val):
                _fail("must be finite", p, lines, source)
        elif isinstance(default, str):
            if not isinstance(val, str):
                _fail(f"expected a string, got {val!r}", p, lines, source)
        elif isinstance(default, list):
            if not isinstance(val, list):
                _fail(f"expected a list, got {val!r}", p, lines, source)
        setattr(obj, key, val)
    return obj


def _validate(cfg: RunConfig, lines: dict, source: str) -> None:
    def need(cond, msg, *path):
        if not cond:
            _fail(msg, path, lines, source)

    m, t, s = cfg.model, cfg.truncation, cfg.schedule
    need(m.M > 0, "must be > 0", "model", "M")
    need(m.L > 0, "must be > 0", "model", "L")
    need(m.g >= 0, "must be >= 0", "model", "g")
    need(t.mode in ("qubits", "energy"), "must be 'qubits' or 'energy'", "truncation", "mode")
    if t.mode == "qubits":
        need(float(t.value).is_integer() and 1 <= t.value <= 20, "qubit count must be an integer in [1, 20]", "truncation", "value")
    else:
        need(t.value > 0, "energy cutoff must be > 0", "truncation", "value")
    need(cfg.packet.p0 > 0, "must be > 0", "packet", "p0")
    need(cfg.packet.delta > 0, "must be > 0", "packet", "delta")
    for name in ("freeDisplacementTime", "rampTau", "dt", "tMax"):
        need(getattr(s, name) >= 0, "times must be >= 0", "schedule", name)
    need(s.dt > 0, "must be > 0", "schedule", "dt")
    need(s.rampSteps >= 1, "must be >= 1", "schedule", "rampSteps")
    need(s.rampMethod in ("exact", "trotter"), "must be 'exact' or 'trotter'", "schedule", "rampMethod")
    need(s.sampleEvery >= 1, "must be >= 1", "schedule", "sampleEvery")
    if s.rampTau > 0:
        need(s.dt <= s.rampTau, f"dt={s.dt} exceeds the ramp time {s.rampTau}", "schedule", "dt")
    n_steps = s.tMax / s.dt
    need(abs(n_steps - round(n_steps)) < 1e-9, "tMax must be a whole number of dt steps", "schedule", "tMax")
    need(round(n_steps) % s.sampleEvery == 0, f"sampleEvery={s.sampleEvery} does not divide {round(n_steps)} steps", "schedule", "sampleEvery")
    need(cfg.observables.gridSize >= 2, "must be >= 2", "observables", "gridSize")
    need(all(f in ("csv",) for f in cfg.outputs.formats), "only 'csv' is supported", "outputs", "formats")
    if cfg.sweep.parameter:
        need(cfg.sweep.parameter in ("g", "p0", "delta"), "must be one of g, p0, delta", "sweep", "parameter")
        need(len(cfg.sweep.values) > 0, "empty sweep", "sweep", "values")
    r = cfg.resources
    need(len(r.epsilons) > 0, "empty epsilon grid", "resources", "epsilons")
    need(all(isinstance(e, _NUMBER) and 0 < e < 1 for e in r.epsilons), "every epsilon must lie in (0, 1)", "resources", "epsilons")
    need(len(r.eMaxOverM) > 0, "empty E_max grid", "resources", "eMaxOverM")
    need(all(isinstance(e, _NUMBER) and e > 0 for e in r.eMaxOverM), "every E_max/M must be > 0", "resources", "eMaxOverM")
    need(r.nQubitsPerSite >= 1, "must be >= 1", "resources", "nQubitsPerSite")
    need(cfg.circuit.dropThreshold >= 0, "must be >= 0", "circuit", "dropThreshold")


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}:{e.lineno}: invalid JSON: {e.msg}") from None
    lines = key_lines(text)
    cfg = _coerce(RunConfig, data, (), lines, source)
    _validate(cfg, lines, source)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config: {e.strerror}") from None
    return parse_config(text, str(path))


def default_config() -> RunConfig:
    return RunConfig()
