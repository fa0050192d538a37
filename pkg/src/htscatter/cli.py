"""Command-line driver: ``htscatter <verb> --config run.json --out dir``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, circuits, export, resources
from .basis import CutoffTooSmall, ModelParams, TruncatedBasis, enumerate_basis
from .config import ConfigError, RunConfig, load_config
from .evolution import DimensionMismatch, DimensionTooLarge, adiabatic_prepare
from .hamiltonian import HamiltonianParts, SymmetryViolation, assemble, sparsity, write_coo
from .observables import fringe_spacing, separation_density
from .scattering import run_scattering
from .wavepackets import EmptySupport, WavepacketSpec, two_packet_state

log = logging.getLogger("htscatter")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class NumericFailure(RuntimeError):
    pass


NUMERIC_ERRORS = (
    NumericFailure,
    CutoffTooSmall,
    DimensionMismatch,
    DimensionTooLarge,
    EmptySupport,
    SymmetryViolation,
    circuits.DimensionNotPadded,
    resources.NoBracket,
    resources.InsufficientPoints,
    np.linalg.LinAlgError,
    FloatingPointError,
)


class Run:
    """Output directory plus the manifest entries gathered while writing into it."""

    def __init__(self, cfg: RunConfig, out: Path, verb: str):
        self.cfg = cfg
        self.out = out
        self.verb = verb
        self.files: list[Path] = []
        self.extra: dict = {}
        self.dim = None
        self.n_qubits = None
        self.t0 = time.perf_counter()
        out.mkdir(parents=True, exist_ok=True)

    def add(self, path: Path) -> Path:
        self.files.append(Path(path))
        return path

    def path(self, name: str) -> Path:
        return self.out / name

    def finish(self, deterministic: bool) -> Path:
        manifest = {
            "verb": self.verb,
            "configHash": self.cfg.digest(),
            "basisDimension": self.dim,
            "qubitCount": self.n_qubits,
            "wallClockSeconds": None if deterministic else round(time.perf_counter() - self.t0, 3),
            "version": __version__,
            "files": [
                {"path": str(p.relative_to(self.out)), "sha256": export.sha256_file(p)} for p in self.files
            ],
            **self.extra,
        }
        return export.write_json_atomic(manifest, self.out / "manifest.json")


def _build(cfg: RunConfig, g: float | None = None) -> tuple[TruncatedBasis, HamiltonianParts]:
    params = cfg.model_params()
    if g is not None:
        params = params.with_coupling(g)
    basis = enumerate_basis(params, cfg.truncation_spec(), cfg.truncation.evenParticleNumberOnly)
    return basis, assemble(basis)


# --- verbs -------------------------------------------------------------------


def cmd_basis(run: Run) -> None:
    basis, _ = _build(run.cfg)
    run.dim, run.n_qubits = len(basis), basis.n_qubits
    run.add(export.write_basis(basis, run.path("basis.csv")))
    log.info("basis: %d states on %d qubits", len(basis), basis.n_qubits)


def cmd_hamiltonian(run: Run) -> None:
    basis, parts = _build(run.cfg)
    run.dim, run.n_qubits = len(basis), basis.n_qubits
    run.add(export.write_basis(basis, run.path("basis.csv")))
    out = run.path("hamiltonian.coo")
    write_coo(parts.h, out)
    run.add(out)
    rep = sparsity(parts.h)
    run.extra["sparsity"] = {"d": rep.d, "nonzeros": rep.total_nonzeros}
    log.info("H: dim %d, d=%d, nnz=%d", len(basis), rep.d, rep.total_nonzeros)


def _sweep_points(cfg: RunConfig) -> list[tuple[str, float | None, WavepacketSpec]]:
    base = cfg.packet_spec()
    if not cfg.sweep.parameter:
        return [("run", None, base)]
    out = []
    for v in cfg.sweep.values:
        tag = f"{cfg.sweep.parameter}_{v:g}"
        if cfg.sweep.parameter == "g":
            out.append((tag, float(v), base))
        elif cfg.sweep.parameter == "p0":
            out.append((tag, None, WavepacketSpec(float(v), base.delta)))
        else:
            out.append((tag, None, WavepacketSpec(base.p0, float(v))))
    return out


def cmd_scatter(run: Run) -> None:
    cfg = run.cfg
    s = cfg.schedule
    summary = []
    basis, parts = _build(cfg)
    run.dim, run.n_qubits = len(basis), basis.n_qubits
    for tag, g, packet in _sweep_points(cfg):
        p = parts.at_coupling(g) if g is not None else parts
        res = run_scattering(
            p,
            packet,
            free_time=s.freeDisplacementTime,
            ramp=cfg.ramp(),
            ramp_method=s.rampMethod,
            dt=s.dt,
            t_max=s.tMax,
            sample_every=s.sampleEvery,
            grid_size=cfg.observables.gridSize,
        )
        if np.max(np.abs(res.norms - 1.0)) > 1e-10:
            raise NumericFailure(f"{tag}: norm drift {np.max(np.abs(res.norms - 1.0)):.3g}")
        run.add(export.write_heatmap(res.times, res.densities, run.path(f"heatmap_{tag}.csv")))
        run.add(export.write_histograms(res.times, res.histograms, run.path(f"histogram_{tag}.csv")))
        run.add(export.write_state(res.free_state, basis, run.path(f"initial_state_{tag}.csv")))
        traj = zip(res.times, res.first_moments, res.mean_separations, res.two_particle_weights, res.norms)
        run.add(
            export.write_series(
                ["t", "first_moment", "mean_separation", "two_particle_weight", "norm"],
                traj,
                run.path(f"trajectory_{tag}.csv"),
            )
        )
        fringe = fringe_spacing(separation_density(res.free_state, basis, cfg.observables.gridSize))
        summary.append(
            (tag, p.g, packet.p0, packet.delta, res.collision_time(), fringe, res.probability(4, s.tMax))
        )
        log.info("%s: collision at t=%.3f, fringe %.4f", tag, summary[-1][4], fringe)
    run.add(
        export.write_series(
            ["run", "g", "p0", "delta", "collision_time", "initial_fringe_spacing", "p4_final"],
            summary,
            run.path("summary.csv"),
        )
    )


def cmd_resources(run: Run) -> None:
    cfg = run.cfg
    r = cfg.resources
    m = cfg.model.M
    even = cfg.truncation.evenParticleNumberOnly
    params = cfg.model_params()
    ml_params = ModelParams(M=m, L=r.ML / m, g=params.g)
    header = (
        f"ML={r.ML:g} n_q_per_site={r.nQubitsPerSite} g={params.g:g} M={m:g} "
        f"evenParticleNumberOnly={str(even).lower()}"
    )
    rows = []
    for e in r.eMaxOverM:
        ht = resources.ht_qubits_vs_emax(ml_params, e * m, even)
        lat = resources.lattice_qubits_vs_emax(r.nQubitsPerSite, r.ML, e)
        rows.append((e, ht, lat, lat / ht))
    run.add(
        export.write_series(
            ["e_max_over_m", "ht_qubits", "lattice_qubits", "ratio"], rows, run.path("qubits_vs_emax.csv"), header
        )
    )
    table = resources.precision_comparison(r.epsilons, g=params.g, m=m, sqrt_s=r.sqrtS, even_only=even)
    run.add(
        export.write_table(
            table,
            run.path("qubits_vs_precision.csv"),
            f"g={params.g:g} M={m:g} sqrt_s={r.sqrtS:g} evenParticleNumberOnly={str(even).lower()}",
        )
    )
    points = resources.sparsity_scan(ml_params, r.sparsityQubits, even)
    run.add(
        export.write_table(
            points,
            run.path("sparsity.csv"),
            f"ML={r.ML:g} g={params.g:g} evenParticleNumberOnly={str(even).lower()}",
        )
    )
    fit = resources.fit_sparsity([p.n_qubits for p in points], [p.d for p in points], skip=r.sparsitySkip)
    run.extra["sparsityFit"] = {"slope": fit.slope, "intercept": fit.intercept, "skip": r.sparsitySkip}
    log.info("sparsity fit: ln d = %.4f ln N_q %+.4f", fit.slope, fit.intercept)


def _dropped(parts: HamiltonianParts, perm, drop: float) -> float:
    """Sum of |c_P| discarded from the full Hamiltonian in the circuit's basis order."""
    if not drop:
        return 0.0
    h = parts.h.toarray()[np.ix_(perm, perm)]
    return circuits.dropped_weight(circuits.pad_operator(h), drop)


def cmd_emit_circuit(run: Run) -> None:
    cfg = run.cfg
    s = cfg.schedule
    basis, parts = _build(cfg)
    run.dim, run.n_qubits = len(basis), basis.n_qubits
    psi = two_packet_state(basis, cfg.packet_spec())
    ramp = cfg.ramp()
    drop = cfg.circuit.dropThreshold
    pipe = circuits.compile_adiabatic_pipeline(parts, psi, ramp, s.dt, reorder=cfg.circuit.reorder, drop_threshold=drop)
    ref = adiabatic_prepare(parts, psi, ramp, "exact")
    out = pipe.run(len(basis))
    fid = float(abs(np.vdot(ref, out)) ** 2)
    for name, c in (("prep", pipe.prep), ("evolution", pipe.evolution)):
        p = run.path(f"{name}.circ")
        p.write_text(circuits.dumps(c))
        run.add(p)
    parts_out = (("prep", pipe.prep), ("evolution", pipe.evolution), ("total", pipe.full_circuit()))
    reports = [(name, *vars(circuits.gate_report(c)).values()) for name, c in parts_out]
    run.add(
        export.write_series(
            ["circuit", "total_gates", "two_qubit_gates", "depth"],
            reports,
            run.path("gate_report.csv"),
            f"reorder={str(cfg.circuit.reorder).lower()} prep_qubits={pipe.prep_qubits} dt={s.dt:g}",
        )
    )
    run.extra["circuit"] = {
        "fidelityVsMatrix": fid,
        "prepQubits": pipe.prep_qubits,
        "registerQubits": pipe.n_qubits,
        "reorder": cfg.circuit.reorder,
        "dropThreshold": drop,
        "droppedWeightFullH": _dropped(parts, pipe.perm, drop),
    }
    log.info("interpreter vs matrix fidelity %.8f (prep on %d qubits)", fid, pipe.prep_qubits)
    if fid < cfg.circuit.minFidelity:
        raise NumericFailure(f"circuit fidelity {fid:.6f} below {cfg.circuit.minFidelity}")


VERBS = {
    "basis": cmd_basis,
    "hamiltonian": cmd_hamiltonian,
    "scatter": cmd_scatter,
    "resources": cmd_resources,
    "emit-circuit": cmd_emit_circuit,
}


def _thread_limit(n: int | None):
    if n is None:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="htscatter", description=__doc__.splitlines()[0])
    ap.add_argument("verb", choices=[*VERBS, "validate-config"])
    ap.add_argument("--config", type=Path, help="JSON run configuration (defaults apply when omitted)")
    ap.add_argument("--out", type=Path, help="output directory (overrides outputs.directory)")
    ap.add_argument("--deterministic", action="store_true", help="single-threaded BLAS, no timing in manifest")
    ap.add_argument("--threads", type=int, default=None, help="BLAS thread count")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads is not None and args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.verb == "validate-config":
        print(f"ok {cfg.digest()}")
        return EXIT_OK
    out = args.out or Path(cfg.outputs.directory)
    threads = 1 if args.deterministic else args.threads
    try:
        with _thread_limit(threads):
            run = Run(cfg, out, args.verb)
            VERBS[args.verb](run)
            run.finish(args.deterministic)
    except NUMERIC_ERRORS as e:
        print(f"numeric failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
