"""Collision time, inelastic probability and fringe spacing across couplings and momenta.

    python3 scripts/scatter_sweep.py --qubits 10
"""

import argparse

from htscatter.basis import ModelParams, TruncationSpec, enumerate_basis
from htscatter.evolution import RampSchedule
from htscatter.hamiltonian import assemble
from htscatter.observables import fringe_spacing
from htscatter.scattering import initial_fringe_spacing, run_scattering
from htscatter.wavepackets import WavepacketSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=10)
    ap.add_argument("--L", type=float, default=16.0)
    ap.add_argument("--couplings", type=float, nargs="+", default=[1.0, 2.0, 3.0])
    ap.add_argument("--momenta", type=float, nargs="+", default=[2.0, 2.5, 3.0])
    ap.add_argument("--t-max", type=float, default=8.0)
    args = ap.parse_args()

    basis = enumerate_basis(ModelParams(M=1.0, L=args.L, g=1.0), TruncationSpec.qubits(args.qubits), True)
    unit = assemble(basis, 1.0)
    print(f"basis dimension {len(basis)}")

    runs = list(dict.fromkeys([(g, 2.5) for g in args.couplings] + [(2.0, p0) for p0 in args.momenta]))
    print(f"{'g':>5} {'p0':>5} {'t_c':>6} {'P(4) end':>10} {'fringe t=0':>11} {'fringe free':>12}")
    for g, p0 in runs:
        packet = WavepacketSpec(p0, 0.75)
        res = run_scattering(unit.at_coupling(g), packet, ramp=RampSchedule(1.0, 100), t_max=args.t_max)
        print(
            f"{g:5.2f} {p0:5.2f} {res.collision_time():6.2f} {res.histograms[-1].get(4, 0.0):10.4f}"
            f" {fringe_spacing(res.densities[0]):11.4f} {initial_fringe_spacing(unit, packet):12.4f}"
        )


if __name__ == "__main__":
    main()
