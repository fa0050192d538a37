"""Qubit counts for truncated Fock space versus a lattice discretisation.

    python3 scripts/resource_tables.py
"""

import argparse

from htscatter.basis import ModelParams
from htscatter.resources import ht_qubits_vs_emax, lattice_qubits_vs_emax, precision_comparison


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ML", type=float, default=16.0)
    ap.add_argument("--per-site", type=int, default=2)
    ap.add_argument("--epsilons", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.02, 0.01])
    args = ap.parse_args()

    params = ModelParams(M=1.0, L=args.ML)
    print(f"# fixed volume ML={args.ML:g}, {args.per_site} qubits per lattice site")
    print(f"{'E/M':>5} {'HT':>5} {'lattice':>8} {'ratio':>7}")
    for e in [2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 25, 30]:
        ht = ht_qubits_vs_emax(params, float(e))
        lat = lattice_qubits_vs_emax(args.per_site, args.ML, float(e))
        print(f"{e:5d} {ht:5d} {lat:8d} {lat / ht:7.1f}")

    print("\n# matched precision (g=1, sqrt(s)=5M)")
    print(f"{'eps':>6} {'L':>7} {'a':>7} {'sites':>6} {'q/site':>7} {'lattice':>8} {'E_max':>7} {'HT':>4}")
    for r in precision_comparison(args.epsilons):
        print(
            f"{r.epsilon:6.3f} {r.L:7.3f} {r.a:7.4f} {r.sites:6d} {r.qubits_per_site:7d}"
            f" {r.lattice_qubits:8d} {r.e_max:7.2f} {r.ht_qubits:4d}"
        )


if __name__ == "__main__":
    main()
