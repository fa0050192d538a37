"""Maximum nonzeros per column of H against basis size, with the log-log fit.

    python3 scripts/sparsity.py --max-qubits 12
"""

import argparse

import numpy as np

from htscatter.basis import ModelParams
from htscatter.resources import fit_sparsity, sparsity_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-qubits", type=int, default=12)
    ap.add_argument("--ML", type=float, default=16.0)
    ap.add_argument("--skip", type=int, default=5, help="points left out of the fit")
    args = ap.parse_args()

    pts = sparsity_scan(ModelParams(M=1.0, L=args.ML, g=1.0), range(2, args.max_qubits + 1))
    print(f"{'N_q':>4} {'dim':>6} {'d':>6} {'d/2^N':>8}")
    for p in pts:
        print(f"{p.n_qubits:4d} {p.dim:6d} {p.d:6d} {p.d / 2**p.n_qubits:8.4f}")
    fit = fit_sparsity([p.n_qubits for p in pts], [p.d for p in pts], skip=args.skip)
    print(f"log d = {fit.slope:.3f} log N_q {fit.intercept:+.3f}  (max residual {np.abs(fit.residuals).max():.3f})")


if __name__ == "__main__":
    main()
