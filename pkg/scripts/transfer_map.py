"""Final P_L over the (A, tau0) plane and the number of P_L minima per A row.

Writes sweep.csv and sweep_matrix.csv (same layout as ``fluxpulse sweep``).
"""
import argparse
from pathlib import Path

import numpy as np

from fluxpulse.cli import fmt, write_csv
from fluxpulse.model import a_critical
from fluxpulse.protocols import RunConfig, count_minima, run_sweep
from fluxpulse.solver import Grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("out/transfer_map"))
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--n-points", type=int, default=513)
    ap.add_argument("--d-tau", type=float, default=0.004)
    ap.add_argument("--a", type=float, nargs=3, default=(0.45, 0.85, 20), metavar=("MIN", "MAX", "N"))
    ap.add_argument("--tau0", type=float, nargs=3, default=(2.0, 40.0, 30), metavar=("MIN", "MAX", "N"))
    args = ap.parse_args()

    base = RunConfig(grid=Grid(0.75, args.n_points), d_tau=args.d_tau, sample_every=10**6)
    a_values = np.linspace(args.a[0], args.a[1], int(args.a[2]))
    tau0_values = np.linspace(args.tau0[0], args.tau0[1], int(args.tau0[2]))
    res = run_sweep(base, a_values, tau0_values, parallelism=args.jobs)

    args.out.mkdir(parents=True, exist_ok=True)
    rows = [(a, t, res.p_left[i, j], res.energy[i, j], res.fidelity[i, j])
            for i, a in enumerate(a_values) for j, t in enumerate(tau0_values)]
    write_csv(args.out / "sweep.csv", ("amplitude", "tau0", "p_left", "energy", "fidelity"), rows)
    with open(args.out / "sweep_matrix.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(["nan"] + [fmt(t) for t in tau0_values]) + "\n")
        for a, row in zip(a_values, res.p_left):
            fh.write(",".join([fmt(a)] + [fmt(v) for v in row]) + "\n")

    print(f"A_cr = {a_critical(base.params):.4f}")
    for a, row in zip(a_values, res.p_left):
        print(f"A={a:.3f} minima={count_minima(row)} " + " ".join(f"{v:.2f}" for v in row))


if __name__ == "__main__":
    main()
