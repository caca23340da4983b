"""Fidelity factor and final energy ratio E/|E_g| against pulse duration for several amplitudes.

Writes fidelity.csv (amplitude,tau0,p_left,energy_ratio,fidelity).
"""
import argparse
from pathlib import Path

import numpy as np

from fluxpulse.cli import write_csv
from fluxpulse.observables import energy_ratio
from fluxpulse.protocols import RunConfig, prepare_left_state, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("out/fidelity_curves"))
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--amplitudes", type=float, nargs="+", default=[0.53, 0.59, 0.65])
    ap.add_argument("--tau0", type=float, nargs=3, default=(2.0, 40.0, 39), metavar=("MIN", "MAX", "N"))
    args = ap.parse_args()

    base = RunConfig(sample_every=10**6)
    tau0_values = np.linspace(args.tau0[0], args.tau0[1], int(args.tau0[2]))
    res = run_sweep(base, args.amplitudes, tau0_values, parallelism=args.jobs)
    _, e_ground = prepare_left_state(base.grid, base.params)

    rows = [(a, t, res.p_left[i, j], energy_ratio(res.energy[i, j], e_ground), res.fidelity[i, j])
            for i, a in enumerate(res.a_values) for j, t in enumerate(tau0_values)]
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / "fidelity.csv", ("amplitude", "tau0", "p_left", "energy_ratio", "fidelity"), rows)
    for row in rows:
        print("A=%.2f tau0=%5.2f P_L=%.4f E/|E_g|=%.5f F=%.4g" % row)


if __name__ == "__main__":
    main()
