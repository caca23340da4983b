"""Transfer points A = 0.59, tau0 = 5 and 35 as a function of the charging energy E_C.

Shows how strongly the single-pulse results depend on E_C at fixed E_L, E_0.
Writes charging_energy_scan.csv (e_c,tau0,p_left,energy,e_ground,fidelity).
"""
import argparse
from pathlib import Path

import numpy as np

from fluxpulse.cli import write_csv
from fluxpulse.model import PhysicalParams
from fluxpulse.protocols import RunConfig, parallel_map, run_single_pulse


def cell(job):
    e_c, tau0 = job
    cfg = RunConfig(params=PhysicalParams(e_c=e_c), sample_every=10**6).with_pulse(0.59, tau0)
    res = run_single_pulse(cfg, keep_samples=False)
    return e_c, tau0, res.final_p_left, res.final_energy, res.e_ground, res.fidelity


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("charging_energy_scan.csv"))
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--e-c", type=float, nargs="+", default=list(np.round(np.arange(0.009, 0.01301, 0.0005), 4)))
    args = ap.parse_args()
    jobs = [(float(e), t) for e in args.e_c for t in (5.0, 35.0)]
    rows = parallel_map(cell, jobs, args.jobs)
    write_csv(args.out, ("e_c", "tau0", "p_left", "energy", "e_ground", "fidelity"), rows)
    for r in rows:
        print("E_C=%.4f tau0=%4.1f P_L=%.4f E=%.3f E_g=%.3f F=%.1f" % r)


if __name__ == "__main__":
    main()
