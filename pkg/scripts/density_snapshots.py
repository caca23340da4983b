"""Probability-density snapshots across one transfer, plus the peak position of each.

Writes profiles.csv (tau,x,density) and timeseries.csv.
"""
import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from fluxpulse.cli import write_profiles, write_timeseries
from fluxpulse.model import PulseSpec
from fluxpulse.protocols import RunConfig, snapshot_run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("out/density_snapshots"))
    ap.add_argument("--amplitude", type=float, default=0.59)
    ap.add_argument("--tau0", type=float, default=5.1)
    ap.add_argument("--count", type=int, default=5)
    ap.add_argument("--spread", type=float, default=2.0, help="snapshots span center +- spread * tau0")
    args = ap.parse_args()

    pulse = PulseSpec(args.amplitude, args.tau0)
    half = args.spread * pulse.duration
    times = tuple(np.linspace(pulse.center - half, pulse.center + half, args.count))
    cfg = replace(RunConfig().with_pulse(args.amplitude, args.tau0), profile_times=times)
    res = snapshot_run(cfg)

    args.out.mkdir(parents=True, exist_ok=True)
    write_profiles(args.out / "profiles.csv", res.profiles)
    write_timeseries(args.out / "timeseries.csv", res.samples)
    for p in res.profiles:
        print(f"tau={p.tau:7.3f} peak_x={p.peak_position():+.4f}")
    print(f"final P_L={res.final_p_left:.4f}")


if __name__ == "__main__":
    main()
