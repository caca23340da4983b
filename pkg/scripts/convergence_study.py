"""Observed convergence of final P_L when halving d_tau and when halving dx.

Errors are measured against a fine reference run (d_tau = 0.0005 and n = 2049).
"""
import argparse

from fluxpulse.protocols import RunConfig, run_single_pulse
from fluxpulse.solver import Grid


def final_p_left(n_points, d_tau, amplitude, tau0):
    cfg = RunConfig(grid=Grid(0.75, n_points), d_tau=d_tau, sample_every=10**6).with_pulse(amplitude, tau0)
    return run_single_pulse(cfg, keep_samples=False).final_p_left


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--amplitude", type=float, default=0.59)
    ap.add_argument("--tau0", type=float, nargs="+", default=[5.0, 12.0])
    args = ap.parse_args()
    for tau0 in args.tau0:
        ref = final_p_left(1025, 0.0005, args.amplitude, tau0)
        errs = [abs(final_p_left(1025, dt, args.amplitude, tau0) - ref) for dt in (0.008, 0.004, 0.002)]
        print(f"tau0={tau0}: d_tau 0.008/0.004/0.002 errors {errs}, factors "
              f"{errs[0] / errs[1]:.2f} {errs[1] / errs[2]:.2f}")
        ref = final_p_left(2049, 0.001, args.amplitude, tau0)
        errs = [abs(final_p_left(n, 0.001, args.amplitude, tau0) - ref) for n in (257, 513, 1025)]
        print(f"tau0={tau0}: n 257/513/1025 errors {errs}, factors "
              f"{errs[0] / errs[1]:.2f} {errs[1] / errs[2]:.2f}")


if __name__ == "__main__":
    main()
