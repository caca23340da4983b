"""Command-line front end: ``fluxpulse <command> --config <path>``.

Every command writes its CSV outputs and ``resolved_config.ini`` into the
output directory, then prints a one-line summary.
"""
from __future__ import annotations

import argparse
from dataclasses import replace
import logging
from pathlib import Path
import sys

import numpy as np

from .config import ExperimentConfig, parse_config, write_echo
from .envelope import OscillationSeries, dominant_frequency, fit_decoherence
from .errors import ConfigError, FitError, FluxPulseError, NumericalError
from .observables import density_profile
from .protocols import (
    default_snapshot_times,
    run_single_pulse,
    run_sweep,
    run_two_pulse,
    snapshot_run,
)
from .solver import relax_ground

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_FIT = 4

log = logging.getLogger("fluxpulse")


def fmt(value) -> str:
    """Integers verbatim; floats as the shortest decimal that round-trips (at most 17 digits)."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_profiles(path: Path, profiles):
    rows = ((p.tau, x, d) for p in profiles for x, d in zip(p.grid.x, p.density))
    write_csv(path, ("tau", "x", "density"), rows)


def write_timeseries(path: Path, samples):
    write_csv(path, ("tau", "p_left", "norm", "energy"),
              ((s.tau, s.p_left, s.norm, s.energy) for s in samples))


def cmd_relax(cfg: ExperimentConfig, out: Path, args) -> str:
    psi, energy, steps = relax_ground(cfg.grid, cfg.params)
    write_profiles(out / "profiles.csv", [density_profile(psi, 0.0)])
    return f"relax: E_g={fmt(energy)} K steps={steps}"


def cmd_pulse(cfg: ExperimentConfig, out: Path, args) -> str:
    res = run_single_pulse(cfg.run_config())
    write_timeseries(out / "timeseries.csv", res.samples)
    return (f"pulse: A={fmt(cfg.amplitude)} tau0={fmt(cfg.duration)} P_L={fmt(res.final_p_left)} "
            f"E={fmt(res.final_energy)} K E_g={fmt(res.e_ground)} K F={fmt(res.fidelity)}")


def cmd_sweep(cfg: ExperimentConfig, out: Path, args) -> str:
    res = run_sweep(cfg.run_config(), cfg.a_values(), cfg.tau0_values(), parallelism=args.jobs)
    rows = []
    for i, a in enumerate(res.a_values):
        for j, t0 in enumerate(res.tau0_values):
            rows.append((a, t0, res.p_left[i, j], res.energy[i, j], res.fidelity[i, j]))
    write_csv(out / "sweep.csv", ("amplitude", "tau0", "p_left", "energy", "fidelity"), rows)
    with open(out / "sweep_matrix.csv", "w", encoding="utf-8", newline="\n") as fh:
        # corner cell is nan so the whole file loads as one numeric array
        fh.write(",".join(["nan"] + [fmt(t) for t in res.tau0_values]) + "\n")
        for a, row in zip(res.a_values, res.p_left):
            fh.write(",".join([fmt(a)] + [fmt(v) for v in row]) + "\n")
    failed = int(np.isnan(res.p_left).sum())
    return (f"sweep: cells={res.p_left.size} failed={failed} "
            f"min_P_L={fmt(np.nanmin(res.p_left))} max_P_L={fmt(np.nanmax(res.p_left))}")


def cmd_twopulse(cfg: ExperimentConfig, out: Path, args) -> str:
    res = run_two_pulse(cfg.run_config(), cfg.pulse, cfg.delta_values(), parallelism=args.jobs)
    write_csv(out / "twopulse.csv", ("delta_tau", "p_left_prime"),
              zip(res.delta_tau_values, res.p_left_prime))
    summary = f"twopulse: omega_ref={fmt(res.omega_reference)}"
    if res.delta_tau_values.size >= 4:
        omega = dominant_frequency(res.delta_tau_values, res.p_left_prime)
        summary += f" omega_dominant={fmt(omega)}"
    spread = float(np.ptp(res.p_left_prime))
    return summary + f" peak_to_peak={fmt(spread)}"


def cmd_profile(cfg: ExperimentConfig, out: Path, args) -> str:
    pulse = cfg.pulse
    end = pulse.end
    times = (0.0,) + default_snapshot_times(pulse) + (end,)
    res = snapshot_run(cfg.run_config(profile_times=times))
    write_profiles(out / "profiles.csv", res.profiles)
    write_timeseries(out / "timeseries.csv", res.samples)
    peaks = " ".join(f"{p.peak_position():+.4f}" for p in res.profiles)
    return f"profile: P_L={fmt(res.final_p_left)} peak_x=[{peaks}]"


def read_series(path) -> OscillationSeries:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read data {path}: {exc.strerror or exc}") from None
    rows = []
    first = True
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        try:
            values = [float(p) for p in parts[:2]]
        except ValueError:
            if first:
                first = False
                continue  # header
            raise ConfigError(f"{path}:{lineno}: cannot parse {line!r}") from None
        first = False
        if len(values) != 2:
            raise ConfigError(f"{path}:{lineno}: expected two columns (t, y)")
        rows.append(values)
    if not rows:
        raise FitError(f"{path}: no data rows")
    data = np.array(rows)
    return OscillationSeries(data[:, 0], data[:, 1])


def cmd_fit(cfg: ExperimentConfig, out: Path, args) -> str:
    if args.data is None:
        raise ConfigError("fit needs --data <csv of t,y pairs>")
    fit = fit_decoherence(read_series(args.data))
    write_csv(out / "fit.csv", ("a1", "a2", "t_d", "rms_residual", "n_extrema_used"),
              [(fit.a1, fit.a2, fit.t_d, fit.rms_residual, fit.n_extrema_used)])
    note = "" if fit.identifiable else " (t_d unidentifiable)"
    return f"fit: t_d={fmt(fit.t_d)} a1={fmt(fit.a1)} a2={fmt(fit.a2)} n={fit.n_extrema_used}{note}"


COMMANDS = {
    "relax": cmd_relax,
    "pulse": cmd_pulse,
    "sweep": cmd_sweep,
    "twopulse": cmd_twopulse,
    "profile": cmd_profile,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluxpulse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="INI experiment config (defaults if omitted)")
        p.add_argument("--out", type=Path, help="output directory (overrides [output] directory)")
        p.add_argument("--jobs", type=int, default=None, help="parallel worker processes")
        if name == "fit":
            p.add_argument("--data", type=Path, help="CSV of (t, y) pairs")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.config) if args.config else ExperimentConfig()
        if args.out is not None:
            cfg = replace(cfg, directory=str(args.out))
        out = Path(cfg.directory)
        out.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[args.command](cfg, out, args)
        write_echo(cfg, out)
    except FitError as exc:
        print(f"fluxpulse {args.command}: fit underdetermined: {exc}", file=sys.stderr)
        return EXIT_FIT
    except ConfigError as exc:
        print(f"fluxpulse {args.command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"fluxpulse {args.command}: numerical failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FluxPulseError as exc:
        print(f"fluxpulse {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"fluxpulse {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
