"""End-to-end experiments: state preparation, single- and two-pulse runs, sweeps."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
import logging
import math
import os
import warnings

import numpy as np

from .envelope import dominant_frequency
from .errors import FluxPulseError, NumericalError
from .model import DEFAULT_CENTER_WIDTHS, PhysicalParams, PulseSchedule, PulseSpec, ej_at
from .observables import (
    DensityProfile,
    ObservableSample,
    density_profile,
    energy_unperturbed,
    fidelity,
    prob_left,
    sample,
)
from .solver import (
    DEFAULT_D_TAU,
    DEFAULT_RELAX_TOL,
    Grid,
    Propagator,
    WaveFunction,
    lowest_eigenpairs,
    relax_ground,
)

log = logging.getLogger(__name__)

NORM_DRIFT_LIMIT = 1e-4
# probability allowed in the outer EDGE_FRACTION of the grid before wall reflections matter
BOUNDARY_WEIGHT_LIMIT = 1e-6
EDGE_FRACTION = 0.05


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams = field(default_factory=PhysicalParams)
    grid: Grid = field(default_factory=Grid)
    d_tau: float = DEFAULT_D_TAU
    schedule: PulseSchedule = field(default_factory=lambda: PulseSchedule.single(0.59, 5.0))
    sample_every: int = 50
    profile_times: tuple[float, ...] | None = None
    relax_tol: float = DEFAULT_RELAX_TOL

    def __post_init__(self):
        if not self.d_tau > 0:
            raise ValueError(f"d_tau must be positive, got {self.d_tau}")
        if self.sample_every < 1:
            raise ValueError(f"sample_every must be >= 1, got {self.sample_every}")
        if self.profile_times is not None:
            object.__setattr__(self, "profile_times", tuple(float(t) for t in self.profile_times))

    def with_pulse(self, amplitude: float, duration: float, center: float | None = None) -> "RunConfig":
        return replace(self, schedule=PulseSchedule.single(amplitude, duration, center))


@dataclass
class RunResult:
    samples: list[ObservableSample]
    final_p_left: float
    final_energy: float
    e_ground: float
    fidelity: float
    profiles: list[DensityProfile] | None = None
    final_state: WaveFunction | None = None
    boundary_weight: float = 0.0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])


@dataclass
class SweepResult:
    a_values: np.ndarray
    tau0_values: np.ndarray
    p_left: np.ndarray
    energy: np.ndarray
    fidelity: np.ndarray


@dataclass
class TwoPulseResult:
    delta_tau_values: np.ndarray
    p_left_prime: np.ndarray
    omega_reference: float
    overlap_warning: bool = False


@lru_cache(maxsize=8)
def _ground_state(grid: Grid, params: PhysicalParams, ej: float, tol: float):
    psi, energy, _ = relax_ground(grid, params, ej=ej, tol=tol)
    psi.amplitudes.flags.writeable = False
    return psi, energy


def prepare_left_state(grid: Grid, params: PhysicalParams, tol: float = DEFAULT_RELAX_TOL,
                       ej: float | None = None):
    """Relaxed ground state cut to x < 0 and renormalized.

    The origin node is zeroed as well, so the state has P_L = 1 exactly even
    when the ground state does not vanish at the barrier top.  Returns the
    state and the ground energy before the cut.
    """
    ej = params.e_0 if ej is None else float(ej)
    ground, e_ground = _ground_state(grid, params, ej, tol)
    amps = np.where(grid.x < 0, ground.amplitudes, 0.0)
    return WaveFunction(amps, grid).normalized(), e_ground


def _checkpoints(prop: Propagator, sample_every: int, profile_times):
    samples = set(range(0, prop.n_steps + 1, sample_every))
    samples.add(prop.n_steps)
    profiles = {}
    for t in profile_times or ():
        if not -1e-9 <= t <= prop.tau_end + 1e-9:
            raise ValueError(f"profile time {t} outside [0, {prop.tau_end}]")
        profiles.setdefault(int(round(t / prop.d_tau)), []).append(t)
    return sorted(samples | set(profiles)), samples, profiles


def boundary_weight(psi: WaveFunction) -> float:
    """Probability within EDGE_FRACTION of the grid length from either wall."""
    m = max(1, int(EDGE_FRACTION * psi.grid.n_points))
    dens = np.abs(psi.amplitudes) ** 2
    return float((dens[:m].sum() + dens[-m:].sum()) * psi.grid.dx)


def simulate(config: RunConfig, initial: WaveFunction, e_ground: float,
             keep_samples: bool = True) -> RunResult:
    """Propagate ``initial`` under ``config.schedule`` up to its total time."""
    params = config.params
    prop = Propagator(config.grid, params, config.schedule, config.d_tau)
    stops, sample_steps, profile_steps = _checkpoints(prop, config.sample_every, config.profile_times)
    amps = initial.amplitudes.copy()
    samples, profiles = [], []
    edge = 0.0
    current = 0
    for stop in stops:
        prop.advance(amps, current, stop)
        current = stop
        psi = WaveFunction(amps, config.grid)
        tau = prop.tau(stop)
        if stop in sample_steps:
            norm_sq = psi.norm() ** 2
            if abs(norm_sq - 1.0) > NORM_DRIFT_LIMIT:
                raise NumericalError(
                    f"norm drifted to {norm_sq:.8f} at tau={tau:.4f}; refine d_tau or the grid",
                    tau=tau, norm=norm_sq, d_tau=prop.d_tau, n_points=config.grid.n_points,
                )
            edge = max(edge, boundary_weight(psi))
            if keep_samples or stop == prop.n_steps:
                samples.append(sample(psi, tau, ej_at(config.schedule, tau, params), params))
        for t in profile_steps.get(stop, ()):
            profiles.append(density_profile(psi, t))
    final = WaveFunction(amps, config.grid)
    if edge > BOUNDARY_WEIGHT_LIMIT:
        log.warning("probability %.3g near the grid walls; increase x_max", edge)
    e_final = energy_unperturbed(final, params)
    return RunResult(
        samples=samples,
        final_p_left=min(max(prob_left(final), 0.0), 1.0),
        final_energy=e_final,
        e_ground=e_ground,
        fidelity=fidelity(e_final, e_ground),
        profiles=profiles if config.profile_times is not None else None,
        final_state=final,
        boundary_weight=edge,
    )


def run_from_left_state(config: RunConfig, keep_samples: bool = True) -> RunResult:
    psi0, e_ground = prepare_left_state(config.grid, config.params, config.relax_tol)
    return simulate(config, psi0, e_ground, keep_samples=keep_samples)


def run_single_pulse(config: RunConfig, keep_samples: bool = True) -> RunResult:
    if len(config.schedule.pulses) != 1:
        raise ValueError("run_single_pulse expects a single-pulse schedule")
    return run_from_left_state(config, keep_samples)


def snapshot_run(config: RunConfig) -> RunResult:
    if config.profile_times is None:
        raise ValueError("snapshot_run needs profile_times")
    return run_single_pulse(config)


def default_snapshot_times(pulse: PulseSpec, count: int = 5) -> tuple[float, ...]:
    """Evenly spaced times across the pulse, center +- 2 durations."""
    return tuple(np.linspace(pulse.center - 2 * pulse.duration, pulse.center + 2 * pulse.duration, count))


def _default_jobs() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def parallel_map(fn, items, jobs: int | None = None):
    """Ordered map over independent work items, in worker processes when jobs > 1."""
    items = list(items)
    jobs = _default_jobs() if jobs is None else jobs
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=1))


def _sweep_cell(config: RunConfig):
    try:
        res = run_single_pulse(config, keep_samples=False)
        return res.final_p_left, res.final_energy, res.fidelity
    except (FluxPulseError, ValueError, FloatingPointError) as exc:
        log.warning("sweep cell failed (%s): %s", config.schedule.pulses[0], exc)
        return math.nan, math.nan, math.nan


def run_sweep(base: RunConfig, a_values, tau0_values, parallelism: int | None = None) -> SweepResult:
    """P_L, final energy and fidelity for every (A, tau0) pair; failed cells are NaN."""
    a_values = np.asarray(a_values, dtype=float)
    tau0_values = np.asarray(tau0_values, dtype=float)
    if a_values.size == 0 or tau0_values.size == 0:
        raise ValueError("sweep needs at least one amplitude and one duration")
    configs = []
    for a in a_values:
        for t0 in tau0_values:
            try:
                configs.append(base.with_pulse(float(a), float(t0)))
            except ValueError as exc:
                log.warning("invalid sweep cell A=%g tau0=%g: %s", a, t0, exc)
                configs.append(None)
    cells = parallel_map(_maybe_cell, configs, parallelism)
    data = np.array(cells, dtype=float).reshape(a_values.size, tau0_values.size, 3)
    return SweepResult(a_values, tau0_values, data[..., 0], data[..., 1], data[..., 2])


def _maybe_cell(config):
    if config is None:
        return math.nan, math.nan, math.nan
    return _sweep_cell(config)


def _two_pulse_cell(config: RunConfig) -> float:
    return run_from_left_state(config, keep_samples=False).final_p_left


def run_two_pulse(base: RunConfig, pulse: PulseSpec, delta_taus,
                  parallelism: int | None = None) -> TwoPulseResult:
    """Final P_L after two identical pulses, for each center-to-center separation."""
    delta_taus = np.asarray(delta_taus, dtype=float)
    overlap = bool(np.any(delta_taus < DEFAULT_CENTER_WIDTHS * pulse.duration))
    if overlap:
        warnings.warn(
            f"pulse separations below {DEFAULT_CENTER_WIDTHS} x duration; the pulses overlap",
            stacklevel=2,
        )
    jobs = [replace(base, schedule=PulseSchedule.two_pulse(pulse, float(d))) for d in delta_taus]
    p_left = np.array(parallel_map(_two_pulse_cell, jobs, parallelism), dtype=float)
    spectrum = lowest_eigenpairs(base.grid, base.params.e_0, base.params, k=4)
    return TwoPulseResult(delta_taus, p_left, spectrum.omega, overlap_warning=overlap)


def count_minima(values) -> int:
    """Interior strict local minima of a 1D series (NaNs break runs)."""
    v = np.asarray(values, dtype=float)
    inner = v[1:-1]
    ok = np.isfinite(v[:-2]) & np.isfinite(inner) & np.isfinite(v[2:])
    return int(np.sum(ok & (inner < v[:-2]) & (inner < v[2:])))
