"""Finite-difference discretization of the flux Hamiltonian.

H = -(E_C / pi^2) d^2/dx^2 + V(x) on a symmetric uniform grid with zero
Dirichlet values just outside both ends.  Real-time stepping is
Crank-Nicolson with E_J sampled at the step midpoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _kernels
from .errors import NumericalError
from .model import PhysicalParams, PulseSchedule, ej_at

DEFAULT_X_MAX = 0.75
DEFAULT_N_POINTS = 1025
DEFAULT_D_TAU = 0.002
DEFAULT_RELAX_TOL = 1e-9
DEFAULT_RELAX_D_TAU = 0.01
RELAX_MAX_STEPS = 200_000
INITIAL_GUESS_WIDTH = 0.2


@dataclass(frozen=True)
class Grid:
    x_max: float = DEFAULT_X_MAX
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self):
        if self.n_points < 64:
            raise ValueError(f"n_points must be at least 64, got {self.n_points}")
        if self.n_points % 2 == 0:
            raise ValueError(f"n_points must be odd so that x = 0 is a node, got {self.n_points}")
        if not self.x_max > 0.5:
            raise ValueError(f"x_max must exceed 0.5 to contain both wells, got {self.x_max}")

    @property
    def dx(self) -> float:
        return 2.0 * self.x_max / (self.n_points - 1)

    @property
    def center(self) -> int:
        """Index of the x = 0 node."""
        return self.n_points // 2

    @cached_property
    def x(self) -> np.ndarray:
        # built from one half so that x[j] == -x[-1 - j] bitwise
        m = self.center
        half = self.x_max * (np.arange(m + 1) / m)
        x = np.concatenate([-half[:0:-1], half])
        x.flags.writeable = False
        return x

    def left_weights(self) -> np.ndarray:
        """Quadrature weights (without dx) of the region x < 0; the origin counts half."""
        w = np.zeros(self.n_points)
        w[: self.center] = 1.0
        w[self.center] = 0.5
        return w


@dataclass
class WaveFunction:
    amplitudes: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} amplitudes, got shape {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        """L2 norm, sqrt(sum |psi|^2 dx)."""
        return math.sqrt(float(np.vdot(self.amplitudes, self.amplitudes).real) * self.grid.dx)

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.amplitudes / self.norm(), self.grid)

    def reflected(self) -> "WaveFunction":
        """psi(-x)."""
        return WaveFunction(self.amplitudes[::-1].copy(), self.grid)

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.amplitudes.copy(), self.grid)

    def inner(self, other: "WaveFunction") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.grid.dx)


@dataclass(frozen=True)
class Spectrum:
    energies: np.ndarray
    states: list
    omega: float = math.nan


@dataclass(frozen=True)
class LRDecomposition:
    c_l0: complex
    c_l1: complex
    c_r0: complex
    c_r1: complex
    residual_weight: float


class _Operator:
    """Static pieces of H on a grid; cheap to build, shared by the stepping helpers."""

    def __init__(self, grid: Grid, params: PhysicalParams):
        x = grid.x
        self.grid = grid
        self.params = params
        self.v_static = params.e_l * x**2 - params.e_0
        self.cos_term = np.cos(2.0 * np.pi * x)
        self.kin = params.kinetic_coefficient / grid.dx**2

    def diagonal(self, ej: float) -> np.ndarray:
        return self.v_static + ej * self.cos_term + 2.0 * self.kin


def apply_hamiltonian(psi: WaveFunction, ej: float, params: PhysicalParams) -> WaveFunction:
    op = _Operator(psi.grid, params)
    out = _kernels.apply_h(psi.amplitudes, op.v_static, op.cos_term, op.kin, float(ej))
    return WaveFunction(out, psi.grid)


def expectation_energy(psi: WaveFunction, ej: float, params: PhysicalParams) -> float:
    """<psi|H|psi> / <psi|psi> for the barrier height ``ej``."""
    hpsi = apply_hamiltonian(psi, ej, params)
    return float(np.vdot(psi.amplitudes, hpsi.amplitudes).real / np.vdot(psi.amplitudes, psi.amplitudes).real)


def step_real(psi: WaveFunction, tau: float, d_tau: float, schedule: PulseSchedule,
              params: PhysicalParams) -> WaveFunction:
    """One Crank-Nicolson step from ``tau`` to ``tau + d_tau``."""
    if not d_tau > 0:
        raise ValueError(f"d_tau must be positive, got {d_tau}")
    op = _Operator(psi.grid, params)
    ej = np.array([ej_at(schedule, tau + 0.5 * d_tau, params)])
    out = _kernels.cn_steps(psi.amplitudes.copy(), op.v_static, op.cos_term, op.kin, ej, 0.5j * d_tau)
    return WaveFunction(out, psi.grid)


def step_imaginary(psi: WaveFunction, ej: float, d_tau: float, params: PhysicalParams) -> WaveFunction:
    """One un-normalized imaginary-time step at fixed barrier height."""
    op = _Operator(psi.grid, params)
    out = _kernels.cn_steps(psi.amplitudes.copy(), op.v_static, op.cos_term, op.kin,
                            np.array([float(ej)]), 0.5 * d_tau + 0j)
    return WaveFunction(out, psi.grid)


class Propagator:
    """Real-time CN propagation of one wavefunction under a pulse schedule.

    The step count is rounded up so that the run lands exactly on ``tau_end``.
    """

    def __init__(self, grid: Grid, params: PhysicalParams, schedule: PulseSchedule,
                 d_tau: float, tau_end: float | None = None):
        if not d_tau > 0:
            raise ValueError(f"d_tau must be positive, got {d_tau}")
        self.op = _Operator(grid, params)
        self.schedule = schedule
        self.params = params
        self.tau_end = schedule.total_time if tau_end is None else float(tau_end)
        self.n_steps = max(1, int(math.ceil(self.tau_end / d_tau - 1e-9)))
        self.d_tau = self.tau_end / self.n_steps

    def tau(self, step: int) -> float:
        return step * self.d_tau

    def advance(self, amplitudes: np.ndarray, start: int, stop: int) -> np.ndarray:
        """Advance raw amplitudes in place from step index ``start`` to ``stop``."""
        if stop <= start:
            return amplitudes
        mid = (np.arange(start, stop) + 0.5) * self.d_tau
        ej = ej_at(self.schedule, mid, self.params)
        return _kernels.cn_steps(amplitudes, self.op.v_static, self.op.cos_term, self.op.kin,
                                 np.ascontiguousarray(ej, dtype=float), 0.5j * self.d_tau)


def gaussian_guess(grid: Grid, width: float = INITIAL_GUESS_WIDTH) -> WaveFunction:
    psi = WaveFunction(np.exp(-0.5 * (grid.x / width) ** 2), grid)
    return psi.normalized()


def relax_ground(grid: Grid, params: PhysicalParams, ej: float | None = None,
                 tol: float = DEFAULT_RELAX_TOL, d_tau: float = DEFAULT_RELAX_D_TAU,
                 initial: WaveFunction | None = None, max_steps: int = RELAX_MAX_STEPS):
    """Imaginary-time relaxation to the ground state at fixed E_J.

    ``ej`` defaults to E_0, i.e. the schedule frozen at tau = 0.  Returns
    ``(psi, energy, steps)``.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    ej = params.e_0 if ej is None else float(ej)
    op = _Operator(grid, params)
    # (1 + d_tau H / 2) must stay positive definite
    v_min = float(np.min(op.diagonal(ej))) - 2.0 * op.kin
    if v_min < 0 and d_tau * abs(v_min) >= 1.0:
        raise ValueError(f"relaxation d_tau={d_tau} too large for potential minimum {v_min:.3g} K")
    psi = gaussian_guess(grid) if initial is None else initial.copy()
    energy, steps, converged = _kernels.relax_loop(
        psi.amplitudes, op.v_static, op.cos_term, op.kin, ej, float(d_tau), grid.dx, float(tol), int(max_steps)
    )
    if not converged:
        raise NumericalError(
            f"imaginary-time relaxation did not converge in {max_steps} steps",
            energy=energy, steps=steps,
        )
    return psi, float(energy), int(steps)


def _sector_states(diag: np.ndarray, kin: float, k: int, parity: int):
    """Lowest k eigenpairs of one parity sector, returned on the full grid.

    ``diag`` is the full-grid diagonal.  Even states are fixed by the half grid
    x >= 0 with psi(-dx) = psi(dx); symmetrizing the origin row scales its
    coupling by sqrt(2).  Odd states vanish at the origin.
    """
    m = diag.size // 2
    if parity > 0:
        d = diag[m:]
        off = np.full(d.size - 1, -kin)
        off[0] = -math.sqrt(2.0) * kin
    else:
        d = diag[m + 1:]
        off = np.full(d.size - 1, -kin)
    k = min(k, d.size)
    w, v = eigh_tridiagonal(d, off, select="i", select_range=(0, k - 1))
    full = np.empty((diag.size, k))
    if parity > 0:
        v = v.copy()
        v[0] *= math.sqrt(2.0)
        full[m:] = v
        full[:m] = v[:0:-1]
    else:
        full[m + 1:] = v
        full[m] = 0.0
        full[:m] = -v[::-1]
    return w, full


def lowest_eigenpairs(grid: Grid, ej: float, params: PhysicalParams, k: int = 4) -> Spectrum:
    """Lowest k eigenpairs of the discrete H, solved separately in each parity sector.

    The inter-well tunnel splitting is far below double precision for the
    default SQUID, so a direct solve of the full matrix returns arbitrary
    mixtures of each doublet; the sector split keeps every state of definite
    parity.  States are normalized to sum |psi|^2 dx = 1 with positive weight
    on the x > 0 side.
    """
    if not 1 <= k <= 8:
        raise ValueError(f"k must lie in [1, 8], got {k}")
    op = _Operator(grid, params)
    diag = op.diagonal(float(ej))
    we, ve = _sector_states(diag, op.kin, k, +1)
    wo, vo = _sector_states(diag, op.kin, k, -1)
    energies = np.concatenate([we, wo])
    vectors = np.concatenate([ve, vo], axis=1)
    # stable sort keeps the even member first within a degenerate doublet
    order = np.argsort(energies, kind="stable")[:k]
    m = grid.center
    states = []
    for i in order:
        v = vectors[:, i]
        v = v / math.sqrt(float(v @ v) * grid.dx)
        if v[m + 1:].sum() < 0:
            v = -v
        states.append(WaveFunction(v, grid))
    energies = energies[order]
    omega = math.nan
    if k >= 4:
        omega = float(0.5 * (energies[2] + energies[3]) - 0.5 * (energies[0] + energies[1]))
    return Spectrum(energies=energies, states=states, omega=omega)


def localized_basis(spectrum: Spectrum):
    """(psi_L0, psi_L1, psi_R0, psi_R1) from the two lowest doublets."""
    if len(spectrum.states) < 4:
        raise ValueError("need at least 4 eigenstates to build the localized basis")
    s = [st.amplitudes for st in spectrum.states[:4]]
    grid = spectrum.states[0].grid
    w = grid.left_weights()

    def split(a, b):
        plus = (a + b) / math.sqrt(2.0)
        minus = (a - b) / math.sqrt(2.0)
        if np.sum(w * np.abs(plus) ** 2) > np.sum(w * np.abs(minus) ** 2):
            return plus, minus
        return minus, plus

    l0, r0 = split(s[0], s[1])
    l1, r1 = split(s[2], s[3])
    return tuple(WaveFunction(a, grid) for a in (l0, l1, r0, r1))


def project_lr_basis(psi: WaveFunction, spectrum: Spectrum) -> LRDecomposition:
    l0, l1, r0, r1 = localized_basis(spectrum)
    c = [b.inner(psi) for b in (l0, l1, r0, r1)]
    weight = psi.norm() ** 2 - sum(abs(z) ** 2 for z in c)
    return LRDecomposition(c[0], c[1], c[2], c[3], residual_weight=min(max(weight, 0.0), 1.0))
