"""Measured quantities: left-well probability, energies, fidelity factor, densities."""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .model import PhysicalParams
from .solver import Grid, WaveFunction, expectation_energy

# relative energy change treated as no excitation; covers the accuracy of the
# relaxed ground energy, which sits slightly above the exact discrete level
EXCITATION_FLOOR = 1e-9


@dataclass(frozen=True)
class ObservableSample:
    tau: float
    p_left: float
    norm: float
    energy: float

    @property
    def p_right(self) -> float:
        return self.norm - self.p_left


@dataclass(frozen=True)
class DensityProfile:
    tau: float
    density: np.ndarray
    grid: Grid

    def integral(self) -> float:
        return float(self.density.sum() * self.grid.dx)

    def peak_position(self) -> float:
        return float(self.grid.x[int(np.argmax(self.density))])


def prob_left(psi: WaveFunction) -> float:
    """Probability in x < 0, with the x = 0 node split evenly between the wells."""
    w = psi.grid.left_weights()
    return float(np.sum(w * np.abs(psi.amplitudes) ** 2) * psi.grid.dx)


def prob_right(psi: WaveFunction) -> float:
    w = 1.0 - psi.grid.left_weights()
    return float(np.sum(w * np.abs(psi.amplitudes) ** 2) * psi.grid.dx)


def energy_unperturbed(psi: WaveFunction, params: PhysicalParams) -> float:
    """Energy with the barrier restored to E_J = E_0."""
    return expectation_energy(psi, params.e_0, params)


def sample(psi: WaveFunction, tau: float, ej: float, params: PhysicalParams) -> ObservableSample:
    return ObservableSample(
        tau=float(tau),
        p_left=prob_left(psi),
        norm=psi.norm() ** 2,
        energy=expectation_energy(psi, ej, params),
    )


def fidelity(e_final: float, e_ground: float) -> float:
    """Barrier depth over deposited energy, |E_g| / (E - E_g).

    The barrier top sits at zero energy.  Returns ``math.inf`` when the
    excitation is below the ground-energy accuracy.
    """
    floor = EXCITATION_FLOOR * max(abs(e_ground), 1.0)
    delta = e_final - e_ground
    if delta < -floor:
        raise ValueError(
            f"final energy {e_final!r} lies below the ground state {e_ground!r}"
        )
    if delta <= floor:
        return math.inf
    return abs(e_ground) / delta


def energy_ratio(e_final: float, e_ground: float) -> float:
    """E / |E_g|; equals 1/F - 1 for the fidelity factor F."""
    if not e_ground < 0:
        raise ValueError(f"ground energy must be negative, got {e_ground!r}")
    return e_final / abs(e_ground)


def density_profile(psi: WaveFunction, tau: float) -> DensityProfile:
    return DensityProfile(tau=float(tau), density=np.abs(psi.amplitudes) ** 2, grid=psi.grid)
