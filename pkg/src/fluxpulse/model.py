"""Physical model of a half-flux-biased SQUID with a pulsed Josephson barrier.

Energies are in Kelvin and time is the dimensionless tau with t = hbar * tau.
The flux coordinate x is measured from the symmetric point, so the potential

    V(x) = E_L x^2 + E_J(tau) cos(2 pi x) - E_0

is even in x and its barrier top sits at V(0) = E_J - E_0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

# hbar / (k_B * 1 K) in picoseconds
PS_PER_TAU = 7.64

# tail cut used for default pulse centers and run end times
DEFAULT_CENTER_WIDTHS = 4.0
MIN_CENTER_WIDTHS = 3.5


@dataclass(frozen=True)
class PhysicalParams:
    e_c: float = 0.009
    e_l: float = 645.0
    e_0: float = 76.0

    def __post_init__(self):
        for name in ("e_c", "e_l", "e_0"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be a finite positive energy, got {value!r}")

    @property
    def kinetic_coefficient(self) -> float:
        """Prefactor of -d^2/dx^2 in the Hamiltonian."""
        return self.e_c / math.pi**2

    @property
    def mass(self) -> float:
        return math.pi**2 / (2.0 * self.e_c)


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian dip of the Josephson energy: E_J/E_0 = 1 - A exp(-(tau - center)^2 / duration^2).

    ``center`` defaults to four durations, which keeps E_J(0) at E_0 to ~1e-7.
    """

    amplitude: float
    duration: float
    center: float | None = None

    def __post_init__(self):
        if self.center is None:
            object.__setattr__(self, "center", DEFAULT_CENTER_WIDTHS * self.duration)
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"pulse duration must be positive, got {self.duration!r}")
        if not (0.0 <= self.amplitude <= 1.0):
            raise ValueError(f"pulse amplitude must lie in [0, 1], got {self.amplitude!r}")
        if not math.isfinite(self.center) or self.center < MIN_CENTER_WIDTHS * self.duration:
            raise ValueError(
                f"pulse center {self.center!r} must be at least "
                f"{MIN_CENTER_WIDTHS} x duration ({MIN_CENTER_WIDTHS * self.duration!r})"
            )

    @property
    def end(self) -> float:
        return self.center + DEFAULT_CENTER_WIDTHS * self.duration

    def dip(self, tau):
        return self.amplitude * np.exp(-(((np.asarray(tau, dtype=float) - self.center) / self.duration) ** 2))


@dataclass(frozen=True)
class PulseSchedule:
    pulses: tuple[PulseSpec, ...]
    total_time: float | None = None

    def __post_init__(self):
        pulses = tuple(sorted(self.pulses, key=lambda p: p.center))
        object.__setattr__(self, "pulses", pulses)
        if self.total_time is None:
            end = max((p.end for p in pulses), default=0.0)
            object.__setattr__(self, "total_time", end)
        if not (math.isfinite(self.total_time) and self.total_time > 0):
            raise ValueError(f"total_time must be positive, got {self.total_time!r}")
        if pulses:
            # dense sampling: at least 50 points per shortest pulse width
            finest = min(p.duration for p in pulses)
            n = max(2001, int(math.ceil(50 * self.total_time / finest)) + 1)
            tau = np.linspace(0.0, self.total_time, n)
            taus = np.concatenate([tau, [p.center for p in pulses if p.center <= self.total_time]])
            ratio = self.ej_ratio(taus)
            if ratio.min() <= 0.0:
                raise ValueError(
                    f"schedule drives E_J to {ratio.min():.3g} E_0; the barrier term must stay positive"
                )

    @classmethod
    def single(cls, amplitude: float, duration: float, center: float | None = None) -> "PulseSchedule":
        return cls((PulseSpec(amplitude, duration, center),))

    @classmethod
    def two_pulse(cls, pulse: PulseSpec, delta_tau: float) -> "PulseSchedule":
        """Two identical pulses whose centers are ``delta_tau`` apart."""
        second = PulseSpec(pulse.amplitude, pulse.duration, pulse.center + delta_tau)
        return cls((pulse, second))

    def ej_ratio(self, tau):
        """E_J(tau) / E_0 (dips of several pulses add)."""
        tau = np.asarray(tau, dtype=float)
        out = np.ones_like(tau)
        for p in self.pulses:
            out = out - p.dip(tau)
        return out


def ej_at(schedule: PulseSchedule, tau, params: PhysicalParams):
    """Josephson energy in Kelvin at time(s) ``tau``."""
    ratio = schedule.ej_ratio(tau)
    return params.e_0 * ratio if ratio.ndim else float(params.e_0 * ratio)


def potential_at(x, ej: float, params: PhysicalParams):
    x = np.asarray(x, dtype=float)
    v = params.e_l * x**2 + ej * np.cos(2.0 * np.pi * x) - params.e_0
    return v if v.ndim else float(v)


def a_critical(params: PhysicalParams) -> float:
    """Pulse amplitude at which the barrier at x = 0 vanishes at the pulse peak.

    Negative when E_L > 2 pi^2 E_0, i.e. there is no barrier even without a pulse.
    """
    return 1.0 - params.e_l / (2.0 * math.pi**2 * params.e_0)


def curvature_at_origin(ej: float, params: PhysicalParams) -> float:
    """V''(0); positive means x = 0 is a local minimum."""
    return 2.0 * params.e_l - 4.0 * math.pi**2 * ej


def tau_to_picoseconds(tau):
    return np.asarray(tau, dtype=float) * PS_PER_TAU if np.ndim(tau) else float(tau) * PS_PER_TAU
