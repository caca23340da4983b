import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fluxpulse.model import (
    PhysicalParams,
    PulseSchedule,
    PulseSpec,
    a_critical,
    curvature_at_origin,
    ej_at,
    potential_at,
    tau_to_picoseconds,
)

P = PhysicalParams()


def test_default_params():
    assert (P.e_c, P.e_l, P.e_0) == (0.009, 645.0, 76.0)


@pytest.mark.parametrize("field", ["e_c", "e_l", "e_0"])
@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_params_reject_nonpositive(field, bad):
    with pytest.raises(ValueError, match=field):
        PhysicalParams(**{field: bad})


class TestPulse:
    def test_default_center_is_four_durations(self):
        assert PulseSpec(0.59, 5.0).center == 20.0

    @pytest.mark.parametrize("kwargs", [
        dict(amplitude=1.2, duration=5.0),
        dict(amplitude=-0.1, duration=5.0),
        dict(amplitude=0.5, duration=0.0),
        dict(amplitude=0.5, duration=5.0, center=17.0),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            PulseSpec(**kwargs)

    def test_schedule_sorted_and_end_time(self):
        late = PulseSpec(0.3, 2.0, 40.0)
        early = PulseSpec(0.3, 2.0, 10.0)
        sched = PulseSchedule((late, early))
        assert [p.center for p in sched.pulses] == [10.0, 40.0]
        assert sched.total_time == pytest.approx(48.0)

    def test_overlapping_pulses_that_kill_the_barrier_are_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            PulseSchedule((PulseSpec(0.6, 5.0, 20.0), PulseSpec(0.6, 5.0, 21.0)))

    def test_full_amplitude_rejected(self):
        with pytest.raises(ValueError):
            PulseSchedule.single(1.0, 5.0)


class TestEj:
    sched = PulseSchedule.single(0.59, 5.0)

    def test_peak(self):
        assert ej_at(self.sched, 20.0, P) == pytest.approx(0.41 * 76, abs=1e-12)
        assert ej_at(self.sched, 20.0, P) == pytest.approx(31.16)

    def test_tails(self):
        assert ej_at(self.sched, 1e4, P) == 76.0
        assert ej_at(self.sched, -1e4, P) == 76.0

    def test_one_width_off_peak(self):
        assert ej_at(self.sched, 25.0, P) == pytest.approx(76 * (1 - 0.59 / math.e), rel=1e-14)
        assert ej_at(self.sched, 25.0, P) == pytest.approx(59.50, abs=5e-3)

    def test_two_pulse_dips_superpose(self):
        pulse = PulseSpec(0.4, 3.0)
        two = PulseSchedule.two_pulse(pulse, 9.0)
        tau = np.linspace(0, 40, 101)
        one_a = PulseSchedule((pulse,)).ej_ratio(tau) - 1
        one_b = PulseSchedule((PulseSpec(0.4, 3.0, pulse.center + 9.0),)).ej_ratio(tau) - 1
        np.testing.assert_allclose(two.ej_ratio(tau) - 1, one_a + one_b, atol=1e-15)

    def test_vectorized(self):
        tau = np.array([0.0, 20.0])
        out = ej_at(self.sched, tau, P)
        assert out.shape == (2,)


class TestPotential:
    def test_barrier_top_is_zero(self):
        assert potential_at(0.0, P.e_0, P) == 0.0

    def test_half_flux(self):
        assert potential_at(0.5, P.e_0, P) == pytest.approx(645 * 0.25 - 152, abs=1e-12)
        assert potential_at(0.5, P.e_0, P) == pytest.approx(9.25, abs=1e-12)

    def test_well_minimum_by_bisection(self):
        # root of V'(x) = 2 E_L x - 2 pi E_J sin(2 pi x) on (0.1, 0.5), by bisection
        def dv(x):
            return 2 * P.e_l * x - 2 * math.pi * P.e_0 * math.sin(2 * math.pi * x)

        lo, hi = 0.1, 0.5
        assert dv(lo) < 0 < dv(hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if dv(mid) < 0 else (lo, mid)
        x_min = 0.5 * (lo + hi)
        assert x_min == pytest.approx(0.32, abs=0.01)
        v_min = potential_at(x_min, P.e_0, P)
        assert v_min < 0
        h = 1e-4
        assert potential_at(x_min - h, P.e_0, P) > v_min
        assert potential_at(x_min + h, P.e_0, P) > v_min

    @settings(max_examples=200, deadline=None)
    @given(x=st.floats(-1.0, 1.0), ej=st.floats(0.0, 200.0))
    def test_even(self, x, ej):
        assert abs(potential_at(x, ej, P) - potential_at(-x, ej, P)) <= 1e-12


class TestCriticalAmplitude:
    def test_defaults(self):
        assert abs(a_critical(P) - 0.57) < 5e-4

    def test_no_inductive_term(self):
        assert a_critical(SimpleNamespace(e_l=0.0, e_0=76.0)) == 1.0

    def test_zero_at_balance(self):
        p = PhysicalParams(e_l=2 * math.pi**2 * 76.0)
        assert a_critical(p) == pytest.approx(0.0, abs=1e-15)

    def test_negative_without_barrier(self):
        assert a_critical(PhysicalParams(e_l=3000.0)) < 0

    @settings(max_examples=100, deadline=None)
    @given(offset=st.floats(0.005, 0.3))
    def test_curvature_sign_flip(self, offset):
        a_cr = a_critical(P)
        h = 1e-4

        def fd_curvature(amplitude):
            ej = P.e_0 * (1 - amplitude)
            return (potential_at(h, ej, P) - 2 * potential_at(0.0, ej, P) + potential_at(-h, ej, P)) / h**2

        above, below = min(a_cr + offset, 1.0), a_cr - offset
        assert curvature_at_origin(P.e_0 * (1 - above), P) > 0
        assert curvature_at_origin(P.e_0 * (1 - below), P) < 0
        assert fd_curvature(above) > 0 and fd_curvature(below) < 0


@settings(max_examples=100, deadline=None)
@given(
    amplitude=st.floats(0.0, 0.95),
    duration=st.floats(0.5, 50.0),
    extra=st.floats(0.0, 5.0),
)
def test_initial_barrier_is_unperturbed(amplitude, duration, extra):
    sched = PulseSchedule.single(amplitude, duration, (3.5 + extra) * duration)
    assert ej_at(sched, 0.0, P) / P.e_0 >= 1 - math.exp(-12)


@pytest.mark.parametrize("tau,ps", [(1.0, 7.64), (0.0, 0.0), (5.0, 38.2)])
def test_picoseconds(tau, ps):
    assert tau_to_picoseconds(tau) == pytest.approx(ps, abs=1e-12)
