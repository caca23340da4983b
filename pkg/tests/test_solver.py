import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import solve_banded

from fluxpulse import _kernels
from fluxpulse.errors import NumericalError
from fluxpulse.model import PhysicalParams, PulseSchedule
from fluxpulse.solver import (
    Grid,
    WaveFunction,
    apply_hamiltonian,
    expectation_energy,
    gaussian_guess,
    localized_basis,
    lowest_eigenpairs,
    project_lr_basis,
    relax_ground,
    step_real,
)

P = PhysicalParams()
GRID = Grid()
HARMONIC_E0 = math.sqrt(P.e_c * P.e_l) / math.pi  # ground energy above -E_0 with E_J = 0
HARMONIC_SPACING = 2 * HARMONIC_E0


@pytest.fixture(scope="module")
def spectrum():
    return lowest_eigenpairs(GRID, P.e_0, P, k=4)


@pytest.fixture(scope="module")
def ground():
    return relax_ground(GRID, P)


class TestGrid:
    def test_symmetric_and_contains_origin(self):
        x = GRID.x
        assert x[GRID.center] == 0.0
        np.testing.assert_array_equal(x, -x[::-1])
        assert x[0] == -0.75 and x[-1] == 0.75
        assert np.diff(x) == pytest.approx(GRID.dx, rel=1e-12)

    @pytest.mark.parametrize("kwargs", [dict(n_points=1024), dict(n_points=63), dict(x_max=0.5)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Grid(**kwargs)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 40), seed=st.integers(0, 2**32 - 1))
def test_thomas_matches_banded_solver(n, seed):
    rng = np.random.default_rng(seed)
    c = lambda size: rng.normal(size=size) + 1j * rng.normal(size=size)  # noqa: E731
    lower, upper, rhs = c(n - 1), c(n - 1), c(n)
    diag = c(n) + 4.0  # diagonally dominant, no pivoting needed
    ab = np.zeros((3, n), complex)
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    np.testing.assert_allclose(_kernels.thomas_solve(lower, diag, upper, rhs),
                               solve_banded((1, 1), ab, rhs), rtol=1e-10, atol=1e-12)


def test_kinetic_term_annihilates_constants():
    psi = np.ones(GRID.n_points, complex)
    zeros = np.zeros(GRID.n_points)
    out = _kernels.apply_h(psi, zeros, zeros, 123.0, 0.0)
    np.testing.assert_array_equal(out[1:-1], 0.0)
    # Dirichlet ends see a missing neighbour
    assert out[0] == 123.0 and out[-1] == 123.0


def test_apply_hamiltonian_matches_dense_matrix():
    grid = Grid(0.75, 65)
    rng = np.random.default_rng(3)
    psi = WaveFunction(rng.normal(size=65) + 1j * rng.normal(size=65), grid)
    kin = P.kinetic_coefficient / grid.dx**2
    v = P.e_l * grid.x**2 + 50.0 * np.cos(2 * np.pi * grid.x) - P.e_0
    h = np.diag(v + 2 * kin) - kin * (np.eye(65, k=1) + np.eye(65, k=-1))
    np.testing.assert_allclose(apply_hamiltonian(psi, 50.0, P).amplitudes, h @ psi.amplitudes, rtol=1e-12)


def test_normalize():
    psi = WaveFunction(np.exp(-GRID.x**2 / 0.01) * 3.7, GRID).normalized()
    assert abs(psi.norm() - 1.0) <= 1e-12


class TestStepReal:
    sched = PulseSchedule.single(0.59, 5.0)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), tau=st.floats(0.0, 40.0))
    def test_unitary(self, seed, tau):
        rng = np.random.default_rng(seed)
        psi = WaveFunction(rng.normal(size=GRID.n_points) + 1j * rng.normal(size=GRID.n_points), GRID)
        psi = psi.normalized()
        out = step_real(psi, tau, 0.002, self.sched, P)
        assert abs(out.norm() - psi.norm()) <= 1e-12

    def test_eigenstate_only_rotates_phase(self, spectrum):
        psi = spectrum.states[2]
        energy = spectrum.energies[2]
        d_tau = 0.002
        constant = PulseSchedule.single(0.0, 5.0)
        out = step_real(psi, 0.0, d_tau, constant, P)
        a, b = psi.amplitudes, out.amplitudes
        np.testing.assert_allclose(np.abs(b), np.abs(a), atol=1e-10)
        big = np.abs(a) > 1e-3 * np.abs(a).max()
        ratio = b[big] / a[big]
        cayley = (1 - 0.5j * energy * d_tau) / (1 + 0.5j * energy * d_tau)
        np.testing.assert_allclose(ratio, cayley, atol=1e-10)
        np.testing.assert_allclose(ratio, np.exp(-1j * energy * d_tau), atol=1e-4)

    def test_rejects_bad_step(self, spectrum):
        with pytest.raises(ValueError):
            step_real(spectrum.states[0], 0.0, 0.0, self.sched, P)


def test_free_gaussian_spreads_per_analytic_law():
    # V = 0: <x^2>(t) = s0^2 + (t / (2 m s0))^2 with m = pi^2 / (2 E_C); short
    # times keep the packet well away from the walls
    grid = Grid(0.75, 1025)
    s0 = 0.03
    mass = P.mass
    psi = np.exp(-grid.x**2 / (4 * s0**2)).astype(complex)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    zeros = np.zeros(grid.n_points)
    kin = P.kinetic_coefficient / grid.dx**2
    d_tau = 0.002
    tau = 0.0
    for target in (1.0, 2.0, 3.0):
        steps = int(round((target - tau) / d_tau))
        _kernels.cn_steps(psi, zeros, zeros, kin, np.zeros(steps), 0.5j * d_tau)
        tau = target
        width_sq = np.sum(grid.x**2 * np.abs(psi) ** 2) * grid.dx
        expected = s0**2 + (tau / (2 * mass * s0)) ** 2
        assert width_sq == pytest.approx(expected, rel=1e-3)


class TestRelax:
    def test_ground_energy(self, ground):
        _, energy, _ = ground
        assert energy == pytest.approx(-41.1, rel=0.02)

    def test_harmonic_limit(self):
        _, energy, _ = relax_ground(GRID, P, ej=0.0)
        assert energy + P.e_0 == pytest.approx(HARMONIC_E0, rel=5e-3)
        assert HARMONIC_E0 == pytest.approx(0.767, abs=5e-4)

    def test_fixed_point(self, ground):
        psi, energy, _ = ground
        again, energy2, steps = relax_ground(GRID, P, initial=psi)
        assert steps <= 3
        assert abs(energy2 - energy) < 1e-9

    def test_symmetric_result(self, ground):
        psi, _, _ = ground
        np.testing.assert_allclose(psi.amplitudes, psi.amplitudes[::-1], atol=1e-10)
        assert abs(psi.norm() - 1) < 1e-12

    def test_nonconvergence_reports_energy(self):
        with pytest.raises(NumericalError) as info:
            relax_ground(GRID, P, max_steps=3)
        assert math.isfinite(info.value.diagnostics["energy"])

    def test_rejects_bad_tol(self):
        with pytest.raises(ValueError):
            relax_ground(GRID, P, tol=0.0)


class TestEigenpairs:
    def test_single_state_matches_relaxation(self, ground):
        _, energy, _ = ground
        spec = lowest_eigenpairs(GRID, P.e_0, P, k=1)
        assert abs(spec.energies[0] - energy) <= 10 * 1e-9
        assert math.isnan(spec.omega)

    def test_harmonic_spacing(self):
        spec = lowest_eigenpairs(GRID, 0.0, P, k=6)
        levels = spec.energies + P.e_0
        np.testing.assert_allclose(levels, HARMONIC_SPACING * (np.arange(6) + 0.5), rtol=5e-3)
        np.testing.assert_allclose(np.diff(spec.energies), 1.534, rtol=5e-3)

    def test_orthonormal_with_small_residual(self, spectrum):
        states = spectrum.states
        for i, a in enumerate(states):
            for j, b in enumerate(states):
                assert abs(a.inner(b) - (i == j)) <= 1e-8
            r = apply_hamiltonian(a, P.e_0, P).amplitudes - spectrum.energies[i] * a.amplitudes
            assert math.sqrt(np.sum(np.abs(r) ** 2) * GRID.dx) <= 1e-6 * abs(spectrum.energies[i])

    def test_definite_parity(self, spectrum):
        for i, s in enumerate(spectrum.states):
            a = s.amplitudes
            sym = np.max(np.abs(a - a[::-1]))
            anti = np.max(np.abs(a + a[::-1]))
            assert min(sym, anti) < 1e-12

    def test_tunnel_splitting_is_tiny(self, spectrum):
        e = spectrum.energies
        assert e[1] - e[0] < 1e-6 * spectrum.omega
        assert spectrum.omega == pytest.approx(2.2, abs=0.05)

    @pytest.mark.parametrize("k", [0, 9])
    def test_k_range(self, k):
        with pytest.raises(ValueError):
            lowest_eigenpairs(GRID, P.e_0, P, k=k)


class TestLRBasis:
    def test_localized_basis_sits_in_its_well(self, spectrum):
        l0, l1, r0, r1 = localized_basis(spectrum)
        w = GRID.left_weights()
        for state in (l0, l1):
            assert np.sum(w * np.abs(state.amplitudes) ** 2) * GRID.dx > 0.999
        for state in (r0, r1):
            assert np.sum(w * np.abs(state.amplitudes) ** 2) * GRID.dx < 0.001

    def test_projecting_basis_state(self, spectrum):
        l0 = localized_basis(spectrum)[0]
        d = project_lr_basis(l0, spectrum)
        assert abs(d.c_l0 - 1) < 1e-8
        assert max(abs(d.c_l1), abs(d.c_r0), abs(d.c_r1), d.residual_weight) < 1e-8

    def test_projecting_ground_state(self, spectrum):
        d = project_lr_basis(spectrum.states[0], spectrum)
        assert abs(d.c_l0) ** 2 == pytest.approx(0.5, abs=1e-8)
        assert abs(d.c_r0) ** 2 == pytest.approx(0.5, abs=1e-8)

    def test_needs_four_states(self):
        with pytest.raises(ValueError):
            project_lr_basis(gaussian_guess(GRID), lowest_eigenpairs(GRID, P.e_0, P, k=2))


@pytest.fixture(scope="module")
def post_pulse_state():
    from fluxpulse.protocols import RunConfig, run_single_pulse

    res = run_single_pulse(RunConfig(sample_every=10**6), keep_samples=False)
    return res.final_state


class TestPostPulseProjection:
    def test_weights_account_for_norm(self, spectrum, post_pulse_state):
        d = project_lr_basis(post_pulse_state, spectrum)
        total = sum(abs(c) ** 2 for c in (d.c_l0, d.c_l1, d.c_r0, d.c_r1)) + d.residual_weight
        assert total == pytest.approx(post_pulse_state.norm() ** 2, abs=1e-10)
        # the transferred state sits mostly in the right-well ground state
        assert abs(d.c_r0) ** 2 > 0.8
        assert abs(d.c_l0) ** 2 + abs(d.c_l1) ** 2 < 0.01

    @pytest.mark.xfail(strict=True, reason="about 0.126 of the weight sits above the lowest two levels per well")
    def test_residual_below_tenth(self, spectrum, post_pulse_state):
        assert project_lr_basis(post_pulse_state, spectrum).residual_weight < 0.1
