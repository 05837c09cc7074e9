"""Euler solver: initial conditions, tendency oracles, RK4 stepping."""

import numpy as np
import pytest

from eulerscope.errors import ConfigurationError, NumericalInstabilityError
from eulerscope.solver import (
    InitialCondition,
    SolverState,
    cfl_dt,
    energy_input,
    helicity,
    kinetic_energy,
    make_initial,
    max_velocity,
    rhs,
    step,
)
from eulerscope.spectral import (
    GridSpec,
    curl,
    divergence_defect,
    inverse,
)


def tg(grid, amplitude=1.0):
    return make_initial(InitialCondition("taylor_green", amplitude=amplitude), grid)


def abc(grid, a=1.0, b=1.0, c=1.0):
    return make_initial(InitialCondition("abc", a=a, b=b, c=c), grid)


def shear(grid):
    return make_initial(InitialCondition("shear"), grid)


class TestInitialConditions:
    def test_abc_is_beltrami(self):
        # curl u = u for the unit-coefficient case
        grid = GridSpec(16)
        u_hat = abc(grid)
        w = inverse(curl(u_hat))
        u = inverse(u_hat)
        assert np.abs(w.data - u.data).max() <= 1e-12

    def test_taylor_green_divergence_and_energy(self):
        grid = GridSpec(32)
        u_hat = tg(grid, amplitude=1.5)
        assert divergence_defect(u_hat) <= 1e-12
        # oracle: direct summation of the closed-form samples
        x, y, z = grid.mesh()
        u1 = 1.5 * np.cos(x) * np.sin(y) * np.sin(z)
        u2 = -1.5 * np.sin(x) * np.cos(y) * np.sin(z)
        e_direct = 0.5 * (u1 ** 2 + u2 ** 2).mean()
        assert kinetic_energy(u_hat) == pytest.approx(e_direct, rel=1e-12)

    def test_random_solenoidal_is_deterministic(self):
        grid = GridSpec(16)
        ic = InitialCondition("random_solenoidal", seed=7)
        a = make_initial(ic, grid)
        b = make_initial(ic, grid)
        assert np.array_equal(a.data, b.data)
        assert divergence_defect(a) <= 1e-12

    def test_random_solenoidal_band_limited(self):
        grid = GridSpec(16)
        u_hat = make_initial(InitialCondition("random_solenoidal", seed=3), grid)
        cutoff = grid.dealias_cutoff
        kx, ky, kz = grid.k
        outside = (np.abs(kx) > cutoff) | (np.abs(ky) > cutoff) | (np.abs(kz) > cutoff)
        assert np.abs(u_hat.data[:, outside]).max() == 0.0

    def test_band_violation_rejected(self):
        grid = GridSpec(16)  # cutoff floor(16/3) = 5
        with pytest.raises(ConfigurationError):
            make_initial(InitialCondition("shear", shear_modes=(6,), shear_amps=(1.0,)), grid)
        with pytest.raises(ConfigurationError):
            make_initial(InitialCondition("random_solenoidal", k_max=6), grid)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigurationError):
            make_initial(InitialCondition("vortex_ring"), GridSpec(8))


class TestTendency:
    def test_beltrami_tendency_projects_to_zero(self):
        # (u . grad) u is a pure gradient when u is parallel to its curl
        grid = GridSpec(16)
        u_hat = abc(grid)
        t = rhs(u_hat)
        umax = max_velocity(u_hat)
        assert max_velocity(t) <= 1e-10 * umax ** 2

    def test_shear_tendency_exactly_zero(self):
        grid = GridSpec(16)
        t = rhs(shear(grid))
        assert np.abs(t.data).max() == 0.0

    def test_taylor_green_energy_neutral(self):
        grid = GridSpec(32)
        u_hat = tg(grid)
        t = rhs(u_hat)
        assert np.abs(t.data).max() > 0.0
        e_in = energy_input(u_hat, t)
        scale = kinetic_energy(u_hat) * max_velocity(t)
        assert abs(e_in) <= 1e-12 * max(scale, 1.0)

    def test_energy_neutral_on_random_state(self):
        grid = GridSpec(16)
        u_hat = make_initial(InitialCondition("random_solenoidal", seed=11), grid)
        assert abs(energy_input(u_hat, rhs(u_hat))) <= 1e-12


class TestCflDt:
    def test_direct_formula(self):
        grid = GridSpec(64)
        u_hat = tg(grid)  # max |u| = 1 on the Taylor-Green lattice
        dt = cfl_dt(u_hat, 0.5)
        assert dt == pytest.approx(0.5 * (2 * np.pi / 64), rel=1e-12)

    def test_zero_velocity_hits_floor_and_cap(self):
        grid = GridSpec(8)
        zero = tg(grid, amplitude=0.0)
        assert cfl_dt(zero, 0.5, dt_max=10.0) == 10.0
        assert cfl_dt(zero, 0.5) == pytest.approx(0.5 * grid.h / 1e-12)

    def test_doubling_n_halves_dt(self):
        dt32 = cfl_dt(tg(GridSpec(32)), 0.4)
        dt64 = cfl_dt(tg(GridSpec(64)), 0.4)
        assert dt64 == pytest.approx(dt32 / 2, rel=1e-10)

    def test_bad_cfl_rejected(self):
        grid = GridSpec(8)
        with pytest.raises(ConfigurationError):
            cfl_dt(tg(grid), 0.0)
        with pytest.raises(ConfigurationError):
            cfl_dt(tg(grid), 1.5)


class TestStep:
    def test_shear_is_a_fixed_point(self):
        grid = GridSpec(16)
        state = SolverState(u_hat=shear(grid))
        new = step(state, 0.05)
        assert new.t == pytest.approx(0.05)
        assert new.step_index == 1
        assert np.abs(new.u_hat.data - state.u_hat.data).max() <= 1e-15

    def test_abc_steady_over_100_steps(self):
        grid = GridSpec(32)
        state = SolverState(u_hat=abc(grid))
        u0 = inverse(state.u_hat)
        for _ in range(100):
            state = step(state, 0.01)
        u = inverse(state.u_hat)
        drift = np.abs(u.data - u0.data).max()
        assert drift <= 1e-8 * np.abs(u0.data).max()

    def test_divergence_preserved_many_steps(self):
        grid = GridSpec(16)
        state = SolverState(u_hat=tg(grid))
        for _ in range(20):
            state = step(state, 0.02)
        assert divergence_defect(state.u_hat) <= 1e-10

    def test_temporal_order_at_least_3p8(self):
        grid = GridSpec(32)
        u0 = tg(grid)

        def advance(dt, nsteps):
            s = SolverState(u_hat=u0)
            for _ in range(nsteps):
                s = step(s, dt)
            return s.u_hat.data

        u_a = advance(0.05, 10)
        u_b = advance(0.025, 20)
        u_c = advance(0.0125, 40)
        e1 = np.abs(u_a - u_b).max()
        e2 = np.abs(u_b - u_c).max()
        order = np.log2(e1 / e2)
        assert order >= 3.8

    def test_instability_abort(self):
        grid = GridSpec(16)
        state = SolverState(u_hat=tg(grid))
        umax0 = max_velocity(state.u_hat)
        with pytest.raises(NumericalInstabilityError):
            for _ in range(50):
                state = step(state, 5.0, umax_abort=1e3 * umax0)

    def test_nonpositive_dt_rejected(self):
        state = SolverState(u_hat=tg(GridSpec(8)))
        with pytest.raises(ConfigurationError):
            step(state, 0.0)


class TestConservation:
    def test_energy_drift_small_on_taylor_green(self):
        grid = GridSpec(32)
        state = SolverState(u_hat=tg(grid))
        e0 = kinetic_energy(state.u_hat)
        for _ in range(20):
            state = step(state, 0.02)
        assert abs(kinetic_energy(state.u_hat) - e0) / e0 <= 1e-8

    def test_helicity_drift_small(self):
        grid = GridSpec(16)
        ic = InitialCondition("random_solenoidal", seed=5)
        state = SolverState(u_hat=make_initial(ic, grid))
        h0 = helicity(state.u_hat)
        e0 = kinetic_energy(state.u_hat)
        for _ in range(20):
            state = step(state, 0.01)
        assert abs(helicity(state.u_hat) - h0) <= 1e-6 * max(abs(h0), e0)
