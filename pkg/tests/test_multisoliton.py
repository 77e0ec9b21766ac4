"""Multi-wave ansatz, localizing partition, residuals and diagnostics."""

import numpy as np
import pytest

from ekwaves import EndState, gross_pitaevskii, soliton_profile
from ekwaves.discretization import Grid, norm_h0
from ekwaves.errors import ConfigError, WindowError
from ekwaves.multisoliton import (MultiSolitonConfig, assemble_S,
                                  modified_energy, newton_iterate,
                                  partition_of_unity, residual, smooth_step,
                                  track_parameters)

GP = gross_pitaevskii()
UNIT = EndState(1.0, 0.0)


@pytest.fixture(scope="module")
def waves():
    p1 = soliton_profile(GP, UNIT, 0.6, 80.0, 8193)
    p2 = soliton_profile(GP, UNIT, 0.8, 80.0, 8193)
    return p1, p2


@pytest.fixture(scope="module")
def pair(waves):
    return MultiSolitonConfig(waves=list(waves), offsets=[30.0])


@pytest.fixture(scope="module")
def grid():
    return Grid.periodic_grid(-60.0, 160.0, 2048)


class TestConfig:
    def test_speed_order_enforced(self, waves):
        p1, p2 = waves
        with pytest.raises(ConfigError):
            MultiSolitonConfig(waves=[p2, p1], offsets=[20.0])

    def test_offsets_length(self, waves):
        with pytest.raises(ConfigError):
            MultiSolitonConfig(waves=list(waves), offsets=[])

    def test_derived_quantities(self, pair):
        assert pair.A == 30.0
        assert pair.c0 == pytest.approx(0.1)
        assert pair.midspeeds[0] == pytest.approx(0.7)
        np.testing.assert_allclose(pair.centers(10.0), [6.0, 38.0])

    def test_mismatched_endstate_rejected(self, waves):
        p1, _ = waves
        other = soliton_profile(GP, EndState(2.0, 0.0), 0.9, 60.0, 4097)
        with pytest.raises(ConfigError):
            MultiSolitonConfig(waves=[p1, other], offsets=[20.0])


class TestAssembleS:
    def test_single_wave_is_translated_profile(self, waves, grid):
        p1, _ = waves
        single = MultiSolitonConfig(waves=[p1], offsets=[])
        S = assemble_S(single, 5.0, grid)
        rho_ref, v_ref = p1(grid.x - 0.6 * 5.0)
        assert np.max(np.abs(S.rho - rho_ref)) == 0.0
        assert np.max(np.abs(S.v - v_ref)) == 0.0

    def test_two_wave_minima_near_each_center(self, pair, grid):
        # local minimum of rho near x=0 and x=30 within the tail-overlap
        # bound exp(-alpha A) of each wave's rho_m
        S = assemble_S(pair, 0.0, grid)
        for center, prof in zip((0.0, 30.0), pair.waves):
            sel = np.abs(grid.x - center) < 2.0
            assert abs(np.min(S.rho[sel]) - prof.rho_min) < 1e-7

    def test_separation_grows_kinematically(self, pair, grid):
        # dips sit at c_k t + offsets: separation grows by (c2 - c1) dt
        S5 = assemble_S(pair, 5.0, grid)
        for center, prof in zip((3.0, 34.0), pair.waves):
            sel = np.abs(grid.x - center) < 1.0
            assert abs(np.min(S5.rho[sel]) - prof.rho_min) < 5e-4

    def test_window_error(self, pair, grid):
        with pytest.raises(WindowError):
            assemble_S(pair, 200.0, grid)


class TestPartition:
    def test_smooth_step_properties(self):
        s = np.linspace(-1.0, 1.5, 401)
        val = smooth_step(s)
        assert np.all(val[s <= 0.0] == 0.0)
        assert np.all(val[s >= 0.5] == 1.0)
        assert np.all(np.diff(val) >= -1e-15)

    def test_squares_sum_to_one(self, pair, grid):
        for t in (0.0, 10.0, 50.0):
            g_t = Grid.periodic_grid(-60.0, 300.0, 1024)
            bundle = partition_of_unity(pair, t, g_t)
            total = sum(chi ** 2 for chi in bundle.chi)
            assert np.max(np.abs(total - 1.0)) <= 1e-12

    def test_far_field_assignment(self, pair, grid):
        bundle = partition_of_unity(pair, 0.0, grid)
        assert bundle.chi[0][0] == pytest.approx(1.0, abs=1e-14)
        assert bundle.chi[-1][-1] == pytest.approx(1.0, abs=1e-14)

    def test_three_wave_supports_ordered(self, waves):
        p1, p2 = waves
        p3 = soliton_profile(GP, UNIT, 0.9, 80.0, 8193)
        cfg = MultiSolitonConfig(waves=[p1, p2, p3], offsets=[25.0, 25.0])
        g = Grid.periodic_grid(-60.0, 220.0, 2048)
        bundle = partition_of_unity(cfg, 0.0, g)
        total = sum(chi ** 2 for chi in bundle.chi)
        assert np.max(np.abs(total - 1.0)) <= 1e-12
        # supports ordered left to right: weighted centers increase
        centers = [np.sum(g.x * chi ** 2) / np.sum(chi ** 2)
                   for chi in bundle.chi]
        assert centers[0] < centers[1] < centers[2]

    def test_derivative_bound_scales_inversely_with_A(self, waves):
        p1, p2 = waves
        sups = []
        for A in (20.0, 40.0, 80.0):
            cfg = MultiSolitonConfig(waves=[p1, p2], offsets=[A])
            g = Grid.periodic_grid(-60.0, 120.0 + 2 * A, 4096)
            bundle = partition_of_unity(cfg, 0.0, g)
            dchi = np.max(np.abs(np.diff(bundle.chi[0]) / g.h))
            sups.append(dchi * A)
        # a single constant bounds sup|dchi/dx| * A across separations
        assert max(sups) / min(sups) < 1.6

    def test_offsets_too_small(self, waves):
        # with three waves the middle cutoff collapses once the bounding
        # ramps cross, which happens at negative times for small offsets
        p1, p2 = waves
        p3 = soliton_profile(GP, UNIT, 0.9, 80.0, 8193)
        cfg = MultiSolitonConfig(waves=[p1, p2, p3], offsets=[2.0, 2.0])
        g = Grid.periodic_grid(-120.0, 300.0, 512)
        with pytest.raises(ConfigError):
            partition_of_unity(cfg, -60.0, g)


class TestResidual:
    def test_constant_state_zero(self, grid):
        from ekwaves.discretization import FieldState
        def provider(t):
            return FieldState(np.ones(grid.n), np.zeros(grid.n), t)
        res = residual(GP, provider, 0.0, grid)
        assert res.norm < 1e-12

    def test_single_wave_floor_small(self, waves, grid):
        p1, _ = waves
        single = MultiSolitonConfig(waves=[p1], offsets=[])
        res = residual(GP, lambda t: assemble_S(single, t, grid), 0.0, grid,
                       dt_fd=1e-4)
        assert res.norm < 1e-4          # h^4 truncation at this resolution

    def test_overlap_residual_decays_with_A(self, waves):
        p1, p2 = waves
        norms = []
        for A in (12.0, 18.0, 24.0):
            cfg = MultiSolitonConfig(waves=[p1, p2], offsets=[A])
            g = Grid.periodic_grid(-60.0, 160.0, 4096)
            res = residual(GP, lambda t: assemble_S(cfg, t, g), 0.0, g,
                           dt_fd=1e-4)
            norms.append(res.norm)
        # exponential decay in the separation
        assert norms[1] < 0.25 * norms[0]
        assert norms[2] < 0.25 * norms[1]


class TestTrackAndEnergy:
    def test_zero_field(self, pair, grid):
        z = np.zeros(grid.n)
        recs = track_parameters((z, z), pair, 0.0, grid)
        assert all(r.alpha == 0.0 and r.beta == 0.0 for r in recs)
        assert modified_energy(GP, (z, z), pair, 0.0, grid) == 0.0

    def test_translation_mode_of_one_wave(self, pair, grid):
        from ekwaves.discretization import dx
        rho, v = pair.waves[1](grid.x - 30.0)
        U = (dx(rho, grid, 4), dx(v, grid, 4))
        recs = track_parameters(U, pair, 0.0, grid)
        assert recs[1].beta == pytest.approx(1.0, abs=1e-2)
        assert abs(recs[0].beta) < 1e-2
        assert abs(recs[0].alpha) < 1e-2

    def test_partition_norm_bounds(self, pair, grid):
        rng = np.random.default_rng(0)
        r = rng.standard_normal(grid.n)
        u = rng.standard_normal(grid.n)
        bundle = partition_of_unity(pair, 0.0, grid)
        total = sum(float(np.sum(grid.weights * ((chi * r) ** 2 + (chi * u) ** 2)))
                    for chi in bundle.chi)
        full = float(np.sum(grid.weights * (r * r + u * u)))
        assert total <= full * (1.0 + 1e-10)
        assert total >= 0.5 * full  # partition squares sum to one exactly

    def test_single_wave_energy_reduces_to_comoving_form(self, waves, grid):
        from ekwaves.discretization import apply_d2H
        p1, _ = waves
        single = MultiSolitonConfig(waves=[p1], offsets=[])
        rng = np.random.default_rng(1)
        r = rng.standard_normal(grid.n)
        u = rng.standard_normal(grid.n)
        S = assemble_S(single, 0.0, grid)
        m1, m2 = apply_d2H(GP, S, (r, u), grid)
        expected = float(np.sum(grid.weights * (m1 * r + m2 * u))
                         - 0.6 * 2.0 * np.sum(grid.weights * r * u))
        got = modified_energy(GP, (r, u), single, 0.0, grid)
        assert abs(got - expected) <= 1e-10 * max(1.0, abs(expected))


class TestNewtonSmoke:
    def test_single_wave_stops_at_floor(self, waves):
        p1, _ = waves
        single = MultiSolitonConfig(waves=[p1], offsets=[])
        g = Grid.periodic_grid(-60.0, 160.0, 1024)
        sol = newton_iterate(GP, single, g, 2.0, k_iters=2, store_stride=0.25)
        assert sol.stopped_at_floor
        assert len(sol.eta_list) == 0
        assert len(sol.residual_history) == 1

    def test_residual_threshold_guard(self, waves):
        p1, p2 = waves
        cfg = MultiSolitonConfig(waves=[p1, p2], offsets=[8.0])
        g = Grid.periodic_grid(-60.0, 160.0, 1024)
        with pytest.raises(ConfigError):
            newton_iterate(GP, cfg, g, 2.0, k_iters=1, f0_max=1e-4)

    def test_two_wave_contraction_coarse(self, waves):
        """One backward sweep sharply reduces a well-separated residual."""
        p1, p2 = waves
        cfg = MultiSolitonConfig(waves=[p1, p2], offsets=[16.0])
        g = Grid.periodic_grid(-60.0, 160.0, 8192)
        sol = newton_iterate(GP, cfg, g, 2.0, k_iters=1, store_stride=0.1,
                             dt_fd=1e-4)
        sups = sol.sup_residuals()
        assert len(sups) == 2
        assert sups[1] < 0.1 * sups[0]
        # residual history decreasing in t for the correction pass
        assert sol.residual_history[1][-1] <= sol.residual_history[1][0]
