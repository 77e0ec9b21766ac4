"""Traveling-wave construction against closed-form and brute-force oracles.

The cubic pressure law gives an exact tanh kink between densities 1 and 3;
the unit-background model with K = 1/rho gives bubbles whose minimum
density equals c^2 exactly (factorization of the profile quadrature).
"""

import numpy as np
import pytest

import ekwaves
from ekwaves import (EndState, cubic_vdw, first_integrals, gross_pitaevskii,
                     kink_conditions, kink_manifold_rank, kink_profile,
                     saddle_check, solve_kink_endstates, soliton_min_density,
                     soliton_profile, transonic_family)
from ekwaves.errors import (ConfigError, NoKinkFoundError, NoSolitonError,
                            PreconditionError)
from ekwaves.profiles import TravelingWaveSpec

GP = gross_pitaevskii()
CUBIC = cubic_vdw()
UNIT = EndState(rho=1.0, v=0.0)


def gp_exact_soliton(c, x):
    kap = np.sqrt(1.0 - c * c)
    return 1.0 - kap * kap / np.cosh(kap * x / 2.0) ** 2


class TestFirstIntegrals:
    def test_gp_direct_substitution(self):
        j, q = first_integrals(GP, UNIT, 0.5)
        assert j == -0.5
        assert q == 0.125

    def test_cubic_zero_flux(self):
        j, q = first_integrals(CUBIC, EndState(3.0, 0.0), 0.0)
        assert j == 0.0
        assert abs(q - CUBIC.g(3.0)) < 1e-14

    def test_gp_sonic_boundary(self):
        j, q = first_integrals(GP, UNIT, 1.0)
        assert j == -1.0
        assert q == 0.5


class TestKinkConditions:
    def test_cubic_maxwell_pair(self):
        rep = kink_conditions(CUBIC, 1.0, 3.0, j=0.0, q=0.0)
        assert abs(rep.f_minus) < 1e-14
        assert abs(rep.f_plus) < 1e-14
        assert abs(rep.area) < 1e-12
        assert rep.cond_j_minus and rep.cond_j_plus
        assert rep.sign_changes == 1

    def test_cubic_violated_endstate(self):
        rep = kink_conditions(CUBIC, 1.0, 2.5, j=0.0, q=0.0)
        assert abs(rep.f_plus - CUBIC.g(2.5)) < 1e-14
        assert abs(rep.f_plus + 0.375) < 1e-14

    def test_gp_no_root(self):
        # f(1/2) = (1/4)/(2/4) - 1/8 + (1/2 - 1) = -1/8: no kink available
        rep = kink_conditions(GP, 0.5, 1.0, j=-0.5, q=0.125)
        assert abs(rep.f_minus - (-0.125)) < 1e-14
        assert abs(rep.f_minus) > 1e-3


class TestSolveKinkEndstates:
    def test_cubic_maxwell_construction(self):
        spec = solve_kink_endstates(CUBIC, 0.0, (1.1, 2.9, 0.0))
        assert abs(spec.left.rho - 1.0) < 1e-9
        assert abs(spec.right.rho - 3.0) < 1e-9
        assert abs(spec.j) < 1e-12
        assert abs(spec.q) < 1e-9
        rep = kink_conditions(CUBIC, spec.left.rho, spec.right.rho,
                              spec.j, spec.q)
        assert abs(rep.area) < 1e-10

    def test_collapse_to_trivial_root(self):
        with pytest.raises(NoKinkFoundError):
            solve_kink_endstates(CUBIC, 0.0, (2.4, 2.6, 0.0))

    def test_gp_monotone_g_has_no_kink(self):
        with pytest.raises(NoKinkFoundError):
            solve_kink_endstates(GP, 0.5, (0.5, 1.5, 0.0))


class TestKinkProfile:
    @pytest.fixture(scope="class")
    def cubic_kink(self):
        spec = solve_kink_endstates(CUBIC, 0.0, (1.1, 2.9, 0.0))
        return kink_profile(CUBIC, spec, 20.0, 4097)

    def test_tanh_oracle(self, cubic_kink):
        # F = (rho-1)^2 (rho-3)^2 / 4 integrates to rho = 2 + tanh(x/sqrt 2)
        exact = 2.0 + np.tanh(cubic_kink.xi / np.sqrt(2.0))
        assert np.max(np.abs(cubic_kink.rho - exact)) <= 1e-6

    def test_centering(self, cubic_kink):
        assert cubic_kink.rho[2048] == pytest.approx(2.0, abs=1e-12)

    def test_zero_flux_velocity(self, cubic_kink):
        assert np.max(np.abs(cubic_kink.v)) < 1e-12

    def test_monotone(self, cubic_kink):
        assert np.all(np.diff(cubic_kink.rho) > -1e-14)

    def test_saddle_rates_recorded(self, cubic_kink):
        lam_p, _ = saddle_check(CUBIC, 3.0, 0.0)
        assert cubic_kink.tail_rate_right == pytest.approx(lam_p, abs=1e-10)


class TestSolitonMinDensity:
    @pytest.mark.parametrize("c", [0.3, 0.6, 0.9])
    def test_gp_factorization(self, c):
        # F = (rho-1)^2 (rho-c^2) / (2 rho) has its largest root at c^2
        assert abs(soliton_min_density(GP, UNIT, c) - c * c) <= 1e-10

    def test_sonic_limit(self):
        rm = soliton_min_density(GP, UNIT, 0.999)
        assert abs(rm - 0.999 ** 2) < 1e-9

    def test_supersonic_rejected(self):
        with pytest.raises(PreconditionError):
            soliton_min_density(GP, UNIT, 1.2)


class TestSolitonProfile:
    @pytest.fixture(scope="class")
    def gp_soliton(self):
        return soliton_profile(GP, UNIT, 0.6, 40.0, 8193)

    def test_minimum_at_origin(self, gp_soliton):
        assert gp_soliton.rho[4096] == pytest.approx(0.36, abs=1e-10)
        assert gp_soliton.rho_min == pytest.approx(0.36, abs=1e-10)

    def test_evenness_exact(self, gp_soliton):
        assert np.max(np.abs(gp_soliton.rho - gp_soliton.rho[::-1])) <= 1e-12

    def test_closed_form(self, gp_soliton):
        exact = gp_exact_soliton(0.6, gp_soliton.xi)
        assert np.max(np.abs(gp_soliton.rho - exact)) < 1e-9

    def test_ode_residual(self, gp_soliton):
        assert gp_soliton.ode_residual <= 1e-8

    def test_velocity_relation_machine_exact(self, gp_soliton):
        j = gp_soliton.spec.j
        recon = 0.6 + j / gp_soliton.rho
        assert np.max(np.abs(gp_soliton.v - recon)) == 0.0

    def test_exponential_approach(self, gp_soliton):
        assert abs(gp_soliton.rho[-1] - 1.0) < 1e-10

    def test_degenerate_sonic_rejected(self):
        with pytest.raises((NoSolitonError, PreconditionError)):
            soliton_profile(GP, UNIT, 1.0, 20.0, 513)


def test_profile_residual_grid_refinement():
    """The quadrature residual drops at 4th order when the grid doubles."""
    p1 = soliton_profile(GP, UNIT, 0.6, 30.0, 2049)
    p2 = soliton_profile(GP, UNIT, 0.6, 30.0, 4097)
    assert p1.ode_residual / p2.ode_residual >= 3.5


class TestSaddleCheck:
    def test_cubic_saddle(self):
        lam_p, lam_m = saddle_check(CUBIC, 1.0, 0.0)
        assert lam_p == pytest.approx(np.sqrt(2.0), abs=1e-14)
        assert lam_m == -lam_p

    def test_cubic_center(self):
        lam_p, lam_m = saddle_check(CUBIC, 2.0, 0.0)
        assert isinstance(lam_p, complex)
        assert lam_p.real == 0.0
        assert lam_p.imag == pytest.approx(1.0, abs=1e-14)

    def test_gp_sonic_double_root(self):
        lam_p, lam_m = saddle_check(GP, 1.0, -1.0)
        assert lam_p == 0.0 and lam_m == 0.0


class TestKinkManifoldRank:
    def test_cubic_rank_three(self):
        spec = solve_kink_endstates(CUBIC, 0.0, (1.1, 2.9, 0.0))
        assert kink_manifold_rank(CUBIC, spec) == 3

    def test_zero_flux_third_row_uses_offset_column(self):
        # with j=0 the (3,3) entry vanishes; rho- - rho+ = -2 keeps rank 3
        spec = TravelingWaveSpec(c=0.0, j=0.0, q=0.0, kind="kink",
                                 left=EndState(1.0, 0.0),
                                 right=EndState(3.0, 0.0))
        assert kink_manifold_rank(CUBIC, spec) == 3

    def test_degenerate_zero_matrix(self):
        from ekwaves.profiles import numerical_rank
        assert numerical_rank(np.zeros((3, 5))) == 0


class TestTransonicFamily:
    def test_amplitude_matches_eps(self):
        prof, = transonic_family(GP, UNIT, [0.19], half_width=30.0, n=2049)
        assert prof.spec.c == pytest.approx(0.9, abs=1e-14)
        assert prof.rho_min == pytest.approx(0.81, abs=1e-10)

    def test_amplitude_over_eps_limit(self):
        # quadratic expansion of F gives amplitude/eps -> 1 for this model
        eps = np.array([0.08, 0.04, 0.02])
        profs = transonic_family(GP, UNIT, eps, half_width=60.0, n=4097)
        ratios = [(1.0 - p.rho_min) / e for p, e in zip(profs, eps)]
        assert abs(ratios[-1] - 1.0) < 0.03
        # and the trend approaches 1
        assert abs(ratios[2] - 1.0) < abs(ratios[0] - 1.0)

    def test_eps_range_validated(self):
        with pytest.raises(ConfigError):
            transonic_family(GP, UNIT, [0.0])


def test_mirror_speed_convention():
    """Profiles at c and 2 v+ - c are mirror images with opposite flux."""
    p_right = soliton_profile(GP, UNIT, 0.6, 30.0, 2049)
    p_left = soliton_profile(GP, UNIT, -0.6, 30.0, 2049)
    assert np.max(np.abs(p_right.rho - p_left.rho)) < 1e-12
    assert np.max(np.abs(p_right.v + p_left.v)) < 1e-12
