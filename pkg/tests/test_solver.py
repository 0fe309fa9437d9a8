"""Tests for the marching solver and the equation-defect estimator."""

import math

import numpy as np
import pytest

from hornwave.errors import ConfigError, ResolutionError, SpacingError
from hornwave.grid import TauGrid
from hornwave.kernel import InitialCondition, kernel_quadrature
from hornwave.profiles import ConstantProfile, ExponentialProfile, SphericalProfile
from hornwave.rg import PhysParams, zero_order
from hornwave.solver import (
    SolverConfig,
    p_from_u,
    residual,
    solve,
    spectral_derivative,
    u_from_q,
)

COS = InitialCondition.harmonic()
CHANNEL = ConstantProfile()
FLARE = ExponentialProfile(-0.1)


class TestConfig:
    def test_rejects_bad_form(self):
        with pytest.raises(ConfigError):
            SolverConfig(form="p")

    def test_rejects_decreasing_stations(self):
        with pytest.raises(ConfigError):
            SolverConfig(stations=(0.5, 0.2))

    def test_rejects_negative_station(self):
        with pytest.raises(ConfigError):
            SolverConfig(stations=(-1.0, 1.0))


class TestMarch:
    def test_pure_heat_decay(self):
        r = solve(COS, PhysParams(0.0, 1.0), CHANNEL, SolverConfig(stations=(1.0,)))
        assert abs(r.fields[0][0] - math.exp(-1.0)) <= 1e-7

    def test_cole_hopf_exact_channel(self):
        # the zero-order field is exact when mu is constant, so the solver
        # must land on it to within its own accuracy
        params = PhysParams(1.0, 1.0)
        r = solve(COS, params, CHANNEL, SolverConfig(stations=(0.5, 2.0)))
        for x, f in zip(r.x_stations, r.fields):
            kf = kernel_quadrature(COS, 1.0, 1.0, x, r.grid)
            assert np.max(np.abs(f - zero_order(params, CHANNEL, kf))) <= 1e-4

    def test_station_zero_returns_signal(self):
        r = solve(COS, PhysParams(1.0, 1.0), FLARE, SolverConfig(stations=(0.0, 0.5)))
        assert np.max(np.abs(r.fields[0] - np.cos(r.grid.tau))) <= 1e-14

    def test_mean_conservation_u_form(self):
        r = solve(COS, PhysParams(1.0, 1.0), CHANNEL,
                  SolverConfig(stations=(0.5, 1.0, 2.0, 4.0), form="u"))
        u0 = u_from_q(np.cos(r.grid.tau), r.grid)
        for f in r.fields:
            assert abs(np.mean(f) - np.mean(u0)) <= 1e-10

    def test_spectral_convergence(self):
        params = PhysParams(1.0, 1.0)
        coarse = solve(COS, params, FLARE, SolverConfig(n=128, stations=(2.0,)))
        fine = solve(COS, params, FLARE, SolverConfig(n=256, stations=(2.0,)))
        assert np.max(np.abs(coarse.fields[0] - fine.fields[0][::2])) <= 1e-8

    def test_forms_agree_through_derivative(self):
        params = PhysParams(2.0, 1.0)
        rq = solve(COS, params, FLARE, SolverConfig(stations=(1.0,)))
        ru = solve(COS, params, FLARE, SolverConfig(stations=(1.0,), form="u"))
        assert np.max(np.abs(u_from_q(rq.fields[0], rq.grid) - ru.fields[0])) <= 1e-7

    def test_step_budget_error(self):
        with pytest.raises(ResolutionError) as err:
            solve(COS, PhysParams(1.0, 1.0), FLARE,
                  SolverConfig(stations=(2.0,), max_steps=5))
        assert err.value.suggested_n == 512


class TestDerivativeHelpers:
    def test_u_from_q(self):
        g = TauGrid.periodic_default(64)
        out = u_from_q(np.cos(g.tau), g)
        assert np.max(np.abs(out + 2.0 * np.sin(g.tau))) <= 1e-13

    def test_spectral_derivative(self):
        g = TauGrid.periodic_default(64)
        out = spectral_derivative(np.sin(3 * g.tau), g)
        assert np.max(np.abs(out - 3.0 * np.cos(3 * g.tau))) <= 1e-12

    def test_p_identity_on_unit_section(self):
        u = np.linspace(-1, 1, 8)
        assert np.array_equal(p_from_u(u, ConstantProfile(), 2.0), u)

    def test_p_halves_on_doubled_radius(self):
        u = np.ones(8)
        assert np.allclose(p_from_u(u, SphericalProfile(1.0), 1.0), 0.5, atol=1e-15)


class TestResidual:
    def test_self_consistency_on_solver_output(self):
        # spacing chosen so the estimator's own dz^2 truncation stays below
        # ten times the marching tolerance
        params = PhysParams(1.0, 1.0)
        dz = 2e-4
        zline = np.arange(1.0 - 2 * dz, 1.0 + 2.5 * dz, dz)
        xs = tuple(float(FLARE.x_of_zeta(z)) for z in zline)
        r = solve(COS, params, FLARE, SolverConfig(tol=1e-8, stations=xs))
        assert residual(r.fields, zline, params, FLARE, r.grid) <= 1e-7

    def test_constant_field_is_exact(self):
        g = TauGrid.periodic_default(32)
        fields = [np.full(g.n, 0.7) for _ in range(3)]
        out = residual(fields, [0.0, 0.1, 0.2], PhysParams(0.0, 1.0), CHANNEL, g)
        assert out == 0.0

    def test_heat_solution_on_windowed_grid(self):
        # q = e^{-z} cos tau solves the a=0 constant-channel equation; the
        # windowed estimator should converge at second order in dtau
        def defect(n):
            g = TauGrid.windowed(0.0, math.pi / 2.0, n)
            zline = np.array([0.999, 1.0, 1.001])
            fields = [np.exp(-z) * np.cos(g.tau) for z in zline]
            return residual(fields, zline, PhysParams(0.0, 1.0), CHANNEL, g)

        coarse, fine = defect(65), defect(129)
        assert coarse <= 1e-4
        assert coarse / fine == pytest.approx(4.0, rel=0.2)

    def test_u_form_defect(self):
        g = TauGrid.periodic_default(64)
        zline = np.array([0.999, 1.0, 1.001])
        fields = [np.exp(-z) * np.cos(g.tau) for z in zline]
        out = residual(fields, zline, PhysParams(0.0, 1.0), CHANNEL, g, form="u")
        assert out <= 1e-6

    def test_non_uniform_spacing_rejected(self):
        g = TauGrid.periodic_default(32)
        fields = [np.zeros(g.n)] * 3
        with pytest.raises(SpacingError):
            residual(fields, [0.0, 0.1, 0.25], PhysParams(1.0, 1.0), CHANNEL, g)

    def test_too_few_stations_rejected(self):
        g = TauGrid.periodic_default(32)
        with pytest.raises(SpacingError):
            residual([np.zeros(g.n)] * 2, [0.0, 0.1],
                     PhysParams(1.0, 1.0), CHANNEL, g)
