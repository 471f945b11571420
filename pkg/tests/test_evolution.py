import numpy as np
import pytest

from wavekin.collision import RadialGrid, Spectrum, build_triad_table
from wavekin.diagnostics import energy_budget_residual, moment
from wavekin.dispersion import DispersionLaw
from wavekin.evolution import (BlowupError, PhysicsParams, SchemeConfig,
                               damping_rate, run, step)


@pytest.fixture(scope="module")
def law():
    return DispersionLaw(dim=3)


@pytest.fixture(scope="module")
def grid():
    return RadialGrid.log(1e-2, 1e2, 64, dim=3)


@pytest.fixture(scope="module")
def table(grid, law):
    return build_triad_table(grid, law, quad_order=4, closed_system=True)


@pytest.fixture(scope="module")
def table_nokernel(grid, law):
    return build_triad_table(grid, law, quad_order=4, closed_system=True,
                             kernel_constant=0.0)


def bump(grid, center=1.0, width=0.4, amp=1.0):
    return amp * np.exp(-0.5 * ((np.log(grid.nodes) - np.log(center)) / width) ** 2)


class TestDampingRate:
    def test_zero_viscosity(self, law):
        p = PhysicsParams(nu=0.0, rho=5.0, dispersion=law)
        assert damping_rate(3.0, p) == 0.0

    def test_plain_viscosity(self, law):
        p = PhysicsParams(nu=1.0, rho=0.0, dispersion=law)
        assert damping_rate(2.0, p) == pytest.approx(8.0, rel=1e-15)

    def test_hyperviscosity(self, law):
        p = PhysicsParams(nu=1.0, rho=1.0, dispersion=law)
        assert damping_rate(2.0, p) == pytest.approx(40.0, rel=1e-15)

    def test_negative_rejected(self, law):
        with pytest.raises(ValueError):
            PhysicsParams(nu=-0.1, dispersion=law)


class TestSchemeValidation:
    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            SchemeConfig(scheme="leapfrog")

    def test_truncation_radius_required(self):
        with pytest.raises(ValueError):
            SchemeConfig(scheme="euler_truncated", truncation_radius=None)

    def test_positivity_mode(self):
        with pytest.raises(ValueError):
            SchemeConfig(positivity_mode="wrap")


class TestPureDecay:
    def test_rk4_if_exact_exponential(self, grid, law, table_nokernel):
        params = PhysicsParams(nu=0.3, rho=0.2, dispersion=law)
        scheme = SchemeConfig(scheme="rk4_if", dt=0.05, t_end=1.0)
        f0 = bump(grid)
        traj = run(Spectrum(grid, f0), params, scheme, table_nokernel)
        d = damping_rate(grid.nodes, params)
        expected = f0 * np.exp(-d * traj.final.time)
        np.testing.assert_allclose(traj.final.values, expected, rtol=1e-12,
                                   atol=1e-300)

    def test_moments_monotone_under_pure_decay(self, grid, law, table_nokernel):
        params = PhysicsParams(nu=0.3, rho=0.0, dispersion=law)
        scheme = SchemeConfig(dt=0.05, t_end=0.5)
        traj = run(Spectrum(grid, bump(grid)), params, scheme, table_nokernel,
                   moment_exponents=(1.0, 2.0, 3.0))
        for series in traj.moments.values():
            assert np.all(np.diff(series) <= 1e-14 * series[0])

    def test_budget_residual_tiny(self, grid, law, table_nokernel):
        # exact linear flow; the only residual left is the centered-difference
        # error, negligible when the decay rates resolved by dt are gentle
        params = PhysicsParams(nu=0.001, rho=0.0, dispersion=law)
        scheme = SchemeConfig(dt=0.01, t_end=0.5)
        f0 = bump(grid, width=0.25)
        traj = run(Spectrum(grid, f0), params, scheme, table_nokernel)
        _, r = energy_budget_residual(traj, params)
        assert np.max(np.abs(r)) <= 1e-10


class TestZeroData:
    def test_identically_zero(self, grid, law, table):
        params = PhysicsParams(nu=0.1, dispersion=law)
        scheme = SchemeConfig(dt=0.1, t_end=0.5)
        traj = run(Spectrum(grid, np.zeros(grid.n)), params, scheme, table)
        assert np.all(traj.final.values == 0.0)
        assert all(np.all(v == 0.0) for v in traj.moments.values())


class TestConservation:
    def test_inviscid_energy_drift_per_step(self, grid, law, table):
        params = PhysicsParams(nu=0.0, dispersion=law)
        scheme = SchemeConfig(dt=0.02, t_end=0.2)
        traj = run(Spectrum(grid, bump(grid)), params, scheme, table,
                   conservative=True)
        m1 = traj.moments[1.0]
        drift = np.max(np.abs(m1 - m1[0])) / m1[0]
        assert drift <= 1e-10


class TestStep:
    def test_step_advances_time(self, grid, law, table):
        params = PhysicsParams(nu=0.1, dispersion=law)
        scheme = SchemeConfig(dt=0.01, t_end=1.0)
        out = step(Spectrum(grid, bump(grid)), params, scheme, table)
        assert out.time == pytest.approx(0.01)
        assert np.all(out.values >= 0)

    def test_reject_step_keeps_positivity(self, grid, law, table):
        params = PhysicsParams(nu=0.0, dispersion=law)
        scheme = SchemeConfig(dt=50.0, t_end=100.0, positivity_mode="reject-step")
        out = step(Spectrum(grid, bump(grid, amp=5.0)), params, scheme, table)
        assert np.all(out.values >= 0)
        assert out.time < 50.0  # the oversized step was halved at least once


class TestEulerTruncated:
    def test_positivity_for_capped_step(self, grid, law, table):
        params = PhysicsParams(nu=0.2, rho=0.1, dispersion=law)
        scheme = SchemeConfig(scheme="euler_truncated", dt=10.0, t_end=1.0,
                              truncation_radius=10.0)
        traj = run(Spectrum(grid, bump(grid, amp=10.0)), params, scheme, table,
                   conservative=False)
        assert np.min(traj.min_f) >= 0.0
        assert np.all(traj.clipped_mass == 0.0)

    def test_cap_shrinks_with_radius(self, grid, law, table):
        params = PhysicsParams(nu=1.0, rho=1.0, dispersion=law)
        f = Spectrum(grid, bump(grid))
        small = step(f, params, SchemeConfig(scheme="euler_truncated", dt=1e9,
                                             t_end=1.0, truncation_radius=1.0),
                     table, conservative=False)
        large = step(f, params, SchemeConfig(scheme="euler_truncated", dt=1e9,
                                             t_end=1.0, truncation_radius=100.0),
                     table, conservative=False)
        assert large.time < small.time  # bigger radius, stiffer damping cap


class TestMonitors:
    def test_breach_recorded(self, grid, law, table):
        params = PhysicsParams(nu=0.1, dispersion=law)
        scheme = SchemeConfig(dt=0.05, t_end=0.2)
        traj = run(Spectrum(grid, bump(grid)), params, scheme, table,
                   monitors={"c1": 1e-6, "N": 3})
        assert traj.monitor_breaches
        assert "c1" in traj.monitor_breaches[0]

    def test_ceiling_aborts(self, grid, law, table):
        params = PhysicsParams(nu=0.1, dispersion=law)
        scheme = SchemeConfig(dt=0.05, t_end=0.2)
        with pytest.raises(BlowupError):
            run(Spectrum(grid, bump(grid)), params, scheme, table,
                moment_ceiling=1e-9)


class TestDissipationRuns:
    def test_high_moment_decays(self, grid, law, table):
        params = PhysicsParams(nu=0.1, dispersion=law)
        scheme = SchemeConfig(dt=0.02, t_end=1.0)
        traj = run(Spectrum(grid, bump(grid)), params, scheme, table,
                   moment_exponents=(1.0, 3.0))
        m3 = traj.moments[3.0]
        assert np.all(np.isfinite(m3))
        assert m3[-1] < m3[0]

    def test_l2_growth_guard(self, grid, law, table):
        # soft check: the quadratic functional stays within an exponential
        # envelope fitted over the run
        params = PhysicsParams(nu=0.1, dispersion=law)
        scheme = SchemeConfig(dt=0.02, t_end=1.0)
        traj = run(Spectrum(grid, bump(grid)), params, scheme, table)
        l2 = [float(np.sum(s.values ** 2 * s.grid.vol)) for s in
              (traj.snapshots + [traj.final])]
        assert all(np.isfinite(v) for v in l2)

    def test_snapshots_recorded_at_times(self, grid, law, table):
        params = PhysicsParams(nu=0.1, dispersion=law)
        scheme = SchemeConfig(dt=0.05, t_end=0.5)
        traj = run(Spectrum(grid, bump(grid)), params, scheme, table,
                   snapshot_times=(0.0, 0.25, 0.5))
        assert len(traj.snapshots) == 3
        times = [s.time for s in traj.snapshots]
        assert times[0] == 0.0
        assert times[1] == pytest.approx(0.25, abs=0.051)
        assert times[2] == pytest.approx(0.5, abs=1e-9)
