"""Exact sub-flows, Strang composition, conservation accounting, reversal."""

import math

import numpy as np
import pytest

from nlslab import (
    Field,
    GaussianBump,
    PlaneWave,
    RoughRandom,
    StepperConfig,
    default_dt,
    evolve,
    fit_dt,
    generate,
    linear_step,
    make_grid,
    mass,
    nonlinear_step,
    strang_step,
    to_physical,
    to_spectral,
)
from nlslab.functionals import build_observers
from nlslab.kernels import weighted_abs2_sum


def rel_diff(a, b):
    ref = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return np.max(np.abs(a - b)) / ref


class TestLinearStep:
    def test_plane_wave_eigenfunction(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, PlaneWave((3, -2), 1.5))
        out = linear_step(f, 0.7)
        expect = f.values * np.exp(-1j * 13.0 * 0.7)
        assert rel_diff(out.values, expect) == 0.0

    def test_zero_tau_is_identity(self):
        g = make_grid(2, 16, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 2))
        assert rel_diff(linear_step(f, 0.0).values, f.values) == 0.0

    def test_group_property(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 3))
        a = linear_step(linear_step(f, 0.2), 0.5)
        b = linear_step(f, 0.7)
        assert rel_diff(a.values, b.values) <= 1e-12

    def test_l2_isometry(self):
        g = make_grid(3, 8, 2 * np.pi)
        f = generate(g, RoughRandom(0.9, 1.0, 4))
        assert abs(mass(linear_step(f, 1.3)) - mass(f)) <= 1e-12 * mass(f)


class TestNonlinearStep:
    def test_modulus_preserved_pointwise(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = to_physical(generate(g, RoughRandom(0.7, 2.0, 5)))
        out = nonlinear_step(f, 0.4)
        assert np.max(np.abs(np.abs(out.values) - np.abs(f.values))) <= 1e-14

    def test_constant_field_phase(self):
        g = make_grid(2, 16, 2 * np.pi)
        c = 1.5 + 0.5j
        f = Field(g, np.full(g.shape, c), "physical")
        out = nonlinear_step(f, 0.3)
        expect = c * np.exp(-1j * abs(c) ** 2 * 0.3)
        assert np.max(np.abs(out.values - expect)) < 1e-14

    def test_zero_tau_identity(self):
        g = make_grid(2, 16, 2 * np.pi)
        f = to_physical(generate(g, RoughRandom(0.7, 1.0, 6)))
        assert rel_diff(nonlinear_step(f, 0.0).values, f.values) == 0.0


class TestStrangStep:
    def test_zero_coupling_matches_free_flow(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 7))
        cfg = StepperConfig(dt=1e-3, dealias="none", nonlinear_coupling=0.0)
        a = strang_step(f, 1e-3, cfg)
        b = linear_step(f, 1e-3)
        assert rel_diff(a.values, b.values) <= 1e-12

    def test_plane_wave_step_exact(self):
        # constant-modulus states make the two sub-flows commute: one Strang
        # step reproduces the exact solution A exp(i(k.x - (|k|^2+|A|^2) t))
        g = make_grid(2, 32, 2 * np.pi)
        A = 1.3
        f = generate(g, PlaneWave((2, 1), A))
        dt = 0.05
        out = strang_step(f, dt, StepperConfig(dt=dt, dealias="none"))
        expect = f.values * np.exp(-1j * (5.0 + A**2) * dt)
        assert rel_diff(to_spectral(out).values, expect) < 1e-13

    def test_local_error_third_order(self):
        # error of a single step against a tiny-dt reference drops ~8x when
        # dt halves
        g = make_grid(2, 32, 2 * np.pi)
        f = to_physical(generate(g, GaussianBump(0.8, 1.2)))
        cfg = lambda dt: StepperConfig(dt=dt, dealias="none")

        def reference(t_end, n=256):
            out = f
            for _ in range(n):
                out = strang_step(out, t_end / n, cfg(t_end / n))
            return out

        errs = []
        for dt in (0.02, 0.01):
            one = strang_step(f, dt, cfg(dt))
            ref = reference(dt)
            errs.append(rel_diff(one.values, ref.values))
        ratio = errs[0] / errs[1]
        assert 5.5 <= ratio <= 11.0

    def test_mass_preserved_without_dealias(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 3.0, 8))
        out = strang_step(f, 2e-3, StepperConfig(dt=2e-3, dealias="none"))
        assert abs(mass(out) - mass(f)) <= 1e-13 * mass(f)


class TestEvolve:
    def test_mass_column_constant(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 2.0, 9))
        cfg = StepperConfig(dt=fit_dt(0.05, default_dt(g, "none")), dealias="none")
        traj = evolve(f, 0.05, cfg)
        m = traj.column("mass")
        assert np.max(np.abs(m - m[0])) <= 1e-11 * m[0]

    def test_t_end_zero(self):
        g = make_grid(2, 16, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 10))
        traj = evolve(f, 0.0, StepperConfig(dt=1e-3))
        assert list(traj.times) == [0.0]

    def test_linear_only_matches_analytic_propagator(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 11))
        t_end = 0.04
        cfg = StepperConfig(
            dt=fit_dt(t_end, 1e-3),
            dealias="none",
            nonlinear_coupling=0.0,
            snapshot_stride=10**9,
        )
        traj = evolve(f, t_end, cfg)
        final = traj.snapshots[-1][1]
        analytic = linear_step(f, t_end)
        assert rel_diff(to_spectral(final).values, to_spectral(analytic).values) <= 1e-12

    def test_dealias_accounting_identity(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 4.0, 12))
        cfg = StepperConfig(dt=fit_dt(0.05, default_dt(g)), dealias="two_thirds")
        traj = evolve(f, 0.05, cfg)
        m = traj.column("mass")
        removed = traj.column("dealias_removed_l2sq")
        lhs = m**2 + removed
        assert np.max(np.abs(lhs - m[0] ** 2)) <= 1e-12 * m[0] ** 2

    def test_initial_projection_recorded(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 13))
        cfg = StepperConfig(dt=1e-3)
        traj = evolve(f, 0.0, cfg)
        removed = traj.meta["initial_projection_removed_l2sq"]
        kept_sq = mass(f) ** 2 - removed
        assert removed > 0.0
        assert abs(traj.column("mass")[0] ** 2 - kept_sq) <= 1e-12 * mass(f) ** 2

    def test_time_reversal(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = to_physical(generate(g, GaussianBump(0.8, 1.0)))
        dt = 1e-3
        cfg = StepperConfig(dt=dt, dealias="none")
        state = f
        for _ in range(50):
            state = strang_step(state, dt, cfg)
        for _ in range(50):
            state = strang_step(state, -dt, cfg)
        assert rel_diff(state.values, f.values) <= 1e-8

    def test_rejects_incommensurate_t_end(self):
        g = make_grid(2, 16, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 14))
        with pytest.raises(ValueError, match="integer multiple"):
            evolve(f, 0.05, StepperConfig(dt=0.04))

    def test_blowup_guard(self):
        g = make_grid(2, 16, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 15))
        bad = {"diverges": lambda _: math.inf}
        with pytest.raises(RuntimeError, match="blew up"):
            evolve(f, 0.01, StepperConfig(dt=1e-3), observers=bad)

    def test_observer_times_include_endpoints(self):
        g = make_grid(2, 16, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 16))
        cfg = StepperConfig(dt=1e-3, observer_stride=7)
        traj = evolve(f, 0.01, cfg)  # 10 steps, stride 7
        assert traj.times[0] == 0.0
        assert np.isclose(traj.times[-1], 0.01)
        assert np.isclose(traj.times[1], 7e-3)

    def test_energy_drift_second_order(self):
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, GaussianBump(0.7, 1.2))
        obs = build_observers(g)

        def drift(dt):
            traj = evolve(f, 0.25, StepperConfig(dt=dt, dealias="none"), observers=obs)
            e = traj.column("energy")
            return np.max(np.abs(e - e[0]))

        ratio = drift(fit_dt(0.25, 2e-3)) / drift(fit_dt(0.25, 1e-3))
        assert 3.4 <= ratio <= 4.6

    def test_kinetic_modified_energy_conserved_under_free_flow(self):
        # the multiplier commutes with the free propagator, so the kinetic
        # part of the smoothed energy is exactly conserved when coupling = 0
        g = make_grid(2, 32, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 17))
        from nlslab.multipliers import smoothing_multiplier, symbol_on_grid

        w = (g.k_sq * symbol_on_grid(g, smoothing_multiplier(4.0, 0.7)) ** 2).reshape(-1)
        w = np.ascontiguousarray(w)

        def kin(field):
            return 0.5 * weighted_abs2_sum(
                to_spectral(field).values.reshape(-1), w
            ) * g.quad_weight

        cfg = StepperConfig(dt=1e-3, dealias="none", nonlinear_coupling=0.0)
        traj = evolve(f, 0.02, cfg, observers={"kin_smoothed": kin})
        col = traj.column("kin_smoothed")
        assert np.max(np.abs(col - col[0])) <= 1e-12 * col[0]


class TestTrajectoryCsv:
    def test_header_and_precision(self, tmp_path):
        g = make_grid(2, 16, 2 * np.pi)
        f = generate(g, RoughRandom(0.7, 1.0, 18))
        traj = evolve(f, 0.004, StepperConfig(dt=1e-3, dealias="none"))
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("time,mass,energy")
        value = float(lines[1].split(",")[1])
        assert value == traj.column("mass")[0]  # 17 digits round-trips
