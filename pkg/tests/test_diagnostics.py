"""Diagnostics tests: functionals, window balances, quadratic errors,
weak-strong monitoring and the a priori components."""

import numpy as np
import pytest
from scipy.integrate import quad

from nsfslab import diagnostics as dg
from nsfslab import thermo as th
from nsfslab.discretization import (BoundaryData, FieldState, Grid1D,
                                    TimePoly, build_basis, constant_boundary,
                                    make_state, trapezoid_weights)
from nsfslab.scheme import SchemeParams, Stepper


def tp(v):
    return TimePoly((float(v),))


@pytest.fixture(scope="module")
def grid():
    return Grid1D(48, 1.0)


@pytest.fixture(scope="module")
def basis(grid):
    return build_basis(grid, 4)


@pytest.fixture(scope="module")
def eos():
    return th.power_law_eos()


@pytest.fixture(scope="module")
def transport():
    return th.power_law_transport(mu0=0.05, kappa0=0.05)


@pytest.fixture(scope="module")
def equilibrium_traj(grid, basis, eos, transport):
    bd = constant_boundary(1.0, 1.0, 0.0)
    params = SchemeParams(eps=0.0, delta=0.0, dt=1e-3, t_end=0.01)
    stepper = Stepper(grid, basis, bd, eos, transport, params)
    s0 = make_state(0.0, np.ones(grid.n_nodes), np.ones(grid.n_nodes),
                    np.zeros(4), basis, bd)
    return stepper.run(s0, stride=1), bd


@pytest.fixture(scope="module")
def driven_setup(grid, basis, eos, transport):
    bd = BoundaryData(rho=(tp(1.0), tp(1.0)), theta=(tp(1.0), tp(1.2)),
                      u=(tp(0.25), tp(0.25)))

    def run(n_cells, dt, t_end=0.08):
        g = Grid1D(n_cells, 1.0)
        b = build_basis(g, 4)
        params = SchemeParams(eps=1e-6, delta=1e-6, dt=dt, t_end=t_end,
                              n_smooth=1000)
        stepper = Stepper(g, b, bd, eos, transport, params)
        s0 = make_state(0.0, np.ones(g.n_nodes),
                        bd.theta_harmonic(0.0, g.x, g.L), np.zeros(4), b, bd)
        traj = stepper.run(s0, stride=1)
        assert traj.rejections_total == 0
        return traj, g

    return bd, run


class TestEntropyProduction:
    def test_zero_at_rest(self, grid, basis, transport):
        bd = constant_boundary(1.0, 1.0, 0.0)
        s = make_state(0.0, np.ones(grid.n_nodes), np.ones(grid.n_nodes),
                       np.zeros(4), basis, bd)
        np.testing.assert_array_equal(
            dg.entropy_production_density(s, transport, grid), 0.0)

    def test_pure_shear_positive(self, grid, basis, transport):
        bd = constant_boundary(1.0, 1.0, 0.0)
        s = make_state(0.0, np.ones(grid.n_nodes), np.ones(grid.n_nodes),
                       np.array([1.0, 0, 0, 0]), basis, bd)
        sigma = dg.entropy_production_density(s, transport, grid)
        assert np.all(sigma >= 0.0)
        assert sigma[grid.n_nodes // 4] > 0.0

    def test_conduction_hand_value(self, grid, basis):
        # theta = 1 + x, kappa == 1: sigma = 1/theta^2 = 1/2.25 at x = 1/2
        tr = th.TransportModel(mu0=0.0, kappa0=1.0,
                               kappa_fn=lambda t: np.ones_like(
                                   np.asarray(t, dtype=float)),
                               kappa_lo=1.0, kappa_hi=1.0)
        bd = constant_boundary(1.0, 1.0, 0.0)
        s = make_state(0.0, np.ones(grid.n_nodes), 1.0 + grid.x,
                       np.zeros(4), basis, bd)
        sigma = dg.entropy_production_density(s, tr, grid)
        assert sigma[grid.n_nodes // 2] == pytest.approx(1.0 / 1.5**2, rel=1e-9)

    def test_nonnegative_on_random_states(self, grid, basis, transport):
        rng = np.random.default_rng(0)
        bd = constant_boundary(1.0, 1.0, 0.0)
        for _ in range(20):
            s = make_state(0.0, rng.uniform(0.5, 2, grid.n_nodes),
                           rng.uniform(0.5, 2, grid.n_nodes),
                           rng.uniform(-1, 1, 4), basis, bd)
            assert np.min(dg.entropy_production_density(s, transport, grid)) >= 0.0


class TestHarmonicExtension:
    def test_midpoint(self):
        grid = Grid1D(2, 1.0)
        bd = BoundaryData(rho=(tp(1.0), tp(1.0)), theta=(tp(1.0), tp(3.0)),
                          u=(tp(0.0), tp(0.0)))
        np.testing.assert_allclose(dg.harmonic_extension(bd, 0.0, grid),
                                   [1.0, 2.0, 3.0])

    def test_constant(self, grid):
        bd = constant_boundary(theta=2.0)
        np.testing.assert_allclose(dg.harmonic_extension(bd, 0.0, grid), 2.0)

    def test_maximum_principle_random(self, grid):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, b = rng.uniform(0.1, 4.0, 2)
            bd = BoundaryData(rho=(tp(1.0), tp(1.0)),
                              theta=(tp(a), tp(b)), u=(tp(0.0), tp(0.0)))
            ext = dg.harmonic_extension(bd, 0.0, grid)
            assert ext.min() >= min(a, b)
            assert ext.max() <= max(a, b)


class TestBallisticEnergy:
    def test_rest_value(self, grid, basis, eos):
        # rho = theta = 1, u = u_B, a = 0, offset 0: integral of rho*e = 3L
        bd = constant_boundary(1.0, 1.0, 0.3)
        s = make_state(0.0, np.ones(grid.n_nodes), np.ones(grid.n_nodes),
                       np.zeros(4), basis, bd)
        tt = np.ones(grid.n_nodes)
        assert dg.ballistic_energy(s, tt, eos, grid, bd) == pytest.approx(3.0 * grid.L, rel=1e-12)

    def test_offset_shift(self, grid, basis):
        # shifting the entropy offset by c changes the value by -c int(theta~ rho)
        bd = constant_boundary(1.0, 1.0, 0.0)
        s = make_state(0.0, 1.2 * np.ones(grid.n_nodes),
                       0.9 * np.ones(grid.n_nodes), np.zeros(4), basis, bd)
        tt = 1.0 + 0.5 * grid.x
        wt = trapezoid_weights(grid)
        c = 0.7
        b0 = dg.ballistic_energy(s, tt, th.power_law_eos(s_offset=0.0), grid, bd)
        b1 = dg.ballistic_energy(s, tt, th.power_law_eos(s_offset=c), grid, bd)
        assert b1 - b0 == pytest.approx(-c * float(wt @ (tt * s.rho)), rel=1e-12)

    def test_affine_in_extension(self, grid, basis, eos):
        # uniform shift of theta~ changes the value by -shift * int(rho s)
        bd = constant_boundary(1.0, 1.0, 0.0)
        rng = np.random.default_rng(2)
        s = make_state(0.0, rng.uniform(0.5, 2, grid.n_nodes),
                       rng.uniform(0.5, 2, grid.n_nodes), np.zeros(4),
                       basis, bd)
        wt = trapezoid_weights(grid)
        tt = 1.0 + 0.3 * grid.x
        shift = 0.25
        b0 = dg.ballistic_energy(s, tt, eos, grid, bd)
        b1 = dg.ballistic_energy(s, tt + shift, eos, grid, bd)
        total_entropy = float(wt @ (s.rho * eos.entropy(s.rho, s.theta)))
        assert b1 - b0 == pytest.approx(-shift * total_entropy, rel=1e-10)


class TestWindowBalances:
    def test_steady_equilibrium_residuals_zero(self, equilibrium_traj, grid,
                                               eos, transport):
        traj, bd = equilibrium_traj
        er = dg.total_energy_residual(traj.times, traj.states, bd, None,
                                      transport, eos, grid)
        br = dg.ballistic_residual(traj.times, traj.states, bd, None, eos,
                                   transport, grid)
        assert abs(er) < 1e-10
        assert abs(br) < 1e-10

    def test_window_too_short(self, equilibrium_traj, grid, eos, transport):
        traj, bd = equilibrium_traj
        with pytest.raises(ValueError):
            dg.total_energy_residual([0.0], traj.states[:1], bd, None,
                                     transport, eos, grid)

    def test_boundary_split_bookkeeping(self):
        # reversing the sign of u_B swaps the inflow/outflow roles
        bd_fwd = constant_boundary(1.0, 1.0, 0.5)
        bd_rev = constant_boundary(1.0, 1.0, -0.5)
        w_in_f, w_out_f = dg._boundary_split(bd_fwd, 0.0)
        w_in_r, w_out_r = dg._boundary_split(bd_rev, 0.0)
        assert w_in_f == (-0.5, 0.0) and w_out_f == (0.0, 0.5)
        assert w_in_r == (0.0, -0.5) and w_out_r == (0.5, 0.0)

    def test_residual_decay_under_refinement(self, driven_setup):
        bd, run = driven_setup
        defects = []
        for n, dt in ((16, 4e-3), (32, 2e-3)):
            traj, g = run(n, dt)
            eos_ = th.power_law_eos()
            tr_ = th.power_law_transport(mu0=0.05, kappa0=0.05)
            defects.append(dg.ballistic_residual(traj.times, traj.states, bd,
                                                 None, eos_, tr_, g))
        assert abs(defects[0]) / abs(defects[1]) > 1.8

    def test_corrupted_trajectory_detected(self, driven_setup, eos, transport):
        bd, run = driven_setup
        traj, g = run(32, 2e-3)
        clean = dg.ballistic_residual(traj.times, traj.states, bd, None,
                                      eos, transport, g)
        states = list(traj.states)
        for k in range(len(states) // 2, len(states)):
            s = states[k]
            states[k] = FieldState(t=s.t, rho=s.rho, theta=1.1 * s.theta,
                                   v_coeffs=s.v_coeffs, u=s.u)
        bad = dg.ballistic_residual(traj.times, states, bd, None, eos,
                                    transport, g)
        assert bad > 10 * abs(clean)

    def test_time_dependent_traces_and_radiation(self, transport):
        # exercises the time-derivative terms of the extensions (warming
        # wall, accelerating inflow) and the radiation part of the state
        eos_r = th.power_law_eos(a_rad=0.3)
        bd = BoundaryData(rho=(tp(1.0), tp(1.0)),
                          theta=(TimePoly((1.0,)), TimePoly((1.1, 0.5))),
                          u=(TimePoly((0.2, 0.5)), TimePoly((0.2, 0.5))))
        defects = []
        for n, dt in ((16, 4e-3), (32, 2e-3)):
            g = Grid1D(n, 1.0)
            b = build_basis(g, 4)
            params = SchemeParams(eps=1e-6, delta=1e-6, dt=dt, t_end=0.08,
                                  n_smooth=1000)
            stepper = Stepper(g, b, bd, eos_r, transport, params)
            s0 = make_state(0.0, np.ones(g.n_nodes),
                            bd.theta_harmonic(0.0, g.x, g.L), np.zeros(4),
                            b, bd)
            traj = stepper.run(s0, stride=1)
            assert traj.rejections_total == 0
            assert traj.min_rho_global > 0 and traj.min_theta_global > 0
            defects.append(dg.ballistic_residual(traj.times, traj.states, bd,
                                                 None, eos_r, transport, g))
        assert abs(defects[0]) / abs(defects[1]) > 1.5

    def test_extension_contract_violation(self, equilibrium_traj, grid, eos,
                                          transport):
        traj, bd = equilibrium_traj
        with pytest.raises(ValueError):
            dg.ballistic_residual(traj.times, traj.states, bd, None, eos,
                                  transport, grid,
                                  theta_tilde=lambda t, x: 2.0 + 0.0 * x)


class TestRelativeEnergyField:
    def test_zero_at_reference(self, grid, basis, eos):
        bd = constant_boundary(1.0, 1.0, 0.0)
        s = make_state(0.0, np.ones(grid.n_nodes), np.ones(grid.n_nodes),
                       np.zeros(4), basis, bd)
        ref = dg.StrongReference(rho=s.rho, theta=s.theta, u=s.u,
                                 dtheta_dt=np.zeros_like(s.rho))
        assert dg.relative_energy_field(s, ref, eos, grid) == 0.0

    def test_quadratic_in_amplitude(self, grid, basis, eos):
        bd = constant_boundary(1.0, 1.0, 0.0)
        base = make_state(0.0, np.ones(grid.n_nodes), np.ones(grid.n_nodes),
                          np.zeros(4), basis, bd)
        ref = dg.StrongReference(rho=base.rho, theta=base.theta, u=base.u,
                                 dtheta_dt=np.zeros_like(base.rho))
        ratios = []
        for amp in (1e-2, 1e-3):
            s = make_state(0.0, 1.0 + amp * np.sin(2 * np.pi * grid.x),
                           1.0 + amp * np.sin(np.pi * grid.x),
                           np.array([amp, 0, 0, 0]), basis, bd)
            val = dg.relative_energy_field(s, ref, eos, grid)
            assert val > 0.0
            ratios.append(val / amp**2)
        assert ratios[0] == pytest.approx(ratios[1], rel=1.0)  # within factor 2

    def test_nonnegative_random(self, grid, basis, eos):
        rng = np.random.default_rng(3)
        bd = constant_boundary(1.0, 1.0, 0.0)
        ref = dg.StrongReference(rho=rng.uniform(0.5, 2, grid.n_nodes),
                                 theta=rng.uniform(0.5, 2, grid.n_nodes),
                                 u=rng.uniform(-1, 1, grid.n_nodes),
                                 dtheta_dt=np.zeros(grid.n_nodes))
        for _ in range(20):
            s = make_state(0.0, rng.uniform(0.5, 2, grid.n_nodes),
                           rng.uniform(0.5, 2, grid.n_nodes),
                           rng.uniform(-0.5, 0.5, 4), basis, bd)
            assert dg.relative_energy_field(s, ref, eos, grid) >= 0.0


class TestQuadraticErrors:
    def test_zero_at_reference(self, grid, basis, eos, transport):
        bd = constant_boundary(1.0, 1.0, 0.0)
        s = make_state(0.0, 1.0 + 0.1 * grid.x, 1.0 + 0.2 * grid.x**2,
                       np.array([0.1, 0, 0, 0]), basis, bd)
        ref = dg.StrongReference(rho=s.rho, theta=s.theta, u=s.u,
                                 dtheta_dt=0.3 * np.ones(grid.n_nodes))
        assert dg.quadratic_errors(s, ref, eos, transport, grid) == (0.0, 0.0, 0.0)

    def test_second_order_in_amplitude(self, grid, basis, eos, transport):
        # reference velocity lies in the Galerkin span so the state can
        # approach it exactly as the amplitude shrinks
        bd = constant_boundary(1.0, 1.0, 0.0)
        c1 = 0.3 / np.sqrt(2.0)
        ref = dg.StrongReference(rho=1.0 + 0.2 * np.sin(np.pi * grid.x),
                                 theta=1.0 + 0.1 * grid.x,
                                 u=c1 * basis.values[0],
                                 dtheta_dt=0.2 * np.ones(grid.n_nodes))
        vals = {}
        for amp in (1e-2, 1e-3):
            s = make_state(0.0, ref.rho + amp * np.sin(2 * np.pi * grid.x),
                           ref.theta + amp * np.cos(np.pi * grid.x) * grid.x
                           * (1 - grid.x),
                           np.array([c1 + amp, amp, 0, 0]), basis, bd)
            r = dg.quadratic_errors(s, ref, eos, transport, grid)
            vals[amp] = np.abs(r)
        for k in range(3):
            if vals[1e-2][k] > 1e-14:
                ratio = vals[1e-2][k] / max(vals[1e-3][k], 1e-300)
                assert 50.0 < ratio < 200.0  # ~100 for clean quadratic scaling

    def test_taylor_defects_vanish_on_matching_thermo(self, grid, basis, eos,
                                                      transport):
        # (rho, theta) = reference but u differs: R3 - R2 must be exactly 0
        bd = constant_boundary(1.0, 1.0, 0.0)
        rho = 1.0 + 0.2 * np.sin(np.pi * grid.x)
        theta = 1.0 + 0.1 * grid.x
        s = make_state(0.0, rho, theta, np.array([0.5, 0, 0, 0]), basis, bd)
        ref = dg.StrongReference(rho=rho, theta=theta,
                                 u=np.zeros(grid.n_nodes),
                                 dtheta_dt=0.4 * np.ones(grid.n_nodes))
        r1, r2, r3 = dg.quadratic_errors(s, ref, eos, transport, grid)
        assert r3 == r2

    def test_reference_validation(self, grid, basis, eos, transport):
        bd = constant_boundary(1.0, 1.0, 0.0)
        s = make_state(0.0, np.ones(grid.n_nodes), np.ones(grid.n_nodes),
                       np.zeros(4), basis, bd)
        bad = dg.StrongReference(rho=-np.ones(grid.n_nodes),
                                 theta=np.ones(grid.n_nodes),
                                 u=np.zeros(grid.n_nodes),
                                 dtheta_dt=np.zeros(grid.n_nodes))
        with pytest.raises(ValueError):
            dg.quadratic_errors(s, bad, eos, transport, grid)


class TestWeakStrong:
    def test_zero_window(self, grid, basis, eos, transport):
        bd = constant_boundary(1.0, 1.0, 0.0)
        s = make_state(0.0, np.ones(grid.n_nodes), np.ones(grid.n_nodes),
                       np.zeros(4), basis, bd)
        ref = dg.StrongReference(rho=s.rho, theta=s.theta, u=s.u,
                                 dtheta_dt=np.zeros(grid.n_nodes))
        mon = dg.weak_strong_monitor([0.0], [s], [ref], eos, transport, grid)
        assert mon.rel_energy == [0.0]
        assert mon.bound_ok

    def test_monitor_on_perturbed_run(self, driven_setup, eos, transport):
        bd, run = driven_setup
        traj, g = run(32, 2e-3, t_end=0.04)
        refs = dg.make_reference_path(traj.times, traj.states)
        mon = dg.weak_strong_monitor(traj.times, traj.states, refs, eos,
                                     transport, g)
        assert mon.bound_ok
        # self-reference: only cancellation roundoff remains
        assert all(abs(e) < 1e-13 for e in mon.rel_energy)

    def test_residual_same_data_small(self, driven_setup, eos, transport):
        # trajectory against its own path: the weak-strong defect reduces to
        # pure quadrature/discretization noise
        bd, run = driven_setup
        traj, g = run(32, 2e-3, t_end=0.04)
        refs = dg.make_reference_path(traj.times, traj.states)
        res = dg.weak_strong_residual(traj.times, traj.states, refs, bd,
                                      eos, transport, g)
        assert abs(res) < 1e-10


class TestApriori:
    def test_poincare_constant_near_continuum(self, grid):
        # continuum constant for functions vanishing at both ends: (L/pi)^2
        c = dg.poincare_constant(grid.n_cells, grid.L)
        assert c == pytest.approx((grid.L / np.pi) ** 2, rel=0.05)

    def test_poincare_inequality_holds(self, grid):
        from nsfslab.discretization import gradient
        rng = np.random.default_rng(4)
        wt = trapezoid_weights(grid)
        c = dg.poincare_constant(grid.n_cells, grid.L)
        for _ in range(50):
            w = rng.standard_normal(grid.n_nodes)
            w[0] = w[-1] = 0.0
            lhs = float(wt @ w**2)
            rhs = c * float(wt @ gradient(w, grid.h) ** 2)
            assert lhs <= rhs * (1 + 1e-10)

    def test_margins_on_driven_run(self, driven_setup, eos):
        bd, run = driven_setup
        tr7 = th.power_law_transport(mu0=0.05, kappa0=0.05, cond_exp=7.0)
        traj, g = run(32, 2e-3, t_end=0.04)
        for st in traj.states:
            rec = dg.apriori_components(st, bd, tr7, eos, g, K_cut=2.0)
            assert rec.dissipation_margin >= -1e-12
            assert rec.conduction_margin >= -1e-12
            assert rec.interpolation_margin >= 0.0

    def test_uniform_temperature_conduction_trivial(self, grid, basis, eos,
                                                    transport):
        bd = constant_boundary(1.0, 1.0, 0.0)
        s = make_state(0.0, np.ones(grid.n_nodes), np.ones(grid.n_nodes),
                       np.zeros(4), basis, bd)
        rec = dg.apriori_components(s, bd, transport, eos, grid)
        assert rec.conduction_lhs == 0.0
        assert rec.conduction_margin == 0.0

    def test_interpolation_chain_quadrature_oracle(self, grid, basis, eos):
        # theta = 1 + x, K = 2, beta = 7: margin equals
        # L*K^6 + K^(-1) int (1+x)^7 - int (1+x)^6 > 0 (adaptive quadrature)
        tr7 = th.power_law_transport(cond_exp=7.0)
        bd = constant_boundary(1.0, 1.0, 0.0)
        s = make_state(0.0, np.ones(grid.n_nodes), 1.0 + grid.x,
                       np.zeros(4), basis, bd)
        rec = dg.apriori_components(s, bd, tr7, eos, grid, K_cut=2.0)
        i7, _ = quad(lambda x: (1 + x) ** 7, 0, 1)
        i6, _ = quad(lambda x: (1 + x) ** 6, 0, 1)
        expected = 64.0 + i7 / 2.0 - i6
        assert expected > 0.0
        assert rec.interpolation_margin == pytest.approx(expected, rel=1e-3)

    def test_entropy_bound_constant_fitted(self, grid, basis, eos):
        bd = constant_boundary(1.0, 1.0, 0.0)
        rng = np.random.default_rng(5)
        s = make_state(0.0, rng.uniform(0.5, 2, grid.n_nodes),
                       rng.uniform(0.5, 2, grid.n_nodes), np.zeros(4),
                       basis, bd)
        rec = dg.apriori_components(s, bd, th.power_law_transport(), eos, grid)
        z = s.rho / s.theta**1.5
        lhs = s.rho * np.abs(eos.entropy_structure(z))
        rhs = rec.entropy_bound_constant * s.rho * (
            1.0 + np.abs(np.log(s.rho)) + np.maximum(np.log(s.theta), 0.0))
        assert np.all(lhs <= rhs * (1 + 1e-12))


class TestReport:
    def test_fields_populated(self, driven_setup, eos, transport):
        bd, run = driven_setup
        traj, g = run(16, 4e-3, t_end=0.016)
        rep = dg.evaluate_report(traj.times[:2], traj.states[:2], bd, None,
                                 eos, transport, g)
        assert rep.t == traj.times[1]
        assert rep.entropy_production >= 0.0
        assert rep.rel_energy_base >= 0.0
        assert np.isfinite(rep.energy_residual)
        assert np.isfinite(rep.ballistic_residual)
        assert rep.min_rho > 0 and rep.min_theta > 0

    def test_first_probe_residuals_nan(self, equilibrium_traj, grid, eos,
                                       transport):
        traj, bd = equilibrium_traj
        rep = dg.evaluate_report(traj.times[:1], traj.states[:1], bd, None,
                                 eos, transport, grid)
        assert np.isnan(rep.energy_residual)
        assert np.isnan(rep.ballistic_residual)
