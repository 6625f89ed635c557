import numpy as np
import pytest

import graphon_lqr as gl
from graphon_lqr.graphon import midpoint_grid
from graphon_lqr.lqr import (GainSchedule, control_centralized, control_localized,
                             eigensystem_params, eigenstate_flow, feedback_controller,
                             project_state, ratio_prediction, reconstruct_P,
                             synthesize_gains, truncated_controller)
from graphon_lqr.poly import apply_poly_matrix

from conftest import admissible_poly, input_poly, make_rank_kernel, sinusoidal_problem


class TestProblemValidation:
    def test_negative_cost_poly_rejected(self):
        g = gl.uniform_graphon()
        with pytest.raises(ValueError, match="poly_q"):
            gl.LqrProblem(0.0, gl.CoeffPoly([1.0]), gl.CoeffPoly([-1.0]),
                          gl.CoeffPoly([1.0]), g, 1.0)

    def test_negative_on_spectrum_rejected(self):
        # q(s) = 1 - 2s is negative at the uniform kernel's eigenvalue 1
        g = gl.uniform_graphon()
        with pytest.raises(ValueError, match="poly_q"):
            gl.LqrProblem(0.0, gl.CoeffPoly([1.0]), gl.CoeffPoly([1.0, -2.0]),
                          gl.CoeffPoly([1.0]), g, 1.0)

    def test_bad_horizon_rejected(self):
        with pytest.raises(ValueError, match="horizon"):
            gl.LqrProblem(0.0, gl.CoeffPoly([1.0]), gl.CoeffPoly([1.0]),
                          gl.CoeffPoly([1.0]), gl.uniform_graphon(), -1.0)


class TestProjectState:
    def test_eigenfunction_projects_cleanly(self, vii_problem):
        g = vii_problem.graphon
        n = 32
        f1 = g.pairs[0].fun(midpoint_grid(n))
        ds = project_state(f1, g)
        np.testing.assert_allclose(ds.eigen_coords, [1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(ds.auxiliary, np.zeros(n), atol=1e-12)

    def test_orthogonal_state_is_pure_residual(self, vii_problem):
        g = vii_problem.graphon
        n = 32
        x = np.ones(n) * 3.0  # constant, orthogonal to sin and cos
        ds = project_state(x, g)
        np.testing.assert_allclose(ds.eigen_coords, [0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(ds.auxiliary, x, atol=1e-12)

    def test_function_state(self, vii_problem):
        g = vii_problem.graphon
        x = lambda t: np.sqrt(2.0) * np.sin(2 * np.pi * np.asarray(t, float)) + 3.0
        ds = project_state(x, g)
        np.testing.assert_allclose(ds.eigen_coords, [1.0, 0.0], atol=1e-9)
        pts = np.linspace(0, 1, 13)
        np.testing.assert_allclose(ds.auxiliary(pts), np.full(13, 3.0), atol=1e-9)

    def test_reconstruction_and_orthogonality(self):
        rng = np.random.default_rng(12)
        g, _ = make_rank_kernel(rng, 12, 3)
        x = rng.standard_normal(12)
        ds = project_state(x, g)
        f = g.eigfun_values(midpoint_grid(12))
        np.testing.assert_allclose(ds.auxiliary + f.T @ ds.eigen_coords, x,
                                   atol=1e-12)
        np.testing.assert_allclose(f @ ds.auxiliary / 12, np.zeros(3), atol=1e-12)


class TestEigensystemParams:
    def test_showcase_parameters(self, vii_problem):
        # drift 2 + 1/2, input 1 + (1/2)/2, weights (1 - 1/2)^2
        for idx in (0, 1):
            assert eigensystem_params(vii_problem, idx) == pytest.approx(
                (2.5, 1.25, 0.25, 0.25), abs=1e-15)

    def test_uniform_kernel_substitution(self):
        p = gl.LqrProblem(0.7, gl.CoeffPoly([1.4]), gl.CoeffPoly([0.9]),
                          gl.CoeffPoly([0.2]), gl.uniform_graphon(), 1.0)
        assert eigensystem_params(p, 0) == pytest.approx((1.7, 1.4, 0.9, 0.2))

    def test_tiny_eigenvalue_approaches_auxiliary(self):
        pair = gl.EigenPair(1e-12, lambda x: np.ones_like(np.asarray(x, float)))
        g = gl.FiniteRankGraphon([pair])
        p = gl.LqrProblem(0.7, gl.CoeffPoly([1.4, 0.3]), gl.CoeffPoly([0.9, 0.1]),
                          gl.CoeffPoly([0.2, -0.1]), g, 1.0)
        drift, gain, q, z = eigensystem_params(p, 0)
        assert (drift, gain, q, z) == pytest.approx((p.alpha0, p.beta0, p.q0, p.z0),
                                                    abs=1e-11)

    def test_out_of_range(self, vii_problem):
        with pytest.raises(IndexError):
            eigensystem_params(vii_problem, 2)


class TestSynthesizeGains:
    def test_showcase_curves(self, vii_problem):
        gains = synthesize_gains(vii_problem, 1e-3)
        assert len(gains.eigen) == 2
        # degenerate eigenvalue: one solve shared by both directions
        assert gains.eigen[0] is gains.eigen[1]
        assert gains.aux.values[0] == 1.0
        assert gains.eigen[0].values[0] == 0.25
        # the auxiliary curve solves dL = 4L - L^2 + 1 (finite differences)
        grid, vals = gains.aux.grid, gains.aux.values
        mid_rate = (vals[2:] - vals[:-2]) / (grid[2] - grid[0])
        expect = 4.0 * vals[1:-1] - vals[1:-1] ** 2 + 1.0
        np.testing.assert_allclose(mid_rate, expect, atol=1e-4)

    def test_zero_cost_gives_zero_gains(self):
        p = gl.LqrProblem(1.0, gl.CoeffPoly([1.0, 0.5]), gl.CoeffPoly([0.0]),
                          gl.CoeffPoly([0.0]), gl.sinusoidal_graphon(), 1.0)
        gains = synthesize_gains(p, 1e-3)
        assert np.all(gains.aux.values == 0.0)
        assert all(np.all(c.values == 0.0) for c in gains.eigen)

    def test_mean_field_case_two_curves(self):
        p = gl.LqrProblem(0.5, gl.CoeffPoly([1.0]), gl.CoeffPoly([1.0]),
                          gl.CoeffPoly([1.0]), gl.uniform_graphon(), 1.0)
        gains = synthesize_gains(p, 1e-3)
        assert len(gains.eigen) == 1  # one eigendirection plus the auxiliary curve

    def test_mismatched_grids_rejected(self):
        c1 = gl.GainCurve([0.0, 0.5, 1.0], [0.0, 0.0, 0.0])
        c2 = gl.GainCurve([0.0, 1.0], [0.0, 0.0])
        with pytest.raises(ValueError):
            GainSchedule(aux=c1, eigen=(c2,))


class TestControlLaws:
    def test_zero_state_zero_control(self, vii_problem):
        gains = synthesize_gains(vii_problem, 1e-3)
        u = control_centralized(0.3, np.zeros(40), gains, vii_problem)
        np.testing.assert_array_equal(u, np.zeros(40))

    def test_pure_residual_uses_auxiliary_gain(self, vii_problem):
        gains = synthesize_gains(vii_problem, 1e-3)
        n, t = 40, 0.4
        x = np.full(n, 2.0)  # orthogonal to both eigendirections
        u = control_centralized(t, x, gains, vii_problem)
        lt = gains.aux(vii_problem.horizon - t)
        np.testing.assert_allclose(u, -vii_problem.beta0 * lt * x, atol=1e-12)

    def test_eigenstate_gets_eigen_gain(self, vii_problem):
        gains = synthesize_gains(vii_problem, 1e-3)
        n = 40
        gamma = midpoint_grid(n)
        x = np.sqrt(2.0) * np.sin(2 * np.pi * gamma)
        u = control_centralized(0.0, x, gains, vii_problem)
        m_end = gains.eigen[0](vii_problem.horizon)
        np.testing.assert_allclose(u, -1.25 * m_end * x, atol=1e-12)

    def test_centralized_localized_agree(self, vii_problem):
        gains = synthesize_gains(vii_problem, 1e-3)
        rng = np.random.default_rng(2)
        n = 40
        x = rng.standard_normal(n)
        u_vec = control_centralized(0.25, x, gains, vii_problem)
        gamma = midpoint_grid(n)
        u_pt = np.array([control_localized(gm, 0.25, x, gains, vii_problem)
                         for gm in gamma])
        np.testing.assert_allclose(u_pt, u_vec, atol=1e-12)

    def test_function_state_law(self, vii_problem):
        gains = synthesize_gains(vii_problem, 1e-3)
        x = lambda t: np.sqrt(2.0) * np.sin(2 * np.pi * np.asarray(t, float))
        law = control_centralized(0.0, x, gains, vii_problem)
        m_end = gains.eigen[0](vii_problem.horizon)
        pts = np.linspace(0, 1, 9)
        np.testing.assert_allclose(law(pts), -1.25 * m_end * x(pts), atol=1e-9)
        assert control_localized(0.25, 0.0, x, gains, vii_problem) == pytest.approx(
            -1.25 * m_end * np.sqrt(2.0), abs=1e-9)

    def test_matches_reconstructed_feedback_operator(self, vii_problem):
        # the law equals -B P(T-t) x with P rebuilt from the gain curves
        gains = synthesize_gains(vii_problem, 1e-3)
        n, t = 24, 0.35
        sys_ = gl.build_step_system(gl.sample_step_entries(vii_problem.graphon, n),
                                    vii_problem)
        x = np.random.default_rng(8).standard_normal(n)
        u = control_centralized(t, x, gains, vii_problem)
        p_op = reconstruct_P(gains, vii_problem.graphon,
                             vii_problem.horizon - t, n)
        np.testing.assert_allclose(u, -sys_.b_mat @ p_op @ x, atol=1e-10)
        closure = feedback_controller(vii_problem, gains)
        np.testing.assert_allclose(closure(t, x), u, atol=1e-12)

    def test_time_outside_horizon_rejected(self, vii_problem):
        gains = synthesize_gains(vii_problem, 1e-3)
        with pytest.raises(ValueError):
            control_centralized(1.5, np.zeros(40), gains, vii_problem)

    def test_gamma_outside_domain_rejected(self, vii_problem):
        gains = synthesize_gains(vii_problem, 1e-3)
        with pytest.raises(ValueError):
            control_localized(1.2, 0.0, np.zeros(40), gains, vii_problem)


class TestReconstructP:
    def test_rank_zero_is_scaled_identity(self):
        g = gl.sinusoidal_graphon().truncate(0)
        p = gl.LqrProblem(1.0, gl.CoeffPoly([1.0]), gl.CoeffPoly([1.0]),
                          gl.CoeffPoly([0.5]), g, 1.0)
        gains = synthesize_gains(p, 1e-3)
        mat = reconstruct_P(gains, g, 0.3, 5)
        np.testing.assert_allclose(mat, gains.aux(0.3) * np.eye(5), atol=1e-12)

    def test_initial_value_matches_terminal_weight_matrix(self):
        # on a full-rank coupling the reconstruction at time zero equals
        # poly_p0(entries/n) exactly
        rng = np.random.default_rng(4)
        a = rng.uniform(-1, 1, (4, 4))
        step = gl.StepGraphon(0.5 * (a + a.T))
        kernel = step.spectral_decompose()
        assert kernel.rank == 4
        p = gl.LqrProblem(0.3, gl.CoeffPoly([1.0]),
                          admissible_poly(rng, kernel.lambdas, 2),
                          admissible_poly(rng, kernel.lambdas, 3),
                          kernel, 1.0)
        gains = synthesize_gains(p, 1e-3)
        expect = apply_poly_matrix(p.poly_p0, step.entries / 4)
        np.testing.assert_allclose(reconstruct_P(gains, kernel, 0.0, 4), expect,
                                   atol=1e-10)


class TestDecouplingIdentities:
    def test_quadratic_form_splits(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            n = int(rng.integers(4, 12))
            rank = int(rng.integers(1, min(4, n)))
            g, entries = make_rank_kernel(rng, n, rank)
            poly_q = admissible_poly(rng, g.lambdas, int(rng.integers(0, 4)))
            x = rng.standard_normal(n)
            q_mat = apply_poly_matrix(poly_q, entries / n)
            direct = x @ q_mat @ x / n
            ds = project_state(x, g)
            split = (poly_q.const * ds.auxiliary @ ds.auxiliary / n
                     + np.atleast_1d(poly_q(g.lambdas)) @ ds.eigen_coords ** 2)
            assert abs(direct - split) <= 1e-8

    def test_cross_terms_vanish(self):
        rng = np.random.default_rng(22)
        g, entries = make_rank_kernel(rng, 10, 3)
        x = rng.standard_normal(10)
        ds = project_state(x, g)
        f = g.eigfun_values(midpoint_grid(10))
        eig_part = f.T @ ds.eigen_coords
        scaled = entries / 10
        power = np.eye(10)
        for _ in range(5):  # k = 0..4
            assert abs(ds.auxiliary @ power @ eig_part / 10) <= 1e-10
            power = power @ scaled


class TestClosedLoopStructure:
    def test_eigenstate_flow_matches_simulation(self, vii_problem):
        n, dt = 40, 1e-3
        gains = synthesize_gains(vii_problem, dt)
        sys_ = gl.build_step_system(gl.sample_step_entries(vii_problem.graphon, n),
                                    vii_problem)
        x0 = gl.initial_state(n, 5)
        traj = gl.simulate(sys_, feedback_controller(vii_problem, gains), x0,
                           vii_problem.horizon, dt)
        coords_pred = eigenstate_flow(vii_problem, gains,
                                      project_state(x0, vii_problem.graphon).eigen_coords)
        f = vii_problem.graphon.eigfun_values(midpoint_grid(n))
        for k in range(0, traj.grid.size, 100):
            measured = f @ traj.states[k] / n
            np.testing.assert_allclose(measured, coords_pred(traj.grid[k]),
                                       atol=1e-5)

    def test_precompute_mode_matches_projection_mode(self, vii_problem):
        n, dt = 40, 1e-3
        gains = synthesize_gains(vii_problem, dt)
        sys_ = gl.build_step_system(gl.sample_step_entries(vii_problem.graphon, n),
                                    vii_problem)
        x0 = gl.initial_state(n, 6)
        t_proj = gl.simulate(sys_, feedback_controller(vii_problem, gains), x0,
                             vii_problem.horizon, dt)
        t_pre = gl.simulate(sys_, feedback_controller(vii_problem, gains,
                                                      eigenstate_mode="precompute",
                                                      x0=x0),
                            x0, vii_problem.horizon, dt)
        assert np.abs(t_proj.states - t_pre.states).max() <= 1e-6

    def test_precompute_requires_initial_state(self, vii_problem):
        gains = synthesize_gains(vii_problem, 1e-3)
        with pytest.raises(ValueError, match="x0"):
            feedback_controller(vii_problem, gains, eigenstate_mode="precompute")

    def test_horizon_mismatch_rejected(self, vii_problem):
        other = sinusoidal_problem(horizon=2.0)
        gains = synthesize_gains(other, 1e-3)
        with pytest.raises(ValueError, match="horizon"):
            feedback_controller(vii_problem, gains)


class TestTruncatedController:
    def test_full_level_equals_optimal(self, vii_problem):
        dt = 1e-3
        gains = synthesize_gains(vii_problem, dt)
        optimal = feedback_controller(vii_problem, gains)
        trunc = truncated_controller(vii_problem, vii_problem.d, dt)
        rng = np.random.default_rng(3)
        x = rng.standard_normal(40)
        np.testing.assert_array_equal(optimal(0.2, x), trunc(0.2, x))

    def test_level_zero_is_auxiliary_law(self, vii_problem):
        dt = 1e-3
        trunc = truncated_controller(vii_problem, 0, dt)
        gains = synthesize_gains(vii_problem, dt)
        rng = np.random.default_rng(4)
        x = rng.standard_normal(40)
        expect = -vii_problem.beta0 * gains.aux(vii_problem.horizon - 0.3) * x
        np.testing.assert_allclose(trunc(0.3, x), expect, atol=1e-12)

    def test_level_out_of_range(self, vii_problem):
        with pytest.raises(ValueError):
            truncated_controller(vii_problem, 3, 1e-3)


class TestRatioPrediction:
    def test_requires_constant_input_poly(self, vii_problem):
        with pytest.raises(ValueError, match="constant"):
            ratio_prediction(vii_problem, 1, 1e-3)

    def test_vanishing_eigenvalue_gives_unit_ratio(self):
        pair = gl.EigenPair(1e-12, lambda x: np.ones_like(np.asarray(x, float)))
        p = gl.LqrProblem(0.5, gl.CoeffPoly([1.0]), gl.CoeffPoly([1.0, -0.5]),
                          gl.CoeffPoly([0.3]), gl.FiniteRankGraphon([pair]), 1.0)
        assert ratio_prediction(p, 0, 1e-4) == pytest.approx(1.0, abs=1e-9)

    def test_matches_direct_gain_integral(self):
        p = sinusoidal_problem(poly_b=(1.0,))
        dt = 1e-4
        pred = ratio_prediction(p, 1, dt)
        m = gl.solve_riccati_numeric(gl.ScalarRiccatiSpec(2.5, 1.0, 0.25, 0.25, 1.0, dt))
        mt = gl.solve_riccati_numeric(gl.ScalarRiccatiSpec(2.0, 1.0, 1.0, 1.0, 1.0, dt))
        expect = np.exp(-np.trapezoid(mt.values - m.values, m.grid))
        assert pred == pytest.approx(expect, abs=1e-8)


class TestFirstOrderOptimality:
    def test_perturbations_never_beat_synthesized_control(self):
        rng = np.random.default_rng(30)
        g, entries = make_rank_kernel(rng, 5, 2)
        p = gl.LqrProblem(0.4, input_poly(rng, 1), admissible_poly(rng, g.lambdas, 2),
                          admissible_poly(rng, g.lambdas, 2), g, 1.0)
        dt = 1e-3
        sys_ = gl.build_step_system(entries, p)
        x0 = gl.initial_state(5, 31)
        gains = synthesize_gains(p, dt)
        base = feedback_controller(p, gains)
        j_opt = gl.evaluate_cost(gl.simulate(sys_, base, x0, p.horizon, dt), sys_).total
        for _ in range(5):
            w = rng.standard_normal(5)
            freq = rng.uniform(0.5, 3.0)
            pert = lambda t, x: base(t, x) + 1e-3 * np.cos(freq * t) * w
            j = gl.evaluate_cost(gl.simulate(sys_, pert, x0, p.horizon, dt), sys_).total
            assert j >= j_opt - 1e-8
