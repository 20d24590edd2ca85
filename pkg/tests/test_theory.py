import numpy as np
import pytest

from curriculum_teaching.curricula import CandidatePool, CandidateSet
from curriculum_teaching.mdp import Demonstration, FeatureMap, TabularMdp, enumerate_trajectories
from curriculum_teaching.theory import (
    argmax_corollary_suite,
    check_crossent_firstorder,
    check_gibbs_consistency,
    check_maxent_identity,
    check_step_size_condition,
    convergence_experiment,
    crossent_firstorder_suite,
    enumerate_log_partition,
    gibbs_suite,
    maxent_identity_suite,
    monotonicity_experiment,
    random_episodic_mdp,
    write_check_report,
)

from conftest import random_mdp


class TestInstanceGenerator:
    def test_layered_structure(self):
        rng = np.random.default_rng(0)
        mdp, fmap = random_episodic_mdp(rng, n_states=8, n_actions=3, depth=5)
        assert mdp.gamma == 1.0
        assert mdp.is_deterministic()
        assert mdp.terminal_mask[-1]
        assert mdp.p0[0] == 1.0
        demos = enumerate_trajectories(mdp, 0, 20)
        assert demos
        assert all(len(d) <= 5 for d in demos)
        assert all(d.final_state == mdp.n_states - 1 for d in demos)
        assert fmap.table.shape[2] == 4

    def test_checks_refuse_wrong_regime(self):
        mdp = random_mdp(1, gamma=0.9)
        fmap = FeatureMap(np.zeros((mdp.n_states, mdp.n_actions, 2)))
        with pytest.raises(ValueError):
            check_gibbs_consistency(mdp, fmap, np.zeros(2))


class TestGibbs:
    def test_partition_function_equals_soft_value(self):
        rng = np.random.default_rng(2)
        mdp, fmap = random_episodic_mdp(rng)
        theta = rng.normal(size=4)
        from curriculum_teaching.mdp import soft_value_iteration

        log_z, _ = enumerate_log_partition(mdp, fmap, theta, 0)
        sol = soft_value_iteration(mdp, reward=fmap.table @ theta, tol=1e-13)
        assert log_z == pytest.approx(float(sol.v[0]), abs=1e-9)

    def test_suite_exact(self):
        reports = gibbs_suite(0, n_instances=5)
        assert max(r.max_rel_error for r in reports) < 1e-10


class TestMaxentIdentity:
    def test_theta_equal_gives_zero_everywhere(self):
        rng = np.random.default_rng(3)
        mdp, fmap = random_episodic_mdp(rng)
        theta = rng.normal(size=4)
        demos = enumerate_trajectories(mdp, 0, mdp.horizon)
        report = check_maxent_identity(mdp, fmap, theta, theta, [(demos[0], demos[1])])
        assert report.max_abs < 1e-10

    def test_identical_pair_zero_pairwise(self):
        rng = np.random.default_rng(4)
        mdp, fmap = random_episodic_mdp(rng)
        demos = enumerate_trajectories(mdp, 0, mdp.horizon)
        report = check_maxent_identity(
            mdp, fmap, rng.normal(size=4), rng.normal(size=4), [(demos[2], demos[2])]
        )
        assert abs(report.pairwise_residuals[0]) == 0.0

    def test_suite_residuals_tiny(self):
        reports = maxent_identity_suite(5, n_tuples=30)
        assert max(r.max_abs for r in reports) < 1e-9

    def test_argmax_corollary_perfect(self):
        assert argmax_corollary_suite(6, n_steps=30) == 1.0


class TestCrossentFirstOrder:
    def test_eps_zero_residual_zero(self):
        rng = np.random.default_rng(7)
        fmap = FeatureMap(rng.normal(size=(4, 3, 3)))
        demo = Demonstration(np.array([[0, 1], [2, 0]]))
        report = check_crossent_firstorder(fmap, rng.normal(size=3), rng.normal(size=3), demo,
                                           eps_values=(0.0,))
        assert report.residuals[0] < 1e-12

    def test_linear_logpartition_direction_residual_zero(self):
        # equal features across actions make the log partition linear in theta
        table = np.ones((3, 2, 2))
        demo = Demonstration(np.array([[0, 0]]))
        report = check_crossent_firstorder(FeatureMap(table), np.zeros(2), np.array([1.0, 0.0]), demo)
        assert np.all(report.residuals < 1e-12)

    def test_slope_is_quadratic(self):
        reports = crossent_firstorder_suite(8, n_instances=8)
        for r in reports:
            assert 1.8 <= r.slope <= 2.2


class TestStepSize:
    def test_zero_eta_vacuous(self):
        ok = check_step_size_condition([0.0], [[1.0, 2.0]], [[1.0, 0.0]])
        assert ok[0]

    def test_orthogonal_gradient_violates(self):
        ok = check_step_size_condition([0.1], [[0.0, 1.0]], [[1.0, 0.0]])
        assert not ok[0]

    def test_aligned_small_eta_passes(self):
        ok = check_step_size_condition([0.01], [[1.0, 0.0]], [[1.0, 0.0]], c=0.1)
        assert ok[0]


class TestMonotonicity:
    def _setup(self, seed):
        rng = np.random.default_rng(seed)
        mdp, fmap = random_episodic_mdp(rng, n_states=10, n_actions=3, depth=6, feature_dim=5)
        demos = enumerate_trajectories(mdp, 0, mdp.horizon)
        pool = CandidatePool([CandidateSet.single(d) for d in demos])
        return mdp, fmap, pool, rng

    def test_zero_eta_degenerate(self):
        mdp, fmap, pool, rng = self._setup(9)
        report = monotonicity_experiment(
            mdp, fmap, rng.normal(size=5), rng.normal(size=5) * 0.3, pool, eta=0.0, bins=3
        )
        flat = report.bin_means[~np.isnan(report.bin_means)]
        assert np.allclose(flat, 0.0)

    def test_single_candidate_pool_warns(self):
        mdp, fmap, pool, rng = self._setup(10)
        tiny = CandidatePool([pool.candidates[0]])
        with pytest.warns(UserWarning):
            report = monotonicity_experiment(
                mdp, fmap, rng.normal(size=5), rng.normal(size=5), tiny, eta=0.01, bins=3
            )
        assert report.n_pairs_e == 0 or np.isnan(report.frac_decreasing_in_e)

    def test_predicted_slope_signs(self):
        mdp, fmap, pool, rng = self._setup(11)
        report = monotonicity_experiment(
            mdp, fmap, rng.normal(size=5), rng.normal(size=5) * 0.3, pool, eta=0.01, bins=4
        )
        assert report.frac_decreasing_in_e >= 0.8
        assert report.frac_increasing_in_l >= 0.8


class TestConvergence:
    def test_start_at_target_stays_near_zero(self):
        rng = np.random.default_rng(12)
        mdp, fmap = random_episodic_mdp(rng, n_states=8, depth=5, feature_dim=3)
        demos = enumerate_trajectories(mdp, 0, mdp.horizon)
        pool = CandidatePool([CandidateSet.single(d) for d in demos])
        theta_star = rng.normal(size=3)
        report = convergence_experiment(mdp, fmap, theta_star, theta_star.copy(), pool,
                                        eta=0.005, n_steps=50)
        assert report.distances[0] == 0.0
        # hovers at the update-noise floor, never escapes
        assert report.distances.max() < 0.15

    def test_aligned_synthetic_pool_contracts_geometrically(self):
        # star MDP: one step from the start, feature vectors all along one axis
        n_branches = 4
        n_states = 2
        transition = np.zeros((n_states, n_branches, n_states))
        transition[0, :, 1] = 1.0
        transition[1, :, 1] = 1.0
        mdp = TabularMdp(
            transition=transition,
            reward=np.zeros((n_states, n_branches)),
            gamma=1.0,
            p0=np.array([1.0, 0.0]),
            terminal_mask=np.array([False, True]),
            horizon=2,
        )
        direction = np.array([1.0, 0.0])
        magnitudes = [0.5, 1.0, 1.5, 2.0]
        table = np.zeros((n_states, n_branches, 2))
        for k, r in enumerate(magnitudes):
            table[0, k] = r * direction
        fmap = FeatureMap(table)
        demos = enumerate_trajectories(mdp, 0, 2)
        pool = CandidatePool([CandidateSet.single(d) for d in demos])
        theta_star = 3.0 * direction
        report = convergence_experiment(mdp, fmap, theta_star, np.zeros(2), pool,
                                        eta=0.2, n_steps=60)
        # every selected feature vector lies exactly along theta* - theta_t
        assert report.diagnostics.max_delta < 1e-12
        pre = report.distances[: report.fit_steps]
        assert np.all(np.diff(pre) < 0)

    def test_pinned_instance_converges_linearly(self):
        rng = np.random.default_rng(7)
        mdp, fmap = random_episodic_mdp(rng, n_states=8, n_actions=3, depth=6, feature_dim=3)
        demos = enumerate_trajectories(mdp, 0, mdp.horizon)
        pool = CandidatePool([CandidateSet.single(d) for d in demos])
        theta_star = rng.normal(0, 1.5, size=3)
        report = convergence_experiment(mdp, fmap, theta_star, np.zeros(3), pool,
                                        eta=0.01, n_steps=200)
        assert report.argmax_agreement == 1.0
        assert report.fit_r2 >= 0.9
        assert report.distances[-1] < 0.1 * report.distances[0]
        assert (~report.step_size_ok[: report.fit_steps]).sum() == 0
        assert report.diagnostics.max_orthogonality_gap < 1e-10


class TestReports:
    def test_report_files_deterministic(self, tmp_path):
        rows = [{"a": 1, "b": repr(0.5)}, {"a": 2, "b": repr(0.25)}]
        p1, t1 = write_check_report(tmp_path / "x", "check", 7, rows, ["line1", "line2"])
        c1, s1 = p1.read_bytes(), t1.read_bytes()
        p2, t2 = write_check_report(tmp_path / "y", "check", 7, rows, ["line1", "line2"])
        assert p2.read_bytes() == c1
        assert t2.read_bytes() == s1
        assert p1.name == "check_seed7.csv"
