import numpy as np
import pytest

from densigraph import (Environment, ModelParams, Partition, Trajectory,
                        build_partition, load_environment, load_trajectory,
                        sample_environment, save_environment, save_trajectory,
                        transition_probabilities, transition_probability)
from _reference import transition_probability_loops


def make_env(theta, r_plus=0.5):
    theta = np.asarray(theta, dtype=np.uint8)
    return Environment(theta=theta, partition=build_partition(len(theta), r_plus))


class TestModelParams:
    def test_admissible_flag(self):
        assert ModelParams(mu=0.25, lam=0.5, p=0.5, r_plus=0.5, n=10).admissible
        assert not ModelParams(mu=0.0, lam=0.5, p=0.5, r_plus=0.5, n=10).admissible
        assert not ModelParams(mu=0.2, lam=0.5, p=1.0, r_plus=0.5, n=10).admissible

    def test_relaxed_corners_construct(self):
        ModelParams(mu=0.0, lam=1.0, p=0.0, r_plus=0.5, n=1)
        ModelParams(mu=0.5, lam=0.5, p=1.0, r_plus=0.5, n=3)  # mu = lam

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            ModelParams(mu=0.6, lam=0.5, p=0.5, r_plus=0.5, n=3)
        with pytest.raises(ValueError):
            ModelParams(mu=0.1, lam=0.5, p=1.5, r_plus=0.5, n=3)
        with pytest.raises(ValueError):
            ModelParams(mu=0.1, lam=0.5, p=0.5, r_plus=1.0, n=3)
        with pytest.raises(ValueError):
            ModelParams(mu=0.1, lam=0.5, p=0.5, r_plus=0.5, n=0)

    def test_derived_quantities(self):
        params = ModelParams(mu=0.25, lam=0.5, p=0.5, r_plus=0.7, n=4)
        assert params.beta == 0.5
        assert params.r_minus == pytest.approx(0.3)


class TestPartition:
    def test_ceiling_rule_examples(self):
        assert build_partition(4, 0.5).size_plus == 2
        assert build_partition(1, 0.7).size_plus == 1
        assert build_partition(10, 0.75).size_plus == 8

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            build_partition(0, 0.5)
        with pytest.raises(ValueError):
            build_partition(5, 0.0)
        with pytest.raises(ValueError):
            build_partition(5, 1.0)

    def test_fraction_deviation_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 400))
            r_plus = float(rng.uniform(0.01, 0.99))
            part = build_partition(n, r_plus)
            dev_plus = abs(part.size_plus / n - r_plus)
            dev_minus = abs(part.size_minus / n - (1 - r_plus))
            assert max(dev_plus, dev_minus) <= 1.0 / n + 1e-12

    def test_sign_vector(self):
        part = Partition(n=5, size_plus=2)
        assert part.sign_vector().tolist() == [1, 1, -1, -1, -1]


class TestSampleEnvironment:
    def test_degenerate_densities(self):
        ones = sample_environment(
            ModelParams(mu=0.1, lam=0.5, p=1.0, r_plus=0.5, n=6), seed=1)
        zeros = sample_environment(
            ModelParams(mu=0.1, lam=0.5, p=0.0, r_plus=0.5, n=6), seed=1)
        assert ones.theta.all()
        assert not zeros.theta.any()

    def test_edge_count_binomial_concentration(self):
        n = 200
        params = ModelParams(mu=0.1, lam=0.5, p=0.5, r_plus=0.5, n=n)
        env = sample_environment(params, seed=99)
        count = int(env.theta.sum())
        sigma = (n * n * 0.25) ** 0.5
        assert abs(count - 0.5 * n * n) <= 3 * sigma

    def test_reproducible(self):
        params = ModelParams(mu=0.1, lam=0.5, p=0.3, r_plus=0.6, n=40)
        a = sample_environment(params, seed=5)
        b = sample_environment(params, seed=5)
        c = sample_environment(params, seed=6)
        assert np.array_equal(a.theta, b.theta)
        assert not np.array_equal(a.theta, c.theta)

    def test_metadata_recorded(self):
        params = ModelParams(mu=0.1, lam=0.5, p=0.3, r_plus=0.6, n=8)
        env = sample_environment(params, seed=17)
        assert env.p == 0.3 and env.seed == 17


class TestTransitionProbability:
    def test_all_zero_with_empty_inhibitory_set(self):
        # r_plus = 0.9, n = 4 makes every site excitatory
        params = ModelParams(mu=0.2, lam=0.6, p=0.5, r_plus=0.9, n=4)
        env = make_env(np.ones((4, 4)), r_plus=0.9)
        assert env.partition.size_minus == 0
        x = np.zeros(4, dtype=np.uint8)
        for i in range(4):
            assert transition_probability(env, params, x, i) == pytest.approx(0.2)

    def test_hand_evaluated_fixture(self):
        params = ModelParams(mu=0.2, lam=0.6, p=0.5, r_plus=2 / 3, n=3)
        env = make_env([[0, 1, 1], [0, 0, 0], [0, 0, 0]], r_plus=2 / 3)
        assert env.partition.size_plus == 2
        value = transition_probability(env, params, [0, 1, 0], 0)
        assert value == pytest.approx(0.2 + 0.4 * (2 / 3), abs=1e-15)

    def test_all_ones_full_graph_no_inhibition(self):
        params = ModelParams(mu=0.1, lam=0.7, p=1.0, r_plus=0.9, n=5)
        env = make_env(np.ones((5, 5)), r_plus=0.9)
        x = np.ones(5, dtype=np.uint8)
        expected = 0.1 + 0.3 * env.partition.size_plus / 5
        for i in range(5):
            assert transition_probability(env, params, x, i) == pytest.approx(expected)

    def test_bounds_always_hold(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(1, 30))
            params = ModelParams(mu=float(rng.uniform(0, 0.3)),
                                 lam=float(rng.uniform(0.31, 1.0)),
                                 p=0.5, r_plus=float(rng.uniform(0.1, 0.9)), n=n)
            env = make_env(rng.integers(0, 2, size=(n, n)), r_plus=params.r_plus)
            x = rng.integers(0, 2, size=n)
            i = int(rng.integers(0, n))
            value = transition_probability(env, params, x, i)
            assert params.mu - 1e-15 <= value <= params.mu + (1 - params.lam) + 1e-15

    def test_matches_double_loop_reference(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            n = int(rng.integers(1, 51))
            r_plus = float(rng.uniform(0.05, 0.95))
            params = ModelParams(mu=float(rng.uniform(0, 0.4)),
                                 lam=float(rng.uniform(0.41, 0.99)),
                                 p=0.5, r_plus=r_plus, n=n)
            env = make_env(rng.integers(0, 2, size=(n, n)), r_plus=r_plus)
            x = rng.integers(0, 2, size=n)
            vector = transition_probabilities(env, params, x)
            for i in range(n):
                ref = transition_probability_loops(
                    env.theta, env.partition.size_plus, params.mu, params.lam, x, i)
                assert abs(transition_probability(env, params, x, i) - ref) <= 1e-15
                assert abs(vector[i] - ref) <= 1e-15

    def test_index_and_shape_errors(self):
        params = ModelParams(mu=0.1, lam=0.5, p=0.5, r_plus=0.5, n=3)
        env = make_env(np.zeros((3, 3)))
        with pytest.raises(IndexError):
            transition_probability(env, params, [0, 0, 0], 3)
        with pytest.raises(IndexError):
            transition_probability(env, params, [0, 0, 0], -1)
        with pytest.raises(ValueError):
            transition_probability(env, params, [0, 0], 0)


class TestTrajectory:
    def test_counts_cumulative(self):
        traj = Trajectory(np.array([[1, 0, 1], [0, 1, 1]], dtype=np.uint8))
        assert traj.counts().tolist() == [[1, 1, 2], [0, 1, 2]]

    def test_prefix_view(self):
        traj = Trajectory(np.array([[1, 0, 1], [0, 1, 1]], dtype=np.uint8))
        assert traj.prefix(2).x.tolist() == [[1, 0], [0, 1]]
        with pytest.raises(ValueError):
            traj.prefix(0)
        with pytest.raises(ValueError):
            traj.prefix(4)

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            Trajectory(np.array([[2, 0]], dtype=np.uint8))

    def test_immutable(self):
        traj = Trajectory(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            traj.x[0, 0] = 1


class TestSerialization:
    def test_environment_round_trip(self, tmp_path):
        params = ModelParams(mu=0.1, lam=0.5, p=0.3, r_plus=0.6, n=12)
        env = sample_environment(params, seed=17)
        path = tmp_path / "env.txt"
        save_environment(env, path)
        loaded = load_environment(path)
        assert np.array_equal(loaded.theta, env.theta)
        assert loaded.partition == env.partition
        assert loaded.p == env.p and loaded.seed == env.seed

    def test_trajectory_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        traj = Trajectory(rng.integers(0, 2, size=(5, 9)).astype(np.uint8))
        path = tmp_path / "traj.csv"
        save_trajectory(traj, path)
        loaded = load_trajectory(path)
        assert np.array_equal(loaded.x, traj.x)
