import numpy as np
import pytest

from curriculum_teaching.envs import grids
from curriculum_teaching.envs.datasets import (
    GenerationError,
    generate_shortest_path_dataset,
    generate_tsp_dataset,
    load_dataset,
    save_dataset,
)


@pytest.fixture(scope="module")
def small_sp():
    # 2 x 2 object combinations, 4/2/2 grids per combination
    return generate_shortest_path_dataset(
        seed=0,
        counts={"train": 4, "val": 2, "test": 2},
        mud_range=range(0, 2),
        bomb_range=range(0, 2),
    )


@pytest.fixture(scope="module")
def small_tsp():
    return generate_tsp_dataset(seed=0, counts={"train": 4, "val": 2, "test": 2})


class TestShortestPathGeneration:
    def test_split_sizes(self, small_sp):
        assert small_sp.counts() == {"train": 16, "val": 8, "test": 8}

    def test_even_goal_split(self, small_sp):
        goals = [len(rec.task.goals) for rec in small_sp.splits["train"]]
        assert goals.count(1) == goals.count(2) == 8

    def test_object_counts_cover_ranges(self, small_sp):
        combos = {(len(r.task.muds), len(r.task.bombs)) for r in small_sp.splits["train"]}
        assert combos == {(m, b) for m in range(2) for b in range(2)}

    def test_train_tasks_have_optimal_demos(self, small_sp):
        for rec in small_sp.splits["train"]:
            assert rec.demos
            engine = grids.compile_task(rec.task)
            for demo in rec.demos:
                assert demo.discounted_return(engine.rewards, 1.0) == rec.optimal_reward

    def test_path_counts_positive(self, small_sp):
        assert all(rec.n_optimal_paths >= 1 for rec in small_sp.splits["train"])

    def test_difficulty_calibration_min_is_one(self, small_sp):
        denoms = [r.raw_denominator + small_sp.calibration_shift for r in small_sp.splits["train"]]
        assert min(denoms) == pytest.approx(1.0)
        assert all(d >= 1.0 for d in denoms)

    def test_difficulty_formula(self, small_sp):
        rec = small_sp.splits["train"][0]
        denom = rec.raw_denominator + small_sp.calibration_shift
        assert rec.psi_e == pytest.approx(len(rec.task.goals) * rec.n_optimal_paths / denom)

    def test_difficulty_proportional_to_path_count(self, small_sp):
        rec = small_sp.splits["train"][0]
        denom = rec.raw_denominator + small_sp.calibration_shift
        doubled = len(rec.task.goals) * (2 * rec.n_optimal_paths) / denom
        assert doubled == pytest.approx(2 * rec.psi_e)

    def test_deterministic_generation(self):
        kwargs = dict(counts={"train": 2, "val": 1, "test": 1},
                      mud_range=range(0, 1), bomb_range=range(0, 1))
        a = generate_shortest_path_dataset(seed=3, **kwargs)
        b = generate_shortest_path_dataset(seed=3, **kwargs)
        for split in ("train", "val", "test"):
            for ra, rb in zip(a.splits[split], b.splits[split]):
                assert ra.task == rb.task
                assert ra.psi_e == rb.psi_e


class TestTspGeneration:
    def test_split_sizes_per_goal_count(self, small_tsp):
        assert small_tsp.counts() == {"train": 12, "val": 6, "test": 6}
        goals = [len(r.task.goals) for r in small_tsp.splits["train"]]
        assert sorted(set(goals)) == [2, 3, 4]
        assert all(goals.count(g) == 4 for g in (2, 3, 4))

    def test_greedy_gap_nonnegative(self, small_tsp):
        for rec in small_tsp.splits["train"]:
            assert rec.greedy_gap >= 0

    def test_demo_returns_match_oracle(self, small_tsp):
        for rec in small_tsp.splits["train"]:
            engine = grids.compile_task(rec.task)
            for demo in rec.demos:
                assert demo.discounted_return(engine.rewards, 1.0) == rec.optimal_reward

    def test_difficulty_formula(self, small_tsp):
        rec = small_tsp.splits["train"][0]
        denom = rec.raw_denominator + small_tsp.calibration_shift
        assert rec.psi_e == pytest.approx(len(rec.task.goals) / denom)

    def test_larger_gap_means_harder(self, small_tsp):
        # same goal count: lower calibrated denominator implies higher psi
        recs = [r for r in small_tsp.splits["train"] if len(r.task.goals) == 3]
        for a in recs:
            for b in recs:
                if a.raw_denominator < b.raw_denominator:
                    assert a.psi_e > b.psi_e


class TestRoundTrip:
    def test_save_load_bit_exact(self, small_sp, tmp_path):
        save_dataset(small_sp, tmp_path / "ds")
        loaded = load_dataset(tmp_path / "ds")
        assert loaded.kind == small_sp.kind
        assert loaded.calibration_shift == small_sp.calibration_shift
        assert loaded.counts() == small_sp.counts()
        for split in ("train", "val", "test"):
            for ra, rb in zip(small_sp.splits[split], loaded.splits[split]):
                assert ra.task == rb.task
                assert ra.optimal_reward == rb.optimal_reward
                assert ra.n_optimal_paths == rb.n_optimal_paths
                assert ra.psi_e == rb.psi_e
                assert ra.demos == rb.demos

    def test_manifest_written(self, small_tsp, tmp_path):
        import json

        save_dataset(small_tsp, tmp_path / "ds")
        manifest = json.loads((tmp_path / "ds" / "manifest.json").read_text())
        assert manifest["kind"] == "tsp"
        assert manifest["seed"] == 0
        assert "calibration_shift" in manifest

    def test_file_layout(self, small_sp, tmp_path):
        save_dataset(small_sp, tmp_path / "ds")
        task_files = sorted((tmp_path / "ds" / "train").glob("*.task"))
        demo_files = sorted((tmp_path / "ds" / "train").glob("*.demos"))
        assert len(task_files) == 16
        assert len(demo_files) == 16  # every train task has demos
        assert len(list((tmp_path / "ds" / "val").glob("*.task"))) == 8
        assert not list((tmp_path / "ds" / "val").glob("*.demos"))


class TestFeasibility:
    def test_generated_tasks_reach_a_goal(self, small_sp):
        from curriculum_teaching.envs.datasets import _feasible_shortest_path

        for split in small_sp.splits.values():
            for rec in split:
                assert _feasible_shortest_path(rec.task)

    def test_generation_error_surfaces(self):
        from curriculum_teaching.envs.datasets import _sample_sp_task

        class NoRetryRng:
            def __init__(self):
                self.rng = np.random.default_rng(0)

            def choice(self, *a, **k):
                raise GenerationError("forced")

            def integers(self, *a, **k):
                return self.rng.integers(*a, **k)

        with pytest.raises(GenerationError):
            _sample_sp_task(NoRetryRng(), 1, 0, 0, max_retries=1)
