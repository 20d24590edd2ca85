import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "curriculum_teaching"]


def run_cli(*args, cwd=None):
    return subprocess.run([*CLI, *args], capture_output=True, text=True, cwd=cwd)


class TestExitCodes:
    def test_missing_config_is_config_error(self, tmp_path):
        result = run_cli("run", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path))
        assert result.returncode == 3
        assert "error[config]" in result.stderr
        assert "config not found" in result.stderr

    def test_unknown_flag_is_usage_error(self):
        result = run_cli("run", "--nonsense")
        assert result.returncode == 2

    def test_unknown_subcommand_is_usage_error(self):
        result = run_cli("frobnicate")
        assert result.returncode == 2

    def test_missing_log_is_validation_error(self, tmp_path):
        result = run_cli("plot", "--logs", str(tmp_path / "no.csv"), "--out", str(tmp_path))
        assert result.returncode == 4
        assert "error[validation]" in result.stderr


class TestGenDataset:
    def test_small_shortest_path_counts(self, tmp_path):
        out = tmp_path / "ds"
        result = run_cli(
            "gen-dataset", "shortest-path", "--seed", "1", "--out", str(out),
            "--counts", "2,1,1", "--max-objects", "1",
        )
        assert result.returncode == 0, result.stderr
        # 2x2 object combos x counts
        assert len(list((out / "train").glob("*.task"))) == 8
        assert len(list((out / "val").glob("*.task"))) == 4
        assert len(list((out / "test").glob("*.task"))) == 4
        assert (out / "manifest.json").exists()

    def test_inspect_dataset(self, tmp_path):
        out = tmp_path / "ds"
        run_cli("gen-dataset", "tsp", "--seed", "0", "--out", str(out), "--counts", "1,1,1")
        result = run_cli("inspect", str(out))
        assert result.returncode == 0
        assert '"kind": "tsp"' in result.stdout


class TestRunAndPlot:
    @pytest.fixture()
    def config_file(self, tmp_path):
        text = "\n".join(
            [
                "[experiment]",
                "kind = teacher_centric",
                "strategy = CUR",
                "seed = 0",
                "n_seeds = 1",
                "[teacher_centric]",
                "steps = 3",
                "parameterization = linear",
                "demos_per_start = 2",
            ]
        )
        path = tmp_path / "exp.ini"
        path.write_text(text + "\n")
        return path

    def test_run_then_plot_then_inspect(self, config_file, tmp_path):
        out = tmp_path / "out"
        result = run_cli("run", "--config", str(config_file), "--out", str(out))
        assert result.returncode == 0, result.stderr
        log = out / "run_seed0.csv"
        assert log.exists()

        plots = tmp_path / "plots"
        result = run_cli("plot", "--logs", str(log), "--out", str(plots))
        assert result.returncode == 0
        assert list(plots.glob("*.png"))

        result = run_cli("inspect", str(out))
        assert result.returncode == 0
        assert "config_hash" in result.stdout

        result = run_cli("inspect", str(log))
        assert result.returncode == 0
        assert "rows" in result.stdout

    def test_rerun_reproduces_csv_bytes(self, config_file, tmp_path):
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert run_cli("run", "--config", str(config_file), "--out", str(out1)).returncode == 0
        assert run_cli("run", "--config", str(config_file), "--out", str(out2)).returncode == 0
        assert (out1 / "run_seed0.csv").read_bytes() == (out2 / "run_seed0.csv").read_bytes()


class TestValidateTheory:
    def test_reports_byte_identical_across_reruns(self, tmp_path):
        out1, out2 = tmp_path / "t1", tmp_path / "t2"
        r1 = run_cli("validate-theory", "--seed", "7", "--out", str(out1))
        r2 = run_cli("validate-theory", "--seed", "7", "--out", str(out2))
        assert r1.returncode == 0, r1.stdout + r1.stderr
        assert r2.returncode == 0
        files1 = sorted(p.name for p in out1.iterdir())
        assert files1 == sorted(p.name for p in out2.iterdir())
        for name in files1:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
        assert "gibbs_consistency: pass" in r1.stdout
