"""Navigation datasets and scheduled epoch training, at demo scale.

Generates a reduced shortest-path dataset (the full published sizes are
169 combinations x 100/10/30 grids), trains the scoring network for a few
epochs under the curriculum and the random ordering, and emits the
test-reward and curriculum-feature figures into demos_output/navigation/.
"""

import pathlib

from curriculum_teaching.envs.datasets import generate_shortest_path_dataset
from curriculum_teaching.harness.config import ExperimentConfig
from curriculum_teaching.harness.plots import emit_plots
from curriculum_teaching.harness.runs import run_learner_centric

OUT = pathlib.Path("demos_output/navigation")

dataset = generate_shortest_path_dataset(
    seed=0,
    counts={"train": 6, "val": 1, "test": 4},
    mud_range=range(0, 4),
    bomb_range=range(0, 4),
)
print("dataset:", dataset.counts(), f"(calibration shift {dataset.calibration_shift:+.1f})")

for strategy in ("CUR", "AGN"):
    cfg = ExperimentConfig(kind="learner_centric", environment="shortest_path",
                           strategy=strategy, seed=0)
    lc = cfg.learner_centric
    lc.epochs = 8
    lc.batch_size = 16
    lc.eval_size = 30
    lc.eval_every = 5
    lc.hidden = (32, 32)
    log, _ = run_learner_centric(cfg, dataset, out_dir=OUT / strategy)
    rewards = log.column("test_reward")
    print(f"{strategy}: test reward {rewards[0]:.2f} -> {rewards[-1]:.2f} "
          f"over {log.rows[-1][2]} demonstrations")
    emit_plots([OUT / strategy / "train_seed0.csv"], OUT / strategy)

print(f"\nfigures in {OUT}; the feature lines show the moving average of the")
print("selected tasks' properties (goals, muds, bombs, optimal reward) over training")
