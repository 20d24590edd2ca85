"""Sequential teaching on the car strip: curriculum vs random ordering.

Runs the reward learner with the curriculum teacher and the agnostic
baseline for a few seeds each, prints the reward trajectories, and emits
the convergence and curriculum figures into demos_output/car/.
"""

import pathlib

import numpy as np

from curriculum_teaching.harness.config import ExperimentConfig
from curriculum_teaching.harness.plots import emit_plots
from curriculum_teaching.harness.runs import run_teacher_centric

OUT = pathlib.Path("demos_output/car")

for strategy in ("CUR", "AGN"):
    cfg = ExperimentConfig(strategy=strategy, seed=0, n_seeds=3)
    tc = cfg.teacher_centric
    tc.steps = 80
    tc.parameterization = "quadratic"
    tc.eta = 0.8
    tc.teacher_sharpness = 3.0
    logs = []
    for seed in cfg.seeds():
        log, _ = run_teacher_centric(cfg, seed=seed, out_dir=OUT / strategy)
        logs.append(log)
    values = np.stack([log.column("value") for log in logs])
    print(f"{strategy}: start {values[:, 0].mean():.2f} -> final {values[:, -1].mean():.2f} "
          f"(teacher value {logs[0].meta['teacher_value']:.2f})")
    emit_plots([OUT / strategy / f"run_seed{s}.csv" for s in cfg.seeds()], OUT / strategy)

print(f"\nfigures in {OUT}/CUR and {OUT}/AGN")
print("the curriculum scatter shows which task type the teacher picked at each step")
