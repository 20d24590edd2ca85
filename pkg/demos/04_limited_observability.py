"""Teaching when the learner's policy must be probed instead of read.

The teacher refreshes its estimate of the learner's policy only every B
steps, from k sampled actions per state. (B=1, k=None) is full
observability; this script compares it against (B=40, k=10000).
"""

import numpy as np

from curriculum_teaching.harness.config import ExperimentConfig
from curriculum_teaching.harness.runs import run_teacher_centric

for label, b, k in (("full observability", 1, None), ("B=40, k=10^4", 40, 10_000)):
    finals = []
    for seed in range(3):
        cfg = ExperimentConfig(strategy="CUR", seed=seed)
        tc = cfg.teacher_centric
        tc.steps = 80
        tc.parameterization = "quadratic"
        tc.eta = 0.8
        tc.teacher_sharpness = 3.0
        tc.probe_b = b
        tc.probe_k = k
        log, _ = run_teacher_centric(cfg, seed=seed)
        finals.append(log.column("value")[-1])
    print(f"{label:20s} final reward {np.mean(finals):.3f} (3 seeds)")
