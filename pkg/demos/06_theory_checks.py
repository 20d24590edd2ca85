"""Run the numerical theory checks and print their reports.

Each check validates one identity or predicted behavior on seeded random
instances: trajectory-weight consistency, the reward-learner identity and
its selection corollary, the quadratic scaling of the cloning learner's
first-order remainder, difficulty-score monotonicity of the one-step
progress, and linear convergence of the curriculum teacher.
"""

import pathlib

from curriculum_teaching.theory import run_all_checks

OUT = pathlib.Path("demos_output/theory")
results = run_all_checks(seed=7, outdir=OUT)
for name, passed in results.items():
    print(f"{name:22s} {'pass' if passed else 'FAIL'}")
print(f"\nper-check CSV + summaries in {OUT}")
