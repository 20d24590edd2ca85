"""Seeded task datasets for the navigation environments.

Shortest-path grids sweep every (muds, bombs) pair in {0..12}^2 with a
fixed number of grids per split and an exact 50/50 split between one-goal
and two-goal layouts; tour grids sweep goal counts {2, 3, 4}. Every train
task stores its optimal demonstrations, and per-task difficulty combines
the task's structure with its solver outputs:

    shortest path: (#goals * #optimal_paths) / calibrated(optimal_reward)
    tour:          #goals / calibrated(optimal_reward - greedy_gap)

where calibrated(.) shifts the denominator so the train split's minimum is
exactly 1 (the shift is stored in the dataset manifest).
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass, field

import numpy as np

from ..mdp import load_demonstrations, save_demonstrations
from . import grids

SP_DEFAULT_COUNTS = {"train": 100, "val": 10, "test": 30}
TSP_DEFAULT_COUNTS = {"train": 2000, "val": 100, "test": 500}
SPLITS = ("train", "val", "test")

_TASK_SCHEMA = "grid-task/1"
_MANIFEST_SCHEMA = "dataset-manifest/1"


class GenerationError(RuntimeError):
    """Could not place a feasible task within the retry budget."""


@dataclass
class TaskRecord:
    task: grids.GridTask
    optimal_reward: float
    n_optimal_paths: int
    greedy_reward: float | None = None
    demos: list = field(default_factory=list)
    raw_denominator: float = 0.0
    psi_e: float | None = None

    @property
    def greedy_gap(self):
        if self.greedy_reward is None:
            return None
        return self.optimal_reward - self.greedy_reward


@dataclass
class TaskDataset:
    kind: str
    seed: int
    splits: dict
    calibration_shift: float
    meta: dict = field(default_factory=dict)

    def counts(self):
        return {split: len(records) for split, records in self.splits.items()}


def _sample_cells(rng, n):
    return rng.choice(grids.N_CELLS, size=n, replace=False)


def _feasible_shortest_path(task):
    """At least one goal reachable from the start without crossing a bomb."""
    from collections import deque

    blocked = set(task.bombs)
    goals = set(task.goals)
    seen = {task.start_cell}
    queue = deque([task.start_cell])
    while queue:
        cell = queue.popleft()
        if cell in goals:
            return True
        r, c = grids.cell_rc(cell)
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            r2, c2 = r + dr, c + dc
            if 0 <= r2 < grids.GRID and 0 <= c2 < grids.GRID:
                nxt = r2 * grids.GRID + c2
                if nxt not in seen and nxt not in blocked:
                    seen.add(nxt)
                    queue.append(nxt)
    return False


def _sample_sp_task(rng, n_goals, n_muds, n_bombs, max_retries=100):
    for _ in range(max_retries):
        cells = _sample_cells(rng, 1 + n_goals + n_muds + n_bombs)
        task = grids.GridTask(
            kind=grids.SHORTEST_PATH,
            start_cell=int(cells[0]),
            start_dir=int(rng.integers(grids.N_DIRS)),
            goals=tuple(int(c) for c in cells[1 : 1 + n_goals]),
            muds=tuple(int(c) for c in cells[1 + n_goals : 1 + n_goals + n_muds]),
            bombs=tuple(int(c) for c in cells[1 + n_goals + n_muds :]),
        )
        if _feasible_shortest_path(task):
            return task
    raise GenerationError(
        f"no feasible layout with {n_goals} goals, {n_muds} muds, {n_bombs} bombs"
    )


def _solve_sp(task, with_demos, demo_cap):
    engine = grids.compile_task(task)
    values = grids.engine_values(engine)
    return TaskRecord(
        task=task,
        optimal_reward=float(values[engine.start]),
        n_optimal_paths=grids.count_optimal_paths(engine, values),
        demos=grids.enumerate_optimal_demos(engine, cap=demo_cap, values=values)
        if with_demos
        else [],
    )


def generate_shortest_path_dataset(
    seed,
    counts=None,
    mud_range=range(0, 13),
    bomb_range=range(0, 13),
    goal_counts=(1, 2),
    demo_cap=64,
):
    """Exhaustive (muds, bombs) sweep with an exact even goal-count split.

    Default counts reproduce 169 * (100, 10, 30) = 16900 / 1690 / 5070
    tasks per split. Only train tasks store demonstrations.
    """
    counts = dict(SP_DEFAULT_COUNTS if counts is None else counts)
    rng = np.random.default_rng(seed)
    splits = {split: [] for split in SPLITS}
    for n_muds in mud_range:
        for n_bombs in bomb_range:
            for split in SPLITS:
                n = counts[split]
                per_goal = _even_split(n, goal_counts)
                for n_goals, quota in zip(goal_counts, per_goal):
                    for _ in range(quota):
                        task = _sample_sp_task(rng, n_goals, n_muds, n_bombs)
                        splits[split].append(
                            _solve_sp(task, with_demos=split == "train", demo_cap=demo_cap)
                        )
    return _calibrate(
        TaskDataset(
            kind=grids.SHORTEST_PATH,
            seed=int(seed),
            splits=splits,
            calibration_shift=0.0,
            meta={"counts": counts, "demo_cap": demo_cap},
        )
    )


def _even_split(n, goal_counts):
    base = n // len(goal_counts)
    out = [base] * len(goal_counts)
    for i in range(n - base * len(goal_counts)):
        out[i] += 1
    return out


def _solve_tsp(task, with_demos, demo_cap):
    optimal = grids.optimal_tour_reward(task)
    greedy = grids.greedy_tour_reward(task)
    demos = []
    if with_demos:
        engine = grids.compile_task(task)
        values = grids.engine_values(engine)
        if values[engine.start] != optimal:
            raise GenerationError(
                f"tour oracles disagree: dp={values[engine.start]} perm={optimal}"
            )
        demos = grids.enumerate_optimal_demos(engine, cap=demo_cap, values=values)
    return TaskRecord(
        task=task,
        optimal_reward=float(optimal),
        n_optimal_paths=0,
        greedy_reward=float(greedy),
        demos=demos,
    )


def generate_tsp_dataset(seed, counts=None, goal_counts=(2, 3, 4), demo_cap=4):
    """Tour tasks per goal count; defaults give 6000 / 300 / 1500 per split.

    The published per-goal-count sizes (2000/100/500) imply these totals;
    the conflicting aggregate figures quoted elsewhere are not used. The
    split sizes are configurable for smaller runs.
    """
    counts = dict(TSP_DEFAULT_COUNTS if counts is None else counts)
    rng = np.random.default_rng(seed)
    splits = {split: [] for split in SPLITS}
    for n_goals in goal_counts:
        for split in SPLITS:
            for _ in range(counts[split]):
                cells = _sample_cells(rng, 1 + n_goals)
                task = grids.GridTask(
                    kind=grids.TSP,
                    start_cell=int(cells[0]),
                    start_dir=int(rng.integers(grids.N_DIRS)),
                    goals=tuple(int(c) for c in cells[1:]),
                )
                splits[split].append(
                    _solve_tsp(task, with_demos=split == "train", demo_cap=demo_cap)
                )
    return _calibrate(
        TaskDataset(
            kind=grids.TSP,
            seed=int(seed),
            splits=splits,
            calibration_shift=0.0,
            meta={"counts": counts, "demo_cap": demo_cap},
        )
    )


def _raw_denominator(record):
    if record.task.kind == grids.SHORTEST_PATH:
        return record.optimal_reward
    return record.optimal_reward - record.greedy_gap


def _calibrate(dataset):
    """Shift denominators so the train minimum is exactly 1, then score.

    The shift is fitted on the train split (the only split the curriculum
    orders); other splits reuse it with a floor of 1 in case a task falls
    below the train minimum.
    """
    train = dataset.splits["train"]
    shift = 1.0 - min(_raw_denominator(r) for r in train)
    dataset.calibration_shift = float(shift)
    for records in dataset.splits.values():
        for r in records:
            r.raw_denominator = float(_raw_denominator(r))
            denom = max(r.raw_denominator + shift, 1.0)
            if dataset.kind == grids.SHORTEST_PATH:
                r.psi_e = float(len(r.task.goals) * r.n_optimal_paths / denom)
            else:
                r.psi_e = float(len(r.task.goals) / denom)
    return dataset


# ---------------------------------------------------------------------------
# disk layout: <split>/<task-id>.task + <task-id>.demos + manifest.json
# ---------------------------------------------------------------------------


def _cells_str(cells):
    return ",".join(str(c) for c in cells) if cells else "-"


def _cells_parse(text):
    return () if text == "-" else tuple(int(x) for x in text.split(","))


def save_dataset(dataset, root):
    root = pathlib.Path(root)
    for split, records in dataset.splits.items():
        split_dir = root / split
        split_dir.mkdir(parents=True, exist_ok=True)
        for i, rec in enumerate(records):
            task_id = f"{dataset.kind}-{split}-{i:05d}"
            lines = [
                f"schema {_TASK_SCHEMA}",
                f"kind {rec.task.kind}",
                f"start {rec.task.start_cell} {rec.task.start_dir}",
                f"goals {_cells_str(rec.task.goals)}",
                f"muds {_cells_str(rec.task.muds)}",
                f"bombs {_cells_str(rec.task.bombs)}",
                f"optimal_reward {rec.optimal_reward!r}",
                f"n_optimal_paths {rec.n_optimal_paths}",
                f"greedy_reward {'-' if rec.greedy_reward is None else repr(rec.greedy_reward)}",
                f"psi_e {rec.psi_e!r}",
            ]
            (split_dir / f"{task_id}.task").write_text("\n".join(lines) + "\n")
            if rec.demos:
                save_demonstrations(rec.demos, split_dir / f"{task_id}.demos")
    manifest = {
        "schema": _MANIFEST_SCHEMA,
        "kind": dataset.kind,
        "seed": dataset.seed,
        "counts": dataset.counts(),
        "calibration_shift": dataset.calibration_shift,
        "meta": dataset.meta,
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def load_task_file(path):
    fields = {}
    for line in pathlib.Path(path).read_text().splitlines():
        key, _, rest = line.partition(" ")
        fields[key] = rest
    if fields.get("schema") != _TASK_SCHEMA:
        raise ValueError(f"unsupported task schema {fields.get('schema')!r}")
    start_cell, start_dir = fields["start"].split()
    task = grids.GridTask(
        kind=fields["kind"],
        start_cell=int(start_cell),
        start_dir=int(start_dir),
        goals=_cells_parse(fields["goals"]),
        muds=_cells_parse(fields["muds"]),
        bombs=_cells_parse(fields["bombs"]),
    )
    return TaskRecord(
        task=task,
        optimal_reward=float(fields["optimal_reward"]),
        n_optimal_paths=int(fields["n_optimal_paths"]),
        greedy_reward=None if fields["greedy_reward"] == "-" else float(fields["greedy_reward"]),
        psi_e=float(fields["psi_e"]),
    )


def load_dataset(root):
    root = pathlib.Path(root)
    manifest = json.loads((root / "manifest.json").read_text())
    if manifest.get("schema") != _MANIFEST_SCHEMA:
        raise ValueError(f"unsupported manifest schema {manifest.get('schema')!r}")
    splits = {}
    for split in SPLITS:
        records = []
        split_dir = root / split
        for task_path in sorted(split_dir.glob("*.task")):
            rec = load_task_file(task_path)
            demo_path = task_path.with_suffix(".demos")
            if demo_path.exists():
                rec.demos = load_demonstrations(demo_path)
            rec.raw_denominator = float(_raw_denominator(rec))
            records.append(rec)
        splits[split] = records
    return TaskDataset(
        kind=manifest["kind"],
        seed=manifest["seed"],
        splits=splits,
        calibration_shift=manifest["calibration_shift"],
        meta=manifest.get("meta", {}),
    )
