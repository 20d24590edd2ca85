"""Static plot emission from experiment logs.

Reward curves show the per-step mean across seeds with a min/max band;
curriculum plots show which tasks the teacher picked over time (scatter of
task type, or normalized moving-average task-feature lines for the epoch
trainer). All figures are written as PNG files.
"""

from __future__ import annotations

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .logs import load_log


def _aligned_column(log_paths, column):
    """Rows aligned on t across seed logs; returns (ts, (n_logs, n_t) array)."""
    series = []
    ts_ref = None
    for path in log_paths:
        columns, rows = load_log(path)
        ti = columns.index("t")
        ci = columns.index(column)
        ts = [r[ti] for r in rows if r[ci] is not None]
        vals = [r[ci] for r in rows if r[ci] is not None]
        if ts_ref is None:
            ts_ref = ts
        n = min(len(ts_ref), len(ts))
        ts_ref = ts_ref[:n]
        series.append(vals)
    series = np.array([s[: len(ts_ref)] for s in series], dtype=float)
    return np.array(ts_ref), series


def reward_curve(log_paths, out_path, column="value", reference=None, title=None):
    """Seed-mean reward vs steps with a min/max band across seeds."""
    ts, series = _aligned_column(log_paths, column)
    mean = series.mean(axis=0)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(ts, mean, lw=1.8)
    if len(series) > 1:
        ax.fill_between(ts, series.min(axis=0), series.max(axis=0), alpha=0.25)
    if reference is not None:
        ax.axhline(reference, color="gray", ls="--", lw=1, label="teacher value")
        ax.legend(frameon=False)
    ax.set_xlabel("demonstrations" if column == "value" else "batches")
    ax.set_ylabel("total expected reward" if column == "value" else column)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def curriculum_scatter(log_path, out_path, title=None):
    """Task label picked at each teaching step."""
    columns, rows = load_log(log_path)
    ti = columns.index("t")
    li = columns.index("task_label")
    pts = [(r[ti], r[li]) for r in rows if r[li] is not None]
    fig, ax = plt.subplots(figsize=(5, 3))
    if pts:
        t, labels = zip(*pts)
        ax.scatter(t, labels, s=12, alpha=0.8)
        ax.set_yticks(sorted(set(labels)))
    ax.set_xlabel("t")
    ax.set_ylabel("task type")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def curriculum_features(log_path, out_path, title=None):
    """Normalized moving-average task features vs demonstrations provided."""
    columns, rows = load_log(log_path)
    feat_cols = [c for c in columns if c.startswith("feat_")]
    xi = columns.index("demos_seen") if "demos_seen" in columns else columns.index("t")
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    for c in feat_cols:
        ci = columns.index(c)
        pts = [(r[xi], r[ci]) for r in rows if r[ci] is not None]
        if pts:
            x, y = zip(*pts)
            ax.plot(x, y, lw=1.4, label=c[len("feat_") :])
    ax.set_xlabel("demonstrations")
    ax.set_ylabel("normalized task feature (100-batch mean)")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(frameon=False, fontsize=7)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def emit_plots(log_paths, out_dir):
    """Infer log kind from its columns and emit the matching figures."""
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_paths = [pathlib.Path(p) for p in log_paths]
    columns, _ = load_log(log_paths[0])
    written = []
    if "value" in columns:
        written.append(reward_curve(log_paths, out_dir / "reward_curve.png"))
        for p in log_paths:
            written.append(
                curriculum_scatter(p, out_dir / f"curriculum_{p.stem}.png")
            )
    else:
        written.append(
            reward_curve(log_paths, out_dir / "test_reward_curve.png", column="test_reward")
        )
        for p in log_paths:
            written.append(
                curriculum_features(p, out_dir / f"curriculum_{p.stem}.png")
            )
    return written
