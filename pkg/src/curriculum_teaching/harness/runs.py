"""Experiment loops: sequential teaching on the car strip, scheduled epoch
training on the navigation datasets.

Both runners are deterministic per (config, seed): one master seed fans out
to component generators through `component_seed`, and the produced CSV logs
are byte-identical across reruns.
"""

from __future__ import annotations

import pathlib
from collections import deque

import numpy as np

from .. import __version__
from ..curricula import Teacher, schedule
from ..learners import (
    CROSSENT_BC,
    MAXENT_IRL,
    crossent_gradient,
    init_params,
    learner_policy_solution,
    maxent_gradient,
    mlp_crossent,
    save_checkpoint,
    update,
)
from ..mdp import policy_value
from ..probing import PolicyProbe, ProbeConfig
from ..envs import car as car_env
from ..envs import datasets as ds
from ..envs import grids
from .config import ConfigError, component_rng
from .logs import ExperimentLog

TEACHER_COLUMNS = (
    "t",
    "candidate",
    "task_label",
    "log_psi_e",
    "log_psi_l",
    "score",
    "theta_gap",
    "value",
)


def _write_run_stamp(out_dir, config, extra=None):
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "resolved_config.ini").write_text(config.to_ini())
    stamp = [f"version {__version__}", f"config_hash {config.hash()}"]
    if extra:
        stamp += [f"{k} {v}" for k, v in extra.items()]
    (out_dir / "run_stamp.txt").write_text("\n".join(stamp) + "\n")


def _learner_gradient(spec, theta, demos, mdp, policy):
    if spec.model == MAXENT_IRL:
        return maxent_gradient(spec, theta, demos, mdp, policy=policy)
    return crossent_gradient(spec, theta, demos, policy=policy)


def _pretrain(spec, theta, pool, task_types, steps, rng, mdp):
    """Seeded warmup on a task-type subset (the learner's initial knowledge)."""
    allowed = [
        i for i, c in enumerate(pool.candidates) if c.label in set(task_types)
    ]
    if not allowed:
        raise ConfigError(f"no pool candidates with task types {task_types}")
    v_warm = None
    for t in range(steps):
        policy, v_warm = learner_policy_solution(spec, theta, mdp, v_init=v_warm)
        cand = pool.candidates[allowed[int(rng.integers(len(allowed)))]]
        g = _learner_gradient(spec, theta, list(cand.demos), mdp, policy)
        theta = update(theta, g, spec.eta.value(t), spec.projection)
    return theta


def run_teacher_centric(config, seed=None, out_dir=None):
    """One seeded teaching run; returns (ExperimentLog, final theta).

    Step t logs the learner's state *before* the update driven by the
    demonstration selected at t; row t=0 is the initial evaluation.
    """
    if config.environment != "car":
        raise ConfigError(f"teacher-centric runs support the car environment, not {config.environment!r}")
    tc = config.teacher_centric
    seed = config.seed if seed is None else seed
    env = car_env.build_car_env(seed=tc.env_seed, gamma=tc.gamma)
    spec = car_env.make_learner_spec(env, tc.learner_model, tc.parameterization, eta=tc.eta)
    if tc.eta_decay != 1.0:
        from ..learners import EtaSchedule
        from dataclasses import replace

        spec = replace(
            spec,
            eta=EtaSchedule(tc.eta, kind="step_decay", factor=tc.eta_decay, every=tc.eta_decay_every),
        )
    theta_star = car_env.target_params(env, tc.parameterization, sharpness=tc.teacher_sharpness)
    teacher_pol = car_env.teacher_policy(env, spec, theta_star, kind=tc.teacher_kind)
    difficulty_pol = car_env.difficulty_policy(env, spec, theta_star)
    pool = car_env.build_start_pool(
        env,
        teacher_pol,
        demos_per_start=tc.demos_per_start,
        horizon=tc.demo_horizon,
        rng=component_rng(seed, "pool"),
    )
    theta = theta_star.copy() if tc.init_at_target else init_params(spec)
    if tc.pretrain_steps > 0:
        theta = _pretrain(
            spec,
            theta,
            pool,
            tc.initial_task_types,
            tc.pretrain_steps,
            component_rng(seed, "learner"),
            env.mdp,
        )

    def grad_fn(candidate, theta_t, learner_view):
        policy, _ = learner_policy_solution(spec, theta_t, env.mdp)
        return _learner_gradient(spec, theta_t, list(candidate.demos), env.mdp, policy)

    teacher = Teacher(
        config.strategy,
        pool,
        log_psi_e=pool.log_difficulties(difficulty_pol),
        theta_star=theta_star,
        grad_fn=grad_fn,
        mdp=env.mdp,
        feature_map=env.feature_map,
        teacher_policy=teacher_pol,
        rng=component_rng(seed, "teacher"),
        selection_mode=tc.selection_mode,
    )
    probe = PolicyProbe(ProbeConfig(tc.probe_b, tc.probe_k), component_rng(seed, "probe"))
    log = ExperimentLog(
        TEACHER_COLUMNS,
        meta={
            "kind": "teacher_centric",
            "strategy": config.strategy,
            "seed": seed,
            "gamma": tc.gamma,
            "eta": tc.eta,
            "config_hash": config.hash(),
            "teacher_value": policy_value(env.mdp, teacher_pol),
        },
    )
    v_warm = None
    policy, v_warm = learner_policy_solution(spec, theta, env.mdp, v_init=v_warm)
    log.append(
        t=0,
        theta_gap=float(np.linalg.norm(theta_star - theta)),
        value=policy_value(env.mdp, policy),
    )
    for t in range(1, tc.steps + 1):
        view = probe.view(t, policy)
        pick = teacher.select(t, view, theta_t=theta, eta=spec.eta.value(t - 1))
        cand = pool.candidates[pick.index]
        g = _learner_gradient(spec, theta, list(cand.demos), env.mdp, policy)
        theta = update(theta, g, spec.eta.value(t - 1), spec.projection)
        policy, v_warm = learner_policy_solution(spec, theta, env.mdp, v_init=v_warm)
        log.append(
            t=t,
            candidate=pick.index,
            task_label=cand.label,
            log_psi_e=pick.log_psi_e,
            log_psi_l=pick.log_psi_l,
            score=float(pick.scores[pick.index]),
            theta_gap=float(np.linalg.norm(theta_star - theta)),
            value=policy_value(env.mdp, policy),
        )
    if out_dir is not None:
        out_dir = pathlib.Path(out_dir)
        _write_run_stamp(out_dir, config)
        log.save(out_dir / f"run_seed{seed}.csv")
        _save_probe_events(probe, out_dir / f"probe_seed{seed}.csv")
        save_checkpoint(spec, theta, out_dir / f"learner_seed{seed}.json")
    return log, theta


def _save_probe_events(probe, path):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "b", "k", "tv_to_true"])
        for ev in probe.events:
            writer.writerow([ev["t"], ev["b"], ev["k"] if ev["k"] is not None else "", repr(ev["tv_to_true"])])


def run_teacher_centric_suite(config, out_dir=None, workers=1):
    """All seeds of a config; returns the per-seed logs in seed order."""
    seeds = config.seeds()
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_teacher_centric, config, s, out_dir) for s in seeds]
            return [f.result()[0] for f in futures]
    return [run_teacher_centric(config, s, out_dir)[0] for s in seeds]


# ---------------------------------------------------------------------------
# learner-centric training on the navigation datasets
# ---------------------------------------------------------------------------


class DemoBank:
    """Flattened view of every train demonstration with its task context."""

    def __init__(self, records):
        self.entries = []  # (record, engine, demo)
        self._engines = {}
        for rec in records:
            engine = grids.compile_task(rec.task)
            for demo in rec.demos:
                self.entries.append((rec, engine, demo))
        if not self.entries:
            raise ConfigError("dataset has no train demonstrations")

    def __len__(self):
        return len(self.entries)

    def features(self, idx):
        rec, engine, demo = self.entries[idx]
        return grids.demo_features(rec.task, engine, demo), demo.actions

    def log_psi_l(self, net, theta, chunk=512):
        """Summed cross-entropy per demo under the current network."""
        out = np.empty(len(self.entries))
        i = 0
        while i < len(self.entries):
            block = self.entries[i : i + chunk]
            xs, sizes, acts = [], [], []
            for rec, engine, demo in block:
                xs.append(grids.demo_features(rec.task, engine, demo))
                sizes.append(len(demo))
                acts.append(demo.actions)
            x = np.concatenate(xs)
            log_pi = net.log_policy(theta, x)
            picked = log_pi[np.arange(len(x)), np.concatenate(acts)]
            bounds = np.cumsum([0, *sizes])
            for j in range(len(block)):
                out[i + j] = -picked[bounds[j] : bounds[j + 1]].sum()
            i += chunk
        return out

    def task_feature_row(self, idx, kind):
        rec, _, _ = self.entries[idx]
        if kind == grids.SHORTEST_PATH:
            return np.array(
                [
                    len(rec.task.goals),
                    len(rec.task.muds),
                    len(rec.task.bombs),
                    rec.optimal_reward,
                    min(rec.n_optimal_paths, 1e18),
                ]
            )
        return np.array([len(rec.task.goals), rec.greedy_gap, rec.optimal_reward])


SP_FEATURE_COLUMNS = ("n_goals", "n_muds", "n_bombs", "optimal_reward", "n_optimal_paths")
TSP_FEATURE_COLUMNS = ("n_goals", "greedy_gap", "optimal_reward")


def evaluate_on_tasks(net, theta, records, horizon=None, greedy=True, rng=None):
    """Mean rollout reward of the current policy over a task list."""
    rng = np.random.default_rng(rng)
    total = 0.0
    for rec in records:
        engine = grids.compile_task(rec.task)

        def act(state):
            x = grids.state_features(rec.task, engine, [state])
            scores = net.forward(theta, x)[0]
            if greedy:
                return int(np.argmax(scores))
            z = np.exp(scores - scores.max())
            return int(rng.choice(len(z), p=z / z.sum()))

        reward, _ = grids.rollout(engine, act, horizon=horizon)
        total += reward
    return total / len(records)


def run_learner_centric(config, dataset, seed=None, out_dir=None):
    """Scheduled epoch training of the scoring network on a task dataset.

    Per epoch: the strategy ranks all train demos, the scheduler releases
    the top slice, and the slice is shuffled into fixed-size batches of
    demos for SGD. Evaluation runs every `eval_every` batches on a seeded
    subsample of the test split; task-feature columns carry a moving
    average over the previous 100 batches, min-max normalized over the
    train split.
    """
    lc = config.learner_centric
    seed = config.seed if seed is None else seed
    if config.strategy not in ("CUR", "CUR-T", "CUR-L", "AGN"):
        raise ConfigError(f"learner-centric runs support CUR/CUR-T/CUR-L/AGN, not {config.strategy!r}")
    bank = DemoBank(dataset.splits["train"])
    kind = dataset.kind
    feature_columns = SP_FEATURE_COLUMNS if kind == grids.SHORTEST_PATH else TSP_FEATURE_COLUMNS
    feat_rows = np.stack([bank.task_feature_row(i, kind) for i in range(len(bank))])
    feat_lo = feat_rows.min(axis=0)
    feat_span = np.maximum(feat_rows.max(axis=0) - feat_lo, 1e-12)
    feat_norm = (feat_rows - feat_lo) / feat_span
    log_psi_e = np.log([bank.entries[i][0].psi_e for i in range(len(bank))])

    sample_x, _ = bank.features(0)
    from ..mlp import ScoringMlp

    net = ScoringMlp(sample_x.shape[1], grids.N_ACTIONS, hidden=lc.hidden)
    theta = net.init_params(component_rng(seed, "learner"))

    eval_rng = component_rng(seed, "eval")
    test_records = dataset.splits["test"]
    if lc.eval_size and lc.eval_size < len(test_records):
        idx = eval_rng.choice(len(test_records), size=lc.eval_size, replace=False)
        test_records = [test_records[i] for i in sorted(idx)]
    horizon = lc.rollout_horizon or None

    columns = ("t", "epoch", "demos_seen", "test_reward", *(f"feat_{c}" for c in feature_columns))
    log = ExperimentLog(
        columns,
        meta={
            "kind": "learner_centric",
            "environment": kind,
            "strategy": config.strategy,
            "seed": seed,
            "config_hash": config.hash(),
            "n_train_demos": len(bank),
            "n_eval_tasks": len(test_records),
        },
    )
    log.append(
        t=0,
        epoch=0,
        demos_seen=0,
        test_reward=evaluate_on_tasks(net, theta, test_records, horizon=horizon),
    )
    batch_rng = component_rng(seed, "batches")
    recent = deque(maxlen=100)
    batches_done = 0
    demos_seen = 0
    for epoch in range(1, lc.epochs + 1):
        if config.strategy == "AGN":
            order = batch_rng.permutation(len(bank))
        else:
            if config.strategy == "CUR":
                scores = bank.log_psi_l(net, theta) - log_psi_e
            elif config.strategy == "CUR-L":
                scores = bank.log_psi_l(net, theta)
            else:  # CUR-T
                scores = -log_psi_e
            order = np.argsort(-scores, kind="stable")
        released = schedule(order, epoch, lc.schedule_a, lc.schedule_b, lc.epochs)
        released = batch_rng.permutation(released)
        for lo in range(0, len(released), lc.batch_size):
            batch = released[lo : lo + lc.batch_size]
            xs, acts = [], []
            for di in batch:
                x, a = bank.features(int(di))
                xs.append(x)
                acts.append(a)
            x = np.concatenate(xs)
            a = np.concatenate(acts)
            _, grad = mlp_crossent(net, theta, x, a)
            lr = lc.lr * lc.lr_decay ** (batches_done // lc.lr_decay_every)
            theta = theta - lr * grad / len(batch)
            batches_done += 1
            demos_seen += len(batch)
            recent.append(feat_norm[batch].mean(axis=0))
            if batches_done % lc.eval_every == 0:
                moving = np.mean(recent, axis=0)
                log.append(
                    t=batches_done,
                    epoch=epoch,
                    demos_seen=demos_seen,
                    test_reward=evaluate_on_tasks(net, theta, test_records, horizon=horizon),
                    **{f"feat_{c}": float(v) for c, v in zip(feature_columns, moving)},
                )
    if batches_done % lc.eval_every != 0 and lc.epochs > 0:
        moving = np.mean(recent, axis=0) if recent else np.zeros(len(feature_columns))
        log.append(
            t=batches_done,
            epoch=lc.epochs,
            demos_seen=demos_seen,
            test_reward=evaluate_on_tasks(net, theta, test_records, horizon=horizon),
            **{f"feat_{c}": float(v) for c, v in zip(feature_columns, moving)},
        )
    if out_dir is not None:
        out_dir = pathlib.Path(out_dir)
        _write_run_stamp(out_dir, config, extra={"dataset_kind": kind})
        log.save(out_dir / f"train_seed{seed}.csv")
        from ..learners import LearnerSpec

        spec = LearnerSpec(
            CROSSENT_BC,
            "mlp",
            state_features=np.zeros((1, sample_x.shape[1])),
            hidden=lc.hidden,
        )
        save_checkpoint(spec, theta, out_dir / f"learner_seed{seed}.json")
    return log, theta
