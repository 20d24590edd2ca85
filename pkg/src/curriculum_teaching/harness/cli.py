"""Command-line entry points.

Subcommands: gen-dataset, run, validate-theory, plot, inspect. Exit codes:
0 success, 2 usage error (argparse), 3 configuration error, 4 input
validation error, 5 runtime failure. Error messages carry a category
prefix, e.g. ``error[config]: config not found: runs.ini``.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_VALIDATION = 4
EXIT_RUNTIME = 5


def _fail(category, message, code):
    print(f"error[{category}]: {message}", file=sys.stderr)
    return code


def _cmd_gen_dataset(args):
    from ..envs import datasets as ds

    counts = None
    if args.counts:
        train, val, test = (int(x) for x in args.counts.split(","))
        counts = {"train": train, "val": val, "test": test}
    if args.env == "shortest-path":
        kwargs = {}
        if args.max_objects is not None:
            kwargs["mud_range"] = range(0, args.max_objects + 1)
            kwargs["bomb_range"] = range(0, args.max_objects + 1)
        dataset = ds.generate_shortest_path_dataset(args.seed, counts=counts, **kwargs)
    else:
        dataset = ds.generate_tsp_dataset(args.seed, counts=counts)
    ds.save_dataset(dataset, args.out)
    for split, n in dataset.counts().items():
        print(f"{split}: {n} tasks")
    print(f"wrote dataset to {args.out}")
    return EXIT_OK


def _cmd_run(args):
    from .config import ConfigError, ExperimentConfig
    from .runs import run_learner_centric, run_teacher_centric_suite

    try:
        config = ExperimentConfig.from_file(args.config)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    if args.seed is not None:
        config.seed = args.seed
    out = pathlib.Path(args.out)
    try:
        if config.kind == "teacher_centric":
            logs = run_teacher_centric_suite(config, out_dir=out, workers=args.workers)
            print(f"finished {len(logs)} seeded run(s); final mean reward "
                  f"{sum(l.rows[-1][-1] for l in logs) / len(logs)!r}")
        else:
            from ..envs import datasets as ds

            if not config.learner_centric.dataset_dir:
                return _fail("config", "learner_centric runs need dataset_dir", EXIT_CONFIG)
            dataset = ds.load_dataset(config.learner_centric.dataset_dir)
            for seed in config.seeds():
                log, _ = run_learner_centric(config, dataset, seed=seed, out_dir=out)
                print(f"seed {seed}: final test reward {log.rows[-1][3]!r}")
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    except (ValueError, FileNotFoundError) as exc:
        return _fail("validation", str(exc), EXIT_VALIDATION)
    return EXIT_OK


def _cmd_validate_theory(args):
    from ..theory import run_all_checks

    results = run_all_checks(args.seed, args.out)
    for check, passed in results.items():
        print(f"{check}: {'pass' if passed else 'FAIL'}")
    print(f"reports in {args.out}")
    return EXIT_OK if all(results.values()) else EXIT_RUNTIME


def _cmd_plot(args):
    from .plots import emit_plots

    for path in args.logs:
        if not pathlib.Path(path).exists():
            return _fail("validation", f"log not found: {path}", EXIT_VALIDATION)
    written = emit_plots(args.logs, args.out)
    for p in written:
        print(p)
    return EXIT_OK


def _cmd_inspect(args):
    path = pathlib.Path(args.path)
    if not path.exists():
        return _fail("validation", f"no such path: {path}", EXIT_VALIDATION)
    if path.is_dir():
        manifest = path / "manifest.json"
        if manifest.exists():
            print(manifest.read_text().rstrip())
            return EXIT_OK
        stamp = path / "run_stamp.txt"
        if stamp.exists():
            print(stamp.read_text().rstrip())
            for log in sorted(path.glob("*.csv")):
                print(f"log: {log.name}")
            return EXIT_OK
        return _fail("validation", f"directory has no manifest or run stamp: {path}", EXIT_VALIDATION)
    if path.suffix == ".json":
        payload = json.loads(path.read_text())
        payload.pop("theta", None)
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    if path.suffix == ".csv":
        from .logs import load_log

        columns, rows = load_log(path)
        print(",".join(columns))
        print(f"{len(rows)} rows; t in [{rows[0][0]}, {rows[-1][0]}]" if rows else "empty")
        return EXIT_OK
    head = path.read_text().splitlines()[:4]
    print("\n".join(head))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="curriculum-teaching",
        description="Curriculum teaching experiments: datasets, runs, theory checks, plots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="generate a navigation task dataset")
    p.add_argument("env", choices=("shortest-path", "tsp"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--counts", help="train,val,test grids per combination (default: published sizes)")
    p.add_argument("--max-objects", type=int, default=None,
                   help="shortest-path only: cap muds/bombs per grid (default 12)")
    p.set_defaults(func=_cmd_gen_dataset)

    p = sub.add_parser("run", help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate-theory", help="run the numerical theory checks")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_validate_theory)

    p = sub.add_parser("plot", help="emit figures from experiment logs")
    p.add_argument("--logs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("inspect", help="summarize a dataset, run directory, log, or checkpoint")
    p.add_argument("path")
    p.set_defaults(func=_cmd_inspect)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single exit funnel for the CLI
        return _fail("runtime", f"{type(exc).__name__}: {exc}", EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
