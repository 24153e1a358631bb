"""
Command-line front end: genmap | train | run | bench.

Every command echoes its fully resolved arguments into a JSON manifest;
`--manifest FILE` replays a previous invocation from that file. Exit codes
are 0 on success, 1 on usage errors and 2 on runtime errors.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from config import OUTPUT_DIR
from schemas.benchschema import ExperimentConfig, MapSource
from schemas.learnerschema import Hyperparams, TrainSchedule
from schemas.scoreschema import ScoreParams
from services import render_service
from services.bench_service import record_rows, run_bench, write_bench, write_trace
from services.estimator_service import DEFAULT_STRIDE, estimate, score_series, write_series
from services.gridworld_service import (
    component_count, generate_clustered_map, load_map, save_map,
)
from services.learner_service import cached_policy, save_policy, train, write_curve
from services.policy_switch_service import DEFAULT_NOVELTY_ALLOWANCE, run_episode
from services.coverage_service import DEFAULT_RESERVE_FRACTION
from utils.enums import Algorithm
from utils.errors import BnmError
from utils.logging_config import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

DEFAULT_MAP = {"width": 100, "height": 100, "clusters": 3, "size": 120}


class UsageError(Exception):
    """Arguments parse but cannot be acted on (missing file, missing policy)."""


class BnmArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def fraction(text: str) -> float:
    """Float in [0, 1)."""
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from exc
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {value}")
    return value


def int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text}") from exc


def write_manifest(command: str, args: argparse.Namespace, path: Path) -> None:
    payload = {
        "command": command,
        "args": {k: v for k, v in sorted(vars(args).items()) if k not in ("manifest", "handler")},
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def require_file(path: str | None, what: str) -> Path:
    if not path:
        raise UsageError(f"{what} is required")
    resolved = Path(path)
    if not resolved.is_file():
        raise UsageError(f"{what} not found: {path}")
    return resolved


def _add_scoring(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--novelty-allowance", type=positive_int, default=DEFAULT_NOVELTY_ALLOWANCE)
    parser.add_argument("--reserve", type=fraction, default=DEFAULT_RESERVE_FRACTION)
    parser.add_argument("--w-miss", type=float, default=100.0)
    parser.add_argument("--w-false-alarm", type=float, default=1.0)
    parser.add_argument("--stride", type=positive_int, default=DEFAULT_STRIDE)
    parser.add_argument("--render", action="store_true")


def cmd_genmap(args: argparse.Namespace) -> None:
    grid = generate_clustered_map(args.width, args.height, args.clusters, args.size, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_map(grid, out)
    write_manifest("genmap", args, out.with_name(out.name + ".json"))
    logger.info("wrote %s: %d anomaly cells in %d clusters",
                out, grid.anomaly_count(), component_count(grid))


def cmd_train(args: argparse.Namespace) -> None:
    grid = load_map(require_file(args.map, "--map"))
    hp = Hyperparams(
        learning_rate=args.alpha,
        discount=args.gamma,
        episode_cap=args.episode_cap,
        novelty_allowance=args.novelty_allowance,
    )
    schedule = TrainSchedule(cycles=args.cycles, steps_per_cycle=args.steps)
    policy, reports = train(grid, schedule, hp, args.seed)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_policy(policy, out)
    write_curve(reports, out.with_name(out.name + ".curve.csv"))
    write_manifest("train", args, out.with_name(out.name + ".json"))
    if args.render:
        render_service.plot_training_curve(reports, out.with_name(out.name + ".curve.png"))
    logger.info("wrote policy %s after %d steps", out, policy.steps)


def cmd_run(args: argparse.Namespace) -> None:
    algorithm = Algorithm(args.alg)
    policy = None
    if algorithm == Algorithm.BNM:
        policy = cached_policy(require_file(args.policy, "--policy"))
    if args.map:
        grid = load_map(require_file(args.map, "--map"))
    else:
        grid = generate_clustered_map(DEFAULT_MAP["width"], DEFAULT_MAP["height"],
                                      DEFAULT_MAP["clusters"], DEFAULT_MAP["size"], args.seed)

    params = ScoreParams(w_miss=args.w_miss, w_false_alarm=args.w_false_alarm)
    run = run_episode(grid, args.budget, algorithm, policy, args.seed,
                      args.novelty_allowance, args.reserve)
    series = score_series(run, grid, params, args.stride)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(run, out / "trace.csv")
    write_series(series, out / "series.csv")
    write_manifest("run", args, out / "manifest.json")
    if args.render:
        render_service.render_run(grid, run, out / "trajectory.png")
        render_service.render_model(estimate(run.trajectory, grid.bounds), out / "model.png")
    logger.info("%s b=%d: %d moves, final score %.4f, %d anomalies found",
                algorithm.value, args.budget, run.moves, series[-1].score, run.anomalies_found())


def _parse_external(items: list[str]) -> dict[str, str]:
    external = {}
    for item in items or []:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"--external expects NAME=trace.csv, got {item!r}")
        external[name] = str(require_file(path, f"trace for {name}"))
    return external


def cmd_bench(args: argparse.Namespace) -> None:
    if args.map:
        require_file(args.map, "--map")
    if args.policy:
        require_file(args.policy, "--policy")
    config = ExperimentConfig(
        map=MapSource(path=args.map, width=args.width, height=args.height,
                      clusters=args.clusters, cluster_size=args.size),
        algorithms=args.algs,
        budgets=args.budgets,
        seeds=args.seeds,
        novelty_allowance=args.novelty_allowance,
        reserve_fraction=args.reserve,
        score=ScoreParams(w_miss=args.w_miss, w_false_alarm=args.w_false_alarm),
        stride=args.stride,
        policy=args.policy,
        external=_parse_external(args.external),
        workers=args.workers,
        output_dir=args.out_dir,
    )
    results = run_bench(config)
    summary = write_bench(results, config.output_dir)
    write_manifest("bench", args, Path(config.output_dir) / "manifest.json")
    if args.render:
        render_service.plot_bench(results, config.output_dir)
    if args.record:
        # pylint: disable=import-outside-toplevel
        from db import Base, Session, engine
        import models.models  # noqa: F401  pylint: disable=unused-import

        Base.metadata.create_all(bind=engine)
        with Session() as db:
            record_rows(db, [r.row for r in results])
    failed = sum(1 for r in results if r.row.status != "ok")
    logger.info("bench finished: %d rows (%d failed), summary in %s", len(results), failed, summary)


def build_parser() -> argparse.ArgumentParser:
    parser = BnmArgumentParser(prog="bnm", description=__doc__.splitlines()[1])
    parser.add_argument("--log-level", default=None)
    parser.add_argument("--manifest", help="replay the command stored in a manifest")
    sub = parser.add_subparsers(dest="command")

    genmap = sub.add_parser("genmap", help="generate a clustered anomaly map")
    genmap.add_argument("--width", type=positive_int, default=DEFAULT_MAP["width"])
    genmap.add_argument("--height", type=positive_int, default=DEFAULT_MAP["height"])
    genmap.add_argument("--clusters", type=non_negative_int, default=DEFAULT_MAP["clusters"])
    genmap.add_argument("--size", type=positive_int, default=DEFAULT_MAP["size"])
    genmap.add_argument("--seed", type=int, default=0)
    genmap.add_argument("--out", default=str(Path(OUTPUT_DIR) / "map.txt"))
    genmap.set_defaults(handler=cmd_genmap)

    trainer = sub.add_parser("train", help="train the close-inspection policy")
    trainer.add_argument("--map")
    trainer.add_argument("--cycles", type=positive_int, default=5)
    trainer.add_argument("--steps", type=positive_int, default=50_000)
    trainer.add_argument("--seed", type=int, default=0)
    trainer.add_argument("--alpha", type=float, default=0.1)
    trainer.add_argument("--gamma", type=float, default=0.99)
    trainer.add_argument("--episode-cap", type=positive_int, default=400)
    trainer.add_argument("--novelty-allowance", type=positive_int, default=DEFAULT_NOVELTY_ALLOWANCE)
    trainer.add_argument("--render", action="store_true")
    trainer.add_argument("--out", default=str(Path(OUTPUT_DIR) / "policy.bnmq"))
    trainer.set_defaults(handler=cmd_train)

    runner = sub.add_parser("run", help="run one episode and score it")
    runner.add_argument("--alg", choices=[a.value for a in Algorithm], required=True)
    runner.add_argument("--budget", type=non_negative_int, required=True)
    runner.add_argument("--map")
    runner.add_argument("--policy")
    runner.add_argument("--seed", type=int, default=0)
    runner.add_argument("--out-dir", default=OUTPUT_DIR)
    _add_scoring(runner)
    runner.set_defaults(handler=cmd_run)

    bench = sub.add_parser("bench", help="budget sweep over algorithms and seeds")
    bench.add_argument("--map")
    bench.add_argument("--width", type=positive_int, default=DEFAULT_MAP["width"])
    bench.add_argument("--height", type=positive_int, default=DEFAULT_MAP["height"])
    bench.add_argument("--clusters", type=non_negative_int, default=DEFAULT_MAP["clusters"])
    bench.add_argument("--size", type=positive_int, default=DEFAULT_MAP["size"])
    bench.add_argument("--algs", type=lambda s: [a for a in s.split(",") if a],
                       default=["boustrophedon", "random"])
    bench.add_argument("--budgets", type=int_list, default=[800, 2500, 6000])
    bench.add_argument("--seeds", type=int_list, default=[0, 1, 2, 3, 4])
    bench.add_argument("--policy")
    bench.add_argument("--workers", type=positive_int, default=1)
    bench.add_argument("--external", action="append", default=[], metavar="NAME=TRACE")
    bench.add_argument("--record", action="store_true")
    bench.add_argument("--out-dir", default=OUTPUT_DIR)
    _add_scoring(bench)
    bench.set_defaults(handler=cmd_bench)

    return parser


HANDLERS = {"genmap": cmd_genmap, "train": cmd_train, "run": cmd_run, "bench": cmd_bench}


def load_manifest(path: str) -> argparse.Namespace:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        command = payload["command"]
        handler = HANDLERS[command]
        args = dict(payload["args"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot replay manifest {path}: {exc}") from exc
    return argparse.Namespace(**args, manifest=None, handler=handler)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.manifest and not args.command:
            parser.error("a command is required")
    except SystemExit as exc:
        return int(exc.code or 0)

    setup_logging(args.log_level)
    try:
        if args.manifest:
            args = load_manifest(args.manifest)
        args.handler(args)
    except (UsageError, ValidationError) as exc:
        logger.error("usage error: %s", exc)
        return EXIT_USAGE
    except BnmError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
