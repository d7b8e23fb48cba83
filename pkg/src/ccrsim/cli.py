"""Command line: ``ccrsim {train,evaluate,compare,plot}``.

Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.

Run directory layout::

    <out>/<timestamp>-<scenario>/
        config.yaml                 resolved configuration
        seed_<s>/
            checkpoints/            actor_i.bin, critic_i.bin, target_*.bin,
                                    physical_model.txt
            metrics.csv             one row per training episode
            summary.csv             written by `evaluate`
            traces.jsonl            written by `evaluate`
            plots/                  written by `plot`
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .dynamics_model import PhysicalModel
from .evaluation import (compare_runs, comparison_csv, evaluate, format_comparison,
                         read_summary_csv, summary_csv, write_plots, write_traces_jsonl)
from .marl.training import RunArtifacts, load_bundle, run_training
from .scenarios import ScenarioKind

log = logging.getLogger("ccrsim")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _new_run_dir(parent: Path, scenario: ScenarioKind) -> Path:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    base = parent / f"{stamp}-{scenario.value}"
    d, k = base, 1
    while d.exists():
        d = base.with_name(f"{base.name}-{k}")
        k += 1
    return d


def _seed_dirs(run_dir: Path) -> list[Path]:
    if (run_dir / "checkpoints").is_dir():
        return [run_dir]
    dirs = sorted(p for p in run_dir.glob("seed_*") if p.is_dir())
    return dirs


def _find_config(seed_dir: Path) -> Path:
    for p in (seed_dir / "config.yaml", seed_dir.parent / "config.yaml"):
        if p.exists():
            return p
    raise FileNotFoundError(f"no config.yaml for {seed_dir}")


def load_run(seed_dir) -> RunArtifacts:
    """Rebuild a trained policy from a seed directory."""
    seed_dir = Path(seed_dir)
    cfg = load_config(_find_config(seed_dir))
    seed = int(seed_dir.name.split("_", 1)[1]) if seed_dir.name.startswith("seed_") else cfg.seeds[0]
    ck = seed_dir / "checkpoints"
    if not (ck / "physical_model.txt").exists():
        raise FileNotFoundError(f"missing checkpoints in {ck}")
    bundle = load_bundle(ck, cfg.train.algorithm)
    model = PhysicalModel.load(ck / "physical_model.txt")
    return RunArtifacts(bundle, model, [], cfg.train_for_seed(seed), cfg.scenario,
                        cfg.physics, cfg.scenario_params)


def cmd_train(args) -> int:
    path = Path(args.config)
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    cfg = load_config(path)
    if args.episodes is not None:
        cfg = dataclasses.replace(cfg, train=dataclasses.replace(cfg.train, episodes=args.episodes))
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seeds=(args.seed,))
    if args.scenario is not None:
        cfg = dataclasses.replace(cfg, scenario=ScenarioKind.parse(args.scenario))
    parent = Path(args.out or cfg.out)
    run_dir = _new_run_dir(parent, cfg.scenario)
    run_dir.mkdir(parents=True)
    (run_dir / "config.yaml").write_text(cfg.dump())
    for seed in cfg.seeds:
        def progress(row, seed=seed):
            if not args.quiet and (row["episode"] + 1) % 100 == 0:
                log.info("seed %d episode %d success %.2f danger %.3f", seed, row["episode"] + 1,
                         row["success_rate"], row["dangerous_step_fraction"])
        art = run_training(cfg.train_for_seed(seed), cfg.scenario, cfg.physics,
                           cfg.scenario_params, progress=progress)
        art.save(run_dir / f"seed_{seed}")
    print(run_dir)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    run_dir = Path(args.run_dir)
    scenario = ScenarioKind.parse(args.scenario) if args.scenario else None
    dirs = _seed_dirs(run_dir)
    if not dirs:
        log.error("no checkpoints found under %s", run_dir)
        return EXIT_RUNTIME
    for d in dirs:
        policy = load_run(d)
        episodes = args.episodes if args.episodes is not None else load_config(_find_config(d)).eval_episodes
        summary, traces = evaluate(policy, scenario, episodes, args.seed)
        (d / "summary.csv").write_text(summary_csv([summary]))
        write_traces_jsonl(traces, d / "traces.jsonl")
        if not args.quiet:
            print(f"{d}: danger {summary.dangerous_behavior_frequency:.4f} "
                  f"success {summary.success_rate:.4f}")
    return EXIT_OK


def _mean_summary(run_dir: Path):
    paths = [d / "summary.csv" for d in _seed_dirs(run_dir)] or [run_dir / "summary.csv"]
    missing = [p for p in paths if not p.exists()]
    if missing:
        raise UsageError(f"missing summary: {missing[0]} (run `ccrsim evaluate` first)")
    rows = [read_summary_csv(p) for p in paths]
    if len({r.scenario for r in rows}) != 1:
        raise UsageError(f"{run_dir}: seed summaries disagree on scenario")
    first = rows[0]
    return dataclasses.replace(
        first,
        episodes=sum(r.episodes for r in rows),
        **{f: float(np.mean([getattr(r, f) for r in rows]))
           for f in ("dangerous_behavior_frequency", "success_rate",
                     "mean_distance_to_danger_center", "mean_return")},
    )


def cmd_compare(args) -> int:
    a = _mean_summary(Path(args.run_a))
    b = _mean_summary(Path(args.run_b))
    if a.scenario != b.scenario:
        log.error("scenario mismatch: %s vs %s", a.scenario, b.scenario)
        return EXIT_RUNTIME
    row = compare_runs(a, b)
    print(format_comparison(row, Path(args.run_a).name, Path(args.run_b).name))
    out = Path(args.out or "comparison.csv")
    out.write_text(comparison_csv(row))
    return EXIT_OK


def cmd_plot(args) -> int:
    path = Path(args.traces)
    if not path.exists():
        raise UsageError(f"traces file not found: {path}")
    out = Path(args.out) if args.out else path.parent / "plots"
    try:
        written = write_plots(path, out)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_RUNTIME
    if not written:
        log.warning("%s holds no trace records; no plots written", path)
    elif not args.quiet:
        print(f"wrote {len(written)} plot(s) to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccrsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    valid = ", ".join(k.value for k in ScenarioKind)

    p = sub.add_parser("train", help="train policies for every configured seed")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="parent directory for the new run directory")
    p.add_argument("--seed", type=int, help="train this single seed instead of the config list")
    p.add_argument("--episodes", type=int)
    p.add_argument("--scenario", help=f"override scenario ({valid})")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate the checkpoints of a run")
    p.add_argument("run_dir")
    p.add_argument("--scenario", help=valid)
    p.add_argument("--episodes", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="compare evaluated runs A (baseline) and B")
    p.add_argument("run_a")
    p.add_argument("run_b")
    p.add_argument("--out", help="comparison CSV path (default ./comparison.csv)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("plot", help="render one SVG per episode of a traces file")
    p.add_argument("traces")
    p.add_argument("--out")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        if "unknown scenario" in str(exc):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
