"""Command-line front end.

Subcommands: gen, train, run, trial, demo, oracle. Every command writes a
sidecar manifest recording the resolved configuration, seeds, and output
digests; ``cgl --from-manifest PATH`` re-runs the recorded command and
checks that the outputs reproduce byte for byte.

Exit codes: 0 success, 1 navigation failure (target not reached), 2
configuration or validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

import cgl
from cgl.graphs import save_graph, load_graph
from cgl.core import (
    load_snapshot,
    recurse,
    save_snapshot,
    wire_penalty,
    wire_reward,
)
from cgl.agent import (
    AgentConfig,
    navigate,
    new_matrix,
    resolve_walk,
    train,
)
from cgl.harness import (
    TRIAL_PRESETS,
    build_env,
    oracle_walk,
    run_trials,
    run_preset,
)
from cgl.scenarios import run_scenario, scenario_names
from cgl.heatmap import emit_heatmap
from cgl import manifest as mf


class CliError(Exception):
    """Configuration/validation problem; maps to exit code 2."""


def _write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt9(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def _write_csv(rows, header, path) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt9(cell) for cell in row) for row in rows)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_reward(spec: str) -> tuple[int, float]:
    try:
        node, weight = spec.split(":")
        return int(node), float(weight)
    except ValueError:
        raise CliError(f"--reward expects NODE:WEIGHT, got {spec!r}") from None


def _parse_penalty(spec: str) -> tuple[int, int, float]:
    try:
        node, count, weight = spec.split(":")
        return int(node), int(count), float(weight)
    except ValueError:
        raise CliError(f"--penalty expects NODE:COUNT:WEIGHT, got {spec!r}") from None


def _parse_walk(spec: str):
    if spec.startswith("file:"):
        with open(spec[5:], "r", encoding="utf-8") as fh:
            return [int(tok) for tok in fh.read().split()]
    return spec


def _agent_config(args, env=None) -> AgentConfig:
    kw = dict(
        recursions=args.recursions,
        deinforce=args.deinforce,
        floor=args.floor,
        perception=args.perception,
        input_mode=args.input_mode,
        walk=_parse_walk(args.walk),
        seed=args.seed,
        stay_required=args.stay,
        trace=bool(getattr(args, "trace", False)),
    )
    if getattr(args, "max_steps", None) is not None:
        kw["max_steps"] = args.max_steps
    elif env is not None:
        kw["max_steps"] = env.node_count
    try:
        return AgentConfig(**kw)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _add_agent_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--reward", action="append", default=[], metavar="NODE:WEIGHT",
                   help="wire a reward node (repeatable)")
    p.add_argument("--penalty", action="append", default=[], metavar="NODE:COUNT:WEIGHT",
                   help="wire penalty edges (repeatable)")
    p.add_argument("--recursions", type=int, default=6)
    p.add_argument("--deinforce", type=float, default=0.5)
    p.add_argument("--floor", type=float, default=0.25)
    p.add_argument("--perception", choices=["star", "clique"], default="star")
    p.add_argument("--input-mode", choices=["neighborhood", "node"], default="neighborhood")
    p.add_argument("--walk", default="auto",
                   help="training walk: auto|dfs|boustrophedon|sweep|file:PATH")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stay", type=int, default=3, help="consecutive steps required on target")


def _wire(matrix, args) -> dict:
    wiring = {"rewards": [], "penalties": []}
    for spec in args.reward:
        node, weight = _parse_reward(spec)
        wire_reward(matrix, node, weight)
        wiring["rewards"].append([node, weight])
    for spec in args.penalty:
        node, count, weight = _parse_penalty(spec)
        wire_penalty(matrix, node, count, weight)
        wiring["penalties"].append([node, count, weight])
    return wiring


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgl",
        description="Coincident graph learning simulator",
    )
    parser.add_argument("--version", action="version", version=f"cgl {cgl.__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an environment graph file")
    p.add_argument("env_spec", help="path:N | lattice:RxC | ws:N,K,BETA | file:PATH")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("train", help="train an agent, emit a matrix snapshot")
    p.add_argument("env_spec")
    _add_agent_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="single navigation run")
    p.add_argument("env_spec")
    _add_agent_flags(p)
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--trace", action="store_true", help="record per-step value vectors")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--heatmap", default=None, metavar="PATH.svg")

    p = sub.add_parser("trial", help="randomized start/target battery")
    p.add_argument("env_spec", nargs="?", default=None)
    _add_agent_flags(p)
    p.add_argument("--preset", choices=sorted(TRIAL_PRESETS), default=None,
                   help="use a calibrated battery preset instead of explicit flags")
    p.add_argument("--reward-weight", type=float, default=3.0)
    p.add_argument("--pairs", type=int, default=400)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("demo", help="run a shipped scenario replication")
    p.add_argument("scenario", help="one of: " + ", ".join(scenario_names()))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json", "csv"], default=None)
    p.add_argument("--heatmap", default=None, metavar="PATH.svg")

    p = sub.add_parser("oracle", help="cross-check a snapshot against the brute-force walk")
    p.add_argument("snapshot")
    p.add_argument("--node", type=int, required=True, help="input node (unit activation)")
    p.add_argument("--recursions", type=int, default=6)
    p.add_argument("--tolerance", type=float, default=1e-9)

    return parser


# -- commands ---------------------------------------------------------------


def _cmd_gen(args, argv) -> int:
    env = build_env(args.env_spec, seed=args.seed)
    save_graph(env, args.out, fmt=args.format)
    params = {"env_spec": args.env_spec, "seed": args.seed, "format": args.format,
              "node_count": env.node_count, "edge_count": len(env.edges),
              "ws_retries": env.ws_retries}
    _finish_manifest("gen", argv, params, args, outputs=[args.out])
    return 0


def _cmd_train(args, argv) -> int:
    env = build_env(args.env_spec, seed=args.seed)
    cfg = _agent_config(args, env)
    matrix = new_matrix(env, cfg)
    wiring = _wire(matrix, args)
    walk_name, _ = resolve_walk(env, cfg)
    train(env, matrix, cfg)
    save_snapshot(matrix, args.out)
    params = {"env_spec": args.env_spec, "wiring": wiring, "walk": walk_name,
              "config": cfg.to_dict()}
    _finish_manifest("train", argv, params, args, outputs=[args.out])
    return 0


def _cmd_run(args, argv) -> int:
    env = build_env(args.env_spec, seed=args.seed)
    cfg = _agent_config(args, env)
    matrix = new_matrix(env, cfg)
    wiring = _wire(matrix, args)
    walk_name, _ = resolve_walk(env, cfg)
    train(env, matrix, cfg)
    result = navigate(env, matrix, args.start, args.target, cfg, walk_name=walk_name)
    outputs = [args.out]
    if args.format == "json":
        _write_json(result.to_dict(), args.out)
    else:
        _write_csv(result.csv_rows(), ["step", "node", "chosen_value"], args.out)
    if args.heatmap:
        if env.kind != "lattice" or env.shape is None:
            raise CliError("heatmaps need a lattice environment; use CSV output instead")
        if result.values_trace is None:
            raise CliError("heatmaps need --trace to record per-step values")
        rows, cols = env.shape
        grids = [frame[: env.node_count] for frame in result.values_trace]
        emit_heatmap(grids, args.heatmap, rows, cols)
        outputs.append(args.heatmap)
    params = {"env_spec": args.env_spec, "wiring": wiring, "walk": walk_name,
              "start": args.start, "target": args.target, "config": cfg.to_dict(),
              "outcome": result.outcome, "path_length": result.path_length}
    _finish_manifest("run", argv, params, args, outputs=outputs)
    return 0 if result.success else 1


def _cmd_trial(args, argv) -> int:
    if args.preset:
        batch, rows, stats = run_preset(args.preset, master_seed=args.seed,
                                        pair_count=args.pairs, workers=args.workers)
    else:
        if not args.env_spec:
            raise CliError("trial needs an environment spec or --preset")
        env = build_env(args.env_spec, seed=args.seed)
        cfg = _agent_config(args, env)
        batch, rows, stats = run_trials(
            env, args.reward_weight, args.recursions, args.pairs, args.seed,
            base_cfg=cfg, workers=args.workers, env_spec=args.env_spec,
        )
    rows_path = str(args.out) + ".rows.csv"
    _write_csv(
        [(r["start"], r["target"], r["outcome"], r["path_length"]) for r in rows],
        ["start", "target", "outcome", "path_length"],
        rows_path,
    )
    _write_json({"batch": batch.to_dict(), "stats": stats.to_dict()}, args.out)
    params = {"batch": batch.to_dict(), "stats": stats.to_dict(),
              "workers": args.workers, "preset": args.preset}
    _finish_manifest("trial", argv, params, args, outputs=[args.out, rows_path])
    print(f"success {stats.success_percent:.2f}%  median {stats.median_path}  "
          f"mean {None if stats.mean_path is None else round(stats.mean_path, 2)}")
    return 0


def _cmd_demo(args, argv) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    artifact = run_scenario(args.scenario, overrides)
    fmt = args.format
    if fmt is None:
        fmt = "csv" if str(args.out).endswith(".csv") else "json"
    outputs = [args.out]
    if fmt == "json":
        _write_json(artifact, args.out)
    else:
        _write_csv_demo(artifact, args.out)
    if args.heatmap:
        if "grids" not in artifact:
            raise CliError(f"scenario {args.scenario} has no grid data; "
                           "only lattice value-trace scenarios render heatmaps")
        rows, cols = artifact["shape"]
        emit_heatmap(artifact["grids"], args.heatmap, rows, cols)
        outputs.append(args.heatmap)
    params = {"scenario": args.scenario, "overrides": overrides, "format": fmt}
    _finish_manifest("demo", argv, params, args, outputs=outputs)
    return 0


def _write_csv_demo(artifact: dict, out) -> None:
    if "values" in artifact:
        rows = list(zip(artifact["nodes"], artifact["values"], artifact["normalized"]))
        _write_csv(rows, ["node", "value", "normalized"], out)
    elif "runs" in artifact:
        rows = []
        for i, run in enumerate(artifact["runs"]):
            for step, node in enumerate(run["path"]):
                rows.append((i, step, node))
        _write_csv(rows, ["agent", "step", "node"], out)
    elif "run" in artifact:
        rows = [(step, node) for step, node in enumerate(artifact["run"]["path"])]
        _write_csv(rows, ["step", "node"], out)
    else:
        raise CliError("scenario artifact has no tabular form; use --format json")


def _cmd_oracle(args, argv) -> int:
    matrix = load_snapshot(args.snapshot)
    if not (1 <= args.node <= matrix.size):
        raise CliError(f"input node {args.node} outside 1..{matrix.size}")
    x = np.zeros(matrix.size)
    x[args.node - 1] = 1.0
    fast = recurse(x, None, matrix, args.recursions)
    slow = oracle_walk(matrix, x, args.recursions)
    gap = float(np.max(np.abs(fast - slow)))
    agree = gap <= args.tolerance
    print(f"max |recurse - oracle| = {gap:.3e} over {args.recursions} recursions: "
          f"{'OK' if agree else 'MISMATCH'}")
    return 0 if agree else 2


def _finish_manifest(command: str, argv, params: dict, args, outputs) -> None:
    inputs = {}
    spec = getattr(args, "env_spec", None)
    if spec and str(spec).startswith("file:"):
        inputs[spec[5:]] = mf.file_digest(spec[5:])
    if command == "oracle":
        inputs[args.snapshot] = mf.file_digest(args.snapshot)
    digests = {str(p): mf.file_digest(p) for p in outputs}
    manifest = mf.build_manifest(command, argv, params, cgl.__version__,
                                 inputs=inputs, outputs=digests)
    mf.write_manifest(manifest, outputs[0])


_COMMANDS = {
    "gen": _cmd_gen,
    "train": _cmd_train,
    "run": _cmd_run,
    "trial": _cmd_trial,
    "demo": _cmd_demo,
    "oracle": _cmd_oracle,
}


def _replay(path: str) -> int:
    manifest = mf.load_manifest(path)
    argv = manifest["argv"]
    code = main(argv)
    if code not in (0, 1):
        print(f"replay failed with exit code {code}", file=sys.stderr)
        return 2
    mismatched = mf.verify_outputs(manifest)
    if mismatched:
        print("replay outputs differ: " + ", ".join(mismatched), file=sys.stderr)
        return 2
    print(f"replay reproduced {len(manifest.get('outputs', {}))} output(s) byte-identically")
    return code


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    if argv and argv[0] == "--from-manifest":
        if len(argv) != 2:
            print("usage: cgl --from-manifest MANIFEST.json", file=sys.stderr)
            return 2
        return _replay(argv[1])
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
