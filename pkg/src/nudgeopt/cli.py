"""Command-line front door.

Subcommands: simulate (no agents), target (greedy targeting only), policy
(content opinions for given targets), run (full campaign), oracle
(brute-force reference checks), render-content (numeric policy to prompts).
Exit codes: 0 success, 1 oracle hard-gate failure, 2 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import oracle as oracle_mod
from .campaign import CampaignConfig, ConfigError, export_density, run_campaign
from .dynamics import integrate, write_table
from .llm_content import DEFAULT_SCALE, EndpointConfig, render_policy
from .objectives import evaluate
from .targeting import TargetMatrix, TargetingConfig, greedy_targets, make_policy


def _apply_dotted(raw: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = raw
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def _coerce(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _load_config(args) -> CampaignConfig:
    raw = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError([f"--set {item!r}: expected KEY=VALUE"])
        key, value = item.split("=", 1)
        _apply_dotted(raw, key.strip(), _coerce(value.strip()))
    if args.objective:
        raw["objective"] = args.objective
    if args.out_dir:
        raw["out_dir"] = args.out_dir
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.format:
        _apply_dotted(raw, "output.format", args.format)
    return CampaignConfig.from_dict(raw)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="campaign config JSON file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a dotted config key (repeatable)")
    p.add_argument("--objective", choices=["max_mean", "max_var", "min_var"])
    p.add_argument("--out-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["csv", "ndjson"])


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    network = cfg.build_network()
    os.makedirs(cfg.out_dir, exist_ok=True)
    traj = integrate(network, [], None, cfg.eval_horizon, cfg.substep,
                     cfg.model_params())
    ext = ".csv" if cfg.fmt == "csv" else ".ndjson"
    path = os.path.join(cfg.out_dir, "trajectory" + ext)
    traj.write(path, cfg.include_node_columns, cfg.fmt)
    export_density(network.initial_opinions, cfg.density_bins,
                   os.path.join(cfg.out_dir, "density_initial" + ext), cfg.fmt)
    export_density(traj.final_opinions(), cfg.density_bins,
                   os.path.join(cfg.out_dir, "density_final" + ext), cfg.fmt)
    r = evaluate(cfg.objective, traj.final_opinions())
    print(f"simulated {cfg.eval_horizon} steps on {network.n} nodes; "
          f"final {cfg.objective.value}={r:.6g}; trajectory at {path}")
    return 0


def cmd_target(args) -> int:
    cfg = _load_config(args)
    network = cfg.build_network()
    os.makedirs(cfg.out_dir, exist_ok=True)
    tcfg = TargetingConfig(d_max=cfg.d_max, consideration_size=cfg.consideration_size,
                           horizon=cfg.targeting_horizon,
                           policy_family=cfg.policy_family, substep=cfg.substep)
    result = greedy_targets(network, cfg.objective, cfg.n_agents, tcfg,
                            cfg.model_params(), cfg.policy_params())
    ext = ".csv" if cfg.fmt == "csv" else ".ndjson"
    tpath = os.path.join(cfg.out_dir, "targets" + ext)
    result.matrix.write(tpath, cfg.fmt)
    summary = {
        "targets_per_agent": [row.tolist() for row in result.matrix.rows],
        "baseline_objective": result.baseline_objective,
        "best_objective": result.best_objective,
        "evaluations": result.evaluations,
    }
    spath = os.path.join(cfg.out_dir, "targeting_summary.json")
    with open(spath, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"selected {sum(len(r) for r in result.matrix.rows)} targets "
          f"for {cfg.n_agents} agent(s); objective "
          f"{result.baseline_objective:.6g} -> {result.best_objective:.6g}; "
          f"assignments at {tpath}")
    return 0


def _read_target_rows(path) -> list[np.ndarray]:
    assignments: dict[int, list[int]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "agent":
                continue
            agent, node = int(row[0]), int(row[1])
            assignments.setdefault(agent, []).append(node)
    n_agents = max(assignments) + 1 if assignments else 0
    return [np.array(assignments.get(a, []), dtype=np.int64) for a in range(n_agents)]


def cmd_policy(args) -> int:
    cfg = _load_config(args)
    network = cfg.build_network()
    os.makedirs(cfg.out_dir, exist_ok=True)
    rows = _read_target_rows(args.targets)
    matrix = TargetMatrix(rows)
    policy = make_policy(cfg.policy_family, cfg.objective, matrix.rows,
                         cfg.model_params(), cfg.policy_params())
    traj = integrate(network, matrix.rows, policy, cfg.eval_horizon, cfg.substep,
                     cfg.model_params())
    ext = ".csv" if cfg.fmt == "csv" else ".ndjson"
    for a in range(matrix.n_agents):
        path = os.path.join(cfg.out_dir, f"content_agent{a}" + ext)
        steps = [[int(t), float(traj.agent_opinions[t, a])]
                 for t in range(cfg.eval_horizon)]
        write_table(path, ["t", "u"], steps, cfg.fmt)
    tpath = os.path.join(cfg.out_dir, "trajectory" + ext)
    traj.write(tpath, cfg.include_node_columns, cfg.fmt)
    print(f"emitted content policies for {matrix.n_agents} agent(s) in {cfg.out_dir}")
    return 0


def cmd_run(args) -> int:
    cfg = _load_config(args)
    result = run_campaign(cfg)
    unit = "%" if result.delta.is_percent else " (absolute)"
    print(f"baseline {cfg.objective.value}={result.baseline_objective:.6g}, "
          f"policy={result.policy_objective:.6g}, "
          f"delta={result.delta.value:.4g}{unit}")
    print(f"artifacts in {cfg.out_dir}")
    return 0


def cmd_oracle(args) -> int:
    reports = oracle_mod.counterexample_suite(
        h=args.substep, include_search=not args.skip_search,
        search_seed=args.search_seed, max_instances=args.budget)
    for report in reports:
        print(report.line())
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        summary = [{k: v for k, v in vars(r).items() if k != "payload"}
                   for r in reports]
        with open(os.path.join(args.out_dir, "oracle_summary.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        for report in reports:
            if report.payload is not None:
                oracle_mod.save_witness(
                    report.payload,
                    os.path.join(args.out_dir, "agent_count_regression.json"))
    failed = [r for r in reports if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed", file=sys.stderr)
        return 1
    print("all checks passed")
    return 0


def _read_policy_steps(path) -> list[tuple[float, float]]:
    steps = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "t":
                continue
            steps.append((float(row[0]), float(row[1])))
    return steps


def cmd_render_content(args) -> int:
    steps = _read_policy_steps(args.policy)
    endpoint = None
    if args.live:
        endpoint = EndpointConfig(base_url=args.url, model=args.model,
                                  api_key_env=args.api_key_env,
                                  timeout=args.timeout, dry_run=False)
    rows = render_policy(steps, topic=args.topic, content_type=args.content_type,
                         scale=(args.scale_min, args.scale_max), endpoint=endpoint,
                         stride=args.stride, max_concurrency=args.max_concurrency)
    header = ["t", "opinion_scaled", "prompt"] + (["completion"] if args.live else [])
    table = [[r[k] for k in header] for r in rows]
    if args.out:
        write_table(args.out, header, table, args.format or "csv")
        print(f"wrote {len(rows)} prompt row(s) to {args.out}")
    elif (args.format or "csv") == "csv":
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows(table)
    else:
        for r in table:
            sys.stdout.write(json.dumps(dict(zip(header, r))) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nudgeopt",
        description="Influence-campaign simulation and policy optimization "
                    "under bounded-confidence opinion dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, blurb in [
        ("simulate", cmd_simulate, "run natural dynamics with no agents"),
        ("target", cmd_target, "greedy target selection only"),
        ("run", cmd_run, "full campaign: baseline, targeting, policy, exports"),
    ]:
        p = sub.add_parser(name, help=blurb)
        _add_config_flags(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("policy", help="emit content opinions for given targets")
    _add_config_flags(p)
    p.add_argument("--targets", required=True, help="target CSV (agent,node)")
    p.set_defaults(fn=cmd_policy)

    p = sub.add_parser("oracle", help="brute-force reference and regression checks")
    p.add_argument("--out-dir")
    p.add_argument("--substep", type=float, default=0.1)
    p.add_argument("--skip-search", action="store_true",
                   help="skip the agent-count regression search")
    p.add_argument("--search-seed", type=int, default=oracle_mod.WITNESS_SEARCH_SEED)
    p.add_argument("--budget", type=int, default=400,
                   help="max instances for the regression search")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("render-content", help="render a policy CSV into prompts")
    p.add_argument("--policy", required=True, help="policy CSV with t,u columns")
    p.add_argument("--topic", required=True)
    p.add_argument("--content-type", default="tweet")
    p.add_argument("--scale-min", type=int, default=DEFAULT_SCALE[0])
    p.add_argument("--scale-max", type=int, default=DEFAULT_SCALE[1])
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--live", action="store_true",
                   help="issue real requests (default is dry run)")
    p.add_argument("--url", default="https://api.openai.com/v1")
    p.add_argument("--model", default="gpt-4o-mini")
    p.add_argument("--api-key-env", default="LLM_API_KEY")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--max-concurrency", type=int, default=4)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["csv", "ndjson"])
    p.set_defaults(fn=cmd_render_content)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print("configuration problems:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
