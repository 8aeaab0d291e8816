"""End-to-end campaign runs driven by a config file.

A campaign run builds or loads the network, selects targets greedily for the
configured policy family, simulates both the no-agent baseline and the
policy over the evaluation horizon under bounded-confidence dynamics, and
exports trajectories, opinion dumps, densities, targets, and a metrics
summary. Outputs are byte-stable for a fixed config and seed.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, fields

import numpy as np

from .dynamics import ModelParams, Trajectory, integrate, write_table
from .network import Network, load_network, path_network
from .objectives import ObjectiveKind, evaluate
from .policy import PolicyParams
from .targeting import (TargetMatrix, TargetingConfig, TargetingResult,
                        greedy_targets, make_policy, POLICY_FAMILIES)

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "CampaignConfig",
    "CampaignResult",
    "DeltaResult",
    "objective_delta",
    "export_density",
    "run_campaign",
]


class ConfigError(ValueError):
    """Raised on config validation failure; lists every bad field."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid campaign config:\n  " + "\n  ".join(self.problems))


_MISSING = object()


@dataclass
class CampaignConfig:
    """Full experiment description.

    Dotted key names in the config file: network.edges, network.opinions,
    network.generator, model.epsilon, model.omega, model.u_min, model.u_max,
    model.lambda_max, policy.family, policy.gamma, objective, agents.count,
    agents.d_max, targeting.consideration_size, targeting.horizon,
    eval.horizon, integrator.substep, seed, out_dir.
    """

    objective: ObjectiveKind
    edges_file: str | None = None
    opinions_file: str | None = None
    generator: dict | None = None
    epsilon: float = 0.1
    omega: float = 0.003
    u_min: float = 0.0
    u_max: float = 1.0
    lambda_max: float = 10.0
    policy_family: str = "nudging"
    gamma: float = 0.001
    n_agents: int = 1
    d_max: int = 1
    consideration_size: int = 1000
    targeting_horizon: int = 30
    eval_horizon: int = 365
    substep: float = 0.1
    seed: int = 0
    out_dir: str = "campaign_out"
    include_node_columns: bool = False
    density_bins: int = 50
    fmt: str = "csv"

    @classmethod
    def from_dict(cls, raw: dict) -> "CampaignConfig":
        problems: list[str] = []

        def get(dotted: str, default=_MISSING, cast=None):
            node = raw
            for part in dotted.split("."):
                if not isinstance(node, dict) or part not in node:
                    if default is _MISSING:
                        problems.append(f"{dotted}: missing required key")
                        return None
                    return default
                node = node[part]
            if cast is not None:
                try:
                    return cast(node)
                except (TypeError, ValueError):
                    problems.append(f"{dotted}: cannot interpret {node!r}")
                    return None
            return node

        objective_name = get("objective")
        kind = None
        if objective_name is not None:
            try:
                kind = ObjectiveKind.from_name(objective_name)
            except ValueError as exc:
                problems.append(str(exc))
        objective_reported = bool(problems)

        cfg_kwargs = dict(
            edges_file=get("network.edges", None),
            opinions_file=get("network.opinions", None),
            generator=get("network.generator", None),
            epsilon=get("model.epsilon", 0.1, float),
            omega=get("model.omega", 0.003, float),
            u_min=get("model.u_min", 0.0, float),
            u_max=get("model.u_max", 1.0, float),
            lambda_max=get("model.lambda_max", 10.0, float),
            policy_family=get("policy.family", "nudging"),
            gamma=get("policy.gamma", 0.001, float),
            n_agents=get("agents.count", 1, int),
            d_max=get("agents.d_max", 1, int),
            consideration_size=get("targeting.consideration_size", 1000, int),
            targeting_horizon=get("targeting.horizon", 30, int),
            eval_horizon=get("eval.horizon", 365, int),
            substep=get("integrator.substep", 0.1, float),
            seed=get("seed", 0, int),
            out_dir=get("out_dir", "campaign_out"),
            include_node_columns=get("output.node_columns", False, bool),
            density_bins=get("output.density_bins", 50, int),
            fmt=get("output.format", "csv"),
        )
        # Unparseable values were recorded above; substitute field defaults so
        # the remaining checks can still run and report every bad field.
        defaults = {f.name: f.default for f in fields(cls)}
        for key, value in list(cfg_kwargs.items()):
            if value is None and defaults.get(key) is not None:
                cfg_kwargs[key] = defaults[key]
        cfg = cls(objective=kind, **cfg_kwargs)
        problems += cfg._problems(check_objective=not objective_reported)
        if problems:
            raise ConfigError(problems)
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "CampaignConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError([f"{path}: not valid JSON ({exc})"]) from None
        return cls.from_dict(raw)

    def validate(self) -> None:
        problems = self._problems()
        if problems:
            raise ConfigError(problems)

    def _problems(self, check_objective: bool = True) -> list[str]:
        problems = []
        if check_objective and not isinstance(self.objective, ObjectiveKind):
            problems.append("objective: must be one of "
                            + ", ".join(k.value for k in ObjectiveKind))
        has_files = self.edges_file is not None or self.opinions_file is not None
        if self.generator is not None and has_files:
            problems.append("network: specify either files or a generator, not both")
        if self.generator is None and not (self.edges_file and self.opinions_file):
            problems.append("network: need network.edges plus network.opinions, "
                            "or network.generator")
        if self.generator is not None:
            if self.generator.get("kind") != "path":
                problems.append("network.generator.kind: only 'path' is supported")
            elif int(self.generator.get("n", 0)) < 1:
                problems.append("network.generator.n: must be at least 1")
        for name in ("edges_file", "opinions_file"):
            path = getattr(self, name)
            if path is not None and not os.path.exists(path):
                problems.append(f"network.{name.removesuffix('_file')}: "
                                f"file not found: {path}")
        try:
            self.model_params()
        except ValueError as exc:
            problems.append(f"model: {exc}")
        try:
            self.policy_params()
        except ValueError as exc:
            problems.append(f"policy.gamma: {exc}")
        if self.policy_family not in POLICY_FAMILIES:
            problems.append(f"policy.family: must be one of {POLICY_FAMILIES}")
        if self.n_agents < 0:
            problems.append("agents.count: must be nonnegative")
        if self.d_max < 1:
            problems.append("agents.d_max: must be at least 1")
        if self.consideration_size < 1:
            problems.append("targeting.consideration_size: must be at least 1")
        if self.targeting_horizon < 1:
            problems.append("targeting.horizon: must be at least 1")
        if self.eval_horizon < 1:
            problems.append("eval.horizon: must be at least 1")
        if not 0 < self.substep <= 1:
            problems.append("integrator.substep: must be in (0, 1]")
        if self.density_bins < 2:
            problems.append("output.density_bins: must be at least 2")
        if self.fmt not in ("csv", "ndjson"):
            problems.append("output.format: must be csv or ndjson")
        return problems

    def model_params(self) -> ModelParams:
        return ModelParams(epsilon=self.epsilon, omega=self.omega, u_min=self.u_min,
                           u_max=self.u_max, lambda_max=self.lambda_max)

    def policy_params(self) -> PolicyParams:
        return PolicyParams(gamma=self.gamma)

    def build_network(self) -> Network:
        if self.generator is not None:
            return path_network(int(self.generator["n"]),
                                float(self.generator.get("rate", 1.0)))
        return load_network(self.edges_file, self.opinions_file)


@dataclass(frozen=True)
class DeltaResult:
    """Objective change of a policy run against the no-agent baseline."""

    value: float
    is_percent: bool


def objective_delta(r_policy: float, r_baseline: float) -> DeltaResult:
    """Percent objective change relative to the baseline magnitude.

    A zero baseline has no meaningful percent change; the absolute
    difference is returned instead, flagged via ``is_percent=False``.
    """
    if r_baseline == 0.0:
        return DeltaResult(value=r_policy - r_baseline, is_percent=False)
    return DeltaResult(value=100.0 * (r_policy - r_baseline) / abs(r_baseline),
                       is_percent=True)


def export_density(theta, bins: int, path, fmt: str = "csv") -> str:
    """Histogram the opinion vector over [0, 1] and dump the raw values too.

    Densities integrate to one. The raw vector goes to a sibling file with a
    ``_raw`` suffix for external kernel-density plotting; its path is
    returned.
    """
    if bins < 2:
        raise ValueError("need at least 2 bins")
    theta = np.asarray(theta, dtype=np.float64)
    counts, edges = np.histogram(theta, bins=bins, range=(0.0, 1.0))
    width = edges[1] - edges[0]
    total = max(theta.size, 1)
    rows = [[float(edges[i]), float(edges[i + 1]), int(counts[i]),
             float(counts[i] / (total * width))] for i in range(bins)]
    write_table(path, ["bin_left", "bin_right", "count", "density"], rows, fmt)
    base, ext = os.path.splitext(str(path))
    raw_path = f"{base}_raw{ext or '.csv'}"
    write_table(raw_path, ["opinion"], [[float(v)] for v in theta], fmt)
    return raw_path


@dataclass
class CampaignResult:
    baseline_objective: float
    policy_objective: float
    delta: DeltaResult
    targets: list[list[int]]
    files: dict[str, str] = field(default_factory=dict)
    targeting: TargetingResult | None = None
    baseline_trajectory: Trajectory | None = None
    policy_trajectory: Trajectory | None = None


def run_campaign(cfg: CampaignConfig) -> CampaignResult:
    """Execute baseline plus configured policy and export all artifacts."""
    cfg.validate()
    network = cfg.build_network()
    model = cfg.model_params()
    pparams = cfg.policy_params()
    kind = cfg.objective
    os.makedirs(cfg.out_dir, exist_ok=True)

    log.info("campaign: %d nodes, %d edges, objective=%s, family=%s",
             network.n, network.num_edges, kind.value, cfg.policy_family)

    baseline_traj = integrate(network, [], None, cfg.eval_horizon, cfg.substep, model)
    r_base = evaluate(kind, baseline_traj.final_opinions())

    targeting_result = None
    if cfg.n_agents == 0:
        matrix = TargetMatrix([])
        policy_traj = baseline_traj
    else:
        tcfg = TargetingConfig(d_max=cfg.d_max,
                               consideration_size=cfg.consideration_size,
                               horizon=cfg.targeting_horizon,
                               policy_family=cfg.policy_family,
                               substep=cfg.substep)
        targeting_result = greedy_targets(network, kind, cfg.n_agents, tcfg,
                                          model, pparams)
        matrix = targeting_result.matrix
        policy = make_policy(cfg.policy_family, kind, matrix.rows, model, pparams)
        policy_traj = integrate(network, matrix.rows, policy, cfg.eval_horizon,
                                cfg.substep, model)

    r_policy = evaluate(kind, policy_traj.final_opinions())
    delta = objective_delta(r_policy, r_base)

    ext = ".csv" if cfg.fmt == "csv" else ".ndjson"
    out = lambda stem: os.path.join(cfg.out_dir, stem + ext)
    files = {}

    policy_traj.write(out("trajectory"), cfg.include_node_columns, cfg.fmt)
    files["trajectory"] = out("trajectory")
    baseline_traj.write(out("trajectory_baseline"), cfg.include_node_columns, cfg.fmt)
    files["trajectory_baseline"] = out("trajectory_baseline")

    write_table(out("opinions_initial"), ["node", "opinion"],
                [[i, float(v)] for i, v in enumerate(network.initial_opinions)],
                cfg.fmt)
    files["opinions_initial"] = out("opinions_initial")
    write_table(out("opinions_final"), ["node", "opinion"],
                [[i, float(v)] for i, v in enumerate(policy_traj.final_opinions())],
                cfg.fmt)
    files["opinions_final"] = out("opinions_final")

    matrix.write(out("targets"), cfg.fmt)
    files["targets"] = out("targets")

    for stem, theta in (("density_initial", network.initial_opinions),
                        ("density_final", policy_traj.final_opinions())):
        export_density(theta, cfg.density_bins, out(stem), cfg.fmt)
        files[stem] = out(stem)

    metrics = {
        "objective": kind.value,
        "policy_family": cfg.policy_family,
        "n_agents": cfg.n_agents,
        "baseline_objective": r_base,
        "policy_objective": r_policy,
        "delta": delta.value,
        "delta_is_percent": delta.is_percent,
        "targets_per_agent": [row.tolist() for row in matrix.rows],
        "targeting_baseline": (targeting_result.baseline_objective
                               if targeting_result else None),
        "targeting_best": (targeting_result.best_objective
                           if targeting_result else None),
        "eval_horizon": cfg.eval_horizon,
        "targeting_horizon": cfg.targeting_horizon,
        "seed": cfg.seed,
    }
    metrics_path = os.path.join(cfg.out_dir, "metrics.json")
    with open(metrics_path, "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files["metrics"] = metrics_path

    return CampaignResult(baseline_objective=r_base, policy_objective=r_policy,
                          delta=delta, targets=[row.tolist() for row in matrix.rows],
                          files=files, targeting=targeting_result,
                          baseline_trajectory=baseline_traj,
                          policy_trajectory=policy_traj)
