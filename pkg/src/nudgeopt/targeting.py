"""Greedy target selection for multi-agent campaigns.

Targets are drawn from an out-degree-ranked consideration set. Agents are
processed in id order; each agent tentatively adds one candidate at a time,
reruns the full campaign simulation over the targeting horizon, and keeps
the candidate only when the final objective strictly improves on the shared
incumbent best. Accepted nodes join a global exclusion set so no two agents
share a target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import ModelParams, integrate, write_table
from .network import Network, top_out_degree
from .objectives import ObjectiveKind, evaluate
from .policy import NudgingPolicy, PolicyParams, StaticPolicy, degroot_static_opinion

__all__ = [
    "TargetingConfig",
    "TargetMatrix",
    "TargetingResult",
    "consideration_set",
    "greedy_targets",
    "family_dynamics",
    "make_policy",
]

POLICY_FAMILIES = ("nudging", "degroot")


@dataclass(frozen=True)
class TargetingConfig:
    d_max: int
    consideration_size: int
    horizon: int
    policy_family: str = "nudging"
    substep: float = 0.1

    def __post_init__(self):
        if self.d_max < 1:
            raise ValueError("d_max must be at least 1")
        if self.consideration_size < 1:
            raise ValueError("consideration_size must be at least 1")
        if self.horizon < 1:
            raise ValueError("targeting horizon must be at least 1")
        if self.policy_family not in POLICY_FAMILIES:
            raise ValueError(f"policy family must be one of {POLICY_FAMILIES}")


@dataclass
class TargetMatrix:
    """Per-agent target node sets; rows are pairwise disjoint."""

    rows: list[np.ndarray]

    def __post_init__(self):
        self.rows = [np.asarray(r, dtype=np.int64).reshape(-1) for r in self.rows]
        seen = set()
        for a, row in enumerate(self.rows):
            for node in row.tolist():
                if node in seen:
                    raise ValueError(f"node {node} assigned to more than one agent")
                seen.add(node)

    @property
    def n_agents(self) -> int:
        return len(self.rows)

    def all_targets(self) -> set[int]:
        return {int(v) for row in self.rows for v in row}

    def to_dense(self, n: int) -> np.ndarray:
        x = np.zeros((len(self.rows), n), dtype=bool)
        for a, row in enumerate(self.rows):
            x[a, row] = True
        return x

    def write(self, path, fmt: str = "csv") -> None:
        rows = [[a, int(node)] for a, row in enumerate(self.rows) for node in row]
        write_table(path, ["agent", "node"], rows, fmt)


@dataclass
class TargetingResult:
    matrix: TargetMatrix
    baseline_objective: float   # no-agent objective at the targeting horizon
    best_objective: float       # incumbent objective after the greedy pass
    evaluations: int = 0        # candidate simulations run


def consideration_set(network: Network, size: int) -> list[int]:
    """Candidate pool: the highest follower-count nodes, in iteration order."""
    return top_out_degree(network, size)


def family_dynamics(family: str, model: ModelParams) -> ModelParams:
    """Node dynamics assumed by a policy family during target evaluation."""
    if family == "nudging":
        return model
    if family == "degroot":
        return model.linear_limit()
    raise ValueError(f"policy family must be one of {POLICY_FAMILIES}")


def make_policy(family: str, kind: ObjectiveKind, rows, model: ModelParams,
                params: PolicyParams):
    """Content-policy callback for a family given a target assignment."""
    if family == "nudging":
        return NudgingPolicy(kind, rows, model, params)
    if family == "degroot":
        return StaticPolicy(degroot_static_opinion(kind), n_agents=len(rows))
    raise ValueError(f"policy family must be one of {POLICY_FAMILIES}")


def greedy_targets(network: Network, kind: ObjectiveKind, n_agents: int,
                   cfg: TargetingConfig, model: ModelParams,
                   params: PolicyParams = PolicyParams()) -> TargetingResult:
    """Select per-agent target sets greedily against full-horizon simulations.

    The incumbent best is initialized to the simulated no-agent objective
    rather than zero, so negative-valued objectives (variance minimization)
    still admit improving candidates; with a zero no-agent objective this
    reduces to the plain greedy recursion. Candidates whose simulated
    objective does not strictly exceed the incumbent are skipped.
    """
    if n_agents < 1:
        raise ValueError("need at least one agent")
    candidates = consideration_set(network, cfg.consideration_size)
    if not candidates:
        raise ValueError("empty consideration set")
    dyn = family_dynamics(cfg.policy_family, model)

    def simulate(rows) -> float:
        policy = make_policy(cfg.policy_family, kind, rows, model, params)
        traj = integrate(network, rows, policy, cfg.horizon, cfg.substep, dyn)
        return evaluate(kind, traj.final_opinions())

    rows: list[list[int]] = [[] for _ in range(n_agents)]
    baseline = simulate(rows)
    r_star = baseline
    taken: set[int] = set()
    evals = 1

    for a in range(n_agents):
        d_a = 0
        for node in candidates:
            if node in taken:
                continue
            rows[a].append(node)
            r = simulate(rows)
            evals += 1
            if r > r_star:
                taken.add(node)
                r_star = r
                d_a += 1
            else:
                rows[a].pop()
            if d_a >= cfg.d_max:
                break

    matrix = TargetMatrix([np.array(r, dtype=np.int64) for r in rows])
    return TargetingResult(matrix=matrix, baseline_objective=baseline,
                           best_objective=r_star, evaluations=evals)
