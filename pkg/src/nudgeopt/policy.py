"""Agent content policies: greedy nudging updates and the static baseline.

Each unit time the greedy policy places an agent's content opinion to
maximize the weighted sum of its targets' opinion shifts,

    g(u) = sum_i w_i * f(u - theta_i),

with weights given by the objective gradient at the current state. g is
piecewise linear in u with breakpoints only at the window edges, so the
argmax over the feasible interval is found by exact enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import ModelParams, shift
from .objectives import ObjectiveKind, gradient

__all__ = [
    "Agent",
    "PolicyParams",
    "policy_objective",
    "greedy_content_step",
    "initial_opinion",
    "degroot_static_opinion",
    "NudgingPolicy",
    "StaticPolicy",
]


@dataclass
class Agent:
    """An exogenous influencer: posting rate, fixed target set, opinion state."""

    id: int
    rate: float
    targets: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    prev_opinion: float | None = None

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=np.int64).reshape(-1)


@dataclass(frozen=True)
class PolicyParams:
    """Greedy-policy regularization: per-step cap on agent opinion movement."""

    gamma: float = 0.001

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


def policy_objective(u: float, weights, target_thetas, model: ModelParams) -> float:
    """The per-step content objective g(u) for one agent."""
    w = np.asarray(weights, dtype=np.float64)
    th = np.asarray(target_thetas, dtype=np.float64)
    return float(np.dot(w, shift(u - th, model)))


def _feasible_interval(prev_u, params: PolicyParams | None, model: ModelParams):
    if prev_u is None:
        return model.u_min, model.u_max
    gamma = params.gamma if params is not None else np.inf
    return max(model.u_min, prev_u - gamma), min(model.u_max, prev_u + gamma)


def _pin(edge: np.ndarray, th: np.ndarray, eps: float, inside: bool,
         low_side: bool) -> np.ndarray:
    """Step edge candidates by ulps until the computed gap lands on the
    requested side of the inclusive window test."""
    edge = edge.copy()
    toward = th if inside else np.where(low_side, -np.inf, np.inf)
    gap = th - edge if low_side else edge - th
    wrong = (gap > eps) if inside else (gap <= eps)
    while wrong.any():
        edge[wrong] = np.nextafter(edge[wrong], np.broadcast_to(toward, edge.shape)[wrong])
        gap = th - edge if low_side else edge - th
        wrong = (gap > eps) if inside else (gap <= eps)
    return edge


def greedy_content_step(weights, target_thetas, prev_u: float | None,
                        params: PolicyParams | None, model: ModelParams) -> float:
    """One greedy content update: argmax of g over the feasible interval.

    The feasible interval is [u_min, u_max] intersected with the gamma-box
    around the previous opinion (full bounds when prev_u is unset). Candidate
    points are the window edges and target opinions clipped into the interval
    plus the interval endpoints; g is piecewise linear between them, and the
    window test is inclusive at the edges, so this enumeration attains the
    maximum. Ties go to the candidate closest to the unweighted mean of the
    target opinions, then to the smallest value.
    """
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    th = np.asarray(target_thetas, dtype=np.float64).reshape(-1)
    if th.size == 0:
        raise ValueError("greedy content step needs a nonempty target set")
    if w.shape != th.shape:
        raise ValueError("weights and target opinions must align")
    lo, hi = _feasible_interval(prev_u, params, model)

    eps = model.epsilon
    if np.isfinite(eps):
        # g jumps at window edges: the value at an edge includes that window's
        # term while the adjacent outside limit does not, and either side can
        # be the larger. Enumerate each edge pinned just inside its own window
        # (rounded theta +/- eps can land one ulp outside and score zero under
        # the inclusive test) plus the nearest float strictly outside, so both
        # one-sided values are attained by some candidate.
        upper = _pin(th + eps, th, eps, inside=True, low_side=False)
        lower = _pin(th - eps, th, eps, inside=True, low_side=True)
        upper_out = _pin(np.nextafter(upper, np.inf), th, eps, inside=False,
                         low_side=False)
        lower_out = _pin(np.nextafter(lower, -np.inf), th, eps, inside=False,
                         low_side=True)
        cand = np.concatenate((lower_out, lower, th, upper, upper_out, (lo, hi)))
    else:
        cand = np.concatenate((th, (lo, hi)))
    cand = np.unique(np.clip(cand, lo, hi))

    gaps = cand[:, None] - th[None, :]
    vals = np.where(np.abs(gaps) <= eps, model.omega * gaps, 0.0) @ w
    best = vals.max()
    tie_tol = 1e-15 + 1e-12 * abs(best)
    pool = cand[vals >= best - tie_tol]
    dist = np.abs(pool - th.mean())
    pool = pool[dist <= dist.min() + 1e-12]
    return float(pool.min())


def initial_opinion(weights, target_thetas, model: ModelParams) -> float:
    """First content opinion: an unconstrained greedy solve over full bounds.

    Establishes the previous-opinion state so the gamma-box never strands an
    agent at an arbitrary starting point.
    """
    return greedy_content_step(weights, target_thetas, None, None, model)


def degroot_static_opinion(kind: ObjectiveKind) -> float:
    """The fixed opinion a linear-dynamics (window-free) agent would hold."""
    return {
        ObjectiveKind.MAX_MEAN: 1.0,
        ObjectiveKind.MAX_VAR: 0.0,
        ObjectiveKind.MIN_VAR: 0.5,
    }[kind]


class NudgingPolicy:
    """Content-policy callback running the greedy step for every agent.

    Weights are recomputed from the current opinion vector at every unit
    step; all agents update simultaneously from the same state snapshot.
    Agents with no targets hold a mid-bounds opinion and influence nothing.
    """

    def __init__(self, kind: ObjectiveKind, target_rows, model: ModelParams,
                 params: PolicyParams = PolicyParams()):
        self.kind = kind
        self.rows = [np.asarray(r, dtype=np.int64).reshape(-1) for r in target_rows]
        self.model = model
        self.params = params

    def __call__(self, t: int, theta: np.ndarray, prev_u) -> np.ndarray:
        grad = gradient(self.kind, theta)
        idle = 0.5 * (self.model.u_min + self.model.u_max)
        u = np.empty(len(self.rows))
        for a, row in enumerate(self.rows):
            if row.size == 0:
                u[a] = idle if prev_u is None else prev_u[a]
                continue
            prev = None if prev_u is None else float(prev_u[a])
            u[a] = greedy_content_step(grad[row], theta[row], prev, self.params, self.model)
        return u


class StaticPolicy:
    """Content-policy callback holding every agent at a constant opinion."""

    def __init__(self, values, n_agents: int | None = None):
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.size == 1 and n_agents is not None:
            values = np.full(n_agents, float(values[0]))
        self.values = values

    def __call__(self, t: int, theta: np.ndarray, prev_u) -> np.ndarray:
        return self.values
