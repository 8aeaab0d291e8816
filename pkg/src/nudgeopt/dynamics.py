"""Bounded-confidence opinion dynamics: shift function, drift field, integrator.

Node opinions evolve as d(theta_i)/dt = sum_j rate_ji * f(theta_j - theta_i)
plus, for targeted nodes, lambda_max * f(u_a - theta_i) per targeting agent,
where f is the confidence-windowed linear shift. Agent opinions are held
piecewise-constant over unit time intervals and refreshed simultaneously
from the current state at every integer step.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .network import Network

__all__ = ["ModelParams", "Trajectory", "shift", "drift", "integrate"]

QUANTILES = (0.05, 0.25, 0.50, 0.75, 0.95)


@dataclass(frozen=True)
class ModelParams:
    """Opinion model and agent constraint parameters.

    epsilon: confidence window half-width (opinion units); may be inf for
        the linear-averaging limit.
    omega: persuasion strength per post.
    u_min, u_max: bounds on agent content opinions.
    lambda_max: agent posting rate (posts per unit time).
    """

    epsilon: float = 0.1
    omega: float = 0.003
    u_min: float = 0.0
    u_max: float = 1.0
    lambda_max: float = 10.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not self.u_min < self.u_max:
            raise ValueError("u_min must be below u_max")
        if self.lambda_max < 0:
            raise ValueError("lambda_max must be nonnegative")

    def linear_limit(self) -> "ModelParams":
        """The same parameters with the confidence window removed."""
        return ModelParams(epsilon=np.inf, omega=self.omega, u_min=self.u_min,
                           u_max=self.u_max, lambda_max=self.lambda_max)


def shift(x, params: ModelParams):
    """Opinion shift per post: omega*x inside the confidence window, else 0.

    The window test is inclusive: |x| == epsilon still shifts.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.where(np.abs(x) <= params.epsilon, params.omega * x, 0.0)
    return float(out) if out.ndim == 0 else out


def _as_rows(x) -> list[np.ndarray]:
    return [np.asarray(row, dtype=np.int64).reshape(-1) for row in x]


def _drift_kernel(theta, src, dst, rate, n, rows, u, eps, omega, lam) -> np.ndarray:
    gap = theta[src] - theta[dst]
    np.multiply(gap, np.abs(gap) <= eps, out=gap)
    d = np.bincount(dst, weights=rate * gap, minlength=n) * omega
    for a in range(len(rows)):
        row = rows[a]
        if row.size:
            agap = u[a] - theta[row]
            np.multiply(agap, np.abs(agap) <= eps, out=agap)
            d[row] += (lam * omega) * agap
    return d


def drift(network: Network, theta, x, u, params: ModelParams) -> np.ndarray:
    """Instantaneous opinion rate of change for every node.

    x is the target assignment, one node-index row per agent; u holds the
    agents' current content opinions. Every agent posts at lambda_max.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (network.n,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({network.n},)")
    rows = _as_rows(x)
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if len(rows) != u.size:
        raise ValueError(f"{len(rows)} target rows but {u.size} agent opinions")
    for row in rows:
        if row.size and (row.min() < 0 or row.max() >= network.n):
            raise ValueError("target row references a node outside the network")
    return _drift_kernel(theta, network.src, network.dst, network.rate, network.n,
                         rows, u, params.epsilon, params.omega, params.lambda_max)


@dataclass
class Trajectory:
    """Opinion paths at unit-time resolution.

    node_opinions[t] is the state at time t; agent_opinions[t] is the content
    opinion held over [t, t+1) (the final row repeats the last held value so
    both arrays share the time axis).
    """

    times: np.ndarray
    node_opinions: np.ndarray
    agent_opinions: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.times) - 1

    def final_opinions(self) -> np.ndarray:
        return self.node_opinions[-1]

    def summary_rows(self, include_nodes: bool = False) -> tuple[list[str], list[list[float]]]:
        """Header and rows for tabular export: time, distribution stats, agents."""
        n = self.node_opinions.shape[1]
        header = ["t"]
        if include_nodes:
            header += [f"theta_{i}" for i in range(n)]
        header += [f"q{int(q * 100):02d}" for q in QUANTILES] + ["mean", "variance"]
        header += [f"u_{a}" for a in range(self.agent_opinions.shape[1])]
        rows = []
        for t in range(len(self.times)):
            th = self.node_opinions[t]
            row = [float(self.times[t])]
            if include_nodes:
                row += th.tolist()
            row += np.quantile(th, QUANTILES).tolist()
            row.append(float(th.mean()))
            row.append(float(th.var(ddof=1)) if n > 1 else 0.0)
            row += self.agent_opinions[t].tolist()
            rows.append(row)
        return header, rows

    def write(self, path, include_nodes: bool = False, fmt: str = "csv") -> None:
        """Export the trajectory as CSV or newline-delimited JSON."""
        header, rows = self.summary_rows(include_nodes)
        write_table(path, header, rows, fmt)


def write_table(path, header: list[str], rows, fmt: str = "csv") -> None:
    """Write rows as CSV (floats in shortest round-trip form) or NDJSON."""
    if fmt not in ("csv", "ndjson"):
        raise ValueError(f"unknown table format {fmt!r}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if fmt == "csv":
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        else:
            for row in rows:
                fh.write(json.dumps(dict(zip(header, row)), sort_keys=False))
                fh.write("\n")


def integrate(network: Network, x, content_policy, T: int, substep: float = 0.1,
              params: ModelParams = ModelParams()) -> Trajectory:
    """Run the unit-step campaign loop over t = 0..T-1, recording every step.

    At each integer time all agents' opinions are refreshed simultaneously
    via ``content_policy(t, theta, prev_u)`` (prev_u is None at t=0), held
    constant over the unit interval, and node opinions advance by classical
    fourth-order Runge-Kutta with step ``substep``.

    The policy must return opinions within [u_min, u_max]; anything else is
    a contract breach and raises.
    """
    if not (isinstance(T, (int, np.integer)) and T >= 1):
        raise ValueError("horizon T must be an integer >= 1")
    n_sub = round(1.0 / substep)
    if not (0 < substep <= 1 and n_sub >= 1 and abs(n_sub * substep - 1.0) < 1e-9):
        raise ValueError(f"substep {substep} must evenly divide one unit interval")
    rows = _as_rows(x)
    n_agents = len(rows)
    for row in rows:
        if row.size and (row.min() < 0 or row.max() >= network.n):
            raise ValueError("target row references a node outside the network")

    theta = network.initial_opinions.copy()
    node_path = np.empty((T + 1, network.n))
    agent_path = np.empty((T + 1, n_agents))
    node_path[0] = theta
    prev_u = None
    h = substep
    src, dst, rate, n = network.src, network.dst, network.rate, network.n
    eps, omega, lam = params.epsilon, params.omega, params.lambda_max

    empty = np.empty(0)
    for t in range(T):
        if n_agents:
            u = np.asarray(content_policy(t, theta, prev_u), dtype=np.float64).reshape(-1)
            if u.size != n_agents:
                raise ValueError(f"policy returned {u.size} opinions for {n_agents} agents")
            if ((u < params.u_min - 1e-12) | (u > params.u_max + 1e-12)).any():
                raise ValueError(
                    f"policy emitted opinion outside [{params.u_min}, {params.u_max}]")
        else:
            u = empty
        agent_path[t] = u
        prev_u = u
        for _ in range(n_sub):
            k1 = _drift_kernel(theta, src, dst, rate, n, rows, u, eps, omega, lam)
            k2 = _drift_kernel(theta + 0.5 * h * k1, src, dst, rate, n, rows, u,
                               eps, omega, lam)
            k3 = _drift_kernel(theta + 0.5 * h * k2, src, dst, rate, n, rows, u,
                               eps, omega, lam)
            k4 = _drift_kernel(theta + h * k3, src, dst, rate, n, rows, u,
                               eps, omega, lam)
            theta = theta + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        node_path[t + 1] = theta

    if n_agents:
        agent_path[T] = agent_path[T - 1]
    return Trajectory(times=np.arange(T + 1, dtype=np.float64),
                      node_opinions=node_path, agent_opinions=agent_path)
