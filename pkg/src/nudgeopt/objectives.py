"""Campaign objective functions over the final opinion vector, with gradients."""

from __future__ import annotations

from enum import Enum

import numpy as np

__all__ = ["ObjectiveKind", "evaluate", "gradient"]


class ObjectiveKind(Enum):
    """The three supported campaign objectives.

    Enum values double as the objective names accepted in config files.
    """

    MAX_MEAN = "max_mean"
    MAX_VAR = "max_var"
    MIN_VAR = "min_var"

    @classmethod
    def from_name(cls, name: str) -> "ObjectiveKind":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown objective {name!r}; expected one of: {valid}") from None


def _check(kind: ObjectiveKind, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 1 or theta.size == 0:
        raise ValueError("theta must be a nonempty 1-d vector")
    if kind is not ObjectiveKind.MAX_MEAN and theta.size < 2:
        raise ValueError("variance objectives need at least two opinions")
    return theta


def evaluate(kind: ObjectiveKind, theta) -> float:
    """Objective value: mean, sample variance, or negated sample variance."""
    theta = _check(kind, theta)
    if kind is ObjectiveKind.MAX_MEAN:
        return float(theta.mean())
    var = float(np.sum((theta - theta.mean()) ** 2) / (theta.size - 1))
    return var if kind is ObjectiveKind.MAX_VAR else -var


def gradient(kind: ObjectiveKind, theta) -> np.ndarray:
    """Per-node partial derivatives of the objective.

    For the variance objectives this is +/- 2*(theta_i - mu)/(n-1); the
    mu-dependence cross-term vanishes identically because the deviations
    sum to zero, so this is also the exact derivative.
    """
    theta = _check(kind, theta)
    n = theta.size
    if kind is ObjectiveKind.MAX_MEAN:
        return np.full(n, 1.0 / n)
    g = (2.0 / (n - 1)) * (theta - theta.mean())
    return g if kind is ObjectiveKind.MAX_VAR else -g
