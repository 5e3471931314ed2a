"""Synthetic ground-truth rewards, greedy policies, and regret evaluation.

The truth follows the two-action construction used throughout the
benchmark: a state s in [0,1]^d is lifted through the feature map
phi(s) = (sin s_1, ..., sin s_d), projected onto a weight vector w, and
pushed through a scalar shape psi:

    r(s, a1) = outer * psi(inner * phi(s)^T w),   r(s, a0) = -r(s, a1),

so the identification constraint sum_a r(s, a) = 0 holds by construction.
Three shapes are provided: a plain sinusoid (psi = sin), a degree-5
Hermite-Gaussian, and the composite sinusoid sin(x) + sin(x^2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "RewardFamily",
    "GroundTruthReward",
    "PolicyDecision",
    "feature_map",
    "true_reward",
    "reward_matrix",
    "reward_callable",
    "greedy_policy",
    "regret_mc",
    "disagreement_rate",
    "random_policy_regret",
    "l2_error_sq",
    "c_rstar_value",
    "sample_states",
]

_HERMITE_NORM = 1.0 / (math.sqrt(15.0) * math.pi**0.25)


class RewardFamily(enum.Enum):
    SINUSOIDAL = "sinusoidal"
    HERMITE_GAUSSIAN = "hermite-gaussian"
    COMPOSITE_SINUSOID = "composite-sinusoid"


def _psi(family: RewardFamily, x: np.ndarray) -> np.ndarray:
    if family is RewardFamily.SINUSOIDAL:
        return np.sin(x)
    if family is RewardFamily.HERMITE_GAUSSIAN:
        return _HERMITE_NORM * (4.0 * x**5 - 20.0 * x**3 + 15.0 * x) * np.exp(-0.5 * x * x)
    if family is RewardFamily.COMPOSITE_SINUSOID:
        return np.sin(x) + np.sin(x * x)
    raise ConfigurationError(f"unknown reward family {family!r}")


@dataclass(frozen=True)
class GroundTruthReward:
    """Two-action synthetic truth r(s, 1) = outer * psi(inner * phi(s)^T w)."""

    family: RewardFamily
    d: int
    w_star: np.ndarray
    scale_inner: float = 4.0
    scale_outer: float = 2.0
    action_count: int = 2

    def __post_init__(self):
        w = np.asarray(self.w_star, dtype=float)
        object.__setattr__(self, "w_star", w)
        if self.d < 1 or w.shape != (self.d,):
            raise ConfigurationError(f"w_star must have shape ({self.d},), got {w.shape}")
        if self.action_count != 2:
            raise ConfigurationError("ground-truth generation supports exactly two actions")
        if not isinstance(self.family, RewardFamily):
            raise ConfigurationError(f"unknown reward family {self.family!r}")

    @classmethod
    def sample(
        cls,
        family: RewardFamily,
        d: int,
        rng: np.random.Generator,
        scale_inner: float = 4.0,
        scale_outer: float = 2.0,
    ) -> "GroundTruthReward":
        """Draw w from a standard normal using the caller's generator."""
        return cls(family=family, d=d, w_star=rng.standard_normal(d),
                   scale_inner=scale_inner, scale_outer=scale_outer)


@dataclass(frozen=True)
class PolicyDecision:
    action: int
    value: float
    runner_up_gap: float


def feature_map(s) -> np.ndarray:
    """Componentwise sine of the state vector (or a batch of them)."""
    s_arr = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(s_arr)):
        raise DomainError("state components must be finite")
    return np.sin(s_arr)


def _preferred_reward(gt: GroundTruthReward, states: np.ndarray) -> np.ndarray:
    inner = gt.scale_inner * feature_map(states) @ gt.w_star
    return gt.scale_outer * _psi(gt.family, inner)


def true_reward(gt: GroundTruthReward, s, a: int) -> float:
    """r(s, a) for a single state; action 0 is the negation of action 1."""
    if a not in (0, 1):
        raise DomainError(f"action must be 0 or 1, got {a}")
    r1 = float(_preferred_reward(gt, np.asarray(s, dtype=float).reshape(1, -1))[0])
    return r1 if a == 1 else -r1


def reward_matrix(gt: GroundTruthReward, states: np.ndarray) -> np.ndarray:
    """True rewards for a batch of states; shape (n, 2), column a is r(s, a)."""
    r1 = _preferred_reward(gt, np.asarray(states, dtype=float))
    return np.stack([-r1, r1], axis=1)


def reward_callable(gt: GroundTruthReward):
    """The truth as a batch reward function (n, d) -> (n, 2)."""
    return lambda states: reward_matrix(gt, states)


def greedy_policy(reward, s) -> PolicyDecision:
    """Argmax action of `reward(s)`; ties break to the lowest action index."""
    values = np.asarray(reward(s), dtype=float).ravel()
    if values.size < 2:
        raise DomainError("reward must be defined on at least two actions")
    action = int(np.argmax(values))
    top_two = np.partition(values, -2)[-2:]
    return PolicyDecision(action=action, value=float(values[action]),
                          runner_up_gap=float(top_two[1] - top_two[0]))


def _check_states(states) -> np.ndarray:
    arr = np.asarray(states, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DomainError("states must be a nonempty (n, d) array")
    return arr


def _greedy_actions(rewards: np.ndarray) -> np.ndarray:
    return np.argmax(rewards, axis=1)  # argmax takes the lowest index on ties


def regret_mc(r_hat, gt: GroundTruthReward, states) -> float:
    """Monte Carlo regret of the greedy policy induced by the estimate.

    `r_hat` maps an (n, d) state matrix to an (n, |A|) reward matrix.
    """
    arr = _check_states(states)
    truth = reward_matrix(gt, arr)
    est = np.asarray(r_hat(arr), dtype=float)
    idx = np.arange(arr.shape[0])
    shortfall = truth[idx, _greedy_actions(truth)] - truth[idx, _greedy_actions(est)]
    return float(np.mean(shortfall))


def disagreement_rate(r_hat, gt: GroundTruthReward, states) -> float:
    """Fraction of states where the estimated and optimal greedy actions differ."""
    arr = _check_states(states)
    truth = reward_matrix(gt, arr)
    est = np.asarray(r_hat(arr), dtype=float)
    return float(np.mean(_greedy_actions(truth) != _greedy_actions(est)))


def random_policy_regret(gt: GroundTruthReward, states) -> float:
    """Exact expected regret of the uniform-random policy on the given states.

    For two actions the expectation over the coin flip is |r(s, 1)|, since a
    wrong pick loses the full 2|r(s, 1)| gap half the time.
    """
    arr = _check_states(states)
    truth = reward_matrix(gt, arr)
    best = np.max(truth, axis=1)
    return float(np.mean(best - np.mean(truth, axis=1)))


def l2_error_sq(r_hat, gt: GroundTruthReward, states) -> float:
    """Monte Carlo estimate of the squared L2(S, l2) distance to the truth."""
    arr = _check_states(states)
    diff = np.asarray(r_hat(arr), dtype=float) - reward_matrix(gt, arr)
    return float(np.mean(np.sum(diff * diff, axis=1)))


def c_rstar_value(gt: GroundTruthReward, n_states: int = 10**6, seed: int = 0) -> float:
    """Reward-range bound c = sup |r(s, a)|.

    Closed form for the sinusoid (|psi| <= 1, so outer * 1); otherwise the
    empirical max over `n_states` uniform states.
    """
    if gt.family is RewardFamily.SINUSOIDAL:
        return abs(gt.scale_outer)
    rng = np.random.default_rng(seed)
    top = 0.0
    chunk = 10**5
    remaining = int(n_states)
    while remaining > 0:
        take = min(chunk, remaining)
        states = rng.uniform(0.0, 1.0, size=(take, gt.d))
        top = max(top, float(np.max(np.abs(_preferred_reward(gt, states)))))
        remaining -= take
    return top


def sample_states(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. states from the benchmark state law, Uniform[0,1]^d."""
    if n < 1:
        raise DomainError("need at least one state")
    return rng.uniform(0.0, 1.0, size=(n, d))
