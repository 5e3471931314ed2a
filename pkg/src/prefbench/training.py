"""Maximum-likelihood training of reward networks on comparison data.

The estimator maximizes the empirical mean log-likelihood of the observed
outcomes over the network class, here by mini-batch adaptive-moment
gradient steps with bias correction.  Model selection is early stopping on
a held-out split: the returned parameters are the best checkpoint by
evaluation negative log-likelihood, matching the view of the estimator as
a likelihood maximizer rather than a last-iterate.

Everything is deterministic given the config seed: initialization, batch
shuffling, and therefore the final checkpoint.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .comparison import ComparisonModel, log_density, sample_outcomes
from .data import ComparisonDataset
from .errors import ConfigurationError, DomainError, TrainingError
from .network import (
    MLPArchitecture,
    MLPParameters,
    forward_batch,
    init_params,
    nll_and_gradient,
)
from .rewards import GroundTruthReward, reward_matrix

__all__ = [
    "TrainingConfig",
    "TrainingHistory",
    "train_mle",
    "empirical_loglik",
    "excess_risk_estimate",
]


@dataclass(frozen=True)
class TrainingConfig:
    batch_size: int = 256
    max_epochs: int = 200
    learning_rate: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    epsilon: float = 1e-8
    early_stop_patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.max_epochs < 1 or self.learning_rate <= 0:
            raise ConfigurationError("batch size, epochs, and learning rate must be positive")
        if not 1 <= self.early_stop_patience <= self.max_epochs:
            raise ConfigurationError("patience must be between 1 and max_epochs")


@dataclass
class TrainingHistory:
    train_nll: list[float] = field(default_factory=list)
    eval_nll: list[float] = field(default_factory=list)
    best_epoch: int = 0
    wall_time_seconds: float = 0.0

    @property
    def epochs_run(self) -> int:
        return len(self.eval_nll)


class _SampleBatch:
    """Array view over a slice of a dataset, cheap to hand to the gradient."""

    __slots__ = ("states", "a1", "a0", "y")

    def __init__(self, ds: ComparisonDataset, idx: np.ndarray):
        self.states = ds.states[idx]
        self.a1 = ds.a1[idx]
        self.a0 = ds.a0[idx]
        self.y = ds.y[idx]


class _Adam:
    def __init__(self, params: MLPParameters, cfg: TrainingConfig):
        self.cfg = cfg
        self.step_count = 0
        self.m_w = [np.zeros_like(w) for w in params.weights]
        self.v_w = [np.zeros_like(w) for w in params.weights]
        self.m_b = [np.zeros_like(b) for b in params.biases]
        self.v_b = [np.zeros_like(b) for b in params.biases]

    def step(self, params: MLPParameters, grads) -> None:
        b1, b2 = self.cfg.betas
        eps, lr = self.cfg.epsilon, self.cfg.learning_rate
        self.step_count += 1
        correction1 = 1.0 - b1**self.step_count
        correction2 = 1.0 - b2**self.step_count
        for m, v, p, g in (
            *zip(self.m_w, self.v_w, params.weights, grads.weights),
            *zip(self.m_b, self.v_b, params.biases, grads.biases),
        ):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)


def empirical_loglik(params: MLPParameters, ds: ComparisonDataset, model: ComparisonModel) -> float:
    """Mean log-likelihood over a dataset (higher is better)."""
    if len(ds) == 0:
        raise DomainError("dataset must be nonempty")
    scores = forward_batch(params, ds.states)
    idx = np.arange(len(ds))
    u = scores[idx, ds.a1] - scores[idx, ds.a0]
    return float(np.mean(log_density(model, ds.y, u)))


def train_mle(
    train: ComparisonDataset,
    eval_ds: ComparisonDataset,
    arch: MLPArchitecture,
    model: ComparisonModel,
    cfg: TrainingConfig,
) -> tuple[MLPParameters, TrainingHistory]:
    """Fit the network by MLE; returns the best-on-eval checkpoint and history.

    Stops once the eval negative log-likelihood has not improved for
    `early_stop_patience` consecutive epochs, or at `max_epochs`.
    """
    if train.d != eval_ds.d or train.d != arch.input_dim:
        raise ConfigurationError("train/eval dimension must match the architecture input")
    if train.model_kind != eval_ds.model_kind:
        raise ConfigurationError("train and eval splits must come from the same comparison model")
    if cfg.batch_size > len(train):
        raise ConfigurationError("batch size exceeds the training-set size")

    start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    params = init_params(arch, rng)
    optimizer = _Adam(params, cfg)
    history = TrainingHistory()
    best_eval = np.inf
    best_params = params.copy()
    stall = 0

    for epoch in range(cfg.max_epochs):
        order = rng.permutation(len(train))
        batch_losses = []
        for lo in range(0, len(train), cfg.batch_size):
            batch = _SampleBatch(train, order[lo : lo + cfg.batch_size])
            try:
                loss, grads = nll_and_gradient(params, batch, model)
            except DomainError as exc:  # exploded parameters poison the forward pass
                raise TrainingError(f"training diverged: {exc}", epoch=epoch) from exc
            if not np.isfinite(loss):
                raise TrainingError("non-finite training loss", epoch=epoch)
            optimizer.step(params, grads)
            batch_losses.append(loss)
        eval_nll = -empirical_loglik(params, eval_ds, model)
        if not np.isfinite(eval_nll):
            raise TrainingError("non-finite evaluation loss", epoch=epoch)
        history.train_nll.append(float(np.mean(batch_losses)))
        history.eval_nll.append(eval_nll)
        if eval_nll < best_eval:
            best_eval = eval_nll
            best_params = params.copy()
            history.best_epoch = epoch
            stall = 0
        else:
            stall += 1
            if stall >= cfg.early_stop_patience:
                break
    history.wall_time_seconds = time.perf_counter() - start
    return best_params, history


def excess_risk_estimate(
    params: MLPParameters,
    gt: GroundTruthReward,
    model: ComparisonModel,
    mc_states: np.ndarray,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo estimate of the population log-likelihood shortfall.

    Per state, an outcome is drawn under the true score difference u*, and
    the estimate averages log g(y, u*) - log g(y, u_hat); the expectation
    is nonnegative, achieved at zero by the truth itself.
    """
    states = np.asarray(mc_states, dtype=float)
    if states.ndim != 2 or states.shape[0] == 0:
        raise DomainError("mc_states must be a nonempty (n, d) array")
    truth = reward_matrix(gt, states)
    u_star = truth[:, 1] - truth[:, 0]
    y = sample_outcomes(model, u_star, rng)
    est = forward_batch(params, states)
    u_hat = est[:, 1] - est[:, 0]
    gap = np.asarray(log_density(model, y, u_star)) - np.asarray(log_density(model, y, u_hat))
    return float(np.mean(gap))
