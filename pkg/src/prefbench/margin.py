"""Margin-condition diagnostics and theoretical rate expressions.

The margin condition asks how often the optimal action's winning
probability sits within t of the coin-flip value 1/2:

    F_prob(t) = P_S( P(y > 0 | s, best, other) - 1/2 <= t ),

with the high-quality-data regime characterized by F_prob(t) <= c * t^(a/(1-a))
for an exponent a in (0, 1).  A reward-gap variant applies the same CDF
construction to the raw gap r(s, best) - r(s, other).  The exponent is
recovered empirically from the log-log slope s of the CDF: a = s / (1 + s).

Also housed here: the pointwise inequalities that drive the probability-gap
to reward-gap transfer for the logistic and probit laws, and evaluators for
the regret-rate expressions (exponent beta / ((d + 2 beta)(3 - 2 alpha)) and
the full bound, up to its universal constant).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .comparison import ComparisonModel, KappaConstants, ModelKind, win_probability
from .errors import DiagnosticError, DomainError
from .rewards import reward_matrix

__all__ = [
    "MarginKind",
    "MarginCurve",
    "MarginFit",
    "GapInequalityReport",
    "RegretBoundTerms",
    "margin_cdf",
    "fit_margin_exponent",
    "verify_gap_inequalities",
    "theoretical_rate",
    "theoretical_regret_bound_terms",
    "regret_vs_error_exponent",
]

DEFAULT_FIT_RANGE = (0.01, 0.2)


class MarginKind(enum.Enum):
    PROBABILITY_GAP = "probability-gap"
    REWARD_GAP = "reward-gap"


@dataclass(frozen=True)
class MarginCurve:
    t_grid: np.ndarray
    cdf_values: np.ndarray
    kind: MarginKind
    n_states: int

    def __post_init__(self):
        object.__setattr__(self, "t_grid", np.asarray(self.t_grid, dtype=float))
        object.__setattr__(self, "cdf_values", np.asarray(self.cdf_values, dtype=float))
        if self.t_grid.size != self.cdf_values.size:
            raise DomainError("t grid and CDF values must have equal length")
        if self.t_grid.size and np.any(np.diff(self.t_grid) <= 0):
            raise DomainError("t grid must be strictly increasing")
        values = self.cdf_values
        if np.any(values < 0) or np.any(values > 1) or np.any(np.diff(values) < -1e-12):
            raise DomainError("CDF values must be nondecreasing within [0, 1]")


@dataclass(frozen=True)
class MarginFit:
    alpha_hat: float
    c_hat: float
    fit_range: tuple[float, float]
    r_squared: float


@dataclass(frozen=True)
class GapInequalityReport:
    model_kind: ModelKind
    max_violation: float
    worst_t: float

    @property
    def holds(self) -> bool:
        return self.max_violation <= 0.0


@dataclass(frozen=True)
class RegretBoundTerms:
    """Regret bound pieces with the universal constant taken as 1."""

    rate_exponent: float
    architecture_term: float
    confidence_term: float

    @property
    def total(self) -> float:
        return self.architecture_term + self.confidence_term


def margin_cdf(
    gt,
    model: ComparisonModel,
    states: np.ndarray,
    t_grid,
    kind: MarginKind,
) -> MarginCurve:
    """Empirical margin CDF over the supplied state sample.

    Probability-gap kind: per state, the winning probability of the optimal
    action over the alternative, minus 1/2.  Reward-gap kind: the raw
    optimal-vs-runner-up reward gap.  `gt` is a GroundTruthReward or any
    batch reward function (n, d) -> (n, |A|).
    """
    arr = np.asarray(states, dtype=float)
    grid = np.asarray(t_grid, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DomainError("states must be a nonempty (n, d) array")
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise DomainError("t grid must be nonempty and strictly increasing")
    # `gt` may also be any batch reward function (n, d) -> (n, |A|)
    truth = np.asarray(gt(arr)) if callable(gt) else reward_matrix(gt, arr)
    top_two = np.partition(truth, truth.shape[1] - 2, axis=1)[:, -2:]
    gaps = top_two[:, 1] - top_two[:, 0]  # optimal minus best alternative
    if kind is MarginKind.PROBABILITY_GAP:
        values = np.asarray(win_probability(model, gaps)) - 0.5
    else:
        values = gaps
    cdf = np.mean(values[None, :] <= grid[:, None], axis=1)
    return MarginCurve(t_grid=grid, cdf_values=cdf, kind=kind, n_states=arr.shape[0])


def fit_margin_exponent(
    curve: MarginCurve, fit_range: tuple[float, float] = DEFAULT_FIT_RANGE
) -> MarginFit:
    """Recover the margin exponent from the log-log slope of a margin CDF.

    Fits log F = log c + s log t over grid points inside `fit_range` with
    0 < F < 1 (saturated points carry no slope information) and maps the
    slope to alpha = s / (1 + s).  The default range avoids the saturation
    plateau near t = 1/2 on probability-gap curves.
    """
    t_lo, t_hi = fit_range
    usable = (
        (curve.t_grid >= t_lo)
        & (curve.t_grid <= t_hi)
        & (curve.cdf_values > 0.0)
        & (curve.cdf_values < 1.0)
    )
    if np.count_nonzero(usable) < 5:
        raise DiagnosticError(
            f"need at least 5 grid points with 0 < cdf < 1 inside {fit_range}", curve=curve
        )
    log_t = np.log(curve.t_grid[usable])
    log_f = np.log(curve.cdf_values[usable])
    t_centered = log_t - log_t.mean()
    slope = float(np.dot(t_centered, log_f - log_f.mean()) / np.dot(t_centered, t_centered))
    intercept = float(log_f.mean() - slope * log_t.mean())
    if slope <= 0.0:
        raise DiagnosticError(f"non-increasing margin curve (slope {slope:.3g})", curve=curve)
    residual = log_f - (intercept + slope * log_t)
    total = log_f - log_f.mean()
    ss_tot = float(np.dot(total, total))
    r_squared = 1.0 - float(np.dot(residual, residual)) / ss_tot if ss_tot > 0 else 1.0
    return MarginFit(
        alpha_hat=slope / (1.0 + slope),
        c_hat=math.exp(intercept),
        fit_range=(float(t_lo), float(t_hi)),
        r_squared=r_squared,
    )


def verify_gap_inequalities(model: ComparisonModel, t_grid) -> GapInequalityReport:
    """Check the pointwise probability-to-reward gap inequalities on (0, 1).

    Logistic law:  t/4          >= (e^t - 1) / (2 (e^t + 1))
    Probit law:    t/sqrt(2 pi) >= exp(-t^2/2)/sqrt(2 pi) - 1/2

    Both are exact statements for t in (0, 1); violations should be zero.
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0.0) or np.any(grid >= 1.0):
        raise DomainError("t grid must lie strictly inside (0, 1)")
    if model.kind is ModelKind.BT:
        lhs = grid / 4.0
        rhs = 0.5 * np.tanh(grid / 2.0)
    elif model.kind is ModelKind.THURSTONIAN:
        lhs = grid / math.sqrt(2.0 * math.pi)
        rhs = np.exp(-0.5 * grid * grid) / math.sqrt(2.0 * math.pi) - 0.5
    else:
        raise DomainError("gap inequalities are stated for the binary models only")
    violation = rhs - lhs
    worst = int(np.argmax(violation))
    return GapInequalityReport(
        model_kind=model.kind,
        max_violation=float(violation[worst]),
        worst_t=float(grid[worst]),
    )


def _check_rate_args(alpha: float, beta: float, d: int) -> None:
    if not 0.0 <= alpha < 1.0:
        raise DomainError("alpha must lie in [0, 1)")
    if beta <= 0.0 or d < 1:
        raise DomainError("beta must be positive and d at least 1")


def theoretical_rate(alpha: float, beta: float, d: int, n: int | None = None) -> float:
    """Rate exponent e with regret decaying as N^-e: beta/((d+2 beta)(3-2 alpha)).

    alpha = 0 is the no-margin regime; alpha -> 1 approaches the noiseless
    exponent beta/(d + 2 beta).  `n` is accepted for interface symmetry
    with the bound evaluator and only validated.
    """
    _check_rate_args(alpha, beta, d)
    if n is not None and n < 1:
        raise DomainError("N must be at least 1")
    return beta / ((d + 2.0 * beta) * (3.0 - 2.0 * alpha))


def theoretical_regret_bound_terms(
    kappas: KappaConstants,
    lambda2: float,
    alpha: float,
    beta: float,
    d: int,
    n: int,
    a_count: int,
    delta: float,
) -> RegretBoundTerms:
    """Evaluate the regret bound expression with its universal constant set to 1.

    Only exponent/slope comparisons against empirical sweeps are meaningful;
    absolute levels are not, since the true constant is unknown.
    """
    _check_rate_args(alpha, beta, d)
    if n < 1 or a_count < 2 or not 0.0 < delta < 1.0 or lambda2 <= 0.0:
        raise DomainError("need N >= 1, |A| >= 2, delta in (0, 1), lambda2 > 0")
    k = math.floor(beta) + 1
    inv_rate = 1.0 / (3.0 - 2.0 * alpha)
    log_n_sq = math.log(n) ** 2 if n > 1 else 1.0
    arch_factor = (
        kappas.kappa0 * math.sqrt(a_count) * k**4 * d**k * log_n_sq / (kappas.kappa2 * lambda2)
    )
    exponent = theoretical_rate(alpha, beta, d, n)
    arch_term = arch_factor**inv_rate * float(n) ** (-exponent)
    conf_term = (
        kappas.kappa0**2 * math.log(1.0 / delta) / (kappas.kappa2**2 * lambda2**2 * n)
    ) ** (0.5 * inv_rate)
    return RegretBoundTerms(
        rate_exponent=exponent, architecture_term=arch_term, confidence_term=conf_term
    )


def regret_vs_error_exponent(pairs) -> float:
    """Log-log slope of regret against squared L2 error across estimators.

    The theory gives regret <= c * (error^2)^(1/(3-2 alpha)), a bound rather
    than an equality, so an empirical slope above 1/(3-2 alpha) is legitimate.
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 5:
        raise DomainError("need at least 5 (l2_error_sq, regret) pairs")
    if np.any(arr <= 0.0):
        raise DomainError("all entries must be positive for a log-log fit")
    log_err = np.log(arr[:, 0])
    log_reg = np.log(arr[:, 1])
    centered = log_err - log_err.mean()
    return float(np.dot(centered, log_reg - log_reg.mean()) / np.dot(centered, centered))
