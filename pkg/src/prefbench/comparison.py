"""Pairwise comparison likelihood models.

A comparison model assigns a probability g(y, u) to the outcome y of a
pairwise comparison whose underlying reward difference is
u = r(s, a1) - r(s, a0).  Four concrete laws are provided:

* Bradley-Terry   g(+1, u) = e^u / (1 + e^u)                (binary)
* Thurstonian     g(+1, u) = Phi(u), the standard normal CDF (binary)
* Rao-Kupper      P(+1) = e^u/(e^u + th), P(-1) = 1/(1 + th e^u),
                  ties take the remaining mass; th > 1       (ternary)
* Davidson        P(+1) : P(-1) : P(0) = e^{u/2} : e^{-u/2} : nu,
                  nu > 0                                     (ternary)

All four satisfy: normalization, the symmetry g(y, u) = g(-y, -u),
monotone preference (g(-1, u) decreasing in u), boundedness, and strict
log-concavity in u.  Besides the log-density, its first two partial
derivatives in u, the winning probability and an outcome sampler, the
module computes the three curvature/Lipschitz constants

    kappa0 = sup |log g|,  kappa1 = sup |d log g / du|,
    kappa2 = inf |d^2 log g / du^2|

over outcomes and |u| <= c, where c bounds the true reward range.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_ndtr, ndtr

from .errors import DomainError

__all__ = [
    "ModelKind",
    "OutcomeSpace",
    "ComparisonModel",
    "KappaConstants",
    "log_density",
    "win_probability",
    "tie_probability",
    "dlog_density_du",
    "d2log_density_du2",
    "sample_outcome",
    "sample_outcomes",
    "kappa_constants",
]

# Logistic saturation: for |u| >= this, sigma(u) is 1 (or 0) up to an ulp,
# so binary sampling short-circuits to the sure outcome.
SATURATION_U = 36.0

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_KAPPA_GRID_STEP = 1e-4


class ModelKind(enum.Enum):
    BT = "bt"
    THURSTONIAN = "thurstonian"
    RAO_KUPPER = "rao-kupper"
    DAVIDSON = "davidson"


class OutcomeSpace(enum.Enum):
    BINARY = (-1, 1)
    TERNARY = (-1, 0, 1)


@dataclass(frozen=True)
class ComparisonModel:
    """A parametrized comparison law; `tie_param` is ignored for binary kinds."""

    kind: ModelKind
    tie_param: float = 1.0

    def __post_init__(self):
        if self.kind is ModelKind.RAO_KUPPER and not self.tie_param > 1.0:
            raise DomainError("Rao-Kupper tie parameter must exceed 1")
        if self.kind is ModelKind.DAVIDSON and not self.tie_param > 0.0:
            raise DomainError("Davidson tie parameter must be positive")

    @property
    def outcome_space(self) -> OutcomeSpace:
        if self.kind in (ModelKind.BT, ModelKind.THURSTONIAN):
            return OutcomeSpace.BINARY
        return OutcomeSpace.TERNARY

    @property
    def outcomes(self) -> tuple[int, ...]:
        return self.outcome_space.value

    @property
    def is_binary(self) -> bool:
        return self.outcome_space is OutcomeSpace.BINARY


@dataclass(frozen=True)
class KappaConstants:
    """Lipschitz / strong-log-concavity constants over |u| <= c_rstar."""

    kappa0: float
    kappa1: float
    kappa2: float
    c_rstar: float

    def __post_init__(self):
        if self.kappa0 < 0 or self.kappa1 < 0 or not self.kappa2 > 0:
            raise DomainError("kappa constants must satisfy k0,k1 >= 0 and k2 > 0")


def _validate_u(u) -> np.ndarray:
    u_arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u_arr)):
        raise DomainError("reward difference u must be finite")
    return u_arr


def _validate_outcomes(model: ComparisonModel, y) -> np.ndarray:
    y_arr = np.asarray(y)
    if not np.isin(y_arr, model.outcomes).all():
        raise DomainError(
            f"outcome {y!r} not in outcome space {model.outcomes} of {model.kind.value}"
        )
    return y_arr.astype(np.int64)


def _maybe_scalar(value: np.ndarray, *inputs) -> float | np.ndarray:
    if all(np.isscalar(x) or np.ndim(x) == 0 for x in inputs):
        return float(value)
    return value


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    # log sigma(x) = -log(1 + e^{-x}), computed without overflow
    return -np.logaddexp(0.0, -x)


def _normal_hazard(x: np.ndarray) -> np.ndarray:
    # phi(x) / Phi(x), stable for arbitrarily negative x
    return np.exp(-0.5 * x * x - _LOG_SQRT_2PI - log_ndtr(x))


def log_density(model: ComparisonModel, y, u):
    """log g(y, u); `y` and `u` may be scalars or broadcastable arrays."""
    y_arr = _validate_outcomes(model, y)
    u_arr = _validate_u(u)
    y_b, u_b = np.broadcast_arrays(y_arr, u_arr)

    if model.kind is ModelKind.BT:
        out = _log_sigmoid(y_b * u_b)
    elif model.kind is ModelKind.THURSTONIAN:
        out = log_ndtr(y_b * u_b)
    elif model.kind is ModelKind.RAO_KUPPER:
        lam = math.log(model.tie_param)
        out = np.where(
            y_b == 1,
            _log_sigmoid(u_b - lam),
            np.where(
                y_b == -1,
                _log_sigmoid(-(u_b + lam)),
                math.log(model.tie_param**2 - 1.0)
                + u_b
                - np.logaddexp(u_b, lam)
                - np.logaddexp(0.0, u_b + lam),
            ),
        )
    else:  # Davidson
        lam = math.log(model.tie_param)
        half = 0.5 * u_b
        log_z = np.logaddexp(np.logaddexp(half, -half), lam)
        out = np.where(y_b == 1, half, np.where(y_b == -1, -half, lam)) - log_z
    return _maybe_scalar(out, y, u)


def win_probability(model: ComparisonModel, u):
    """P(y > 0 | reward difference u)."""
    u_arr = _validate_u(u)
    if model.kind is ModelKind.BT:
        out = expit(u_arr)
    elif model.kind is ModelKind.THURSTONIAN:
        out = ndtr(u_arr)
    elif model.kind is ModelKind.RAO_KUPPER:
        out = expit(u_arr - math.log(model.tie_param))
    else:
        out = np.exp(log_density(model, np.ones_like(u_arr, dtype=int), u_arr))
    return _maybe_scalar(out, u)


def tie_probability(model: ComparisonModel, u):
    """g(0, u) for ternary models; exactly 0 for binary models."""
    u_arr = _validate_u(u)
    if model.is_binary:
        return _maybe_scalar(np.zeros_like(u_arr), u)
    out = np.exp(log_density(model, np.zeros_like(u_arr, dtype=int), u_arr))
    return _maybe_scalar(out, u)


def dlog_density_du(model: ComparisonModel, y, u):
    """First partial derivative of log g(y, u) in u."""
    y_arr = _validate_outcomes(model, y)
    u_arr = _validate_u(u)
    y_b, u_b = np.broadcast_arrays(y_arr, u_arr)

    if model.kind is ModelKind.BT:
        out = y_b * expit(-y_b * u_b)
    elif model.kind is ModelKind.THURSTONIAN:
        out = y_b * _normal_hazard(y_b * u_b)
    elif model.kind is ModelKind.RAO_KUPPER:
        lam = math.log(model.tie_param)
        out = np.where(
            y_b == 1,
            expit(lam - u_b),
            np.where(
                y_b == -1,
                -expit(u_b + lam),
                expit(lam - u_b) - expit(u_b + lam),
            ),
        )
    else:  # Davidson
        lam = math.log(model.tie_param)
        half = 0.5 * u_b
        log_z = np.logaddexp(np.logaddexp(half, -half), lam)
        dlog_z = 0.5 * (np.exp(half - log_z) - np.exp(-half - log_z))
        out = np.where(y_b == 1, 0.5, np.where(y_b == -1, -0.5, 0.0)) - dlog_z
    return _maybe_scalar(out, y, u)


def d2log_density_du2(model: ComparisonModel, y, u):
    """Second partial derivative of log g(y, u) in u; strictly negative."""
    y_arr = _validate_outcomes(model, y)
    u_arr = _validate_u(u)
    y_b, u_b = np.broadcast_arrays(y_arr, u_arr)

    if model.kind is ModelKind.BT:
        out = -expit(u_b) * expit(-u_b) * np.ones_like(y_b, dtype=float)
    elif model.kind is ModelKind.THURSTONIAN:
        x = y_b * u_b
        h = _normal_hazard(x)
        out = -h * (x + h)
    elif model.kind is ModelKind.RAO_KUPPER:
        lam = math.log(model.tie_param)
        curv_win = expit(u_b - lam) * expit(lam - u_b)
        curv_lose = expit(u_b + lam) * expit(-(u_b + lam))
        out = np.where(
            y_b == 1, -curv_win, np.where(y_b == -1, -curv_lose, -curv_win - curv_lose)
        )
    else:  # Davidson: curvature of log Z is shared by all outcomes
        lam = math.log(model.tie_param)
        half = 0.5 * u_b
        log_z = np.logaddexp(np.logaddexp(half, -half), lam)
        p_plus = np.exp(half - log_z)
        p_minus = np.exp(-half - log_z)
        out = -0.25 * (p_plus + p_minus - (p_plus - p_minus) ** 2) * np.ones_like(y_b, dtype=float)
    return _maybe_scalar(out, y, u)


def sample_outcomes(model: ComparisonModel, u, rng: np.random.Generator) -> np.ndarray:
    """Draw one outcome per entry of `u`, consuming one uniform each."""
    u_arr = np.atleast_1d(_validate_u(u))
    x = rng.random(u_arr.shape)
    if model.is_binary:
        p = win_probability(model, u_arr)
        y = np.where(x < p, 1, -1)
        # saturated differences are decided outcomes regardless of the draw
        y = np.where(u_arr >= SATURATION_U, 1, y)
        y = np.where(u_arr <= -SATURATION_U, -1, y)
    else:
        p_win = win_probability(model, u_arr)
        p_tie = tie_probability(model, u_arr)
        y = np.where(x < p_win, 1, np.where(x < p_win + p_tie, 0, -1))
    return y.astype(np.int64)


def sample_outcome(model: ComparisonModel, u: float, rng: np.random.Generator) -> int:
    """Draw a single outcome distributed as g(., u)."""
    return int(sample_outcomes(model, np.asarray([u], dtype=float), rng)[0])


def _kappa_closed_form(model: ComparisonModel, c: float) -> tuple[float, float, float]:
    if model.kind is ModelKind.BT:
        k0 = float(np.logaddexp(0.0, c))  # -log sigma(-c)
        k1 = float(expit(c))
        k2 = float(expit(c) * expit(-c))
    else:  # Thurstonian: |d2 log Phi| decreases in u, extrema sit at +-c
        k0 = float(-log_ndtr(-c))
        k1 = float(_normal_hazard(-c))
        h = float(_normal_hazard(c))
        k2 = h * (c + h)
    return k0, k1, k2


def _kappa_grid(model: ComparisonModel, c: float) -> tuple[float, float, float]:
    n = int(math.ceil(2.0 * c / _KAPPA_GRID_STEP)) + 1
    u = np.linspace(-c, c, max(n, 2))
    k0 = 0.0
    k1 = 0.0
    k2 = math.inf
    for y in model.outcomes:
        y_arr = np.full_like(u, y, dtype=int)
        k0 = max(k0, float(np.max(np.abs(log_density(model, y_arr, u)))))
        k1 = max(k1, float(np.max(np.abs(dlog_density_du(model, y_arr, u)))))
        k2 = min(k2, float(np.min(np.abs(d2log_density_du2(model, y_arr, u)))))
    return k0, k1, k2


def kappa_constants(model: ComparisonModel, c_rstar: float) -> KappaConstants:
    """Extrema of |log g|, |dlog g|, |d2 log g| over outcomes and |u| <= c_rstar.

    Closed form for the binary models; dense grid search (step 1e-4,
    endpoints included) for the ternary ones, whose extrema locations have
    no convenient closed form.
    """
    if not c_rstar > 0:
        raise DomainError("c_rstar must be positive")
    if model.is_binary:
        k0, k1, k2 = _kappa_closed_form(model, float(c_rstar))
    else:
        k0, k1, k2 = _kappa_grid(model, float(c_rstar))
    return KappaConstants(kappa0=k0, kappa1=k1, kappa2=k2, c_rstar=float(c_rstar))
