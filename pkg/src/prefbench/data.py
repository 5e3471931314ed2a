"""Synthetic comparison datasets: generation, label-noise corruption, CSV I/O.

A dataset is a collection of records (s, a1, a0, y) together with the
conditional winning probability p_win = P(y > 0 | s, a1, a0) in effect
when y was drawn; p_win is retained for auditing and for the
conditional-probability histograms.  For the two-action truth the compared
pair is always (a1, a0) = (1, 0).

Corruption replaces the winning probability of floor(m*N) uniformly chosen
records by a fresh Uniform[0.4, 0.6] draw and re-samples their labels, the
mechanism behind the noise-level sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .comparison import ComparisonModel, ModelKind, sample_outcomes, win_probability
from .errors import DomainError, StateError
from .rewards import GroundTruthReward, reward_matrix, sample_states

__all__ = [
    "ComparisonSample",
    "ComparisonDataset",
    "generate_dataset",
    "corrupt_dataset",
    "dataset_win_probabilities",
    "save_dataset_csv",
    "load_dataset_csv",
]

CORRUPTION_LOW = 0.4
CORRUPTION_HIGH = 0.6


@dataclass(frozen=True)
class ComparisonSample:
    """One comparison record; p_win is the generating conditional probability."""

    s: np.ndarray
    a1: int
    a0: int
    y: int
    p_win: float

    def __post_init__(self):
        if self.a1 == self.a0:
            raise DomainError("compared actions must differ")
        if not 0.0 < self.p_win < 1.0:
            raise DomainError("p_win must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class ComparisonDataset:
    """Column-oriented comparison data plus provenance metadata.

    `states` is (N, d); `a1`, `a0`, `y` are integer vectors; `p_win` holds
    the generating probabilities.  `corruption_level` is the exact fraction
    m applied (0 for clean data); `corruption_seed` records the stream that
    applied it.
    """

    states: np.ndarray
    a1: np.ndarray
    a0: np.ndarray
    y: np.ndarray
    p_win: np.ndarray
    d: int
    action_count: int
    seed: int
    model_kind: ModelKind
    corruption_level: float = 0.0
    corruption_seed: int | None = None

    def __post_init__(self):
        n = self.states.shape[0]
        if self.states.shape != (n, self.d):
            raise DomainError(f"states must be (N, {self.d})")
        for name in ("a1", "a0", "y", "p_win"):
            if getattr(self, name).shape != (n,):
                raise DomainError(f"{name} must have length {n}")

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def samples(self) -> list[ComparisonSample]:
        """Materialize the records as row objects (copies)."""
        return [
            ComparisonSample(
                s=self.states[i].copy(),
                a1=int(self.a1[i]),
                a0=int(self.a0[i]),
                y=int(self.y[i]),
                p_win=float(self.p_win[i]),
            )
            for i in range(len(self))
        ]


def generate_dataset(
    gt: GroundTruthReward,
    model: ComparisonModel,
    n: int,
    seed: int,
) -> ComparisonDataset:
    """Draw N i.i.d. comparisons of the pair (1, 0) under the given truth.

    States are Uniform[0,1]^d, outcomes follow g(., r(s,1) - r(s,0)), and
    the dataset is a pure function of (gt, model, n, seed).
    """
    if n < 1:
        raise DomainError("dataset size must be at least 1")
    rng = np.random.default_rng(seed)
    states = sample_states(n, gt.d, rng)
    rewards = reward_matrix(gt, states)
    u = rewards[:, 1] - rewards[:, 0]
    p_win = np.asarray(win_probability(model, u), dtype=float)
    y = sample_outcomes(model, u, rng)
    return ComparisonDataset(
        states=states,
        a1=np.ones(n, dtype=np.int64),
        a0=np.zeros(n, dtype=np.int64),
        y=y,
        p_win=p_win,
        d=gt.d,
        action_count=gt.action_count,
        seed=seed,
        model_kind=model.kind,
    )


def corrupt_dataset(ds: ComparisonDataset, m: float, seed: int) -> ComparisonDataset:
    """Ambiguate floor(m*N) records: p_win ~ Uniform[0.4, 0.6], y re-drawn.

    Only y and p_win of the selected records change; states and action
    pairs are preserved.  Re-corrupting an already corrupted dataset is an
    error so that noise levels stay exact.
    """
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"corruption level must be in [0, 1], got {m}")
    if ds.corruption_level != 0.0:
        raise StateError("dataset is already corrupted; corrupt the clean dataset instead")
    rng = np.random.default_rng(seed)
    n = len(ds)
    k = int(np.floor(m * n))
    y = ds.y.copy()
    p_win = ds.p_win.copy()
    if k > 0:
        idx = rng.choice(n, size=k, replace=False)
        fresh = rng.uniform(CORRUPTION_LOW, CORRUPTION_HIGH, size=k)
        p_win[idx] = fresh
        y[idx] = np.where(rng.random(k) < fresh, 1, -1)
    return replace(
        ds,
        states=ds.states.copy(),
        a1=ds.a1.copy(),
        a0=ds.a0.copy(),
        y=y,
        p_win=p_win,
        corruption_level=float(m),
        corruption_seed=seed,
    )


def dataset_win_probabilities(ds: ComparisonDataset) -> np.ndarray:
    """The recorded per-sample generating probabilities, for histogram export."""
    return ds.p_win.copy()


def save_dataset_csv(ds: ComparisonDataset, path: str) -> None:
    """Write one record per line: s1..sd,a1,a0,y,p_win (17 significant digits)."""
    header = [f"s{i + 1}" for i in range(ds.d)] + ["a1", "a0", "y", "p_win"]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(len(ds)):
            cells = [format(v, ".17g") for v in ds.states[i]]
            cells += [str(int(ds.a1[i])), str(int(ds.a0[i])), str(int(ds.y[i]))]
            cells.append(format(float(ds.p_win[i]), ".17g"))
            fh.write(",".join(cells) + "\n")


def load_dataset_csv(
    path: str,
    model_kind: ModelKind = ModelKind.BT,
    seed: int = -1,
    corruption_level: float = 0.0,
) -> ComparisonDataset:
    """Read a dataset CSV; provenance not stored in the file is supplied here."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        if header[-4:] != ["a1", "a0", "y", "p_win"]:
            raise DomainError(f"unrecognized dataset header in {path}")
        d = len(header) - 4
        raw = np.loadtxt(fh, delimiter=",", ndmin=2)
    if raw.shape[1] != d + 4:
        raise DomainError(f"row width {raw.shape[1]} does not match header in {path}")
    return ComparisonDataset(
        states=raw[:, :d],
        a1=raw[:, d].astype(np.int64),
        a0=raw[:, d + 1].astype(np.int64),
        y=raw[:, d + 2].astype(np.int64),
        p_win=raw[:, d + 3],
        d=d,
        action_count=int(max(raw[:, d].max(), raw[:, d + 1].max())) + 1,
        seed=seed,
        model_kind=model_kind,
        corruption_level=corruption_level,
    )
