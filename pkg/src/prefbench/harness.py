"""Benchmark orchestration: architecture sweeps, noise sweeps, and exports.

A sweep cell is one (width, depth, noise level, replication) training run:
fresh truth weights and datasets per replication, optional label
corruption of the train/eval splits, MLE training, then evaluation of
regret, selection disagreement, test log-likelihood, and squared L2 error
on an always-clean test set.

Within a replication the truth and the base datasets are shared across
cells (derived from replication-level seeds), so architecture and noise
comparisons are paired; replications are independent.  Every stream is
derived from the base seed with a splitmix64 mixing function, making cells
order-insensitive and individually reproducible from the config plus the
row coordinates.

Results land in an append-only CSV with a schema-version header line; a
failed cell contributes a NaN-regret sentinel row with the error in the
note column instead of voiding the sweep.
"""

from __future__ import annotations

import dataclasses
import json
import math
import struct
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass

import numpy as np

from .comparison import ComparisonModel, ModelKind
from .data import (
    ComparisonDataset,
    corrupt_dataset,
    dataset_win_probabilities,
    generate_dataset,
)
from .errors import ConfigurationError, DomainError
from .graphs import build_laplacian, design_counts
from .network import MLPArchitecture, network_callable
from .rewards import (
    GroundTruthReward,
    RewardFamily,
    disagreement_rate,
    l2_error_sq,
    regret_mc,
)
from .training import TrainingConfig, empirical_loglik, train_mle

__all__ = [
    "SweepConfig",
    "ResultRow",
    "RESULT_COLUMNS",
    "RESULTS_SCHEMA",
    "mix64",
    "cell_seed",
    "run_arch_sweep",
    "run_noise_sweep",
    "run_graph_spectrum",
    "export_probability_histogram",
    "write_result_csv",
    "read_result_csv",
    "write_graph_csv",
    "write_histogram_csv",
    "sweep_config_from_json",
]

RESULTS_SCHEMA = "# prefbench-results-v1"
GRAPH_SCHEMA = "# prefbench-graph-v1"
HIST_SCHEMA = "# prefbench-hist-v1"

RESULT_COLUMNS = (
    "experiment_id",
    "reward_family",
    "model_kind",
    "width",
    "depth",
    "noise_level",
    "replication",
    "seed",
    "regret",
    "disagreement_rate",
    "test_loglik",
    "train_nll_final",
    "eval_nll_best",
    "l2_error_sq",
    "lambda2",
    "wall_time_seconds",
    "note",
)

_MASK64 = (1 << 64) - 1

# stream tags for per-replication resources
_TAG_WSTAR = 1
_TAG_TRAIN_DATA = 2
_TAG_EVAL_DATA = 3
_TAG_TEST_DATA = 4
_TAG_FIT = 5
_TAG_CORRUPT_TRAIN = 6
_TAG_CORRUPT_EVAL = 7


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix64(*parts: int) -> int:
    """Fold integers into one 64-bit seed via iterated splitmix64."""
    acc = 0x243F6A8885A308D3  # pi fraction, fixed initial state
    for p in parts:
        acc = _splitmix64(acc ^ (int(p) & _MASK64))
    return acc


def float_bits(x: float) -> int:
    """IEEE-754 bit pattern of a float, for mixing reals into seeds."""
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def cell_seed(base_seed: int, width: int, depth: int, noise_level: float, replication: int) -> int:
    """The documented per-cell seed: mix64(base, width, depth, noise bits, rep)."""
    return mix64(base_seed, width, depth, float_bits(noise_level), replication)


@dataclass(frozen=True)
class SweepConfig:
    """Sweep grid and shared training protocol.

    The full-scale grid (widths 2^2..2^12, depths 3..13, 50 replications,
    splits (2^14, 2^13, 2^14)) is reachable by config; the default grid is a
    desk-scale subset.
    """

    reward_family: RewardFamily = RewardFamily.SINUSOIDAL
    model_kind: ModelKind = ModelKind.BT
    tie_param: float = 2.0
    d: int = 10
    widths: tuple[int, ...] = (4, 16, 64, 256)
    depths: tuple[int, ...] = (3, 5, 7, 9)
    noise_levels: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
    replications: int = 10
    split_sizes: tuple[int, int, int] = (2**14, 2**13, 2**14)
    base_seed: int = 0
    training: TrainingConfig = TrainingConfig()
    share_wstar_across_cells: bool = True

    def __post_init__(self):
        if not self.widths or not self.depths or not self.noise_levels:
            raise ConfigurationError("width, depth, and noise lists must be nonempty")
        if self.replications < 1 or any(s < 1 for s in self.split_sizes):
            raise ConfigurationError("replications and split sizes must be positive")

    @property
    def model(self) -> ComparisonModel:
        return ComparisonModel(kind=self.model_kind, tie_param=self.tie_param)


@dataclass(frozen=True)
class ResultRow:
    experiment_id: str
    reward_family: str
    model_kind: str
    width: int
    depth: int
    noise_level: float
    replication: int
    seed: int
    regret: float
    disagreement_rate: float
    test_loglik: float
    train_nll_final: float
    eval_nll_best: float
    l2_error_sq: float
    lambda2: float
    wall_time_seconds: float
    note: str = ""


def _replication_resources(cfg: SweepConfig, replication: int, cell: int):
    """Truth and clean datasets for one replication (shared across its cells)."""
    root = cfg.base_seed if cfg.share_wstar_across_cells else cell
    gt = GroundTruthReward.sample(
        cfg.reward_family, cfg.d, np.random.default_rng(mix64(root, _TAG_WSTAR, replication))
    )
    model = cfg.model
    n_train, n_eval, n_test = cfg.split_sizes
    train = generate_dataset(gt, model, n_train, mix64(root, _TAG_TRAIN_DATA, replication))
    eval_ds = generate_dataset(gt, model, n_eval, mix64(root, _TAG_EVAL_DATA, replication))
    test = generate_dataset(gt, model, n_test, mix64(root, _TAG_TEST_DATA, replication))
    return gt, model, train, eval_ds, test


def _dataset_counts(ds: ComparisonDataset) -> np.ndarray:
    counts = np.zeros((ds.action_count, ds.action_count), dtype=np.int64)
    np.add.at(counts, (ds.a1, ds.a0), 1)
    return counts + counts.T


def run_cell(
    cfg: SweepConfig, experiment_id: str, width: int, depth: int, noise: float, replication: int
) -> ResultRow:
    """Execute one sweep cell; never raises, failures become sentinel rows."""
    seed = cell_seed(cfg.base_seed, width, depth, noise, replication)
    start = time.perf_counter()
    try:
        gt, model, train, eval_ds, test = _replication_resources(cfg, replication, seed)
        root = cfg.base_seed if cfg.share_wstar_across_cells else seed
        if noise > 0.0:
            m_bits = float_bits(noise)
            train = corrupt_dataset(train, noise, mix64(root, _TAG_CORRUPT_TRAIN, replication, m_bits))
            eval_ds = corrupt_dataset(eval_ds, noise, mix64(root, _TAG_CORRUPT_EVAL, replication, m_bits))
        arch = MLPArchitecture.rectangular(cfg.d, width, depth, actions=2)
        train_cfg = dataclasses.replace(cfg.training, seed=mix64(root, _TAG_FIT, replication))
        params, history = train_mle(train, eval_ds, arch, model, train_cfg)
        r_hat = network_callable(params)
        lam2 = build_laplacian(_dataset_counts(train), len(train)).lambda2
        return ResultRow(
            experiment_id=experiment_id,
            reward_family=cfg.reward_family.value,
            model_kind=cfg.model_kind.value,
            width=width,
            depth=depth,
            noise_level=noise,
            replication=replication,
            seed=seed,
            regret=regret_mc(r_hat, gt, test.states),
            disagreement_rate=disagreement_rate(r_hat, gt, test.states),
            test_loglik=empirical_loglik(params, test, model),
            train_nll_final=history.train_nll[-1],
            eval_nll_best=min(history.eval_nll),
            l2_error_sq=l2_error_sq(r_hat, gt, test.states),
            lambda2=lam2,
            wall_time_seconds=time.perf_counter() - start,
        )
    except Exception as exc:  # failure isolation: one bad cell must not void a sweep
        nan = float("nan")
        return ResultRow(
            experiment_id=experiment_id,
            reward_family=cfg.reward_family.value,
            model_kind=cfg.model_kind.value,
            width=width,
            depth=depth,
            noise_level=noise,
            replication=replication,
            seed=seed,
            regret=nan,
            disagreement_rate=nan,
            test_loglik=nan,
            train_nll_final=nan,
            eval_nll_best=nan,
            l2_error_sq=nan,
            lambda2=nan,
            wall_time_seconds=time.perf_counter() - start,
            note=f"{type(exc).__name__}: {exc}",
        )


def _run_cell_task(args) -> tuple[int, ResultRow]:
    index, cfg, experiment_id, width, depth, noise, replication = args
    return index, run_cell(cfg, experiment_id, width, depth, noise, replication)


def _run_cells(cfg, experiment_id, cells, out_csv, jobs) -> list[ResultRow]:
    """Run cells (optionally in a worker pool), appending rows as they complete."""
    appender = _ResultAppender(out_csv) if out_csv else None
    rows: list[ResultRow | None] = [None] * len(cells)
    try:
        if jobs <= 1:
            for index, (width, depth, noise, rep) in enumerate(cells):
                row = run_cell(cfg, experiment_id, width, depth, noise, rep)
                rows[index] = row
                if appender:
                    appender.append(row)
        else:
            tasks = [
                (i, cfg, experiment_id, w, dep, m, rep)
                for i, (w, dep, m, rep) in enumerate(cells)
            ]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                pending = {pool.submit(_run_cell_task, t) for t in tasks}
                while pending:
                    done, pending = wait(pending, return_when=FIRST_COMPLETED)
                    for fut in done:
                        index, row = fut.result()
                        rows[index] = row
                        if appender:
                            appender.append(row)
    finally:
        if appender:
            appender.close()
    return [r for r in rows if r is not None]


def run_arch_sweep(cfg: SweepConfig, out_csv: str | None = None, jobs: int = 1) -> list[ResultRow]:
    """One row per (width, depth, replication) on clean data."""
    cells = [
        (w, dep, 0.0, rep)
        for w in cfg.widths
        for dep in cfg.depths
        for rep in range(cfg.replications)
    ]
    return _run_cells(cfg, "arch_sweep", cells, out_csv, jobs)


def run_noise_sweep(
    cfg: SweepConfig,
    width: int = 64,
    depth: int = 4,
    out_csv: str | None = None,
    jobs: int = 1,
) -> list[ResultRow]:
    """One row per (noise level, replication) at a fixed architecture."""
    cells = [(width, depth, m, rep) for m in cfg.noise_levels for rep in range(cfg.replications)]
    return _run_cells(cfg, "noise_sweep", cells, out_csv, jobs)


def run_graph_spectrum(designs, action_counts, n: int) -> list[tuple[str, int, float]]:
    """Spectral gap lambda_2 for each (design, action count) at n comparisons."""
    out = []
    for design in designs:
        for m in action_counts:
            counts = design_counts(design, m, n)
            out.append((design.value, int(m), build_laplacian(counts, n).lambda2))
    return out


def export_probability_histogram(
    ds: ComparisonDataset, bins: int
) -> list[tuple[float, float, int]]:
    """Equal-width histogram of the recorded winning probabilities on [0, 1]."""
    if bins < 2:
        raise DomainError("need at least 2 bins")
    counts, edges = np.histogram(dataset_win_probabilities(ds), bins=bins, range=(0.0, 1.0))
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)]


def _format_cell(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


class _ResultAppender:
    """Serialized writer so a worker pool cannot interleave CSV rows."""

    def __init__(self, path: str, append: bool = False):
        mode = "a" if append else "w"
        self._fh = open(path, mode, encoding="ascii", newline="\n")
        if not append:
            self._fh.write(RESULTS_SCHEMA + "\n")
            self._fh.write(",".join(RESULT_COLUMNS) + "\n")

    def append(self, row: ResultRow) -> None:
        cells = [_format_cell(getattr(row, col)) for col in RESULT_COLUMNS]
        self._fh.write(",".join(cells) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def write_result_csv(path: str, rows, append: bool = False) -> None:
    writer = _ResultAppender(path, append=append)
    try:
        for row in rows:
            writer.append(row)
    finally:
        writer.close()


def read_result_csv(path: str) -> list[ResultRow]:
    with open(path, "r", encoding="ascii") as fh:
        schema = fh.readline().strip()
        if schema != RESULTS_SCHEMA:
            raise DomainError(f"unrecognized results schema line {schema!r} in {path}")
        header = fh.readline().strip().split(",")
        if tuple(header) != RESULT_COLUMNS:
            raise DomainError(f"unexpected results header in {path}")
        rows = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",", len(RESULT_COLUMNS) - 1)
            rows.append(
                ResultRow(
                    experiment_id=parts[0],
                    reward_family=parts[1],
                    model_kind=parts[2],
                    width=int(parts[3]),
                    depth=int(parts[4]),
                    noise_level=float(parts[5]),
                    replication=int(parts[6]),
                    seed=int(parts[7]),
                    regret=float(parts[8]),
                    disagreement_rate=float(parts[9]),
                    test_loglik=float(parts[10]),
                    train_nll_final=float(parts[11]),
                    eval_nll_best=float(parts[12]),
                    l2_error_sq=float(parts[13]),
                    lambda2=float(parts[14]),
                    wall_time_seconds=float(parts[15]),
                    note=parts[16],
                )
            )
    return rows


def write_graph_csv(path: str, rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(GRAPH_SCHEMA + "\n")
        fh.write("design,action_count,lambda2\n")
        for design, m, lam2 in rows:
            fh.write(f"{design},{m},{format(lam2, '.17g')}\n")


def write_histogram_csv(path: str, rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(HIST_SCHEMA + "\n")
        fh.write("bin_left,bin_right,count\n")
        for left, right, count in rows:
            fh.write(f"{format(left, '.17g')},{format(right, '.17g')},{count}\n")


def sweep_config_from_json(path: str) -> SweepConfig:
    """Load a SweepConfig from a JSON document mirroring its field names."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    kwargs = dict(doc)
    if "reward_family" in kwargs:
        kwargs["reward_family"] = RewardFamily(kwargs["reward_family"])
    if "model_kind" in kwargs:
        kwargs["model_kind"] = ModelKind(kwargs["model_kind"])
    for key in ("widths", "depths", "noise_levels", "split_sizes"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    if "training" in kwargs:
        training = dict(kwargs["training"])
        if "betas" in training:
            training["betas"] = tuple(training["betas"])
        kwargs["training"] = TrainingConfig(**training)
    try:
        return SweepConfig(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(f"bad sweep config {path}: {exc}") from None
