"""Figure rendering for benchmark CSVs.

Four figure kinds: a median-regret surface over (width, depth), regret
violins across noise levels, a log-log margin-CDF plot with its fitted
power-law slope, and a winning-probability histogram.  Replications are
summarized by medians (regret distributions are heavy-tailed; means would
be dominated by the occasional diverged replication).

Rendering is deterministic for fixed inputs and library versions (no
jitter, no timestamps in our control); re-running a spec overwrites its
outputs byte-for-byte on a best-effort basis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from statistics import median

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import PlotInputError, finite_rows, read_histogram, read_margin, read_results

DEFAULT_GROUP_BY = ("model_kind", "reward_family")
MARGIN_FIT_RANGE = (0.01, 0.2)


class FigureKind(enum.Enum):
    SURFACE = "surface"
    NOISE_DISTRIBUTION = "noise"
    MARGIN_LOGLOG = "margin"
    PROB_HISTOGRAM = "hist"


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    figure_kind: FigureKind
    output_path: str
    group_by: tuple[str, ...] = DEFAULT_GROUP_BY
    title: str = ""


def margin_loglog_fit(t: list[float], cdf: list[float]) -> tuple[float, float, float]:
    """Power-law fit on the default window: returns (slope, intercept, alpha).

    Least squares of log cdf on log t over t in [0.01, 0.2] restricted to
    0 < cdf < 1, with alpha = slope / (1 + slope); mirrors the benchmark's
    own estimator so the annotated exponent is comparable.
    """
    t_arr = np.asarray(t, dtype=float)
    cdf_arr = np.asarray(cdf, dtype=float)
    lo, hi = MARGIN_FIT_RANGE
    usable = (t_arr >= lo) & (t_arr <= hi) & (cdf_arr > 0.0) & (cdf_arr < 1.0)
    if np.count_nonzero(usable) < 5:
        raise PlotInputError("margin curve has fewer than 5 usable points in the fit window")
    log_t = np.log(t_arr[usable])
    log_f = np.log(cdf_arr[usable])
    centered = log_t - log_t.mean()
    slope = float(np.dot(centered, log_f - log_f.mean()) / np.dot(centered, centered))
    intercept = float(log_f.mean() - slope * log_t.mean())
    return slope, intercept, slope / (1.0 + slope)


def median_by_cell(rows, keys: tuple[str, ...], value: str) -> dict[tuple, float]:
    cells: dict[tuple, list[float]] = {}
    for row in rows:
        cell = tuple(row[k] for k in keys)
        cells.setdefault(cell, []).append(float(row[value]))
    return {cell: median(values) for cell, values in cells.items()}


def _group_rows(rows, group_by):
    for column in group_by:
        if rows and column not in rows[0]:
            raise PlotInputError(f"results CSV lacks group column {column!r}")
    groups: dict[tuple, list] = {}
    for row in rows:
        groups.setdefault(tuple(row[c] for c in group_by), []).append(row)
    return groups


def _group_path(output_path: str, key: tuple, multiple: bool) -> str:
    if not multiple:
        return output_path
    stem, dot, ext = output_path.rpartition(".")
    tag = "_".join(str(k) for k in key)
    return f"{stem}_{tag}.{ext}" if dot else f"{output_path}_{tag}"


def _render_surface(rows, spec: FigureSpec) -> list[str]:
    groups = _group_rows(finite_rows(rows, "regret"), spec.group_by)
    if not groups:
        raise PlotInputError("no finite-regret rows to plot")
    written = []
    for key, group in sorted(groups.items()):
        medians = median_by_cell(group, ("width", "depth"), "regret")
        widths = sorted({int(w) for w, _ in medians})
        depths = sorted({int(d) for _, d in medians})
        grid = np.full((len(depths), len(widths)), np.nan)
        for (w, d), value in medians.items():
            grid[depths.index(int(d)), widths.index(int(w))] = value
        if np.isnan(grid).any():
            missing = [(w, d) for d in depths for w in widths if np.isnan(grid[depths.index(d), widths.index(w)])]
            raise PlotInputError(f"group {key}: empty (width, depth) cells {missing}")
        fig = plt.figure(figsize=(7, 5))
        ax = fig.add_subplot(projection="3d")
        wx, dy = np.meshgrid(np.log2(widths), depths)
        ax.plot_surface(wx, dy, grid, cmap="viridis", edgecolor="k", linewidth=0.3)
        ax.set_xlabel("log2 width")
        ax.set_ylabel("depth")
        ax.set_zlabel("median regret")
        ax.set_title(spec.title or f"regret surface {'/'.join(key)}")
        path = _group_path(spec.output_path, key, len(groups) > 1)
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def _render_noise(rows, spec: FigureSpec) -> list[str]:
    groups = _group_rows(finite_rows(rows, "regret"), spec.group_by)
    if not groups:
        raise PlotInputError("no finite-regret rows to plot")
    written = []
    for key, group in sorted(groups.items()):
        levels = sorted({float(r["noise_level"]) for r in group})
        samples = [
            [float(r["regret"]) for r in group if float(r["noise_level"]) == m] for m in levels
        ]
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.violinplot(samples, positions=range(len(levels)), showmedians=True, widths=0.8)
        ax.set_xticks(range(len(levels)), [f"{m:g}" for m in levels])
        ax.set_xlabel("noise level m")
        ax.set_ylabel("regret")
        ax.set_title(spec.title or f"regret by noise level {'/'.join(key)}")
        path = _group_path(spec.output_path, key, len(groups) > 1)
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def _render_margin(spec: FigureSpec) -> list[str]:
    curves = read_margin(spec.input_csv)
    t = curves["t"]
    cdf = curves["cdf_prob_gap"]
    slope, intercept, alpha = margin_loglog_fit(t, cdf)
    positive = [(ti, ci) for ti, ci in zip(t, cdf) if ci > 0]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog([p[0] for p in positive], [p[1] for p in positive], "o", ms=3, label="empirical CDF")
    window = np.linspace(*MARGIN_FIT_RANGE, 50)
    ax.loglog(window, np.exp(intercept) * window**slope, "-",
              label=f"slope {slope:.3f}, alpha {alpha:.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("P(prob gap <= t)")
    ax.set_title(spec.title or "margin condition, probability gap")
    ax.legend()
    fig.savefig(spec.output_path, dpi=120)
    plt.close(fig)
    return [spec.output_path]


def _render_hist(spec: FigureSpec) -> list[str]:
    bins = read_histogram(spec.input_csv)
    lefts = [b[0] for b in bins]
    widths = [b[1] - b[0] for b in bins]
    counts = [b[2] for b in bins]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(lefts, counts, width=widths, align="edge", edgecolor="k", linewidth=0.4)
    ax.set_xlabel("P(y > 0 | s, a1, a0)")
    ax.set_ylabel("count")
    ax.set_title(spec.title or "winning-probability histogram")
    fig.savefig(spec.output_path, dpi=120)
    plt.close(fig)
    return [spec.output_path]


def render(spec: FigureSpec) -> list[str]:
    """Render a figure spec; returns the written image paths (one per group)."""
    if spec.figure_kind is FigureKind.SURFACE:
        return _render_surface(read_results(spec.input_csv), spec)
    if spec.figure_kind is FigureKind.NOISE_DISTRIBUTION:
        return _render_noise(read_results(spec.input_csv), spec)
    if spec.figure_kind is FigureKind.MARGIN_LOGLOG:
        return _render_margin(spec)
    if spec.figure_kind is FigureKind.PROB_HISTOGRAM:
        return _render_hist(spec)
    raise PlotInputError(f"unknown figure kind {spec.figure_kind!r}")
