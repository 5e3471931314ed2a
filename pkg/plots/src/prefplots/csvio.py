"""Schema-checked readers for the benchmark CSV contract.

The plotter talks to the benchmark exclusively through these files (no
shared in-memory types): sweep results, margin curves, and probability
histograms, each carrying a schema-version header line.
"""

from __future__ import annotations

import csv
import math

RESULTS_SCHEMA = "# prefbench-results-v1"
MARGIN_SCHEMA = "# prefbench-margin-v1"
HIST_SCHEMA = "# prefbench-hist-v1"


class PlotInputError(ValueError):
    """The input CSV does not match the expected schema or content."""


def _read_schema_csv(path: str, schema: str) -> list[dict[str, str]]:
    with open(path, "r", encoding="ascii", newline="") as fh:
        first = fh.readline().strip()
        if first != schema:
            raise PlotInputError(f"{path}: expected schema line {schema!r}, found {first!r}")
        return list(csv.DictReader(fh))


def read_results(path: str) -> list[dict[str, str]]:
    rows = _read_schema_csv(path, RESULTS_SCHEMA)
    if not rows:
        raise PlotInputError(f"{path}: no result rows")
    return rows


def read_margin(path: str) -> dict[str, list[float]]:
    rows = _read_schema_csv(path, MARGIN_SCHEMA)
    required = ("t", "cdf_prob_gap", "cdf_reward_gap")
    missing = [c for c in required if rows and c not in rows[0]]
    if not rows or missing:
        raise PlotInputError(f"{path}: missing margin columns {missing or required}")
    return {c: [float(r[c]) for r in rows] for c in required}


def read_histogram(path: str) -> list[tuple[float, float, int]]:
    rows = _read_schema_csv(path, HIST_SCHEMA)
    required = ("bin_left", "bin_right", "count")
    if not rows or any(c not in rows[0] for c in required):
        raise PlotInputError(f"{path}: missing histogram columns {required}")
    return [(float(r["bin_left"]), float(r["bin_right"]), int(r["count"])) for r in rows]


def numeric(rows: list[dict[str, str]], column: str) -> list[float]:
    if rows and column not in rows[0]:
        raise PlotInputError(f"results CSV lacks required column {column!r}")
    return [float(r[column]) for r in rows]


def finite_rows(rows: list[dict[str, str]], column: str) -> list[dict[str, str]]:
    """Drop sentinel rows (failed cells carry NaN metrics)."""
    return [r for r in rows if not math.isnan(float(r[column]))]
