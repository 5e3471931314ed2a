"""Comparison-graph designs and Laplacian spectral-gap analysis.

The comparison design over |A| actions is summarized by the symmetric
count matrix n_ij (number of comparisons of the pair (i, j)) and its
normalized Laplacian

    L_ij = -n_ij / N,   L_ii = sum_{j != i} n_ij / N,

whose trace is exactly 2 whenever sum_{i<j} n_ij = N.  The second-smallest
eigenvalue lambda_2 measures design connectivity: complete and star
designs keep it of order 1/|A|, path and cycle designs let it collapse
like 1/|A|^3, and a disconnected design drives it to 0.

Eigenvalues are computed with a cyclic Jacobi sweep; the matrices here are
tiny, so robustness beats speed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "GraphDesign",
    "LaplacianSummary",
    "design_counts",
    "build_laplacian",
    "lambda2",
    "jacobi_eigenvalues",
]

_JACOBI_TOL = 1e-12
_MAX_SWEEPS = 64


class GraphDesign(enum.Enum):
    COMPLETE = "complete"
    STAR = "star"
    PATH = "path"
    CYCLE = "cycle"


@dataclass(frozen=True)
class LaplacianSummary:
    lambda_matrix: np.ndarray
    lambda2: float
    counts: np.ndarray


def _design_edges(design: GraphDesign, m: int) -> list[tuple[int, int]]:
    if design is GraphDesign.COMPLETE:
        return [(i, j) for i in range(m) for j in range(i + 1, m)]
    if design is GraphDesign.STAR:
        return [(0, j) for j in range(1, m)]
    if design is GraphDesign.PATH:
        return [(i, i + 1) for i in range(m - 1)]
    if design is GraphDesign.CYCLE:
        return [(i, i + 1) for i in range(m - 1)] + [(0, m - 1)]
    raise DomainError(f"unknown design {design!r}")


def design_counts(design: GraphDesign, action_count: int, n: int) -> np.ndarray:
    """Spread n comparisons as evenly as possible over the design's edges.

    The integer remainder goes to the lowest-indexed edges in the design's
    natural edge order.
    """
    if action_count < 2:
        raise DomainError("a comparison design needs at least two actions")
    edges = _design_edges(design, action_count)
    if n < len(edges):
        raise DomainError(f"need at least {len(edges)} comparisons for {design.value}")
    base, rem = divmod(n, len(edges))
    counts = np.zeros((action_count, action_count), dtype=np.int64)
    for k, (i, j) in enumerate(edges):
        c = base + (1 if k < rem else 0)
        counts[i, j] = c
        counts[j, i] = c
    return counts


def build_laplacian(counts: np.ndarray, n: int) -> LaplacianSummary:
    """Normalized Laplacian of a count matrix together with its lambda_2."""
    counts = np.asarray(counts)
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
        raise DomainError("counts must be square")
    if not np.array_equal(counts, counts.T):
        raise DomainError("counts must be symmetric")
    if np.any(counts < 0) or np.any(np.diag(counts) != 0):
        raise DomainError("counts must be nonnegative with a zero diagonal")
    if counts.sum() != 2 * n:
        raise DomainError(f"counts sum to {counts.sum() // 2} comparisons, expected {n}")
    lam = (np.diag(counts.sum(axis=1)) - counts) / float(n)
    return LaplacianSummary(lambda_matrix=lam, lambda2=lambda2(lam), counts=counts.copy())


def _jacobi_rotate(a: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    if apq == 0.0:
        return
    tau = (a[q, q] - a[p, p]) / (2.0 * apq)
    if tau >= 0.0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = _JACOBI_TOL) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("matrix must be square")
    if a.shape[0] > 1000:
        raise DomainError("matrix too large for the Jacobi path (limit 1000)")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12:
        raise DomainError("matrix must be symmetric")
    a = (a + a.T) / 2.0
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    scale = max(np.max(np.abs(a)), 1.0)
    for _ in range(_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2.0)
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(a, p, q)
    return np.sort(a.diagonal())


def lambda2(matrix: np.ndarray) -> float:
    """Second-smallest eigenvalue of a symmetric matrix (Fiedler value)."""
    eigs = jacobi_eigenvalues(matrix)
    if eigs.size < 2:
        raise DomainError("lambda2 needs a matrix of size at least 2")
    return float(eigs[1])
