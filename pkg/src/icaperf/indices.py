"""Performance indices for comparing gain matrices with the identity.

The minimum distance index

    D(G) = (p - 1)^{-1/2} inf_{C} ||C G - I||_F,

with C ranging over permutation x sign x positive-scale matrices, reduces
to a linear sum assignment on the squared, row-normalized gain matrix and
is computed exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import SingularMatrixError, as_square, is_full_rank


@dataclass(frozen=True)
class LsapSolution:
    assignment: np.ndarray  # assignment[i] = column matched to row i
    objective: float


def solve_lsap_max(profit):
    """Maximize ``sum_i profit[i, assignment[i]]`` over bijections."""
    profit = as_square(profit, "profit matrix")
    rows, cols = linear_sum_assignment(profit, maximize=True)
    assignment = np.empty(len(profit), dtype=int)
    assignment[rows] = cols
    return LsapSolution(assignment, float(profit[rows, cols].sum()))


def _gain(g):
    g = as_square(g, "gain matrix")
    if len(g) < 2:
        raise ValueError("indices need p >= 2")
    return g


def _nonzero_rows(g):
    if np.any(np.all(g == 0, axis=1)):
        raise ValueError("gain matrix has an all-zero row")


def _nonzero_cols(g):
    if np.any(np.all(g == 0, axis=0)):
        raise ValueError("gain matrix has an all-zero column")


def squared_row_normalized(g):
    g2 = g ** 2
    return g2 / g2.sum(axis=1, keepdims=True)


def md_index(g):
    """Minimum distance index of a gain matrix, in [0, 1].

    The input is not rescaled: the index is invariant to any row scaling,
    sign change or permutation of ``g``.
    """
    g = _gain(g)
    _nonzero_rows(g)
    p = len(g)
    gt = squared_row_normalized(g)
    sol = solve_lsap_max(gt)
    # p - max trace, summed from the unmatched entries to avoid cancellation
    gt[np.arange(p), sol.assignment] = 0.0
    return float(min(np.sqrt(gt.sum() / (p - 1)), 1.0))


def md_index_column_variant(g):
    """``(p-1)^{-1/2} inf_C ||G C - I||_F``, i.e. the MD index of ``g.T``."""
    g = _gain(g)
    _nonzero_cols(g)
    return md_index(g.T)


def amari_index(g):
    g = _gain(g)
    _nonzero_rows(g)
    _nonzero_cols(g)
    a = np.abs(g)
    rows = (a.sum(axis=1) / a.max(axis=1)).sum()
    cols = (a.sum(axis=0) / a.max(axis=0)).sum()
    return float((rows + cols) / len(g) - 2)


def isr_index(g):
    """Interference-to-signal ratio summed over rows."""
    g = _gain(g)
    _nonzero_rows(g)
    g2 = g ** 2
    return float((g2.sum(axis=1) / g2.max(axis=1) - 1).sum())


def gce_index(omega, gamma_hat):
    """Generalized crosstalking error ``inf_C ||Omega - gamma_hat^{-1} C||_F``.

    For column ``j`` of ``Omega`` matched to column ``i`` of ``B = gamma_hat^{-1}``
    the best scale is the least-squares coefficient, leaving the cost
    ``|w_j|^2 - <w_j, b_i>^2 / |b_i|^2``; the matching itself is an LSAP.
    """
    omega = as_square(omega, "omega")
    gamma_hat = as_square(gamma_hat, "gamma_hat")
    if omega.shape != gamma_hat.shape:
        raise ValueError(f"dimension mismatch: {omega.shape} vs {gamma_hat.shape}")
    if not is_full_rank(gamma_hat):
        raise SingularMatrixError("gamma_hat is singular")
    b = np.linalg.inv(gamma_hat)
    inner = omega.T @ b  # inner[j, i] = <w_j, b_i>
    cost = (omega ** 2).sum(axis=0)[:, None] - inner ** 2 / (b ** 2).sum(axis=0)[None, :]
    rows, cols = linear_sum_assignment(cost)
    # residuals formed explicitly; the cost expression cancels badly near 0
    bm = b[:, cols]
    coef = inner[rows, cols] / (bm ** 2).sum(axis=0)
    return float(np.linalg.norm(omega[:, rows] - bm * coef))


METRICS = {
    "md": md_index,
    "amari": amari_index,
    "isr": isr_index,
    "md-col": md_index_column_variant,
}


def benchmark(dims=(3, 5, 10, 25, 50, 100), count=1000, seed=0):
    """Seconds needed to compute ``count`` MD indices of random p x p matrices."""
    rng = np.random.default_rng(seed)
    out = []
    for p in dims:
        mats = rng.standard_normal((count, p, p))
        t0 = time.perf_counter()
        for m in mats:
            md_index(m)
        out.append((p, time.perf_counter() - t0))
    return out
