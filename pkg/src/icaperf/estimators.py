"""FOBI and deflation-based fastICA unmixing matrix estimators."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import as_data_matrix, as_square
from .scatter import _fourth_moment, whiten

NONLINEARITIES = ("pow3", "tanh", "gauss")
TIE_TOL = 1e-9


class EstimatorError(RuntimeError):
    pass


def nonlinearity_eval(kind, z):
    """Return ``(g(z), g'(z))`` for ``kind`` in pow3, tanh, gauss."""
    z = np.asarray(z, dtype=float)
    if kind == "pow3":
        return z ** 3, 3 * z ** 2
    if kind == "tanh":
        t = np.tanh(z)
        return t, 1 - t ** 2
    if kind == "gauss":
        e = np.exp(-z ** 2 / 2)
        return z * e, (1 - z ** 2) * e
    raise ValueError(f"unknown nonlinearity {kind!r}; use one of {NONLINEARITIES}")


def fix_signs(gamma):
    """Flip rows so that each row's largest-magnitude entry is positive."""
    gamma = np.array(gamma, dtype=float)
    idx = np.argmax(np.abs(gamma), axis=1)
    signs = np.sign(gamma[np.arange(len(gamma)), idx])
    signs[signs == 0] = 1
    return gamma * signs[:, None]


@dataclass(frozen=True)
class FobiResult:
    gamma: np.ndarray
    lambdas: np.ndarray
    tied: bool = False


def _descending_order(vals, vecs):
    order = list(np.argsort(-vals, kind="stable"))
    tied = False
    out, i = [], 0
    while i < len(order):
        j = i + 1
        while j < len(order) and vals[order[j - 1]] - vals[order[j]] < TIE_TOL:
            j += 1
        group = order[i:j]
        if len(group) > 1:
            tied = True
            group.sort(key=lambda c: int(np.argmax(np.abs(vecs[:, c]))))
        out.extend(group)
        i = j
    return np.array(out), tied


def fobi(x):
    """FOBI estimate: jointly diagonalize the covariance and fourth-moment scatter.

    The returned ``gamma`` satisfies ``gamma S1 gamma^T = I`` and
    ``gamma S2 gamma^T = diag(lambdas)`` with ``lambdas`` descending.
    """
    x = as_data_matrix(x)
    y, w_mat = whiten(x)
    s2 = _fourth_moment(y, np.eye(y.shape[1]))
    vals, vecs = np.linalg.eigh(s2)
    order, tied = _descending_order(vals, vecs)
    if tied:
        warnings.warn("FOBI: tied eigenvalues, order is not identifiable",
                      RuntimeWarning, stacklevel=2)
    gamma = fix_signs(vecs[:, order].T @ w_mat)
    return FobiResult(gamma, vals[order], tied)


@dataclass(frozen=True)
class FastIcaConfig:
    """Settings for :func:`fastica_deflation`.

    ``init`` is ``"identity"``, ``"random"`` (QR of a Gaussian matrix drawn
    with ``seed``) or an orthogonal p x p array whose rows are the starting
    directions in whitened coordinates.
    """

    nonlinearity: str = "tanh"
    init: object = "identity"
    max_iter: int = 1000
    tol: float = 1e-8
    seed: int | None = None

    def __post_init__(self):
        if self.nonlinearity not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.nonlinearity!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be at least 1")
        if isinstance(self.init, str):
            if self.init not in ("identity", "random"):
                raise ValueError(f"unknown init {self.init!r}")
        else:
            w0 = as_square(self.init, "init")
            if not np.allclose(w0 @ w0.T, np.eye(len(w0)), atol=1e-8, rtol=0):
                raise ValueError("init matrix must be orthogonal")
            object.__setattr__(self, "init", w0)

    def initial_matrix(self, p):
        if isinstance(self.init, str):
            if self.init == "identity":
                return np.eye(p)
            return random_orthogonal(p, np.random.default_rng(self.seed))
        if self.init.shape != (p, p):
            raise ValueError(f"init is {self.init.shape}, data has p={p}")
        return self.init


def random_orthogonal(p, rng):
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))


def permutation_init(order):
    """Orthogonal init that makes deflation extract sources in ``order``."""
    return np.eye(len(order))[list(order)]


@dataclass(frozen=True)
class FastIcaResult:
    gamma: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray


def _fixed_point_step(y, w, prev, kind, k):
    g, gp = nonlinearity_eval(kind, y @ w)
    w_new = y.T @ g / len(y) - gp.mean() * w
    w_new -= prev.T @ (prev @ w_new)
    w_new /= np.linalg.norm(w_new)
    if not np.all(np.isfinite(w_new)):
        raise EstimatorError(f"fastICA: non-finite iterate in row {k}")
    return w_new


def fastica_deflation(x, cfg=None):
    """Deflation-based fastICA.

    Rows are extracted one at a time by the fixed-point step
    ``w <- mean[y g(w'y)] - mean[g'(w'y)] w`` on whitened data ``y``,
    followed by Gram-Schmidt against the rows already found and
    normalization.  Row ``k`` stops when ``|1 - |<w_new, w_old>|| < tol``.
    Hitting ``max_iter`` is reported in ``converged``, not raised.
    """
    cfg = cfg or FastIcaConfig()
    x = as_data_matrix(x)
    y, w_mat = whiten(x)
    n, p = y.shape
    w0 = cfg.initial_matrix(p)
    rows = np.zeros((p, p))
    iterations = np.zeros(p, dtype=int)
    converged = np.zeros(p, dtype=bool)
    for k in range(p):
        prev = rows[:k]
        w = w0[k] - prev.T @ (prev @ w0[k])
        w /= np.linalg.norm(w)
        for it in range(1, int(cfg.max_iter) + 1):
            w_new = _fixed_point_step(y, w, prev, cfg.nonlinearity, k)
            done = abs(1 - abs(w_new @ w)) < cfg.tol
            w = w_new
            if done:
                converged[k] = True
                break
        if converged[k] and k < p - 1:
            # the stopping rule is quadratic in the step angle; one more
            # step brings the estimating equations down to ~tol
            w_new = _fixed_point_step(y, w, prev, cfg.nonlinearity, k)
            w = w_new * np.sign(w_new @ w)
        iterations[k] = it
        rows[k] = w
    return FastIcaResult(fix_signs(rows @ w_mat), iterations, converged)


def estimating_equation_residuals(x, gamma, kind):
    """Norms of ``T_k - S (sum_{j<=k} g_j g_j^T) T_k`` for each row ``k``.

    ``T_k = mean[g(gamma_k'(x_i - m)) (x_i - m)]``; zero at an exact
    deflation fastICA solution.
    """
    x = as_data_matrix(x)
    xc = x - x.mean(axis=0)
    s = xc.T @ xc / len(xc)
    out = []
    for k in range(len(gamma)):
        g, _ = nonlinearity_eval(kind, xc @ gamma[k])
        t = xc.T @ g / len(xc)
        proj = gamma[:k + 1].T @ gamma[:k + 1]
        out.append(np.linalg.norm(t - s @ proj @ t))
    return np.array(out)
