"""Asymptotic variances of unmixing estimates and the limit law of n D^2.

Conventions: ``AsvMatrix.values[k, l]`` is the asymptotic variance of
``sqrt(n) (gamma_hat - I)[k, l]`` in the canonical model, rows indexed in
extraction order.  Published tables of these variances are often printed
transposed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .estimators import nonlinearity_eval
from .indices import squared_row_normalized, solve_lsap_max

QUAD_TOL = 1e-8
ADMISSIBLE_TOL = 1e-6


class QuadratureError(RuntimeError):
    pass


def expect(source, func):
    """``E[func(z)]`` under the source density, by adaptive quadrature."""
    lo, hi = source.support
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(lambda t: func(t) * source.pdf(t), lo, hi,
                                      points=[0.0], epsabs=QUAD_TOL / 100,
                                      epsrel=1e-12, limit=500)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"{source.family}: {exc}") from exc
    if err > QUAD_TOL:
        raise QuadratureError(f"{source.family}: error estimate {err:.2g}")
    return val


@dataclass(frozen=True)
class NonlinearityMoments:
    """mu = E g(z), lambda_ = E g(z) z, tau = E g'(z) z, delta = E g'(z)."""

    mu: float
    lambda_: float
    tau: float
    delta: float

    @property
    def admissible(self):
        return abs(self.lambda_ - self.delta) > ADMISSIBLE_TOL


def compute_moments(kind, source):
    def g(t):
        return float(nonlinearity_eval(kind, t)[0])

    def gp(t):
        return float(nonlinearity_eval(kind, t)[1])

    return NonlinearityMoments(
        mu=expect(source, g),
        lambda_=expect(source, lambda t: g(t) * t),
        tau=expect(source, lambda t: gp(t) * t),
        delta=expect(source, gp),
    )


@dataclass(frozen=True)
class AsvMatrix:
    values: np.ndarray
    ordering: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("AsvMatrix needs a square array")
        if np.any(v < 0):
            raise ValueError("asymptotic variances must be non-negative")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "ordering", tuple(self.ordering))


def fastica_asv(sources, kind):
    """Closed-form asymptotic variances for deflation fastICA.

    ``sources`` are listed in extraction order.  For ``l > k`` the entry is
    ``E[(g(z_k) - mu_k - lambda_k z_k)^2] / (lambda_k - delta_k)^2``; below
    the diagonal ``gamma_kl = gamma_lk - S_kl`` adds exactly one; the
    diagonal is ``(E z_k^4 - 1) / 4``.
    """
    p = len(sources)
    v = np.zeros((p, p))
    for k, src in enumerate(sources):
        v[k, k] = (expect(src, lambda t: t ** 4) - 1) / 4
        if k == p - 1:
            break
        m = compute_moments(kind, src)
        if not m.admissible:
            raise ValueError(
                f"lambda == delta for source {k} ({src.family}, {kind}); "
                "row is not identifiable")

        def resid2(t, m=m):
            return (float(nonlinearity_eval(kind, t)[0]) - m.mu - m.lambda_ * t) ** 2

        v[k, k + 1:] = expect(src, resid2) / (m.lambda_ - m.delta) ** 2
    lower = np.tril_indices(p, -1)
    v[lower] = v.T[lower] + 1
    return AsvMatrix(v, tuple(s.family for s in sources))


def offdiag_trace_target(asv):
    """Limiting mean of n (p-1) D^2: the sum of off-diagonal variances."""
    v = asv.values if isinstance(asv, AsvMatrix) else np.asarray(asv, dtype=float)
    return float(v.sum() - np.trace(v))


def align_to_identity(gamma):
    """Permute and sign-flip rows of ``gamma`` to be nearest the identity."""
    gamma = np.asarray(gamma, dtype=float)
    sol = solve_lsap_max(squared_row_normalized(gamma))
    out = np.empty_like(gamma)
    out[sol.assignment] = gamma
    d = np.sign(np.diag(out))
    d[d == 0] = 1
    return out * d[:, None]


def empirical_asv(estimates, n, ordering=()):
    """Monte Carlo ASV: entrywise variance of ``sqrt(n) (gamma_hat - I)``."""
    if len(estimates) < 2:
        raise ValueError("need at least two replications")
    z = np.stack([np.sqrt(n) * (align_to_identity(g) - np.eye(len(g)))
                  for g in estimates])
    return AsvMatrix((z - z[0]).var(axis=0, ddof=1), ordering)


def diagonal_embedding(asv):
    """Covariance of ``sqrt(n) vec(gamma_hat - I)`` with independent entries."""
    v = asv.values if isinstance(asv, AsvMatrix) else np.asarray(asv, dtype=float)
    return np.diag(v.flatten(order="F"))


@dataclass(frozen=True)
class MixtureChiSquare:
    """Law of ``sum_i weights[i] * chi2_1``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0):
            raise ValueError("mixture weights must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def mean(self):
        return float(self.weights.sum())

    @property
    def variance(self):
        return float(2 * (self.weights ** 2).sum())


def md_limit_mixture(asv_cov, rel_tol=1e-10, psd_tol=1e-8):
    """Limit of n (p-1) D^2 for an estimate with ``sqrt(n) vec(G - I) -> N(0, asv_cov)``.

    Weights are the nonzero eigenvalues of ``(I - D_pp) asv_cov (I - D_pp)``,
    where ``D_pp`` selects the diagonal entries of the p x p estimate.
    """
    cov = np.asarray(asv_cov, dtype=float)
    q = cov.shape[0]
    p = int(round(np.sqrt(q)))
    if cov.shape != (q, q) or p * p != q:
        raise ValueError(f"expected a p^2 x p^2 matrix, got {cov.shape}")
    if not np.allclose(cov, cov.T, atol=1e-10 * max(1.0, np.abs(cov).max())):
        raise ValueError("covariance is not symmetric")
    keep = np.ones(q)
    keep[np.arange(p) * (p + 1)] = 0
    proj = cov * keep[:, None] * keep[None, :]
    w = np.linalg.eigvalsh((proj + proj.T) / 2)
    top = max(w.max(), 0.0)
    if w.min() < -psd_tol * max(top, 1.0):
        raise ValueError("covariance is not positive semi-definite")
    return MixtureChiSquare(np.sort(w[w > rel_tol * top])[::-1])


def sample_mixture(mixture, count, seed, chunk=200_000):
    rng = np.random.default_rng(seed)
    out = np.empty(int(count))
    for start in range(0, len(out), chunk):
        m = min(chunk, len(out) - start)
        out[start:start + m] = rng.standard_normal((m, len(mixture.weights))) ** 2 @ mixture.weights
    return out
