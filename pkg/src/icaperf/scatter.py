"""Scatter matrices with the independence property, and whitening."""

from __future__ import annotations

import numpy as np

from .model import SingularMatrixError, as_data_matrix

EIG_TOL = 1e-12


def _centered(x):
    x = as_data_matrix(x)
    if x.shape[0] < x.shape[1] + 1:
        raise ValueError("need n >= p + 1 observations")
    return x - x.mean(axis=0)


def _sym_eig(s):
    w, v = np.linalg.eigh((s + s.T) / 2)
    if w[0] <= EIG_TOL * w[-1]:
        raise SingularMatrixError(
            f"scatter matrix is singular (eigenvalues {w[0]:.3g} .. {w[-1]:.3g})")
    return w, v


def cov_scatter(x):
    """Sample covariance matrix with divisor n."""
    xc = _centered(x)
    s = xc.T @ xc / xc.shape[0]
    _sym_eig(s)
    return s


def inv_sqrtm(s):
    """Symmetric inverse square root of a symmetric PD matrix."""
    w, v = _sym_eig(s)
    return (v / np.sqrt(w)) @ v.T


def _fourth_moment(xc, s1_inv):
    # mean of r_i^2 (x_i x_i^T) with r_i^2 = x_i^T S1^{-1} x_i
    r2 = np.einsum("ij,jk,ik->i", xc, s1_inv, xc)
    p = xc.shape[1]
    s2 = (xc * r2[:, None]).T @ xc / (xc.shape[0] * (p + 2))
    return (s2 + s2.T) / 2


def fourth_moment_scatter(x):
    """Fourth-moment scatter matrix used by FOBI.

    ``(1/(p+2)) mean_i [(x_i - m)(x_i - m)^T S1^{-1} (x_i - m)(x_i - m)^T]``
    with ``S1`` the covariance matrix.  Equals ``I`` for a standard normal
    distribution.
    """
    xc = _centered(x)
    s1 = xc.T @ xc / xc.shape[0]
    w, v = _sym_eig(s1)
    return _fourth_moment(xc, (v / w) @ v.T)


def whiten(x):
    """Return ``(y, W)`` with ``y_i = W (x_i - mean)`` and ``W = S1^{-1/2}``.

    ``W`` is the symmetric inverse square root, so ``cov_scatter(y)`` is
    the identity.
    """
    xc = _centered(x)
    w_mat = inv_sqrtm(xc.T @ xc / xc.shape[0])
    return xc @ w_mat, w_mat
