"""Core matrix types for the IC model x = Omega z.

Matrices are plain ``numpy`` arrays; the helpers here validate them on
entry.  The equivalence group of permutation, sign-change and positive
rescaling matrices (C = P J D) is kept in factored form by
:class:`EquivalenceTransform`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RANK_TOL = 1e-10


class SingularMatrixError(ValueError):
    """Raised when a matrix that must be invertible (or PD) is not."""


def as_square(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_data_matrix(x):
    """Validate an n x p observation matrix (rows are observations)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"data must be 2-d, got shape {x.shape}")
    n, p = x.shape
    if p < 2 or n < p:
        raise ValueError(f"data needs n >= p >= 2, got n={n}, p={p}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data has non-finite entries")
    return x


def is_full_rank(a, tol=RANK_TOL):
    s = np.linalg.svd(a, compute_uv=False)
    return s[-1] > tol * s[0]


def as_unmixing(gamma, name="unmixing matrix"):
    gamma = as_square(gamma, name)
    if not is_full_rank(gamma):
        raise SingularMatrixError(f"{name} is not of full rank")
    return gamma


def _check_rows(g):
    if np.any(np.all(g == 0, axis=1)):
        raise ValueError("gain matrix has an all-zero row")


def off(a):
    """Return ``a`` with its diagonal set to zero."""
    a = as_square(a)
    return a - np.diag(np.diag(a))


def diag_part(a):
    a = as_square(a)
    return np.diag(np.diag(a))


def gain(gamma_hat, omega):
    """Gain matrix ``gamma_hat @ omega``."""
    gamma_hat = as_square(gamma_hat, "gamma_hat")
    omega = as_square(omega, "omega")
    if gamma_hat.shape != omega.shape:
        raise ValueError(
            f"dimension mismatch: {gamma_hat.shape} vs {omega.shape}")
    if not is_full_rank(omega):
        raise SingularMatrixError("omega is not of full rank")
    return gamma_hat @ omega


def row_max_standardize(g):
    """Divide each row by its largest absolute entry (signs are kept)."""
    g = as_square(g, "gain matrix")
    _check_rows(g)
    return g / np.max(np.abs(g), axis=1, keepdims=True)


@dataclass(frozen=True)
class EquivalenceTransform:
    """Element C = P J D of the equivalence group.

    Row ``i`` of the dense matrix holds ``signs[i] * scales[i]`` in column
    ``permutation[i]`` (0-based) and zeros elsewhere.
    """

    permutation: tuple
    signs: tuple
    scales: tuple

    def __post_init__(self):
        perm = tuple(int(i) for i in self.permutation)
        signs = tuple(int(s) for s in self.signs)
        scales = tuple(float(d) for d in self.scales)
        p = len(perm)
        if sorted(perm) != list(range(p)):
            raise ValueError(f"not a permutation of 0..{p - 1}: {perm}")
        if len(signs) != p or len(scales) != p:
            raise ValueError("permutation, signs and scales differ in length")
        if any(s not in (-1, 1) for s in signs):
            raise ValueError("signs must be +1 or -1")
        if not all(np.isfinite(d) and d > 0 for d in scales):
            raise ValueError("scales must be finite and strictly positive")
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "scales", scales)

    @property
    def p(self):
        return len(self.permutation)

    @classmethod
    def identity(cls, p):
        return cls(tuple(range(p)), (1,) * p, (1.0,) * p)

    @classmethod
    def random(cls, p, rng, scale_range=(0.1, 10.0)):
        lo, hi = np.log(scale_range[0]), np.log(scale_range[1])
        return cls(tuple(rng.permutation(p)),
                   tuple(rng.choice([-1, 1], size=p)),
                   tuple(np.exp(rng.uniform(lo, hi, size=p))))

    def allclose(self, other, rtol=1e-12):
        return (self.permutation == other.permutation
                and self.signs == other.signs
                and np.allclose(self.scales, other.scales, rtol=rtol, atol=0))


def materialize(c):
    """Dense p x p matrix of ``c``."""
    m = np.zeros((c.p, c.p))
    rows = np.arange(c.p)
    m[rows, list(c.permutation)] = np.multiply(c.signs, c.scales)
    return m


def compose(c1, c2):
    """Transform whose matrix is ``materialize(c1) @ materialize(c2)``."""
    if c1.p != c2.p:
        raise ValueError(f"dimension mismatch: {c1.p} vs {c2.p}")
    p1 = c1.permutation
    return EquivalenceTransform(
        tuple(c2.permutation[j] for j in p1),
        tuple(c1.signs[i] * c2.signs[p1[i]] for i in range(c1.p)),
        tuple(c1.scales[i] * c2.scales[p1[i]] for i in range(c1.p)),
    )


def inverse(c):
    inv = [0] * c.p
    for i, j in enumerate(c.permutation):
        inv[j] = i
    return EquivalenceTransform(
        tuple(inv),
        tuple(c.signs[k] for k in inv),
        tuple(1.0 / c.scales[k] for k in inv),
    )


def read_matrix_csv(path):
    """Read a headerless comma-separated matrix, one row per line."""
    a = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{path}: non-finite entries")
    return a


def format_matrix_csv(a):
    return "".join(",".join(f"{v:.17g}" for v in row) + "\n"
                   for row in np.atleast_2d(a))


def write_matrix_csv(path, a):
    with open(path, "w", newline="") as fh:
        fh.write(format_matrix_csv(a))
