"""Source distributions and the seeded Monte Carlo study of the MD index.

Seed derivation
---------------
Replication ``r`` at sample-size index ``s`` draws its data from
``numpy.random.default_rng(mix64(master_seed, s, r))`` where ``mix64``
chains the SplitMix64 finalizer::

    h = splitmix64(master_seed)
    h = splitmix64(h ^ s)
    h = splitmix64(h ^ r)

all arithmetic modulo 2**64.  The stream does not depend on the method, so
different estimators run on identical data, and any single replication
can be reproduced on its own.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .estimators import FastIcaConfig, fastica_deflation, fobi, permutation_init
from .indices import md_index
from .model import as_square

MASK64 = (1 << 64) - 1

LAPLACE_SCALE = 1 / math.sqrt(2)
LOGISTIC_SCALE = math.sqrt(3) / math.pi
BETA_STRETCH = math.sqrt(28)

FAMILIES = ("laplace", "logistic", "beta33", "normal")
TAIL_LIMIT = 40.0

RESULT_HEADER = ["method", "order", "n", "rep", "seed", "md", "npd2", "converged"]
SUMMARY_HEADER = ["method", "order", "n", "mean_npd2", "median_npd2", "q1", "q3",
                  "fail_count"]


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix64(master_seed, size_index, rep):
    h = splitmix64(int(master_seed) & MASK64)
    h = splitmix64(h ^ int(size_index))
    return splitmix64(h ^ int(rep))


@dataclass(frozen=True)
class SourceSpec:
    """A marginal distribution standardized to mean 0 and variance 1."""

    family: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown source family {self.family!r}; use one of {FAMILIES}")

    @property
    def support(self):
        if self.family == "beta33":
            return (-BETA_STRETCH / 2, BETA_STRETCH / 2)
        return (-TAIL_LIMIT, TAIL_LIMIT)

    def pdf(self, z):
        if self.family == "laplace":
            return np.exp(-np.abs(z) / LAPLACE_SCALE) / (2 * LAPLACE_SCALE)
        if self.family == "logistic":
            return stats.logistic.pdf(z, scale=LOGISTIC_SCALE)
        if self.family == "normal":
            return stats.norm.pdf(z)
        return stats.beta.pdf(z / BETA_STRETCH + 0.5, 3, 3) / BETA_STRETCH

    def sample(self, n, rng):
        if self.family == "laplace":
            return rng.laplace(0.0, LAPLACE_SCALE, n)
        if self.family == "logistic":
            return rng.logistic(0.0, LOGISTIC_SCALE, n)
        if self.family == "normal":
            return rng.standard_normal(n)
        return (rng.beta(3.0, 3.0, n) - 0.5) * BETA_STRETCH


def parse_sources(names):
    if isinstance(names, str):
        names = [s.strip() for s in names.split(",") if s.strip()]
    return tuple(n if isinstance(n, SourceSpec) else SourceSpec(n) for n in names)


def sample_source(spec, n, stream_seed):
    rng = stream_seed if isinstance(stream_seed, np.random.Generator) \
        else np.random.default_rng(stream_seed)
    return spec.sample(int(n), rng)


def sample_sources(sources, n, rng):
    return np.column_stack([s.sample(int(n), rng) for s in sources])


def fastica_order_config(kind, order, p, **kwargs):
    """FastICA settings extracting sources in order ``"b"`` (as given) or ``"a"`` (reversed)."""
    if order == "b":
        init = "identity"
    elif order == "a":
        init = permutation_init(range(p - 1, -1, -1))
    else:
        raise ValueError(f"order must be 'a' or 'b', got {order!r}")
    return FastIcaConfig(nonlinearity=kind, init=init, **kwargs)


@dataclass(frozen=True)
class SimulationConfig:
    sources: tuple
    sample_sizes: tuple
    replications: int
    method: str = "fobi"
    fastica_cfg: FastIcaConfig | None = None
    order: str = "-"
    mixing: np.ndarray | None = None
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sources", parse_sources(self.sources))
        p = len(self.sources)
        if p < 2:
            raise ValueError("need at least two sources")
        if self.method not in ("fobi", "fastica"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "fastica" and self.fastica_cfg is None:
            object.__setattr__(self, "fastica_cfg", FastIcaConfig())
        mixing = np.eye(p) if self.mixing is None else as_square(self.mixing, "mixing")
        if mixing.shape != (p, p):
            raise ValueError(f"mixing is {mixing.shape} but there are {p} sources")
        object.__setattr__(self, "mixing", mixing)
        sizes = tuple(int(n) for n in self.sample_sizes)
        if not sizes or min(sizes) < p + 1:
            raise ValueError("sample sizes must be given and exceed p")
        object.__setattr__(self, "sample_sizes", sizes)
        if int(self.replications) < 1:
            raise ValueError("replications must be >= 1")

    @property
    def method_label(self):
        if self.method == "fobi":
            return "fobi"
        return f"fastica-{self.fastica_cfg.nonlinearity}"


@dataclass(frozen=True)
class ResultRow:
    method: str
    order: str
    n: int
    rep: int
    seed: int
    md: float
    npd2: float
    converged: tuple | None  # None when the estimator raised

    @property
    def failed(self):
        return self.converged is None or not all(self.converged)

    def as_csv(self):
        conv = "error" if self.converged is None else ";".join(
            "1" if c else "0" for c in self.converged)
        return [self.method, self.order, str(self.n), str(self.rep), str(self.seed),
                f"{self.md:.17g}", f"{self.npd2:.17g}", conv]


@dataclass
class SimulationResult:
    rows: list = field(default_factory=list)

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_HEADER)
        for row in self.rows:
            w.writerow(row.as_csv())


def estimate(x, cfg):
    """Run the configured estimator; returns ``(gamma_hat, converged_flags)``."""
    if cfg.method == "fobi":
        return fobi(x).gamma, (True,) * x.shape[1]
    res = fastica_deflation(x, cfg.fastica_cfg)
    return res.gamma, tuple(bool(c) for c in res.converged)


def _replicate(cfg, size_index, rep, postprocess):
    n = cfg.sample_sizes[size_index]
    seed = mix64(cfg.master_seed, size_index, rep)
    p = len(cfg.sources)
    z = sample_sources(cfg.sources, n, np.random.default_rng(seed))
    x = z @ cfg.mixing.T
    try:
        gamma, conv = estimate(x, cfg)
        if postprocess is not None:
            gamma = postprocess(gamma)
        md = md_index(gamma @ cfg.mixing)
    except (ValueError, ArithmeticError, RuntimeError, np.linalg.LinAlgError):
        return ResultRow(cfg.method_label, cfg.order, n, rep, seed,
                         math.nan, math.nan, None)
    return ResultRow(cfg.method_label, cfg.order, n, rep, seed, md,
                     n * (p - 1) * md ** 2, conv)


def run_study(cfg, threads=1, postprocess=None):
    """Replicate estimation and MD index computation over the configured grid.

    Rows come back in (sample size, replication) order whatever ``threads``
    is.  ``postprocess`` optionally maps each ``gamma_hat`` before the index
    is taken.
    """
    tasks = [(s, r) for s in range(len(cfg.sample_sizes))
             for r in range(int(cfg.replications))]
    if threads <= 1:
        rows = [_replicate(cfg, s, r, postprocess) for s, r in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda t: _replicate(cfg, *t, postprocess), tasks))
    return SimulationResult(rows)


@dataclass(frozen=True)
class SummaryRow:
    method: str
    order: str
    n: int
    count: int
    mean_npd2: float
    median_npd2: float
    q1: float
    q3: float
    fail_count: int

    def as_csv(self):
        return [self.method, self.order, str(self.n)] + [
            f"{v:.17g}" for v in (self.mean_npd2, self.median_npd2, self.q1, self.q3)
        ] + [str(self.fail_count)]


def summarize(result):
    """Mean, median and quartiles of n (p-1) D^2 per (method, order, n)."""
    groups = {}
    for row in result.rows:
        groups.setdefault((row.method, row.order, row.n), []).append(row)
    out = []
    for (method, order, n), rows in groups.items():
        vals = np.array([r.npd2 for r in rows if r.converged is not None])
        fails = sum(r.failed for r in rows)
        if len(vals):
            q1, med, q3 = np.percentile(vals, [25, 50, 75])
            mean = vals.mean()
        else:
            q1 = med = q3 = mean = math.nan
        out.append(SummaryRow(method, order, n, len(rows), float(mean), float(med),
                              float(q1), float(q3), fails))
    return out


def write_summary_csv(summary, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for row in summary:
        w.writerow(row.as_csv())
