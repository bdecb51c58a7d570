"""ICA unmixing estimators (FOBI, deflation fastICA) and performance indices.

The centrepiece is the minimum distance index :func:`md_index`, together
with its asymptotic theory and a seeded Monte Carlo harness.
"""

from .asymptotics import (AsvMatrix, MixtureChiSquare, compute_moments, empirical_asv,
                          fastica_asv, md_limit_mixture, offdiag_trace_target,
                          sample_mixture)
from .estimators import (FastIcaConfig, fastica_deflation, fobi, nonlinearity_eval)
from .indices import (amari_index, gce_index, isr_index, md_index,
                      md_index_column_variant, solve_lsap_max)
from .model import (EquivalenceTransform, compose, gain, inverse, materialize, off,
                    row_max_standardize)
from .scatter import cov_scatter, fourth_moment_scatter, whiten
from .simulate import (SimulationConfig, SourceSpec, parse_sources, run_study, sample_sources,
                       summarize)

__version__ = "0.1.0"
