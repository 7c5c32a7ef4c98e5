"""Causal discovery for nonlinear time series.

Convergent cross mapping (state-space reconstruction, simplex projection,
bootstrap convergence testing), a Granger-causality baseline, a synthetic
ground-truth generator, and a preprocessing pipeline, exposed as a library
and the ``ccmcausal`` command-line tool.
"""

from ._kernels import backend_name
from .ccm import (CausalGraph, CcmConfig, CcmResult, ccm_curve, ccm_pairwise,
                  convergence_diagnostic, cross_map)
from .dataset import MultivariateDataset, TimeSeries, load_csv, write_csv
from .embedding import (EmbeddingConfig, NeighborSet, ShadowManifold, embed,
                        neighbors, select_embedding, simplex_forecast,
                        simplex_weights)
from .granger import GrangerResult, granger_pairwise, granger_test
from .numerics import RandomStream, SummaryStats, f_sf, pearson, reg_inc_beta, summary
from .preprocess import (DecompositionResult, StationarityReport, adf_test,
                         decompose_additive, deseasonalize, exp_smooth,
                         split_summary_test, standardize, stationarity_report)
from .synthgen import GroundTruthGraph, SynthConfig, generate, ground_truth

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "CausalGraph", "CcmConfig", "CcmResult", "ccm_curve", "ccm_pairwise",
    "convergence_diagnostic", "cross_map",
    "MultivariateDataset", "TimeSeries", "load_csv", "write_csv",
    "EmbeddingConfig", "NeighborSet", "ShadowManifold", "embed", "neighbors",
    "select_embedding", "simplex_forecast", "simplex_weights",
    "GrangerResult", "granger_pairwise", "granger_test",
    "RandomStream", "SummaryStats", "f_sf", "pearson", "reg_inc_beta", "summary",
    "DecompositionResult", "StationarityReport", "adf_test",
    "decompose_additive", "deseasonalize", "exp_smooth", "split_summary_test",
    "standardize", "stationarity_report",
    "GroundTruthGraph", "SynthConfig", "generate", "ground_truth",
    "__version__",
]
