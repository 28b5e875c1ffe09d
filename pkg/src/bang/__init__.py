"""Causal discovery in linear non-Gaussian models with hidden confounding.

Estimates a bow-free acyclic path diagram (directed edges plus bidirected
confounding edges) from observational data by testing independence of
higher-order moments of partially adjusted residuals.
"""

from .algorithm import DiscoveryResult, DiscoveryState, discover, discover_oracle, run_bang
from .config import DiscoveryConfig
from .graph import MixedGraph, RelationKind, from_edges, random_bap, score, validate
from .independence import OracleBackend, SampleBackend, ShadowBackend, el_test, threshold_test
from .moments import MomentOracle, debiased_effect, marginal_effects
from .sem import SemParameters, draw_parameters, implied_covariance, sample_data

__version__ = "0.1.0"

__all__ = [
    "DiscoveryConfig", "DiscoveryResult", "DiscoveryState", "MixedGraph", "MomentOracle",
    "OracleBackend", "RelationKind", "SampleBackend", "SemParameters", "ShadowBackend",
    "debiased_effect", "discover", "discover_oracle", "draw_parameters", "el_test",
    "from_edges", "implied_covariance", "marginal_effects", "random_bap", "run_bang",
    "sample_data", "score", "threshold_test", "validate",
]
