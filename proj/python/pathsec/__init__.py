"""Path security assessment toolkit.

Compressed-sensing traffic sampling, residual-subspace anomaly detection,
entropy-based attack-signature matching, and per-path assurance scoring.
All heavy lifting happens in the compiled `_core` extension.
"""

from _core import (  # noqa: F401
    PathsecError,
    SensingMatrix,
    assess_window,
    assurance_factor,
    build_sensing_matrix,
    choose_measurement_count,
    coherence,
    compress,
    default_graph_throughput,
    detect,
    feature_names,
    generate_window,
    min_measurements,
    principal_subspace,
    q_threshold,
    reconstruct,
    reconstruction_mse,
    ric_estimate,
    signature_match,
    threat_score,
)

__all__ = [
    "PathsecError",
    "SensingMatrix",
    "assess_window",
    "assurance_factor",
    "build_sensing_matrix",
    "choose_measurement_count",
    "coherence",
    "compress",
    "default_graph_throughput",
    "detect",
    "feature_names",
    "generate_window",
    "min_measurements",
    "principal_subspace",
    "q_threshold",
    "reconstruct",
    "reconstruction_mse",
    "ric_estimate",
    "signature_match",
    "threat_score",
]

__version__ = "0.1.0"
