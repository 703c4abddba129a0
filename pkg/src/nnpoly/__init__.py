"""Explicit polynomial surrogates for single-hidden-layer regression networks.

Builds a degree-q multivariate polynomial whose coefficients are computed in
closed form from the weights of a trained network with one hidden layer and
a linear output, by expanding the activation's series at zero.  Includes the
activation series machinery, a small resilient-backpropagation trainer, a
least-squares polynomial baseline, and a seeded simulation harness.
"""

from .activations import TaylorSeries, ValidRange, taylor_coeffs, taylor_eval, valid_range
from .nn import NetworkWeights, TrainConfig, TrainTrace, forward, potentials, predict, train_rprop
from .poly import (
    CoefficientDistance,
    FitReport,
    MultiIndex,
    Polynomial,
    affine_substitute,
    coefficient_distance,
    load_polynomial,
    monomials_up_to,
    ols_fit,
    output_affine,
    save_polynomial,
)
from .simlab import (
    BatchGrid,
    DataGenConfig,
    ExperimentConfig,
    ExperimentRecord,
    ScalingSpec,
    fit_scaling,
    generate_data,
    run_batch,
    run_experiment,
    run_pipeline,
    split,
    surface_grid,
    surface_study,
)
from .transcode import (
    CoverageReport,
    TranscodeResult,
    coverage,
    nn_to_poly,
    rescale_to_original,
    taylor_truncated_output,
)

__version__ = "0.1.0"

__all__ = [
    "TaylorSeries",
    "ValidRange",
    "taylor_coeffs",
    "taylor_eval",
    "valid_range",
    "NetworkWeights",
    "TrainConfig",
    "TrainTrace",
    "forward",
    "potentials",
    "predict",
    "train_rprop",
    "CoefficientDistance",
    "FitReport",
    "MultiIndex",
    "Polynomial",
    "affine_substitute",
    "coefficient_distance",
    "load_polynomial",
    "monomials_up_to",
    "ols_fit",
    "output_affine",
    "save_polynomial",
    "BatchGrid",
    "DataGenConfig",
    "ExperimentConfig",
    "ExperimentRecord",
    "ScalingSpec",
    "fit_scaling",
    "generate_data",
    "run_batch",
    "run_experiment",
    "run_pipeline",
    "split",
    "surface_grid",
    "surface_study",
    "CoverageReport",
    "TranscodeResult",
    "coverage",
    "nn_to_poly",
    "rescale_to_original",
    "taylor_truncated_output",
    "__version__",
]
