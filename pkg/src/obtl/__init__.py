"""Bayesian transfer-learning classifier built on hypergeometric functions of matrix argument.

Modules
-------
special     zonal polynomials, matrix-argument pFq series, Laplace 2F1
model       SPD helpers, joint Wishart prior, samplers
inference   posteriors, effective densities, OBTL and OBC decision rules
simulator   synthetic Monte-Carlo sweeps
io          CSV datasets, PCA preprocessing, config and model files
cli         ``obtl`` command-line entry point
"""

from .errors import (
    ConfigError,
    CurvatureError,
    DataError,
    DomainError,
    FactorizationError,
    NumericError,
    ObtlError,
    SaddlePointError,
    SeriesConvergenceError,
    TruncationWarning,
)
from .inference import (
    ClassPriorConfig,
    TrainedOBC,
    TrainedOBTL,
    classify_obc,
    classify_obtl,
    fit_obc,
    fit_obtl,
    log_effective_density_obc,
    log_effective_density_obtl,
    obc_posterior_update,
    posterior_update,
    sufficient_statistics,
)
from .model import ClassHyperparameters, ScalarPriorSpec, SpdMatrix, build_hyperparameters
from .simulator import ErrorCurve, ExperimentConfig, run_experiment
from .special import HypergeomParams, SeriesControl, hypergeom_series, log_gauss_2f1_laplace

__version__ = "0.1.0"
