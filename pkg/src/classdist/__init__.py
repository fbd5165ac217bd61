"""Maximum-entropy model for the size distribution of classes.

Fits the two-parameter class-probability model to sorted frequency data,
compares it with Zipf, exponential and legacy baselines, and estimates
Monte Carlo p-values for the fit error.
"""

__version__ = "0.1.0"

from .baselines import BaselineFit, Method, fit_baseline  # noqa: E402
from .fitting import EmpiricalDistribution, FitConfig, FitResult, error_metric, fit, preprocess  # noqa: E402
from .model import ModelParams, class_probabilities  # noqa: E402
from .significance import SignificanceReport, p_value  # noqa: E402
from .special import alpha, lerch_phi, partition_z, tau  # noqa: E402

__all__ = [
    "BaselineFit",
    "EmpiricalDistribution",
    "FitConfig",
    "FitResult",
    "Method",
    "ModelParams",
    "SignificanceReport",
    "alpha",
    "class_probabilities",
    "error_metric",
    "fit",
    "fit_baseline",
    "lerch_phi",
    "p_value",
    "partition_z",
    "preprocess",
    "tau",
]
