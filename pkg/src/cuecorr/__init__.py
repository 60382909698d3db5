"""Exact and asymptotic moments of smoothed local correlations of CUE eigenangles."""

__version__ = "0.1.0"

from .asymptotics import (mean_asymptotic, parametrize_subspace, variance_asymptotic,
                          variance_closed_form_pairs)
from .cumulants import c_rescaled, kappa_batch, kappa_closed_form, kappa_exact
from .errors import (CapacityError, ConfigError, CueCorrError, NumericalConsistencyError,
                     ToleranceError)
from .partitions import (SetPartition, WindowStructure, classify_partition, dim_L_pi,
                         enumerate_connecting_partitions, enumerate_set_partitions,
                         moments_from_cumulants)
from .sampler import (ExperimentConfig, MomentReport, brute_force_joint_moment,
                      monte_carlo_clt_experiment, sample_cue_eigenangles)
from .statistic import (mean_closed_form_pairs, mean_exact, power_traces, statistic_direct,
                        statistic_fourier, variance_exact)
from .testfunctions import TestFunction, gaussian, parse_function_spec, triangle

__all__ = [
    "CapacityError", "ConfigError", "CueCorrError", "NumericalConsistencyError", "ToleranceError",
    "SetPartition", "WindowStructure", "classify_partition", "dim_L_pi",
    "enumerate_connecting_partitions", "enumerate_set_partitions", "moments_from_cumulants",
    "c_rescaled", "kappa_batch", "kappa_closed_form", "kappa_exact",
    "TestFunction", "gaussian", "parse_function_spec", "triangle",
    "mean_closed_form_pairs", "mean_exact", "power_traces", "statistic_direct",
    "statistic_fourier", "variance_exact",
    "mean_asymptotic", "parametrize_subspace", "variance_asymptotic", "variance_closed_form_pairs",
    "ExperimentConfig", "MomentReport", "brute_force_joint_moment", "monte_carlo_clt_experiment",
    "sample_cue_eigenangles",
]
