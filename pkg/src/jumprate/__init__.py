"""Marked renewal process simulation and nonparametric jump-rate estimation.

The package simulates processes given by a jump rate, a transition kernel
and a deterministic censorship deadline, and estimates the cumulative rate
and the jump rate from a single long trajectory: a Nelson-Aalen type
estimator per partition cell, kernel-smoothed into a rate estimate.
"""

from .counting import (CellData, StepFunction, cell_events, count_function,
                       empirical_measure, generalized_inverse, risk_function)
from .errors import NumericError, ParseError
from .estimate import (CumulativeEstimate, GlobalCumulative, confidence_band,
                       estimate_cell, global_cumulative, nelson_aalen,
                       variance_estimate)
from .metrics import (ReplicateSummary, boxplot_summary, cell_rate_bound,
                      integrated_square_error, mc_oracle_l, sup_distance)
from .model import (Diagnostics, ProcessSpec, StateSpace, constant_model,
                    cumulative_rate, density, machine_model, model_by_name,
                    survival, validate_characteristics)
from .partition import Cell, Partition, cell_horizon, uniform_partition
from .simulate import (Seed, Trajectory, derive_seed, read_trajectory_csv,
                       sample_sojourn, sample_transition, simulate_chain,
                       write_trajectory_csv)
from .smooth import (GlobalRate, Kernel, SampledCurve, bandwidth_from_visits,
                     biweight, epanechnikov, global_rate, kernel_by_name,
                     kernel_smooth, triangular)

__version__ = "0.1.0"

__all__ = [
    "CellData", "StepFunction", "cell_events", "count_function",
    "empirical_measure", "generalized_inverse", "risk_function",
    "NumericError", "ParseError",
    "CumulativeEstimate", "GlobalCumulative", "confidence_band",
    "estimate_cell", "global_cumulative", "nelson_aalen", "variance_estimate",
    "ReplicateSummary", "boxplot_summary", "cell_rate_bound",
    "integrated_square_error", "mc_oracle_l", "sup_distance",
    "Diagnostics", "ProcessSpec", "StateSpace", "constant_model",
    "cumulative_rate", "density", "machine_model", "model_by_name",
    "survival", "validate_characteristics",
    "Cell", "Partition", "cell_horizon", "uniform_partition",
    "Seed", "Trajectory", "derive_seed", "read_trajectory_csv",
    "sample_sojourn", "sample_transition", "simulate_chain",
    "write_trajectory_csv",
    "GlobalRate", "Kernel", "SampledCurve", "bandwidth_from_visits",
    "biweight", "epanechnikov", "global_rate", "kernel_by_name",
    "kernel_smooth", "triangular",
    "__version__",
]
