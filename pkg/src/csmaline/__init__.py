"""Throughput, fairness and simulation for linear CSMA networks."""
__version__ = "0.1.0"

from .errors import ConvergenceFailure, CsmaLineError, EnumerationTooLarge, InvalidConfig, InvalidRange
from .model import (
    CapacityMatrix,
    Equal,
    Explicit,
    Fair,
    LineNetworkConfig,
    StateSpace,
    capacity_matrix,
    count_states,
    enumerate_states,
    is_feasible,
    load_config,
    neighbor_count,
    neighbor_counts,
)
from .exact import StationaryDistribution, stationary_distribution, throughput_exact
from .recursion import ZSequence, avg_throughput_equal, throughput_recursive, z_closed_forms_beta1, z_sequence
from .spectral import (
    DIVERGENT,
    RootSet,
    SeriesRoots,
    alpha_matching,
    avg_throughput_finite,
    avg_throughput_limit,
    characteristic_roots,
    series_roots,
    xi,
    z_asymptote,
    z_spectral,
)
from .fairness import FairRateVector, fair_rates, fair_throughput, traffic_expansions, verify_fairness
from .combinatorics import ActiveCountTable, active_count_table, oscillation_check, throughput_from_counts
from .simulator import (
    Relay,
    Saturated,
    SimConfig,
    SimReport,
    combine_reports,
    replicate,
    simulate,
    simulate_relay,
    simulate_saturated,
    stability_threshold,
)

__all__ = [
    "__version__",
    "ConvergenceFailure",
    "CsmaLineError",
    "EnumerationTooLarge",
    "InvalidConfig",
    "InvalidRange",
    "CapacityMatrix",
    "Equal",
    "Explicit",
    "Fair",
    "LineNetworkConfig",
    "StateSpace",
    "capacity_matrix",
    "count_states",
    "enumerate_states",
    "is_feasible",
    "load_config",
    "neighbor_count",
    "neighbor_counts",
    "StationaryDistribution",
    "stationary_distribution",
    "throughput_exact",
    "ZSequence",
    "avg_throughput_equal",
    "throughput_recursive",
    "z_closed_forms_beta1",
    "z_sequence",
    "DIVERGENT",
    "RootSet",
    "SeriesRoots",
    "alpha_matching",
    "avg_throughput_finite",
    "avg_throughput_limit",
    "characteristic_roots",
    "series_roots",
    "xi",
    "z_asymptote",
    "z_spectral",
    "FairRateVector",
    "fair_rates",
    "fair_throughput",
    "traffic_expansions",
    "verify_fairness",
    "ActiveCountTable",
    "active_count_table",
    "oscillation_check",
    "throughput_from_counts",
    "Relay",
    "Saturated",
    "SimConfig",
    "SimReport",
    "combine_reports",
    "replicate",
    "simulate",
    "simulate_relay",
    "simulate_saturated",
    "stability_threshold",
]
