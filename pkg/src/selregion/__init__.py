"""Selection-region relaying in random multihop networks: closed forms, optimisation and simulation."""

__version__ = "0.1.0"

from .errors import InvalidParameterError, ModelDomainError, NoRelayError, NumericalError
from .geometry import AnnularSector, Disk, Point2, PointField, Region, contains, sample_ppp, sample_nearest_in_region
from .analytic import (
    DerivedConstants,
    NetworkConfig,
    SelectionRegion,
    composite_k,
    db_to_linear,
    derived_constants,
    expected_density_numeric,
    expected_density_of_progress,
    hop_distance_cdf,
    incomplete_gamma_3_2,
    interference_constant_t,
    success_probability,
)
from .optimize import (
    BoundResult,
    OptimizationResult,
    joint_residual,
    optimal_rm_given_phi,
    optimize_joint,
    optimize_phi_at_rm,
    rm_from_phi_closed_form,
    rm_upper_bound,
    stationarity_residual_rm,
)
from .simulate import (
    EstimateWithCI,
    HopOutcome,
    ProtocolSpec,
    RouteTrace,
    candidate_count_ratio,
    estimate_density_of_progress,
    estimate_success_probability,
    simulate_hop,
    simulate_route,
    simulate_sir_success,
    truncation_audit,
)
from .experiments import ExperimentConfig, ResultTable, build_config
