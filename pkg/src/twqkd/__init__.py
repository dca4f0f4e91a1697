"""Secret-key-rate engine for two-way CV-QKD with virtual photon subtraction.

Numerical security analysis of the two-way continuous-variable QKD protocol
(and its one-way baseline) whose sources may be conditioned on virtual
photon subtraction: covariance assembly through both channels, Bob's
estimator transform, mutual information, Holevo bound under collective
entangling-cloner attacks, and the parameter sweeps built on top.

The hot numeric kernels run on a compiled extension when available and on
a NumPy fallback otherwise; see ``twqkd.backend_name()``.
"""
from ._backend import BACKEND
from .analysis import (
    OptimizeResult,
    SweepPoint,
    SweepResult,
    best_rate,
    compare_schemes,
    config_at_distance,
    distance_to_channel,
    max_distance,
    one_way_max_distance,
    one_way_tolerable_excess_noise,
    optimize_tps,
    sweep_distance,
    sweep_one_way_distance,
    tolerable_excess_noise,
)
from .gaussian import (
    CovarianceMatrix,
    SymplecticTransform,
    apply_symplectic,
    beam_splitter_symplectic,
    g_entropy,
    homodyne_condition,
    symplectic_eigenvalues,
    tmsv_covariance,
)
from .protocols import (
    ChannelSpec,
    KeyRateReport,
    ProtocolConfig,
    assemble_two_way_state,
    entangling_cloner_apply,
    gamma_mu_transform,
    heterodyne_split,
    holevo_bound,
    mutual_information,
    one_way_key_rate,
    optimal_mu,
    two_way_key_rate,
)
from .sources import (
    SourceSpec,
    SubtractionSpec,
    TwoModeCovariance,
    fock_oracle_covariance,
    integral_oracle_covariance,
    selection_probability,
    subtracted_covariance,
    success_probability,
)

__version__ = "0.1.0"


def backend_name() -> str:
    """Which kernel backend this process is using: 'cython' or 'python'."""
    return BACKEND


__all__ = [
    "BACKEND",
    "ChannelSpec",
    "CovarianceMatrix",
    "KeyRateReport",
    "OptimizeResult",
    "ProtocolConfig",
    "SourceSpec",
    "SubtractionSpec",
    "SweepPoint",
    "SweepResult",
    "SymplecticTransform",
    "TwoModeCovariance",
    "apply_symplectic",
    "assemble_two_way_state",
    "backend_name",
    "beam_splitter_symplectic",
    "best_rate",
    "compare_schemes",
    "config_at_distance",
    "distance_to_channel",
    "entangling_cloner_apply",
    "fock_oracle_covariance",
    "g_entropy",
    "gamma_mu_transform",
    "heterodyne_split",
    "holevo_bound",
    "homodyne_condition",
    "integral_oracle_covariance",
    "max_distance",
    "mutual_information",
    "one_way_key_rate",
    "one_way_max_distance",
    "one_way_tolerable_excess_noise",
    "optimal_mu",
    "optimize_tps",
    "selection_probability",
    "subtracted_covariance",
    "success_probability",
    "sweep_distance",
    "sweep_one_way_distance",
    "symplectic_eigenvalues",
    "tmsv_covariance",
    "two_way_key_rate",
    "tolerable_excess_noise",
]
