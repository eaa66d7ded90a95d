"""Decay-time statistics of non-Hermitian quantum systems.

A Hermitian Hamiltonian with a decay channel loses amplitude at rate Gamma.
This package reduces such systems to distinct levels with overlaps, traces
the winding curve whose turn count w equals the level count, locates the
poles and residuals of the dissipation amplitude, and turns them into the
full decay-time statistics, including the quantized mean w / (2 Gamma) and
its breakdown near critical points.
"""

from .errors import AccuracyError, ConvergenceError, QDecayError, SingularityError
from .models import (
    MultiChannelSystem,
    TwoLevelParams,
    mean_time_by_quadrature,
    propagate,
    ring_preparation_state,
    tight_binding_line,
    tight_binding_ring,
    two_level_closed_forms,
    two_level_spectral_model,
    two_level_system,
)
from .poles import (
    PoleSet,
    asymptotic_pole_small_charge,
    asymptotic_poles_large_gamma,
    asymptotic_poles_near_degenerate,
    asymptotic_poles_small_gamma,
    characteristic_polynomial,
    find_poles,
)
from .resolvent import (
    PotentialField,
    WindingCurve,
    compute_winding,
    potential_gradient,
    potential_value,
    resolvent_at,
    resolvent_derivative,
    winding_map,
)
from .spectral import (
    EigenDecomposition,
    QuantumSystem,
    SpectralModel,
    build_spectral_model,
    eigendecompose,
    jacobi_eigh,
    subspace_rank,
    total_subspace_rank,
)
from .stats import (
    ConditionalMeanCurve,
    DecayTimeStats,
    conditional_mean,
    conditional_mean_curve,
    crossover_prediction,
    decay_density,
    decay_time_stats,
    detection_probability,
    detection_probability_small_gamma,
    extract_w_apparent,
    moment,
    moment_by_quadrature,
    predicted_mean,
    scaling_function,
    two_level_crossover_asymptote,
    variance,
    wavefunction_at,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
