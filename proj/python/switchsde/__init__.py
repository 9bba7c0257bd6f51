"""Euler-Maruyama schemes for regime-switching diffusions.

Thin python surface over the C++ core: chain and scheme simulation,
Perron-Frobenius / principal-eigenvalue / M-matrix stepsize certificates,
and Wasserstein invariant-measure experiments.
"""

from switchsde._core import (  # noqa: F401
    BuiltinModel,
    GeneratorMatrix,
    RegimeBounds,
    SpectralCertificate,
    StationaryDistribution,
    SwitchSdeError,
    alpha_additive,
    averaging_condition,
    beta_multiplicative,
    build_qp,
    certify,
    condition_star6,
    contraction_experiment,
    convergence_study,
    delta_max_additive,
    delta_max_multiplicative,
    estimate_invariant,
    eta_p_and_eigvec,
    h_matrix,
    hybrid_distance,
    is_nonsingular_m_matrix,
    is_reversible,
    make_birth_death_linear,
    make_certificate,
    make_switching_linear3,
    make_switching_ou,
    p0_threshold,
    partition_certificate,
    principal_eigenvalue,
    simulate,
    stationary_distribution,
    test_vector_rate,
    wasserstein_p,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
