"""Greedy sparse approximation in finite weighted L_p spaces.

Modules:
    space       -- weighted L_p model: norms, norming functionals, smoothness
    dictionary  -- trigonometric / Haar / gaussian / custom dictionaries
    analysis    -- coherence, RIP, unconditionality and ell1-incoherence constants
    greedy      -- TGA, WOMP, WCGA, the Chebyshev projector, rate bounds
    oracle      -- exact best m-term error and Lebesgue-type ratios
    bilinear    -- greedy rank-one deflation for matrices and the SVD tail oracle
    harness     -- reproducible experiment runners and the CLI entry point
    kernels     -- compiled/pure scan kernels behind the oracle and analyzer
"""

__version__ = "0.1.0"

from .analysis import (
    PropertyReport,
    analyze_dictionary,
    check_domination,
    coherence,
    ell1_incoherence_V,
    ell1_incoherence_V_signal,
    nikolskii_C1,
    rip_delta,
    riesz_U_from_delta,
    transferred_constants,
    unconditionality_U,
)
from .bilinear import Matrix2D, greedy_rank_one, theta_M
from .errors import ConfigurationError, DomainError, SolverError, StructuralError
from .greedy import (
    ChebyshevConfig,
    GreedyTrace,
    WeaknessPolicy,
    chebyshev_project,
    ell1_tail_bound,
    sparse_decay_bound,
    tga,
    wcga,
    womp,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    compile_budget,
    load_config,
    run_experiment,
)
from .oracle import OracleConfig, lebesgue_ratio, sigma_m_exact
from .space import (
    GridSpace,
    SmoothnessConstants,
    estimate_modulus,
    norm,
    norming_functional,
    norming_vector,
    smoothness_constants,
)

__all__ = [
    "__version__",
    "ConfigurationError",
    "DomainError",
    "SolverError",
    "StructuralError",
    "PropertyReport",
    "analyze_dictionary",
    "check_domination",
    "coherence",
    "ell1_incoherence_V",
    "ell1_incoherence_V_signal",
    "nikolskii_C1",
    "rip_delta",
    "riesz_U_from_delta",
    "transferred_constants",
    "unconditionality_U",
    "Matrix2D",
    "greedy_rank_one",
    "theta_M",
    "ChebyshevConfig",
    "GreedyTrace",
    "WeaknessPolicy",
    "chebyshev_project",
    "ell1_tail_bound",
    "sparse_decay_bound",
    "tga",
    "wcga",
    "womp",
    "ExperimentConfig",
    "ExperimentResult",
    "compile_budget",
    "load_config",
    "run_experiment",
    "OracleConfig",
    "lebesgue_ratio",
    "sigma_m_exact",
    "GridSpace",
    "SmoothnessConstants",
    "estimate_modulus",
    "norm",
    "norming_functional",
    "norming_vector",
    "smoothness_constants",
]
