"""Monte Carlo quadrature with orthogonal-polynomial determinantal node sets.

The pieces compose in sampling order: a ProductMeasure fixes per-dimension
orthonormal families, CDKernel projects onto the first N multivariate basis
functions, sample() draws the N nodes exactly, and estimate() turns them
into an unbiased quadrature rule whose variance decays like N^(-(1+1/d)).
"""

from .estimator import Estimate, Integrand, estimate, importance_estimate
from .kernel import CDKernel, Marginal, ProductMeasure, equilibrium_density
from .multiindex import MultiIndexBasis, graded_lex_key, graded_lex_less
from .oracle import (
    PolynomialStatistic,
    cheb_triple_product,
    cov_exact,
    cov_limit_cheby,
    var_double_integral,
)
from .orthopoly import (
    JacobiParams,
    ParameterDomainError,
    RecurrenceTable,
    chebyshev_recurrence,
    eval_phi,
    eval_phi_all,
    inner_product_x_power,
    jacobi_mass,
    jacobi_recurrence,
    legendre_recurrence,
    nevai_diagnostic,
)
from .sampler import (
    BoundViolationError,
    ChainState,
    DegenerateStateError,
    RejectionBudgetError,
    SamplerConfig,
    SamplerError,
    WeightedSample,
    conditional_unnormalized_density,
    derive_rng,
    rejection_bound,
    sample,
    sample_equilibrium_point,
)
from .variance import (
    ChebCoeffs,
    SeriesValue,
    cheb_coeffs,
    dirichlet_bound,
    omega_f_omega_sq,
    sigma_f_sq,
)
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    RegressionDegenerateError,
    SlopeFit,
    bump,
    bump_ground_truth,
    bump_integrand,
    ks_normality_p,
    loglog_regression,
    run_variance_decay,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
