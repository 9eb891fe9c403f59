"""Numerics for the fractional Poisson process and its fractional integral.

Closed-form distributions and moments, an exact renewal-path simulator, and
a Monte Carlo verification harness, exposed both as a library and through
the ``fracpoisson`` command line tool.
"""

from .distributions import (
    BivariateQuery,
    FppParams,
    bivariate_pmf,
    conditional_binomial,
    conditional_trinomial,
    interarrival_density,
    pmf,
    survival,
    waiting_time_density,
)
from .errors import (
    EmptyInputError,
    EvaluationOverflowError,
    InvalidIntervalError,
    InvalidParamError,
    NonConvergenceError,
    ToleranceNotMet,
)
from .fracint import (
    FracIntegralSpec,
    rl_integral_mc_moments,
    rl_integral_of_path,
    rl_integral_samples,
)
from .moments import (
    MomentReport,
    cond_mean_frac_integral,
    cond_mean_integrated_power,
    cond_mixed_moment_poisson,
    cond_second_moment_frac_integral,
    cond_var_frac_integral,
    mean_frac_integral,
    mean_integrated_power,
    second_moment_frac_integral_poisson,
    var_frac_integral_poisson,
    verify_moment,
)
from .quadrature import QuadResult, QuadSpec, integrate
from .simulate import (
    CountingPath,
    SimConfig,
    conditional_jump_times,
    count_moments,
    empirical_cf,
    integral_samples,
    iter_path_chunks,
    make_rng,
    path_integral,
    random_sum_integral,
    random_sum_samples,
    sample_fpp_path,
    sample_ml_interarrival,
    sample_poisson_path,
    worker_rngs,
)
from .skellam import (
    SkellamParams,
    integral_diff_cf,
    integral_diff_samples,
    sample_integral_diff,
    skellam_pmf,
)
from .special import MLSpec, bessel_i, log_gamma, log_pochhammer, ml3

__all__ = [
    "EmptyInputError",
    "EvaluationOverflowError",
    "InvalidIntervalError",
    "InvalidParamError",
    "NonConvergenceError",
    "ToleranceNotMet",
    "MLSpec",
    "bessel_i",
    "log_gamma",
    "log_pochhammer",
    "ml3",
    "QuadSpec",
    "QuadResult",
    "integrate",
    "FppParams",
    "BivariateQuery",
    "pmf",
    "survival",
    "interarrival_density",
    "waiting_time_density",
    "conditional_binomial",
    "conditional_trinomial",
    "bivariate_pmf",
    "CountingPath",
    "SimConfig",
    "make_rng",
    "worker_rngs",
    "sample_ml_interarrival",
    "sample_fpp_path",
    "sample_poisson_path",
    "path_integral",
    "random_sum_integral",
    "empirical_cf",
    "iter_path_chunks",
    "count_moments",
    "integral_samples",
    "random_sum_samples",
    "conditional_jump_times",
    "FracIntegralSpec",
    "rl_integral_of_path",
    "rl_integral_samples",
    "rl_integral_mc_moments",
    "MomentReport",
    "mean_frac_integral",
    "var_frac_integral_poisson",
    "second_moment_frac_integral_poisson",
    "cond_mean_frac_integral",
    "cond_second_moment_frac_integral",
    "cond_var_frac_integral",
    "cond_mixed_moment_poisson",
    "cond_mean_integrated_power",
    "mean_integrated_power",
    "verify_moment",
    "SkellamParams",
    "skellam_pmf",
    "integral_diff_cf",
    "sample_integral_diff",
    "integral_diff_samples",
]
