"""Numerical laboratory for the L^p behavior of Gaussian random series
over orthonormal eigenbases: the radial Bessel basis of the unit ball and
a constant-modulus baseline.
"""

from .analysis import (
    CONVERGENT,
    DIVERGENT,
    INCONCLUSIVE,
    ConstantModulusFamily,
    DivergenceVerdict,
    MomentConstants,
    NoSuchSequenceError,
    PcrBracket,
    RadialFamily,
    alpha_star,
    bracket_pcr,
    classify_divergence,
    construct_diverging_sequence,
    divergence_exponent_bound,
    expected_lp_pth_power,
    fernique_probe,
    gibbs_weight,
    h_half_partial_energy,
    mc_lp_pth_power,
    moment_constants,
    sample_gibbs_weights,
    theorem_series_values,
)
from .basis import (
    ConstantModulusBasis,
    RadialBasis,
    build_radial_basis,
    concentration_radius,
    delta_bound,
    eval_e,
    lp_norm_of_e,
    mode_norm_scan,
    sup_norm_of_e,
)
from .quadrature import QuadratureGrid, ResolutionError, build_grid, lp_norm
from .series import (
    Explicit,
    InverseZero,
    PowerLaw,
    SeriesDraw,
    Sparse,
    draw_series,
    l2_cauchy_increment,
    pointwise_field_samples,
    pointwise_sigma2,
    sample_complex_gaussian,
    stream,
)
from .specfun import (
    BracketingError,
    DomainError,
    ZeroTable,
    bessel_j,
    bessel_zeros,
    gamma,
    kernel_g,
    kernel_g_at_zero,
    order_for_dimension,
)

__version__ = "0.1.0"
