"""symkit: a numerical laboratory for symmetric decreasing rearrangement.

Grid fields and sets, symmetrization operators, the integral functionals the
classical rearrangement inequalities compare, sharp-constant evaluators, and
tolerance-controlled experiment suites that verify every in-scope inequality.
"""

from .field import (
    DistributionFunction,
    FieldFormatError,
    Grid,
    GridSet,
    ScalarField,
    distribution_function,
    layer_cake_reconstruct,
    load,
    load_field,
    load_set,
    measure,
    save,
)
from .functionals import (
    BLLSpec,
    InsufficientPaddingError,
    JExpansionF,
    MCEstimate,
    MinF,
    PiecewiseLinearProfile,
    PowerProfile,
    ProductF,
    UnboundedRegionError,
    bll_integral,
    choquard_energy,
    convolve,
    expansion_gaps,
    fractional_perimeter,
    fractional_seminorm,
    gradient_pnorm,
    hanner_sum,
    heat_pairing,
    lp_norm,
    minkowski_content,
    pairing,
    perimeter,
    pointwise_decay_check,
    power_energy,
    riesz_energy,
    riesz_triple,
    supermodular_pairing,
    weighted_F_energy,
)
from .kernels import (
    BallIndicator,
    FracKernel,
    HeatGaussian,
    PowerGrowth,
    PowerLaw,
    displacement_grid,
    sample_kernel,
)
from .rearrange import (
    bathtub_fill,
    cell_order,
    increasing_rearrangement,
    rearrange,
    set_symmetrize,
    steiner_symmetrize,
    truncate,
)
from .sharp import (
    GaussianTriple,
    HLSOptimizer,
    hls_constant,
    hls_exponent,
    hls_optimizer,
    hls_quotient,
    unit_ball_volume,
    young_constant,
    young_gaussian_triple,
    young_quotient,
)
from .spectral import dirichlet_eigenvalues, dirichlet_spectrum, heat_perimeter_estimate, heat_trace
from .stability import (
    DeficitReport,
    ResidualDistribution,
    asymmetry,
    asymmetry_bruteforce,
    ball_kernel_deficit,
    continuity_probe,
    fractional_isoperimetric_deficit,
    layered_riesz_reconstruction,
    residual_distribution,
    riesz_deficit,
)

__version__ = "0.1.0"
