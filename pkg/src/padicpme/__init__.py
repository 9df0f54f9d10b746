"""Fractional diffusion laboratory on a p-adic ball at finite resolution.

Everything lives on the cyclic quotient of the ball of radius p^N by the
subgroup of radius p^-K: exact harmonic analysis, the Vladimirov
fractional operator, the fractional Sobolev norm families, and the
monotone-operator solver for the porous-medium flow, with a verification
battery that measures every identity the library claims.
"""

__version__ = "0.1.0"

from .grid import (
    BallGrid,
    ConfigError,
    character,
    dual_norm,
    group_sub,
    is_prime,
    point_abs,
    shell,
    valuation,
)
from .harmonic import (
    GridFunction,
    SpectralFunction,
    character_function,
    constant_function,
    forward,
    indicator_function,
    inverse,
    l2_inner,
    l2_norm,
    plancherel_deficit,
    random_function,
)
from .vladimirov import (
    VladimirovParams,
    apply_kernel,
    apply_spectral,
    arbitrate_symbols,
    brute_symbol,
    brute_symbols,
    eigenfunction_first_layer,
    eigenfunction_psi0,
    kernel_constant,
    lambda0,
    symbol,
)
from .sobolev import (
    ags_multiplier,
    ags_seminorm,
    ags_via_multiplier,
    equivalence_constants,
    h1_norm,
    h_alpha_norm,
    hminus1_inner,
    hminus1_norm,
    norm_equivalence_envelope,
    norm_report,
)
from .monotone import (
    PowerLawNonlinearity,
    ProxConvergenceError,
    ProxResult,
    prox_step,
    psi_functional,
    spectral_resolve,
    verify_subdifferential,
)
from .evolve import (
    SolverConfig,
    TimeProfile,
    Trajectory,
    bump_profile,
    contraction_gap,
    linear_exact,
    run,
    step,
    weak_residual,
)
from .config import ExperimentConfig, load_config
