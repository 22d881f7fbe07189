"""edstat: generalized energy distances, halfspace discrepancies, and
minimum-energy estimation, with an experiment CLI."""

__version__ = "0.1.0"

from .energy import (
    GammaOrder,
    constants,
    energy_sq_mmd,
    energy_sq_ustat,
    energy_sq_vstat,
    grad_energy_sq,
    kernel_gamma,
)
from .halfspace import (
    HalfspaceWitness,
    dhbar_1d,
    dhbar_2d_exact,
    dhbar_3d_exact,
    dhbar_heuristic,
    t_stat_dk,
)
from .measures import (
    DistributionSpec,
    EmpiricalMeasure,
    MeasureFormatError,
    empirical,
    load_csv,
    moment_gamma,
    sample,
    save_csv,
)
from .sliced import (
    Projection1D,
    energy_sq_1d_exact,
    project,
    project_pair,
    psi_feature_gap,
    sliced_energy_sq_mc,
)
from .spectral import (
    Construction1D,
    build_construction_pair,
    construction_energy,
    fhat_construction,
    verify_scaling,
    weighted_fourier_norm_sq,
)
from .estimation import (
    Codebook,
    GeneratorModel,
    StoppingConfig,
    affine_model,
    build_codebook,
    fit_discrete_simplex,
    fit_min_energy_sgd,
    gaussian_mixture_model,
    stopping_verifier,
)
from .testing import (
    TestReport,
    make_statistic,
    permutation_test,
    power_curve,
    threshold_schedule,
)
