"""Subharmonic exhaustions of the unit disk and their weighted Hardy spaces."""

__version__ = "0.1.0"

from .disc import (  # noqa: E402
    AngleGrid,
    CircleFunction,
    DiskField,
    PolarGrid,
    analytic_completion,
    area_integral,
    boundary_integral,
    harmonic_extension,
    laplacian,
    poisson_kernel,
)
from .exhaustion import (  # noqa: E402
    ConstructionError,
    Exhaustion,
    SmoothingKappa,
    construct_biharmonic,
    construct_exhaustion_c2,
    construct_exhaustion_lsc,
    green_exhaustion,
    weight_balayage,
    weight_radial,
)
from .demailly import demailly_pairing, dlj_rhs, level_set, monotone_chain, shu_norm  # noqa: E402
from .hardy import (  # noqa: E402
    AnalyticFunction,
    HardyContext,
    context_from_phi,
    context_from_weight,
    outer_from_modulus,
    weighted_norm,
)
from .duality import BoundaryFunctional, duality_certificate  # noqa: E402
