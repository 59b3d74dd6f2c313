"""Exact combinatorics of toric models for surface maps preserving dx^dy/xy.

The pipeline: tropicalize a rational map to a piecewise-linear map of the
plane, certify its rotation number on the circle of rays, then refine a
fan until a suitable iterate is stable along the polar divisor.
"""

from .errors import (
    CoefficientGrowthError,
    FanError,
    NotHomeomorphismError,
    NotStabilizable,
    OrientationError,
    PreconditionError,
    RayCollapsedError,
    SingularMatrixError,
    StabilizationError,
    ToricStabError,
    UndeterminedRotation,
    ZeroVectorError,
)
from .fan import (
    P1XP1_FAN,
    P2_FAN,
    Cone,
    ConeHit,
    Fan,
    RayHit,
    Sector,
    blowup,
    fan_validate,
    is_regular,
    locate,
    merge_fans,
    parse_fan,
    regularize,
    regularize_cone,
    sector_contains_ray,
)
from .lattice import (
    Direction,
    IntMatrix,
    QuadraticNumber,
    content,
    det2,
    eigen_directions,
    primitive,
    rational_between,
)
from .rotation import (
    DensityReport,
    FixedComponent,
    RotationCertificate,
    denjoy_statement_check,
    exact_rotation,
    fixed_components,
    monomial_rationality_test,
    numeric_rotation,
)
from .stability import (
    CorrigibilityVerdict,
    DegreeReport,
    DestabilizingOrbit,
    RayStatus,
    StabilityReport,
    StabilizationResult,
    ToricModel,
    cone_orbit_hits_ray,
    corrigibility_verdict,
    find_destabilizing_orbits,
    monomial_degrees,
    ray_status,
    stabilize,
)
from .tropical import (
    MonomialSupport,
    PLIntegralMap,
    RationalMapData,
    compose,
    conjugate,
    evaluate_ray,
    from_monomial,
    is_homeomorphism,
    iterate,
    load_map,
    nu_eval,
    ray_equivalent,
    tropical_formula,
    tropicalize,
)

__version__ = "0.1.0"
