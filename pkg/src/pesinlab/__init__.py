"""Numerical laboratory for hyperbolicity diagnostics of explicit surface
diffeomorphisms: Lyapunov analysis, Pesin-block classification, pseudo-orbit
shadowing and orbit closing by Newton refinement, invariant manifolds, and
coboundary (transfer function) reconstruction."""

from .cocycle import (
    CocycleProduct,
    LyapunovSpectrum,
    SplittingEstimate,
    birkhoff_block_average,
    cocycle_product,
    domination_margin,
    estimate_splitting,
    finite_time_exponents,
    restricted_conorm,
    restricted_norm,
)
from .errors import PesinLabError
from .livshitz import (
    Observable,
    TransferTable,
    coboundary_observable,
    coboundary_residual,
    holder_estimate,
    obstruction_scan,
    periodic_sum,
    reconstruct_transfer,
)
from .manifolds import (
    ManifoldPatch,
    closure_coverage,
    contraction_profile,
    find_transverse_intersections,
    grow_manifold,
)
from .pesin import (
    BlockVerdict,
    PesinParams,
    Sampler,
    check_block_conditions,
    classify_block,
    estimate_block_measure,
    extended_block_membership,
)
from .shadowing import (
    PeriodicPoint,
    PseudoOrbit,
    ShadowResult,
    build_recurrent_pseudo_orbit,
    close_orbit,
    fit_lipschitz,
    fit_rates,
    newton_shadow,
    periodic_census,
    pseudo_orbit,
    verify_exponential_shadowing,
)
from .systems import MapSystem, OrbitSegment, apply, available_systems, distance, jacobian, make_system

__version__ = "0.1.0"

__all__ = [
    "MapSystem",
    "OrbitSegment",
    "apply",
    "jacobian",
    "distance",
    "make_system",
    "available_systems",
    "CocycleProduct",
    "LyapunovSpectrum",
    "SplittingEstimate",
    "cocycle_product",
    "finite_time_exponents",
    "estimate_splitting",
    "restricted_norm",
    "restricted_conorm",
    "domination_margin",
    "birkhoff_block_average",
    "PesinParams",
    "BlockVerdict",
    "Sampler",
    "check_block_conditions",
    "classify_block",
    "estimate_block_measure",
    "extended_block_membership",
    "PseudoOrbit",
    "ShadowResult",
    "PeriodicPoint",
    "pseudo_orbit",
    "build_recurrent_pseudo_orbit",
    "newton_shadow",
    "verify_exponential_shadowing",
    "close_orbit",
    "periodic_census",
    "fit_rates",
    "fit_lipschitz",
    "ManifoldPatch",
    "grow_manifold",
    "contraction_profile",
    "find_transverse_intersections",
    "closure_coverage",
    "Observable",
    "TransferTable",
    "coboundary_observable",
    "periodic_sum",
    "obstruction_scan",
    "reconstruct_transfer",
    "coboundary_residual",
    "holder_estimate",
    "PesinLabError",
]
