"""Resource theories of polarization for 2D and 3D random electromagnetic fields."""

from ._validation import PolarizationError
from .channels import (
    DoublyStochasticMatrix,
    MajorizationError,
    MixingChannel,
    RandomUnitaryChannel,
    apply_mixing,
    apply_random_unitary,
    birkhoff_decompose,
    is_unital,
    sample_haar_unitary,
    synthesize_doubly_stochastic,
    synthesize_uhlmann,
)
from .monotones import (
    ENTROPIC_PAIRS,
    MONOTONES,
    DistanceKind,
    EntropicPair,
    distance,
    edpw,
    geometric_measure,
    h_phi,
    isopolarization_grid,
    linear,
    p2d,
    rel_entropy_to_unpolarized,
    sskf,
    von_neumann,
)
from .orders import (
    OrderVerdict,
    Relation,
    Theory,
    classify_regions,
    compare,
    convex_obtainable,
    is_unpolarized,
    majorizes,
)
from .polmat import (
    ExtremalDecomposition,
    PolarizationMatrix,
    PolarizationState,
    barycentric_coords,
    canonical_state,
    decompose_extremal,
    eigen_hermitian,
    from_field_samples,
    normalize,
)

__version__ = "0.1.0"
