"""Multivariate orthogonal polynomials and their Christoffel transforms."""

from .block_linalg import (
    BlockMatrix,
    CholeskyResult,
    SingularBlock,
    SingularLeadingBlock,
    block_cholesky,
    build_moment_matrix,
    invert_unitriangular,
    last_quasi_determinant,
    slice_S,
)
from .darboux import (
    DarbouxSpec,
    NodeEntry,
    NodeSet,
    NotPoised,
    OffVarietyError,
    build_sample_matrices,
    christoffel_transform,
    ideal_truncation_basis,
    kernel_check,
    node_count_diagnostics,
    poisedness,
    resolvent_band_identities,
    resolvent_via_two_choleskys,
    sigma_factorization_check,
    vandermonde,
    verify_against_oracle,
)
from .graded_basis import GradedBasis, block_size, compare, cumulative_dim, window_size
from .measures import BoxMeasure, DiscreteMeasure, MomentFunctional, PerturbedMeasure, moment, perturb
from .mvopr import MVOPRFamily, apply_poly_to_shift, build_family, build_jacobi, build_shift
from .nodes import BudgetExhausted, HypersurfaceSampler, sample_points, search_poised
from .poly import Direction, InexactDivision, MPoly, directional_derivative, expand_factored, parse_poly

__version__ = "0.1.0"
