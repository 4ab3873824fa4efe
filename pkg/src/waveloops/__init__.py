"""Wavelet filter banks from unitary polynomial loops.

Construction and validation of matrix loops, loop/filter conversion,
sequence-space isometries, finite-dimensional irreducibility analysis,
cascade approximation of scaling functions, and parameter-family scans.
"""

from .polyalg import ComplexPoly, poly_divmod, poly_eval, poly_from_roots, poly_roots
from .loopgroup import (
    Factorization,
    MatrixLoop,
    TwoParamPoint,
    build_loop,
    detect_diagonal_structure,
    factorize,
    genus,
    norm_bound_check,
    two_param_coeffs,
    two_param_loop,
    validate_loop,
)
from .filterbank import (
    FilterBank,
    apply_S,
    apply_S_adjoint,
    filters_from_loop,
    highpass_from_lowpass,
    loop_from_filters,
    monomial_filtration,
    qmf_check,
    subband_projection,
)
from .cuntzrep import (
    AmbiguousRankError,
    R_matrix,
    adjoint_matrices,
    classify,
    fixed_density_matrix,
    lambda0,
    minimal_subspace,
    projection_product_test,
    sigma_fixed_space,
    truncate_window,
    window_size,
)
from .cascade import (
    CascadeGrid,
    cascade_run,
    cascade_step,
    divergence_flags,
    grid_size,
    symmetry_check,
    term_position,
    transfer_matrices,
    wavelet_run,
)
from .waveclass import (
    Cycle,
    cohen_classify,
    enumerate_cycles,
    grid_scan,
    moment_order,
    tight_frame_census,
    tight_frame_cells,
)

__version__ = "0.1.0"
