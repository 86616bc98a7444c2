"""Verification laboratory for spectral quantum stochastic calculus.

A direct-integral one-particle space is discretized into frequency bins,
every operator is realized on truncated Fock spaces over the bin modes,
and the algebraic identities of the calculus are checked exactly or with
measured convergence order as the grid refines.
"""

from .convergence import ConvergenceSeries, fit_slope
from .errors import (
    AdaptednessViolation,
    BasisMismatch,
    ConfigInvalid,
    DegenerateInput,
    DimMismatch,
    EmptyGrid,
    GridMismatch,
    MisalignedCut,
    RefinementMismatch,
    SizeOverflow,
    TruncationTooSmall,
    WicklabError,
)
from .fock import (
    DIM_CAP,
    FockBasis,
    SparseOperator,
    SplitIsomorphism,
    ampliate,
    diagonal_operator,
    diff_second_quantize,
    enumerate_basis,
    exponential_vector,
    field_operator,
    identity_operator,
    initial_operator,
    number_operator,
    second_quantize,
    spectral_norm,
    split_isomorphism,
    tensor_oracle_compare,
    tensor_operator,
    vacuum_vector,
)
from .grid import (
    OneParticleVector,
    SpectralGrid,
    bin_component,
    bin_inner,
    build_grid,
    inner_product,
    one_particle_hamiltonian,
    project,
    projection_matrix,
    sample_function,
    split_grid,
)
from .kernels import BACKEND, creation_triplets, permanent
from .processes import (
    ProcessFamily,
    adaptedness_defect,
    bin_increment,
    counting_diag,
    fermi_process,
    parity_process,
    prefix_parity_signs,
    spectral_process,
)
from .report import CheckResult, SuiteConfig, emit_report, run_converge, run_verify
from .unify import (
    XiMap,
    build_xi,
    field_covariance_defect,
    isometry_defects,
    leakage_closed_form,
    number_covariance_defect,
    ordered_product_defect,
)
from .wick import (
    ADAPTEDNESS_TOL,
    AdaptedStepProcess,
    WickIntegrand,
    abel_defect,
    adjoint_integral,
    estimate_bound,
    ito_correction_defect,
    ito_correction_operators,
    ito_table_probe,
    matrix_element_form,
    wick_integral,
)

__version__ = "0.1.0"
