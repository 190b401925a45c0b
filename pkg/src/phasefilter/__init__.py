"""phasefilter: eigenvector recovery through iterated phase-estimation filtering.

Samples eigenvectors of Hermitian PSD matrices by repeatedly applying the
averaging map v -> (v + U^m v)/2 for U = e^{2 pi i A} at random powers m,
which attenuates every eigencomponent whose phase is far from zero; a
batched variant with per-column random phases recovers the whole
eigenbasis.  A brute-force Jacobi eigensolver serves as the independent
ground truth, and a small experiment harness drives the statistical
studies from the command line.
"""

__version__ = "0.1.0"

from .backend import BACKEND_NAME, kernels
from .diagonalizer import DiagOutcome, PhaseBatch, batch_filter_round, diagonalize, harvest
from .discrepancy import (
    FracSequence,
    SequenceReport,
    choose_modulus,
    eigen_multiples_sequence,
    is_prime,
    multiples_sequence,
    niederreiter_r_sum,
    pseudorandomness_trial,
    shift_mod1,
    star_discrepancy_exact,
    star_discrepancy_mc,
)
from .errors import (
    DomainError,
    FilteredToZeroError,
    NonConvergenceError,
    OracleError,
    ParseError,
    PhaseFilterError,
    ScaleError,
    ShapeError,
    UnsupportedScaleError,
)
from .experiments import (
    Report,
    demmel_case_study,
    duplicate_convergence_diagnostic,
    frequency_experiment,
    generate_matrix,
)
from .filtering import (
    Band,
    FilterSchedule,
    IterationTrace,
    in_band,
    inner_iteration,
    pass_band,
    predicted_attenuation,
    repetitions_for_bands,
    stop_band,
)
from .linalg import (
    HermitianInput,
    PrecisionBudget,
    filter_step,
    matmul,
    operator_norm,
    power_by_squaring,
    taylor_exp,
    taylor_tail_bound,
    terms_for_tail,
    truncate,
)
from .matrixio import read_matrix, write_matrix
from .oracle import (
    EigenDecomposition,
    jacobi_eigh,
    match_eigenvectors,
    measure_separation,
    oracle_exp,
    phase_distance,
)
from .randomness import (
    PerturbationSpec,
    RngHandle,
    gaussian_cdf,
    gaussian_hermitian,
    gaussian_inverse_cdf,
    haar_unit_vector,
    perturb,
)
from .sampler import SampleOutcome, residual, sample_eigenvector

__all__ = [
    "__version__",
    "BACKEND_NAME",
    "kernels",
    "Band",
    "DiagOutcome",
    "DomainError",
    "EigenDecomposition",
    "FilterSchedule",
    "FilteredToZeroError",
    "FracSequence",
    "HermitianInput",
    "IterationTrace",
    "NonConvergenceError",
    "OracleError",
    "ParseError",
    "PerturbationSpec",
    "PhaseBatch",
    "PhaseFilterError",
    "PrecisionBudget",
    "Report",
    "RngHandle",
    "SampleOutcome",
    "ScaleError",
    "SequenceReport",
    "ShapeError",
    "UnsupportedScaleError",
    "batch_filter_round",
    "choose_modulus",
    "demmel_case_study",
    "diagonalize",
    "duplicate_convergence_diagnostic",
    "eigen_multiples_sequence",
    "filter_step",
    "frequency_experiment",
    "gaussian_cdf",
    "gaussian_hermitian",
    "gaussian_inverse_cdf",
    "generate_matrix",
    "haar_unit_vector",
    "harvest",
    "in_band",
    "inner_iteration",
    "is_prime",
    "jacobi_eigh",
    "match_eigenvectors",
    "matmul",
    "measure_separation",
    "multiples_sequence",
    "niederreiter_r_sum",
    "operator_norm",
    "oracle_exp",
    "pass_band",
    "perturb",
    "phase_distance",
    "power_by_squaring",
    "predicted_attenuation",
    "pseudorandomness_trial",
    "read_matrix",
    "repetitions_for_bands",
    "residual",
    "sample_eigenvector",
    "shift_mod1",
    "star_discrepancy_exact",
    "star_discrepancy_mc",
    "stop_band",
    "taylor_exp",
    "taylor_tail_bound",
    "terms_for_tail",
    "truncate",
    "write_matrix",
]
