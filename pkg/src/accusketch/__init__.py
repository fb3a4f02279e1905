"""Sketched kernel ridge regression with accumulated sub-sampling sketches."""

from .kernel import KernelSpec, cross_matrix, cross_row, eval_kernel, gram
from .sketch import (
    SamplingDistribution,
    SketchMatrix,
    build_accumulation,
    build_gaussian,
    build_sparse_projection,
    identity_sketch,
    leverage_distribution,
    right_multiply,
    to_dense,
    transpose_apply,
    uniform_distribution,
)
from .solver import (
    ExactFit,
    SketchedFit,
    SolverError,
    empirical_sq_norm,
    fit_exact,
    fit_sketched,
    in_sample,
    predict,
    predict_many,
)
from .spectral import (
    SatisfiabilityReport,
    SpectralProfile,
    block_instance,
    check_k_satisfiability,
    d_delta,
    decompose,
    incoherence,
    leverage_scores,
    psi_column_norms,
    statistical_dimension,
)

__version__ = "0.1.0"
