"""Sparse Ising model recovery with L1-regularized pseudo-likelihood and
minimum probability flow, solved by proximal gradient descent."""

from ._core import (
    FitConfig,
    FitResult,
    FormatError,
    GroundTruthSpec,
    IsingModel,
    NonConvergenceError,
    ObjectiveKind,
    ObjectiveType,
    RecoveryReport,
    SamplerConfig,
    SpinDataset,
    TruthKind,
    UpdateRule,
    energy,
    exact_mle_oracle,
    fit,
    flip_energy_delta,
    generate_random_sparse,
    generate_square_lattice,
    generate_truth,
    local_fields,
    mpf_gradient,
    mpf_value,
    next_beta,
    pl_gradient,
    pl_value,
    recovery_report,
    run_sweep_json,
    sample,
    sample_exact,
    soft_threshold,
)

__version__ = "0.1.0"
