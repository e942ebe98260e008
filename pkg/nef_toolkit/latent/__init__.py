from .linalg import jacobi_eigh, principal_angles, subspace_distance, top_r_subspace
from .simulation import (
    DkBiasReport,
    ExperimentConfig,
    ExperimentResult,
    ExperimentRun,
    ExperimentSummary,
    LatentModel,
    dk_bias_check,
    dk_hat,
    dk_true,
    draw_factors,
    draw_model,
    generate,
    gram_adjusted,
    run_experiment,
    run_single,
    summarize,
)

__all__ = [
    'jacobi_eigh', 'principal_angles', 'subspace_distance', 'top_r_subspace',
    'DkBiasReport', 'ExperimentConfig', 'ExperimentResult', 'ExperimentRun', 'ExperimentSummary',
    'LatentModel', 'dk_bias_check', 'dk_hat', 'dk_true', 'draw_factors', 'draw_model',
    'generate', 'gram_adjusted', 'run_experiment', 'run_single', 'summarize',
]
