"""
Services Package

Numerical kernels, the solver and the experiment harness.
"""

from sparsepose.services.linalg import (thin_svd, thin_svd_batch, spectral_norm, spectral_norms, nuclear_norm,
                                        frobenius_norm, project_l1_ball, l1_ball_threshold, prox_spectral,
                                        prox_spectral_batch)
from sparsepose.services.regularizers import eval_penalty, penalty_derivative, surrogate_weights, surrogate_value
from sparsepose.services.geometry import (project, centralize, recover_rotation, recover_rotations,
                                          reconstruct_shape, procrustes_align, recovery_error,
                                          rotation_about_y, random_rotation)
from sparsepose.services.simulation import (synthesize_views, add_shape_noise, add_observation_noise,
                                            generate_sparse_truth)
from sparsepose.services.dictionary import (learn_dictionary, sparse_code, normalize_rows, random_dictionary,
                                            save_dictionary, load_dictionary, LearningTrace)
from sparsepose.services.solver import admm_iterate, solve_stage, multistage_solve, adapt_mu, recover_frames
from sparsepose.services.theory import estimation_error, estimate_kappa, theory_report
from sparsepose.services.experiments import run_experiment, grid_search
from sparsepose.services.reporting import export_report

__all__ = [
    'thin_svd', 'thin_svd_batch', 'spectral_norm', 'spectral_norms', 'nuclear_norm', 'frobenius_norm',
    'project_l1_ball', 'l1_ball_threshold', 'prox_spectral', 'prox_spectral_batch',
    'eval_penalty', 'penalty_derivative', 'surrogate_weights', 'surrogate_value',
    'project', 'centralize', 'recover_rotation', 'recover_rotations', 'reconstruct_shape',
    'procrustes_align', 'recovery_error', 'rotation_about_y', 'random_rotation',
    'synthesize_views', 'add_shape_noise', 'add_observation_noise', 'generate_sparse_truth',
    'learn_dictionary', 'sparse_code', 'normalize_rows', 'random_dictionary', 'save_dictionary',
    'load_dictionary', 'LearningTrace',
    'admm_iterate', 'solve_stage', 'multistage_solve', 'adapt_mu', 'recover_frames',
    'estimation_error', 'estimate_kappa', 'theory_report',
    'run_experiment', 'grid_search', 'export_report',
]
