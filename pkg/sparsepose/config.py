"""
Configuration settings for the sparse pose recovery toolkit
"""
import os


class Config:
    """Process-wide defaults"""

    # Logging (SPARSEPOSE_LOG accepts a level name such as DEBUG or INFO)
    LOG_LEVEL = os.environ.get('SPARSEPOSE_LOG') or 'WARNING'

    # Reproducibility and parallelism
    DEFAULT_SEED = int(os.environ.get('SPARSEPOSE_SEED') or 0)
    DEFAULT_JOBS = int(os.environ.get('SPARSEPOSE_JOBS') or 1)

    # Leaky capped l1 defaults (alpha heavy rate, beta light rate)
    LCNR_ALPHA = 1.0
    LCNR_BETA = 0.25
    LCNR_TAU = 1.0
    TAU_TOP_K = 10

    # Multi-stage ADMM
    MAX_STAGES = 15
    INNER_ITERATIONS = 20
    MU_INIT = 1.0
    MU_FACTOR = 2.0
    MU_RATIO = 10.0
    PRIMAL_TOL = 1e-6
    DUAL_TOL = 1e-6

    # Dictionary learning
    PHI = 1.0
    DICTIONARY_SIZE = 128
    LEARNING_ITERATIONS = 50
    CODING_TOL = 1e-8
    CODING_MAX_PASSES = 10000

    # Experiments (synthetic shapes in world units: coefficients well above alpha and beta)
    EPSILON = 0.1
    VIEW_COUNT = 36
    ACTIVE_BASES = 3
    EXPERIMENT_DICTIONARY_SIZE = 32
    EXPERIMENT_LANDMARKS = 60
    COEFFICIENT_RANGE = (10.0, 20.0)
    GATE_E = 1.0
    KAPPA_SAMPLES = 10000


class TestConfig(Config):
    """Testing configuration"""
    LOG_LEVEL = 'DEBUG'
    VIEW_COUNT = 2
    KAPPA_SAMPLES = 2000
