"""
Sparse Pose Recovery

Recovers 3D landmark shapes from 2D observations by sparse combination over a
dictionary of basis poses, using nonconvex (leaky capped l1) regularization,
a spectral-norm relaxation and a multi-stage ADMM solver.
"""

import logging

from sparsepose.config import Config

__version__ = '1.0.0'


def init_logging(config_class=Config, verbosity=0):
    """Configure the root logger.

    Args:
        config_class: Configuration class providing LOG_LEVEL
        verbosity: Number of -v flags; each one lowers the level by one step

    Returns:
        The effective logging level
    """
    base = logging.getLevelName(str(config_class.LOG_LEVEL).upper())
    if not isinstance(base, int):
        base = logging.WARNING
    level = max(logging.DEBUG, base - 10 * verbosity)
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(level)
    return level
