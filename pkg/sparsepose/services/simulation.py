"""
Pose Data Simulation Service

Turntable view synthesis, noise injection and sparse ground-truth generation.
"""

import logging
from collections import namedtuple

import numpy as np

from sparsepose.exceptions import InvalidParameterError
from sparsepose.models import AffineStack, CameraModel, Pose2D, Pose3D
from sparsepose.services.geometry import centralize, project, random_rotation, rotation_about_y

logger = logging.getLogger(__name__)

SparseTruth = namedtuple('SparseTruth', ['shape', 'truth', 'coefficients', 'rotations', 'observation'])

PI = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def make_rng(seed):
    """Accept either a seed or an existing numpy Generator"""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def synthesize_views(S, angles, omega=1.0):
    """One centred 2D pose per turntable angle (radians)"""
    angles = list(angles)
    if not angles:
        raise InvalidParameterError('at least one view angle is required')
    views = []
    for angle in angles:
        cam = CameraModel(omega=omega, rotation=rotation_about_y(angle))
        views.append(centralize(project(S, cam))[0])
    return views


def add_shape_noise(S, sigma, rng_seed):
    """S + sigma * mean(|S|) * G with G standard normal"""
    if sigma < 0:
        raise InvalidParameterError(f'noise sigma must be nonnegative, got {sigma}')
    rng = make_rng(rng_seed)
    noise = rng.standard_normal(S.points.shape)
    return Pose3D(S.points + sigma * np.mean(np.abs(S.points)) * noise)


def add_observation_noise(Y, sigma, rng_seed):
    """Y + delta with delta i.i.d. N(0, sigma^2)"""
    if sigma < 0:
        raise InvalidParameterError(f'noise sigma must be nonnegative, got {sigma}')
    rng = make_rng(rng_seed)
    return Pose2D(Y.points + sigma * rng.standard_normal(Y.points.shape))


def generate_sparse_truth(dictionary, k, coefficient_range=(1.0, 2.0), rng_seed=None, shared_rotation=False):
    """
    Sample a k-sparse ground truth over the dictionary.

    Args:
        dictionary: PoseDictionary
        k: Number of active bases (1 <= k <= D)
        coefficient_range: (low, high) for the positive coefficients
        rng_seed: Seed or Generator
        shared_rotation: Use one rotation for all active bases instead of one each

    Returns:
        SparseTruth(shape, truth, coefficients, rotations, observation) where
        truth holds M_i = c_i Pi R_i (zero for inactive bases) and observation
        is sum_i M_i B_i.
    """
    D = dictionary.size
    if not 1 <= k <= D:
        raise InvalidParameterError(f'active count must be in [1, {D}], got {k}')
    low, high = coefficient_range
    rng = make_rng(rng_seed)

    active = np.sort(rng.choice(D, size=k, replace=False))
    coefficients = np.zeros(D)
    coefficients[active] = rng.uniform(low, high, size=k)

    rotations = np.tile(np.eye(3), (D, 1, 1))
    if shared_rotation:
        rotations[active] = random_rotation(rng)
    else:
        for i in active:
            rotations[i] = random_rotation(rng)

    truth = coefficients[:, None, None] * (PI @ rotations)
    shape = np.einsum('i,ijk,ikl->jl', coefficients, rotations, dictionary.matrices)
    observation = np.einsum('ijk,ikl->jl', truth, dictionary.matrices)
    logger.debug('sparse truth with active bases %s', active.tolist())
    return SparseTruth(Pose3D(shape), AffineStack(truth), coefficients, rotations, Pose2D(observation))


def view_of_truth(sparse_truth, angle, dictionary):
    """The truth seen from a turntable angle: rotated shape, affine stack and 2D pose"""
    Ry = rotation_about_y(angle)
    rotated = Ry @ sparse_truth.rotations
    truth = sparse_truth.coefficients[:, None, None] * (PI @ rotated)
    shape = Pose3D(Ry @ sparse_truth.shape.points)
    observation = Pose2D(np.einsum('ijk,ikl->jl', truth, dictionary.matrices))
    return shape, AffineStack(truth), observation
