"""
Geometry Services

Weak-perspective projection, centralization, rotation/coefficient recovery from
affine matrices, shape reconstruction and Procrustes alignment.
"""

import logging

import numpy as np

from sparsepose.exceptions import AlignmentUndefinedError, DimensionError
from sparsepose.models import AffineStack, Pose2D, Pose3D
from sparsepose.services.linalg import thin_svd_batch

logger = logging.getLogger(__name__)

# bases whose coefficient falls below this fraction of the largest are dropped
ACTIVE_THRESHOLD = 1e-6


def project(S, cam):
    """Y = Pi (R S + T 1^T) with Pi = [[w, 0, 0], [0, w, 0]]"""
    world = cam.rotation @ S.points + cam.translation[:, None]
    return Pose2D(cam.projection @ world)


def centralize(Y):
    """Subtract the per-row landmark mean; returns (centred pose, mean)"""
    mean = Y.points.mean(axis=1)
    return Pose2D(Y.points - mean[:, None]), mean


def rotation_about_y(angle):
    """Turntable rotation about the vertical axis"""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def random_rotation(rng):
    """Uniformly distributed element of SO(3)"""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q


def recover_rotations(stack):
    """Coefficients (spectral norms) and rotations for every matrix in a stack.

    The first two rotation rows are the nearest orthonormal frame P Q^T of the
    thin SVD, the third is their cross product. A zero matrix maps to (0, I).

    Returns:
        (coefficients (D,), rotations (D, 3, 3))
    """
    M = stack.matrices if isinstance(stack, AffineStack) else np.asarray(stack, dtype=float)
    svd = thin_svd_batch(M)
    c = svd.singulars[..., 0]
    frame = svd.left_factor @ np.swapaxes(svd.right_factor, -1, -2)
    third = np.cross(frame[..., 0, :], frame[..., 1, :])
    R = np.concatenate([frame, third[..., None, :]], axis=-2)
    R = np.where((c == 0)[..., None, None], np.eye(3), R)
    return c, R


def recover_rotation(M):
    """(c, R) for one affine matrix M ~ c Pi R"""
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 3):
        raise DimensionError(f'expected a 2x3 matrix, got shape {M.shape}')
    c, R = recover_rotations(M)
    return float(c), R


def reconstruct_shape(Ms, dictionary):
    """S_hat = sum_i c_i R_i B_i over the active bases"""
    if Ms.size != dictionary.size:
        raise DimensionError(f'affine stack has {Ms.size} matrices but the dictionary has {dictionary.size} bases')
    c, R = recover_rotations(Ms)
    cmax = c.max() if c.size else 0.0
    active = (c > 0) & (c >= ACTIVE_THRESHOLD * cmax)
    logger.debug('reconstructing from %d of %d bases', int(active.sum()), c.size)
    weighted = (c * active)[:, None, None] * (R @ dictionary.matrices)
    return Pose3D(weighted.sum(axis=0))


def _similarity(reference, target):
    """Scale, rotation and translation taking target onto reference"""
    X, Y = target.points, reference.points
    mx, my = X.mean(axis=1, keepdims=True), Y.mean(axis=1, keepdims=True)
    Xc, Yc = X - mx, Y - my
    var = np.sum(Xc ** 2)
    if var <= np.finfo(float).tiny:
        raise AlignmentUndefinedError('cannot align a target whose landmarks all coincide')
    U, d, Vt = np.linalg.svd(Yc @ Xc.T)
    sign = np.sign(np.linalg.det(U @ Vt)) or 1.0
    D = np.diag([1.0, 1.0, sign])
    R = U @ D @ Vt
    s = float(np.sum(d * np.diag(D)) / var)
    t = my - s * R @ mx
    return s, R, t


def procrustes_align(reference, target):
    """s R target + t minimizing the Frobenius distance to reference"""
    if reference.landmark_count != target.landmark_count:
        raise DimensionError(
            f'landmark counts differ: reference {reference.landmark_count}, target {target.landmark_count}')
    s, R, t = _similarity(reference, target)
    return Pose3D(s * R @ target.points + t)


def recovery_error(S_hat, S, align=True):
    """||S_hat - S||_F, after similarity alignment of S_hat onto S when align is set"""
    if S_hat.landmark_count != S.landmark_count:
        raise DimensionError(
            f'landmark counts differ: estimate {S_hat.landmark_count}, truth {S.landmark_count}')
    if align:
        S_hat = procrustes_align(S, S_hat)
    return float(np.linalg.norm(S_hat.points - S.points))
