"""
Pose Models

Landmark matrices, the weak-perspective camera and basis shapes.
"""

from dataclasses import dataclass

import numpy as np

from sparsepose.exceptions import DimensionError, InvalidInputError, InvalidParameterError, ValidationError

ROW_NORM_TOL = 1e-8


def _frozen_array(values, rows, name):
    arr = np.array(values, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != rows:
        raise DimensionError(f'{name} must be a {rows}xp matrix, got shape {arr.shape}')
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f'{name} contains non-finite entries')
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Pose3D:
    """3D landmark configuration S (3 x p)"""
    points: np.ndarray

    def __post_init__(self):
        points = _frozen_array(self.points, 3, 'Pose3D')
        if points.shape[1] < 3:
            raise DimensionError(f'Pose3D needs at least 3 landmarks, got {points.shape[1]}')
        object.__setattr__(self, 'points', points)

    @property
    def landmark_count(self):
        return self.points.shape[1]

    def __repr__(self):
        return f'<Pose3D p={self.landmark_count}>'


@dataclass(frozen=True, eq=False)
class Pose2D:
    """2D landmark observation Y (2 x p)"""
    points: np.ndarray

    def __post_init__(self):
        points = _frozen_array(self.points, 2, 'Pose2D')
        if points.shape[1] < 1:
            raise DimensionError('Pose2D needs at least one landmark')
        object.__setattr__(self, 'points', points)

    @property
    def landmark_count(self):
        return self.points.shape[1]

    def __repr__(self):
        return f'<Pose2D p={self.landmark_count}>'


@dataclass(frozen=True, eq=False)
class CameraModel:
    """Weak-perspective camera: scale omega, rotation R in SO(3), translation T"""
    omega: float = 1.0
    rotation: np.ndarray = None
    translation: np.ndarray = None

    def __post_init__(self):
        if not self.omega > 0:
            raise InvalidParameterError(f'camera scale omega must be positive, got {self.omega}')
        rotation = np.eye(3) if self.rotation is None else np.array(self.rotation, dtype=float)
        translation = np.zeros(3) if self.translation is None else np.array(self.translation, dtype=float)
        if rotation.shape != (3, 3) or translation.shape != (3,):
            raise DimensionError('camera rotation must be 3x3 and translation length 3')
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise InvalidInputError('camera parameters contain non-finite entries')
        if not np.allclose(rotation.T @ rotation, np.eye(3), rtol=0, atol=1e-10):
            raise InvalidParameterError('camera rotation is not orthonormal')
        if abs(np.linalg.det(rotation) - 1.0) > 1e-10:
            raise InvalidParameterError('camera rotation must have determinant +1')
        rotation.setflags(write=False)
        translation.setflags(write=False)
        object.__setattr__(self, 'omega', float(self.omega))
        object.__setattr__(self, 'rotation', rotation)
        object.__setattr__(self, 'translation', translation)

    @property
    def projection(self):
        """The 2x3 scaled orthographic projection matrix"""
        return np.array([[self.omega, 0.0, 0.0], [0.0, self.omega, 0.0]])


@dataclass(frozen=True, eq=False)
class BasisPose:
    """One dictionary shape B_i with its shared row-norm-squared constant phi"""
    matrix: np.ndarray
    row_norm_sq: float

    def __post_init__(self):
        matrix = _frozen_array(self.matrix, 3, 'BasisPose')
        phi = float(self.row_norm_sq)
        if not phi > 0:
            raise InvalidParameterError(f'phi must be positive, got {phi}')
        row_sq = np.sum(matrix ** 2, axis=1)
        if np.any(np.abs(row_sq - phi) > ROW_NORM_TOL * max(1.0, phi)):
            raise ValidationError(f'rows are not normalized to phi={phi} (squared row norms {row_sq.tolist()})')
        object.__setattr__(self, 'matrix', matrix)
        object.__setattr__(self, 'row_norm_sq', phi)

    def __repr__(self):
        return f'<BasisPose p={self.matrix.shape[1]} phi={self.row_norm_sq}>'
