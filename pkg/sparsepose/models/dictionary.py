"""
Pose Dictionary Model
"""

from dataclasses import dataclass

import numpy as np

from sparsepose.exceptions import DimensionError, InvalidInputError, InvalidParameterError, ValidationError
from sparsepose.models.pose import BasisPose


@dataclass(frozen=True, eq=False)
class PoseDictionary:
    """D basis shapes stacked as a (D, 3, p) tensor, rows normalized to phi"""
    matrices: np.ndarray
    phi: float = 1.0

    def __post_init__(self):
        matrices = np.array(self.matrices, dtype=float)
        if matrices.ndim != 3 or matrices.shape[1] != 3:
            raise DimensionError(f'dictionary must have shape (D, 3, p), got {matrices.shape}')
        if matrices.shape[0] < 1:
            raise InvalidParameterError('dictionary size must be >= 1')
        if not np.all(np.isfinite(matrices)):
            raise InvalidInputError('dictionary contains non-finite entries')
        if not self.phi > 0:
            raise InvalidParameterError(f'phi must be positive, got {self.phi}')
        bases = []
        for index, matrix in enumerate(matrices):
            try:
                bases.append(BasisPose(matrix, self.phi))
            except ValidationError as e:
                raise ValidationError(f'basis {index} {e}')
        matrices.setflags(write=False)
        object.__setattr__(self, 'matrices', matrices)
        object.__setattr__(self, 'phi', float(self.phi))
        object.__setattr__(self, '_bases', tuple(bases))

    @property
    def size(self):
        return self.matrices.shape[0]

    @property
    def landmark_count(self):
        return self.matrices.shape[2]

    @property
    def bases(self):
        return self._bases

    @property
    def stacked(self):
        """Vertical stack of the bases, shape (3D, p)"""
        return self.matrices.reshape(3 * self.size, self.landmark_count)

    def __repr__(self):
        return f'<PoseDictionary D={self.size} p={self.landmark_count} phi={self.phi}>'
