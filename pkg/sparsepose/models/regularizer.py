"""
Regularizer Models

Tagged penalty descriptions and stage-wise surrogate weights.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from sparsepose.exceptions import InvalidInputError, InvalidParameterError, ParseError


class RegularizerKind(str, Enum):
    L1 = 'l1'
    CAPPED_L1 = 'capped_l1'
    LCNR = 'lcnr'
    LOGARITHM = 'logarithm'
    LAPLACE = 'laplace'


# JSON keys accepted for each kind ("lambda" maps to the lam field)
_KIND_KEYS = {
    RegularizerKind.L1: ('lambda',),
    RegularizerKind.CAPPED_L1: ('alpha', 'tau'),
    RegularizerKind.LCNR: ('alpha', 'beta', 'tau'),
    RegularizerKind.LOGARITHM: ('lambda', 'gamma'),
    RegularizerKind.LAPLACE: ('lambda', 'gamma'),
}


@dataclass(frozen=True)
class RegularizerSpec:
    """One penalty family H(c) with its parameters"""
    kind: RegularizerKind
    alpha: float = 0.0
    beta: float = 0.0
    tau: float = 1.0
    lam: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        try:
            kind = RegularizerKind(self.kind)
        except ValueError:
            raise InvalidParameterError(f'unknown regularizer kind {self.kind!r}')
        object.__setattr__(self, 'kind', kind)
        for name in ('alpha', 'beta', 'tau', 'lam', 'gamma'):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise InvalidParameterError(f'{name} must be finite')
            object.__setattr__(self, name, value)

        if kind is RegularizerKind.LCNR:
            if not 0 <= self.beta <= self.alpha:
                raise InvalidParameterError(
                    f'lcnr requires 0 <= beta <= alpha, got alpha={self.alpha} beta={self.beta}')
            if not self.tau > 0:
                raise InvalidParameterError(f'lcnr requires tau > 0, got {self.tau}')
        elif kind is RegularizerKind.CAPPED_L1:
            if not (self.alpha > 0 and self.tau > 0):
                raise InvalidParameterError('capped l1 requires alpha > 0 and tau > 0')
        else:
            if self.lam < 0:
                raise InvalidParameterError(f'lambda must be nonnegative, got {self.lam}')
            if kind in (RegularizerKind.LOGARITHM, RegularizerKind.LAPLACE) and not self.gamma > 0:
                raise InvalidParameterError(f'gamma must be positive, got {self.gamma}')

    @classmethod
    def lcnr(cls, alpha, beta, tau):
        return cls(RegularizerKind.LCNR, alpha=alpha, beta=beta, tau=tau)

    @classmethod
    def capped_l1(cls, alpha, tau):
        return cls(RegularizerKind.CAPPED_L1, alpha=alpha, tau=tau)

    @classmethod
    def l1(cls, lam):
        return cls(RegularizerKind.L1, lam=lam)

    @classmethod
    def logarithm(cls, lam, gamma):
        return cls(RegularizerKind.LOGARITHM, lam=lam, gamma=gamma)

    @classmethod
    def laplace(cls, lam, gamma):
        return cls(RegularizerKind.LAPLACE, lam=lam, gamma=gamma)

    @property
    def uses_tau(self):
        return self.kind in (RegularizerKind.LCNR, RegularizerKind.CAPPED_L1)

    @property
    def label(self):
        """Short human-readable name including parameters"""
        params = ','.join(f'{key}={self._value(key):g}' for key in _KIND_KEYS[self.kind])
        return f'{self.kind.value}({params})'

    def _value(self, key):
        return self.lam if key == 'lambda' else getattr(self, key)

    def to_dict(self):
        data = {'kind': self.kind.value}
        for key in _KIND_KEYS[self.kind]:
            data[key] = self._value(key)
        return data

    @classmethod
    def from_dict(cls, data, path=None):
        """Parse {"kind": ..., params...}; unknown kinds and keys are rejected."""
        if not isinstance(data, dict):
            raise ParseError('regularizer must be a JSON object', path=path)
        raw_kind = data.get('kind')
        try:
            kind = RegularizerKind(raw_kind)
        except ValueError:
            raise ParseError(f'unknown regularizer kind {raw_kind!r}', path=path, field='kind')
        allowed = _KIND_KEYS[kind]
        kwargs = {}
        for key, value in data.items():
            if key == 'kind':
                continue
            if key not in allowed:
                raise ParseError(f'unexpected key for {kind.value}', path=path, field=key)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ParseError('expected a number', path=path, field=key)
            kwargs['lam' if key == 'lambda' else key] = float(value)
        return cls(kind, **kwargs)


@dataclass(frozen=True, eq=False)
class SurrogateWeights:
    """Per-basis weights lambda^l of the stage-l weighted spectral-norm surrogate"""
    weights: np.ndarray
    stage: int = 0

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidInputError('surrogate weights must be finite and nonnegative')
        if self.stage < 0:
            raise InvalidParameterError(f'stage must be >= 0, got {self.stage}')
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)

    @property
    def size(self):
        return self.weights.shape[0]
