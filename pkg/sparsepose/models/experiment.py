"""
Experiment Models

Synthetic benchmark specification and its aggregated report.
"""

from dataclasses import dataclass, field, fields, replace

import numpy as np

from sparsepose.config import Config
from sparsepose.exceptions import InvalidParameterError, ParseError
from sparsepose.models.regularizer import RegularizerSpec
from sparsepose.models.solver import SolverConfig

TRUTH_MODES = ('sparse', 'corpus')

_INT_KEYS = ('dictionary_size', 'landmark_count', 'active_count', 'trials', 'seed', 'view_count')
_FLOAT_KEYS = ('phi', 'noise_sigma', 'observation_sigma', 'epsilon')
_BOOL_KEYS = ('shared_rotation', 'align')
_TEXT_KEYS = ('dictionary_path', 'corpus_path', 'truth_mode')


def _checked(key, value, path):
    """Reject JSON values of the wrong type for a scalar experiment key"""
    if key in _INT_KEYS and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError('expected an integer', path=path, field=key)
    if key in _FLOAT_KEYS and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ParseError('expected a number', path=path, field=key)
    if key in _BOOL_KEYS and not isinstance(value, bool):
        raise ParseError('expected true or false', path=path, field=key)
    if key in _TEXT_KEYS and value is not None and not isinstance(value, str):
        raise ParseError('expected a string', path=path, field=key)
    if key in ('angles', 'coefficient_range') and not isinstance(value, list):
        raise ParseError('expected a list of numbers', path=path, field=key)
    return float(value) if key in _FLOAT_KEYS else value


def evenly_spaced_angles(count):
    """`count` turntable angles covering [0, 2*pi)"""
    return tuple(float(a) for a in np.linspace(0.0, 2 * np.pi, int(count), endpoint=False))


def _default_regularizers():
    return (
        RegularizerSpec.lcnr(Config.LCNR_ALPHA, Config.LCNR_BETA, Config.LCNR_TAU),
        RegularizerSpec.l1(Config.LCNR_BETA),
    )


@dataclass(frozen=True)
class ExperimentSpec:
    """What to generate, which regularizers to run and how often"""
    dictionary_path: str = None
    dictionary_size: int = Config.EXPERIMENT_DICTIONARY_SIZE
    landmark_count: int = Config.EXPERIMENT_LANDMARKS
    phi: float = Config.PHI
    truth_mode: str = 'sparse'
    corpus_path: str = None
    active_count: int = Config.ACTIVE_BASES
    coefficient_range: tuple = Config.COEFFICIENT_RANGE
    shared_rotation: bool = False
    angles: tuple = field(default_factory=lambda: evenly_spaced_angles(Config.VIEW_COUNT))
    noise_sigma: float = 0.0
    observation_sigma: float = 0.0
    regularizers: tuple = field(default_factory=_default_regularizers)
    solver: SolverConfig = field(default_factory=SolverConfig)
    trials: int = 1
    seed: int = Config.DEFAULT_SEED
    epsilon: float = Config.EPSILON
    align: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'angles', tuple(float(a) for a in self.angles))
        object.__setattr__(self, 'regularizers', tuple(self.regularizers))
        object.__setattr__(self, 'coefficient_range', tuple(float(c) for c in self.coefficient_range))
        if self.trials < 1:
            raise InvalidParameterError(f'trial count must be >= 1, got {self.trials}')
        if self.truth_mode not in TRUTH_MODES:
            raise InvalidParameterError(f'truth_mode must be one of {TRUTH_MODES}')
        if self.truth_mode == 'corpus' and not self.corpus_path:
            raise InvalidParameterError('corpus truth mode needs corpus_path')
        if self.truth_mode == 'sparse' and self.dictionary_path is None:
            if not 1 <= self.active_count <= self.dictionary_size:
                raise InvalidParameterError(
                    f'active_count must be in [1, {self.dictionary_size}], got {self.active_count}')
        if not self.angles:
            raise InvalidParameterError('at least one view angle is required')
        if not self.regularizers:
            raise InvalidParameterError('at least one regularizer is required')
        low, high = self.coefficient_range
        if not 0 < low <= high:
            raise InvalidParameterError('coefficient_range must satisfy 0 < low <= high')
        if self.noise_sigma < 0 or self.observation_sigma < 0:
            raise InvalidParameterError('noise levels must be nonnegative')
        if not 0 < self.epsilon < 1:
            raise InvalidParameterError('epsilon must lie in (0, 1)')

    @property
    def labels(self):
        """Unique display label per regularizer arm"""
        kinds = [spec.kind.value for spec in self.regularizers]
        return tuple(
            kind if kinds.count(kind) == 1 else spec.label
            for kind, spec in zip(kinds, self.regularizers))

    def with_overrides(self, **overrides):
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self):
        data = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == 'regularizers':
                value = [spec.to_dict() for spec in value]
            elif f.name == 'solver':
                value = value.to_dict()
            elif isinstance(value, tuple):
                value = list(value)
            data[f.name] = value
        return data

    @classmethod
    def from_dict(cls, data, path=None):
        if not isinstance(data, dict):
            raise ParseError('experiment spec must be a JSON object', path=path)
        known = {f.name for f in fields(cls)} | {'view_count'}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ParseError('unknown experiment key', path=path, field=key)
            value = _checked(key, value, path)
            try:
                if key == 'regularizers':
                    if not isinstance(value, list):
                        raise ParseError('expected a list', path=path, field=key)
                    kwargs[key] = tuple(RegularizerSpec.from_dict(item, path=path) for item in value)
                elif key == 'solver':
                    kwargs[key] = SolverConfig.from_dict(value, path=path)
                elif key == 'view_count':
                    kwargs['angles'] = evenly_spaced_angles(value)
                elif key in ('angles', 'coefficient_range'):
                    kwargs[key] = tuple(float(v) for v in value)
                else:
                    kwargs[key] = value
            except (TypeError, ValueError) as e:
                raise ParseError(str(e), path=path, field=key)
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as e:
            raise ParseError(str(e), path=path)


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one regularizer arm on one trial (averaged over views)"""
    regularizer: str
    trial: int
    recovery_error: float
    relative_error: float
    unaligned_error: float
    recovery_curve: tuple
    estimation_curve: tuple
    stages_to_epsilon: int
    seconds: float
    max_objective: float
    diverged: bool
    recalibration_fraction: float = 0.0

    @property
    def stages_run(self):
        return len(self.recovery_curve)


@dataclass
class ExperimentReport:
    """Per-trial records plus per-regularizer aggregates"""
    labels: tuple = ()
    records: list = field(default_factory=list)
    summaries: dict = field(default_factory=dict)
    comparison: dict = None
    median_curves: dict = field(default_factory=dict)

    def records_for(self, label):
        return [r for r in self.records if r.regularizer == label]
