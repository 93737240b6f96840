"""
Solver Models

Affine stacks, ADMM state, solver configuration, traces and results.
"""

from dataclasses import dataclass, field, fields, replace

import numpy as np

from sparsepose.config import Config
from sparsepose.exceptions import DimensionError, InvalidInputError, InvalidParameterError, ParseError
from sparsepose.models.regularizer import RegularizerSpec

UPDATE_ORDERS = ('standard', 'dual_first')


@dataclass(frozen=True, eq=False)
class AffineStack:
    """D relaxed affine matrices M_i (2 x 3) stacked as a (D, 2, 3) array"""
    matrices: np.ndarray

    def __post_init__(self):
        matrices = np.array(self.matrices, dtype=float)
        if matrices.ndim != 3 or matrices.shape[1:] != (2, 3):
            raise DimensionError(f'affine stack must have shape (D, 2, 3), got {matrices.shape}')
        if not np.all(np.isfinite(matrices)):
            raise InvalidInputError('affine stack contains non-finite entries')
        matrices.setflags(write=False)
        object.__setattr__(self, 'matrices', matrices)

    @classmethod
    def zeros(cls, size):
        return cls(np.zeros((size, 2, 3)))

    @property
    def size(self):
        return self.matrices.shape[0]

    def __len__(self):
        return self.size

    def __repr__(self):
        return f'<AffineStack D={self.size}>'


@dataclass(frozen=True, eq=False)
class AdmmState:
    """Primal copies M (prox side) and V (least-squares side), multiplier U and step mu"""
    M: np.ndarray
    V: np.ndarray
    U: np.ndarray
    mu: float

    @classmethod
    def zeros(cls, size, mu):
        if not mu > 0:
            raise InvalidParameterError(f'mu must be positive, got {mu}')
        shape = (size, 2, 3)
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape), float(mu))

    @property
    def size(self):
        return self.M.shape[0]


@dataclass(frozen=True)
class MuAdaptation:
    """Residual-balancing policy for the ADMM step size"""
    enabled: bool = True
    factor: float = Config.MU_FACTOR
    ratio: float = Config.MU_RATIO

    def __post_init__(self):
        if not self.factor > 1:
            raise InvalidParameterError(f'mu factor must exceed 1, got {self.factor}')
        if not self.ratio >= 1:
            raise InvalidParameterError(f'mu ratio must be >= 1, got {self.ratio}')


def _default_regularizer():
    return RegularizerSpec.lcnr(Config.LCNR_ALPHA, Config.LCNR_BETA, Config.LCNR_TAU)


@dataclass(frozen=True)
class SolverConfig:
    """Multi-stage solver settings"""
    regularizer: RegularizerSpec = field(default_factory=_default_regularizer)
    max_stages: int = Config.MAX_STAGES
    inner_iterations_per_stage: int = Config.INNER_ITERATIONS
    mu_init: float = Config.MU_INIT
    mu_adapt: MuAdaptation = field(default_factory=MuAdaptation)
    primal_tol: float = Config.PRIMAL_TOL
    dual_tol: float = Config.DUAL_TOL
    tau_top_k: int = Config.TAU_TOP_K
    update_order: str = 'standard'
    seed: int = Config.DEFAULT_SEED

    def __post_init__(self):
        if self.max_stages < 1:
            raise InvalidParameterError(f'max_stages must be >= 1, got {self.max_stages}')
        if self.inner_iterations_per_stage < 1:
            raise InvalidParameterError(
                f'inner_iterations_per_stage must be >= 1, got {self.inner_iterations_per_stage}')
        if not self.mu_init > 0:
            raise InvalidParameterError(f'mu_init must be positive, got {self.mu_init}')
        if not (self.primal_tol > 0 and self.dual_tol > 0):
            raise InvalidParameterError('tolerances must be positive')
        if self.tau_top_k is not None and self.tau_top_k < 1:
            raise InvalidParameterError(f'tau_top_k must be >= 1, got {self.tau_top_k}')
        if self.update_order not in UPDATE_ORDERS:
            raise InvalidParameterError(
                f'update_order must be one of {UPDATE_ORDERS}, got {self.update_order!r}')

    def with_overrides(self, **overrides):
        """Return a copy with the non-None overrides applied"""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self):
        return {
            'regularizer': self.regularizer.to_dict(),
            'max_stages': self.max_stages,
            'inner_iterations_per_stage': self.inner_iterations_per_stage,
            'mu_init': self.mu_init,
            'mu_adapt': {
                'enabled': self.mu_adapt.enabled,
                'factor': self.mu_adapt.factor,
                'ratio': self.mu_adapt.ratio,
            },
            'primal_tol': self.primal_tol,
            'dual_tol': self.dual_tol,
            'tau_top_k': self.tau_top_k,
            'update_order': self.update_order,
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data, path=None, base=None):
        """Parse a JSON object, layering its keys over `base` (defaults when None)."""
        if not isinstance(data, dict):
            raise ParseError('solver config must be a JSON object', path=path)
        base = base or cls()
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ParseError('unknown solver config key', path=path, field=key)
            if key == 'regularizer':
                kwargs[key] = RegularizerSpec.from_dict(value, path=path)
            elif key == 'mu_adapt':
                if not isinstance(value, dict):
                    raise ParseError('expected an object', path=path, field=key)
                extra = set(value) - {'enabled', 'factor', 'ratio'}
                if extra:
                    raise ParseError('unknown mu_adapt key', path=path, field=sorted(extra)[0])
                kwargs[key] = replace(base.mu_adapt, **value)
            elif key == 'update_order':
                if not isinstance(value, str):
                    raise ParseError('expected a string', path=path, field=key)
                kwargs[key] = value
            elif key == 'tau_top_k' and value is None:
                kwargs[key] = None
            elif key in ('max_stages', 'inner_iterations_per_stage', 'tau_top_k', 'seed'):
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ParseError('expected an integer', path=path, field=key)
                kwargs[key] = value
            else:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ParseError('expected a number', path=path, field=key)
                kwargs[key] = float(value)
        return replace(base, **kwargs)


@dataclass(frozen=True)
class IterationRecord:
    stage: int
    iteration: int
    objective: float
    primal_residual: float
    dual_residual: float
    mu: float


@dataclass
class SolveTrace:
    """Per-iteration and per-stage history of one solve (single writer)"""
    iterations: list = field(default_factory=list)
    stage_weights: list = field(default_factory=list)
    stage_norms: list = field(default_factory=list)
    stage_stacks: list = field(default_factory=list)
    stage_objectives: list = field(default_factory=list)
    stage_taus: list = field(default_factory=list)
    stage_converged: list = field(default_factory=list)
    stage_seconds: list = field(default_factory=list)
    recalibration_seconds: list = field(default_factory=list)

    @property
    def stages_run(self):
        return len(self.stage_stacks)

    @property
    def recalibration_fraction(self):
        """Share of wall time spent recalibrating weights (0 when nothing ran)"""
        total = sum(self.stage_seconds) + sum(self.recalibration_seconds)
        return sum(self.recalibration_seconds) / total if total > 0 else 0.0

    def records_for_stage(self, stage):
        return [r for r in self.iterations if r.stage == stage]


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """Final affine stack with recovered coefficients, rotations and 3D shape"""
    affine_stack: AffineStack
    coefficients: np.ndarray
    rotations: np.ndarray
    shape: object
    trace: SolveTrace
    data_stack: AffineStack = None

    @property
    def final_objective(self):
        return self.trace.stage_objectives[-1] if self.trace.stage_objectives else float('nan')


@dataclass(frozen=True)
class TheoryReport:
    """Diagnostic quantities of the stage-wise error decay analysis"""
    phi: float
    alpha: float
    beta: float
    tau: float
    e: float
    applicable: bool
    gate_half: bool
    gate_eighth: bool
    gate_half_threshold: float
    gate_eighth_threshold: float
    success_probability: float
    kappa: float = None
    kappa_per_basis: tuple = ()
    a: float = None
    tau_gate: bool = None
    vacuous: bool = None
    active_count: int = None
    small_count: int = None
    b: float = None
    initial_error: float = None
    bound_curve: tuple = ()
    notes: tuple = ()

    def bound(self, stage, initial_error=None):
        """a^l * L_0 + b / (1 - a), or None when unavailable or vacuous"""
        l0 = self.initial_error if initial_error is None else initial_error
        if self.a is None or self.b is None or l0 is None or self.a >= 1:
            return None
        return self.a ** stage * l0 + self.b / (1 - self.a)
