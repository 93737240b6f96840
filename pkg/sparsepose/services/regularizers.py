"""
Regularizer Services

Penalty evaluation H(c) and the stage-wise surrogate weight rule used by the
multi-stage solver.
"""

import numpy as np

from sparsepose.exceptions import DimensionError, InvalidInputError, InvalidParameterError
from sparsepose.models.regularizer import RegularizerKind, SurrogateWeights


def _as_vector(values, name):
    v = np.asarray(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f'{name} contains non-finite entries')
    return v


def eval_penalty(spec, c, size=None):
    """Evaluate H(c) for the given regularizer.

    Args:
        spec: RegularizerSpec
        c: Coefficient vector
        size: Declared dictionary size D (checked when given)
    """
    t = np.abs(_as_vector(c, 'coefficients'))
    if size is not None and t.shape[0] != size:
        raise DimensionError(f'expected {size} coefficients, got {t.shape[0]}')

    kind = spec.kind
    if kind is RegularizerKind.L1:
        return float(spec.lam * np.sum(t))
    if kind is RegularizerKind.CAPPED_L1:
        return float(spec.alpha * np.sum(np.minimum(t, spec.tau)))
    if kind is RegularizerKind.LCNR:
        return float(spec.alpha * np.sum(np.minimum(t, spec.tau))
                     + spec.beta * np.sum(np.maximum(t, spec.tau)))
    if kind is RegularizerKind.LOGARITHM:
        return float(np.sum(spec.lam / np.log(spec.gamma + 1.0) * np.log(spec.gamma * t + 1.0)))
    return float(np.sum(spec.lam * (1.0 - np.exp(-t / spec.gamma))))


def penalty_derivative(spec, t):
    """Slope R'(t) of the scalar penalty for t >= 0 (left slope at kinks)"""
    t = np.asarray(t, dtype=float)
    kind = spec.kind
    if kind is RegularizerKind.L1:
        return np.full(t.shape, spec.lam)
    if kind is RegularizerKind.CAPPED_L1:
        return np.where(t <= spec.tau, spec.alpha, 0.0)
    if kind is RegularizerKind.LCNR:
        return np.where(t <= spec.tau, spec.alpha, spec.beta)
    if kind is RegularizerKind.LOGARITHM:
        return spec.lam * spec.gamma / (np.log(spec.gamma + 1.0) * (spec.gamma * t + 1.0))
    return (spec.lam / spec.gamma) * np.exp(-t / spec.gamma)


def light_weight(spec):
    """Stage-0 weight applied to every basis.

    LCNR starts from the light rate beta; capped l1 (and LCNR with beta = 0)
    starts from alpha so the first stage is a plain lasso. Logarithm and
    Laplace use their slope at zero, the tangent at the zero initialization.
    """
    kind = spec.kind
    if kind is RegularizerKind.L1:
        return spec.lam
    if kind is RegularizerKind.LCNR:
        return spec.beta if spec.beta > 0 else spec.alpha
    if kind is RegularizerKind.CAPPED_L1:
        return spec.alpha
    return float(penalty_derivative(spec, 0.0))


def surrogate_weights(spec, prev_norms, stage):
    """Weights lambda^l of the stage-l surrogate sum_i lambda_i |c_i|.

    Args:
        spec: RegularizerSpec
        prev_norms: Magnitudes of the previous stage solution (spectral norms of M_i)
        stage: Stage index l (0 uses the light weights)
    """
    t = _as_vector(prev_norms, 'prev_norms')
    if np.any(t < 0):
        raise InvalidInputError('prev_norms must be nonnegative')
    if stage < 0:
        raise InvalidParameterError(f'stage must be >= 0, got {stage}')
    if stage == 0:
        weights = np.full(t.shape, light_weight(spec))
    else:
        weights = penalty_derivative(spec, t)
    return SurrogateWeights(weights=weights, stage=stage)


def surrogate_value(spec, weights, c):
    """H^{l+1}(c) = sum_i |c_i| * lambda_i"""
    t = np.abs(_as_vector(c, 'coefficients'))
    if t.shape[0] != weights.size:
        raise DimensionError(f'expected {weights.size} coefficients, got {t.shape[0]}')
    return float(np.dot(t, weights.weights))
