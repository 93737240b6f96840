"""
Solver Services

Weighted spectral-norm stages solved by ADMM, wrapped in the multi-stage
reweighting loop.

The augmented Lagrangian keeps two copies of the affine stack: M carries the
spectral-norm penalty and V the data term, coupled by the (unscaled)
multiplier U and the step mu:

    1/2 ||Y - sum V_i B_i||^2 + sum lam_i ||M_i||_2
        + sum <U_i, M_i - V_i> + mu/2 sum ||M_i - V_i||^2
"""

import logging
import time
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
from scipy import linalg

from sparsepose.exceptions import DimensionError, InvalidParameterError
from sparsepose.models import AdmmState, AffineStack, IterationRecord, RecoveryResult, SolveTrace, SolverConfig
from sparsepose.services.geometry import reconstruct_shape, recover_rotations
from sparsepose.services.linalg import prox_spectral_batch, spectral_norms
from sparsepose.services.regularizers import eval_penalty, surrogate_weights

logger = logging.getLogger(__name__)

StageResult = namedtuple('StageResult', ['state', 'solution', 'data_stack', 'records', 'converged'])


def _flatten(stack):
    """(D, 2, 3) -> [M_1 M_2 ... M_D] of shape (2, 3D)"""
    return np.transpose(stack, (1, 0, 2)).reshape(2, -1)


def _unflatten(flat, size):
    return np.transpose(flat.reshape(2, size, 3), (1, 0, 2))


class LeastSquaresSystem:
    """
    Cached solver for the joint V-update

        V = (Y B^T + mu M + U) (B B^T + mu I_3D)^-1

    with B the (3D, p) vertical stack of the bases. The inverse is applied
    through the Woodbury identity so only the p x p matrix mu I + B^T B is
    factored, once per distinct mu.
    """

    def __init__(self, dictionary):
        self.size = dictionary.size
        self.stacked = dictionary.stacked
        self.gram = self.stacked.T @ self.stacked
        self._factors = {}

    def _factor(self, mu):
        if mu not in self._factors:
            p = self.gram.shape[0]
            self._factors[mu] = linalg.cho_factor(self.gram + mu * np.eye(p))
        return self._factors[mu]

    def solve(self, rhs, mu):
        """Right-multiply a (2, 3D) matrix by (B B^T + mu I)^-1"""
        inner = linalg.cho_solve(self._factor(mu), (rhs @ self.stacked).T).T
        return (rhs - inner @ self.stacked.T) / mu

    def projection_term(self, Y):
        return Y @ self.stacked.T

    def fit(self, stack):
        """sum_i M_i B_i"""
        return _flatten(stack) @ self.stacked


def _check_dimensions(Y, dictionary):
    if Y.landmark_count != dictionary.landmark_count:
        raise DimensionError(
            f'2D pose has {Y.landmark_count} landmarks but the dictionary has {dictionary.landmark_count}')


def admm_iterate(Y, dictionary, weights, state, system=None, update_order='standard', stage=0, iteration=0):
    """
    One ADMM sweep: prox on M, joint least squares on V, ascent on U.

    With update_order 'dual_first' the multiplier is advanced before the
    V-update, so V sees the new U.

    Returns:
        (new AdmmState, IterationRecord)
    """
    _check_dimensions(Y, dictionary)
    if weights.size != dictionary.size or state.size != dictionary.size:
        raise DimensionError(
            f'weights ({weights.size}) and state ({state.size}) must match dictionary size {dictionary.size}')
    if not state.mu > 0:
        raise InvalidParameterError(f'mu must be positive, got {state.mu}')
    system = system or LeastSquaresSystem(dictionary)
    mu = state.mu
    Yp = Y.points

    M = prox_spectral_batch(state.V - state.U / mu, weights.weights / mu)
    if update_order == 'dual_first':
        U = state.U + mu * (M - state.V)
        rhs = system.projection_term(Yp) + mu * _flatten(M) + _flatten(U)
        V = _unflatten(system.solve(rhs, mu), dictionary.size)
    else:
        rhs = system.projection_term(Yp) + mu * _flatten(M) + _flatten(state.U)
        V = _unflatten(system.solve(rhs, mu), dictionary.size)
        U = state.U + mu * (M - V)

    residual = Yp - system.fit(V)
    objective = 0.5 * float(np.sum(residual ** 2)) + float(np.dot(weights.weights, spectral_norms(M)))
    primal = float(np.linalg.norm(M - V))
    dual = float(mu * np.linalg.norm(V - state.V))
    record = IterationRecord(stage=stage, iteration=iteration, objective=objective,
                             primal_residual=primal, dual_residual=dual, mu=mu)
    return AdmmState(M, V, U, mu), record


def adapt_mu(mu, primal_residual, dual_residual, params):
    """
    Residual balancing of the step size.

    Returns:
        (new mu, factor mu / new mu by which the scaled dual U / mu changes)
    """
    if not mu > 0:
        raise InvalidParameterError(f'mu must be positive, got {mu}')
    if not params.enabled:
        return mu, 1.0
    if primal_residual > params.ratio * dual_residual:
        new_mu = mu * params.factor
    elif dual_residual > params.ratio * primal_residual:
        new_mu = mu / params.factor
    else:
        return mu, 1.0
    return new_mu, mu / new_mu


def solve_stage(Y, dictionary, weights, warm_start, config, stage=0, system=None):
    """
    Run ADMM sweeps until both residuals are below tolerance or the inner budget is spent.

    Returns:
        StageResult(state, solution (M-copy), data_stack (V-copy), records, converged)
    """
    system = system or LeastSquaresSystem(dictionary)
    state = warm_start
    records = []
    converged = False
    for iteration in range(config.inner_iterations_per_stage):
        state, record = admm_iterate(Y, dictionary, weights, state, system=system,
                                     update_order=config.update_order, stage=stage, iteration=iteration)
        records.append(record)
        if record.primal_residual <= config.primal_tol and record.dual_residual <= config.dual_tol:
            converged = True
            break
        mu, _ = adapt_mu(state.mu, record.primal_residual, record.dual_residual, config.mu_adapt)
        if mu != state.mu:
            # U is stored unscaled, so only the step changes
            logger.debug('stage %d iteration %d: mu %g -> %g', stage, iteration, state.mu, mu)
            state = replace(state, mu=mu)
    if not converged:
        logger.debug('stage %d stopped at the inner budget (primal %.3g, dual %.3g)',
                     stage, records[-1].primal_residual, records[-1].dual_residual)
    return StageResult(state, AffineStack(state.M), AffineStack(state.V), records, converged)


def adaptive_tau(norms, top_k):
    """k-th highest spectral norm (the smallest one when D < k)"""
    ordered = np.sort(np.asarray(norms, dtype=float))[::-1]
    return float(ordered[min(top_k, ordered.size) - 1])


def multistage_solve(Y, dictionary, config=None):
    """
    Recover affine matrices, coefficients, rotations and the 3D shape from a centred 2D pose.

    Stage 0 uses the light weights; each later stage reweights from the
    spectral norms of the previous stage solution and warm-starts ADMM from its
    state. With tau_top_k set, tau is replaced after stage 0 by the k-th highest
    spectral norm and then kept fixed. Stages stop early once consecutive
    solutions differ by at most primal_tol in summed spectral-norm distance.

    Args:
        Y: Centralized Pose2D
        dictionary: PoseDictionary
        config: SolverConfig (defaults when None)

    Returns:
        RecoveryResult
    """
    config = config or SolverConfig()
    _check_dimensions(Y, dictionary)
    D = dictionary.size
    spec = config.regularizer
    system = LeastSquaresSystem(dictionary)
    state = AdmmState.zeros(D, config.mu_init)
    trace = SolveTrace()

    weights = surrogate_weights(spec, np.zeros(D), 0)
    previous = None
    for stage in range(config.max_stages):
        started = time.perf_counter()
        result = solve_stage(Y, dictionary, weights, state, config, stage=stage, system=system)
        trace.stage_seconds.append(time.perf_counter() - started)
        state = result.state
        M = result.solution.matrices
        norms = spectral_norms(M)

        trace.iterations.extend(result.records)
        trace.stage_weights.append(weights.weights)
        trace.stage_norms.append(norms)
        trace.stage_stacks.append(result.solution)
        trace.stage_taus.append(spec.tau)
        trace.stage_converged.append(result.converged)
        residual = Y.points - system.fit(M)
        trace.stage_objectives.append(0.5 * float(np.sum(residual ** 2)) + eval_penalty(spec, norms))
        logger.debug('stage %d: objective %.6g, %d iterations, converged=%s',
                     stage, trace.stage_objectives[-1], len(result.records), result.converged)

        if previous is not None and float(np.sum(spectral_norms(M - previous))) <= config.primal_tol:
            logger.debug('stage solutions settled after stage %d', stage)
            break
        previous = M
        if stage == config.max_stages - 1:
            break

        started = time.perf_counter()
        if stage == 0 and spec.uses_tau and config.tau_top_k is not None:
            tau = adaptive_tau(norms, config.tau_top_k)
            if tau > 0:
                spec = replace(spec, tau=tau)
            else:
                logger.warning('adaptive tau is zero after stage 0; keeping tau=%g', spec.tau)
        weights = surrogate_weights(spec, norms, stage + 1)
        trace.recalibration_seconds.append(time.perf_counter() - started)

    coefficients, rotations = recover_rotations(state.M)
    final = AffineStack(state.M)
    shape = reconstruct_shape(final, dictionary)
    logger.info('solved %d stages, final objective %.6g, %d active bases', trace.stages_run,
                trace.stage_objectives[-1], int(np.count_nonzero(coefficients)))
    return RecoveryResult(affine_stack=final, coefficients=coefficients, rotations=rotations,
                          shape=shape, trace=trace, data_stack=AffineStack(state.V))


def recover_frames(frames, dictionary, config=None, jobs=1):
    """Solve independent frames on one shared dictionary; results keep frame order"""
    frames = list(frames)
    if jobs < 1:
        raise InvalidParameterError(f'jobs must be >= 1, got {jobs}')
    if jobs == 1 or len(frames) <= 1:
        return [multistage_solve(Y, dictionary, config) for Y in frames]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda Y: multistage_solve(Y, dictionary, config), frames))
