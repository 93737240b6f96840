from dataclasses import replace

import numpy as np
import pytest

from sparsepose.exceptions import DimensionError
from sparsepose.models import AdmmState, MuAdaptation, Pose2D, RegularizerSpec, SolverConfig, SurrogateWeights
from sparsepose.services.dictionary import random_dictionary
from sparsepose.services.geometry import centralize
from sparsepose.services.simulation import generate_sparse_truth
from sparsepose.services.solver import (LeastSquaresSystem, adapt_mu, adaptive_tau, admm_iterate,
                                        multistage_solve, recover_frames, solve_stage)


FIXED_MU = MuAdaptation(enabled=False)


def _fit(stack, dictionary):
    return np.einsum('ijk,ikl->jl', stack, dictionary.matrices)


def _random_state(rng, D, mu=1.3):
    return AdmmState(rng.standard_normal((D, 2, 3)), rng.standard_normal((D, 2, 3)),
                     rng.standard_normal((D, 2, 3)), mu)


def test_zero_is_a_fixed_point(small_dictionary):
    D = small_dictionary.size
    state, record = admm_iterate(Pose2D(np.zeros((2, 12))), small_dictionary,
                                 SurrogateWeights(np.full(D, 0.5)), AdmmState.zeros(D, 1.0))
    assert np.all(state.M == 0) and np.all(state.V == 0) and np.all(state.U == 0)
    assert record.objective == 0.0


@pytest.mark.parametrize('order', ['standard', 'dual_first'])
def test_v_update_zeroes_gradient(rng, order):
    for seed in range(50):
        dictionary = random_dictionary(4, 9, rng_seed=seed)
        old = _random_state(rng, 4)
        Y = Pose2D(rng.standard_normal((2, 9)))
        weights = SurrogateWeights(rng.uniform(0, 1, 4))
        new, _ = admm_iterate(Y, dictionary, weights, old, update_order=order)
        # gradient of the augmented Lagrangian in V_i at the updated point
        residual = Y.points - _fit(new.V, dictionary)
        coupling = new.U if order == 'standard' else new.U + old.mu * (new.M - new.V)
        grad = -np.einsum('jl,ikl->ijk', residual, dictionary.matrices) - coupling
        scale = 1.0 + np.linalg.norm(Y.points @ dictionary.stacked.T)
        assert np.linalg.norm(grad) <= 1e-8 * scale


def test_least_squares_system_matches_direct_inverse(small_dictionary, rng):
    system = LeastSquaresSystem(small_dictionary)
    rhs = rng.standard_normal((2, 3 * small_dictionary.size))
    B = small_dictionary.stacked
    direct = rhs @ np.linalg.inv(B @ B.T + 0.7 * np.eye(B.shape[0]))
    assert np.allclose(system.solve(rhs, 0.7), direct, atol=1e-9)


def test_unregularized_single_basis_is_least_squares(rng):
    dictionary = random_dictionary(1, 8, rng_seed=2)
    Y = Pose2D(rng.standard_normal((2, 8)))
    config = SolverConfig(inner_iterations_per_stage=2000, primal_tol=1e-12, dual_tol=1e-12, mu_adapt=FIXED_MU)
    result = solve_stage(Y, dictionary, SurrogateWeights([0.0]), AdmmState.zeros(1, 1.0), config)
    B = dictionary.matrices[0]
    expected = Y.points @ B.T @ np.linalg.inv(B @ B.T)
    assert np.allclose(result.data_stack.matrices[0], expected, atol=1e-7)


def test_zero_weight_stage_fits_consistent_data(small_dictionary):
    truth = generate_sparse_truth(small_dictionary, 3, rng_seed=4)
    config = SolverConfig(inner_iterations_per_stage=3000, primal_tol=1e-10, dual_tol=1e-10, mu_adapt=FIXED_MU)
    D = small_dictionary.size
    result = solve_stage(truth.observation, small_dictionary, SurrogateWeights(np.zeros(D)),
                         AdmmState.zeros(D, 1.0), config)
    assert result.converged
    residual = truth.observation.points - _fit(result.data_stack.matrices, small_dictionary)
    assert np.linalg.norm(residual) <= 1e-6
    assert np.all(np.linalg.norm(result.state.M - result.state.V, axis=(1, 2)) <= config.primal_tol)

    again = solve_stage(truth.observation, small_dictionary, SurrogateWeights(np.zeros(D)), result.state, config)
    assert len(again.records) <= 2


def test_stage_respects_inner_budget(small_dictionary):
    truth = generate_sparse_truth(small_dictionary, 2, rng_seed=8)
    config = SolverConfig(inner_iterations_per_stage=20, primal_tol=1e-14, dual_tol=1e-14)
    result = solve_stage(truth.observation, small_dictionary, SurrogateWeights(np.full(8, 0.25)),
                         AdmmState.zeros(8, 1.0), config)
    assert len(result.records) == 20
    assert not result.converged


def test_adapt_mu():
    params = MuAdaptation()
    assert adapt_mu(1.0, 1.0, 1.0, params) == (1.0, 1.0)
    assert adapt_mu(1.0, 100.0, 1.0, params) == (2.0, 0.5)
    assert adapt_mu(1.0, 1.0, 100.0, params) == (0.5, 2.0)
    assert adapt_mu(1.0, 100.0, 1.0, MuAdaptation(enabled=False)) == (1.0, 1.0)


def test_adaptive_tau():
    norms = np.arange(20, dtype=float)
    assert adaptive_tau(norms, 10) == 10.0
    assert adaptive_tau(norms[:4], 10) == 0.0


def test_single_basis_recovers_unit_coefficient(unit_dictionary):
    Y = Pose2D(unit_dictionary.matrices[0][:2])
    config = SolverConfig(regularizer=RegularizerSpec.l1(1e-4))
    result = multistage_solve(Y, unit_dictionary, config)
    assert result.coefficients[0] == pytest.approx(1.0, abs=1e-3)
    assert np.allclose(result.rotations[0], np.eye(3), atol=1e-3)


def _frames(dictionary, count, k=3):
    return [generate_sparse_truth(dictionary, k, rng_seed=s).observation for s in range(count)]


def test_degenerate_regularizers_give_identical_iterates():
    dictionary = random_dictionary(16, 15, rng_seed=21)
    base = SolverConfig(max_stages=5, inner_iterations_per_stage=20)
    pairs = [
        (RegularizerSpec.lcnr(0.5, 0.5, 1.0), RegularizerSpec.l1(0.5)),
        (RegularizerSpec.lcnr(0.5, 0.0, 1.0), RegularizerSpec.capped_l1(0.5, 1.0)),
    ]
    for Y in _frames(dictionary, 3):
        for left, right in pairs:
            a = multistage_solve(Y, dictionary, replace(base, regularizer=left))
            b = multistage_solve(Y, dictionary, replace(base, regularizer=right))
            assert np.array_equal(a.coefficients, b.coefficients)
            assert np.array_equal(a.affine_stack.matrices, b.affine_stack.matrices)


def test_multistage_trace_is_consistent(small_dictionary):
    truth = generate_sparse_truth(small_dictionary, 2, rng_seed=3)
    config = SolverConfig(max_stages=4, inner_iterations_per_stage=10)
    result = multistage_solve(truth.observation, small_dictionary, config)
    trace = result.trace
    assert 1 <= trace.stages_run <= 4
    for field in (trace.stage_weights, trace.stage_norms, trace.stage_objectives, trace.stage_taus,
                  trace.stage_converged, trace.stage_seconds):
        assert len(field) == trace.stages_run
    assert len(trace.recalibration_seconds) <= trace.stages_run
    assert len(trace.iterations) == sum(len(trace.records_for_stage(s)) for s in range(trace.stages_run))
    assert np.allclose(trace.stage_weights[0], 0.25)
    assert np.all(result.coefficients >= 0)
    assert 0.0 <= trace.recalibration_fraction <= 1.0
    # adaptive tau takes over after stage 0
    if trace.stages_run > 1:
        tau = adaptive_tau(trace.stage_norms[0], config.tau_top_k)
        assert trace.stage_taus[1] == pytest.approx(tau if tau > 0 else config.regularizer.tau)


def test_stage_objective_settles_after_burn_in(small_dictionary):
    truth = generate_sparse_truth(small_dictionary, 2, rng_seed=12)
    config = SolverConfig(max_stages=3, inner_iterations_per_stage=400, primal_tol=1e-9, dual_tol=1e-9)
    trace = multistage_solve(truth.observation, small_dictionary, config).trace
    for stage in range(trace.stages_run):
        objectives = np.array([r.objective for r in trace.records_for_stage(stage)])
        assert np.all(np.isfinite(objectives))
        if objectives.size <= 5:
            continue
        best = np.minimum.accumulate(objectives[5:])
        assert np.all(np.diff(best) <= 1e-8)
        assert objectives[-1] <= best[0] + 1e-3 * max(1.0, abs(best[0]))



def test_multistage_rejects_mismatched_landmarks(small_dictionary):
    with pytest.raises(DimensionError, match='11 landmarks.*12'):
        multistage_solve(Pose2D(np.zeros((2, 11))), small_dictionary)


def test_scaled_data_scales_unregularized_solution(small_dictionary):
    truth = generate_sparse_truth(small_dictionary, 2, rng_seed=6)
    config = SolverConfig(regularizer=RegularizerSpec.l1(1e-9), max_stages=1,
                          inner_iterations_per_stage=3000, primal_tol=1e-11, dual_tol=1e-11, mu_adapt=FIXED_MU)
    one = multistage_solve(truth.observation, small_dictionary, config)
    two = multistage_solve(Pose2D(3.0 * truth.observation.points), small_dictionary, config)
    assert np.allclose(two.data_stack.matrices, 3.0 * one.data_stack.matrices, atol=1e-5)


def test_recover_frames_keeps_order(small_dictionary):
    frames = [centralize(Y)[0] for Y in _frames(small_dictionary, 4, k=2)]
    config = SolverConfig(max_stages=2, inner_iterations_per_stage=5)
    serial = recover_frames(frames, small_dictionary, config, jobs=1)
    threaded = recover_frames(frames, small_dictionary, config, jobs=3)
    for a, b in zip(serial, threaded):
        assert np.array_equal(a.coefficients, b.coefficients)
