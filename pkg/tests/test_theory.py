import numpy as np
import pytest

from sparsepose.exceptions import DimensionError, InvalidParameterError
from sparsepose.models import AffineStack, RegularizerSpec, SolverConfig
from sparsepose.services.theory import (VACUOUS_NOTE, estimate_kappa, estimation_error, success_probability,
                                        theory_report)


def _diag(*values):
    """One 2x3 matrix per value with that value as its spectral norm"""
    return np.array([[[v, 0.0, 0.0], [0.0, 0.0, 0.0]] for v in values])


def test_estimation_error_of_exact_estimate_is_zero(rng):
    truth = rng.standard_normal((4, 2, 3))
    assert estimation_error(truth, truth) == 0.0


def test_estimation_error_examples():
    assert estimation_error(np.zeros((1, 2, 3)), _diag(3.0)) == pytest.approx(3.0)
    assert estimation_error(AffineStack(np.zeros((2, 2, 3))), _diag(3.0, 4.0)) == pytest.approx(5.0)


def test_estimation_error_subset():
    truth = _diag(3.0, 4.0, 12.0)
    assert estimation_error(np.zeros((3, 2, 3)), truth, subset=[0, 1]) == pytest.approx(5.0)
    assert estimation_error(np.zeros((3, 2, 3)), truth, subset=[]) == 0.0
    with pytest.raises(InvalidParameterError):
        estimation_error(np.zeros((3, 2, 3)), truth, subset=[3])


def test_estimation_error_shape_mismatch():
    with pytest.raises(DimensionError):
        estimation_error(np.zeros((2, 2, 3)), np.zeros((3, 2, 3)))


def test_kappa_is_deterministic_and_bounded(unit_dictionary, config):
    first, per_basis = estimate_kappa(unit_dictionary, samples=config.KAPPA_SAMPLES, rng_seed=3)
    second, _ = estimate_kappa(unit_dictionary, samples=config.KAPPA_SAMPLES, rng_seed=3)
    assert first == second
    assert per_basis.shape == (1,)
    # orthonormal rows: ||MB||_F = ||M||_F, which lies in [||M||_*/sqrt(2), ||M||_*]
    assert 1 / np.sqrt(2) - 1e-12 <= first <= 1.0


def test_kappa_rejects_zero_samples(unit_dictionary):
    with pytest.raises(InvalidParameterError):
        estimate_kappa(unit_dictionary, samples=0)


def test_success_probability_is_clipped():
    assert success_probability(16, 1.0) == 0.0
    assert 0.99 < success_probability(1, 60.0) <= 1.0


def test_gate_thresholds_for_unit_phi(unit_dictionary):
    report = theory_report(unit_dictionary, SolverConfig(), e=1.0, samples=200, rng_seed=0)
    assert report.applicable
    assert report.gate_half_threshold == pytest.approx(1.0)
    assert report.gate_eighth_threshold == pytest.approx(0.25)
    # default lcnr: alpha + beta = 1.25
    assert report.gate_half and report.gate_eighth


def test_zero_truth_counts(small_dictionary):
    report = theory_report(small_dictionary, SolverConfig(), truth=np.zeros((8, 2, 3)), samples=200, rng_seed=0)
    assert report.active_count == 0
    assert report.small_count == 8
    assert report.initial_error == 0.0


def test_truth_shape_is_checked(small_dictionary):
    with pytest.raises(DimensionError):
        theory_report(small_dictionary, SolverConfig(), truth=np.zeros((3, 2, 3)), samples=50)


def test_tiny_tau_is_vacuous(unit_dictionary):
    config = SolverConfig(regularizer=RegularizerSpec.lcnr(1.0, 0.25, 1e-6), tau_top_k=None)
    report = theory_report(unit_dictionary, config, truth=_diag(1.0), samples=200, rng_seed=0)
    assert report.vacuous
    assert report.a >= 1
    assert VACUOUS_NOTE in report.notes
    assert report.bound_curve == ()


def test_bound_curve_decreases(unit_dictionary):
    config = SolverConfig(regularizer=RegularizerSpec.lcnr(1.0, 0.25, 10.0), tau_top_k=None)
    report = theory_report(unit_dictionary, config, truth=_diag(1.0), samples=500, rng_seed=0, stages=5)
    assert not report.vacuous
    assert report.tau_gate
    assert len(report.bound_curve) == 5
    assert all(b <= a for a, b in zip(report.bound_curve, report.bound_curve[1:]))
    assert report.bound_curve[0] == pytest.approx(report.initial_error + report.b / (1 - report.a))


def test_adaptive_tau_is_noted(unit_dictionary):
    report = theory_report(unit_dictionary, SolverConfig(), samples=100, rng_seed=0)
    assert any('adaptive' in note for note in report.notes)


def test_logarithm_is_not_applicable(unit_dictionary):
    config = SolverConfig(regularizer=RegularizerSpec.logarithm(0.5, 1.0))
    report = theory_report(unit_dictionary, config, samples=100)
    assert not report.applicable
    assert report.kappa is None
    assert 'theory not applicable to the logarithm regularizer' in report.notes


def test_l1_uses_lambda_for_both_rates(unit_dictionary):
    config = SolverConfig(regularizer=RegularizerSpec.l1(0.5))
    report = theory_report(unit_dictionary, config, samples=100, rng_seed=0)
    assert report.alpha == report.beta == 0.5


def test_e_must_be_positive(unit_dictionary):
    with pytest.raises(InvalidParameterError):
        theory_report(unit_dictionary, SolverConfig(), e=0.0)
