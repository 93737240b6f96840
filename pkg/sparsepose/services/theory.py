"""
Theory Diagnostics

Estimation error against a known affine truth, a sampled estimate of the
dictionary condition constant kappa, and the report of the stage-wise error
decay gates and bound.
"""

import logging

import numpy as np

from sparsepose.config import Config
from sparsepose.exceptions import DimensionError, InvalidParameterError
from sparsepose.models import AffineStack, RegularizerKind, SolverConfig, TheoryReport
from sparsepose.services.linalg import nuclear_norms, spectral_norms
from sparsepose.services.simulation import make_rng

logger = logging.getLogger(__name__)

VACUOUS_NOTE = 'decay bound vacuous for these parameters'


def _matrices(stack):
    return stack.matrices if isinstance(stack, AffineStack) else np.asarray(stack, dtype=float)


def estimation_error(stack, truth, subset=None):
    """sqrt(sum_{i in subset} ||truth_i - stack_i||_2^2); subset defaults to every basis"""
    M, T = _matrices(stack), _matrices(truth)
    if M.shape != T.shape:
        raise DimensionError(f'stack shape {M.shape} differs from truth shape {T.shape}')
    norms = spectral_norms(T - M)
    if subset is not None:
        index = np.asarray(list(subset), dtype=int)
        if index.size and (index.min() < 0 or index.max() >= norms.size):
            raise InvalidParameterError(f'subset indices must lie in [0, {norms.size - 1}]')
        norms = norms[index]
    return float(np.sqrt(np.sum(norms ** 2)))


def estimate_kappa(dictionary, samples=Config.KAPPA_SAMPLES, rng_seed=None):
    """
    Sampled lower estimate of each basis' condition constant.

    For every basis B_i this is the minimum of ||M B_i||_F / ||M||_* over
    `samples` Gaussian 2x3 matrices M. The result is an estimate, not a
    certified constant.

    Returns:
        (kappa = min over bases, per-basis array)
    """
    if samples < 1:
        raise InvalidParameterError(f'samples must be >= 1, got {samples}')
    rng = make_rng(rng_seed)
    M = rng.standard_normal((samples, 2, 3))
    nuclear = nuclear_norms(M)
    per_basis = np.array([
        np.min(np.linalg.norm(M @ basis, axis=(1, 2)) / nuclear) for basis in dictionary.matrices
    ])
    return float(per_basis.min()), per_basis


def success_probability(size, e):
    """1 - 2 D exp(-(e - 3 ln(1 + e/3)) / 2), clipped at zero"""
    return max(0.0, 1.0 - 2.0 * size * np.exp(-0.5 * (e - 3.0 * np.log1p(e / 3.0))))


def _alpha_beta(spec):
    kind = spec.kind
    if kind is RegularizerKind.LCNR:
        return spec.alpha, spec.beta
    if kind is RegularizerKind.CAPPED_L1:
        return spec.alpha, 0.0
    if kind is RegularizerKind.L1:
        return spec.lam, spec.lam
    return None, None


def theory_report(dictionary, config=None, truth=None, e=Config.GATE_E,
                  samples=Config.KAPPA_SAMPLES, rng_seed=None, stages=None):
    """
    Evaluate the error-decay analysis for a dictionary and solver configuration.

    Args:
        dictionary: PoseDictionary
        config: SolverConfig; its regularizer supplies alpha, beta and tau
        truth: Optional AffineStack of ground-truth affine matrices
        e: Free parameter of the noise-level gate (> 0)
        samples: Random matrices used to estimate kappa
        rng_seed: Seed for the kappa estimate
        stages: Length of the predicted bound curve (config.max_stages when None)

    Returns:
        TheoryReport
    """
    config = config or SolverConfig()
    if not e > 0:
        raise InvalidParameterError(f'e must be positive, got {e}')
    spec = config.regularizer
    phi = dictionary.phi
    D = dictionary.size
    alpha, beta = _alpha_beta(spec)
    notes = []

    half = phi * np.sqrt(3.0 + e) / 2.0
    eighth = phi * np.sqrt(3.0 + e) / 8.0
    probability = success_probability(D, e)
    if alpha is None:
        notes.append(f'theory not applicable to the {spec.kind.value} regularizer')
        return TheoryReport(phi=phi, alpha=float('nan'), beta=float('nan'), tau=spec.tau, e=e,
                            applicable=False, gate_half=False, gate_eighth=False,
                            gate_half_threshold=half, gate_eighth_threshold=eighth,
                            success_probability=probability, notes=tuple(notes))
    total = alpha + beta
    tau = spec.tau
    if config.tau_top_k is not None and spec.uses_tau:
        notes.append(f'tau is adaptive in the solver (top-{config.tau_top_k} rule); the configured tau={tau:g} is used here')

    kappa, per_basis, a, tau_gate, vacuous = None, (), None, None, None
    try:
        kappa, per_basis = estimate_kappa(dictionary, samples, rng_seed)
    except (ValueError, FloatingPointError) as err:
        logger.warning('kappa estimation failed: %s', err)
    if kappa is not None and np.isfinite(kappa) and kappa > 0:
        a = total / (kappa ** 2 * tau)
        tau_gate = tau > total / kappa ** 2
        vacuous = a >= 1
        if vacuous:
            notes.append(VACUOUS_NOTE)
    else:
        kappa = None
        notes.append('kappa estimate unavailable')

    active_count = small_count = b = initial_error = None
    curve = ()
    if truth is not None:
        T = _matrices(truth)
        if T.shape != (D, 2, 3):
            raise DimensionError(f'truth must have shape ({D}, 2, 3), got {T.shape}')
        truth_norms = spectral_norms(T)
        active_count = int(np.count_nonzero(truth_norms))
        small_count = int(np.count_nonzero(truth_norms <= 2 * tau))
        initial_error = float(np.sqrt(np.sum(truth_norms ** 2)))
        if kappa is not None:
            b = (total * np.sqrt(D) + alpha * np.sqrt(small_count) + beta * np.sqrt(active_count)) / (kappa ** 2 * tau)
            if not vacuous:
                count = config.max_stages if stages is None else stages
                curve = tuple(a ** l * initial_error + b / (1 - a) for l in range(count))

    report = TheoryReport(
        phi=phi, alpha=alpha, beta=beta, tau=tau, e=e, applicable=True,
        gate_half=bool(total >= half), gate_eighth=bool(total >= eighth),
        gate_half_threshold=half, gate_eighth_threshold=eighth,
        success_probability=probability, kappa=kappa, kappa_per_basis=tuple(per_basis),
        a=a, tau_gate=tau_gate, vacuous=vacuous, active_count=active_count,
        small_count=small_count, b=b, initial_error=initial_error, bound_curve=curve,
        notes=tuple(notes))
    logger.info('theory report: kappa=%s a=%s vacuous=%s', kappa, a, vacuous)
    return report
