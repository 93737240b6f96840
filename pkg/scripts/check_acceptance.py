"""
Acceptance-scale statistical checks.

Runs the seeded synthetic benchmarks that are too slow for the unit tests
(exact recovery rate, estimation-error decay against the bound, stage-count
ordering of LCNR against l1, and noise robustness) and prints one verdict
per check. Exits 1 if a hard check fails.

    python scripts/check_acceptance.py --trials 50
"""

import sys
from dataclasses import replace

import click
import numpy as np

sys.path.insert(0, '.')

from sparsepose import init_logging  # noqa: E402
from sparsepose.config import Config  # noqa: E402
from sparsepose.models import ExperimentSpec, RegularizerSpec, SolverConfig, evenly_spaced_angles  # noqa: E402
from sparsepose.services.dictionary import random_dictionary  # noqa: E402
from sparsepose.services.experiments import run_experiment  # noqa: E402
from sparsepose.services.simulation import generate_sparse_truth  # noqa: E402
from sparsepose.services.solver import multistage_solve  # noqa: E402
from sparsepose.services.theory import estimate_kappa, estimation_error, theory_report  # noqa: E402


def _verdict(name, ok, detail):
    click.echo(f'[{"pass" if ok else "FAIL"}] {name}: {detail}')
    return ok


def check_exact_recovery(trials, jobs):
    spec = ExperimentSpec(angles=evenly_spaced_angles(36),
                          regularizers=(RegularizerSpec.lcnr(1.0, 0.25, 1.0),), trials=trials, seed=1)
    summary = run_experiment(spec, jobs=jobs).summaries['lcnr']
    return _verdict('noiseless recovery', summary['success_rate'] >= 0.9,
                    f'{summary["success_rate"]:.0%} of {trials} trials within 1e-2 relative error')


def check_decay_bound(trials):
    dictionary = random_dictionary(32, Config.EXPERIMENT_LANDMARKS, rng_seed=2)
    kappa, _ = estimate_kappa(dictionary, rng_seed=2)
    alpha, beta = 1.0, 0.25
    # a = (alpha + beta) / (kappa^2 tau) = 1/2; active norms sit above 2 tau
    tau = 2 * (alpha + beta) / kappa ** 2
    config = SolverConfig(regularizer=RegularizerSpec.lcnr(alpha, beta, tau), tau_top_k=None)
    curves, within = [], 0
    for trial in range(trials):
        sample = generate_sparse_truth(dictionary, 3, coefficient_range=(3 * tau, 6 * tau), rng_seed=100 + trial)
        result = multistage_solve(sample.observation, dictionary, config)
        errors = np.array([estimation_error(stack, sample.truth) for stack in result.trace.stage_stacks])
        report = theory_report(dictionary, config, truth=sample.truth, rng_seed=2, stages=errors.size)
        bound = np.asarray(report.bound_curve)
        curves.append(errors[-1] if errors.size else np.nan)
        if bound.size and np.all(errors <= bound[:errors.size]):
            within += 1
        if trial == 0:
            first = errors
    slack = 1e-4 * max(first[0], 1.0) if first.size else 0.0
    monotone = bool(first.size < 2 or np.all(np.diff(first) <= slack))
    ok = monotone and within >= 0.9 * trials
    return _verdict('estimation error under the decay bound', ok,
                    f'{within}/{trials} trials below the bound, kappa={kappa:.3g}, tau={tau:.3g}, '
                    f'first-trial curve {"nonincreasing" if monotone else "increases"}, '
                    f'median final error {np.nanmedian(curves):.3g}')



def check_stage_ordering(trials, jobs):
    spec = ExperimentSpec(angles=evenly_spaced_angles(8), trials=trials, seed=3)
    comparison = run_experiment(spec, jobs=jobs).comparison
    _verdict('LCNR needs no more stages than l1', comparison['lcnr_not_slower'],
             f'median stages to epsilon {comparison["lcnr_median_stages_to_epsilon"]:g} vs '
             f'{comparison["l1_median_stages_to_epsilon"]:g} (soft check)')
    return True


def check_noise_robustness(trials, jobs):
    base = ExperimentSpec(angles=evenly_spaced_angles(8),
                          regularizers=(RegularizerSpec.lcnr(1.0, 0.25, 1.0),), trials=trials, seed=4)
    errors, diverged = {}, 0
    for sigma in (0.05, 0.1):
        summary = run_experiment(replace(base, noise_sigma=sigma), jobs=jobs).summaries['lcnr']
        errors[sigma] = summary['median_recovery_error']
        diverged += summary['diverged_trials']
    ok = errors[0.1] < 3 * errors[0.05] and diverged == 0
    return _verdict('noise robustness', ok,
                    f'median error {errors[0.05]:.4g} at 0.05, {errors[0.1]:.4g} at 0.1, {diverged} diverged')


@click.command()
@click.option('--trials', type=int, default=50, show_default=True)
@click.option('--jobs', type=int, default=Config.DEFAULT_JOBS, show_default=True)
def main(trials, jobs):
    init_logging(Config)
    results = [
        check_exact_recovery(trials, jobs),
        check_decay_bound(trials),
        check_stage_ordering(max(trials // 2, 1), jobs),
        check_noise_robustness(max(trials // 2, 1), jobs),
    ]
    sys.exit(0 if all(results) else 1)


if __name__ == '__main__':
    main()
