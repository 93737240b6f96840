"""
Experiment Services

Synthetic benchmark: sample a ground truth, view it from a turntable of
angles, solve every view with each regularizer and aggregate the recovery
and estimation curves.
"""

import itertools
import logging
import time
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from sparsepose.exceptions import AlignmentUndefinedError, InvalidParameterError
from sparsepose.models import ExperimentReport, Pose3D, RegularizerKind, TrialRecord
from sparsepose.services.dictionary import load_dictionary, random_dictionary
from sparsepose.services.geometry import reconstruct_shape, recovery_error, rotation_about_y
from sparsepose.services.simulation import (add_observation_noise, add_shape_noise, generate_sparse_truth,
                                            synthesize_views, view_of_truth)
from sparsepose.services.solver import multistage_solve
from sparsepose.services.storage import read_poses_3d
from sparsepose.services.theory import estimation_error

logger = logging.getLogger(__name__)

# a view whose objective grows beyond this multiple of 1/2 ||Y||^2 counts as diverged
DIVERGENCE_FACTOR = 1e3
SUCCESS_THRESHOLD = 1e-2

# summary keys that depend on wall time and are kept out of exported CSVs
RUNTIME_KEYS = ('median_seconds', 'recalibration_fraction')

View = namedtuple('View', ['observation', 'shape', 'truth'])
Trial = namedtuple('Trial', ['index', 'views'])


def pad_curves(curves):
    """Stack curves of unequal length, padding each with its last value"""
    curves = [list(c) for c in curves if len(c)]
    if not curves:
        return np.zeros((0, 0))
    length = max(len(c) for c in curves)
    return np.array([c + [c[-1]] * (length - len(c)) for c in curves])


def _median_curve(curves):
    stacked = pad_curves(curves)
    return tuple(float(v) for v in np.median(stacked, axis=0)) if stacked.size else ()


def _shape_error(estimate, truth, align):
    try:
        return recovery_error(estimate, truth, align=align)
    except AlignmentUndefinedError:
        # a collapsed estimate has no alignment; its error is the truth's size
        return recovery_error(estimate, truth, align=False)


def _centred(shape):
    return Pose3D(shape.points - shape.points.mean(axis=1, keepdims=True))


def build_dictionary(spec, rng_seed):
    """Load the dictionary named by the spec or draw a random one"""
    if spec.dictionary_path:
        return load_dictionary(spec.dictionary_path)
    return random_dictionary(spec.dictionary_size, spec.landmark_count, spec.phi, rng_seed)


def _sparse_trial(spec, dictionary, index, rng):
    truth = generate_sparse_truth(dictionary, spec.active_count, spec.coefficient_range,
                                  rng_seed=rng, shared_rotation=spec.shared_rotation)
    source = truth.shape
    if spec.noise_sigma > 0:
        source = add_shape_noise(source, spec.noise_sigma, rng)
    observations = synthesize_views(source, spec.angles)
    views = []
    for angle, Y in zip(spec.angles, observations):
        shape, stack, _ = view_of_truth(truth, angle, dictionary)
        if spec.observation_sigma > 0:
            Y = add_observation_noise(Y, spec.observation_sigma, rng)
        views.append(View(Y, shape, stack))
    return Trial(index, views)


def _corpus_trial(spec, corpus, index, rng):
    shape = _centred(corpus[int(rng.integers(len(corpus)))])
    if spec.noise_sigma > 0:
        noisy = add_shape_noise(shape, spec.noise_sigma, rng)
    else:
        noisy = shape
    observations = synthesize_views(noisy, spec.angles)
    views = []
    for angle, Y in zip(spec.angles, observations):
        rotated = Pose3D(rotation_about_y(angle) @ shape.points)
        if spec.observation_sigma > 0:
            Y = add_observation_noise(Y, spec.observation_sigma, rng)
        views.append(View(Y, rotated, None))
    return Trial(index, views)


def prepare_trials(spec, dictionary):
    """Draw every trial's views up front from per-trial seed streams"""
    streams = np.random.SeedSequence(spec.seed).spawn(spec.trials)
    corpus = read_poses_3d(spec.corpus_path) if spec.truth_mode == 'corpus' else None
    trials = []
    for index, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        if corpus is None:
            trials.append(_sparse_trial(spec, dictionary, index, rng))
        else:
            trials.append(_corpus_trial(spec, corpus, index, rng))
    return trials


def run_arm(spec, dictionary, regularizer, label, trial):
    """Solve every view of one trial with one regularizer; returns a TrialRecord"""
    config = replace(spec.solver, regularizer=regularizer)
    started = time.perf_counter()
    recovery_curves, estimation_curves = [], []
    finals, relatives, unaligned, objectives = [], [], [], []
    stage_time = recalibration_time = 0.0
    diverged = False
    for view in trial.views:
        result = multistage_solve(view.observation, dictionary, config)
        curve = [_shape_error(reconstruct_shape(stack, dictionary), view.shape, spec.align)
                 for stack in result.trace.stage_stacks]
        recovery_curves.append(curve)
        if view.truth is not None:
            estimation_curves.append([estimation_error(stack, view.truth) for stack in result.trace.stage_stacks])
        size = float(np.linalg.norm(view.shape.points))
        finals.append(curve[-1])
        relatives.append(curve[-1] / size if size > 0 else 0.0)
        unaligned.append(_shape_error(result.shape, view.shape, False))
        stage_time += sum(result.trace.stage_seconds)
        recalibration_time += sum(result.trace.recalibration_seconds)

        peak = max((r.objective for r in result.trace.iterations), default=0.0)
        objectives.append(peak)
        baseline = max(0.5 * float(np.sum(view.observation.points ** 2)), np.finfo(float).tiny)
        if not np.isfinite(peak) or peak > DIVERGENCE_FACTOR * baseline:
            diverged = True

    recovery = _mean_curve(recovery_curves)
    estimation = _mean_curve(estimation_curves)
    initial = float(np.mean([np.linalg.norm(v.shape.points) for v in trial.views]))
    hits = [l for l, err in enumerate(recovery) if err <= spec.epsilon * initial]
    seconds = time.perf_counter() - started
    busy = stage_time + recalibration_time
    logger.debug('%s trial %d: error %.4g in %d stages (%.2fs)', label, trial.index,
                 float(np.mean(finals)), len(recovery), seconds)
    return TrialRecord(
        regularizer=label, trial=trial.index,
        recovery_error=float(np.mean(finals)), relative_error=float(np.mean(relatives)),
        unaligned_error=float(np.mean(unaligned)), recovery_curve=recovery,
        estimation_curve=estimation, stages_to_epsilon=hits[0] + 1 if hits else None,
        seconds=seconds, max_objective=float(max(objectives)), diverged=diverged,
        recalibration_fraction=recalibration_time / busy if busy > 0 else 0.0)


def _mean_curve(curves):
    stacked = pad_curves(curves)
    return tuple(float(v) for v in stacked.mean(axis=0)) if stacked.size else ()


def _stages_value(record):
    return float(record.stages_to_epsilon) if record.stages_to_epsilon is not None else float('inf')


def summarize(records):
    """Aggregate statistics of one regularizer's records"""
    errors = np.array([r.recovery_error for r in records])
    relative = np.array([r.relative_error for r in records])
    stages = np.array([_stages_value(r) for r in records])
    q1, median, q3 = np.percentile(errors, [25, 50, 75])
    return {
        'trials': len(records),
        'median_recovery_error': float(median),
        'q1_recovery_error': float(q1),
        'q3_recovery_error': float(q3),
        'median_relative_error': float(np.median(relative)),
        'mean_relative_error': float(np.mean(relative)),
        'success_rate': float(np.mean(relative <= SUCCESS_THRESHOLD)),
        'median_unaligned_error': float(np.median([r.unaligned_error for r in records])),
        'median_stages_to_epsilon': float(np.median(stages)),
        'median_stages_run': float(np.median([r.stages_run for r in records])),
        'diverged_trials': int(sum(r.diverged for r in records)),
        'median_seconds': float(np.median([r.seconds for r in records])),
        'recalibration_fraction': float(np.median([r.recalibration_fraction for r in records])),
    }


def compare_arms(spec, summaries):
    """Stages-to-epsilon comparison of the first LCNR and the first L1 arm, if both ran"""
    kinds = {reg.kind: label for reg, label in zip(reversed(spec.regularizers), reversed(spec.labels))}
    lcnr, l1 = kinds.get(RegularizerKind.LCNR), kinds.get(RegularizerKind.L1)
    if lcnr is None or l1 is None:
        return None
    a, b = summaries[lcnr], summaries[l1]
    return {
        'lcnr': lcnr,
        'l1': l1,
        'lcnr_median_stages_to_epsilon': a['median_stages_to_epsilon'],
        'l1_median_stages_to_epsilon': b['median_stages_to_epsilon'],
        'lcnr_median_recovery_error': a['median_recovery_error'],
        'l1_median_recovery_error': b['median_recovery_error'],
        'lcnr_not_slower': bool(a['median_stages_to_epsilon'] <= b['median_stages_to_epsilon']),
    }


def run_experiment(spec, jobs=1):
    """
    Run every (trial, regularizer) arm of an experiment.

    All arms of a trial see the same views. Randomness comes only from
    spec.seed, so repeated runs give identical errors and curves.

    Args:
        spec: ExperimentSpec
        jobs: Worker threads for the arms

    Returns:
        ExperimentReport
    """
    if jobs < 1:
        raise InvalidParameterError(f'jobs must be >= 1, got {jobs}')
    dictionary_stream = np.random.SeedSequence([spec.seed, 1])
    dictionary = build_dictionary(spec, np.random.default_rng(dictionary_stream))
    trials = prepare_trials(spec, dictionary)
    labels = spec.labels
    tasks = [(reg, label, trial) for reg, label in zip(spec.regularizers, labels) for trial in trials]
    logger.info('running %d trials x %d regularizers over %d views', spec.trials, len(labels), len(spec.angles))

    def work(task):
        return run_arm(spec, dictionary, *task)

    if jobs == 1:
        records = [work(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(work, tasks))

    report = ExperimentReport(labels=labels, records=records)
    for label in labels:
        own = report.records_for(label)
        report.summaries[label] = summarize(own)
        report.median_curves[label] = {
            'recovery': _median_curve([r.recovery_curve for r in own]),
            'estimation': _median_curve([r.estimation_curve for r in own]),
        }
    report.comparison = compare_arms(spec, report.summaries)
    if report.comparison and not report.comparison['lcnr_not_slower']:
        logger.warning('LCNR needed more median stages to reach epsilon than L1 (%s vs %s)',
                       report.comparison['lcnr_median_stages_to_epsilon'],
                       report.comparison['l1_median_stages_to_epsilon'])
    return report


GRID_KEYS = ('alpha', 'beta', 'tau', 'lambda', 'gamma')


def parse_grid(text):
    """'alpha=0.5,1;beta=0.25' -> {'alpha': [0.5, 1.0], 'beta': [0.25]}"""
    grid = {}
    for part in filter(None, (p.strip() for p in text.split(';'))):
        name, _, values = part.partition('=')
        name = name.strip()
        if name not in GRID_KEYS or not values.strip():
            raise InvalidParameterError(f'grid entries look like name=v1,v2 with name in {GRID_KEYS}, got {part!r}')
        try:
            grid[name] = [float(v) for v in values.split(',')]
        except ValueError:
            raise InvalidParameterError(f'grid values for {name} must be numbers')
    if not grid:
        raise InvalidParameterError('grid is empty')
    return grid


def grid_search(spec, grid, jobs=1):
    """
    Re-run the experiment for every combination of regularizer parameter values.

    Each combination is applied to every arm that has the named parameters;
    combinations an arm rejects (for example beta > alpha) are skipped.

    Returns:
        List of row dicts: regularizer, the parameter values, median errors and stages
    """
    names = list(grid)
    rows = []
    for combo in itertools.product(*(grid[name] for name in names)):
        settings = dict(zip(names, combo))
        arms = []
        for reg in spec.regularizers:
            allowed = reg.to_dict()
            changes = {('lam' if k == 'lambda' else k): v for k, v in settings.items() if k in allowed}
            try:
                arms.append(replace(reg, **changes))
            except InvalidParameterError as e:
                logger.warning('skipping %s with %s: %s', reg.kind.value, settings, e)
        if not arms:
            continue
        report = run_experiment(replace(spec, regularizers=tuple(arms)), jobs=jobs)
        for arm, label in zip(arms, report.labels):
            summary = report.summaries[label]
            row = {'regularizer': arm.kind.value}
            row.update({k: v for k, v in arm.to_dict().items() if k != 'kind'})
            row.update({
                'median_recovery_error': summary['median_recovery_error'],
                'median_relative_error': summary['median_relative_error'],
                'median_stages_to_epsilon': summary['median_stages_to_epsilon'],
            })
            rows.append(row)
    return rows
