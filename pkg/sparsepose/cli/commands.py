"""
CLI Commands

learn-dict, recover, synth, compare and theory.
"""

import logging
import os

import click
import numpy as np

from sparsepose.cli import cli
from sparsepose.cli.decorators import handles_errors
from sparsepose.cli.services import (build_experiment_spec, build_solver_config, parse_angles,
                                     regularizer_options, solver_options)
from sparsepose.config import Config
from sparsepose.exceptions import AlignmentUndefinedError, DimensionError, InputFileError
from sparsepose.models import Pose3D
from sparsepose.services.dictionary import learn_dictionary, load_dictionary, save_dictionary
from sparsepose.services.experiments import grid_search, parse_grid, run_experiment
from sparsepose.services.geometry import centralize, recovery_error
from sparsepose.services.reporting import export_grid, export_report
from sparsepose.services.simulation import add_observation_noise, add_shape_noise, synthesize_views
from sparsepose.services.solver import recover_frames
from sparsepose.services.storage import (read_poses_2d, read_poses_3d, write_coefficients, write_csv,
                                         write_poses, write_rotations, write_trace)
from sparsepose.services.theory import VACUOUS_NOTE, theory_report

logger = logging.getLogger(__name__)


def _seed(ctx):
    seed = ctx.obj.get('seed')
    return Config.DEFAULT_SEED if seed is None else seed


def _out_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise InputFileError(f'cannot create output directory {path}: {e}')
    return path


@cli.command('learn-dict')
@click.argument('corpus')
@click.option('--size', '-D', 'size', type=int, default=Config.DICTIONARY_SIZE, show_default=True,
              help='Number of basis poses.')
@click.option('--lambda', 'lam', type=float, default=None,
              help='Sparse-coding weight (default: 0.1 x mean largest correlation).')
@click.option('--iterations', type=int, default=Config.LEARNING_ITERATIONS, show_default=True)
@click.option('--phi', type=float, default=Config.PHI, show_default=True, help='Squared norm of every basis row.')
@click.option('--out', required=True, help='Dictionary JSON to write.')
@click.pass_context
@handles_errors
def learn_dict(ctx, corpus, size, lam, iterations, phi, out):
    """Learn a pose dictionary from a 3D pose CSV."""
    poses = read_poses_3d(corpus)
    dictionary, trace = learn_dictionary(poses, size, sparsity_lambda=lam, iterations=iterations,
                                         rng_seed=_seed(ctx), phi=phi)
    for i, (coded, updated, rescaled) in enumerate(zip(trace.after_coding, trace.after_update,
                                                      trace.after_rescale)):
        click.echo(f'iteration {i}: coded {coded:.6g} updated {updated:.6g} rescaled {rescaled:.6g}')
    save_dictionary(dictionary, out)
    click.echo(f'wrote {out} (D={dictionary.size}, p={dictionary.landmark_count}, '
               f'lambda={trace.sparsity_lambda:.6g})')


@cli.command()
@click.argument('pose2d')
@click.option('--dict', 'dict_path', required=True, help='Dictionary JSON.')
@click.option('--config', 'config_path', default=None, help='Solver config JSON.')
@click.option('--out', required=True, help='Output directory.')
@click.option('--truth', default=None, help='3D pose CSV to score the recovery against.')
@click.option('--align/--no-align', default=True, show_default=True,
              help='Similarity-align the estimate before scoring.')
@regularizer_options
@solver_options
@click.pass_context
@handles_errors
def recover(ctx, pose2d, dict_path, config_path, out, truth, align, **overrides):
    """Recover 3D pose(s) from a 2D pose CSV."""
    dictionary = load_dictionary(dict_path)
    frames = read_poses_2d(pose2d)
    if frames[0].landmark_count != dictionary.landmark_count:
        raise DimensionError(f'2D pose has {frames[0].landmark_count} landmarks but the dictionary has '
                             f'{dictionary.landmark_count}')
    truths = read_poses_3d(truth) if truth else None
    if truths is not None and len(truths) != len(frames):
        raise DimensionError(f'truth has {len(truths)} frames but the 2D pose file has {len(frames)}')
    config = build_solver_config(config_path, seed=ctx.obj.get('seed'), **overrides)
    results = recover_frames([centralize(Y)[0] for Y in frames], dictionary, config, jobs=ctx.obj['jobs'])

    _out_dir(out)
    write_poses(os.path.join(out, 'pose3d.csv'), [r.shape for r in results])
    write_coefficients(os.path.join(out, 'coefficients.csv'), [r.coefficients for r in results])
    write_rotations(os.path.join(out, 'rotations.csv'), [r.rotations for r in results])
    write_trace(os.path.join(out, 'trace.csv'), [r.trace for r in results])

    for frame, result in enumerate(results):
        line = (f'frame {frame}: final objective {result.final_objective:.6g}, '
                f'{result.trace.stages_run} stages, '
                f'{int(np.count_nonzero(result.coefficients))} active bases')
        if truths is not None:
            target = truths[frame].points
            target = Pose3D(target - target.mean(axis=1, keepdims=True))
            unaligned = recovery_error(result.shape, target, align=False)
            try:
                scored = f'{recovery_error(result.shape, target, align=align):.6g}'
            except AlignmentUndefinedError:
                logger.warning('frame %d: estimate collapsed to a point, alignment undefined', frame)
                scored = 'undefined'
            line += f', recovery error {scored} ({"aligned" if align else "unaligned"}), unaligned {unaligned:.6g}'
        click.echo(line)
    click.echo(f'wrote 4 files to {out}')


@cli.command()
@click.argument('pose3d')
@click.option('--angles', default=str(Config.VIEW_COUNT), show_default=True, callback=parse_angles,
              help='View count or comma-separated angles in degrees.')
@click.option('--noise-sigma', type=float, default=0.0, show_default=True,
              help='Shape noise relative to mean(|S|).')
@click.option('--observation-sigma', type=float, default=0.0, show_default=True,
              help='Gaussian noise on the 2D landmarks.')
@click.option('--omega', type=float, default=1.0, show_default=True, help='Camera scale.')
@click.option('--out', required=True, help='Output directory.')
@click.pass_context
@handles_errors
def synth(ctx, pose3d, angles, noise_sigma, observation_sigma, omega, out):
    """Render multi-view 2D poses from a 3D pose CSV."""
    shapes = read_poses_3d(pose3d)
    rng = np.random.default_rng(_seed(ctx))
    views, index = [], []
    for source, shape in enumerate(shapes):
        if noise_sigma > 0:
            shape = add_shape_noise(shape, noise_sigma, rng)
        for angle, Y in zip(angles, synthesize_views(shape, angles, omega=omega)):
            if observation_sigma > 0:
                Y = add_observation_noise(Y, observation_sigma, rng)
            index.append([len(views), source, float(np.rad2deg(angle))])
            views.append(Y)
    _out_dir(out)
    write_poses(os.path.join(out, 'views.csv'), views)
    write_csv(os.path.join(out, 'index.csv'), ['frame', 'source_frame', 'angle'], index)
    click.echo(f'wrote {len(views)} views of {len(shapes)} poses to {out}')


@cli.command()
@click.argument('spec_path')
@click.option('--out', required=True, help='Output directory.')
@click.option('--trials', type=int, default=None, help='Trials per regularizer.')
@click.option('--noise-sigma', type=float, default=None, help='Shape noise relative to mean(|S|).')
@click.option('--angles', default=None, callback=parse_angles,
              help='View count or comma-separated angles in degrees.')
@click.option('--align/--no-align', default=None, help='Similarity-align estimates before scoring.')
@click.option('--grid', default=None, help="Parameter grid, e.g. 'alpha=0.5,1;beta=0.1,0.25'.")
@click.pass_context
@handles_errors
def compare(ctx, spec_path, out, trials, noise_sigma, angles, align, grid):
    """Run a synthetic comparison of regularizers."""
    spec = build_experiment_spec(spec_path, seed=ctx.obj.get('seed'), trials=trials,
                                 noise_sigma=noise_sigma, angles=angles, align=align)
    jobs = ctx.obj['jobs']
    report = run_experiment(spec, jobs=jobs)
    paths = export_report(report, _out_dir(out))
    for label in report.labels:
        summary = report.summaries[label]
        click.echo(f'{label}: median error {summary["median_recovery_error"]:.6g} '
                   f'(relative {summary["median_relative_error"]:.3g}), '
                   f'median stages to epsilon {summary["median_stages_to_epsilon"]:g}, '
                   f'success {summary["success_rate"]:.0%}, median {summary["median_seconds"]:.2f}s '
                   f'({summary["recalibration_fraction"]:.0%} recalibrating weights)')
    if report.comparison:
        c = report.comparison
        click.echo(f'stages to epsilon: {c["lcnr"]} {c["lcnr_median_stages_to_epsilon"]:g} vs '
                   f'{c["l1"]} {c["l1_median_stages_to_epsilon"]:g}')
    if grid:
        rows = grid_search(spec, parse_grid(grid), jobs=jobs)
        paths['grid'] = export_grid(rows, out)
        click.echo(f'grid search: {len(rows)} rows')
    click.echo('wrote ' + ', '.join(os.path.basename(p) for p in paths.values()) + f' to {out}')


@cli.command()
@click.option('--dict', 'dict_path', required=True, help='Dictionary JSON.')
@click.option('--config', 'config_path', default=None, help='Solver config JSON.')
@click.option('--e', 'e', type=float, default=Config.GATE_E, show_default=True,
              help='Free parameter of the noise gate.')
@click.option('--samples', type=int, default=Config.KAPPA_SAMPLES, show_default=True,
              help='Random matrices for the kappa estimate.')
@regularizer_options
@click.pass_context
@handles_errors
def theory(ctx, dict_path, config_path, e, samples, **overrides):
    """Print the error-decay diagnostics for a dictionary and config."""
    dictionary = load_dictionary(dict_path)
    config = build_solver_config(config_path, seed=ctx.obj.get('seed'), **overrides)
    report = theory_report(dictionary, config, e=e, samples=samples, rng_seed=_seed(ctx))
    click.echo(f'phi = {report.phi:g}')
    click.echo(f'regularizer = {config.regularizer.label}')
    if not report.applicable:
        for note in report.notes:
            click.echo(note)
        return
    click.echo(f'alpha + beta = {report.alpha + report.beta:g}')
    click.echo(f'gate (alpha+beta) >= phi*sqrt(3+e)/2 = {report.gate_half_threshold:.6g}: '
               f'{"pass" if report.gate_half else "fail"}')
    click.echo(f'gate (alpha+beta) >= phi*sqrt(3+e)/8 = {report.gate_eighth_threshold:.6g}: '
               f'{"pass" if report.gate_eighth else "fail"}')
    click.echo(f'success probability >= {report.success_probability:.6g}')
    if report.kappa is None:
        click.echo('kappa estimate unavailable')
    else:
        click.echo(f'κ̂ = {report.kappa:.6g}')
        click.echo(f'a = (α+β)/(κ̂²τ) = {report.a:.6g}')
        click.echo(f'tau gate tau > (alpha+beta)/kappa^2: {"pass" if report.tau_gate else "fail"}')
    if report.b is not None:
        click.echo(f'b = {report.b:.6g}')
    for note in report.notes:
        if note == VACUOUS_NOTE:
            click.echo(f'flag: {note}')
        else:
            click.echo(f'note: {note}')
