"""
CLI Services

Layering of defaults, JSON config files and command-line flags.
"""

import os
from dataclasses import replace

import click
import numpy as np

from sparsepose.config import Config
from sparsepose.exceptions import InvalidParameterError
from sparsepose.models import ExperimentSpec, RegularizerKind, RegularizerSpec, SolverConfig, evenly_spaced_angles
from sparsepose.services.storage import load_json

# parameters a freshly selected regularizer kind starts from
KIND_DEFAULTS = {
    RegularizerKind.LCNR: {'alpha': Config.LCNR_ALPHA, 'beta': Config.LCNR_BETA, 'tau': Config.LCNR_TAU},
    RegularizerKind.CAPPED_L1: {'alpha': Config.LCNR_ALPHA, 'tau': Config.LCNR_TAU},
    RegularizerKind.L1: {'lam': Config.LCNR_BETA},
    RegularizerKind.LOGARITHM: {'lam': Config.LCNR_BETA, 'gamma': 1.0},
    RegularizerKind.LAPLACE: {'lam': Config.LCNR_BETA, 'gamma': 1.0},
}

_FLAGS = {'alpha': '--alpha', 'beta': '--beta', 'tau': '--tau', 'lam': '--lambda', 'gamma': '--gamma'}


def regularizer_options(f):
    """Attach --regularizer and its parameter flags to a command"""
    options = [
        click.option('--regularizer', type=click.Choice([k.value for k in RegularizerKind]), default=None,
                     help='Penalty family (overrides the config file).'),
        click.option('--alpha', type=float, default=None, help='Heavy rate below tau (lcnr, capped_l1).'),
        click.option('--beta', type=float, default=None, help='Light rate above tau (lcnr).'),
        click.option('--tau', type=float, default=None, help='Threshold (lcnr, capped_l1); initial value when adaptive.'),
        click.option('--lambda', 'lam', type=float, default=None, help='Weight (l1, logarithm, laplace).'),
        click.option('--gamma', type=float, default=None, help='Shape (logarithm, laplace).'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def solver_options(f):
    options = [
        click.option('--stages', type=int, default=None, help='Maximum number of reweighting stages.'),
        click.option('--inner-iters', type=int, default=None, help='ADMM sweeps per stage.'),
        click.option('--mu', type=float, default=None, help='Initial ADMM step size.'),
        click.option('--tau-top-k', type=int, default=None,
                     help='Adaptive tau as the k-th highest norm after stage 0 (0 keeps tau fixed).'),
        click.option('--update-order', type=click.Choice(['standard', 'dual_first']), default=None,
                     help='Advance the multiplier after (standard) or before the V-update.'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def override_regularizer(current, kind=None, **params):
    """
    Apply flag values to a regularizer.

    Selecting a different kind starts from that kind's defaults; parameters
    that do not belong to the resulting kind are rejected.
    """
    given = {k: v for k, v in params.items() if v is not None}
    target = RegularizerKind(kind) if kind is not None else current.kind
    if target is current.kind:
        base = {k: getattr(current, k) for k in KIND_DEFAULTS[target]}
    else:
        base = dict(KIND_DEFAULTS[target])
    for key in given:
        if key not in base:
            raise InvalidParameterError(f'{_FLAGS[key]} does not apply to the {target.value} regularizer')
    return RegularizerSpec(target, **{**base, **given})


def build_solver_config(config_path=None, seed=None, regularizer=None, alpha=None, beta=None, tau=None,
                        lam=None, gamma=None, stages=None, inner_iters=None, mu=None, tau_top_k=None,
                        update_order=None):
    """Defaults < JSON config file < flags"""
    config = SolverConfig()
    if config_path:
        config = SolverConfig.from_dict(load_json(config_path), path=config_path)
    reg = override_regularizer(config.regularizer, regularizer, alpha=alpha, beta=beta, tau=tau,
                               lam=lam, gamma=gamma)
    config = replace(config, regularizer=reg).with_overrides(
        max_stages=stages, inner_iterations_per_stage=inner_iters, mu_init=mu,
        update_order=update_order, seed=seed)
    if tau_top_k is not None:
        config = replace(config, tau_top_k=tau_top_k or None)
    return config


def parse_angles(ctx, param, value):
    """Click callback: '36' is a view count, '0,90,180' are angles in degrees"""
    if value is None:
        return None
    parts = [p.strip() for p in value.split(',') if p.strip()]
    try:
        if len(parts) == 1 and parts[0].isdigit():
            count = int(parts[0])
            if count < 1:
                raise click.BadParameter('view count must be >= 1')
            return evenly_spaced_angles(count)
        return tuple(float(np.deg2rad(float(p))) for p in parts)
    except ValueError:
        raise click.BadParameter(f'expected a view count or comma-separated degrees, got {value!r}')


def _resolve(path, base_dir):
    if path is None or os.path.isabs(path):
        return path
    return os.path.join(base_dir, path)


def build_experiment_spec(spec_path, seed=None, trials=None, noise_sigma=None, angles=None, align=None):
    """Experiment spec from JSON with flag overrides; relative data paths resolve against the spec file"""
    data = load_json(spec_path)
    spec = ExperimentSpec.from_dict(data, path=spec_path)
    base_dir = os.path.dirname(os.path.abspath(spec_path))
    spec = replace(spec, dictionary_path=_resolve(spec.dictionary_path, base_dir),
                   corpus_path=_resolve(spec.corpus_path, base_dir))
    return spec.with_overrides(seed=seed, trials=trials, noise_sigma=noise_sigma, angles=angles, align=align)
