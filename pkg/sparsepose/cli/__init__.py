"""
Command Line Interface

The `sparsepose` command group; subcommands live in commands.py.
"""

import click

from sparsepose import __version__, init_logging
from sparsepose.config import Config


@click.group()
@click.version_option(__version__, prog_name='sparsepose')
@click.option('--seed', type=int, default=None, help='Seed for every random draw (default: SPARSEPOSE_SEED or 0).')
@click.option('--jobs', type=click.IntRange(min=1), default=Config.DEFAULT_JOBS, show_default=True,
              help='Worker threads for frames and experiment arms.')
@click.option('-v', '--verbose', count=True, help='Lower the log level one step per flag.')
@click.pass_context
def cli(ctx, seed, jobs, verbose):
    """Sparse 3D pose recovery from 2D landmarks."""
    init_logging(Config, verbose)
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, jobs=jobs)


from sparsepose.cli import commands  # noqa: E402, F401
