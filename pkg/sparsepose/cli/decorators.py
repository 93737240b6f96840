"""
CLI Decorators

Exit-code contract: 0 success, 2 input or parse errors, 3 validation or
dimension errors, 4 internal failures.
"""

import logging
from functools import wraps

import click

from sparsepose.exceptions import SparsePoseError

logger = logging.getLogger(__name__)

INTERNAL_EXIT = 4


def handles_errors(f):
    """Report library errors on stderr and exit with their code"""
    @wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except SparsePoseError as e:
            logger.debug('command failed', exc_info=True)
            click.echo(f'error: {e}', err=True)
            raise click.exceptions.Exit(e.exit_code)
        except Exception:
            logger.exception('unexpected failure')
            click.echo('error: internal failure, rerun with -v for details', err=True)
            raise click.exceptions.Exit(INTERNAL_EXIT)
    return wrapper
