"""
Reporting Services

CSV tables and an SVG plot of an experiment report.
"""

import logging
import os

import matplotlib
from matplotlib.figure import Figure

from sparsepose.exceptions import InputFileError
from sparsepose.services.experiments import GRID_KEYS, RUNTIME_KEYS
from sparsepose.services.storage import write_csv

matplotlib.use('Agg')

logger = logging.getLogger(__name__)

CURVE_HEADER = ['regularizer', 'trial', 'stage', 'estimation_error', 'recovery_error']
SUMMARY_HEADER = ['regularizer', 'metric', 'value']
GRID_METRICS = ['median_recovery_error', 'median_relative_error', 'median_stages_to_epsilon']


def _curve_rows(report):
    for record in report.records:
        for stage, recovery in enumerate(record.recovery_curve):
            estimation = record.estimation_curve[stage] if stage < len(record.estimation_curve) else None
            yield [record.regularizer, record.trial, stage, estimation, recovery]


def _summary_rows(report):
    for label in report.labels:
        for metric, value in report.summaries.get(label, {}).items():
            if metric not in RUNTIME_KEYS:
                yield [label, metric, value]
    if report.comparison:
        for metric, value in report.comparison.items():
            yield ['comparison', metric, value]


def plot_median_curves(report, path):
    """Median recovery (and estimation, when known) error per stage for every regularizer"""
    fig = Figure(figsize=(7, 4.5))
    ax = fig.subplots()
    values = []
    for label in report.labels:
        curves = report.median_curves.get(label, {})
        for metric, style in (('recovery', '-'), ('estimation', '--')):
            curve = curves.get(metric, ())
            if curve:
                ax.plot(range(len(curve)), curve, style, marker='o', markersize=3, label=f'{label} {metric}')
                values.extend(curve)
    if values and min(values) > 0:
        ax.set_yscale('log')
    ax.set_xlabel('stage')
    ax.set_ylabel('median error')
    ax.set_title('Convergence of recovery error')
    if values:
        ax.legend(fontsize='small')
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    try:
        with matplotlib.rc_context({'svg.hashsalt': 'sparsepose', 'svg.fonttype': 'none'}):
            fig.savefig(path, format='svg', metadata={'Date': None})
    except OSError as e:
        raise InputFileError(f'cannot write {path}: {e}')
    logger.info('wrote %s', path)


def _ensure_dir(out_dir):
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise InputFileError(f'cannot create output directory {out_dir}: {e}')


def export_report(report, out_dir):
    """
    Write curves.csv, summary.csv and plot.svg into out_dir.

    Returns:
        Dict of written paths keyed by file role
    """
    _ensure_dir(out_dir)
    paths = {
        'curves': os.path.join(out_dir, 'curves.csv'),
        'summary': os.path.join(out_dir, 'summary.csv'),
        'plot': os.path.join(out_dir, 'plot.svg'),
    }
    write_csv(paths['curves'], CURVE_HEADER, _curve_rows(report))
    write_csv(paths['summary'], SUMMARY_HEADER, _summary_rows(report))
    plot_median_curves(report, paths['plot'])
    return paths


def export_grid(rows, out_dir):
    """Write grid-search rows to grid.csv"""
    _ensure_dir(out_dir)
    path = os.path.join(out_dir, 'grid.csv')
    header = ['regularizer'] + list(GRID_KEYS) + GRID_METRICS
    write_csv(path, header, ([row.get(key) for key in header] for row in rows))
    return path
