"""
Storage Services

Pose CSV files, JSON documents and the CSV outputs of a recovery. Floats are
written with repr so every value round-trips exactly.
"""

import csv
import json
import logging

import numpy as np

from sparsepose.exceptions import InputFileError, ParseError
from sparsepose.models import Pose2D, Pose3D

logger = logging.getLogger(__name__)

TRACE_HEADER = ['stage', 'iteration', 'objective', 'primal_residual', 'dual_residual', 'mu']


def fmt(value):
    """Text form of a CSV cell"""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows):
    """Write a header and rows, surfacing I/O failures with the path"""
    try:
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])
    except OSError as e:
        raise InputFileError(f'cannot write {path}: {e}')
    logger.info('wrote %s', path)


def load_json(path):
    """Parse a JSON file; syntax errors carry the line number"""
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as e:
        raise InputFileError(f'cannot read {path}: {e}')
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, path=path, line=e.lineno)


def _read_frames(path, coords):
    """Landmark rows grouped by frame, in file order: list of (len(coords), p) arrays"""
    try:
        handle = open(path, newline='', encoding='utf-8')
    except OSError as e:
        raise InputFileError(f'cannot read {path}: {e}')
    expected = ['landmark'] + coords
    frames = {}
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ParseError('file is empty', path=path, line=1)
        header = [h.strip() for h in header]
        if header not in (expected, ['frame'] + expected):
            raise ParseError(f"expected header {','.join(expected)} (optionally led by frame)", path=path, line=1)
        for row in reader:
            line = reader.line_num
            if not any(cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f'expected {len(header)} fields, got {len(row)}', path=path, line=line)
            record = {}
            for name, cell in zip(header, row):
                try:
                    record[name] = int(cell) if name in ('frame', 'landmark') else float(cell)
                except ValueError:
                    raise ParseError(f'not a number: {cell.strip()!r}', path=path, line=line, field=name)
                if name in coords and not np.isfinite(record[name]):
                    raise ParseError('value is not finite', path=path, line=line, field=name)
            points = frames.setdefault(record.get('frame', 0), [])
            if record['landmark'] != len(points):
                raise ParseError(f'expected landmark {len(points)}, got {record["landmark"]}',
                                 path=path, line=line, field='landmark')
            points.append([record[c] for c in coords])
    if not frames:
        raise ParseError('no landmark rows', path=path)
    counts = {len(points) for points in frames.values()}
    if len(counts) != 1:
        raise ParseError(f'frames disagree on landmark count: {sorted(counts)}', path=path)
    return [np.array(points).T for points in frames.values()]


def read_poses_3d(path):
    """All frames of a 3D pose CSV (landmark,x,y,z with optional leading frame)"""
    return [Pose3D(points) for points in _read_frames(path, ['x', 'y', 'z'])]


def read_poses_2d(path):
    """All frames of a 2D pose CSV (landmark,x,y with optional leading frame)"""
    return [Pose2D(points) for points in _read_frames(path, ['x', 'y'])]


def _pose_rows(poses, with_frame):
    for frame, pose in enumerate(poses):
        for landmark, values in enumerate(pose.points.T):
            yield ([frame] if with_frame else []) + [landmark] + list(values)


def write_poses(path, poses):
    """Write Pose3D or Pose2D frames; the frame column appears when there is more than one"""
    poses = list(poses)
    coords = ['x', 'y', 'z'] if isinstance(poses[0], Pose3D) else ['x', 'y']
    with_frame = len(poses) > 1
    header = (['frame'] if with_frame else []) + ['landmark'] + coords
    write_csv(path, header, _pose_rows(poses, with_frame))


def _framed(per_frame, header, row_fn):
    """Rows of every frame; a leading frame column appears when there is more than one"""
    per_frame = list(per_frame)
    with_frame = len(per_frame) > 1
    rows = ([frame] + row if with_frame else row
            for frame, item in enumerate(per_frame) for row in row_fn(item))
    return (['frame'] if with_frame else []) + header, rows


def write_coefficients(path, coefficients_per_frame):
    header, rows = _framed(coefficients_per_frame, ['basis', 'coefficient'],
                           lambda c: ([i, v] for i, v in enumerate(c)))
    write_csv(path, header, rows)


def write_rotations(path, rotations_per_frame):
    columns = ['basis'] + [f'r{i}{j}' for i in range(1, 4) for j in range(1, 4)]
    header, rows = _framed(rotations_per_frame, columns,
                           lambda Rs: ([i] + list(R.reshape(-1)) for i, R in enumerate(Rs)))
    write_csv(path, header, rows)


def write_trace(path, traces):
    """Per-iteration solver history of one or more solves"""
    header, rows = _framed(traces, TRACE_HEADER, lambda trace: (
        [r.stage, r.iteration, r.objective, r.primal_residual, r.dual_residual, r.mu]
        for r in trace.iterations))
    write_csv(path, header, rows)
