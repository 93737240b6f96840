import csv
import json

import numpy as np
import pytest

from sparsepose.exceptions import InputFileError, ParseError
from sparsepose.models import IterationRecord, Pose2D, Pose3D, SolveTrace
from sparsepose.services.storage import (TRACE_HEADER, fmt, load_json, read_poses_2d, read_poses_3d,
                                         write_coefficients, write_poses, write_rotations, write_trace)


def _rows(path):
    with open(path, newline='') as handle:
        return list(csv.reader(handle))


def _write(path, text):
    path.write_text(text)
    return str(path)


def test_fmt():
    assert fmt(None) == ''
    assert fmt(True) == 'true'
    assert fmt(np.int64(3)) == '3'
    assert fmt(0.1) == '0.1'
    assert fmt('lcnr') == 'lcnr'


def test_single_frame_pose_round_trip(tmp_path, rng):
    pose = Pose3D(rng.standard_normal((3, 7)))
    path = str(tmp_path / 'pose.csv')
    write_poses(path, [pose])
    assert _rows(path)[0] == ['landmark', 'x', 'y', 'z']
    (back,) = read_poses_3d(path)
    assert np.array_equal(back.points, pose.points)


def test_multi_frame_poses_carry_frame_column(tmp_path, rng):
    poses = [Pose2D(rng.standard_normal((2, 5))) for _ in range(3)]
    path = str(tmp_path / 'views.csv')
    write_poses(path, poses)
    rows = _rows(path)
    assert rows[0] == ['frame', 'landmark', 'x', 'y']
    assert len(rows) == 1 + 3 * 5
    back = read_poses_2d(path)
    assert len(back) == 3
    for a, b in zip(poses, back):
        assert np.array_equal(a.points, b.points)


def test_blank_lines_are_skipped(tmp_path):
    path = _write(tmp_path / 'p.csv', 'landmark,x,y\n0,1,2\n\n1,3,4\n')
    (pose,) = read_poses_2d(path)
    assert np.array_equal(pose.points, [[1, 3], [2, 4]])


def test_bad_number_reports_line_and_field(tmp_path):
    path = _write(tmp_path / 'p.csv', 'landmark,x,y\n0,1,2\n1,3,abc\n')
    with pytest.raises(ParseError) as info:
        read_poses_2d(path)
    assert info.value.line == 3
    assert info.value.field == 'y'
    assert 'line 3' in str(info.value)


def test_non_finite_value_is_rejected(tmp_path):
    path = _write(tmp_path / 'p.csv', 'landmark,x,y\n0,nan,2\n')
    with pytest.raises(ParseError) as info:
        read_poses_2d(path)
    assert info.value.field == 'x'


def test_landmarks_must_be_in_order(tmp_path):
    path = _write(tmp_path / 'p.csv', 'landmark,x,y\n0,1,2\n2,3,4\n')
    with pytest.raises(ParseError) as info:
        read_poses_2d(path)
    assert info.value.line == 3
    assert info.value.field == 'landmark'


def test_bad_header(tmp_path):
    path = _write(tmp_path / 'p.csv', 'id,x,y\n0,1,2\n')
    with pytest.raises(ParseError) as info:
        read_poses_2d(path)
    assert info.value.line == 1


def test_wrong_field_count(tmp_path):
    path = _write(tmp_path / 'p.csv', 'landmark,x,y,z\n0,1,2\n')
    with pytest.raises(ParseError) as info:
        read_poses_3d(path)
    assert info.value.line == 2


def test_frames_must_agree_on_landmarks(tmp_path):
    path = _write(tmp_path / 'p.csv', 'frame,landmark,x,y\n0,0,1,2\n0,1,1,2\n1,0,1,2\n')
    with pytest.raises(ParseError, match='disagree'):
        read_poses_2d(path)


def test_empty_file(tmp_path):
    with pytest.raises(ParseError):
        read_poses_2d(_write(tmp_path / 'p.csv', ''))
    with pytest.raises(ParseError):
        read_poses_2d(_write(tmp_path / 'q.csv', 'landmark,x,y\n'))


def test_missing_file(tmp_path):
    with pytest.raises(InputFileError):
        read_poses_3d(str(tmp_path / 'missing.csv'))


def test_load_json_reports_line(tmp_path):
    path = _write(tmp_path / 'c.json', '{\n  "max_stages": 3,\n  oops\n}\n')
    with pytest.raises(ParseError) as info:
        load_json(path)
    assert info.value.line == 3
    assert load_json(_write(tmp_path / 'ok.json', json.dumps({'a': 1}))) == {'a': 1}


def test_coefficient_and_rotation_tables(tmp_path):
    coeff_path = str(tmp_path / 'coefficients.csv')
    write_coefficients(coeff_path, [np.array([0.5, 0.0])])
    assert _rows(coeff_path) == [['basis', 'coefficient'], ['0', '0.5'], ['1', '0.0']]

    rot_path = str(tmp_path / 'rotations.csv')
    write_rotations(rot_path, [np.stack([np.eye(3)] * 2), np.stack([np.eye(3)] * 2)])
    rows = _rows(rot_path)
    assert rows[0] == ['frame', 'basis', 'r11', 'r12', 'r13', 'r21', 'r22', 'r23', 'r31', 'r32', 'r33']
    assert len(rows) == 1 + 4
    assert rows[1][2:] == ['1.0', '0.0', '0.0', '0.0', '1.0', '0.0', '0.0', '0.0', '1.0']


def test_trace_table(tmp_path):
    trace = SolveTrace()
    trace.iterations.extend([IterationRecord(0, 0, 2.5, 0.1, 0.2, 1.0),
                             IterationRecord(0, 1, 2.0, 0.05, 0.1, 2.0)])
    path = str(tmp_path / 'trace.csv')
    write_trace(path, [trace])
    rows = _rows(path)
    assert rows[0] == TRACE_HEADER
    assert rows[2] == ['0', '1', '2.0', '0.05', '0.1', '2.0']


def test_unwritable_path(tmp_path):
    with pytest.raises(InputFileError):
        write_coefficients(str(tmp_path / 'missing' / 'c.csv'), [np.zeros(2)])
