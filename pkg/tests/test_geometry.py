import numpy as np
import pytest

from sparsepose.exceptions import AlignmentUndefinedError, DimensionError, InvalidParameterError
from sparsepose.models import AffineStack, CameraModel, PoseDictionary, Pose2D, Pose3D
from sparsepose.services.geometry import (centralize, procrustes_align, project, random_rotation,
                                          reconstruct_shape, recover_rotation, recover_rotations,
                                          recovery_error, rotation_about_y)

PI = np.array([[1.0, 0, 0], [0, 1.0, 0]])


def _is_rotation(R):
    return np.allclose(R.T @ R, np.eye(3), atol=1e-8) and abs(np.linalg.det(R) - 1.0) < 1e-8


def test_project_examples(rng):
    assert np.allclose(project(Pose3D(np.zeros((3, 4))), CameraModel(rotation=random_rotation(rng))).points, 0)

    point = Pose3D(np.tile([[1.0], [2.0], [3.0]], (1, 4)))
    assert np.allclose(project(point, CameraModel(omega=2.0)).points, np.tile([[2.0], [4.0]], (1, 4)))

    S = Pose3D(rng.standard_normal((3, 5)))
    Rz = np.array([[0.0, -1, 0], [1, 0, 0], [0, 0, 1]])
    Y = project(S, CameraModel(rotation=Rz)).points
    assert np.allclose(Y, np.vstack([-S.points[1], S.points[0]]))


def test_project_is_linear(rng):
    cam = CameraModel(omega=1.5, rotation=random_rotation(rng))
    S1, S2 = rng.standard_normal((3, 6)), rng.standard_normal((3, 6))
    combined = project(Pose3D(2.0 * S1 - 0.5 * S2), cam).points
    assert np.allclose(combined, 2.0 * project(Pose3D(S1), cam).points - 0.5 * project(Pose3D(S2), cam).points)


def test_camera_rejects_reflection():
    with pytest.raises(InvalidParameterError):
        CameraModel(rotation=np.diag([1.0, 1.0, -1.0]))


def test_centralize_examples():
    centred, mean = centralize(Pose2D(np.array([[1.0, 3.0], [1.0, 3.0]])))
    assert np.allclose(centred.points, [[-1, 1], [-1, 1]])
    assert np.allclose(mean, [2, 2])

    again, mean = centralize(centred)
    assert np.allclose(again.points, centred.points)
    assert np.allclose(mean, 0)

    single, mean = centralize(Pose2D(np.array([[5.0], [7.0]])))
    assert np.allclose(single.points, 0)
    assert np.allclose(mean, [5, 7])


def test_recover_rotation_examples():
    c, R = recover_rotation(PI)
    assert c == pytest.approx(1.0)
    assert np.allclose(R, np.eye(3))

    c, R = recover_rotation(np.zeros((2, 3)))
    assert c == 0.0
    assert np.array_equal(R, np.eye(3))


def test_recover_rotation_forward(rng):
    for _ in range(1000):
        R_true = random_rotation(rng)
        c_true = rng.uniform(0.1, 5.0)
        c, R = recover_rotation(c_true * PI @ R_true)
        assert c == pytest.approx(c_true, abs=1e-10)
        assert np.allclose(R[:2], R_true[:2], atol=1e-8)
        assert _is_rotation(R)


def test_recover_rotations_of_inexact_matrices(rng):
    c, R = recover_rotations(rng.standard_normal((20, 2, 3)))
    assert np.all(c >= 0)
    assert all(_is_rotation(r) for r in R)


def test_reconstruct_shape_examples(small_dictionary, rng):
    D = small_dictionary.size
    assert np.allclose(reconstruct_shape(AffineStack.zeros(D), small_dictionary).points, 0)

    stack = np.zeros((D, 2, 3))
    stack[2] = PI
    assert np.allclose(reconstruct_shape(AffineStack(stack), small_dictionary).points, small_dictionary.matrices[2])

    c = rng.uniform(0.5, 2.0, D)
    Rs = np.array([random_rotation(rng) for _ in range(D)])
    stack = c[:, None, None] * (PI @ Rs)
    expected = np.einsum('i,ijk,ikl->jl', c, Rs, small_dictionary.matrices)
    shape = reconstruct_shape(AffineStack(stack), small_dictionary)
    assert np.allclose(shape.points, expected, atol=1e-8)
    # top rows reproduce the data term sum M_i B_i
    assert np.allclose(shape.points[:2], np.einsum('ijk,ikl->jl', stack, small_dictionary.matrices), atol=1e-8)


def test_reconstruct_shape_checks_size(small_dictionary):
    with pytest.raises(DimensionError):
        reconstruct_shape(AffineStack.zeros(3), small_dictionary)


def test_procrustes_examples(rng):
    S = Pose3D(rng.standard_normal((3, 8)))
    assert np.allclose(procrustes_align(S, S).points, S.points, atol=1e-10)

    moved = Pose3D(random_rotation(rng) @ S.points + np.array([[1.0], [-2.0], [0.5]]))
    assert np.allclose(procrustes_align(S, moved).points, S.points, atol=1e-8)

    centred = Pose3D(S.points - S.points.mean(axis=1, keepdims=True))
    assert np.allclose(procrustes_align(centred, Pose3D(2.0 * centred.points)).points, centred.points, atol=1e-10)


def test_procrustes_rejects_collapsed_target(rng):
    S = Pose3D(rng.standard_normal((3, 5)))
    with pytest.raises(AlignmentUndefinedError):
        procrustes_align(S, Pose3D(np.ones((3, 5))))
    with pytest.raises(DimensionError):
        procrustes_align(S, Pose3D(np.ones((3, 4))))


def test_recovery_error_examples(rng):
    S = Pose3D(rng.standard_normal((3, 6)))
    assert recovery_error(S, S) == pytest.approx(0.0, abs=1e-10)
    shifted = Pose3D(S.points + np.array([[3.0], [1.0], [-2.0]]))
    assert recovery_error(shifted, S, align=True) == pytest.approx(0.0, abs=1e-8)
    bumped = S.points.copy()
    bumped[1, 2] += 1.0
    assert recovery_error(Pose3D(bumped), S, align=False) == pytest.approx(1.0)


def test_alignment_never_hurts(rng):
    for _ in range(50):
        S = Pose3D(rng.standard_normal((3, 7)))
        estimate = Pose3D(rng.standard_normal((3, 7)))
        assert recovery_error(estimate, S, align=True) <= recovery_error(estimate, S, align=False) + 1e-12


def test_rotation_about_y_is_turntable():
    R = rotation_about_y(np.pi / 2)
    assert np.allclose(R @ [1.0, 0, 0], [0, 0, -1])
    assert _is_rotation(R)


def test_dictionary_row_norm_validation():
    bases = np.zeros((2, 3, 4))
    bases[:, :, 0] = 1.0
    PoseDictionary(bases)
    bases[1, 2, 0] = 2.0
    with pytest.raises(Exception, match='basis 1'):
        PoseDictionary(bases)
