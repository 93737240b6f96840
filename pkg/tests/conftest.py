import numpy as np
import pytest
from click.testing import CliRunner

from sparsepose import init_logging
from sparsepose.config import TestConfig
from sparsepose.models import PoseDictionary, Pose3D
from sparsepose.services.dictionary import random_dictionary


def orthonormal_rows(p, seed=0, count=3):
    """`count` mean-zero orthonormal rows of length p"""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((p, count))
    A -= A.mean(axis=0)
    q, _ = np.linalg.qr(A)
    return q.T


@pytest.fixture(scope='session', autouse=True)
def debug_logging():
    init_logging(TestConfig)


@pytest.fixture()
def config():
    return TestConfig


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


@pytest.fixture()
def small_dictionary():
    return random_dictionary(8, 12, rng_seed=7)


@pytest.fixture()
def unit_dictionary():
    # one basis with orthonormal centred rows, so B B^T = I
    return PoseDictionary(orthonormal_rows(10, seed=3)[None, :, :])


@pytest.fixture()
def corpus_shape():
    return Pose3D(2.0 * orthonormal_rows(10, seed=5))


@pytest.fixture()
def runner():
    return CliRunner()
