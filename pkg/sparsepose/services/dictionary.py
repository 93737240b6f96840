"""
Dictionary Services

Sparse-coding dictionary learning over a 3D pose corpus, per-row normalization
to the shared constant phi, and JSON persistence.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from sparsepose.config import Config
from sparsepose.exceptions import (DegenerateBasisError, DimensionError, InputFileError,
                                   InvalidInputError, InvalidParameterError, ParseError)
from sparsepose.models import PoseDictionary
from sparsepose.services.simulation import make_rng

logger = logging.getLogger(__name__)

FILE_VERSION = 1


@dataclass
class LearningTrace:
    """Training objective 1/2 ||X - C B||^2 + lam ||C||_1 per alternation"""
    sparsity_lambda: float = 0.0
    after_coding: list = field(default_factory=list)
    after_update: list = field(default_factory=list)
    after_rescale: list = field(default_factory=list)
    coding_passes: list = field(default_factory=list)


def _row_scaled(matrices, phi):
    """Scale every row to squared norm phi; returns (scaled, zero-row mask per basis)"""
    norms = np.linalg.norm(matrices, axis=2, keepdims=True)
    degenerate = np.any(norms[..., 0] <= np.finfo(float).tiny, axis=1)
    safe = np.where(norms > np.finfo(float).tiny, norms, 1.0)
    return matrices * (np.sqrt(phi) / safe), degenerate


def normalize_rows(bases, phi=Config.PHI):
    """
    Scale each coordinate row of every basis to squared l2 norm phi.

    Args:
        bases: PoseDictionary or array of shape (D, 3, p)
        phi: Target squared row norm

    Returns:
        PoseDictionary with rows normalized to phi
    """
    if not phi > 0:
        raise InvalidParameterError(f'phi must be positive, got {phi}')
    matrices = bases.matrices if isinstance(bases, PoseDictionary) else np.asarray(bases, dtype=float)
    if matrices.ndim != 3 or matrices.shape[1] != 3:
        raise DimensionError(f'bases must have shape (D, 3, p), got {matrices.shape}')
    scaled, degenerate = _row_scaled(matrices, phi)
    if np.any(degenerate):
        raise DegenerateBasisError(f'basis {int(np.argmax(degenerate))} has an all-zero row')
    return PoseDictionary(scaled, phi=phi)


def random_dictionary(size, landmark_count, phi=Config.PHI, rng_seed=None):
    """Gaussian bases with centred rows, normalized to phi"""
    if size < 1:
        raise InvalidParameterError('size must be >= 1')
    rng = make_rng(rng_seed)
    raw = rng.standard_normal((size, 3, landmark_count))
    raw -= raw.mean(axis=2, keepdims=True)
    return normalize_rows(raw, phi)


def _corpus_matrix(corpus):
    if not corpus:
        raise InvalidInputError('corpus is empty')
    counts = {pose.landmark_count for pose in corpus}
    if len(counts) != 1:
        raise DimensionError(f'corpus mixes landmark counts {sorted(counts)}')
    return np.stack([pose.points.reshape(-1) for pose in corpus]), counts.pop()


def _objective(X, C, B, lam):
    return 0.5 * float(np.sum((X - C @ B) ** 2)) + lam * float(np.sum(np.abs(C)))


def _lasso_cd(X, B, lam, C0, tol, max_passes):
    """Cyclic coordinate descent on every sample's lasso at once"""
    G = B @ B.T
    XB = X @ B.T
    diag = np.diag(G)
    C = C0.copy()
    passes = 0
    for passes in range(1, max_passes + 1):
        delta = 0.0
        for j in range(B.shape[0]):
            rho = XB[:, j] - C @ G[:, j] + C[:, j] * diag[j]
            new = np.sign(rho) * np.maximum(np.abs(rho) - lam, 0.0) / diag[j]
            delta = max(delta, float(np.max(np.abs(new - C[:, j]))))
            C[:, j] = new
        if delta < tol:
            break
    return C, passes


def sparse_code(corpus, dictionary, sparsity_lambda, tol=Config.CODING_TOL, max_passes=Config.CODING_MAX_PASSES):
    """
    Lasso codes of each corpus pose against the dictionary.

    Returns:
        (codes (N, D), relative residual ||X - C B||_F / ||X||_F)
    """
    X, p = _corpus_matrix(corpus)
    if p != dictionary.landmark_count:
        raise DimensionError(f'corpus has {p} landmarks but the dictionary has {dictionary.landmark_count}')
    B = dictionary.matrices.reshape(dictionary.size, -1)
    C, _ = _lasso_cd(X, B, sparsity_lambda, np.zeros((X.shape[0], dictionary.size)), tol, max_passes)
    scale = np.linalg.norm(X)
    residual = np.linalg.norm(X - C @ B) / scale if scale > 0 else 0.0
    return C, float(residual)


def learn_dictionary(corpus, size, sparsity_lambda=None, iterations=Config.LEARNING_ITERATIONS,
                     rng_seed=None, phi=Config.PHI, tol=Config.CODING_TOL,
                     max_passes=Config.CODING_MAX_PASSES):
    """
    Learn D basis poses by alternating lasso coding and least-squares basis updates.

    The corpus is expected to be Procrustes-aligned and centred. After every
    basis update the rows are normalized to phi and the codes rescaled by the
    least-squares factor between the updated and the normalized basis.

    Args:
        corpus: List of Pose3D
        size: Dictionary size D (>= 1)
        sparsity_lambda: l1 weight; None picks 0.1 x the mean largest correlation
        iterations: Number of coding/update alternations
        rng_seed: Seed for the basis initialization
        phi: Squared row norm of every basis row
        tol, max_passes: Coordinate-descent stopping rule

    Returns:
        (PoseDictionary, LearningTrace)
    """
    if size < 1:
        raise InvalidParameterError('size must be >= 1')
    if iterations < 0:
        raise InvalidParameterError(f'iterations must be >= 0, got {iterations}')
    X, p = _corpus_matrix(corpus)
    N = X.shape[0]
    rng = make_rng(rng_seed)

    if size > N:
        logger.warning('dictionary size %d exceeds corpus size %d; sampling initial bases with replacement',
                       size, N)
    picks = rng.choice(N, size=size, replace=size > N)
    init = X[picks]
    rms = np.sqrt(np.mean(init ** 2, axis=1, keepdims=True))
    init = init + 0.01 * np.where(rms > 0, rms, 1.0) * rng.standard_normal(init.shape)
    B = normalize_rows(init.reshape(size, 3, p), phi).matrices.reshape(size, -1)

    if sparsity_lambda is None:
        sparsity_lambda = 0.1 * float(np.mean(np.max(np.abs(X @ B.T), axis=1)))
    if sparsity_lambda < 0:
        raise InvalidParameterError(f'sparsity lambda must be nonnegative, got {sparsity_lambda}')
    trace = LearningTrace(sparsity_lambda=sparsity_lambda)

    C = np.zeros((N, size))
    for it in range(iterations):
        C, passes = _lasso_cd(X, B, sparsity_lambda, C, tol, max_passes)
        trace.coding_passes.append(passes)
        trace.after_coding.append(_objective(X, C, B, sparsity_lambda))

        used = np.any(C != 0, axis=0)
        updated = B.copy()
        if np.any(used):
            updated[used] = linalg.lstsq(C[:, used], X)[0]
        trace.after_update.append(_objective(X, C, updated, sparsity_lambda))

        scaled, degenerate = _row_scaled(updated.reshape(size, 3, p), phi)
        scaled = scaled.reshape(size, -1)
        # atoms collapsed by the update keep their previous normalized shape
        scaled[degenerate] = B[degenerate]
        updated[degenerate] = B[degenerate]
        factors = np.sum(updated * scaled, axis=1) / np.sum(scaled ** 2, axis=1)
        C = C * factors[None, :]
        B = scaled
        trace.after_rescale.append(_objective(X, C, B, sparsity_lambda))
        logger.debug('alternation %d: coded %.6g updated %.6g rescaled %.6g (%d passes)', it,
                     trace.after_coding[-1], trace.after_update[-1], trace.after_rescale[-1], passes)

    dictionary = PoseDictionary(B.reshape(size, 3, p), phi=phi)
    logger.info('learned dictionary D=%d p=%d from %d poses', size, p, N)
    return dictionary, trace


def save_dictionary(dictionary, path):
    """Write the dictionary as JSON with round-trip float precision"""
    payload = {
        'version': FILE_VERSION,
        'landmark_count': dictionary.landmark_count,
        'phi': dictionary.phi,
        'bases': [basis.reshape(-1).tolist() for basis in dictionary.matrices],
    }
    try:
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(payload, handle)
    except OSError as e:
        raise InputFileError(f'cannot write dictionary to {path}: {e}')
    logger.info('saved dictionary D=%d to %s', dictionary.size, path)


def load_dictionary(path):
    """Read and re-validate a dictionary JSON file"""
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as e:
        raise InputFileError(f'cannot read dictionary {path}: {e}')
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, path=path, line=e.lineno)
    if not isinstance(payload, dict):
        raise ParseError('dictionary file must hold a JSON object', path=path)
    for key in ('version', 'landmark_count', 'phi', 'bases'):
        if key not in payload:
            raise ParseError('missing field', path=path, field=key)
    if payload['version'] != FILE_VERSION:
        raise ParseError(f'unsupported version {payload["version"]!r}', path=path, field='version')
    p = payload['landmark_count']
    if isinstance(p, bool) or not isinstance(p, int) or p < 1:
        raise ParseError('landmark_count must be a positive integer', path=path, field='landmark_count')
    if not isinstance(payload['bases'], list) or not payload['bases']:
        raise ParseError('bases must be a non-empty list', path=path, field='bases')
    rows = []
    for i, basis in enumerate(payload['bases']):
        if not isinstance(basis, list) or len(basis) != 3 * p:
            raise ParseError(f'expected {3 * p} values', path=path, field=f'bases[{i}]')
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in basis):
            raise ParseError('bases must hold numbers', path=path, field=f'bases[{i}]')
        rows.append(basis)
    phi = payload['phi']
    if isinstance(phi, bool) or not isinstance(phi, (int, float)):
        raise ParseError('phi must be a number', path=path, field='phi')
    return PoseDictionary(np.array(rows, dtype=float).reshape(len(rows), 3, p), phi=float(phi))
