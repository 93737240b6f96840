"""
Small Dense Linear Algebra

Closed-form thin SVD of 2x3 matrices, matrix norms, Euclidean projection onto
the l1 ball and the proximal operator of the spectral norm. Every routine has
a batched form working on stacks shaped (..., 2, 3).
"""

from collections import namedtuple

import numpy as np

from sparsepose.exceptions import DimensionError, InvalidInputError, InvalidParameterError

ThinSvd = namedtuple('ThinSvd', ['left_factor', 'singulars', 'right_factor'])

# relative size below which the second right factor is completed geometrically
_RANK_TOL = 1e-12


def _as_stack(X):
    X = np.asarray(X, dtype=float)
    if X.shape[-2:] != (2, 3):
        raise DimensionError(f'expected 2x3 matrices, got shape {X.shape}')
    if not np.all(np.isfinite(X)):
        raise InvalidInputError('matrix contains non-finite entries')
    return X


def _complete_frame(q1):
    """Unit vectors orthogonal to each row of q1 (..., 3)"""
    axis = np.argmin(np.abs(q1), axis=-1)
    e = np.zeros_like(q1)
    np.put_along_axis(e, axis[..., None], 1.0, axis=-1)
    v = np.cross(q1, e)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def thin_svd_batch(X):
    """Thin SVD of every 2x3 matrix in a stack.

    The left factor comes from the closed-form eigenvectors of the 2x2 Gram
    matrix X X^T; singular values and right factors are recovered from X^T P,
    so P diag(s) Q^T reproduces X to rounding error.

    Returns:
        ThinSvd(left_factor (..., 2, 2), singulars (..., 2), right_factor (..., 3, 2))
    """
    X = _as_stack(X)
    G = X @ np.swapaxes(X, -1, -2)
    theta = 0.5 * np.arctan2(2.0 * G[..., 0, 1], G[..., 0, 0] - G[..., 1, 1])
    c, s = np.cos(theta), np.sin(theta)
    p1 = np.stack([c, s], axis=-1)
    p2 = np.stack([-s, c], axis=-1)

    w1 = np.einsum('...ij,...i->...j', X, p1)
    w2 = np.einsum('...ij,...i->...j', X, p2)
    n1 = np.linalg.norm(w1, axis=-1)
    n2 = np.linalg.norm(w2, axis=-1)

    # keep singular values in descending order when rounding ties them
    swap = (n2 > n1)[..., None]
    p1, p2 = np.where(swap, p2, p1), np.where(swap, p1, p2)
    w1, w2 = np.where(swap, w2, w1), np.where(swap, w1, w2)
    s1 = np.maximum(n1, n2)

    zero = s1 == 0
    q1 = np.where(zero[..., None], np.array([1.0, 0.0, 0.0]), w1 / np.where(zero, 1.0, s1)[..., None])
    r2 = w2 - np.sum(q1 * w2, axis=-1, keepdims=True) * q1
    s2 = np.linalg.norm(r2, axis=-1)
    thin = s2 <= _RANK_TOL * s1
    q2 = np.where(thin[..., None], _complete_frame(q1), r2 / np.where(thin, 1.0, s2)[..., None])
    q2 = np.where(zero[..., None], np.array([0.0, 1.0, 0.0]), q2)

    P = np.stack([p1, p2], axis=-1)
    Q = np.stack([q1, q2], axis=-1)
    return ThinSvd(P, np.stack([s1, s2], axis=-1), Q)


def thin_svd(X):
    """Thin SVD of a single 2x3 matrix"""
    X = _as_stack(X)
    if X.ndim != 2:
        raise DimensionError(f'expected one 2x3 matrix, got shape {X.shape}')
    return thin_svd_batch(X)


def spectral_norms(X):
    """Largest singular value of each matrix in a stack"""
    return thin_svd_batch(X).singulars[..., 0]


def spectral_norm(X):
    return float(thin_svd(X).singulars[0])


def nuclear_norm(X):
    return float(np.sum(thin_svd(X).singulars))


def nuclear_norms(X):
    return np.sum(thin_svd_batch(X).singulars, axis=-1)


def frobenius_norm(X):
    return float(np.linalg.norm(np.asarray(X, dtype=float)))


def _l1_thresholds(A, radii):
    """Soft-threshold level per row of |v| so that the shrunk row has l1 norm = radius"""
    n = A.shape[1]
    U = -np.sort(-A, axis=1)
    css = np.cumsum(U, axis=1)
    k = np.arange(1, n + 1)
    active = U - (css - radii[:, None]) / k > 0
    rho = n - 1 - np.argmax(active[:, ::-1], axis=1)
    theta = (css[np.arange(A.shape[0]), rho] - radii) / (rho + 1)
    return np.where(A.sum(axis=1) <= radii, 0.0, theta)


def project_l1_ball_rows(V, radii):
    """Euclidean projection of each row of V onto the l1 ball of the matching radius"""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise DimensionError(f'expected a 2-D array of rows, got shape {V.shape}')
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (V.shape[0],))
    if np.any(~(radii > 0)):
        raise InvalidParameterError('l1 ball radius must be positive')
    if V.shape[1] == 0:
        return V.copy()
    theta = _l1_thresholds(np.abs(V), radii)
    return np.sign(V) * np.maximum(np.abs(V) - theta[:, None], 0.0)


def l1_ball_threshold(v, radius):
    """Soft-threshold level theta of the projection (0 when v is inside the ball)"""
    v = np.asarray(v, dtype=float).reshape(1, -1)
    if not radius > 0:
        raise InvalidParameterError(f'l1 ball radius must be positive, got {radius}')
    return float(_l1_thresholds(np.abs(v), np.array([float(radius)]))[0])


def project_l1_ball(v, radius):
    """Euclidean projection of a vector onto {w : ||w||_1 <= radius}"""
    v = np.asarray(v, dtype=float)
    if not radius > 0:
        raise InvalidParameterError(f'l1 ball radius must be positive, got {radius}')
    return project_l1_ball_rows(v.reshape(1, -1), radius).reshape(v.shape)


def prox_spectral_batch(Vp, lams):
    """Proximal operator of lam_i * ||.||_2 applied to each matrix of a stack.

    Computes P diag[s - lam * P1(s / lam)] Q^T with P1 the projection onto the
    unit l1 ball (Moreau decomposition against the dual nuclear-norm ball).
    Matrices with lam = 0 are returned unchanged.
    """
    Vp = _as_stack(Vp)
    lams = np.broadcast_to(np.asarray(lams, dtype=float), Vp.shape[:-2])
    if np.any(~(lams >= 0)):
        raise InvalidParameterError('prox weight must be nonnegative')
    svd = thin_svd_batch(Vp)
    active = lams > 0
    scale = np.where(active, lams, 1.0)
    sigma = svd.singulars.reshape(-1, 2)
    flat_scale = scale.reshape(-1)
    shrunk = sigma - flat_scale[:, None] * project_l1_ball_rows(sigma / flat_scale[:, None], 1.0)
    shrunk = shrunk.reshape(svd.singulars.shape)
    out = np.einsum('...ik,...k,...jk->...ij', svd.left_factor, shrunk, svd.right_factor)
    return np.where(active[..., None, None], out, Vp)


def prox_spectral(Vp, lam):
    """argmin_X 1/2 ||X - Vp||_F^2 + lam ||X||_2 for one 2x3 matrix"""
    Vp = _as_stack(Vp)
    if Vp.ndim != 2:
        raise DimensionError(f'expected one 2x3 matrix, got shape {Vp.shape}')
    if not lam >= 0:
        raise InvalidParameterError(f'prox weight must be nonnegative, got {lam}')
    return prox_spectral_batch(Vp, lam)
