"""Dense linear algebra used by the recovery algorithms.

Matrices are plain row-major ``numpy`` arrays; the helpers here only add the
dimension checks and the restricted least-squares solve.
"""

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ._validation import check_matrix, check_support, check_vector

# relative pivot size below which the restricted Gram matrix counts as singular
_PIVOT_RTOL = 1e-12
_RIDGE_SCALE = 1e-10


def matvec(A, x):
    """Return ``A @ x``."""
    A = check_matrix(A)
    x = check_vector(x, A.shape[1])
    return A @ x


def matvec_t(A, r):
    """Return ``A.T @ r`` without materialising the transpose."""
    A = check_matrix(A)
    r = check_vector(r, A.shape[0], name="r")
    return r @ A


def least_squares_on_support(A, y, support):
    """Minimise ``||y - A x||_2`` over vectors supported on ``support``.

    Solves the normal equations of the column submatrix ``A[:, support]`` by
    Cholesky. When the restricted Gram matrix is numerically singular the
    ridge system ``(G + delta I) z = A_S^T y`` is solved instead, with
    ``delta = 1e-10 * trace(G) / |support|``.

    Returns
    -------
    x : ndarray of shape (n,)
        Zero off ``support``.
    regularized : bool
        Whether the ridge fallback was used.
    """
    A = check_matrix(A)
    y = check_vector(y, A.shape[0], name="y")
    idx = check_support(support, A.shape[1])
    return _lstsq_on_support(A, y, idx)


def _lstsq_on_support(A, y, idx):
    # unchecked fast path: idx sorted, distinct, in range
    x = np.zeros(A.shape[1])
    if idx.size == 0:
        return x, False
    sub = A[:, idx]
    gram = sub.T @ sub
    rhs = y @ sub
    regularized = False
    try:
        factor = cho_factor(gram, lower=True, check_finite=False)
        pivots = np.abs(np.diag(factor[0])) ** 2
        if pivots.min() <= _PIVOT_RTOL * max(pivots.max(), np.finfo(float).tiny):
            raise LinAlgError("restricted Gram matrix is numerically singular")
    except LinAlgError:
        regularized = True
        delta = _RIDGE_SCALE * np.trace(gram) / idx.size
        if delta <= 0:
            # all selected columns are zero
            return x, True
        factor = cho_factor(gram + delta * np.eye(idx.size), lower=True, check_finite=False)
    x[idx] = cho_solve(factor, rhs, check_finite=False)
    return x, regularized
