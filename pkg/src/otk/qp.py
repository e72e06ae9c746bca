"""The relaxed optimal k-thresholding subproblem.

Given a proxy ``u`` the subproblem picks weights ``w`` on the capped simplex
minimising the residual of the reweighted proxy::

    min_w ||y - A (u * w)||^2   s.t.  sum(w) = k,  0 <= w <= 1.

``solve_relaxed_ot`` solves it by projected gradient descent. The binary
version of the same problem is solved exhaustively by ``brute_force_ot`` and
is only meant as a reference for small instances.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from . import _kernels
from ._validation import check_matrix, check_positive, check_sparsity, check_vector

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITERS = 2000
BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class QpSolution:
    """Output of :func:`solve_relaxed_ot`.

    ``objective`` is ``||y - A(u * w)||^2`` evaluated directly from ``w`` and
    ``stationarity`` is the projected-gradient residual ``||w - P(w - g/L)||``
    at the returned point.
    """

    w: np.ndarray
    objective: float
    iterations: int
    converged: bool
    stationarity: float


def relaxed_ot_objective(A, y, u, w):
    r = y - A @ (u * w)
    return float(r @ r)


def solve_relaxed_ot(A, y, u, k, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS,
                     w0=None, gram=None, aty=None):
    """Projected gradient descent for the relaxed thresholding QP.

    Parameters
    ----------
    A : array_like of shape (m, n)
    y : array_like of shape (m,)
    u : array_like of shape (n,)
        Proxy vector being reweighted.
    k : int
        Number of units of weight, ``0 <= k <= n``.
    tol : float
        Stop once ``||w - P(w - g/L)|| <= tol * (1 + ||w||)``.
    max_iters : int
        Gradient step budget. On exhaustion the best iterate is returned with
        ``converged=False``.
    w0 : array_like of shape (n,), optional
        Starting weights, projected onto the feasible set. Defaults to the
        uniform point ``(k/n) * ones``.
    gram, aty : ndarray, optional
        Precomputed ``A.T @ A`` and ``A.T @ y``; callers solving many
        subproblems against the same data pass these to skip the products.

    Returns
    -------
    QpSolution
    """
    A = check_matrix(A)
    m, n = A.shape
    y = check_vector(y, m, name="y")
    u = check_vector(u, n, name="u")
    k = check_sparsity(k, n)
    tol = check_positive(tol, "tol")
    if max_iters < 0:
        raise ValueError("max_iters must be non-negative")
    if w0 is None:
        w_init = np.full(n, k / n)
    else:
        w_init = _project(check_vector(w0, n, name="w0"), k)
    if gram is None:
        gram = A.T @ A
    if aty is None:
        aty = y @ A
    return _solve(A, y, u, k, tol, int(max_iters), w_init, gram, aty)


def _project(v, k):
    tau, ok = _kernels.capped_simplex_tau(v, float(k))
    if not ok:
        raise RuntimeError("capped-simplex bisection did not converge")
    out = np.empty_like(v)
    _kernels.clamp_shift(v, tau, out)
    return out


def _solve(A, y, u, k, tol, max_iters, w_init, gram, aty):
    if not np.any(u):
        # objective does not depend on w
        return QpSolution(w_init, float(y @ y), 0, True, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        H = np.ascontiguousarray(u[:, None] * gram * u[None, :])
        c = u * aty
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(c))):
        raise FloatingPointError("relaxed QP data overflowed; the proxy vector is too large")
    w, iters, converged, stat, failed = _kernels.pgd_capped_simplex(
        H, c, w_init, float(k), tol, max_iters)
    if failed:
        raise RuntimeError("capped-simplex bisection did not converge inside the QP solver")
    obj = relaxed_ot_objective(A, y, u, w)
    rounded = _round_to_vertex(A, y, u, k, tol, w, obj, H, c)
    if rounded is not None:
        wb, obj_b, stat_b = rounded
        return QpSolution(wb, obj_b, int(iters), True, stat_b)
    return QpSolution(w, obj, int(iters), bool(converged), float(stat))


def _round_to_vertex(A, y, u, k, tol, w, obj, H, c):
    """Try the 0/1 indicator of the ``k`` largest weights.

    PGD approaches a vertex optimum only linearly, so when the relaxation is
    tight the indicator is both better and exactly stationary. It is returned
    only if its objective is no larger and it passes the same stationarity
    test as the PGD iterates.
    """
    if k == 0 or k == w.shape[0]:
        return None
    top = np.argsort(-w, kind="stable")[:k]
    wb = np.zeros_like(w)
    wb[top] = 1.0
    obj_b = relaxed_ot_objective(A, y, u, wb)
    if obj_b > obj:
        return None
    L = 2.0 * _kernels.LIPSCHITZ_MARGIN * _kernels.top_eigenvalue(H)
    if L <= 0:
        return None
    z = wb - 2.0 * (H @ wb - c) / L
    stat = float(np.linalg.norm(wb - _project(z, k)))
    if stat > tol * (1.0 + np.sqrt(k)):
        return None
    return wb, obj_b, stat


def brute_force_ot(A, y, u, k):
    """Solve the binary version of the subproblem by enumerating every support.

    Ties in objective keep the lexicographically smallest support.

    Returns
    -------
    w : ndarray of shape (n,)
        0/1 weights with exactly ``k`` ones.
    objective : float

    Raises
    ------
    ValueError
        If ``C(n, k)`` exceeds one million.
    """
    A = check_matrix(A)
    m, n = A.shape
    y = check_vector(y, m, name="y")
    u = check_vector(u, n, name="u")
    k = check_sparsity(k, n)
    if comb(n, k) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"C({n}, {k}) = {comb(n, k)} supports exceeds the enumeration limit")
    B = A * u
    best_obj = np.inf
    best_support = ()
    for support in combinations(range(n), k):
        r = y - B[:, list(support)].sum(axis=1)
        obj = float(r @ r)
        if obj < best_obj:
            best_obj, best_support = obj, support
    w = np.zeros(n)
    w[list(best_support)] = 1.0
    return w, best_obj
