"""Hard thresholding and Euclidean projection onto the capped simplex."""

import numpy as np

from . import _kernels
from ._validation import check_sparsity, check_vector


def hard_threshold(z, k):
    """Keep the ``k`` largest-magnitude entries of ``z`` and zero the rest.

    Ties in magnitude keep the lower index, so the result is deterministic.
    """
    z = check_vector(z, name="z")
    k = check_sparsity(k, z.shape[0])
    return _hard_threshold(z, k)


def _hard_threshold(z, k):
    out = np.zeros_like(z)
    if k == 0:
        return out
    # stable sort of -|z| orders equal magnitudes by index
    keep = np.argsort(-np.abs(z), kind="stable")[:k]
    out[keep] = z[keep]
    return out


def project_capped_simplex(v, k, return_tau=False):
    """Project ``v`` onto ``{w : 0 <= w <= 1, sum(w) = k}``.

    The KKT conditions give ``w = clip(v - tau, 0, 1)`` for a scalar ``tau``,
    located by bisection on ``[min(v) - 1, max(v)]`` until the coordinate sum
    is within ``1e-10 * max(1, k)`` of ``k``.

    Parameters
    ----------
    v : array_like of shape (n,)
    k : int
        Target sum, ``0 <= k <= n``.
    return_tau : bool, default False
        Also return the multiplier ``tau``.

    Raises
    ------
    ValueError
        If ``k > n`` (empty feasible set).
    RuntimeError
        If bisection does not meet the sum tolerance in 200 steps.
    """
    v = check_vector(v, name="v")
    k = check_sparsity(k, v.shape[0])
    tau, ok = _kernels.capped_simplex_tau(v, float(k))
    if not ok:
        raise RuntimeError("capped-simplex bisection did not converge in "
                           f"{_kernels.BISECTION_MAX_ITERS} iterations")
    w = np.empty_like(v)
    _kernels.clamp_shift(v, tau, w)
    return (w, tau) if return_tau else w


def support_of(x):
    """Indices of the nonzero entries of ``x`` as a sorted tuple."""
    x = np.asarray(x, dtype=np.float64)
    return tuple(int(i) for i in np.flatnonzero(x))
