"""Compiled inner loops for the capped-simplex projection and the relaxed QP.

These run unchecked; the public wrappers in ``operators`` and ``qp`` validate
their inputs.
"""

import numpy as np
from numba import njit

BISECTION_MAX_ITERS = 200
POWER_ITERS = 50
LIPSCHITZ_MARGIN = 1.05


@njit(cache=True)
def _clamped_sum(v, tau):
    s = 0.0
    for i in range(v.shape[0]):
        t = v[i] - tau
        if t >= 1.0:
            s += 1.0
        elif t > 0.0:
            s += t
    return s


@njit(cache=True)
def capped_simplex_tau(v, k):
    """Bisection for the shift ``tau`` with ``sum(clip(v - tau, 0, 1)) == k``.

    Returns ``(tau, converged)``.
    """
    n = v.shape[0]
    tol = 1e-10 * max(1.0, k)
    lo = v.min() - 1.0
    hi = v.max()
    # sum(lo) == n and sum(hi) == 0 so the bracket always straddles k
    if abs(n - k) <= tol:
        return lo, True
    if abs(k) <= tol:
        return hi, True
    for _ in range(BISECTION_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # bracket is down to adjacent floats
            return _finish_exact(v, k, mid, tol)
        s = _clamped_sum(v, mid)
        if abs(s - k) <= tol:
            return mid, True
        if s > k:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), False


@njit(cache=True)
def _finish_exact(v, k, tau, tol):
    """Closed-form shift for the active set at ``tau``.

    Only reached when ``|v|`` is so large that float spacing in ``tau``
    exceeds the absolute sum tolerance; acceptance is then scaled by
    ``max(1, |tau|)``.
    """
    n_free = 0
    n_upper = 0
    free_sum = 0.0
    for i in range(v.shape[0]):
        t = v[i] - tau
        if t >= 1.0:
            n_upper += 1
        elif t > 0.0:
            n_free += 1
            free_sum += v[i]
    if n_free > 0:
        tau = (free_sum - (k - n_upper)) / n_free
    ok = abs(_clamped_sum(v, tau) - k) <= tol * max(1.0, abs(tau))
    return tau, ok


@njit(cache=True)
def clamp_shift(v, tau, out):
    for i in range(v.shape[0]):
        t = v[i] - tau
        if t <= 0.0:
            out[i] = 0.0
        elif t >= 1.0:
            out[i] = 1.0
        else:
            out[i] = t


@njit(cache=True)
def top_eigenvalue(H):
    """Rayleigh quotient after a fixed number of power steps on PSD ``H``."""
    n = H.shape[0]
    x = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(POWER_ITERS):
        z = H @ x
        nz = np.sqrt(np.dot(z, z))
        if nz == 0.0:
            return 0.0
        x = z / nz
    lam = np.dot(x, H @ x)
    return lam


@njit(cache=True)
def pgd_capped_simplex(H, c, w0, k, tol, max_iters):
    """Projected gradient on ``f(w) = w'Hw - 2c'w`` over the capped simplex.

    Uses the fixed step ``1/L`` with ``L = 2 * 1.05 * lambda_max(H)``.

    Returns ``(w, iterations, converged, stationarity, projection_failed)``;
    ``w`` is the lowest-objective iterate seen.
    """
    n = w0.shape[0]
    lam = top_eigenvalue(H)
    L = 2.0 * LIPSCHITZ_MARGIN * lam
    w = w0.copy()
    if L <= 0.0:
        return w, 0, True, 0.0, False
    z = np.empty(n)
    w_next = np.empty(n)
    Hw = H @ w
    f = np.dot(w, Hw) - 2.0 * np.dot(c, w)
    best = w.copy()
    best_f = f
    res = np.inf
    for it in range(max_iters + 1):
        # gradient is 2(Hw - c)
        for i in range(n):
            z[i] = w[i] - 2.0 * (Hw[i] - c[i]) / L
        tau, ok = capped_simplex_tau(z, k)
        if not ok:
            return best, it, False, res, True
        clamp_shift(z, tau, w_next)
        d = 0.0
        wn = 0.0
        for i in range(n):
            d += (w[i] - w_next[i]) ** 2
            wn += w[i] * w[i]
        res = np.sqrt(d)
        if res <= tol * (1.0 + np.sqrt(wn)):
            return w, it, True, res, False
        if it == max_iters:
            break
        w[:] = w_next
        Hw = H @ w
        f = np.dot(w, Hw) - 2.0 * np.dot(c, w)
        if f < best_f:
            best_f = f
            best[:] = w
    return best, max_iters, False, res, False
