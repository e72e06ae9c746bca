"""Numerical evaluation of the convergence theory for ROT and ROTP.

The sparse cap ``D_k = {z : ||z||_0 <= k, ||z||_2 = 1}`` enters the theory
through its Gaussian complexity ``gamma(D_k) = E sup_{z in D_k} |<g, z>|``.
For a fixed ``g`` that supremum is the Euclidean norm of the ``k``
largest-magnitude entries of ``g``, so Monte-Carlo estimates carry no
discretisation error.

The absolute constant ``C`` and the sub-Gaussian norm ``K`` of the matrix
deviation inequality are never estimated separately; they enter only as the
product ``CK2 = C * K**2``. Predicted measurement thresholds are therefore
correct in order (``k log(en/k)``), not in constant. Success probabilities of
the form ``1 - c exp(-gamma(D_2k)^2)`` involve an unspecified ``c`` and are
not computed.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb, e, log, sqrt

import numpy as np

from .sensing import SensingMatrix, generator

# root equations for the closed-form thresholds at eta = 1/m
ROT_ROOT_POLY = (1.0, -50.0, -48.0)
ROTP_ROOT_POLY = (1.0, -4.0, -2444.0, -4032.0, -2880.0)
ROT_ROOT_REFERENCE = 50.943
ROTP_ROOT_REFERENCE = 52.2614

DEVIATION_LIMIT = 10**5
SCAN_LIMIT = 10**12


@dataclass(frozen=True)
class GammaEstimate:
    n: int
    k: int
    samples: int
    gamma_hat: float
    width_hat: float
    std_error: float


def _sorted_sq_cumsum(n, samples, seed):
    """Per-draw cumulative sums of the squared entries of ``g`` in decreasing
    magnitude; column ``j - 1`` holds the squared top-``j`` norm."""
    g = generator(seed).standard_normal((samples, n))
    sq = np.sort(g * g, axis=1)[:, ::-1]
    return np.cumsum(sq, axis=1)


def top_k_norms(n, k, samples, seed):
    """``sup_{z in D_k} <g, z>`` for each of ``samples`` Gaussian draws."""
    return np.sqrt(_sorted_sq_cumsum(n, samples, seed)[:, k - 1])


def estimate_gamma(n, k, samples=10000, seed=0):
    """Monte-Carlo estimate of the Gaussian complexity and width of ``D_k``.

    ``D_k`` is symmetric, so ``sup <g, z>`` and ``sup |<g, z>|`` coincide per
    draw and the two estimates are equal; they are kept as separate fields.
    """
    if samples < 100:
        raise ValueError("samples must be at least 100")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    sups = top_k_norms(n, k, samples, seed)
    mean = float(sups.mean())
    se = float(sups.std(ddof=1) / sqrt(samples))
    return GammaEstimate(n, k, samples, mean, mean, se)


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool

    @property
    def margin(self):
        return self.rhs - self.lhs


def _paired_check(name, lhs_draws, rhs_draws, z=3.0):
    # lhs <= rhs tested on the paired difference so shared noise cancels
    d = rhs_draws - lhs_draws
    se = float(d.std(ddof=1) / sqrt(d.size)) if d.size > 1 else 0.0
    lhs, rhs = float(lhs_draws.mean()), float(rhs_draws.mean())
    slack = z * se
    return InequalityCheck(name, lhs, rhs, slack, rhs - lhs >= -slack - 1e-12 * max(1.0, abs(rhs)))


def check_gamma_inequalities(n, k, samples=5000, seed=0, larger=None):
    """Check the Gaussian-complexity inequalities for ``D_k`` on shared draws.

    * ``gamma(D_2k) <= 2 gamma(D_k)``
    * ``gamma(D_k + D_k) <= 2 gamma(D_k)``; the supremum over a Minkowski sum
      is the sum of the suprema for the same draw
    * ``gamma(D_k) <= gamma(D_l)`` for ``l = larger`` (default ``2k``)
    * ``(w + 1)/3 <= gamma <= 2 (w + 1)`` for ``D_k`` (members are unit vectors)

    Each is accepted with three paired standard errors of slack.
    """
    if 2 * k > n:
        raise ValueError(f"the 2k-sparse checks need 2k <= n, got k={k}, n={n}")
    if samples < 100:
        raise ValueError("samples must be at least 100")
    l = 2 * k if larger is None else larger
    if not k <= l <= n:
        raise ValueError(f"need k <= larger <= n, got larger={l}")
    cums = _sorted_sq_cumsum(n, samples, seed)
    s_k = np.sqrt(cums[:, k - 1])
    s_2k = np.sqrt(cums[:, 2 * k - 1])
    s_l = np.sqrt(cums[:, l - 1])
    s_sum = s_k + s_k
    width = s_k
    return [
        _paired_check("gamma(D_2k) <= 2 gamma(D_k)", s_2k, 2 * s_k),
        _paired_check("gamma(D_k + D_k) <= 2 gamma(D_k)", s_sum, 2 * s_k),
        _paired_check(f"gamma(D_k) <= gamma(D_{l})", s_k, s_l),
        _paired_check("(w(D_k) + 1)/3 <= gamma(D_k)", (width + 1.0) / 3.0, s_k),
        _paired_check("gamma(D_k) <= 2 (w(D_k) + 1)", s_k, 2.0 * (width + 1.0)),
    ]


@dataclass(frozen=True)
class TheoryParams:
    """Inputs of the convergence constants.

    ``eta=None`` means ``1/m``. ``gamma_k`` defaults to ``gamma_2k``, the
    worst case permitted by ``gamma(D_k) <= gamma(D_2k)``.
    """

    m: int
    n: int
    k: int
    gamma_2k: float
    gamma_k: float | None = None
    eta: float | None = None
    CK2: float = 1.0

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or not 1 <= self.k <= self.n:
            raise ValueError("need m, n >= 1 and 1 <= k <= n")
        if self.gamma_2k < 0 or (self.gamma_k is not None and self.gamma_k < 0):
            raise ValueError("Gaussian complexities must be non-negative")
        if self.CK2 < 0:
            raise ValueError("CK2 must be non-negative")
        if self.eta is not None:
            if self.eta <= 0:
                raise ValueError("eta must be positive")
            if self.eta * self.m > 1 + 1e-12:
                raise ValueError(f"step size must satisfy eta * m <= 1, got {self.eta * self.m:.6g}")

    @property
    def step(self):
        return 1.0 / self.m if self.eta is None else self.eta

    @property
    def gamma_k_value(self):
        return self.gamma_2k if self.gamma_k is None else self.gamma_k


@dataclass(frozen=True)
class TheoryReport:
    r1: float
    r2: float
    rho1: float
    c1: float
    c21: float
    c22: float
    c2: float
    rho2: float
    c3: float
    rot_converges: bool
    rotp_converges: bool
    m_transition_rot: int | None
    m_transition_rotp: int | None


def _constants(m, eta, s2k, sk):
    """Vectorised convergence constants; ``s2k = CK2 gamma(D_2k)``, ``sk = CK2 gamma(D_k)``.

    Where ``sqrt(m) <= 2 s2k`` the bounds are vacuous and ``c1``, ``c21``
    are set to ``inf``; where ``max(r1, r2) >= 1``, ``rho2`` and ``c3`` are.
    """
    m = np.asarray(m, dtype=float)
    eta = np.asarray(eta, dtype=float)
    rm = np.sqrt(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = 1.0 - eta * m * (rm - 12.0 * s2k) / rm
        r2 = (6.0 * s2k / rm) * (3.0 * s2k / rm + 1.0)
        denom = rm - 2.0 * s2k
        ok = denom > 0
        c1 = np.where(ok, (4.0 * rm + 4.0 * sk) / np.where(ok, denom, 1.0), np.inf)
        c21 = np.where(ok, (3.0 * eta * (rm + 2.0 * sk) ** 2 + 2.0) / np.where(ok, denom, 1.0), np.inf)
        c22 = eta * (rm + 2.0 * sk)
        c2 = c21 + c22
        r = np.maximum(r1, r2)
        rho1 = np.where(ok, c1 * r, np.inf)
        contract = ok & (r < 1)
        root = np.sqrt(np.where(contract, 1.0 - r * r, 1.0))
        rho2 = np.where(contract, rho1 / root, np.inf)
        c3 = np.where(contract, c2 / root + c22 / np.where(contract, 1.0 - r, 1.0), np.inf)
    return r1, r2, rho1, c1, c21, c22, c2, rho2, c3


def scan_transition(n, k, gamma_2k, gamma_k=None, CK2=1.0, which="rot",
                    limit=SCAN_LIMIT):
    """Smallest ``m`` with ``rho < 1`` at step size ``1/m``, scanning upward.

    Returns ``None`` when no ``m <= limit`` qualifies.
    """
    s2k = CK2 * gamma_2k
    sk = CK2 * (gamma_2k if gamma_k is None else gamma_k)
    col = 2 if which == "rot" else 7
    start, chunk = 1, 1 << 16
    while start <= limit:
        stop = min(start + chunk, limit + 1)
        ms = np.arange(start, stop, dtype=float)
        rho = _constants(ms, 1.0 / ms, s2k, sk)[col]
        hit = np.flatnonzero(rho < 1.0)
        if hit.size:
            return int(ms[hit[0]])
        start = stop
        chunk = min(chunk * 2, 1 << 24)
    return None


def closed_transition(root, CK2, gamma_2k):
    """Smallest integer ``m`` with ``sqrt(m) > root * CK2 * gamma_2k``."""
    bound = (root * CK2 * gamma_2k) ** 2
    m = int(np.floor(bound)) + 1
    return max(m, 1)


def theory_report(params, scan=True):
    """Evaluate every convergence constant at ``params``.

    With ``scan=True`` the predicted transitions are found by scanning ``m``
    upward with ``eta = 1/m``; the other inputs are held fixed.
    """
    s2k = params.CK2 * params.gamma_2k
    sk = params.CK2 * params.gamma_k_value
    vals = [float(v) for v in _constants(params.m, params.step, s2k, sk)]
    r1, r2, rho1, c1, c21, c22, c2, rho2, c3 = vals
    m_rot = m_rotp = None
    if scan:
        m_rot = scan_transition(params.n, params.k, params.gamma_2k, params.gamma_k, params.CK2, "rot")
        m_rotp = scan_transition(params.n, params.k, params.gamma_2k, params.gamma_k, params.CK2, "rotp")
    return TheoryReport(r1, r2, rho1, c1, c21, c22, c2, rho2, c3,
                        bool(rho1 < 1), bool(rho2 < 1), m_rot, m_rotp)


def _bisect_root(coeffs, lo=1.0, hi=100.0, tol=1e-9):
    f = lambda t: float(np.polyval(coeffs, t))
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ValueError(f"no sign change of {coeffs} on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def verify_remark1_roots():
    """Positive roots of ``t^2 - 50t - 48`` and ``t^4 - 4t^3 - 2444t^2 - 4032t - 2880``.

    Raises ``AssertionError`` if they disagree with 50.943 (to 5e-3) or
    52.2614 (to 5e-4).
    """
    c_prime = _bisect_root(ROT_ROOT_POLY)
    c_dprime = _bisect_root(ROTP_ROOT_POLY)
    assert abs(c_prime - ROT_ROOT_REFERENCE) <= 5e-3, c_prime
    assert abs(c_dprime - ROTP_ROOT_REFERENCE) <= 5e-4, c_dprime
    return c_prime, c_dprime


def transition_order(n, k):
    """``k * ln(e n / k)``, the predicted order of the measurement threshold."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return k * log(e * n / k)


def exact_deviation_supremum(A, k):
    """``sup_{z in D_k} | ||A z|| - sqrt(m) |`` by enumerating supports.

    On a fixed support the image norms of unit vectors fill
    ``[sigma_min, sigma_max]`` of the column submatrix, so the supremum is the
    largest ``max(sigma_max - sqrt(m), sqrt(m) - sigma_min)`` over supports.
    """
    mat = A.matrix if isinstance(A, SensingMatrix) else np.asarray(A, dtype=float)
    m, n = mat.shape
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if comb(n, k) > DEVIATION_LIMIT:
        raise ValueError(f"C({n}, {k}) supports exceeds the enumeration limit {DEVIATION_LIMIT}")
    rm = sqrt(m)
    best = 0.0
    supports = list(combinations(range(n), k))
    for start in range(0, len(supports), 4096):
        idx = np.array(supports[start:start + 4096])
        subs = mat[:, idx].transpose(1, 0, 2)
        sv = np.linalg.svd(subs, compute_uv=False)
        # fewer rows than columns leaves a zero singular value
        smin = sv[:, -1] if m >= k else np.zeros(len(idx))
        dev = np.maximum(sv[:, 0] - rm, rm - smin)
        best = max(best, float(dev.max()))
    return best


def random_deviation_lower_bound(A, k, samples=10**5, seed=0):
    """Largest deviation seen over random unit k-sparse vectors."""
    mat = A.matrix if isinstance(A, SensingMatrix) else np.asarray(A, dtype=float)
    m, n = mat.shape
    rng = generator(seed)
    rm = sqrt(m)
    best = 0.0
    for start in range(0, samples, 10000):
        b = min(10000, samples - start)
        supp = np.argsort(rng.random((b, n)), axis=1)[:, :k]
        vals = rng.standard_normal((b, k))
        vals /= np.linalg.norm(vals, axis=1, keepdims=True)
        # A z = sum_j vals_j * A[:, supp_j]
        Az = np.einsum("mbk,bk->bm", mat[:, supp], vals)
        dev = np.abs(np.linalg.norm(Az, axis=1) - rm)
        best = max(best, float(dev.max()))
    return best
