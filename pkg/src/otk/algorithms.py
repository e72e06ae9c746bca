"""Iterative thresholding algorithms for sparsity-constrained least squares.

All four methods share one driver. Each iteration forms the gradient proxy
``u = x + eta * A^T (y - A x)`` and then differs in how the next k-sparse
iterate is picked:

* IHT  -- ``H_k(u)``
* HTP  -- least squares on ``supp(H_k(u))``
* ROT  -- ``H_k(u * w)`` with ``w`` from the relaxed thresholding QP
* ROTP -- least squares on ``supp(H_k(u * w))``

Iteration stops after ``max_iters`` steps or as soon as consecutive iterates
are closer than ``epsilon`` in Euclidean norm.
"""

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import qp
from ._validation import check_matrix, check_positive, check_sparsity, check_vector
from .numerics import _lstsq_on_support
from .operators import _hard_threshold


class Algorithm(str, enum.Enum):
    IHT = "iht"
    HTP = "htp"
    ROT = "rot"
    ROTP = "rotp"


class TerminationReason(str, enum.Enum):
    MAX_ITERS = "max_iters"
    ITERATE_STALLED = "iterate_stalled"


@dataclass
class RecoveryConfig:
    """Parameters of one recovery run.

    ``eta=None`` means ``1/m`` and ``x0=None`` means the zero vector, both
    resolved against the data in :meth:`resolve`. ``epsilon`` is the stall
    tolerance on ``||x^p - x^{p-1}||``; ``success_epsilon`` overrides the
    relative-error threshold used to score success when it differs.
    """

    algorithm: Algorithm
    k: int
    eta: float | None = None
    epsilon: float = 1e-2
    max_iters: int = 50
    x0: np.ndarray | None = None
    qp_tol: float = qp.DEFAULT_TOL
    qp_max_iters: int = qp.DEFAULT_MAX_ITERS
    warm_start_qp: bool = False
    store_iterates: bool = False
    success_epsilon: float | None = None

    def __post_init__(self):
        self.algorithm = Algorithm(self.algorithm)

    def resolve(self, m, n):
        """Return a copy with defaults filled in and every field validated."""
        k = check_sparsity(self.k, n)
        eta = 1.0 / m if self.eta is None else check_positive(self.eta, "eta")
        check_positive(self.epsilon, "epsilon")
        if self.success_epsilon is not None:
            check_positive(self.success_epsilon, "success_epsilon")
        if int(self.max_iters) < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        x0 = np.zeros(n) if self.x0 is None else check_vector(self.x0, n, name="x0")
        return replace(self, k=k, eta=eta, x0=x0, max_iters=int(self.max_iters),
                       qp_tol=check_positive(self.qp_tol, "qp_tol"))


@dataclass(frozen=True)
class IterationRecord:
    p: int
    residual_norm: float
    error_to_truth: float | None
    qp_iterations: int = 0
    qp_converged: bool = True
    regularized: bool = False
    x: np.ndarray | None = None


@dataclass
class IterationTrace:
    records: list = field(default_factory=list)
    termination_reason: TerminationReason = TerminationReason.MAX_ITERS
    non_finite: bool = False

    @property
    def n_iter(self):
        return self.records[-1].p if self.records else 0

    def errors(self):
        return np.array([r.error_to_truth for r in self.records], dtype=float)

    def residual_norms(self):
        return np.array([r.residual_norm for r in self.records])


@dataclass
class RecoveryResult:
    x_hat: np.ndarray
    trace: IterationTrace
    success: bool | None = None


def check_success(x_star, x_hat, epsilon):
    """Whether ``||x_star - x_hat|| / ||x_star|| <= epsilon``."""
    x_star = check_vector(x_star, name="x_star")
    x_hat = check_vector(x_hat, x_star.shape[0], name="x_hat")
    return relative_error(x_star, x_hat) <= epsilon


def relative_error(x_star, x_hat):
    ref = np.linalg.norm(x_star)
    if ref == 0:
        raise ValueError("relative error is undefined for a zero reference signal")
    return float(np.linalg.norm(x_star - x_hat) / ref)


class _Problem:
    """Data shared by every iteration of a run: ``A``, ``y`` and the products
    reused by the inner QP."""

    def __init__(self, A, y):
        self.A = A
        self.y = y
        self._gram = None
        self._aty = None

    @property
    def gram(self):
        if self._gram is None:
            self._gram = self.A.T @ self.A
        return self._gram

    @property
    def aty(self):
        if self._aty is None:
            self._aty = self.y @ self.A
        return self._aty


def _step_iht(prob, u, cfg, state):
    return _hard_threshold(u, cfg.k), 0, True, False


def _step_htp(prob, u, cfg, state):
    support = np.flatnonzero(_hard_threshold(u, cfg.k))
    x, reg = _lstsq_on_support(prob.A, prob.y, support)
    return x, 0, True, reg


def _relaxed_weights(prob, u, cfg, state):
    w0 = state.get("w") if cfg.warm_start_qp else None
    if w0 is None:
        w0 = np.full(u.shape[0], cfg.k / u.shape[0])
    sol = qp._solve(prob.A, prob.y, u, cfg.k, cfg.qp_tol, cfg.qp_max_iters,
                    w0, prob.gram, prob.aty)
    state["w"] = sol.w
    return sol


def _step_rot(prob, u, cfg, state):
    sol = _relaxed_weights(prob, u, cfg, state)
    return _hard_threshold(u * sol.w, cfg.k), sol.iterations, sol.converged, False


def _step_rotp(prob, u, cfg, state):
    sol = _relaxed_weights(prob, u, cfg, state)
    support = np.flatnonzero(_hard_threshold(u * sol.w, cfg.k))
    x, reg = _lstsq_on_support(prob.A, prob.y, support)
    return x, sol.iterations, sol.converged, reg


_STEPS = {
    Algorithm.IHT: _step_iht,
    Algorithm.HTP: _step_htp,
    Algorithm.ROT: _step_rot,
    Algorithm.ROTP: _step_rotp,
}


def recover(A, y, config, x_star=None, callback=None):
    """Run the algorithm named by ``config.algorithm``.

    Parameters
    ----------
    A : array_like of shape (m, n)
    y : array_like of shape (m,)
    config : RecoveryConfig
    x_star : array_like of shape (n,), optional
        Ground truth; enables per-iteration errors and the success flag.
    callback : callable, optional
        Called as ``callback(p, x_p)`` after every iteration.

    Returns
    -------
    RecoveryResult
    """
    A = check_matrix(A)
    m, n = A.shape
    y = check_vector(y, m, name="y")
    cfg = config.resolve(m, n)
    if x_star is not None:
        x_star = check_vector(x_star, n, name="x_star")
        if not np.any(x_star):
            raise ValueError("x_star must be nonzero")
    prob = _Problem(A, y)
    step = _STEPS[cfg.algorithm]
    state = {}
    trace = IterationTrace()

    def record(p, x, qp_iters=0, qp_conv=True, reg=False):
        r = y - A @ x
        err = relative_error(x_star, x) if x_star is not None else None
        trace.records.append(IterationRecord(
            p, float(np.linalg.norm(r)), err, qp_iters, qp_conv, reg,
            x.copy() if cfg.store_iterates else None))
        return r

    x = cfg.x0.copy()
    residual = record(0, x)
    # divergent runs overflow; they are caught by the finiteness checks
    with np.errstate(over="ignore", invalid="ignore"):
        for p in range(1, cfg.max_iters + 1):
            u = x + cfg.eta * (residual @ A)
            if not np.all(np.isfinite(u)):
                trace.non_finite = True
                break
            try:
                x_new, qp_iters, qp_conv, reg = step(prob, u, cfg, state)
            except FloatingPointError:
                trace.non_finite = True
                break
            if not np.all(np.isfinite(x_new)):
                trace.non_finite = True
                break
            residual = record(p, x_new, qp_iters, qp_conv, reg)
            if callback is not None:
                callback(p, x_new)
            moved = np.linalg.norm(x_new - x)
            x = x_new
            if moved < cfg.epsilon:
                trace.termination_reason = TerminationReason.ITERATE_STALLED
                break

    success = None
    if x_star is not None:
        eps = cfg.success_epsilon if cfg.success_epsilon is not None else cfg.epsilon
        success = (not trace.non_finite) and relative_error(x_star, x) <= eps
    return RecoveryResult(x, trace, success)


def run_iht(A, y, config, x_star=None, callback=None):
    return recover(A, y, replace(config, algorithm=Algorithm.IHT), x_star, callback)


def run_htp(A, y, config, x_star=None, callback=None):
    return recover(A, y, replace(config, algorithm=Algorithm.HTP), x_star, callback)


def run_rot(A, y, config, x_star=None, callback=None):
    return recover(A, y, replace(config, algorithm=Algorithm.ROT), x_star, callback)


def run_rotp(A, y, config, x_star=None, callback=None):
    return recover(A, y, replace(config, algorithm=Algorithm.ROTP), x_star, callback)
