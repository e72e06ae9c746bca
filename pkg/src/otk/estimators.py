"""scikit-learn compatible wrappers around the recovery algorithms.

The sensing matrix plays the role of the design matrix ``X`` (one row per
measurement) and the measurements are the targets ``y``. No intercept is
fitted and predictions are ``X @ coef_``::

    >>> est = RelaxedOptimalKThresholdingPursuit(n_nonzero_coefs=3).fit(A, y)
    >>> est.coef_        # k-sparse estimate of the signal
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from . import qp
from .algorithms import Algorithm, RecoveryConfig, recover


class _ThresholdingRegressor(RegressorMixin, BaseEstimator):
    _algorithm = None

    def __init__(self, n_nonzero_coefs=None, step_size=None, tol=1e-2, max_iter=50,
                 qp_tol=qp.DEFAULT_TOL, qp_max_iter=qp.DEFAULT_MAX_ITERS,
                 warm_start_qp=False):
        self.n_nonzero_coefs = n_nonzero_coefs
        self.step_size = step_size
        self.tol = tol
        self.max_iter = max_iter
        self.qp_tol = qp_tol
        self.qp_max_iter = qp_max_iter
        self.warm_start_qp = warm_start_qp

    def fit(self, X, y, coef_init=None):
        """Recover a sparse coefficient vector from ``y ~ X @ coef``.

        Parameters
        ----------
        X : array-like of shape (n_measurements, n_features)
        y : array-like of shape (n_measurements,)
        coef_init : array-like of shape (n_features,), optional
            Starting iterate; zero by default.
        """
        X, y = validate_data(self, X, y, dtype=np.float64, y_numeric=True)
        n_features = X.shape[1]
        k = self.n_nonzero_coefs
        if k is None:
            k = max(1, n_features // 10)
        cfg = RecoveryConfig(
            self._algorithm, k, eta=self.step_size, epsilon=self.tol,
            max_iters=self.max_iter, x0=coef_init, qp_tol=self.qp_tol,
            qp_max_iters=self.qp_max_iter, warm_start_qp=self.warm_start_qp)
        res = recover(X, y, cfg)
        self.coef_ = res.x_hat
        self.n_iter_ = res.trace.n_iter
        self.trace_ = res.trace
        self.termination_reason_ = res.trace.termination_reason
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return X @ self.coef_


class IterativeHardThresholding(_ThresholdingRegressor):
    """Gradient step followed by keeping the ``k`` largest entries."""

    _algorithm = Algorithm.IHT


class HardThresholdingPursuit(_ThresholdingRegressor):
    """IHT support selection followed by least squares on that support."""

    _algorithm = Algorithm.HTP


class RelaxedOptimalKThresholding(_ThresholdingRegressor):
    """Thresholding guided by the relaxed residual-minimising weight QP."""

    _algorithm = Algorithm.ROT


class RelaxedOptimalKThresholdingPursuit(_ThresholdingRegressor):
    """Relaxed optimal k-thresholding with a least-squares pursuit step."""

    _algorithm = Algorithm.ROTP
