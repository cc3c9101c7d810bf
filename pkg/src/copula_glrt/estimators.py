"""scikit-learn style estimators.

All estimators take the covariate as ``X`` (shape ``(n,)`` or ``(n, 1)``)
and the copula-scale pairs as ``U`` (shape ``(n, 2)``), playing the role
of sklearn's ``y``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import (check_array, check_consistent_length,
                                      check_is_fitted)

from .calibration import (Dataset, estimate_curve, fit_parametric,
                          loo_cv_bandwidth, pseudo_observations)
from .copulas import as_spec
from .glrt import default_bandwidth_grid, loglik_under_null, run_test


def _check_covariate(X):
    x = check_array(X, ensure_2d=False, dtype=float)
    if x.ndim == 2:
        if x.shape[1] != 1:
            raise ValueError(f"expected a single covariate column; got {x.shape[1]}")
        x = x[:, 0]
    return x


def check_dataset(X, U) -> Dataset:
    """Validate ``(X, U)`` and pack them into a :class:`Dataset`."""
    x = _check_covariate(X)
    U = check_array(U, dtype=float)
    if U.shape[1] != 2:
        raise ValueError(f"U must have two columns; got {U.shape[1]}")
    check_consistent_length(x, U)
    return Dataset(x, U[:, 0], U[:, 1])


class PseudoObservations(TransformerMixin, BaseEstimator):
    """Map each column of a two-column sample to ``rank / (n + 1)``.

    The transform is applied to whatever sample is passed; nothing is
    learned in ``fit`` beyond the input width.
    """

    def fit(self, Y, y=None):
        Y = check_array(Y, dtype=float)
        if Y.shape[1] != 2:
            raise ValueError("expected two columns")
        self.n_features_in_ = 2
        return self

    def transform(self, Y):
        check_is_fitted(self)
        Y = check_array(Y, dtype=float)
        if Y.shape[1] != self.n_features_in_:
            raise ValueError("expected two columns")
        return np.column_stack(pseudo_observations(Y[:, 0], Y[:, 1]))


class ParametricCalibration(BaseEstimator):
    """Maximum-likelihood polynomial calibration function.

    Parameters
    ----------
    family : str, default="frank"
        Copula family; ``"frank"`` (identity link) or ``"clayton"`` (log link).
    degree : int, default=0
        Polynomial degree of ``eta``.

    Attributes
    ----------
    coef_ : ndarray of shape (degree + 1,)
        Coefficients ``a_0, ..., a_p`` of ``eta(x) = sum_j a_j x**j``.
    loglik_ : float
        Maximized log-likelihood.
    converged_ : bool
    n_iter_ : int
    """

    def __init__(self, family="frank", degree=0):
        self.family = family
        self.degree = degree

    def fit(self, X, U):
        data = check_dataset(X, U)
        self.model_ = fit_parametric(data, self.family, self.degree)
        self.coef_ = self.model_.coefficients
        self.loglik_ = self.model_.loglik
        self.converged_ = self.model_.converged
        self.n_iter_ = self.model_.iterations
        return self

    def predict(self, X):
        """Calibration values ``eta(x)``."""
        check_is_fitted(self)
        return self.model_(_check_covariate(X))

    def predict_theta(self, X):
        return as_spec(self.family).inverse_link(self.predict(X))

    def score(self, X, U):
        """Log-likelihood of ``(X, U)`` under the fitted calibration."""
        check_is_fitted(self)
        return loglik_under_null(check_dataset(X, U), self.model_)


class LocalCalibration(BaseEstimator):
    """Local polynomial likelihood estimate of the calibration function.

    Parameters
    ----------
    family : str, default="frank"
    degree : int, default=1
        Order of the local polynomial.
    kernel : str, default="epanechnikov"
    bandwidth : float, optional
        Fixed bandwidth. When omitted it is chosen by leave-one-out
        likelihood over ``bandwidth_grid``.
    bandwidth_grid : array-like, optional
        Candidate bandwidths; defaults to 12 log-spaced values between
        0.11 and 0.99 times the covariate range.

    Attributes
    ----------
    bandwidth_ : float
    cv_ : BandwidthSelection or None
    """

    def __init__(self, family="frank", degree=1, kernel="epanechnikov",
                 bandwidth=None, bandwidth_grid=None):
        self.family = family
        self.degree = degree
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.bandwidth_grid = bandwidth_grid

    def fit(self, X, U):
        data = check_dataset(X, U)
        self.data_ = data
        self.start_ = fit_parametric(data, self.family, self.degree)
        self.cv_ = None
        if self.bandwidth is None:
            grid = (default_bandwidth_grid(data.covariate_range)
                    if self.bandwidth_grid is None else self.bandwidth_grid)
            self.cv_ = loo_cv_bandwidth(data, self.family, grid, self.degree,
                                        self.kernel, self.start_)
            self.bandwidth_ = self.cv_.chosen
        else:
            self.bandwidth_ = float(self.bandwidth)
        return self

    def local_fits(self, X):
        check_is_fitted(self)
        return estimate_curve(self.data_, self.family, _check_covariate(X),
                              self.bandwidth_, self.degree, self.kernel,
                              self.start_)

    def predict(self, X):
        """Estimated calibration values at ``X``."""
        return np.array([f.eta_hat for f in self.local_fits(X)])

    def predict_theta(self, X):
        return as_spec(self.family).inverse_link(self.predict(X))


class CalibrationGLRT(BaseEstimator):
    """Generalized likelihood ratio test of a polynomial calibration.

    Parameters
    ----------
    family : str, default="frank"
    null_degree : int, default=0
        Degree of the polynomial under the null (0 = constant copula).
    kernel : str, default="epanechnikov"
    bandwidth : float, optional
        Fixed bandwidth; chosen by leave-one-out likelihood if omitted.
    bandwidth_grid : array-like, optional
    alt_degree : int, optional
        Local polynomial order under the alternative; defaults to
        ``null_degree``.

    Attributes
    ----------
    result_ : GlrtResult
    statistic_ : float
        The log-likelihood gap ``lambda``.
    pvalue_ : float
    dof_ : float
    bandwidth_ : float
    """

    def __init__(self, family="frank", null_degree=0, kernel="epanechnikov",
                 bandwidth=None, bandwidth_grid=None, alt_degree=None):
        self.family = family
        self.null_degree = null_degree
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.bandwidth_grid = bandwidth_grid
        self.alt_degree = alt_degree

    def fit(self, X, U):
        data = check_dataset(X, U)
        self.result_ = run_test(data, self.family, self.null_degree,
                                self.kernel, self.bandwidth,
                                self.bandwidth_grid, self.alt_degree)
        self.statistic_ = self.result_.lambda_
        self.pvalue_ = self.result_.p_value
        self.dof_ = self.result_.dof
        self.bandwidth_ = self.result_.h
        return self

    def reject(self, alpha=0.05) -> bool:
        check_is_fitted(self)
        return self.result_.reject(alpha)
