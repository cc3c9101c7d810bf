"""Generalized likelihood ratio test of a polynomial calibration function.

The statistic is the gap between the log-likelihood evaluated at the
local polynomial estimate and the maximized parametric log-likelihood.
After scaling by ``r_K`` it is referred to a chi-square distribution with
``r_K * c_K * range / h`` (generally fractional) degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _newton
from .calibration import (CalibrationModel, ConvergenceError, Dataset,
                          InsufficientLocalData, estimate_curve,
                          fit_parametric, loo_cv_bandwidth)
from .copulas import as_spec
from .kernels import as_kernel, constants_for, null_dof

_EPS = 1e-16
_MAXITER = 10000


def _gamma_series(a, x):
    # lower regularized P(a, x) by its power series
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAXITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cfrac(a, x):
    # upper regularized Q(a, x) by modified Lentz continued fraction
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for i in range(1, _MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        f *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return f * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function ``Q(a, x)``."""
    if not a > 0:
        raise ValueError("shape must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cfrac(a, x)


def chisq_upper_tail(x: float, dof: float) -> float:
    """``P(chi2_dof > x)`` for real, possibly fractional, ``dof``."""
    if not dof > 0:
        raise ValueError(f"degrees of freedom must be positive; got {dof}")
    if x < 0:
        raise ValueError(f"statistic must be nonnegative; got {x}")
    return min(1.0, max(0.0, regularized_gamma_q(0.5 * dof, 0.5 * x)))


def loglik_under_null(data: Dataset, model: CalibrationModel) -> float:
    """Log-likelihood of the data at a fitted polynomial calibration."""
    eta = np.ascontiguousarray(model(data.x), dtype=float)
    return float(_newton.sum_ell(model.spec.code, eta, data.u1, data.u2))


def loglik_under_alt(data: Dataset, spec, h: float, degree: int = 0,
                     kernel="epanechnikov", start=None, return_curve=False):
    """Log-likelihood at the local polynomial estimates at each ``x_i``.

    Raises
    ------
    InsufficientLocalData
        If some ``x_i`` has too few weighted observations.
    ConvergenceError
        If a local fit does not converge.
    """
    spec = as_spec(spec)
    fits = estimate_curve(data, spec, data.x, h, degree, kernel, start)
    failed = [f for f in fits if not f.converged]
    if failed:
        raise ConvergenceError(
            f"{len(failed)} local fits did not converge at h={h:g} "
            f"(first at x={failed[0].x0:g})")
    eta = np.array([f.eta_hat for f in fits])
    value = float(_newton.sum_ell(spec.code, eta, data.u1, data.u2))
    return (value, eta) if return_curve else value


def default_bandwidth_grid(covariate_range: float, num: int = 12):
    """Log-spaced bandwidths from 0.11 to 0.99 times the covariate range."""
    return np.geomspace(0.11 * covariate_range, 0.99 * covariate_range, num)


@dataclass
class GlrtResult:
    """Outcome of one generalized likelihood ratio test."""

    lambda_: float
    h: float
    null_degree: int
    alt_degree: int
    loglik_null: float
    loglik_alt: float
    r_K: float
    c_K: float
    covariate_range: float
    dof: float
    scaled_statistic: float
    p_value: float
    null_model: CalibrationModel
    family: str = "frank"
    kernel: str = "epanechnikov"
    n: int = 0
    negative_lambda: bool = False
    low_dof: bool = False
    bandwidth_selection: object = None
    extra: dict = field(default_factory=dict)

    @property
    def statistic(self) -> float:
        return self.lambda_

    def reject(self, alpha: float) -> bool:
        return self.p_value < alpha

    def to_dict(self) -> dict:
        """Flat JSON-ready record of the result."""
        out = {
            "lambda": self.lambda_,
            "h": self.h,
            "null_degree": self.null_degree,
            "alt_degree": self.alt_degree,
            "loglik_null": self.loglik_null,
            "loglik_alt": self.loglik_alt,
            "r_K": self.r_K,
            "c_K": self.c_K,
            "covariate_range": self.covariate_range,
            "dof": self.dof,
            "scaled_statistic": self.scaled_statistic,
            "p_value": self.p_value,
            "null_coefficients": [float(c) for c in self.null_model.coefficients],
            "null_converged": bool(self.null_model.converged),
            "family": self.family,
            "kernel": self.kernel,
            "n": self.n,
            "negative_lambda": self.negative_lambda,
            "low_dof": self.low_dof,
        }
        sel = self.bandwidth_selection
        if sel is not None:
            out["bandwidth_grid"] = [float(h) for h in sel.grid]
            out["cv_scores"] = [float(s) if np.isfinite(s) else None
                                for s in sel.cv_scores]
        return out


def assemble_result(lam, h, p, alt_degree, ll0, ll1, constants, rng_x, model,
                    **kw) -> GlrtResult:
    """Derive dof, scaled statistic and p-value from the raw pieces."""
    dof = null_dof(constants, rng_x, h)
    scaled = constants.r_K * lam
    negative = lam <= 0
    p_value = 1.0 if negative else chisq_upper_tail(scaled, dof)
    return GlrtResult(
        lambda_=lam, h=h, null_degree=p, alt_degree=alt_degree,
        loglik_null=ll0, loglik_alt=ll1, r_K=constants.r_K, c_K=constants.c_K,
        covariate_range=rng_x, dof=dof, scaled_statistic=scaled,
        p_value=p_value, null_model=model, negative_lambda=bool(negative),
        low_dof=bool(dof < 1), **kw)


def run_test(data: Dataset, spec="frank", null_degree: int = 0,
             kernel="epanechnikov", h: float | None = None,
             bandwidth_grid=None, alt_degree: int | None = None) -> GlrtResult:
    """Test ``H0: eta is a polynomial of degree null_degree``.

    The alternative is the local polynomial estimate of order
    ``alt_degree`` (default: ``null_degree``).  Without an explicit ``h``
    the bandwidth is chosen by leave-one-out likelihood over
    ``bandwidth_grid`` (default :func:`default_bandwidth_grid`) and reused
    for the statistic.
    """
    spec = as_spec(spec)
    kernel = as_kernel(kernel)
    p = int(null_degree)
    q = p if alt_degree is None else int(alt_degree)
    model = fit_parametric(data, spec, p)
    start = model if q == p else fit_parametric(data, spec, q)
    rng_x = data.covariate_range
    selection = None
    if h is None:
        grid = default_bandwidth_grid(rng_x) if bandwidth_grid is None \
            else np.asarray(bandwidth_grid, dtype=float)
        selection = loo_cv_bandwidth(data, spec, grid, q, kernel, start)
        h = selection.chosen
    ll1 = loglik_under_alt(data, spec, h, q, kernel, start)
    ll0 = loglik_under_null(data, model)
    constants = constants_for(kernel, q)
    result = assemble_result(
        ll1 - ll0, float(h), p, q, ll0, ll1, constants, rng_x, model,
        family=spec.family.value, kernel=kernel.id.value, n=data.n,
        bandwidth_selection=selection)
    return result


__all__ = [
    "ConvergenceError", "GlrtResult", "InsufficientLocalData",
    "chisq_upper_tail", "default_bandwidth_grid", "loglik_under_alt",
    "loglik_under_null", "regularized_gamma_q", "run_test",
]
