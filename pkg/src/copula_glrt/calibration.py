"""Estimation of the calibration function of a conditional copula.

Two estimators are provided: a parametric maximum-likelihood fit of a
polynomial calibration function, and the kernel-weighted local polynomial
likelihood estimator, whose bandwidth can be chosen by leave-one-out
cross-validated likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.stats import rankdata

from . import _newton
from .copulas import CopulaDomainError, as_spec
from .kernels import as_kernel

MIN_LOCAL_POINTS = 4


class InsufficientLocalData(ValueError):
    """Too few observations carry positive kernel weight at a target."""


class ConvergenceError(RuntimeError):
    """A fit required to converge did not."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Aligned covariate values and copula-scale pairs."""

    x: np.ndarray
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=float).ravel()
        u1 = np.ascontiguousarray(self.u1, dtype=float).ravel()
        u2 = np.ascontiguousarray(self.u2, dtype=float).ravel()
        if not (x.shape == u1.shape == u2.shape):
            raise ValueError("x, u1 and u2 must have equal lengths")
        if x.size < 10:
            raise ValueError(f"need at least 10 observations; got {x.size}")
        if not np.all(np.isfinite(x)):
            raise ValueError("x must be finite")
        for name, u in (("u1", u1), ("u2", u2)):
            bad = np.flatnonzero(~((u > 0.0) & (u < 1.0)))
            if bad.size:
                raise CopulaDomainError(
                    f"{name} must lie strictly in (0, 1); row {bad[0]} has "
                    f"{u[bad[0]]!r}")
        if np.ptp(x) == 0:
            raise ValueError("x values are all identical")
        for a in (x, u1, u2):
            a.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u1", u1)
        object.__setattr__(self, "u2", u2)

    @property
    def n(self) -> int:
        return self.x.size

    def __len__(self):
        return self.n

    @property
    def covariate_range(self) -> float:
        return float(self.x.max() - self.x.min())

    def take(self, index) -> "Dataset":
        return Dataset(self.x[index], self.u1[index], self.u2[index])

    def _sorted(self):
        order = np.argsort(self.x, kind="stable")
        return order, self.x[order], self.u1[order], self.u2[order]


@dataclass
class CalibrationModel:
    """Polynomial calibration function ``eta(x) = sum_j a_j x**j``."""

    degree: int
    coefficients: np.ndarray
    spec: object
    converged: bool = True
    iterations: int = 0
    loglik: float = float("nan")

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (self.degree + 1,):
            raise ValueError("need degree + 1 coefficients")
        self.spec = as_spec(self.spec)

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float),
                                                self.coefficients)

    def theta(self, x):
        return self.spec.inverse_link(self(x))

    def local_coefficients(self, x0, q=None) -> np.ndarray:
        """Taylor coefficients of eta around ``x0`` (length ``q``)."""
        q = self.degree + 1 if q is None else q
        out = np.zeros(q)
        for k in range(min(q, self.degree + 1)):
            out[k] = sum(comb(j, k) * a * x0 ** (j - k)
                         for j, a in enumerate(self.coefficients) if j >= k)
        return out


@dataclass
class LocalFit:
    x0: float
    h: float
    degree: int
    beta: np.ndarray
    converged: bool
    n_effective: int
    iterations: int = 0
    grad_norm: float = float("nan")

    @property
    def eta_hat(self) -> float:
        return float(self.beta[0])


@dataclass
class BandwidthSelection:
    grid: np.ndarray
    cv_scores: np.ndarray
    chosen: float
    failures: dict = field(default_factory=dict)

    @property
    def chosen_index(self) -> int:
        return int(np.flatnonzero(self.grid == self.chosen)[0])


def _check_degree(p):
    if int(p) != p or p < 0 or p > 3:
        raise ValueError(f"polynomial degree must be in 0..3; got {p}")
    return int(p)


def fit_parametric(data: Dataset, spec, degree: int = 0) -> CalibrationModel:
    """Maximum-likelihood fit of a degree-``p`` polynomial calibration.

    The polynomial is fitted internally in the standardized covariate
    ``(x - center) / half_range`` and mapped back to raw coefficients.
    """
    spec = as_spec(spec)
    p = _check_degree(degree)
    center = 0.5 * (data.x.max() + data.x.min())
    scale = 0.5 * data.covariate_range
    s = (data.x - center) / scale
    z = np.vander(s, p + 1, increasing=True)
    w = np.ones(data.n)
    gamma, conv, it, _, obj = _newton.maximize(
        spec.code, z, w, data.u1, data.u2, np.zeros(p + 1))
    # eta(x) = sum_k gamma_k ((x - center)/scale)**k, expanded in powers of x
    coefs = np.zeros(p + 1)
    for k, g in enumerate(gamma):
        for j in range(k + 1):
            coefs[j] += g * comb(k, j) * (-center) ** (k - j) / scale ** k
    return CalibrationModel(p, coefs, spec, bool(conv), int(it), float(obj))


def _local_batch(data, spec, kernel, targets, h, p, init, exclude=None):
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    order, xs, a, b = data._sorted()
    targets = np.ascontiguousarray(targets, dtype=float).ravel()
    if exclude is None:
        exclude = np.full(targets.size, -1, dtype=np.int64)
    return _newton.fit_local_batch(
        spec.code, kernel.code, xs, a, b, targets, float(h), p,
        np.ascontiguousarray(init, dtype=float), exclude,
        max(p + 1, MIN_LOCAL_POINTS))


def _initial_local(model: CalibrationModel, targets, q):
    return np.array([model.local_coefficients(x0, q) for x0 in targets])


def local_polynomial_fit(data: Dataset, spec, x0: float, h: float,
                         degree: int = 1, kernel="epanechnikov",
                         init=None) -> LocalFit:
    """Maximize the kernel-weighted local likelihood at ``x0``.

    ``init`` gives starting local coefficients; by default the global
    parametric fit of the same degree, expanded around ``x0``, is used.

    Raises
    ------
    InsufficientLocalData
        If fewer than ``max(degree + 1, 4)`` points get positive weight.
    """
    spec = as_spec(spec)
    kernel = as_kernel(kernel)
    p = _check_degree(degree)
    if init is None:
        init = fit_parametric(data, spec, p).local_coefficients(x0)
    init = np.asarray(init, dtype=float).reshape(1, p + 1)
    beta, status, neff, iters, gnorm = _local_batch(
        data, spec, kernel, [x0], h, p, init)
    if status[0] == _newton.INSUFFICIENT:
        raise InsufficientLocalData(
            f"only {neff[0]} points with positive weight at x0={x0:g}, "
            f"h={h:g}; widen the bandwidth")
    return LocalFit(float(x0), float(h), p, beta[0], status[0] == _newton.OK,
                    int(neff[0]), int(iters[0]), float(gnorm[0]))


def estimate_curve(data: Dataset, spec, grid, h: float, degree: int = 1,
                   kernel="epanechnikov", start: CalibrationModel | None = None):
    """Local polynomial estimates at every point of ``grid``.

    All points are first fitted from the global parametric start (``start``,
    or a fresh fit of the same degree).  Points that fail to converge are
    refitted in sorted order, warm-started from the nearest converged
    neighbour.

    Raises
    ------
    InsufficientLocalData
        If any grid point has too few weighted observations.
    """
    spec = as_spec(spec)
    kernel = as_kernel(kernel)
    p = _check_degree(degree)
    grid = np.asarray(grid, dtype=float).ravel()
    if start is None:
        start = fit_parametric(data, spec, p)
    init = _initial_local(start, grid, p + 1)
    beta, status, neff, iters, gnorm = _local_batch(
        data, spec, kernel, grid, h, p, init)
    short = np.flatnonzero(status == _newton.INSUFFICIENT)
    if short.size:
        i = short[0]
        raise InsufficientLocalData(
            f"only {neff[i]} points with positive weight at x={grid[i]:g}, "
            f"h={h:g}; widen the bandwidth")
    if np.any(status != _newton.OK):
        order = np.argsort(grid, kind="stable")
        ok = status == _newton.OK
        for pos, i in enumerate(order):
            if ok[i]:
                continue
            nb = [j for j in order[:pos][::-1] if ok[j]][:1] or \
                 [j for j in order[pos + 1:] if ok[j]][:1]
            if not nb:
                continue
            j = nb[0]
            # re-expand the neighbour's local polynomial around grid[i]
            shifted = CalibrationModel(p, _shift_poly(beta[j], -grid[j]), spec)
            b2, s2, _, it2, g2 = _local_batch(
                data, spec, kernel, grid[i:i + 1], h, p,
                shifted.local_coefficients(grid[i])[None, :])
            if s2[0] == _newton.OK or g2[0] < gnorm[i]:
                beta[i], status[i], iters[i], gnorm[i] = b2[0], s2[0], it2[0], g2[0]
                ok[i] = s2[0] == _newton.OK
    return [LocalFit(float(grid[i]), float(h), p, beta[i],
                     bool(status[i] == _newton.OK), int(neff[i]),
                     int(iters[i]), float(gnorm[i]))
            for i in range(grid.size)]


def _shift_poly(local, offset):
    # coefficients of sum_k c_k (x + offset)**k in powers of x
    q = len(local)
    out = np.zeros(q)
    for k, c in enumerate(local):
        for j in range(k + 1):
            out[j] += c * comb(k, j) * offset ** (k - j)
    return out


def loo_scores(data: Dataset, spec, grid, degree: int = 0,
               kernel="epanechnikov", start: CalibrationModel | None = None):
    """Leave-one-out cross-validated log-likelihood for each bandwidth.

    Returns ``(scores, failures)``; a bandwidth where any leave-one-out fit
    lacks data or fails to converge scores ``-inf`` and ``failures`` maps
    it to the number of failed points.
    """
    spec = as_spec(spec)
    kernel = as_kernel(kernel)
    p = _check_degree(degree)
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("bandwidth grid is empty")
    if start is None:
        start = fit_parametric(data, spec, p)
    _, xs, a, b = data._sorted()
    init = _initial_local(start, xs, p + 1)
    exclude = np.arange(data.n, dtype=np.int64)
    scores = np.empty(grid.size)
    failures = {}
    for k, h in enumerate(grid):
        beta, status, *_ = _newton.fit_local_batch(
            spec.code, kernel.code, xs, a, b, xs, float(h), p, init, exclude,
            max(p + 1, MIN_LOCAL_POINTS))
        bad = int(np.count_nonzero(status != _newton.OK))
        if bad:
            scores[k] = -np.inf
            failures[float(h)] = bad
            continue
        scores[k] = _newton.sum_ell(spec.code, np.ascontiguousarray(beta[:, 0]), a, b)
        if not math.isfinite(scores[k]):
            scores[k] = -np.inf
            failures[float(h)] = data.n
    return scores, failures


def loo_cv_bandwidth(data: Dataset, spec, grid, degree: int = 0,
                     kernel="epanechnikov",
                     start: CalibrationModel | None = None) -> BandwidthSelection:
    """Pick the bandwidth maximizing the leave-one-out likelihood.

    Ties go to the first (in grid order) maximizer.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    scores, failures = loo_scores(data, spec, grid, degree, kernel, start)
    if not np.any(np.isfinite(scores)):
        raise ConvergenceError("leave-one-out fits failed for every bandwidth")
    best = int(np.argmax(scores))
    return BandwidthSelection(grid, scores, float(grid[best]), failures)


def pseudo_observations(y1, y2):
    """Rank transform both margins to ``rank / (n + 1)``, averaging ties."""
    y1 = np.asarray(y1, dtype=float).ravel()
    y2 = np.asarray(y2, dtype=float).ravel()
    if y1.shape != y2.shape:
        raise ValueError("y1 and y2 must have equal lengths")
    n = y1.size
    return rankdata(y1) / (n + 1), rankdata(y2) / (n + 1)
