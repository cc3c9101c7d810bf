"""Kernels, equivalent kernels and the GLRT normalizing constants.

For a kernel ``K`` (or the equivalent kernel of an order-``p`` local
polynomial fit) the test uses

    c_K = K(0) - 1/2 * int K(t)**2 dt
    nu_integral = int (K(t) - 1/2 * (K*K)(t))**2 dt

so that with ``mu_n = c_K * range / h`` and
``nu_n = 2 * nu_integral * range / h`` the scaling constant is
``r_K = 2 * mu_n / nu_n = c_K / nu_integral`` and the chi-square degrees
of freedom are ``r_K * mu_n``.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

QUAD_TOL = 1e-10


class KernelId(str, enum.Enum):
    EPANECHNIKOV = "epanechnikov"
    UNIFORM = "uniform"


_KERNEL_CODE = {KernelId.EPANECHNIKOV: 0, KernelId.UNIFORM: 1}


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric kernel density supported on ``[-1, 1]``."""

    id: KernelId = KernelId.EPANECHNIKOV
    support_halfwidth: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "id", KernelId(self.id))
        if self.support_halfwidth != 1.0:
            raise ValueError("only kernels on [-1, 1] are supported")

    @property
    def code(self) -> int:
        return _KERNEL_CODE[self.id]

    def __call__(self, t):
        return kernel_eval(self, t)


EPANECHNIKOV = KernelSpec(KernelId.EPANECHNIKOV)
UNIFORM = KernelSpec(KernelId.UNIFORM)


def as_kernel(kernel) -> KernelSpec:
    if isinstance(kernel, KernelSpec):
        return kernel
    return KernelSpec(KernelId(str(kernel).lower()))


def kernel_eval(kernel, t):
    """Evaluate the kernel; zero outside ``[-1, 1]``."""
    kernel = as_kernel(kernel)
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) <= 1.0
    if kernel.id is KernelId.EPANECHNIKOV:
        out = np.where(inside, 0.75 * (1.0 - t * t), 0.0)
    else:
        out = np.where(inside, 0.5, 0.0)
    return float(out) if out.ndim == 0 else out


def _quad(f, a, b, tol=QUAD_TOL, points=None):
    val, _ = integrate.quad(f, a, b, epsabs=tol, epsrel=tol, limit=200,
                            points=points)
    return val


def _convolve(f, t):
    # (f * f)(t) for f supported on [-1, 1]
    t = float(t)
    if abs(t) >= 2.0:
        return 0.0
    lo, hi = max(-1.0, t - 1.0), min(1.0, t + 1.0)
    return _quad(lambda s: f(s) * f(t - s), lo, hi)


def kernel_self_convolution(kernel, t):
    """``(K*K)(t) = int K(s) K(t - s) ds``, supported on ``[-2, 2]``."""
    kernel = as_kernel(kernel)
    k = functools.partial(kernel_eval, kernel)
    if np.ndim(t) == 0:
        return _convolve(k, t)
    return np.array([_convolve(k, s) for s in np.ravel(t)]).reshape(np.shape(t))


@dataclass(frozen=True)
class EquivalentKernel:
    """Effective weight function of an order-``p`` local polynomial fit.

    ``K*(t) = e_1' S^{-1} (1, t, ..., t^p)' K(t)`` where ``S`` holds the
    kernel moments ``S[j, k] = int t^(j+k) K(t) dt``.
    """

    base: KernelSpec
    order: int
    weights: tuple  # first row of S^{-1}

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        poly = np.polynomial.polynomial.polyval(t, self.weights)
        out = poly * kernel_eval(self.base, t)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def evaluation(self) -> Callable:
        return self.__call__


def kernel_moment(kernel, j: int) -> float:
    kernel = as_kernel(kernel)
    if j % 2:
        return 0.0
    return 2.0 * _quad(lambda t: t ** j * kernel_eval(kernel, t), 0.0, 1.0)


@functools.lru_cache(maxsize=None)
def _equivalent_kernel(kernel: KernelSpec, p: int) -> EquivalentKernel:
    S = np.array([[kernel_moment(kernel, j + k) for k in range(p + 1)]
                  for j in range(p + 1)])
    cond = np.linalg.cond(S)
    assert cond < 1e12, f"singular moment matrix (cond={cond:g})"
    row = np.linalg.solve(S, np.eye(p + 1)[:, 0])
    return EquivalentKernel(kernel, p, tuple(float(r) for r in row))


def equivalent_kernel(kernel, p: int) -> EquivalentKernel:
    """Equivalent kernel for local polynomial order ``p`` in {0, 1, 2, 3}."""
    if p not in (0, 1, 2, 3):
        raise ValueError(f"local polynomial order must be 0..3; got {p}")
    return _equivalent_kernel(as_kernel(kernel), int(p))


@dataclass(frozen=True)
class KernelConstants:
    c_K: float
    nu_integral: float
    r_K: float


def _constants(f, tol=QUAD_TOL) -> KernelConstants:
    # Both integrands are piecewise smooth with kinks at 0 and +-1.
    sq = _quad(lambda t: f(t) ** 2, -1.0, 1.0, tol, points=[0.0])
    c_K = float(f(0.0)) - 0.5 * sq

    def gap(t):
        return (f(t) - 0.5 * _convolve(f, t)) ** 2

    nu = _quad(gap, -2.0, 2.0, tol, points=[-1.0, 0.0, 1.0])
    return KernelConstants(c_K=c_K, nu_integral=nu, r_K=c_K / nu)


@functools.lru_cache(maxsize=None)
def _constants_for(kernel: KernelSpec, p: int, tol: float) -> KernelConstants:
    return _constants(equivalent_kernel(kernel, p), tol)


def constants_for(kernel, p: int = 0, tol: float = QUAD_TOL) -> KernelConstants:
    """GLRT constants computed from the order-``p`` equivalent kernel."""
    equivalent_kernel(kernel, p)
    return _constants_for(as_kernel(kernel), int(p), float(tol))


def mu_n(constants: KernelConstants, covariate_range: float, h: float) -> float:
    return constants.c_K * covariate_range / h


def nu_n(constants: KernelConstants, covariate_range: float, h: float) -> float:
    return 2.0 * constants.nu_integral * covariate_range / h


def null_dof(constants: KernelConstants, covariate_range: float, h: float) -> float:
    """Chi-square degrees of freedom ``r_K * c_K * range / h``."""
    if not covariate_range > 0:
        raise ValueError("covariate range must be positive")
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    return constants.r_K * constants.c_K * covariate_range / h
