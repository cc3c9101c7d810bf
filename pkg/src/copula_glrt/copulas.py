"""Frank and Clayton copulas parametrized on a calibration scale.

The calibration value ``t`` and the copula parameter ``theta`` are tied by
a fixed link per family: Frank uses the identity (``theta = t``, any
nonzero real), Clayton the log link (``theta = exp(t)``, ``theta > 0``).

All array functions broadcast their arguments against each other.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _families


class CopulaDomainError(ValueError):
    """Raised for parameters or points outside a copula's domain."""


class Family(str, enum.Enum):
    FRANK = "frank"
    CLAYTON = "clayton"


class Link(str, enum.Enum):
    IDENTITY = "identity"
    LOG = "log"


_DEFAULT_LINK = {Family.FRANK: Link.IDENTITY, Family.CLAYTON: Link.LOG}
_FAMILY_CODE = {Family.FRANK: _families.FRANK, Family.CLAYTON: _families.CLAYTON}


@dataclass(frozen=True)
class CopulaSpec:
    """A copula family together with its link function.

    Parameters
    ----------
    family : Family or str
        ``"frank"`` or ``"clayton"``.
    link : Link or str, optional
        Defaults to the family's only supported link (identity for Frank,
        log for Clayton). Any other pairing raises ``ValueError``.
    """

    family: Family
    link: Link | None = None

    def __post_init__(self):
        family = Family(self.family)
        link = _DEFAULT_LINK[family] if self.link is None else Link(self.link)
        if link is not _DEFAULT_LINK[family]:
            raise ValueError(
                f"{family.value} copula requires the "
                f"{_DEFAULT_LINK[family].value} link; got {link.value}")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "link", link)

    @property
    def code(self) -> int:
        return _FAMILY_CODE[self.family]

    def link_fn(self, theta):
        """Map copula parameter to calibration scale."""
        theta = self.check_theta(theta)
        return theta if self.link is Link.IDENTITY else np.log(theta)

    def inverse_link(self, t):
        """Map calibration value to copula parameter."""
        t = np.asarray(t, dtype=float)
        return t if self.link is Link.IDENTITY else np.exp(t)

    def check_theta(self, theta):
        theta = np.asarray(theta, dtype=float)
        if not np.all(np.isfinite(theta)):
            raise CopulaDomainError("copula parameter must be finite")
        if self.family is Family.FRANK and np.any(theta == 0.0):
            raise CopulaDomainError("Frank parameter must be nonzero")
        if self.family is Family.CLAYTON and np.any(theta <= 0.0):
            raise CopulaDomainError("Clayton parameter must be positive")
        return theta


FRANK = CopulaSpec(Family.FRANK)
CLAYTON = CopulaSpec(Family.CLAYTON)


def as_spec(spec) -> CopulaSpec:
    """Accept a CopulaSpec or a family name."""
    if isinstance(spec, CopulaSpec):
        return spec
    return CopulaSpec(Family(str(spec).lower()))


class UniformPair(NamedTuple):
    """A point (or arrays of points) on the open unit square."""

    u1: np.ndarray
    u2: np.ndarray


def check_unit(*arrays, name="u"):
    """Validate that every value lies strictly inside (0, 1)."""
    out = []
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if not np.all((a > 0.0) & (a < 1.0)):
            raise CopulaDomainError(f"{name} values must lie strictly in (0, 1)")
        out.append(a)
    return out


def _flat(*arrays):
    shape = np.broadcast_shapes(*(np.shape(a) for a in arrays))
    flat = [np.ascontiguousarray(np.broadcast_to(a, shape), dtype=float).ravel()
            for a in arrays]
    return shape, flat


def _reshape(out, shape):
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def copula_cdf(spec, u1, u2, theta):
    """Copula CDF ``C(u1, u2; theta)``.

    Points may sit on the boundary of the unit square; the margins
    ``C(u, 1) = u`` and ``C(1, v) = v`` hold exactly.
    """
    spec = as_spec(spec)
    theta = spec.check_theta(theta)
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if np.any((u1 < 0) | (u1 > 1) | (u2 < 0) | (u2 > 1)):
        raise CopulaDomainError("u values must lie in [0, 1]")
    shape, (a, b, th) = _flat(u1, u2, theta)
    out = np.empty_like(a)
    inner = (a > 0) & (a < 1) & (b > 0) & (b < 1)
    out[~inner] = np.minimum(a, b)[~inner] * (np.maximum(a, b)[~inner] >= 1)
    out[inner] = _families.cdf_array(spec.code, th[inner], a[inner], b[inner])
    return _reshape(out, shape)


def log_density(spec, u1, u2, theta):
    """Log copula density ``log c(u1, u2; theta)``."""
    spec = as_spec(spec)
    theta = spec.check_theta(theta)
    return ell(spec, spec.link_fn(theta), u1, u2)


def density(spec, u1, u2, theta):
    return np.exp(log_density(spec, u1, u2, theta))


def _ell(spec, t, u1, u2, order):
    spec = as_spec(spec)
    spec.check_theta(spec.inverse_link(t))
    u1, u2 = check_unit(u1, u2)
    shape, (a, b, tt) = _flat(u1, u2, t)
    out = _families.ell_array(spec.code, tt, a, b, order)
    return _reshape(out[order], shape)


def ell(spec, t, u1, u2):
    """Log density as a function of the calibration value ``t``."""
    return _ell(spec, t, u1, u2, 0)


def ell1(spec, t, u1, u2):
    """First derivative of :func:`ell` with respect to ``t``."""
    return _ell(spec, t, u1, u2, 1)


def ell2(spec, t, u1, u2):
    """Second derivative of :func:`ell` with respect to ``t``."""
    return _ell(spec, t, u1, u2, 2)


def ell_derivatives(spec, t, u1, u2):
    """Return ``(ell, ell1, ell2)`` as a (3, ...) array in one pass."""
    spec = as_spec(spec)
    spec.check_theta(spec.inverse_link(t))
    u1, u2 = check_unit(u1, u2)
    shape, (a, b, tt) = _flat(u1, u2, t)
    return _families.ell_array(spec.code, tt, a, b, 2).reshape((3,) + shape)


def conditional_cdf(spec, u1, u2, theta):
    """``dC/du1``: the distribution of U2 given U1 = u1, evaluated at u2."""
    spec = as_spec(spec)
    theta = spec.check_theta(theta)
    u1, u2 = check_unit(u1, u2)
    shape, (a, b, th) = _flat(u1, u2, theta)
    return _reshape(_families.h_array(spec.code, th, a, b), shape)


def conditional_quantile(spec, u1, w, theta):
    """Inverse of :func:`conditional_cdf` in its second argument.

    Returns ``u2`` with ``conditional_cdf(spec, u1, u2, theta) == w``.
    """
    spec = as_spec(spec)
    theta = spec.check_theta(theta)
    u1, w = check_unit(u1, w)
    shape, (a, b, th) = _flat(u1, w, theta)
    out = _families.hinv_array(spec.code, th, a, b)
    return _reshape(out, shape)


_OPEN_LO = 2.0 ** -60
_OPEN_HI = 1.0 - 2.0 ** -53


def open_uniform(rng, size=None):
    """Uniform draws on the open interval (0, 1)."""
    u = rng.random(size)
    return np.where(u == 0.0, _OPEN_LO, u)


def sample_pair(spec, theta, rng, size=None) -> UniformPair:
    """Draw from the copula by conditional inversion.

    ``u1`` and an auxiliary ``w`` are uniform; ``u2`` is the conditional
    quantile of ``w`` given ``u1``. ``theta`` broadcasts against ``size``.
    Each draw consumes two uniforms from ``rng``, ``u1`` block first.
    """
    spec = as_spec(spec)
    theta = spec.check_theta(theta)
    if size is None:
        size = np.shape(theta)
    u1 = open_uniform(rng, size)
    w = open_uniform(rng, size)
    u2 = conditional_quantile(spec, u1, w, np.broadcast_to(theta, np.shape(u1)))
    u2 = np.clip(u2, _OPEN_LO, _OPEN_HI)
    if np.ndim(u1) == 0:
        return UniformPair(float(u1), float(u2))
    return UniformPair(u1, u2)


def frank_kendall_tau(theta: float) -> float:
    """Kendall's tau of the Frank copula via the Debye function."""
    from scipy.integrate import quad

    if theta == 0:
        return 0.0
    a = abs(theta)
    debye = quad(lambda s: s / np.expm1(s) if s > 0 else 1.0, 0.0, a)[0] / a
    tau = 1.0 - 4.0 / a * (1.0 - debye)
    return float(np.sign(theta) * tau)
