"""Scalar numba kernels for the Frank and Clayton families.

Everything here works on plain floats so it can be inlined into the
compiled optimizer loops.  Frank is evaluated in the copula parameter
``theta`` (identity link); Clayton is evaluated in the calibration value
``t = log(theta)``.  No argument checking is done at this level.
"""

import math

import numpy as np
from numba import njit

FRANK = 0
CLAYTON = 1

# Below this |theta| the Frank log-density and its derivatives come from a
# power series in theta; the closed form loses ~eps/theta**2 in the second
# derivative.
FRANK_SERIES_CUTOFF = 1e-2
# Below this |theta| the Frank CDF and conditionals use their Taylor
# expansions around independence.
FRANK_INDEPENDENCE_CUTOFF = 1e-6
# Above this theta the Frank terms are rescaled by exp(theta * min(u, v)).
FRANK_SCALE_CUTOFF = 30.0


@njit(cache=True)
def _frank_series(theta, u, v):
    a = 1.0 - 2.0 * u
    b = 1.0 - 2.0 * v
    a2 = a * a
    b2 = b * b
    ab = a * b
    c1 = 0.5 * ab
    c2 = a2 * b2 / 16.0 - a2 / 16.0 - b2 / 16.0 + 1.0 / 48.0
    c3 = (ab * a2 * b2 - ab * a2 - ab * b2 + ab) / 96.0
    c4 = (a2 * a2 * b2 * b2 / 512.0 - a2 * a2 * b2 / 384.0 + a2 * a2 / 1536.0
          - a2 * b2 * b2 / 384.0 + a2 * b2 / 384.0 + b2 * b2 / 1536.0
          - 7.0 / 23040.0)
    c5 = ab * (a2 * a2 * b2 * b2 / 2560.0 - a2 * a2 * b2 / 1536.0
               + a2 * a2 / 3840.0 - a2 * b2 * b2 / 1536.0
               + a2 * b2 / 1152.0 - a2 / 4608.0 + b2 * b2 / 3840.0
               - b2 / 4608.0 - 1.0 / 23040.0)
    t = theta
    ll = t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))))
    l1 = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)))
    l2 = 2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5))
    return ll, l1, l2


@njit(cache=True)
def _frank_positive(theta, u, v):
    # theta > 0.  D = exp(-theta u) + exp(-theta v) - exp(-theta (u+v)) - exp(-theta)
    # is split as A + B with A, B > 0 so no cancellation occurs.
    if theta > FRANK_SCALE_CUTOFF:
        m = min(u, v)
    else:
        m = 0.0
    eu = math.exp(-theta * (u - m))
    ev = math.exp(-theta * (v - m))
    emt = math.exp(-theta)
    if m == 0.0:
        es = eu * ev
        e1 = emt
    else:
        es = math.exp(-theta * (u + v - m))
        e1 = math.exp(-theta * (1.0 - m))
    A = -eu * math.expm1(-theta * v)
    B = -ev * math.expm1(-theta * (1.0 - v))
    D = A + B
    logD = math.log(D) - theta * m
    om = -math.expm1(-theta)  # 1 - exp(-theta)
    ll = math.log(theta) + math.log(om) - theta * (u + v) - 2.0 * logD
    d1 = -u * A - v * B + v * es + (1.0 - v) * e1
    d2 = u * u * A + v * v * B - v * (2.0 * u + v) * es - (1.0 - v * v) * e1
    r1 = d1 / D
    r2 = d2 / D
    l1 = 1.0 / theta + emt / om - (u + v) - 2.0 * r1
    l2 = -1.0 / (theta * theta) - emt / (om * om) - 2.0 * (r2 - r1 * r1)
    return ll, l1, l2


@njit(cache=True)
def frank_logpdf_derivs(theta, u, v):
    """(log c, d/dtheta, d2/dtheta2) of the Frank density."""
    if abs(theta) < FRANK_SERIES_CUTOFF:
        return _frank_series(theta, u, v)
    if theta > 0.0:
        return _frank_positive(theta, u, v)
    # c(u, v; -theta) = c(u, 1 - v; theta)
    ll, l1, l2 = _frank_positive(-theta, u, 1.0 - v)
    return ll, -l1, l2


@njit(cache=True)
def frank_logpdf(theta, u, v):
    return frank_logpdf_derivs(theta, u, v)[0]


@njit(cache=True)
def _frank_cdf_positive(theta, u, v):
    if theta <= 1.0:
        r = math.expm1(-theta * u) * math.expm1(-theta * v) / math.expm1(-theta)
        return -math.log1p(r) / theta
    m = min(u, v)
    A = -math.exp(-theta * (u - m)) * math.expm1(-theta * v)
    B = -math.exp(-theta * (v - m)) * math.expm1(-theta * (1.0 - v))
    return m - (math.log(A + B) - math.log(-math.expm1(-theta))) / theta


@njit(cache=True)
def frank_cdf(theta, u, v):
    if abs(theta) < FRANK_INDEPENDENCE_CUTOFF:
        uv = u * v * (1.0 - u) * (1.0 - v)
        return (u * v + theta * uv / 2.0
                + theta * theta * uv * (1.0 - 2.0 * u) * (1.0 - 2.0 * v) / 12.0)
    if theta > 0.0:
        c = _frank_cdf_positive(theta, u, v)
    else:
        # C(u, v; -theta) = u - C(u, 1 - v; theta)
        c = u - _frank_cdf_positive(-theta, u, 1.0 - v)
    return min(max(c, 0.0), min(u, v))


@njit(cache=True)
def _frank_h_positive(theta, u, v):
    if theta > FRANK_SCALE_CUTOFF:
        m = min(u, v)
    else:
        m = 0.0
    A = -math.exp(-theta * (u - m)) * math.expm1(-theta * v)
    B = -math.exp(-theta * (v - m)) * math.expm1(-theta * (1.0 - v))
    return A / (A + B)


@njit(cache=True)
def frank_h(theta, u, v):
    """dC/du, the conditional CDF of V given U = u."""
    if abs(theta) < FRANK_INDEPENDENCE_CUTOFF:
        return (v + theta * v * (v - 1.0) * (2.0 * u - 1.0) / 2.0
                + theta * theta * v * (v - 1.0) * (2.0 * v - 1.0)
                * (6.0 * u * u - 6.0 * u + 1.0) / 12.0)
    if theta > 0.0:
        return _frank_h_positive(theta, u, v)
    return 1.0 - _frank_h_positive(-theta, u, 1.0 - v)


@njit(cache=True)
def _frank_hinv_positive(theta, u, w):
    if theta < 1.0:
        q = w * math.expm1(-theta) / (w + (1.0 - w) * math.exp(-theta * u))
        return -math.log1p(q) / theta
    lw = math.log(w)
    l1w = math.log1p(-w)
    num = np.logaddexp(l1w - theta * u, lw - theta)
    den = np.logaddexp(lw, l1w - theta * u)
    return -(num - den) / theta


@njit(cache=True)
def frank_hinv(theta, u, w):
    """Solve frank_h(theta, u, v) = w for v."""
    if abs(theta) < FRANK_INDEPENDENCE_CUTOFF:
        g1 = w * (w - 1.0) * (2.0 * u - 1.0) / 2.0
        dg1 = (2.0 * w - 1.0) * (2.0 * u - 1.0) / 2.0
        g2 = w * (w - 1.0) * (2.0 * w - 1.0) * (6.0 * u * u - 6.0 * u + 1.0) / 12.0
        return w - theta * g1 + theta * theta * (g1 * dg1 - g2)
    if theta > 0.0:
        return _frank_hinv_positive(theta, u, w)
    return 1.0 - _frank_hinv_positive(-theta, u, 1.0 - w)


@njit(cache=True)
def _clayton_log_s(theta, u, v):
    # log(u**-theta + v**-theta - 1) and the scale M used for the ratios.
    a = -theta * math.log(u)
    b = -theta * math.log(v)
    M = max(a, b)
    if M < 30.0:
        return math.log1p(math.expm1(a) + math.expm1(b)), a, b, M
    return M + math.log(math.exp(a - M) + math.exp(b - M) - math.exp(-M)), a, b, M


@njit(cache=True)
def clayton_logpdf_derivs(t, u, v):
    """(log c, d/dt, d2/dt2) of the Clayton density with theta = exp(t)."""
    theta = math.exp(t)
    lu = -math.log(u)
    lv = -math.log(v)
    logs, a, b, M = _clayton_log_s(theta, u, v)
    ll = math.log1p(theta) + (1.0 + theta) * (lu + lv) - (2.0 + 1.0 / theta) * logs
    sm = math.exp(logs - M)
    ea = math.exp(a - M)
    eb = math.exp(b - M)
    r1 = (lu * ea + lv * eb) / sm
    r2 = (lu * lu * ea + lv * lv * eb) / sm
    l1 = (theta / (1.0 + theta) + theta * (lu + lv) + logs / theta
          - (2.0 * theta + 1.0) * r1)
    l2 = (theta / ((1.0 + theta) * (1.0 + theta)) + theta * (lu + lv)
          - logs / theta + (1.0 - 2.0 * theta) * r1
          - theta * (2.0 * theta + 1.0) * (r2 - r1 * r1))
    return ll, l1, l2


@njit(cache=True)
def clayton_cdf(theta, u, v):
    logs = _clayton_log_s(theta, u, v)[0]
    return math.exp(-logs / theta)


@njit(cache=True)
def clayton_h(theta, u, v):
    logs = _clayton_log_s(theta, u, v)[0]
    return math.exp((theta + 1.0) * (-math.log(u)) - (1.0 / theta + 1.0) * logs)


@njit(cache=True)
def clayton_hinv(theta, u, w):
    lw = -math.log(w)
    inner = math.log(math.expm1(theta / (1.0 + theta) * lw)) - theta * math.log(u)
    return math.exp(-np.logaddexp(0.0, inner) / theta)


@njit(cache=True)
def ell_derivs(family, t, u, v):
    """(l, l1, l2) in calibration space for either family."""
    if family == FRANK:
        return frank_logpdf_derivs(t, u, v)
    return clayton_logpdf_derivs(t, u, v)


@njit(cache=True)
def ell_value(family, t, u, v):
    if family == FRANK:
        return frank_logpdf_derivs(t, u, v)[0]
    return clayton_logpdf_derivs(t, u, v)[0]


@njit(cache=True)
def ell_array(family, t, u, v, order):
    n = u.shape[0]
    out = np.empty((order + 1, n))
    for i in range(n):
        ll, l1, l2 = ell_derivs(family, t[i], u[i], v[i])
        out[0, i] = ll
        if order >= 1:
            out[1, i] = l1
        if order >= 2:
            out[2, i] = l2
    return out


@njit(cache=True)
def cdf_array(family, theta, u, v):
    n = u.shape[0]
    out = np.empty(n)
    for i in range(n):
        if family == FRANK:
            out[i] = frank_cdf(theta[i], u[i], v[i])
        else:
            out[i] = clayton_cdf(theta[i], u[i], v[i])
    return out


@njit(cache=True)
def h_array(family, theta, u, v):
    n = u.shape[0]
    out = np.empty(n)
    for i in range(n):
        if family == FRANK:
            out[i] = frank_h(theta[i], u[i], v[i])
        else:
            out[i] = clayton_h(theta[i], u[i], v[i])
    return out


@njit(cache=True)
def hinv_array(family, theta, u, w):
    n = u.shape[0]
    out = np.empty(n)
    for i in range(n):
        if family == FRANK:
            out[i] = frank_hinv(theta[i], u[i], w[i])
        else:
            out[i] = clayton_hinv(theta[i], u[i], w[i])
    return out
