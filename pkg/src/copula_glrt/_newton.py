"""Compiled damped-Newton maximizer for weighted copula log-likelihoods.

The objective is ``sum_j w_j * l(z_j . beta, u1_j, u2_j)`` for a design
matrix ``z`` with at most four columns.  Newton steps are taken when the
Hessian is negative definite, otherwise a normalized gradient step; both
are damped by step halving with an Armijo acceptance rule.
"""

import math

import numpy as np
from numba import njit

from ._families import ell_derivs, ell_value

OK = 0
INSUFFICIENT = 1
NOT_CONVERGED = 2

MAXIT = 50
MAXHALF = 30
XTOL = 1e-8
GTOL = 1e-8
ARMIJO = 1e-4


@njit(cache=True)
def _objective(family, z, w, u1, u2, beta):
    m, q = z.shape
    obj = 0.0
    for j in range(m):
        eta = 0.0
        for k in range(q):
            eta += z[j, k] * beta[k]
        obj += w[j] * ell_value(family, eta, u1[j], u2[j])
    return obj


@njit(cache=True)
def _objective_derivs(family, z, w, u1, u2, beta, g, H):
    m, q = z.shape
    g[:] = 0.0
    H[:, :] = 0.0
    obj = 0.0
    for j in range(m):
        eta = 0.0
        for k in range(q):
            eta += z[j, k] * beta[k]
        ll, l1, l2 = ell_derivs(family, eta, u1[j], u2[j])
        obj += w[j] * ll
        a = w[j] * l1
        b = w[j] * l2
        for k in range(q):
            g[k] += a * z[j, k]
            for r in range(k + 1):
                H[k, r] += b * z[j, k] * z[j, r]
    for k in range(q):
        for r in range(k):
            H[r, k] = H[k, r]
    return obj


@njit(cache=True)
def _solve_neg_definite(H, g, d):
    # Cholesky of -H; returns False when -H is not positive definite.
    q = H.shape[0]
    L = np.zeros((q, q))
    for i in range(q):
        for j in range(i + 1):
            s = -H[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            if i == j:
                if not s > 0.0:
                    return False
                L[i, i] = math.sqrt(s)
            else:
                L[i, j] = s / L[j, j]
    y = np.empty(q)
    for i in range(q):
        s = g[i]
        for k in range(i):
            s -= L[i, k] * y[k]
        y[i] = s / L[i, i]
    for i in range(q - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, q):
            s -= L[k, i] * d[k]
        d[i] = s / L[i, i]
    return True


@njit(cache=True)
def maximize(family, z, w, u1, u2, beta0, maxit=MAXIT, xtol=XTOL, gtol=GTOL):
    """Return (beta, converged, iterations, grad max-norm, objective)."""
    q = z.shape[1]
    beta = beta0.copy()
    g = np.empty(q)
    H = np.empty((q, q))
    gn = np.empty(q)
    Hn = np.empty((q, q))
    d = np.empty(q)
    bn = np.empty(q)
    obj = _objective_derivs(family, z, w, u1, u2, beta, g, H)
    if not math.isfinite(obj):
        return beta, False, 0, np.inf, obj
    last_step = np.inf
    it = 0
    converged = False
    while True:
        gmax = np.max(np.abs(g))
        if gmax <= gtol and last_step < xtol:
            converged = True
            break
        if it >= maxit:
            break
        if not _solve_neg_definite(H, g, d):
            scale = max(1.0, gmax)
            for k in range(q):
                d[k] = g[k] / scale
        slope = 0.0
        for k in range(q):
            slope += g[k] * d[k]
        s = 1.0
        accepted = False
        step = 0.0
        on = obj
        for _ in range(MAXHALF + 1):
            step = 0.0
            for k in range(q):
                bn[k] = beta[k] + s * d[k]
                step = max(step, abs(s * d[k]))
            # the full step is usually accepted, so derivatives are
            # computed alongside the trial objective
            if s == 1.0:
                on = _objective_derivs(family, z, w, u1, u2, bn, gn, Hn)
            else:
                on = _objective(family, z, w, u1, u2, bn)
            if math.isfinite(on):
                if on >= obj + ARMIJO * s * slope:
                    accepted = True
                elif step < xtol and on >= obj - 1e-12 * (1.0 + abs(obj)):
                    accepted = True
            if accepted:
                break
            s *= 0.5
        if not accepted:
            break
        beta[:] = bn
        last_step = step
        it += 1
        if s == 1.0:
            obj = on
            g[:] = gn
            H[:, :] = Hn
        else:
            obj = _objective_derivs(family, z, w, u1, u2, beta, g, H)
    gmax = np.max(np.abs(g))
    return beta, converged, it, gmax, obj


@njit(cache=True)
def kernel_weight(kernel, d):
    if abs(d) > 1.0:
        return 0.0
    if kernel == 0:
        return 0.75 * (1.0 - d * d)
    return 0.5


@njit(cache=True)
def fit_local_batch(family, kernel, xs, u1s, u2s, targets, h, p, init,
                    exclude, min_points):
    """Local polynomial fits at every target.

    ``xs`` must be sorted ascending.  ``init`` holds starting coefficients
    in local coordinates ``sum_k beta_k (x - x0)**k``; ``exclude[i]`` is an
    index into ``xs`` left out of fit ``i`` (or -1).
    """
    m = targets.shape[0]
    q = p + 1
    beta_out = np.empty((m, q))
    status = np.zeros(m, dtype=np.int64)
    neff = np.zeros(m, dtype=np.int64)
    iters = np.zeros(m, dtype=np.int64)
    gnorm = np.zeros(m)
    n = xs.shape[0]
    for i in range(m):
        x0 = targets[i]
        lo = np.searchsorted(xs, x0 - h, side="left")
        hi = np.searchsorted(xs, x0 + h, side="right")
        lo = max(lo - 1, 0)
        hi = min(hi + 1, n)
        cnt = 0
        for j in range(lo, hi):
            if j != exclude[i] and kernel_weight(kernel, (xs[j] - x0) / h) > 0.0:
                cnt += 1
        neff[i] = cnt
        for k in range(q):
            beta_out[i, k] = init[i, k]
        if cnt < min_points:
            status[i] = INSUFFICIENT
            continue
        z = np.empty((cnt, q))
        w = np.empty(cnt)
        a = np.empty(cnt)
        b = np.empty(cnt)
        c = 0
        for j in range(lo, hi):
            if j == exclude[i]:
                continue
            dj = (xs[j] - x0) / h
            wj = kernel_weight(kernel, dj)
            if wj > 0.0:
                w[c] = wj / h
                a[c] = u1s[j]
                b[c] = u2s[j]
                zz = 1.0
                for k in range(q):
                    z[c, k] = zz
                    zz *= dj
                c += 1
        gamma0 = np.empty(q)
        hk = 1.0
        for k in range(q):
            gamma0[k] = init[i, k] * hk
            hk *= h
        gamma, conv, it, gmax, _ = maximize(family, z, w, a, b, gamma0)
        hk = 1.0
        for k in range(q):
            beta_out[i, k] = gamma[k] / hk
            hk *= h
        iters[i] = it
        gnorm[i] = gmax
        if not conv:
            status[i] = NOT_CONVERGED
    return beta_out, status, neff, iters, gnorm


@njit(cache=True)
def sum_ell(family, eta, u1, u2):
    s = 0.0
    for j in range(eta.shape[0]):
        s += ell_value(family, eta[j], u1[j], u2[j])
    return s
