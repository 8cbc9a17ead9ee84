"""Coordinate descent kernels for regularized logistic regression.

Both solvers minimise ``C * sum_i log(1 + exp(-y_i (x_i.w + b))) + R(w)`` with
an unpenalized bias, using one-dimensional Newton steps with Armijo
backtracking per coordinate. ``R`` is ``w.w`` (L2) or ``lam * |w|_1`` (L1,
where the Newton step is taken on the soft-thresholded quadratic model).

The matrix arrives in CSC form (``indptr``, ``indices``, ``data``) so a
coordinate update only touches the rows where that feature is non-zero.
"""

import math

import numpy as np
from numba import njit

SIGMA = 0.01
BETA = 0.5
MAX_BACKTRACK = 60


@njit(cache=True)
def _logloss(m):
    # log(1 + exp(-m)) without overflow
    if m > 0.0:
        return math.log1p(math.exp(-m))
    return -m + math.log1p(math.exp(m))


@njit(cache=True)
def _tau(m):
    # 1 / (1 + exp(m)), the weight -dloss/dm
    if m > 0.0:
        e = math.exp(-m)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(m))


@njit(cache=True)
def _logloss_diff(m, delta):
    # logloss(m + delta) - logloss(m), accurate when delta is tiny
    if delta < -30.0:
        return _logloss(m + delta) - _logloss(m)
    return math.log1p(_tau(m) * math.expm1(-delta))


@njit(cache=True)
def margins(indptr, indices, data, y, w, b, fit_bias):
    n = y.shape[0]
    z = np.zeros(n)
    for j in range(w.shape[0]):
        wj = w[j]
        if wj != 0.0:
            for k in range(indptr[j], indptr[j + 1]):
                z[indices[k]] += data[k] * wj
    if fit_bias:
        for i in range(n):
            z[i] += b
    return z


@njit(cache=True)
def loss_gradient(indptr, indices, data, y, z, C):
    """Objective loss term and its gradient w.r.t. w and b (penalty excluded)."""
    n = y.shape[0]
    d = indptr.shape[0] - 1
    r = np.empty(n)
    loss = 0.0
    gb = 0.0
    for i in range(n):
        m = y[i] * z[i]
        loss += _logloss(m)
        r[i] = -C * y[i] * _tau(m)
        gb += r[i]
    g = np.zeros(d)
    for j in range(d):
        s = 0.0
        for k in range(indptr[j], indptr[j + 1]):
            s += data[k] * r[indices[k]]
        g[j] = s
    return C * loss, g, gb


@njit(cache=True)
def _coord_stats(lo, hi, rows, vals, y, z, C):
    g = 0.0
    h = 0.0
    for k in range(lo, hi):
        i = rows[k]
        t = _tau(y[i] * z[i])
        g -= y[i] * vals[k] * t
        h += vals[k] * vals[k] * t * (1.0 - t)
    return C * g, C * h


@njit(cache=True)
def _loss_change(lo, hi, rows, vals, y, z, C, step):
    s = 0.0
    for k in range(lo, hi):
        i = rows[k]
        m = y[i] * z[i]
        s += _logloss_diff(m, y[i] * vals[k] * step)
    return C * s


@njit(cache=True)
def _apply(lo, hi, rows, vals, z, step):
    for k in range(lo, hi):
        z[rows[k]] += vals[k] * step


@njit(cache=True)
def _bias_step(y, z, C, penalty_free=True):
    n = y.shape[0]
    g = 0.0
    h = 0.0
    for i in range(n):
        t = _tau(y[i] * z[i])
        g -= y[i] * t
        h += t * (1.0 - t)
    g *= C
    h = C * h + 1e-12
    d = -g / h
    beta = 1.0
    for _ in range(MAX_BACKTRACK):
        s = 0.0
        for i in range(n):
            m = y[i] * z[i]
            s += _logloss_diff(m, y[i] * beta * d)
        if C * s <= SIGMA * beta * d * g:
            break
        beta *= BETA
    step = beta * d
    for i in range(n):
        z[i] += step
    return step


@njit(cache=True)
def l2_pass(indptr, indices, data, y, z, w, b, C, fit_bias):
    """One sweep over all coordinates; returns the new bias."""
    d = w.shape[0]
    for j in range(d):
        lo, hi = indptr[j], indptr[j + 1]
        g, h = _coord_stats(lo, hi, indices, data, y, z, C)
        g += 2.0 * w[j]
        h += 2.0
        step = -g / h
        if step == 0.0:
            continue
        beta = 1.0
        for _ in range(MAX_BACKTRACK):
            s = beta * step
            delta = _loss_change(lo, hi, indices, data, y, z, C, s) + s * (2.0 * w[j] + s)
            if delta <= SIGMA * s * g:
                break
            beta *= BETA
        s = beta * step
        w[j] += s
        _apply(lo, hi, indices, data, z, s)
    if fit_bias:
        b += _bias_step(y, z, C)
    return b


@njit(cache=True)
def l1_pass(indptr, indices, data, y, z, w, b, C, lam, fit_bias):
    d = w.shape[0]
    for j in range(d):
        lo, hi = indptr[j], indptr[j + 1]
        if lo == hi:
            w[j] = 0.0
            continue
        g, h = _coord_stats(lo, hi, indices, data, y, z, C)
        h += 1e-12
        wj = w[j]
        if g + lam <= h * wj:
            step = -(g + lam) / h
        elif g - lam >= h * wj:
            step = -(g - lam) / h
        else:
            step = -wj
        if step == 0.0:
            continue
        model_dec = g * step + lam * (abs(wj + step) - abs(wj))
        beta = 1.0
        for _ in range(MAX_BACKTRACK):
            s = beta * step
            delta = _loss_change(lo, hi, indices, data, y, z, C, s) + lam * (abs(wj + s) - abs(wj))
            if delta <= SIGMA * beta * model_dec:
                break
            beta *= BETA
        s = beta * step
        w[j] = wj + s
        _apply(lo, hi, indices, data, z, s)
    if fit_bias:
        b += _bias_step(y, z, C)
    return b


def l2_gradient(csc, y, w, b, C, fit_bias):
    z = margins(csc.indptr, csc.indices, csc.data, y, w, b, fit_bias)
    loss, g, gb = loss_gradient(csc.indptr, csc.indices, csc.data, y, z, C)
    return loss + float(w @ w), g + 2.0 * w, (gb if fit_bias else 0.0)


def l1_kkt(csc, y, w, b, C, lam, fit_bias):
    """Objective value and the largest KKT violation."""
    z = margins(csc.indptr, csc.indices, csc.data, y, w, b, fit_bias)
    loss, g, gb = loss_gradient(csc.indptr, csc.indices, csc.data, y, z, C)
    viol = np.where(w > 0, np.abs(g + lam), np.where(w < 0, np.abs(g - lam), np.maximum(np.abs(g) - lam, 0.0)))
    worst = float(viol.max()) if viol.size else 0.0
    if fit_bias:
        worst = max(worst, abs(gb))
    return loss + lam * float(np.abs(w).sum()), worst
