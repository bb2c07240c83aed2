"""Compiled inner loops shared by the analytic modules.

Everything here takes plain scalars/arrays and performs no validation; the
public wrappers in :mod:`perctree.core` and :mod:`perctree.recurrence` own
the contracts.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def pmf_sum(n, lo, hi, x):
    """Sum of Bin(n, x) masses for k in [lo, hi].

    Masses come from the multiplicative recurrence starting at the mode-free
    end: for x <= 1/2 we start at (1-x)^n, otherwise we mirror k -> n-k and
    start at x^n. Either start is >= 2^-64, so nothing underflows to zero
    before the summed range is reached.
    """
    if lo < 0:
        lo = 0
    if hi > n:
        hi = n
    if lo > hi:
        return 0.0
    if lo == 0 and hi == n:
        return 1.0
    if x <= 0.0:
        return 1.0 if lo == 0 else 0.0
    if x >= 1.0:
        return 1.0 if hi == n else 0.0
    if x > 0.5:
        lo, hi = n - hi, n - lo
        x = 1.0 - x  # exact for x in [1/2, 1]
    q = 1.0 - x
    r = x / q
    pmf = q**n
    total = 0.0
    for k in range(hi + 1):
        if k >= lo:
            total += pmf
        pmf *= (n - k) / (k + 1.0) * r
    if total > 1.0:
        total = 1.0
    return total


@njit(cache=True)
def tail(n, theta, x):
    return pmf_sum(n, theta, n, x)


@njit(cache=True)
def phi(n, theta, p, x):
    return p + (1.0 - p) * pmf_sum(n, theta, n, x)


@njit(cache=True)
def composite(offspring, start, theta, p, x):
    # psi_start = phi_{m_start} o phi_{m_start+1} o ... o phi_{m_start+l-1}
    ell = offspring.shape[0]
    for j in range(ell - 1, -1, -1):
        m = offspring[(start + j) % ell]
        x = p + (1.0 - p) * pmf_sum(m, theta, m, x)
    return x


@njit(cache=True)
def composite_gap(offspring, start, theta, p, xs):
    """psi(x) - x over an array of points."""
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = composite(offspring, start, theta, p, xs[i]) - xs[i]
    return out


@njit(cache=True)
def step(offspring, theta, p, state):
    ell = offspring.shape[0]
    new = np.empty(ell)
    for k in range(ell):
        m = offspring[k]
        v = p + (1.0 - p) * pmf_sum(m, theta, m, state[(k + 1) % ell])
        # the exact sequence is nondecreasing; absorb ulp wobble
        new[k] = v if v > state[k] else state[k]
    return new


@njit(cache=True)
def iterate(offspring, theta, p, eps, max_iter):
    ell = offspring.shape[0]
    cur = np.full(ell, p)
    residual = np.inf
    it = 0
    while it < max_iter:
        nxt = step(offspring, theta, p, cur)
        residual = 0.0
        for k in range(ell):
            d = nxt[k] - cur[k]
            if d > residual:
                residual = d
        cur = nxt
        it += 1
        if residual < eps:
            break
    return cur, it, residual


@njit(cache=True)
def trajectory(offspring, theta, p, steps):
    ell = offspring.shape[0]
    out = np.empty((steps + 1, ell))
    out[0, :] = p
    for t in range(steps):
        out[t + 1] = step(offspring, theta, p, out[t])
    return out
