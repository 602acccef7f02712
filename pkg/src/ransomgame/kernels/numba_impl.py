"""Numba-compiled kernels; same contracts as ``numpy_impl``."""

import math
import warnings

import numpy as np
from numba import njit, prange

# Numba falls back to another threading layer when TBB is too old; the notice is harmless.
warnings.filterwarnings("ignore", message="The TBB threading layer requires TBB version")

from .numpy_impl import BETA, CA, CB, CD, D, F1, F2, L1, L2, S1, S2, T1, T2


@njit(cache=True)
def _infection(a_j, a1, a2, d):
    if a_j == 0:
        return 0.0
    return a_j / (d + (a1 + a2))


@njit(cache=True)
def _candidate(b1, b2, r, p):
    d = p[D]
    pays1 = 1.0 if r <= p[L1] / b1 else 0.0
    pays2 = 1.0 if r <= p[L2] / b2 else 0.0
    m1 = p[S1] * pays1
    m2 = p[S2] * pays2
    mass = max(m1, m2)
    if mass == 0 or r <= 0:
        return 0.0, 0.0, 0.0, False
    a = max(0.0, math.sqrt(mass * r * d / p[CA]) - d)
    if a <= 0:
        return 0.0, 0.0, 0.0, False
    if m1 >= m2:
        a1, a2 = a, 0.0
    else:
        a1, a2 = 0.0, a
    v1 = _infection(a1, a1, a2, d)
    v2 = _infection(a2, a1, a2, d)
    revenue = (p[S1] * v1 * pays1 + p[S2] * v2 * pays2) * r
    return a1, a2, revenue - p[CA] * (a1 + a2) - p[CD], True


@njit(cache=True)
def _respond(b1, b2, p):
    c1 = p[L1] / b1
    c2 = p[L2] / b2
    r_lo = min(c1, c2)
    r_hi = max(c1, c2)
    a1, a2, pay, ok = _candidate(b1, b2, r_lo, p)
    r = r_lo
    h1, h2, hpay, hok = _candidate(b1, b2, r_hi, p)
    if hok and (not ok or hpay > pay):
        a1, a2, pay, ok, r = h1, h2, hpay, True, r_hi
    if not ok or pay <= 0:
        return 0.0, 0.0, 0.0, 0.0
    return a1, a2, r, pay


@njit(cache=True)
def _org_loss(b, v, r, f, l, t, p):
    safe = p[CB] * b + p[BETA] * f / b
    if v == 0:
        return safe
    pay = 1.0 if r <= l / b else 0.0
    hit = p[CB] * b + p[BETA] * ((f + (1.0 - pay) * l) / b + t + pay * r)
    return (1.0 - v) * safe + v * hit


@njit(cache=True)
def _attacker_response(b1, b2, p):
    n = b1.shape[0]
    a1 = np.empty(n)
    a2 = np.empty(n)
    r = np.empty(n)
    payoff = np.empty(n)
    for i in range(n):
        a1[i], a2[i], r[i], payoff[i] = _respond(b1[i], b2[i], p)
    return a1, a2, r, payoff


@njit(cache=True)
def _org_losses(b1, b2, a1, a2, r, p):
    n = b1.shape[0]
    loss1 = np.empty(n)
    loss2 = np.empty(n)
    for i in range(n):
        v1 = _infection(a1[i], a1[i], a2[i], p[D])
        v2 = _infection(a2[i], a1[i], a2[i], p[D])
        loss1[i] = _org_loss(b1[i], v1, r[i], p[F1], p[L1], p[T1], p)
        loss2[i] = _org_loss(b2[i], v2, r[i], p[F2], p[L2], p[T2], p)
    return loss1, loss2


@njit(cache=True, parallel=True)
def _social_losses(b1, b2, p):
    n = b1.shape[0]
    loss1 = np.empty(n)
    loss2 = np.empty(n)
    payoff = np.empty(n)
    for i in prange(n):
        a1, a2, r, pay = _respond(b1[i], b2[i], p)
        v1 = _infection(a1, a1, a2, p[D])
        v2 = _infection(a2, a1, a2, p[D])
        loss1[i] = _org_loss(b1[i], v1, r, p[F1], p[L1], p[T1], p)
        loss2[i] = _org_loss(b2[i], v2, r, p[F2], p[L2], p[T2], p)
        payoff[i] = pay
    return loss1, loss2, payoff


@njit(cache=True, parallel=True)
def _tally(u, v1, v2, n1):
    n, cols = u.shape
    c1 = np.zeros(n, dtype=np.int64)
    c2 = np.zeros(n, dtype=np.int64)
    for i in prange(n):
        k1 = 0
        k2 = 0
        for j in range(n1):
            if u[i, j] < v1:
                k1 += 1
        for j in range(n1, cols):
            if u[i, j] < v2:
                k2 += 1
        c1[i] = k1
        c2[i] = k2
    return c1, c2


def _flat(x):
    x = np.asarray(x, dtype=np.float64)
    return np.ascontiguousarray(x.reshape(-1)), x.shape


def attacker_response(b1, b2, p):
    (f1, shape), (f2, _) = _flat(b1), _flat(b2)
    return tuple(o.reshape(shape) for o in _attacker_response(f1, f2, p))


def org_losses(b1, b2, a1, a2, r, p):
    (f1, shape), (f2, _) = _flat(b1), _flat(b2)
    out = _org_losses(f1, f2, _flat(a1)[0], _flat(a2)[0], _flat(r)[0], p)
    return tuple(o.reshape(shape) for o in out)


def social_losses(b1, b2, p):
    (f1, shape), (f2, _) = _flat(b1), _flat(b2)
    return tuple(o.reshape(shape) for o in _social_losses(f1, f2, p))


def tally_compromised(u, v1, v2, n1):
    return _tally(np.ascontiguousarray(u), float(v1), float(v2), int(n1))
