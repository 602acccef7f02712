"""Vectorized numpy kernels.

Expression order mirrors the scalar functions in ``model`` and
``bestresponse`` so both paths agree to rounding.
"""

import numpy as np

# Parameter vector layout, shared with the numba kernels.
S1, S2, F1, L1, T1, F2, L2, T2, BETA, D, CB, CA, CD = range(13)
N_PARAMS = 13


def _infection(a_j, a1, a2, d):
    return np.where(a_j == 0, 0.0, a_j / (d + (a1 + a2)))


def _candidate(b1, b2, r, p):
    d, ca, cd = p[D], p[CA], p[CD]
    pays1 = r <= p[L1] / b1
    pays2 = r <= p[L2] / b2
    m1 = np.where(pays1, p[S1], 0.0)
    m2 = np.where(pays2, p[S2], 0.0)
    mass = np.maximum(m1, m2)
    with np.errstate(invalid="ignore"):
        a = np.maximum(0.0, np.sqrt(mass * r * d / ca) - d)
    valid = (mass > 0) & (r > 0) & (a > 0)
    a = np.where(valid, a, 0.0)
    to_one = m1 >= m2
    a1 = np.where(to_one, a, 0.0)
    a2 = np.where(to_one, 0.0, a)
    v1 = _infection(a1, a1, a2, d)
    v2 = _infection(a2, a1, a2, d)
    revenue = (p[S1] * v1 * pays1 + p[S2] * v2 * pays2) * r
    payoff = revenue - ca * (a1 + a2) - cd
    return a1, a2, payoff, valid


def attacker_response(b1, b2, p):
    """Attacker best response at every (b1, b2) pair; returns a1, a2, r, payoff."""
    b1 = np.asarray(b1, dtype=np.float64)
    b2 = np.asarray(b2, dtype=np.float64)
    c1 = p[L1] / b1
    c2 = p[L2] / b2
    r_lo = np.minimum(c1, c2)
    r_hi = np.maximum(c1, c2)
    a1_lo, a2_lo, pay_lo, ok_lo = _candidate(b1, b2, r_lo, p)
    a1_hi, a2_hi, pay_hi, ok_hi = _candidate(b1, b2, r_hi, p)
    take_hi = ok_hi & (~ok_lo | (pay_hi > pay_lo))
    ok = ok_lo | ok_hi
    payoff = np.where(take_hi, pay_hi, pay_lo)
    engaged = ok & (payoff > 0)
    a1 = np.where(engaged, np.where(take_hi, a1_hi, a1_lo), 0.0)
    a2 = np.where(engaged, np.where(take_hi, a2_hi, a2_lo), 0.0)
    r = np.where(engaged, np.where(take_hi, r_hi, r_lo), 0.0)
    payoff = np.where(engaged, payoff, 0.0)
    return a1, a2, r, payoff


def _org_loss(b, v, r, f, l, t, p):
    pays = r <= l / b
    safe = p[CB] * b + p[BETA] * f / b
    pay = np.where(pays, 1.0, 0.0)
    hit = p[CB] * b + p[BETA] * ((f + (1.0 - pay) * l) / b + t + pay * r)
    return np.where(v == 0, safe, (1.0 - v) * safe + v * hit)


def org_losses(b1, b2, a1, a2, r, p):
    """Expected per-organization loss of each group under a given attack."""
    v1 = _infection(a1, a1, a2, p[D])
    v2 = _infection(a2, a1, a2, p[D])
    loss1 = _org_loss(b1, v1, r, p[F1], p[L1], p[T1], p)
    loss2 = _org_loss(b2, v2, r, p[F2], p[L2], p[T2], p)
    return loss1, loss2


def social_losses(b1, b2, p):
    """Per-group expected losses when the attacker best-responds to (b1, b2)."""
    b1 = np.asarray(b1, dtype=np.float64)
    b2 = np.asarray(b2, dtype=np.float64)
    a1, a2, r, payoff = attacker_response(b1, b2, p)
    loss1, loss2 = org_losses(b1, b2, a1, a2, r, p)
    return loss1, loss2, payoff


def tally_compromised(u, v1, v2, n1):
    """Per-sample count of compromised organizations in each group.

    ``u`` holds one uniform draw per (sample, organization); the first ``n1``
    columns belong to group 1.
    """
    c1 = np.count_nonzero(u[:, :n1] < v1, axis=1)
    c2 = np.count_nonzero(u[:, n1:] < v2, axis=1)
    return c1.astype(np.int64), c2.astype(np.int64)
