"""Hot loops: batched attacker responses, social-planner losses, Monte Carlo tallies.

The numba implementation is used when numba imports; set
``RANSOMGAME_DISABLE_NUMBA=1`` to force the pure-numpy path. Both paths
expose the same functions and are checked against each other in the tests.
"""

import importlib
import os

import numpy as np

from . import numpy_impl
from .numpy_impl import BETA, CA, CB, CD, D, F1, F2, L1, L2, N_PARAMS, S1, S2, T1, T2

_disabled = os.environ.get("RANSOMGAME_DISABLE_NUMBA", "").strip().lower() not in (
    "",
    "0",
    "false",
    "no",
)

numba_impl = None
if not _disabled:
    try:
        numba_impl = importlib.import_module(".numba_impl", __name__)
    except ImportError:  # numba missing or broken
        numba_impl = None

USE_NUMBA = numba_impl is not None
backend = numba_impl if USE_NUMBA else numpy_impl
BACKEND_NAME = "numba" if USE_NUMBA else "numpy"


def pack_params(groups, gparams) -> np.ndarray:
    """Flatten game parameters into the vector layout the kernels expect."""
    g1, g2 = groups
    p = np.empty(N_PARAMS, dtype=np.float64)
    p[S1], p[S2] = g1.size, g2.size
    p[F1], p[L1], p[T1] = g1.failure_loss, g1.ransom_loss, g1.interruption_loss
    p[F2], p[L2], p[T2] = g2.failure_loss, g2.ransom_loss, g2.interruption_loss
    p[BETA], p[D] = gparams.discount, gparams.base_difficulty
    p[CB], p[CA], p[CD] = (
        gparams.backup_unit_cost,
        gparams.attack_unit_cost,
        gparams.dev_cost,
    )
    return p


def attacker_response(b1, b2, params):
    return backend.attacker_response(b1, b2, params)


def org_losses(b1, b2, a1, a2, r, params):
    return backend.org_losses(b1, b2, a1, a2, r, params)


def social_losses(b1, b2, params):
    return backend.social_losses(b1, b2, params)


def tally_compromised(u, v1, v2, n1):
    return backend.tally_compromised(u, v1, v2, n1)
