"""Monte Carlo realization of stage II.

Each sample draws, for every organization, whether it is compromised
(probability equal to its group's infection probability); compromised
organizations pay iff the ransom is at most ``L/b``. Samples are generated in
fixed-size chunks, each chunk with its own counter-based Philox stream spawned
from the seed, so the result does not depend on how chunks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import kernels
from .model import (
    AttackerStrategy,
    DefenderProfile,
    GlobalParams,
    Groups,
    PayoffReport,
    infection_probability,
    org_payoff_compromised,
    org_payoff_not_compromised,
    pays_ransom,
)

CHUNK_SAMPLES = 4096


@dataclass(frozen=True)
class SimulationConfig:
    samples: int
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1 (got {self.samples})")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer (got {self.seed})")


@dataclass(frozen=True)
class SimulationResult:
    """Sample means and standard errors; per-organization values are NaN for empty groups."""

    mean_org_payoff: Tuple[float, float]
    std_error_org: Tuple[float, float]
    mean_attacker_payoff: float
    std_error_attacker: float
    samples: int

    def within(self, report: PayoffReport, k: float = 3.0) -> bool:
        """True if every analytic expectation lies within ``k`` standard errors."""
        pairs = [
            (self.mean_org_payoff[0], self.std_error_org[0], report.org_payoff_1),
            (self.mean_org_payoff[1], self.std_error_org[1], report.org_payoff_2),
            (self.mean_attacker_payoff, self.std_error_attacker, report.attacker_payoff),
        ]
        return all(
            abs(mean - expected) <= k * se
            for mean, se, expected in pairs
            if not math.isnan(mean)
        )


def _chunk_counts(seq: np.random.SeedSequence, n: int, n1: int, n2: int, v1: float, v2: float):
    rng = np.random.Generator(np.random.Philox(seq))
    u = rng.random((n, n1 + n2))
    return kernels.tally_compromised(u, v1, v2, n1)


def _mean_se(values: np.ndarray) -> Tuple[float, float]:
    n = values.shape[0]
    mean = float(values.mean())
    if n < 2:
        return mean, math.inf
    return mean, float(values.std(ddof=1) / math.sqrt(n))


def simulate_stage2(
    groups: Groups,
    gparams: GlobalParams,
    defenders: DefenderProfile,
    attacker: AttackerStrategy,
    config: SimulationConfig,
    workers: Optional[int] = None,
) -> SimulationResult:
    n1, n2 = groups[0].size, groups[1].size
    v1 = infection_probability(1, attacker, gparams)
    v2 = infection_probability(2, attacker, gparams)
    sizes = [CHUNK_SAMPLES] * (config.samples // CHUNK_SAMPLES)
    if config.samples % CHUNK_SAMPLES:
        sizes.append(config.samples % CHUNK_SAMPLES)
    seqs = np.random.SeedSequence(config.seed).spawn(len(sizes))

    def run(args):
        seq, n = args
        return _chunk_counts(seq, n, n1, n2, v1, v2)

    jobs = list(zip(seqs, sizes))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    counts = (
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
    )

    r = attacker.ransom
    means, errors = [], []
    paying = np.zeros(config.samples)
    for j, group in enumerate(groups, start=1):
        b = defenders.backup(j)
        pays = pays_ransom(group.ransom_loss, b, r)
        if pays:
            paying = paying + counts[j - 1]
        if group.size == 0:
            means.append(math.nan)
            errors.append(math.nan)
            continue
        safe = org_payoff_not_compromised(group, gparams, b)
        hit = org_payoff_compromised(group, gparams, b, pays, r)
        share_mean, share_se = _mean_se(counts[j - 1] / group.size)
        # Written as an offset from the safe payoff so an unattacked group is exact.
        means.append(safe + share_mean * (hit - safe))
        errors.append(share_se * abs(hit - safe) if config.samples > 1 else math.inf)

    if attacker.engaged:
        paid_mean, paid_se = _mean_se(paying)
        cost = gparams.attack_unit_cost * (attacker.effort_1 + attacker.effort_2) + gparams.dev_cost
        att_mean, att_se = paid_mean * r - cost, paid_se * r
    else:
        att_mean, att_se = 0.0, (0.0 if config.samples > 1 else math.inf)
    return SimulationResult(
        (means[0], means[1]), (errors[0], errors[1]), att_mean, att_se, config.samples
    )
