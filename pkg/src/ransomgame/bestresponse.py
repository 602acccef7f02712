"""Best responses of organizations and of the attacker.

Organizations: pay iff the ransom does not exceed the expected permanent loss
``L/b``; back up at ``sqrt(beta*F/C_B)`` when not targeted, and choose between
that level and ``sqrt(beta*(F + V*L)/C_B)`` when targeted.

Attacker: the ransom is one of the two group thresholds ``L_j/b_j``, all
effort goes to the group with the larger paying mass, and the effort scale
solves a one-dimensional concave problem in closed form.

Deterministic tie-breaks: backup payoff tie -> HIGH, ransom tie -> smaller
ransom, allocation tie -> group 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .model import (
    ABSTAIN,
    AttackerStrategy,
    DefenderProfile,
    DomainError,
    GlobalParams,
    GroupParams,
    Groups,
    attacker_expected_payoff,
    infection_probability,
    org_expected_loss,
    pays_ransom,
)


class Branch(enum.Enum):
    LOW = "LOW"
    HIGH = "HIGH"


@dataclass(frozen=True)
class BackupBestResponse:
    value: float
    branch: Branch
    low_candidate: float
    high_candidate: float


@dataclass(frozen=True)
class AttackerBestResponse:
    strategy: AttackerStrategy
    payoff: float
    engaged: bool


def payment_best_response(group: GroupParams, backup: float, ransom: float) -> bool:
    """True iff paying is a best response for a compromised organization."""
    if not backup > 0:
        raise DomainError(f"backup effort must be > 0 (got {backup!r})")
    return pays_ransom(group.ransom_loss, backup, ransom)


def backup_no_attack(group: GroupParams, gparams: GlobalParams) -> float:
    return math.sqrt(gparams.discount * group.failure_loss / gparams.backup_unit_cost)


def backup_high(group: GroupParams, gparams: GlobalParams, infection: float) -> float:
    return math.sqrt(
        gparams.discount
        * (group.failure_loss + infection * group.ransom_loss)
        / gparams.backup_unit_cost
    )


def backup_under_attack(
    group_index: int,
    group: GroupParams,
    gparams: GlobalParams,
    attacker: AttackerStrategy,
) -> BackupBestResponse:
    """Best backup of a targeted organization.

    Candidates are the no-attack level (LOW, the organization pays when hit)
    and the level that also weighs ransomware data loss (HIGH, the
    organization refuses to pay). A zero ransom makes everyone pay, so LOW.
    """
    if attacker.effort(group_index) <= 0:
        raise ValueError(f"attacker does not target group {group_index}")
    v = infection_probability(group_index, attacker, gparams)
    low = backup_no_attack(group, gparams)
    high = backup_high(group, gparams, v)
    r = attacker.ransom
    if r == 0:
        return BackupBestResponse(low, Branch.LOW, low, high)
    threshold = group.ransom_loss / r
    if low > threshold:
        return BackupBestResponse(high, Branch.HIGH, low, high)
    if high < threshold:
        return BackupBestResponse(low, Branch.LOW, low, high)

    def loss(b: float) -> float:
        pays = pays_ransom(group.ransom_loss, b, r)
        return org_expected_loss(group_index, group, gparams, b, pays, attacker)

    if loss(high) <= loss(low):
        return BackupBestResponse(high, Branch.HIGH, low, high)
    return BackupBestResponse(low, Branch.LOW, low, high)


def backup_best_response(
    group_index: int,
    group: GroupParams,
    gparams: GlobalParams,
    attacker: AttackerStrategy,
) -> float:
    """Best backup against any attacker strategy, targeted or not."""
    if attacker.effort(group_index) > 0:
        return backup_under_attack(group_index, group, gparams, attacker).value
    return backup_no_attack(group, gparams)


def defender_best_response(
    groups: Groups, gparams: GlobalParams, attacker: AttackerStrategy
) -> DefenderProfile:
    return DefenderProfile(
        backup_best_response(1, groups[0], gparams, attacker),
        backup_best_response(2, groups[1], gparams, attacker),
    )


def ransom_candidates(groups: Groups, defenders: DefenderProfile) -> Tuple[float, float]:
    return (
        groups[0].ransom_loss / defenders.backup_1,
        groups[1].ransom_loss / defenders.backup_2,
    )


def paying_masses(
    groups: Groups, defenders: DefenderProfile, ransom: float
) -> Tuple[int, int]:
    return tuple(
        g.size if pays_ransom(g.ransom_loss, defenders.backup(j), ransom) else 0
        for j, g in enumerate(groups, start=1)
    )


def ransom_best_response(
    groups: Groups,
    gparams: GlobalParams,
    defenders: DefenderProfile,
    attacker_efforts: Tuple[float, float],
) -> float:
    a1, a2 = attacker_efforts
    if a1 <= 0 and a2 <= 0:
        raise ValueError("ransom best response needs a nonzero effort")
    best_r, best_revenue = None, -math.inf
    for r in sorted(ransom_candidates(groups, defenders)):
        attacker = AttackerStrategy(a1, a2, r)
        revenue = attacker_expected_payoff(groups, gparams, defenders, attacker)
        if revenue > best_revenue:
            best_r, best_revenue = r, revenue
    return best_r


def effort_allocation(
    groups: Groups,
    gparams: GlobalParams,
    defenders: DefenderProfile,
    ransom: float,
    total_effort: float,
) -> Tuple[float, float]:
    """Put the whole effort budget on the group with more paying members."""
    if not total_effort > 0:
        raise ValueError(f"total_effort must be > 0 (got {total_effort!r})")
    m1, m2 = paying_masses(groups, defenders, ransom)
    if m1 == 0 and m2 == 0:
        return (0.0, 0.0)
    split = (total_effort, 0.0) if m1 >= m2 else (0.0, total_effort)
    payoff = attacker_expected_payoff(
        groups, gparams, defenders, AttackerStrategy(*split, ransom)
    )
    return split if payoff > 0 else (0.0, 0.0)


def optimal_effort_scale(paying_mass: float, ransom: float, gparams: GlobalParams) -> float:
    """Maximizer of ``m*r*a/(D+a) - C_A*a`` over ``a >= 0``."""
    if not (paying_mass > 0 and ransom > 0):
        raise ValueError("optimal_effort_scale needs paying_mass > 0 and ransom > 0")
    d = gparams.base_difficulty
    return max(0.0, math.sqrt(paying_mass * ransom * d / gparams.attack_unit_cost) - d)


def best_strategy_for_ransom(
    groups: Groups,
    gparams: GlobalParams,
    defenders: DefenderProfile,
    ransom: float,
) -> Optional[Tuple[AttackerStrategy, float]]:
    """Best engaged strategy with a fixed ransom, or None if nothing engages.

    The returned payoff may be nonpositive; callers decide about abstention.
    """
    m1, m2 = paying_masses(groups, defenders, ransom)
    mass = max(m1, m2)
    if mass == 0 or ransom <= 0:
        return None
    a = optimal_effort_scale(mass, ransom, gparams)
    if a <= 0:
        return None
    strategy = AttackerStrategy(a, 0.0, ransom) if m1 >= m2 else AttackerStrategy(0.0, a, ransom)
    return strategy, attacker_expected_payoff(groups, gparams, defenders, strategy)


def attacker_best_response(
    groups: Groups, gparams: GlobalParams, defenders: DefenderProfile
) -> AttackerBestResponse:
    best: Optional[Tuple[AttackerStrategy, float]] = None
    for r in sorted(ransom_candidates(groups, defenders)):
        found = best_strategy_for_ransom(groups, gparams, defenders, r)
        if found is not None and (best is None or found[1] > best[1]):
            best = found
    if best is None or best[1] <= 0:
        return AttackerBestResponse(ABSTAIN, 0.0, False)
    return AttackerBestResponse(best[0], best[1], True)
