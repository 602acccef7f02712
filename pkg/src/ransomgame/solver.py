"""Equilibrium search, best-response dynamics and the social planner.

``find_equilibrium`` tries, in order: the deterrence profile (no-attack
backups, attacker abstains); candidate engaged profiles obtained by damped
fixed-point iteration for every branch/ransom structure; and finally plain
best-response dynamics, whose two-cycles are reported as the average of the
two profiles. NOT_FOUND is a legitimate result.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .bestresponse import (
    Branch,
    attacker_best_response,
    backup_best_response,
    backup_high,
    backup_no_attack,
    best_strategy_for_ransom,
    defender_best_response,
)
from .model import (
    ABSTAIN,
    AttackerStrategy,
    DefenderProfile,
    GlobalParams,
    Groups,
    PayoffReport,
    attacker_expected_payoff,
    infection_probability,
    org_expected_loss,
    org_expected_payoff,
    payoff_report,
    pays_ransom,
)

DEFAULT_TOLERANCE = 1e-9
CYCLE_TOLERANCE = 1e-6
MAX_ITERATIONS = 1000
DAMPING = 0.5
SO_GRID_POINTS = 200
SO_BOUNDS = (0.01, 100.0)
SO_RESOLUTION = 1e-5


class OutcomeKind(enum.Enum):
    DETERRED_EQUILIBRIUM = "DETERRED_EQUILIBRIUM"
    EXACT_EQUILIBRIUM = "EXACT_EQUILIBRIUM"
    AVERAGED_TWO_CYCLE = "AVERAGED_TWO_CYCLE"
    NOT_FOUND = "NOT_FOUND"


@dataclass(frozen=True)
class Profile:
    """A state of play: backups and the attacker's strategy facing them."""

    defenders: DefenderProfile
    attacker: AttackerStrategy


@dataclass(frozen=True)
class SolveOutcome:
    kind: OutcomeKind
    defenders: DefenderProfile
    attacker: AttackerStrategy
    report: PayoffReport
    iterations: int
    cycle: Optional[Tuple[Profile, Profile]] = None

    @property
    def found(self) -> bool:
        return self.kind is not OutcomeKind.NOT_FOUND


@dataclass(frozen=True)
class SocialOptimum:
    defenders: DefenderProfile
    attacker: AttackerStrategy
    aggregate_org_payoff: float
    report: PayoffReport


def _within(best: float, value: float, tolerance: float) -> bool:
    return best - value <= tolerance * max(1.0, abs(best))


def verify_profile(
    groups: Groups,
    gparams: GlobalParams,
    defenders: DefenderProfile,
    attacker: AttackerStrategy,
    tolerance: float = DEFAULT_TOLERANCE,
    payments: Optional[Tuple[bool, bool]] = None,
) -> bool:
    """Check that no player gains more than ``tolerance`` (relative) by deviating.

    Empty groups have no players and are skipped. ``payments``, when given,
    must match the stage-II payment rule.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be > 0")
    for j, group in enumerate(groups, start=1):
        if group.size == 0:
            continue
        b = defenders.backup(j)
        pays = pays_ransom(group.ransom_loss, b, attacker.ransom)
        if payments is not None and payments[j - 1] != pays:
            return False
        current = org_expected_payoff(j, group, gparams, b, pays, attacker)
        b_star = backup_best_response(j, group, gparams, attacker)
        pays_star = pays_ransom(group.ransom_loss, b_star, attacker.ransom)
        best = org_expected_payoff(j, group, gparams, b_star, pays_star, attacker)
        if not _within(best, current, tolerance):
            return False
    current = attacker_expected_payoff(groups, gparams, defenders, attacker)
    best = attacker_best_response(groups, gparams, defenders).payoff
    return _within(best, current, tolerance)


def no_attack_backups(groups: Groups, gparams: GlobalParams) -> DefenderProfile:
    return DefenderProfile(
        backup_no_attack(groups[0], gparams), backup_no_attack(groups[1], gparams)
    )


def check_deterrence(groups: Groups, gparams: GlobalParams) -> Tuple[bool, DefenderProfile]:
    """Whether the attacker abstains when every group backs up at its no-attack level."""
    defenders = no_attack_backups(groups, gparams)
    return not attacker_best_response(groups, gparams, defenders).engaged, defenders


_THRESHOLD_FIELDS = {
    "C_B": "backup_unit_cost",
    "C_A": "attack_unit_cost",
    "C_D": "dev_cost",
    "D": "base_difficulty",
    "beta": "discount",
}


def deterrence_threshold(
    groups: Groups,
    gparams: GlobalParams,
    parameter: str,
    lo: float,
    hi: float,
    rel_tol: float = 1e-10,
) -> Optional[float]:
    """Bisect for the value of a global parameter where deterrence switches.

    Assumes a single switch inside ``[lo, hi]``; returns None when both ends
    agree.
    """
    field = _THRESHOLD_FIELDS[parameter]

    def deterred(x: float) -> bool:
        return check_deterrence(groups, dataclasses.replace(gparams, **{field: x}))[0]

    at_lo = deterred(lo)
    if at_lo == deterred(hi):
        return None
    while hi - lo > rel_tol * max(abs(lo), abs(hi), 1e-300):
        mid = 0.5 * (lo + hi)
        if deterred(mid) == at_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _restricted_attack(
    groups: Groups, gparams: GlobalParams, defenders: DefenderProfile, ransom_group: int
) -> AttackerStrategy:
    r = groups[ransom_group - 1].ransom_loss / defenders.backup(ransom_group)
    found = best_strategy_for_ransom(groups, gparams, defenders, r)
    if found is None or found[1] <= 0:
        return ABSTAIN
    return found[0]


def _solve_structure(
    groups: Groups,
    gparams: GlobalParams,
    branches: Tuple[Branch, Branch],
    ransom_group: int,
    max_iterations: int,
) -> DefenderProfile:
    b = no_attack_backups(groups, gparams)
    for _ in range(max_iterations):
        attack = _restricted_attack(groups, gparams, b, ransom_group)
        target = []
        for j, group in enumerate(groups, start=1):
            if attack.effort(j) > 0 and branches[j - 1] is Branch.HIGH:
                v = infection_probability(j, attack, gparams)
                target.append(backup_high(group, gparams, v))
            else:
                target.append(backup_no_attack(group, gparams))
        nxt = DefenderProfile(
            DAMPING * target[0] + (1 - DAMPING) * b.backup_1,
            DAMPING * target[1] + (1 - DAMPING) * b.backup_2,
        )
        if _close(nxt, b, 1e-13):
            return nxt
        b = nxt
    return b


def candidate_equilibria(
    groups: Groups,
    gparams: GlobalParams,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = MAX_ITERATIONS,
) -> List[Profile]:
    """Every verified profile among the engaged branch/ransom structures."""
    found: List[Profile] = []
    for branches in itertools.product((Branch.LOW, Branch.HIGH), repeat=2):
        for ransom_group in (1, 2):
            b = _solve_structure(groups, gparams, branches, ransom_group, max_iterations)
            attack = attacker_best_response(groups, gparams, b).strategy
            if verify_profile(groups, gparams, b, attack, tolerance):
                found.append(Profile(b, attack))
    return found


def _close(x: DefenderProfile, y: DefenderProfile, tolerance: float) -> bool:
    return all(
        abs(u - v) <= tolerance * max(abs(u), abs(v))
        for u, v in ((x.backup_1, y.backup_1), (x.backup_2, y.backup_2))
    )


def _mean_profile(p: Profile, q: Profile) -> Profile:
    d = DefenderProfile(
        0.5 * (p.defenders.backup_1 + q.defenders.backup_1),
        0.5 * (p.defenders.backup_2 + q.defenders.backup_2),
    )
    a = AttackerStrategy(
        0.5 * (p.attacker.effort_1 + q.attacker.effort_1),
        0.5 * (p.attacker.effort_2 + q.attacker.effort_2),
        0.5 * (p.attacker.ransom + q.attacker.ransom),
    )
    return Profile(d, a)


def _mean_report(p: PayoffReport, q: PayoffReport) -> PayoffReport:
    return PayoffReport(
        0.5 * (p.org_payoff_1 + q.org_payoff_1),
        0.5 * (p.org_payoff_2 + q.org_payoff_2),
        0.5 * (p.attacker_payoff + q.attacker_payoff),
    )


def best_response_dynamics(
    groups: Groups,
    gparams: GlobalParams,
    initial: DefenderProfile,
    initial_attacker: AttackerStrategy = ABSTAIN,
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = CYCLE_TOLERANCE,
) -> Tuple[SolveOutcome, List[Profile]]:
    """Alternate attacker and organization best responses.

    Each round the attacker answers the current backups, then every group
    answers the attacker. The trace records, per round, the backups together
    with the attacker strategy chosen against them. A repeated backup vector
    ends the run: one round back is a fixed point, two rounds back a
    two-cycle whose profiles (and payoffs) are averaged.

    ``initial_attacker`` is immediately replaced by a best response; it is
    accepted so that a full starting profile can be supplied.
    """
    if max_iterations < 2:
        raise ValueError("max_iterations must be >= 2")
    history = [initial]
    trace: List[Profile] = []
    for k in range(1, max_iterations + 1):
        attack = attacker_best_response(groups, gparams, history[-1]).strategy
        trace.append(Profile(history[-1], attack))
        b = defender_best_response(groups, gparams, attack)
        if _close(b, history[-1], tolerance) and verify_profile(groups, gparams, b, attack):
            report = payoff_report(groups, gparams, b, attack)
            outcome = SolveOutcome(OutcomeKind.EXACT_EQUILIBRIUM, b, attack, report, k)
            return outcome, trace
        if len(history) >= 2 and _close(b, history[-2], tolerance):
            first, second = trace[-2], trace[-1]
            mean = _mean_profile(first, second)
            report = _mean_report(
                payoff_report(groups, gparams, first.defenders, first.attacker),
                payoff_report(groups, gparams, second.defenders, second.attacker),
            )
            outcome = SolveOutcome(
                OutcomeKind.AVERAGED_TWO_CYCLE,
                mean.defenders,
                mean.attacker,
                report,
                k,
                cycle=(first, second),
            )
            return outcome, trace
        history.append(b)
    last = trace[-1]
    report = payoff_report(groups, gparams, last.defenders, last.attacker)
    outcome = SolveOutcome(
        OutcomeKind.NOT_FOUND, last.defenders, last.attacker, report, max_iterations
    )
    return outcome, trace


def find_equilibrium(
    groups: Groups,
    gparams: GlobalParams,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = MAX_ITERATIONS,
    cycle_tolerance: float = CYCLE_TOLERANCE,
) -> SolveOutcome:
    deterred, defenders = check_deterrence(groups, gparams)
    if deterred:
        report = payoff_report(groups, gparams, defenders, ABSTAIN)
        return SolveOutcome(OutcomeKind.DETERRED_EQUILIBRIUM, defenders, ABSTAIN, report, 0)
    candidates = candidate_equilibria(groups, gparams, tolerance, max_iterations)
    if candidates:
        best = candidates[0]
        report = payoff_report(groups, gparams, best.defenders, best.attacker)
        return SolveOutcome(
            OutcomeKind.EXACT_EQUILIBRIUM, best.defenders, best.attacker, report, 0
        )
    outcome, _ = best_response_dynamics(
        groups,
        gparams,
        defenders,
        max_iterations=max_iterations,
        tolerance=cycle_tolerance,
    )
    return outcome


def social_loss(groups: Groups, gparams: GlobalParams, defenders: DefenderProfile) -> float:
    """Aggregate expected loss of all organizations when the attacker best-responds."""
    attack = attacker_best_response(groups, gparams, defenders).strategy
    total = 0.0
    for j, group in enumerate(groups, start=1):
        b = defenders.backup(j)
        pays = pays_ransom(group.ransom_loss, b, attack.ransom)
        total += group.size * org_expected_loss(j, group, gparams, b, pays, attack)
    return total


def _grid_search(
    groups: Groups,
    gparams: GlobalParams,
    active: Sequence[int],
    base: DefenderProfile,
    grid: np.ndarray,
) -> DefenderProfile:
    params = kernels.pack_params(groups, gparams)
    if len(active) == 2:
        b1, b2 = (m.ravel() for m in np.meshgrid(grid, grid, indexing="ij"))
    elif active[0] == 1:
        b1, b2 = grid, np.full_like(grid, base.backup_2)
    else:
        b1, b2 = np.full_like(grid, base.backup_1), grid
    loss1, loss2, _ = kernels.social_losses(b1, b2, params)
    total = groups[0].size * loss1 + groups[1].size * loss2
    i = int(np.argmin(total))
    return DefenderProfile(float(b1[i]), float(b2[i]))


def social_optimum(
    groups: Groups,
    gparams: GlobalParams,
    grid_points: int = SO_GRID_POINTS,
    bounds: Tuple[float, float] = SO_BOUNDS,
    resolution: float = SO_RESOLUTION,
) -> SocialOptimum:
    """Backups maximizing the organizations' aggregate payoff under attacker best response.

    The objective jumps where the attacker becomes deterred, so a log-spaced
    grid picks the basin and a coordinate pattern search (improvements only)
    refines it. The no-attack backups are always considered as a candidate.
    Empty groups keep their no-attack backup.
    """
    base = no_attack_backups(groups, gparams)
    active = [j for j, g in enumerate(groups, start=1) if g.size > 0]
    best = base
    if active:
        lo, hi = bounds
        grid = np.geomspace(lo, hi, grid_points)
        from_grid = _grid_search(groups, gparams, active, base, grid)
        best_loss = social_loss(groups, gparams, base)
        grid_loss = social_loss(groups, gparams, from_grid)
        if grid_loss < best_loss:
            best, best_loss = from_grid, grid_loss
        step = math.log(hi / lo) / (grid_points - 1)
        while step >= resolution:
            moved = False
            for j in active:
                for direction in (1.0, -1.0):
                    value = best.backup(j) * math.exp(direction * step)
                    if not lo <= value <= hi:
                        continue
                    trial = best.replace(j, value)
                    trial_loss = social_loss(groups, gparams, trial)
                    if trial_loss < best_loss:
                        best, best_loss, moved = trial, trial_loss, True
                        break
            if not moved:
                step *= 0.5
    attack = attacker_best_response(groups, gparams, best).strategy
    report = payoff_report(groups, gparams, best, attack)
    aggregate = groups[0].size * report.org_payoff_1 + groups[1].size * report.org_payoff_2
    return SocialOptimum(best, attack, aggregate, report)
