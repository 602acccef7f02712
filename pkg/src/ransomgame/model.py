"""Game parameters, strategy types and the payoff arithmetic of the ransomware game.

Two groups of organizations choose backup efforts; a single attacker chooses
how much effort to spend on each group and which ransom to demand. Every
payoff in the package is computed through the functions below.

Organization payoffs are evaluated as ``wealth - loss``. Decisions elsewhere
compare losses only, so shifting a group's wealth never changes a decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple


class ParameterError(ValueError):
    """A model parameter is outside its documented range."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field} {message}")
        self.field = field
        self.message = message


class DomainError(ValueError):
    """A payoff was requested outside the strategy space (e.g. zero backup)."""


def _finite(field: str, value: float) -> None:
    if not math.isfinite(value):
        raise ParameterError(field, f"must be finite (got {value!r})")


@dataclass(frozen=True)
class GroupParams:
    """Economics shared by every organization of one group."""

    size: int
    wealth: float
    failure_loss: float
    ransom_loss: float
    interruption_loss: float

    def __post_init__(self):
        if isinstance(self.size, bool) or int(self.size) != self.size:
            raise ParameterError("size", f"must be an integer (got {self.size!r})")
        object.__setattr__(self, "size", int(self.size))
        if self.size < 0:
            raise ParameterError("size", f"must be >= 0 (got {self.size})")
        for name in ("wealth", "failure_loss", "ransom_loss", "interruption_loss"):
            _finite(name, getattr(self, name))
        if self.wealth < 0:
            raise ParameterError("wealth", f"must be >= 0 (got {self.wealth})")
        if self.failure_loss <= 0:
            raise ParameterError("failure_loss", f"must be > 0 (got {self.failure_loss})")
        if self.ransom_loss <= 0:
            raise ParameterError("ransom_loss", f"must be > 0 (got {self.ransom_loss})")
        if self.interruption_loss < 0:
            raise ParameterError(
                "interruption_loss", f"must be >= 0 (got {self.interruption_loss})"
            )


@dataclass(frozen=True)
class GlobalParams:
    """Economy-wide constants."""

    discount: float
    base_difficulty: float
    backup_unit_cost: float
    attack_unit_cost: float
    dev_cost: float

    def __post_init__(self):
        for name in (
            "discount",
            "base_difficulty",
            "backup_unit_cost",
            "attack_unit_cost",
            "dev_cost",
        ):
            _finite(name, getattr(self, name))
        if not 0 < self.discount <= 1:
            raise ParameterError("discount", f"must be in (0, 1] (got {self.discount})")
        if self.base_difficulty <= 0:
            raise ParameterError(
                "base_difficulty", f"must be > 0 (got {self.base_difficulty})"
            )
        if self.backup_unit_cost <= 0:
            raise ParameterError(
                "backup_unit_cost", f"must be > 0 (got {self.backup_unit_cost})"
            )
        if self.attack_unit_cost <= 0:
            raise ParameterError(
                "attack_unit_cost", f"must be > 0 (got {self.attack_unit_cost})"
            )
        if self.dev_cost < 0:
            raise ParameterError("dev_cost", f"must be >= 0 (got {self.dev_cost})")


@dataclass(frozen=True)
class AttackerStrategy:
    effort_1: float = 0.0
    effort_2: float = 0.0
    ransom: float = 0.0

    def __post_init__(self):
        for name in ("effort_1", "effort_2", "ransom"):
            value = getattr(self, name)
            _finite(name, value)
            if value < 0:
                raise ParameterError(name, f"must be >= 0 (got {value})")

    @property
    def engaged(self) -> bool:
        return self.effort_1 > 0 or self.effort_2 > 0

    @property
    def total_effort(self) -> float:
        return self.effort_1 + self.effort_2

    def effort(self, group_index: int) -> float:
        _check_index(group_index)
        return self.effort_1 if group_index == 1 else self.effort_2


ABSTAIN = AttackerStrategy(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class DefenderProfile:
    """One backup effort per group; every member of a group plays it."""

    backup_1: float
    backup_2: float

    def __post_init__(self):
        for name in ("backup_1", "backup_2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and > 0 (got {value!r})")

    def backup(self, group_index: int) -> float:
        _check_index(group_index)
        return self.backup_1 if group_index == 1 else self.backup_2

    def replace(self, group_index: int, value: float) -> "DefenderProfile":
        _check_index(group_index)
        if group_index == 1:
            return DefenderProfile(value, self.backup_2)
        return DefenderProfile(self.backup_1, value)


@dataclass(frozen=True)
class PayoffReport:
    """Expected payoff of one organization per group, and of the attacker."""

    org_payoff_1: float
    org_payoff_2: float
    attacker_payoff: float

    def org_payoff(self, group_index: int) -> float:
        _check_index(group_index)
        return self.org_payoff_1 if group_index == 1 else self.org_payoff_2


Groups = Tuple[GroupParams, GroupParams]


def _check_index(group_index: int) -> None:
    if group_index not in (1, 2):
        raise ValueError(f"group_index must be 1 or 2 (got {group_index!r})")


def _check_backup(backup: float) -> None:
    if not backup > 0:
        raise DomainError(f"backup effort must be > 0 (got {backup!r})")


def pays_ransom(ransom_loss: float, backup: float, ransom: float) -> bool:
    # Exact comparison: ransoms are built as L/b upstream and must trigger payment.
    return ransom <= ransom_loss / backup


def infection_probability(
    group_index: int, attacker: AttackerStrategy, gparams: GlobalParams
) -> float:
    """Probability that one organization of the group is compromised."""
    a_j = attacker.effort(group_index)
    if a_j == 0:
        return 0.0
    return a_j / (gparams.base_difficulty + (attacker.effort_1 + attacker.effort_2))


def loss_not_compromised(group: GroupParams, gparams: GlobalParams, backup: float) -> float:
    _check_backup(backup)
    return (
        gparams.backup_unit_cost * backup
        + gparams.discount * group.failure_loss / backup
    )


def loss_compromised(
    group: GroupParams,
    gparams: GlobalParams,
    backup: float,
    pays: bool,
    ransom: float,
) -> float:
    _check_backup(backup)
    p = 1.0 if pays else 0.0
    return gparams.backup_unit_cost * backup + gparams.discount * (
        (group.failure_loss + (1.0 - p) * group.ransom_loss) / backup
        + group.interruption_loss
        + p * ransom
    )


def org_payoff_not_compromised(
    group: GroupParams, gparams: GlobalParams, backup: float
) -> float:
    return group.wealth - loss_not_compromised(group, gparams, backup)


def org_payoff_compromised(
    group: GroupParams,
    gparams: GlobalParams,
    backup: float,
    pays: bool,
    ransom: float,
) -> float:
    return group.wealth - loss_compromised(group, gparams, backup, pays, ransom)


def org_expected_loss(
    group_index: int,
    group: GroupParams,
    gparams: GlobalParams,
    backup: float,
    pays: bool,
    attacker: AttackerStrategy,
) -> float:
    v = infection_probability(group_index, attacker, gparams)
    safe = loss_not_compromised(group, gparams, backup)
    if v == 0:
        return safe
    hit = loss_compromised(group, gparams, backup, pays, attacker.ransom)
    return (1.0 - v) * safe + v * hit


def org_expected_payoff(
    group_index: int,
    group: GroupParams,
    gparams: GlobalParams,
    backup: float,
    pays: bool,
    attacker: AttackerStrategy,
) -> float:
    """Expected payoff of one organization, mixing the compromised and safe outcomes."""
    return group.wealth - org_expected_loss(
        group_index, group, gparams, backup, pays, attacker
    )


def attacker_expected_payoff(
    groups: Groups,
    gparams: GlobalParams,
    defenders: DefenderProfile,
    attacker: AttackerStrategy,
) -> float:
    """Expected ransom revenue minus effort and development costs.

    Compromised organizations pay according to ``pays_ransom`` (ties pay).
    Exactly 0.0 when the attacker does not engage.
    """
    b1, b2 = defenders.backup_1, defenders.backup_2
    if not attacker.engaged:
        return 0.0
    g1, g2 = groups
    r = attacker.ransom
    p1 = 1.0 if pays_ransom(g1.ransom_loss, b1, r) else 0.0
    p2 = 1.0 if pays_ransom(g2.ransom_loss, b2, r) else 0.0
    v1 = infection_probability(1, attacker, gparams)
    v2 = infection_probability(2, attacker, gparams)
    revenue = (g1.size * v1 * p1 + g2.size * v2 * p2) * r
    return (
        revenue
        - gparams.attack_unit_cost * (attacker.effort_1 + attacker.effort_2)
        - gparams.dev_cost
    )


def payoff_report(
    groups: Groups,
    gparams: GlobalParams,
    defenders: DefenderProfile,
    attacker: AttackerStrategy,
) -> PayoffReport:
    """All expected payoffs of a profile, with payments decided by ``pays_ransom``."""
    orgs = []
    for j, group in enumerate(groups, start=1):
        b = defenders.backup(j)
        pays = pays_ransom(group.ransom_loss, b, attacker.ransom)
        orgs.append(org_expected_payoff(j, group, gparams, b, pays, attacker))
    return PayoffReport(
        orgs[0], orgs[1], attacker_expected_payoff(groups, gparams, defenders, attacker)
    )
