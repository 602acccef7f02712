import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ransomgame.bestresponse import attacker_best_response, backup_best_response
from ransomgame.model import ABSTAIN, DefenderProfile, GroupParams, payoff_report
from ransomgame.solver import (
    OutcomeKind,
    best_response_dynamics,
    candidate_equilibria,
    check_deterrence,
    deterrence_threshold,
    find_equilibrium,
    no_attack_backups,
    social_loss,
    social_optimum,
    verify_profile,
)

from conftest import BASE_GLOBALS, BASE_GROUP, EMPTY_GROUP, globals_st, groups_st, with_globals

SINGLE = (BASE_GROUP, EMPTY_GROUP)
PAIR = (BASE_GROUP, BASE_GROUP)


def aggregate(groups, report):
    return groups[0].size * report.org_payoff_1 + groups[1].size * report.org_payoff_2


class TestVerify:
    def test_deterred_profile_verifies(self):
        gp = with_globals(backup_unit_cost=0.3)
        deterred, d = check_deterrence(SINGLE, gp)
        assert deterred and verify_profile(SINGLE, gp, d, ABSTAIN)

    def test_engaged_deviation_detected(self):
        d = no_attack_backups(SINGLE, BASE_GLOBALS)
        assert not verify_profile(SINGLE, BASE_GLOBALS, d, ABSTAIN)
        attack = attacker_best_response(SINGLE, BASE_GLOBALS, d).strategy
        # the targeted group now wants to deviate
        assert not verify_profile(SINGLE, BASE_GLOBALS, d, attack)

    def test_perturbed_backup_rejected(self):
        gp = with_globals(backup_unit_cost=0.3)
        d = no_attack_backups(PAIR, gp)
        for j in (1, 2):
            assert not verify_profile(PAIR, gp, d.replace(j, d.backup(j) * 1.1), ABSTAIN)

    def test_payment_mismatch(self):
        gp = with_globals(backup_unit_cost=0.3)
        d = no_attack_backups(SINGLE, gp)
        assert not verify_profile(SINGLE, gp, d, ABSTAIN, payments=(False, True))

    def test_tolerance_positive(self):
        with pytest.raises(ValueError):
            verify_profile(SINGLE, BASE_GLOBALS, DefenderProfile(1, 1), ABSTAIN, tolerance=0)


class TestDeterrence:
    def test_examples(self):
        assert check_deterrence(SINGLE, with_globals(backup_unit_cost=0.3))[0]
        assert not check_deterrence(SINGLE, BASE_GLOBALS)[0]
        assert check_deterrence(SINGLE, with_globals(attack_unit_cost=15.5))[0]

    def test_thresholds(self):
        cb = deterrence_threshold(SINGLE, BASE_GLOBALS, "C_B", 0.01, 10)
        ca = deterrence_threshold(SINGLE, BASE_GLOBALS, "C_A", 1, 100)
        assert 0.4 <= cb <= 0.6
        assert 14 <= ca <= 16
        # closed form: deterred iff (sqrt(m L / b) - sqrt(C_A D))^2 <= C_D, b = sqrt(beta F / C_B)
        b = lambda c_b: math.sqrt(0.9 * 5 / c_b)
        margin = lambda c_b: (math.sqrt(100 * 5 / b(c_b)) - 10) ** 2 - 10
        assert abs(margin(cb)) < 1e-6
        assert (math.sqrt(100 * 5 / b(1.0)) - math.sqrt(ca * 10)) ** 2 == pytest.approx(10, rel=1e-6)

    def test_no_switch(self):
        assert deterrence_threshold(SINGLE, BASE_GLOBALS, "C_B", 5, 10) is None


class TestFindEquilibrium:
    def test_deterred_example(self):
        out = find_equilibrium(SINGLE, with_globals(backup_unit_cost=0.3))
        assert out.kind is OutcomeKind.DETERRED_EQUILIBRIUM
        assert out.defenders.backup_1 == pytest.approx(math.sqrt(0.9 * 5 / 0.3), rel=1e-14)
        assert out.attacker == ABSTAIN and out.report.attacker_payoff == 0.0

    def test_baseline_engaged_below_social_optimum(self):
        ne = find_equilibrium(SINGLE, BASE_GLOBALS)
        assert ne.found and ne.kind is not OutcomeKind.DETERRED_EQUILIBRIUM
        assert ne.report.attacker_payoff > 0
        so = social_optimum(SINGLE, BASE_GLOBALS)
        assert so.report.org_payoff_1 > ne.report.org_payoff_1

    def test_empty_market(self):
        groups = (EMPTY_GROUP, EMPTY_GROUP)
        assert find_equilibrium(groups, BASE_GLOBALS).kind is OutcomeKind.DETERRED_EQUILIBRIUM

    def test_averaged_cycle_is_mean_of_cycle(self):
        out = find_equilibrium(PAIR, BASE_GLOBALS)
        assert out.kind is OutcomeKind.AVERAGED_TWO_CYCLE
        p, q = out.cycle
        assert out.defenders.backup_1 == pytest.approx(0.5 * (p.defenders.backup_1 + q.defenders.backup_1))
        assert out.attacker.ransom == pytest.approx(0.5 * (p.attacker.ransom + q.attacker.ransom))
        rp = payoff_report(PAIR, BASE_GLOBALS, p.defenders, p.attacker)
        rq = payoff_report(PAIR, BASE_GLOBALS, q.defenders, q.attacker)
        assert out.report.attacker_payoff == pytest.approx(0.5 * (rp.attacker_payoff + rq.attacker_payoff))

    def test_exact_equilibria_verify(self):
        # Any EXACT outcome must pass verification; scan a few points.
        for cb in (0.6, 1.0, 2.0):
            for groups in (SINGLE, PAIR):
                gp = with_globals(backup_unit_cost=cb)
                out = find_equilibrium(groups, gp)
                if out.kind is OutcomeKind.EXACT_EQUILIBRIUM:
                    assert verify_profile(groups, gp, out.defenders, out.attacker)

    @settings(max_examples=60, deadline=None)
    @given(groups_st(), globals_st())
    def test_deterrence_consistency(self, groups, gp):
        deterred, d = check_deterrence(groups, gp)
        out = find_equilibrium(groups, gp)
        assert (out.kind is OutcomeKind.DETERRED_EQUILIBRIUM) == deterred
        if deterred:
            assert out.defenders == d and out.attacker == ABSTAIN
            assert verify_profile(groups, gp, out.defenders, out.attacker)

    @settings(max_examples=40, deadline=None)
    @given(groups_st(), globals_st(), st.floats(0, 500), st.floats(0, 500))
    def test_wealth_invariance(self, groups, gp, w1, w2):
        shifted = (dataclasses.replace(groups[0], wealth=groups[0].wealth + w1),
                   dataclasses.replace(groups[1], wealth=groups[1].wealth + w2))
        a, b = find_equilibrium(groups, gp), find_equilibrium(shifted, gp)
        assert a.kind is b.kind
        assert a.defenders == b.defenders and a.attacker == b.attacker
        assert b.report.attacker_payoff == a.report.attacker_payoff
        assert b.report.org_payoff_1 == pytest.approx(a.report.org_payoff_1 + w1, abs=1e-9)
        assert b.report.org_payoff_2 == pytest.approx(a.report.org_payoff_2 + w2, abs=1e-9)


class TestDynamics:
    def test_fixed_point_start(self):
        gp = with_globals(backup_unit_cost=0.3)
        d = no_attack_backups(SINGLE, gp)
        out, trace = best_response_dynamics(SINGLE, gp, d)
        assert out.kind is OutcomeKind.EXACT_EQUILIBRIUM and out.iterations == 1
        assert out.defenders == d and len(trace) == 1

    def test_two_cycle(self):
        out, trace = best_response_dynamics(SINGLE, BASE_GLOBALS, no_attack_backups(SINGLE, BASE_GLOBALS))
        assert out.kind is OutcomeKind.AVERAGED_TWO_CYCLE
        assert candidate_equilibria(SINGLE, BASE_GLOBALS) == []
        first, second = out.cycle
        assert first.attacker.engaged and second.attacker.engaged
        assert trace[-2:] == [first, second]

    def test_iteration_cap(self):
        with pytest.raises(ValueError):
            best_response_dynamics(SINGLE, BASE_GLOBALS, DefenderProfile(1, 1), max_iterations=1)

    @pytest.mark.parametrize("groups", [SINGLE, PAIR, (BASE_GROUP, GroupParams(60, 50.0, 3.0, 8.0, 4.0))])
    def test_start_independence(self, groups):
        rng = np.random.default_rng(2024)
        outcomes = []
        for _ in range(10):
            start = DefenderProfile(*rng.uniform(0.05, 20, size=2))
            outcomes.append(best_response_dynamics(groups, BASE_GLOBALS, start)[0])
        ref = outcomes[0]
        for o in outcomes[1:]:
            assert o.kind is ref.kind
            for x, y in ((o.defenders.backup_1, ref.defenders.backup_1),
                         (o.defenders.backup_2, ref.defenders.backup_2),
                         (o.attacker.ransom, ref.attacker.ransom),
                         (o.attacker.total_effort, ref.attacker.total_effort)):
                assert abs(x - y) <= 1e-6 * max(1.0, abs(y))


class TestSocialOptimum:
    def test_deters_at_moderate_cost(self):
        gp = with_globals(backup_unit_cost=0.7)
        so = social_optimum(SINGLE, gp)
        ne = find_equilibrium(SINGLE, gp)
        assert not so.attacker.engaged
        assert so.report.org_payoff_1 > ne.report.org_payoff_1

    def test_high_cost_dominates(self):
        gp = with_globals(backup_unit_cost=2.0)
        so = social_optimum(SINGLE, gp)
        ne = find_equilibrium(SINGLE, gp)
        assert so.aggregate_org_payoff >= aggregate(SINGLE, ne.report)

    def test_no_attack_anywhere(self):
        gp = with_globals(dev_cost=1e12)
        so = social_optimum(PAIR, gp)
        b = no_attack_backups(PAIR, gp)
        assert so.defenders.backup_1 == pytest.approx(b.backup_1, rel=1e-5)
        assert so.defenders.backup_2 == pytest.approx(b.backup_2, rel=1e-5)

    def test_invariants(self):
        so = social_optimum(PAIR, BASE_GLOBALS)
        assert so.attacker == attacker_best_response(PAIR, BASE_GLOBALS, so.defenders).strategy
        assert so.aggregate_org_payoff == pytest.approx(aggregate(PAIR, so.report), rel=1e-14)

    def test_not_worse_than_neighbours(self):
        so = social_optimum(PAIR, BASE_GLOBALS)
        base = social_loss(PAIR, BASE_GLOBALS, so.defenders)
        for j in (1, 2):
            for f in (0.99, 1.01):
                moved = so.defenders.replace(j, so.defenders.backup(j) * f)
                assert social_loss(PAIR, BASE_GLOBALS, moved) >= base - 1e-9

    @settings(max_examples=25, deadline=None)
    @given(groups_st(), globals_st())
    def test_dominates_equilibrium(self, groups, gp):
        ne = find_equilibrium(groups, gp)
        so = social_optimum(groups, gp, grid_points=60)
        if ne.found:
            tol = 1e-9 * max(1.0, abs(so.aggregate_org_payoff))
            assert so.aggregate_org_payoff >= aggregate(groups, ne.report) - tol

    def test_empty_groups_keep_no_attack_level(self):
        so = social_optimum(SINGLE, BASE_GLOBALS)
        assert so.defenders.backup_2 == no_attack_backups(SINGLE, BASE_GLOBALS).backup_2


def test_at_most_one_exact_equilibrium_on_sweep_grids():
    for cb in np.arange(0.1, 2.0001, 0.05):
        gp = with_globals(backup_unit_cost=round(float(cb), 12))
        for groups in (SINGLE, PAIR):
            found = candidate_equilibria(groups, gp)
            distinct = {(round(p.defenders.backup_1, 9), round(p.defenders.backup_2, 9)) for p in found}
            assert len(distinct) <= 1
