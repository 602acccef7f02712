import math

import numpy as np
import pytest

from ransomgame.bestresponse import attacker_best_response
from ransomgame.model import ABSTAIN, AttackerStrategy, DefenderProfile, GroupParams, payoff_report
from ransomgame.model import org_payoff_not_compromised
from ransomgame.simulate import CHUNK_SAMPLES, SimulationConfig, simulate_stage2
from ransomgame.solver import no_attack_backups

from conftest import BASE_GLOBALS, BASE_GROUP, EMPTY_GROUP, with_globals

SINGLE = (BASE_GROUP, EMPTY_GROUP)
SMALL = GroupParams(7, 50.0, 3.0, 8.0, 4.0)
MIXED = (BASE_GROUP, SMALL)


def engaged_profile(groups=SINGLE):
    d = no_attack_backups(groups, BASE_GLOBALS)
    return d, attacker_best_response(groups, BASE_GLOBALS, d).strategy


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(0)
    with pytest.raises(ValueError):
        SimulationConfig(10, seed=-1)
    with pytest.raises(ValueError):
        SimulationConfig(10, seed=2**64)


def test_no_attack_is_exact():
    d = DefenderProfile(1.7, 2.3)
    res = simulate_stage2(MIXED, BASE_GLOBALS, d, ABSTAIN, SimulationConfig(1000, 5))
    assert res.mean_org_payoff[0] == org_payoff_not_compromised(BASE_GROUP, BASE_GLOBALS, 1.7)
    assert res.mean_org_payoff[1] == org_payoff_not_compromised(SMALL, BASE_GLOBALS, 2.3)
    assert res.std_error_org == (0.0, 0.0)
    assert res.mean_attacker_payoff == 0.0 and res.std_error_attacker == 0.0


def test_certain_compromise():
    gp = with_globals(base_difficulty=1e-12)
    d = DefenderProfile(2.0, 2.0)
    att = AttackerStrategy(1e6, 0.0, 2.5)  # V_1 = 1 - 1e-18, rounds to 1
    res = simulate_stage2(SINGLE, gp, d, att, SimulationConfig(200, 1))
    rep = payoff_report(SINGLE, gp, d, att)
    assert res.std_error_org[0] == 0.0
    assert res.mean_org_payoff[0] == pytest.approx(rep.org_payoff_1, rel=1e-12)
    assert res.mean_attacker_payoff == pytest.approx(100 * 2.5 - 10 * 1e6 - 10)


def test_seed_reproducible_and_sensitive():
    d, att = engaged_profile()
    a = simulate_stage2(SINGLE, BASE_GLOBALS, d, att, SimulationConfig(9000, 42))
    b = simulate_stage2(SINGLE, BASE_GLOBALS, d, att, SimulationConfig(9000, 42))
    c = simulate_stage2(SINGLE, BASE_GLOBALS, d, att, SimulationConfig(9000, 43))
    assert a == b
    assert a != c


def test_workers_do_not_change_result():
    d, att = engaged_profile(MIXED)
    cfg = SimulationConfig(3 * CHUNK_SAMPLES + 17, 8)
    assert simulate_stage2(MIXED, BASE_GLOBALS, d, att, cfg) == \
        simulate_stage2(MIXED, BASE_GLOBALS, d, att, cfg, workers=3)


def test_within_three_standard_errors():
    d, att = engaged_profile(MIXED)
    rep = payoff_report(MIXED, BASE_GLOBALS, d, att)
    res = simulate_stage2(MIXED, BASE_GLOBALS, d, att, SimulationConfig(50_000, 0))
    assert res.within(rep)


def test_standard_error_shrinks():
    d, att = engaged_profile()
    small = simulate_stage2(SINGLE, BASE_GLOBALS, d, att, SimulationConfig(2_000, 1))
    large = simulate_stage2(SINGLE, BASE_GLOBALS, d, att, SimulationConfig(32_000, 1))
    ratio = small.std_error_attacker / large.std_error_attacker
    assert 3.0 < ratio < 5.3  # sqrt(16) = 4
    assert small.std_error_org[0] > 0 and large.std_error_org[0] > 0


def test_empty_group_is_nan_and_single_sample_has_infinite_error():
    d, att = engaged_profile()
    res = simulate_stage2(SINGLE, BASE_GLOBALS, d, att, SimulationConfig(1, 0))
    assert math.isnan(res.mean_org_payoff[1])
    assert math.isinf(res.std_error_org[0]) and math.isinf(res.std_error_attacker)


def test_attacker_revenue_counts_only_payers():
    # group 2 has a lower threshold and never pays at group 1's ransom
    d = DefenderProfile(2.0, 4.0)  # thresholds 2.5 and 2.0
    att = AttackerStrategy(5.0, 5.0, 2.5)
    rep = payoff_report((BASE_GROUP, SMALL), BASE_GLOBALS, d, att)
    res = simulate_stage2((BASE_GROUP, SMALL), BASE_GLOBALS, d, att, SimulationConfig(40_000, 3))
    assert res.within(rep)
