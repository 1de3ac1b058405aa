import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PAIRING_PATH
from qdnoma.channel import ScenarioConfig, rayleigh, trial_rng
from qdnoma.dpc import solve_dpc
from qdnoma.pairing import (AS_FLAGGED, HCOMP_NOMA, ZFBF_ONLY, GroupAssignment, GroupEvaluator,
                            UserPopulation, corr_pairing, evaluate_assignment, qdup,
                            random_pairing, sample_population)
from qdnoma.rates import SinrTargets
from qdnoma.schemes import qd_check

PAIRING = ScenarioConfig.from_json(PAIRING_PATH)
TARGETS = SinrTargets.from_rates(PAIRING.target_rates)


def _pop(seed, K, cfg=PAIRING):
    return sample_population(cfg.replace(group_count=K), trial_rng(seed, 0))


def test_assignment_validation():
    GroupAssignment([1, 0], [0, 1], [0, 1])
    with pytest.raises(ValueError):
        GroupAssignment([0, 0], [0, 1], [0, 0])
    with pytest.raises(ValueError):
        GroupAssignment([0, 1], [0, 1], [0, 2])


def test_population_validation():
    with pytest.raises(ValueError):
        UserPopulation([([1, 0], [0, 1])], [[1, 0]], [])
    with pytest.raises(ValueError):
        UserPopulation([([1, 0], [0, 1])], [[0, 0]], [[1, 0]])


def test_single_group_trivial():
    pop = _pop(0, 1)
    a = qdup(pop, TARGETS, PAIRING.noise_power, PAIRING.p_max)
    assert (a.pi1, a.pi2) == ([0], [0])
    assert corr_pairing(pop).pi1 == [0]
    assert random_pairing(pop, np.random.default_rng(0)).pi2 == [0]


def test_orthogonal_population_all_zf():
    # every NOMA user is orthogonal to every CoMP link of its BS: never QD, always "orthogonal"
    K = 3
    rng = np.random.default_rng(1)
    comp = [(np.array([z, 0]), np.array([w, 0])) for z, w in rayleigh(rng, 2, K)]
    n1 = [np.array([0, z]) for z in rayleigh(rng, K)]
    n2 = [np.array([0, z]) for z in rayleigh(rng, K)]
    pop = UserPopulation(comp, n1, n2)
    a = qdup(pop, SinrTargets.from_rates((0.5, 1, 1)), 1.0, 1e3)
    assert a.S == [0, 0, 0]
    assert (a.pi1, a.pi2) == ([0, 1, 2], [0, 1, 2])  # first free pair wins


def test_corr_pairing_picks_parallel_user():
    pop = _pop(2, 4)
    h10 = pop.comp_channels[0][0]
    pop.noma1_channels[2] = 0.3j * h10
    assert corr_pairing(pop).pi1[0] == 2


def test_random_pairing_reproducible():
    a = random_pairing(6, np.random.default_rng(5))
    b = random_pairing(6, np.random.default_rng(5))
    assert a == b


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_qdup_bijection_and_flags(K, seed):
    pop = _pop(seed, K)
    a = qdup(pop, TARGETS, PAIRING.noise_power, 0.05 * K)
    assert sorted(a.pi1) == list(range(K)) and sorted(a.pi2) == list(range(K))
    for k, i, j in a.groups():
        if a.S[k]:
            ch = pop.group(k, i, j)
            sol = solve_dpc(ch, TARGETS, PAIRING.noise_power, 0.05)
            assert sol and qd_check(sol, ch, TARGETS, PAIRING.noise_power)


def test_evaluate_huge_budget_no_outage():
    pop = _pop(3, 4)
    a = random_pairing(pop, np.random.default_rng(3))
    res = evaluate_assignment(pop, a, TARGETS, PAIRING.noise_power, 1e9, HCOMP_NOMA)
    assert all(r.feasible for r in res)


def test_evaluate_zero_budget_all_outage():
    pop = _pop(4, 4)
    a = random_pairing(pop, np.random.default_rng(4))
    for policy in (HCOMP_NOMA, ZFBF_ONLY, AS_FLAGGED):
        res = evaluate_assignment(pop, a, TARGETS, PAIRING.noise_power, 0.0, policy)
        assert not any(r.feasible for r in res)


def test_flagged_qd_groups_sum_to_dpc_minima():
    for seed in range(20):
        pop = _pop(10 + seed, 3)
        a = qdup(pop, TARGETS, PAIRING.noise_power, 0.15)
        if not all(a.S):
            continue
        res = evaluate_assignment(pop, a, TARGETS, PAIRING.noise_power, 0.15, AS_FLAGGED)
        total = sum(r.total_power for r in res)
        ref = sum(solve_dpc(pop.group(k, i, j), TARGETS, PAIRING.noise_power, 0.05).total_power
                  for k, i, j in a.groups())
        assert total == ref
        return
    pytest.fail("no all-QD population found")


def test_unknown_policy():
    pop = _pop(5, 2)
    with pytest.raises(ValueError):
        evaluate_assignment(pop, corr_pairing(pop), TARGETS, 1.0, 1.0, "bogus")


def test_qdup_beats_random_search_on_average():
    """Randomised-search oracle: 100 random alternatives per population, K = 3."""
    K, pm = 3, 0.15
    q_served, r_served = [], []
    for s in range(30):
        rng = trial_rng(100, s)
        pop = sample_population(PAIRING.replace(group_count=K), rng)
        ev = GroupEvaluator(pop, TARGETS, PAIRING.noise_power, pm / K)
        a = qdup(pop, TARGETS, PAIRING.noise_power, pm, evaluator=ev)
        q_served.append(sum(r.feasible for r in
                            evaluate_assignment(pop, a, TARGETS, PAIRING.noise_power, pm,
                                                AS_FLAGGED, evaluator=ev)))
        alt = [sum(r.feasible for r in evaluate_assignment(
            pop, random_pairing(pop, rng), TARGETS, PAIRING.noise_power, pm, HCOMP_NOMA, evaluator=ev))
            for _ in range(100)]
        r_served.append(np.mean(alt))
    assert np.mean(q_served) >= np.mean(r_served)
