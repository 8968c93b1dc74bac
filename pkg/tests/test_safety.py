import numpy as np
import pytest

from helpers import two_choice
from sepplan import (
    CapExceededError,
    Policy,
    enumerate_policies,
    eta_factor,
    evaluate_many,
    feasible_set,
    optimal_reference,
    policy_evaluation,
    prune_actions,
    prune_actions_eta,
    q_values,
    satisfies_bound,
    search_action_sets,
    value_iteration,
)
from sepplan.domains import linear_slip, make_cliff, small_cliff
from sepplan.instances import random_problem


@pytest.fixture
def tiny_cliff():
    spec = small_cliff(width=4, height=3, agent_slip=(0.0, 0.0, 0.0), human_slip=linear_slip(0.095, 3))
    return make_cliff(spec, 0.9)


class TestOptimalReference:
    def test_delegates_to_value_iteration(self, cs):
        v, pi = optimal_reference(cs)
        v2, pi2 = value_iteration(cs.agent_model)
        np.testing.assert_array_equal(v, v2)
        assert pi == pi2

    def test_memoised(self, cs):
        a = optimal_reference(cs)
        b = optimal_reference(cs.with_delta(0.5))
        assert a[0] is b[0] and a[1] == b[1]

    def test_upper_bounds_every_policy(self, rng):
        for _ in range(10):
            p = random_problem(rng, 4, 2, 0.9)
            v_star, _ = optimal_reference(p)
            all_v = evaluate_many(p.agent_model, np.array([q.choice for q in enumerate_policies(p.actions)]))
            assert np.all(all_v <= v_star + 1e-9)


class TestSatisfiesBound:
    def test_examples(self):
        p = two_choice([[1, 0], [0, 1]], [[0, 1], [1, 0]], delta=0.9)
        star = np.array([10.0, 10.0])
        assert satisfies_bound(p.with_delta(1.0), star, star)
        assert satisfies_bound(p, np.array([9.0, 10.0]), star)
        assert not satisfies_bound(p, np.array([8.9, 10.0]), star)

    def test_length_mismatch(self):
        p = two_choice([[1, 0], [0, 1]], [[0, 1], [1, 0]])
        with pytest.raises(ValueError):
            satisfies_bound(p, np.zeros(2), np.zeros(3))

    def test_optimum_always_feasible(self, small_problems):
        for p in small_problems:
            for delta in (0.1, 0.5, 0.9, 1.0):
                v, _ = optimal_reference(p)
                assert satisfies_bound(p.with_delta(delta), v, v)


class TestPruneActions:
    def test_argmax_sets_at_delta_one(self, small_problems):
        for p in small_problems:
            pruned = prune_actions(p.with_delta(1.0), eps=0.0)
            q = q_values(p.agent_model, pruned.reference_v)
            for s, acts in enumerate(pruned.allowed):
                best = q[s].max()
                assert set(acts) == {a for a in p.actions[s] if q[s, a] >= best - 1e-9}

    def test_never_empty_and_keeps_optimum(self, small_problems):
        for p in small_problems:
            pruned = prune_actions(p)
            _, pi = optimal_reference(p)
            assert all(pi[s] in acts for s, acts in enumerate(pruned.allowed))

    def test_monotone_in_delta(self, small_problems):
        for p in small_problems:
            sets = [prune_actions(p.with_delta(d)).allowed for d in (0.5, 0.7, 0.9, 1.0)]
            for loose, tight in zip(sets, sets[1:]):
                assert all(set(t) <= set(lo) for lo, t in zip(loose, tight))

    def test_feasible_policies_survive_pruning(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            p = random_problem(rng, 6, 2, 0.8)
            allowed = prune_actions(p).allowed
            for pol, _ in feasible_set(p, p.actions):
                assert all(pol[s] in allowed[s] for s in range(p.n_states))

    def test_cliff_pruning_magnitude(self, cs):
        full = search_action_sets(cs, use_pruning=False)
        pruned = search_action_sets(cs, use_pruning=True)
        assert np.prod([len(a) for a in full]) == 4 ** 16
        assert np.prod([len(a) for a in pruned]) == 4 ** 4

    def test_json_form(self, small_problems):
        d = prune_actions(small_problems[0]).to_dict()
        assert set(d) == {str(s) for s in range(small_problems[0].n_states)}


class TestEtaPruning:
    def test_factor(self):
        assert eta_factor(0.9, 0.8) == pytest.approx(0.98)
        assert eta_factor(0.9, 1.0) == 1.0

    def test_identical_at_delta_one(self, small_problems):
        for p in small_problems:
            q = p.with_delta(1.0)
            assert prune_actions_eta(q).allowed == prune_actions(q).allowed

    def test_contained_in_delta_pruning(self, small_problems):
        for p in small_problems:
            eta, plain = prune_actions_eta(p).allowed, prune_actions(p).allowed
            assert all(set(e) <= set(a) for e, a in zip(eta, plain))


class TestFeasibleSet:
    def test_vacuous_bound_keeps_everything(self, rng):
        p = random_problem(rng, 3, 2, 1e-9)
        assert len(feasible_set(p, p.actions)) == 8

    def test_delta_one_is_the_optimum(self, rng):
        p = random_problem(rng, 4, 3, 1.0)
        _, pi = optimal_reference(p)
        assert [q for q, _ in feasible_set(p, p.actions)] == [pi]

    def test_members_meet_the_bound(self, small_problems):
        for p in small_problems:
            v_star, _ = optimal_reference(p)
            for pol, v in feasible_set(p, p.actions):
                np.testing.assert_allclose(v, policy_evaluation(p.agent_model, pol), atol=1e-9)
                assert satisfies_bound(p, v, v_star)

    def test_cliff_subset_of_pruned_space(self, tiny_cliff):
        allowed = prune_actions(tiny_cliff).allowed
        sets = search_action_sets(tiny_cliff, use_pruning=False)
        members = feasible_set(tiny_cliff, sets)
        assert members
        for pol, _ in members:
            assert all(pol[s] in allowed[s] for s in range(tiny_cliff.n_states))

    def test_cap(self, cs):
        with pytest.raises(CapExceededError, match="4294967296") as info:
            feasible_set(cs, search_action_sets(cs, use_pruning=False))
        assert info.value.count == 4 ** 16


def test_search_sets_pin_terminals(cs):
    _, pi = optimal_reference(cs)
    sets = search_action_sets(cs)
    for t in cs.agent_model.terminals:
        assert sets[t] == (pi[t],)
    assert len(prune_actions(cs).allowed[next(iter(cs.agent_model.terminals))]) == 4


def test_negative_optimum_makes_bound_infeasible():
    # V* < 0 everywhere: delta * V* is above V*, so only delta = 1 admits a policy
    p = two_choice([[-1, -2], [-2, -1]], [[0, 1], [1, 0]], delta=0.9)
    assert feasible_set(p, p.actions) == []
    assert len(feasible_set(p.with_delta(1.0), p.actions)) == 1
    assert Policy((0, 1)) in [q for q, _ in feasible_set(p.with_delta(1.0), p.actions)]
