import numpy as np
import pytest

from sepplan import lift, optimal_reference, policy_evaluation, simulate, value_iteration
from sepplan.domains import (
    default_aggregation,
    default_wumpus,
    domain_problem,
    large_cliff,
    linear_slip,
    make_cliff,
    make_wumpus,
    mean_gap,
    most_likely,
    render,
    score_policy,
    small_cliff,
    turn_count,
)
from sepplan.domains.wumpus import decode


def cliff_rows(problem, policy, model="agent"):
    mdp = problem.agent_model if model == "agent" else problem.human_model
    traj = simulate(mdp, policy, problem.meta["start"], mode="most_likely")
    return {problem.meta["cells"][s][0] for s in traj.states}


class TestCliff:
    def test_layout(self, cs):
        meta = cs.meta
        assert cs.n_states == 20 and meta["start"] == 15 and meta["goal"] == 19
        assert meta["cliff"] == [16, 17, 18]
        assert cs.agent_model.terminals == frozenset({16, 17, 18, 19})

    def test_large_layout(self):
        p = make_cliff(large_cliff(), 1.0)
        assert p.n_states == 400 and len(p.agent_model.terminals) == 99

    def test_agent_never_slips(self, cs):
        T = cs.agent_model.transitions
        assert T.max() == 1.0 and np.all(T.getnnz(axis=1) == 1)

    def test_human_slip_profile(self):
        assert linear_slip(0.095) == pytest.approx((0.0, 0.0475, 0.095, 0.0))
        assert linear_slip(0.2, 2) == (0.2, 0.0)

    def test_bad_specs(self):
        with pytest.raises(ValueError):
            small_cliff(width=2)
        with pytest.raises(ValueError):
            small_cliff(human_slip=(0.1,))
        with pytest.raises(ValueError):
            small_cliff(goal=(9, 9))

    def test_height_override(self):
        spec = small_cliff(height=3, agent_slip=(0.0,) * 3, human_slip=linear_slip(0.1, 3))
        assert make_cliff(spec).n_states == 15

    def test_optimum_positive(self, cs, cl):
        for p in (cs, cl):
            v, _ = optimal_reference(p)
            start = p.meta["start"]
            assert v[start] > 0

    def test_agent_hugs_the_cliff(self, cs):
        _, pi = optimal_reference(cs)
        assert cliff_rows(cs, pi) == {2, 3}

    def test_human_optimum_takes_the_top_row(self, cs):
        _, pi_h = value_iteration(cs.human_model)
        assert 0 in cliff_rows(cs, pi_h, "human")

    def test_score_and_render(self, cs):
        _, pi = optimal_reference(cs)
        assert score_policy(cs, pi) == -2.0
        pic = render(cs, pi)
        assert pic.splitlines()[3] == "S # # # G"
        assert "turns: 2" in pic


class TestWumpus:
    def test_size(self, wumpus):
        assert wumpus.n_states == 2118
        assert len(wumpus.agent_model.terminals) == 2

    def test_decode(self, wumpus):
        meta = wumpus.meta
        assert decode(wumpus, meta["encounter_state"]) == "encounter"
        assert decode(wumpus, meta["exit_state"]) == "exit"
        agent, w, flags = decode(wumpus, meta["start"])
        assert agent == (4, 0) and w == (0, 0) and flags == (False, False)

    def test_configs_consistent(self, wumpus):
        spec = default_wumpus()
        for s in range(wumpus.n_states):
            cfg = decode(wumpus, s)
            if isinstance(cfg, str):
                continue
            agent, w, flags = cfg
            assert agent != w and agent != spec.exit
            for coin, taken in zip(spec.coins, flags):
                assert not (agent == coin and not taken)

    def test_optimum_leaves_alive(self, wumpus):
        _, pi = optimal_reference(wumpus)
        traj = most_likely(wumpus, pi)
        assert traj.steps[-1].next_state == wumpus.meta["exit_state"]

    def test_exit_pays_from_next_door(self, wumpus):
        spec = default_wumpus()
        v, _ = optimal_reference(wumpus)
        for s in range(wumpus.n_states):
            cfg = decode(wumpus, s)
            if not isinstance(cfg, str) and cfg[0] == (1, 4) and cfg[1][0] >= 3:
                assert v[s] >= 0.9 * spec.exit_reward
                break
        else:
            pytest.fail("no state next to the exit found")

    def test_encounter_is_absorbing(self, wumpus):
        t = wumpus.meta["encounter_state"]
        v = policy_evaluation(wumpus.agent_model, optimal_reference(wumpus)[1])
        assert v[t] == 0.0

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            default_wumpus(exit=(4, 0))
        with pytest.raises(ValueError):
            default_wumpus(coins=((9, 9),))

    def test_smaller_cave(self):
        p = make_wumpus(default_wumpus(size=3, agent_start=(2, 0), exit=(0, 2), coins=((1, 1),)), 1.0)
        v, pi = optimal_reference(p)
        assert v[p.meta["start"]] > 0
        assert "outcome:" in render(p, pi)


class TestDefaultAggregation:
    @pytest.mark.parametrize("name, clusters", [("cs", 10), ("cl", 10), ("wumpus", 16)])
    def test_cluster_counts(self, name, clusters):
        p = domain_problem(name, 0.95)
        agg = default_aggregation(p)
        agg.validate_for(p.agent_model)
        terminals = p.agent_model.terminals
        free = [m for m in agg.members if not (len(m) == 1 and m[0] in terminals)]
        assert len(free) == clusters
        assert agg.n_clusters == clusters + len(terminals)

    def test_wumpus_root_is_the_optimum(self, wumpus):
        agg = default_aggregation(wumpus)
        _, pi = optimal_reference(wumpus)
        rep = [pi[m[0]] for m in agg.members]
        assert lift(rep, agg) == pi

    def test_unknown_domain(self, small_problems):
        with pytest.raises(ValueError):
            default_aggregation(small_problems[0])
        with pytest.raises(ValueError):
            domain_problem("maze")


class TestScores:
    def test_turns(self):
        assert turn_count([(0, 0), (0, 1), (0, 2)]) == 0
        assert turn_count([(0, 0), (1, 0), (1, 1)]) == 1
        assert turn_count([(0, 0), (0, 0), (0, 1), (1, 1), (1, 2)]) == 2

    def test_mean_gap(self):
        assert mean_gap([3, 2, 2, 1]) == 2.0
        assert mean_gap([]) == 0.0

    def test_wumpus_score_is_mean_distance(self, wumpus):
        _, pi = optimal_reference(wumpus)
        assert 0.0 < score_policy(wumpus, pi) <= 8.0
