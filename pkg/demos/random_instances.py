"""Exact search against brute force on random problems, and where greedy ascent falls short.

Run with ``python demos/random_instances.py``.
"""

import numpy as np

from sepplan import bf_pareto, feasible_set, pag_search, pdt_search, policy_evaluation, strictly_dominates
from sepplan.instances import battery

problems = list(battery(seed=2024, count=300))

agree = 0
greedy_dominated = []
pdt_work = bf_work = 0
for i, p in enumerate(problems):
    archive, s_pdt = pdt_search(p)
    oracle, s_bf = bf_pareto(p, use_pruning=False)
    pdt_work += s_pdt.policies_evaluated
    bf_work += s_bf.policies_evaluated
    agree += archive.value_set() == oracle.value_set()

    policy, _ = pag_search(p)
    v = policy_evaluation(p.human_model, policy)
    for other, _ in feasible_set(p, p.actions):
        if strictly_dominates(policy_evaluation(p.human_model, other), v, 1e-9):
            greedy_dominated.append((i, policy, other))
            break

print(f"exact search agrees with brute force on {agree} of {len(problems)} problems")
print(f"policies evaluated: exact search {pdt_work}, brute force {bf_work}")
print(f"greedy ascent ends on a dominated policy in {len(greedy_dominated)} problems")

# One of those cases, state by state.
i, got, better = greedy_dominated[0]
p = problems[i]
np.set_printoptions(precision=3, suppress=True)
print(f"\nproblem {i}: {p.n_states} states, delta {p.delta}, discount {p.agent_model.discount}")
print("greedy policy  ", got.choice, policy_evaluation(p.human_model, got))
print("better feasible", better.choice, policy_evaluation(p.human_model, better))
