"""Wumpus cave: aggregated search versus search on every state.

Run with ``python demos/wumpus_tour.py`` (the last step takes about a minute).
"""

from sepplan import aggregated_search, pag_search, policy_evaluation
from sepplan.cli import validate_policies
from sepplan.domains import default_aggregation, domain_problem, render, score_policy

problem = domain_problem("wumpus", 0.9)
agg = default_aggregation(problem)
start = problem.meta["start"]
print(f"{problem.n_states} states in {agg.n_clusters} clusters")
for label, members in list(zip(agg.labels, agg.members))[:5]:
    print(f"  {label}: {len(members)} states")

# With large clusters, any cluster-wide change breaks the bound somewhere,
# so the aggregated search keeps the agent's optimum.
archive, stats = aggregated_search(problem, agg, "pdt")
print(f"\naggregated exact search: {len(archive)} policy, {stats.policies_evaluated} evaluated")
print(render(problem, archive[0].policy))

# Searching state by state finds a policy the human rates higher.
policy, stats = pag_search(problem)
print(f"\ngreedy ascent on all states: {stats.policies_evaluated} evaluated")
print(render(problem, policy))
print(f"human value at start: {policy_evaluation(problem.human_model, policy)[start]:.2f} "
      f"vs {archive[0].v_human[start]:.2f}")
print(f"mean distance to the wumpus: {score_policy(problem, policy):.2f} "
      f"vs {score_policy(problem, archive[0].policy):.2f}")
print("validation:", validate_policies(problem, [policy]) or "passes")
