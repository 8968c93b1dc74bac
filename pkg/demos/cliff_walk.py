"""Small cliff world: how loosening the safety bound changes the route.

Run with ``python demos/cliff_walk.py``.
"""

from sepplan import optimal_reference, pag_search, pdt_search, policy_evaluation
from sepplan.domains import domain_problem, render

# The agent never slips, so its optimum walks right along the cliff edge.
# The human thinks slips get likelier near the cliff and expects a detour.
for delta in (1.0, 0.98, 0.97):
    problem = domain_problem("cs", delta)
    start = problem.meta["start"]
    v_star, _ = optimal_reference(problem)
    archive, stats = pdt_search(problem)
    print(f"=== delta = {delta}: {len(archive)} Pareto policy, {stats.policies_evaluated} policies evaluated")
    for entry in archive:
        print(render(problem, entry.policy))
        print(f"agent value at start {entry.v_agent[start]:.3f} (optimum {v_star[start]:.3f}, "
              f"floor {delta * v_star[start]:.3f})")
        print(f"human value at start {entry.v_human[start]:.3f}\n")

# The greedy solver looks at far fewer policies. At 0.97 it settles on a
# different detour than the exact search.
problem = domain_problem("cs", 0.97)
policy, stats = pag_search(problem)
v_h = policy_evaluation(problem.human_model, policy)
print(f"=== greedy ascent at delta = 0.97: {stats.policies_evaluated} evaluated")
print(render(problem, policy))
print(f"human value at start {v_h[problem.meta['start']]:.3f}")
