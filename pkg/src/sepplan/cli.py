"""Command-line front end: ``sepplan solve | benchmark | validate | export``.

Exit codes: 0 success, 1 bad input (or, for ``validate``, a failed check),
2 a search hit its evaluation cap and only a partial result was written.
Set ``SEP_LOG=debug`` to trace node expansions.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .aggregation import Aggregation, aggregated_brute_force, aggregated_search, cluster_action_sets
from .archive import STATS_COLUMNS, ParetoArchive, SearchStats
from .brute_force import bf_pareto, policy_count
from .domains import default_aggregation, domain_problem, render, score_policy
from .errors import CapExceededError, InfeasibleRootError, SearchCapExceeded
from .io import (
    MalformedFileError,
    archive_to_list,
    dump,
    load_aggregation,
    load_problem,
    load_result_policies,
    policy_result,
    save_problem,
)
from .mdp import InvalidMdpError, Policy, SepProblem, policy_evaluation, strictly_dominates, value_iteration
from .pag import pag_search
from .pdt import MAX_EVALUATIONS, pdt_search
from .safety import DEFAULT_EPS, ENUMERATION_CAP, search_action_sets

ALGOS = ("pdt", "pdt+", "pag", "pag+", "bf", "bf+")
BENCH_COLUMNS = ("domain", "delta", "algo", "evaluated", "expanded", "pareto_size", "wall_time_s", "repeat")
INPUT_ERRORS = (MalformedFileError, InvalidMdpError, ValueError, KeyError, OSError)


class InputError(Exception):
    pass


def _delta(text: str) -> float:
    try:
        d = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < d <= 1.0:
        raise argparse.ArgumentTypeError(f"delta must lie in (0, 1], got {d}")
    return d


def _algo(text: str) -> str:
    if text not in ALGOS:
        raise argparse.ArgumentTypeError(f"unknown algorithm {text!r}; choose from {', '.join(ALGOS)}")
    return text


def _load(args) -> tuple[SepProblem, str]:
    if args.problem and args.domain:
        raise InputError("give either --problem or --domain, not both")
    if args.problem:
        problem = load_problem(args.problem, args.delta)
        return problem, Path(args.problem).stem
    if args.domain:
        return domain_problem(args.domain, args.delta), args.domain.lower()
    raise InputError("one of --problem or --domain is required")


def _aggregation(spec: str | None, problem: SepProblem) -> Aggregation | None:
    if spec in (None, "none"):
        return None
    if spec == "default":
        return default_aggregation(problem)
    agg = load_aggregation(spec)
    agg.validate_for(problem.agent_model)
    return agg


def run_solver(
    problem: SepProblem,
    algo: str,
    agg: Aggregation | None = None,
    seed: int | None = None,
    cap: int = ENUMERATION_CAP,
    max_evaluations: int = MAX_EVALUATIONS,
) -> tuple[ParetoArchive | Policy, SearchStats]:
    """Dispatch one solver run. PAG variants return a policy, the rest an archive."""
    pruned = algo.endswith("+")
    base = algo.rstrip("+")
    if agg is not None:
        if base == "bf":
            return aggregated_brute_force(problem, agg, pruned, cap=cap)
        return aggregated_search(problem, agg, base, use_pruning=pruned, max_evaluations=max_evaluations)
    if base == "pdt":
        return pdt_search(problem, use_pruning=pruned, max_evaluations=max_evaluations)
    if base == "pag":
        return pag_search(problem, use_pruning=pruned, sweep_seed=seed)
    return bf_pareto(problem, use_pruning=pruned, cap=cap)


def _renderings(problem: SepProblem, policies: list[Policy]) -> str:
    if problem.meta.get("domain") not in ("cliff", "wumpus") or not policies:
        return ""
    scores = [score_policy(problem, p) for p in policies]
    best = int(np.argmax(scores))
    blocks = [f"# entry {i} (score {scores[i]:.4f})\n{render(problem, p)}" for i, p in enumerate(policies)]
    blocks.append(f"# selected: entry {best} (score {scores[best]:.4f})\n{render(problem, policies[best])}")
    return "\n\n".join(blocks) + "\n"


def cmd_solve(args) -> int:
    problem, name = _load(args)
    agg = _aggregation(args.aggregate, problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.sweep_order == "shuffled" else None
    code = 0
    try:
        result, stats = run_solver(problem, args.algo, agg, seed, args.cap, args.max_evaluations)
    except SearchCapExceeded as exc:
        result, stats, code = exc.partial, exc.stats, 2
        print(f"warning: {exc}; writing the partial archive", file=sys.stderr)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if isinstance(result, Policy):
        v_h = policy_evaluation(problem.human_model, result)
        v_a = policy_evaluation(problem.agent_model, result)
        dump(policy_result(result, v_h, v_a), out / "policy.json")
        policies = [result]
        size = 1
    else:
        dump(archive_to_list(result), out / "archive.json")
        policies = result.policies
        size = len(result)
    (out / "stats.csv").write_text(",".join(STATS_COLUMNS) + "\n" + stats.csv_row(name, problem.delta, args.algo))
    text = _renderings(problem, policies)
    if text:
        (out / "trajectories.txt").write_text(text)
    print(f"{args.algo} on {name} at delta={problem.delta}: {size} polic{'y' if size == 1 else 'ies'}, "
          f"{stats.policies_evaluated} evaluated, {stats.wall_time:.2f}s -> {out}")
    return code


def _bench_cell(job) -> list:
    name, delta, algo, repeat, aggregate, cap = job
    problem = domain_problem(name, delta)
    agg = _aggregation(aggregate, problem)
    if algo.rstrip("+") == "bf":
        pruned = algo.endswith("+")
        sets = cluster_action_sets(problem, agg, pruned) if agg else search_action_sets(problem, pruned)
        count = policy_count(sets)
        if count > cap:
            # too many to enumerate: report the size of the space, leave the rest blank
            return [name, delta, algo, count, count, "", "", repeat]
    try:
        result, stats = run_solver(problem, algo, agg, cap=cap)
    except SearchCapExceeded as exc:
        result, stats = exc.partial, exc.stats
    except InfeasibleRootError:
        return [name, delta, algo, 1, 0, 0, "", repeat]
    size = 1 if isinstance(result, Policy) else len(result)
    return [name, delta, algo, stats.policies_evaluated, stats.policies_expanded, size,
            f"{stats.wall_time:.6f}", repeat]


def cmd_benchmark(args) -> int:
    try:
        deltas = [_delta(x) for x in args.deltas.split(",")]
        algos = [_algo(x.strip()) for x in args.algos.split(",")]
    except argparse.ArgumentTypeError as exc:
        raise InputError(str(exc)) from None
    name = args.domain.lower()
    domain_problem(name)  # fail fast on an unknown domain
    aggregate = args.aggregate
    if aggregate is None:
        aggregate = "none" if name == "cs" else "default"
    jobs = [(name, d, a, r, aggregate, args.cap) for r in range(args.repeats) for d in deltas for a in algos]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_bench_cell, jobs))
    else:
        rows = [_bench_cell(j) for j in jobs]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_COLUMNS)
        writer.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return 0


def validate_policies(problem: SepProblem, policies: list[Policy], eps: float = DEFAULT_EPS) -> list[str]:
    """Independent re-check of solver output; returns a list of failure messages."""
    v_star, _ = value_iteration(problem.agent_model)
    failures = []
    humans = []
    for i, pi in enumerate(policies):
        try:
            v = policy_evaluation(problem.agent_model, pi)
        except ValueError as exc:
            failures.append(f"entry {i}: {exc}")
            humans.append(None)
            continue
        bad = np.flatnonzero(v < problem.delta * v_star - eps)
        for s in bad:
            failures.append(
                f"entry {i}: bound violated at state {s} "
                f"(V={v[s]:.6g} < {problem.delta} * {v_star[s]:.6g})"
            )
        humans.append(policy_evaluation(problem.human_model, pi))
    for i, vi in enumerate(humans):
        for j, vj in enumerate(humans):
            if i != j and vi is not None and vj is not None and strictly_dominates(vi, vj, eps):
                failures.append(f"entry {j} is strictly dominated by entry {i}")
    return failures


def cmd_validate(args) -> int:
    problem, _ = _load(args)
    policies = load_result_policies(args.result)
    failures = validate_policies(problem, policies)
    if failures:
        for msg in failures:
            print(f"FAIL {msg}")
        print(f"verdict: FAIL ({len(failures)} problem{'s' if len(failures) != 1 else ''})")
        return 1
    noun = "policy" if len(policies) == 1 else "policies"
    print(f"verdict: PASS ({len(policies)} {noun} checked at delta={problem.delta})")
    return 0


def cmd_export(args) -> int:
    problem = domain_problem(args.domain, args.delta)
    save_problem(problem, args.out)
    if args.aggregation_out:
        dump(default_aggregation(problem).to_dict(), args.aggregation_out)
    return 0


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", help="problem JSON file")
    p.add_argument("--domain", help="built-in replica: cs, cl or wumpus")
    p.add_argument("--delta", type=_delta, help="safety bound in (0, 1]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sepplan", description="Safe explicable planning solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one solver and write its result")
    _add_problem_args(solve)
    solve.add_argument("--algo", type=_algo, required=True)
    solve.add_argument("--aggregate", help="aggregation JSON file, 'default' or 'none'")
    solve.add_argument("--out", default="sepplan-out", help="output directory")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--sweep-order", choices=("ascending", "shuffled"), default="ascending",
                       help="PAG state order; 'shuffled' permutes it with --seed")
    solve.add_argument("--max-evaluations", type=int, default=MAX_EVALUATIONS, help="PDT evaluation budget")
    solve.add_argument("--cap", type=int, default=ENUMERATION_CAP, help="largest policy space to brute force")
    solve.set_defaults(func=cmd_solve)

    bench = sub.add_parser("benchmark", help="evaluation-count sweep over deltas and solvers, as CSV")
    bench.add_argument("--domain", required=True)
    bench.add_argument("--deltas", required=True, help="comma list")
    bench.add_argument("--algos", default="pdt,pdt+,pag,pag+,bf,bf+", help="comma list")
    bench.add_argument("--repeats", type=int, default=1)
    bench.add_argument("--aggregate", help="'default' or 'none' (default: none for cs, default otherwise)")
    bench.add_argument("--cap", type=int, default=ENUMERATION_CAP, help="largest policy space to brute force")
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--out", help="CSV path (stdout if omitted)")
    bench.set_defaults(func=cmd_benchmark)

    val = sub.add_parser("validate", help="re-check a result file from scratch")
    _add_problem_args(val)
    val.add_argument("--result", required=True)
    val.set_defaults(func=cmd_validate)

    exp = sub.add_parser("export", help="write a replica problem (and its default aggregation) as JSON")
    exp.add_argument("--domain", required=True)
    exp.add_argument("--delta", type=_delta, default=1.0)
    exp.add_argument("--out", required=True)
    exp.add_argument("--aggregation-out")
    exp.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = logging.DEBUG if os.environ.get("SEP_LOG", "").lower() == "debug" else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except (InputError, InfeasibleRootError, *INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
