"""End-to-end orchestration: feasibility -> degeneracy -> solver -> recovery."""

import time
from dataclasses import dataclass

import numpy as np

from .feasibility import FeasibilityReport, compute_p_low
from .rbal import SolveReport, SolverConfig, initial_state, objective_value, solve
from .recovery import BeamformingSolution, extract_rank_one, sensing_factor
from .reduction import build_reduced, check_degenerate, precompute_dual
from .scenario import evaluate_sinr


@dataclass
class PipelineResult:
    feasibility: FeasibilityReport
    degenerate: bool
    solution: BeamformingSolution | None
    solve_report: SolveReport | None
    reduced_objective: float | None
    setup_seconds: float
    iter_seconds: float


def witness_solution(scenario, channel, verdict, materialize_full=True):
    """BeamformingSolution for the closed-form degenerate optimum.

    The witness beamformers all point along the chosen channel column and
    the total covariance is the isotropic (P_T / Nt) I.
    """
    channel = np.asarray(channel)
    n_tx = scenario.n_tx
    h_l = channel[:, verdict.chosen_index]
    w = [np.sqrt(a_k) * h_l for a_k in verdict.witness_scales]
    sensing_cov = verdict.witness[-1]
    full_cov = (scenario.power_budget / n_tx) * np.eye(n_tx) if materialize_full else None
    objective = n_tx**2 / scenario.power_budget
    sinr = evaluate_sinr(channel, np.column_stack(w), sensing_cov, scenario.noise_power)
    return BeamformingSolution(
        w=w,
        sensing_cov=sensing_cov,
        sensing_factor=sensing_factor(sensing_cov),
        full_cov=full_cov,
        objective=objective,
        sinr=sinr,
    )


def solve_scenario(scenario, channel, config=None, materialize_full=True):
    """Feasibility check, degeneracy check, then closed form or iterative solve.

    Infeasible scenarios return early with solution=None.  Setup timing covers
    everything up to (and excluding) the solver loop.
    """
    config = config or SolverConfig()
    t0 = time.perf_counter()
    report = compute_p_low(scenario, channel)
    if not report.feasible:
        elapsed = time.perf_counter() - t0
        return PipelineResult(report, False, None, None, None, elapsed, 0.0)

    verdict = check_degenerate(scenario, channel)
    if verdict.degenerate_condition_holds:
        solution = witness_solution(scenario, channel, verdict, materialize_full)
        elapsed = time.perf_counter() - t0
        return PipelineResult(report, True, solution, None, solution.objective, elapsed, 0.0)

    instance = build_reduced(scenario, channel)
    dual = precompute_dual(instance, config.delta)
    init = initial_state(instance, p_low=report.p_low)
    setup_seconds = time.perf_counter() - t0

    t1 = time.perf_counter()
    state, solve_report = solve(instance, dual, config, init=init)
    iter_seconds = time.perf_counter() - t1

    solution = extract_rank_one(
        state.x, instance, channel=channel, materialize_full=materialize_full
    )
    reduced_objective = objective_value(state, instance)
    return PipelineResult(
        feasibility=report,
        degenerate=False,
        solution=solution,
        solve_report=solve_report,
        reduced_objective=reduced_objective,
        setup_seconds=setup_seconds,
        iter_seconds=iter_seconds,
    )
