#!/usr/bin/env python3
"""Objective and runtime versus the number of users at fixed Nt.

Seeded Monte-Carlo average of the trace-inverse objective and of the solver
runtime.  Feasibility is essentially guaranteed at the default budget; any
infeasible draw is skipped and reported.
"""

import time

import numpy as np

from crbeam.pipeline import solve_scenario
from crbeam.scenario import Scenario, generate_channel

N_TX = 64
USERS = [4, 6, 8, 10, 12, 14, 16]
TRIALS = 5
BASE_SEED = 1

print(f"Nt={N_TX}, {TRIALS} trials per point, base seed {BASE_SEED}")
print(f"{'K':>4} {'mean_crb':>12} {'mean_iters':>11} {'mean_solve_s':>13} {'solved':>7}")
for k in USERS:
    scenario = Scenario(N_TX, k, 100.0, np.full(k, 10.0), 1.0)
    objectives, iters, seconds = [], [], []
    for trial in range(TRIALS):
        channel = generate_channel(scenario, BASE_SEED ^ trial)
        t0 = time.perf_counter()
        result = solve_scenario(scenario, channel)
        elapsed = time.perf_counter() - t0
        if not result.feasibility.feasible:
            print(f"  K={k} trial {trial}: infeasible draw, skipped")
            continue
        objectives.append(result.solution.objective)
        iters.append(0 if result.degenerate else result.solve_report.iterations)
        seconds.append(elapsed)
    print(
        f"{k:>4} {np.mean(objectives):>12.6f} {np.mean(iters):>11.0f} "
        f"{np.mean(seconds):>13.3f} {len(objectives):>4}/{TRIALS}"
    )
