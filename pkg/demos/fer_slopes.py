"""
Error-floor slopes on the BSC
=============================

On a log-log plot the frame error rate of Gallager B falls like alpha**i,
where i is the smallest number of errors that makes the decoder fail.
Removing the weight-3 failures should steepen the Tanner curve from 3 to 4.
"""

from tscover import (Bsc, StopRule, SwapPlan, build_cover, fit_slope, load_code, simulate_fer)
from tscover.data import data_path

H = load_code("tanner")
plan = SwapPlan.from_json(data_path("tanner_cover_plan.json").read_text(), H)
M = build_cover(plan).matrix

# Short budget so this finishes in a couple of minutes; raise target_failures
# for tighter intervals.
stop = StopRule(max_frames=2 * 10 ** 7, target_failures=30)

for name, code, alphas in [("tanner", H, [0.005, 0.007, 0.01]),
                           ("cover", M, [0.01, 0.015, 0.02])]:
    points = simulate_fer(code.graph, [Bsc(a) for a in alphas], stop=stop, seed=1, code_id=name)
    for p in points:
        lo, hi = p.ci95
        print(f"{name:7s} alpha={p.channel.alpha:.3f} fer={p.fer:.2e} [{lo:.1e}, {hi:.1e}]")
    est = fit_slope(points, max_ci_log_width=1.0)
    print(name, "slope", round(est.slope, 2))

# For tiny codes the whole FER polynomial is available by enumeration.
from tscover import exact_fer_bsc
from tscover.code import SparseBitMatrix
import numpy as np
toy = SparseBitMatrix.from_dense(np.array([[0, 1, 0, 0, 0], [0, 0, 1, 1, 0], [1, 0, 0, 0, 1],
                                           [0, 0, 1, 0, 0], [1, 0, 0, 1, 0], [0, 1, 0, 0, 1],
                                           [1, 0, 0, 0, 0], [0, 1, 0, 1, 0], [0, 0, 1, 0, 1]],
                                          dtype=np.uint8))
ex = exact_fer_bsc(toy.graph)
print(ex.counts, ex.fer(np.array([0.01, 0.02, 0.05])))
