"""Solve a small weighted MaxCut and compare with exhaustive search.

The readout at each sample is sign(A_s). The objective trace shows how quickly
the network reaches good cuts and how it keeps exploring afterwards.
"""

import numpy as np

from oscim import IntegrationConfig, brute_force_optimum, default_params, from_maxcut, multi_run

rng = np.random.default_rng(3)
n = 18
edges = [(i + 1, j + 1, int(rng.integers(1, 4))) for i in range(n) for j in range(i + 1, n)
         if rng.random() < 0.3]
inst = from_maxcut(n, edges)
_, optimum = brute_force_optimum(inst)
print(f"{n} vertices, {len(edges)} edges, optimal cut {optimum:g}")

stats = multi_run(inst, default_params(inst), IntegrationConfig(t_end=20e-6), k=5, threshold=optimum)
print(f"best {stats.best:g}, median {stats.median:g}, quartiles {stats.p25:g} / {stats.p75:g}")

run = stats.results[int(np.argmax(stats.values))]
print(f"first reached the optimum at t = {run.first_cross_time * 1e6:.2f} us" if run.first_cross_time
      else "this run never reached the optimum")
print("t (us)  cut  flips")
for t, obj, flips in list(zip(run.trace_t, run.trace_objective, run.trace_flips))[::40]:
    print(f"{t * 1e6:6.2f} {obj:5.0f} {flips:5d}")
