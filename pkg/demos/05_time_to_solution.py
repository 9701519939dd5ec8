"""Time to solution on random QUBO instances of growing size.

TTS is total simulated time over all runs divided by the number of runs that
reached 97% of the best-known value. On small QUBOs that target is met almost
immediately, so we also report the time to reach the best-known value itself.
Best-known values here come from a short greedy-restart search.
"""

import numpy as np

from oscim import IntegrationConfig, default_params, from_qubo, multi_run, objective_value, time_to_solution
from oscim.harness import fit_tts_scaling


def random_qubo(n, seed):
    rng = np.random.default_rng(seed)
    Q = np.where(np.triu(rng.random((n, n)) < 0.1), rng.integers(-100, 101, (n, n)), 0).astype(float)
    return from_qubo(Q + np.triu(Q, 1).T)


def greedy_best(inst, restarts=200, seed=0):
    rng = np.random.default_rng(seed)
    J, h = inst.dense_J(), inst.h
    best = -np.inf
    for _ in range(restarts):
        x = rng.choice([-1.0, 1.0], inst.n)
        while True:
            gain = -x * (h / 2 + J @ x)
            i = int(np.argmax(gain))
            if gain[i] <= 0:
                break
            x[i] = -x[i]
        best = max(best, objective_value(inst, x))
    return best


cfg = IntegrationConfig(t_end=10e-6, sample_interval=1e-9)
sizes, tts = [30, 60, 120], []
for n in sizes:
    inst = random_qubo(n, n)
    best_known = greedy_best(inst)
    st = multi_run(inst, default_params(inst), cfg, k=5, threshold=best_known, stop_at_threshold=True)
    rep97 = time_to_solution(st.results, best_known)
    rep100 = time_to_solution(st.results, best_known, fraction=1.0)
    tts.append(rep97.tts)
    print(f"n = {n:3d}: best-known {best_known:g}; 97%: {rep97.successes}/{rep97.total_runs} runs, "
          f"TTS {rep97.tts * 1e9:.0f} ns; 100%: {rep100.successes}/{rep100.total_runs} runs, "
          f"TTS {rep100.tts * 1e9:.0f} ns")

a, slope, d = fit_tts_scaling(sizes, tts)
print(f"97% fit: log10(TTS in 1 GHz cycles) = {a:.2f} + sqrt(N) / {d:.1f}")
