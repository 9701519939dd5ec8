"""Thermal noise and pump loss on a small QUBO.

A finite pump quality factor Q_p adds a loss that breaks the exact Lagrange
correspondence; 300 K Johnson noise enters through the coupling and loss
resistors. We compare the noiseless median with Langevin runs at several Q_p.
"""

import numpy as np

from oscim import IntegrationConfig, default_params, from_qubo, multi_run
from oscim.circuit import pump_resistance

rng = np.random.default_rng(1)
n = 50
upper = np.triu(rng.random((n, n)) < 0.1)
Q = np.where(upper, rng.integers(-100, 101, size=(n, n)), 0).astype(float)
inst = from_qubo(Q + np.triu(Q, 1).T)
p = default_params(inst)
cfg = IntegrationConfig()

base = multi_run(inst, p, cfg, k=10)
print(f"noiseless           median {base.median:g}  best {base.best:g}")
for qp in (5000, 500, 100):
    lossy = p.replace(R_p=pump_resistance(qp, p))
    st = multi_run(inst, lossy, cfg, k=10, mode="sde")
    print(f"300 K, Q_p = {qp:<5d}  median {st.median:g}  best {st.best:g}")
