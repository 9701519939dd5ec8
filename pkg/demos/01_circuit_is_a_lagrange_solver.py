"""The oscillator network integrates the primal-dual multiplier flow.

We draw a random Ising instance and a random circuit state, map the state to
algorithm coordinates (x = A_s / A_sat and a multiplier per spin), and compare
the circuit's velocities with the abstract flow

    dx/dt = -kappa * dL/dx,    dlambda/dt = kappa' * (1 - x^2)

using the scalings derived from the circuit parameters.
"""

import numpy as np

from oscim import IsingInstance, default_params, lagrange_params
from oscim.circuit import map_to_algorithm
from oscim.dynamics import circuit_to_algorithm_rate, mm_rhs
from oscim.state import OscillatorState

rng = np.random.default_rng(0)
n = 20
A = np.triu(rng.choice([-1.0, 0.0, 1.0], size=(n, n)), 1)
inst = IsingInstance(A + A.T)

for method in ("plain", "augmented"):
    p = default_params(inst, method)
    lp = lagrange_params(p)
    print(f"{method}: R = {p.R:.1f} ohm, kappa = {lp.kappa:.3e}/s, "
          f"kappa' = {lp.kappa_prime:.3e}/s, alpha = {lp.alpha:.3f}")
    state = OscillatorState(rng.uniform(-1.5, 1.5, n) * p.A_sat, rng.uniform(0, 0.3, n))
    dx_circuit, dl_circuit = circuit_to_algorithm_rate(state, inst, p)
    dx_mm, dl_mm = mm_rhs(map_to_algorithm(state, inst, p), inst, lp.kappa, lp.kappa_prime, lp.alpha)
    print(f"  max |dx| mismatch      {np.max(np.abs(dx_circuit - dx_mm)) / np.max(np.abs(dx_mm)):.1e}")
    print(f"  max |dlambda| mismatch {np.max(np.abs(dl_circuit - dl_mm)) / np.max(np.abs(dl_mm)):.1e}")

# The multipliers move much faster than the spins, as the heuristic for
# weak-duality problems asks. The ratio grows as R^2 with the coupling resistance.
p = default_params(inst)
lp = lagrange_params(p)
print(f"dual / primal rate ratio kappa'/kappa = {lp.kappa_prime / lp.kappa:.0f}")
