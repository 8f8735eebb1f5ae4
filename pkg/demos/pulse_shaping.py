"""
Shaping exchange pulses into a two-plaquette entangling gate
============================================================

Four boundary spins (two per plaquette) carry five experimentally available
controls: the two intra-pair exchanges, a zz cross-coupling, and two global
transverse fields. Their nested commutators span an 80-dimensional algebra
on the 16-dimensional boundary space, enough to reach the entangling gate
1 - 2 P_T (x) P_T exactly. A quasi-Newton descent over smooth sine-series
pulse coefficients then finds the gate using the slice-exact gradient.

The full search below takes about a minute; it is stopped at infidelity
1e-4 to keep the demo brief, and keeps going to below 1e-7 if you drop the
target.
"""

import numpy as np

from plaqgate.optctrl import (
    PulseParams,
    control_operators,
    gradient_check,
    lie_closure_dimension,
    optimize,
    robustness_sweep,
)

# controllability: the closure saturates at 80 = dim of the reachable algebra
ops = control_operators().operators
print(f"Lie closure of all five controls: {lie_closure_dimension(ops)}")
print(f"Lie closure of one exchange alone: {lie_closure_dimension([ops[0]])}")

# too small a pulse basis stalls far from the gate: controllability is about
# the algebra, but reaching the gate in fixed time needs enough harmonics
stalled = optimize(1, n_harmonics=10, restarts=1, max_iter=150, steps=200,
                   polish_steps=0, target_eps=1e-6)
print(f"\n10-harmonic search stalls at infidelity {stalled.infidelity:.1e}")

# the full 20-harmonic basis converges; the descent stops at the requested
# level (here 1e-4, after ~700 iterations)
result = optimize(6, restarts=1, target_eps=1e-4, polish_steps=0)
print(f"20-harmonic search: infidelity {result.infidelity:.2e} "
      f"after {result.iterations} iterations")

# the analytic gradient agrees with central finite differences
pulse = PulseParams(result.x_final, 1.0)
print(f"gradient check at the optimum: {gradient_check(pulse, steps=200):.2e} "
      "(norm-relative)")

# sensitivity to a global miscalibration (1 - delta) of every coupling:
# flat at the achieved baseline, then quadratic growth
deltas = [0.0, 1e-3, 1e-2, 3e-2, 1e-1]
infs = robustness_sweep(pulse, deltas, steps=500)
print("\nmiscalibration response")
for delta, inf in zip(deltas, infs):
    print(f"  delta = {delta:7.0e}: infidelity = {inf:.3e}")
