"""
Truncating the expansion
========================

Dyson mode keeps at most k jumps. The bias falls off like the tail of a
Poisson series in rate*T; at 2e4 samples it drops under the noise by k = 2.
"""

import numpy as np

from pqsim.engine import estimate
from pqsim.models import TFIM, build_initial, build_observables, partition
from pqsim.verify import dyson_cost, dyson_error_bound, interaction_norm, oracle_observables

spec = TFIM(4, h=0.7)
system = partition(spec, [2, 2])
psi = build_initial(spec, system, "all-zero")
obs = build_observables(spec, ["magnetization", "zz_nn"], system)
T = 0.5 / system.lambda_total  # rate * T = 1
v = interaction_norm(system)
exact = oracle_observables(system.reassemble(), system, psi, obs, [T])[:, 0]

for k in range(5):
    est = estimate(system, psi, obs, T, [T], 20_000, seed=5, mode="dyson", dyson_order=k)
    err = np.max(np.abs([r.mean for r in est] - exact))
    print(f"k={k}  error {err:.4f}  (stderr {max(r.stderr for r in est):.4f})  "
          f"C_k {dyson_cost(k, system.lambda_total, T):.3f}  envelope {dyson_error_bound(k, v, T):.2e}")
