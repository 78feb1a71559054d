"""
Two qubits, one ZZ coupling
===========================

The smallest partitioned problem: two single-qubit subsystems, no local
dynamics, V = lam Z(x)Z, both qubits start in |+>. Everything is known
in closed form, so this is where to look first.
"""

import math

import numpy as np

from pqsim import PauliString, PauliSum
from pqsim.engine import decompose, estimate, estimate_purity
from pqsim.models import InteractionTerm, ObservableSum, PartitionedSystem
from pqsim.pauli import IDENTITY

lam = math.pi / 8
X, Z = PauliString.from_label("X"), PauliString.from_label("Z")
system = PartitionedSystem((1, 1), (PauliSum(1), PauliSum(1)), (InteractionTerm(lam, (Z, Z)),))
plus = np.array([1, 1], dtype=complex) / math.sqrt(2)

# %% the jump process: rate 2 lam, weight e^{2 lam t}
d = decompose(system)
print("rate", d.rate, " overhead C(1) =", round(d.overhead(1.0), 4))
print("jump phases (ket, bra):", d.phase_table())

# %% <X_1>(t) should follow cos(2 lam t)
obs = [ObservableSum("X1", ((1.0, (X, IDENTITY)),))]
grid = np.linspace(0.25, 1.0, 4)
for r in estimate(system, [plus, plus], obs, 1.0, grid, 20_000, seed=1):
    print(f"t={r.time:.2f}  {r.mean:+.4f} +- {r.stderr:.4f}   exact {math.cos(2 * lam * r.time):+.4f}")

# %% purity of qubit 1 at lam t = pi/8 is exactly 3/4
p = estimate_purity(system, [plus, plus], 0, 1.0, 20_000, seed=2)
print(f"purity {p.mean:.4f} +- {p.stderr:.4f}   exact 0.75")
