"""Explicit decomposition of the interaction into Pauli insertions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..models import InteractionTerm, PartitionedSystem


@dataclass(frozen=True)
class ExplicitDecomposition:
    """``V(dt)[rho] = rho - i dt sum_j lam_j (V_j rho - rho V_j)`` as a jump process.

    Jumps arrive at rate ``2 * lambda_total``; each picks term ``j`` with
    probability ``|lam_j| / lambda_total`` and the ket or bra side with
    probability 1/2. A ket insertion multiplies the running phase by
    ``-i sign(lam_j)``, a bra insertion by ``+i sign(lam_j)``.
    """

    terms: tuple[InteractionTerm, ...]
    lambda_total: float
    term_probs: np.ndarray
    cumulative: np.ndarray

    @property
    def rate(self) -> float:
        return 2.0 * self.lambda_total

    def overhead(self, t: float) -> float:
        return math.exp(self.rate * t)

    def jump_phase(self, term: int, side: int) -> complex:
        """Phase factor of one insertion; ``side`` 0 is ket, 1 is bra."""
        s = 1.0 if self.terms[term].lam > 0 else -1.0
        return complex(0.0, -s) if side == 0 else complex(0.0, s)

    def phase_table(self) -> np.ndarray:
        """``table[j, side]`` of insertion phases."""
        return np.array([[self.jump_phase(j, 0), self.jump_phase(j, 1)] for j in range(len(self.terms))])


def decompose(system: PartitionedSystem) -> ExplicitDecomposition:
    terms = tuple(system.interactions)
    lam = float(sum(abs(t.lam) for t in terms))
    if lam > 0:
        probs = np.array([abs(t.lam) / lam for t in terms])
        cum = np.cumsum(probs)
        cum[-1] = 1.0
    else:
        probs = np.zeros(0)
        cum = np.zeros(0)
    return ExplicitDecomposition(terms, lam, probs, cum)
