"""Real-time evolution ``exp(-iHt)|psi>`` for Pauli-sum Hamiltonians.

Two routes: :func:`evolve_krylov` (matrix-free Lanczos with adaptive
substeps, used for full registers) and :func:`evolve_dense` (full
diagonalisation, used as the reference on small registers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import EvolutionError, ResourceLimitError
from .pauli import PauliSum, n_qubits_of

DENSE_MAX_QUBITS = 10


@dataclass(frozen=True)
class EvolverConfig:
    tolerance: float = 1e-10
    max_krylov_dim: int = 30
    max_substeps: int = 10**6

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_krylov_dim < 2:
            raise ValueError("max_krylov_dim must be at least 2")
        if self.max_substeps < 1:
            raise ValueError("max_substeps must be at least 1")


def _check(state: np.ndarray, h: PauliSum) -> np.ndarray:
    if state.ndim != 1:
        raise ValueError("expected a single statevector")
    if n_qubits_of(state) != h.n_qubits:
        raise ValueError(f"dimension mismatch: {n_qubits_of(state)}-qubit state, {h.n_qubits}-qubit Hamiltonian")
    return np.asarray(state, dtype=complex)


def _lanczos(h: PauliSum, v0: np.ndarray, m_max: int):
    """Lanczos with full reorthogonalisation.

    Returns the basis (rows), the tridiagonal coefficients and the residual
    norm ``beta_m`` coupling out of the subspace (0 on happy breakdown).
    """
    dim = v0.shape[0]
    m_max = min(m_max, dim)
    basis = np.empty((m_max, dim), dtype=complex)
    alpha = np.empty(m_max)
    beta = np.empty(m_max)
    basis[0] = v0
    for j in range(m_max):
        w = h.matvec(basis[j])
        alpha[j] = np.vdot(basis[j], w).real
        w -= alpha[j] * basis[j]
        if j > 0:
            w -= beta[j - 1] * basis[j - 1]
        # two passes of classical Gram-Schmidt against the whole basis
        for _ in range(2):
            w -= basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        b = np.linalg.norm(w)
        beta[j] = b
        if b < 1e-13 * max(1.0, abs(alpha[j])):
            return basis[: j + 1], alpha[: j + 1], beta[:j], 0.0
        if j + 1 < m_max:
            basis[j + 1] = w / b
    return basis, alpha, beta[: m_max - 1], beta[m_max - 1]


def evolve_krylov(state: np.ndarray, h: PauliSum, t: float, cfg: EvolverConfig = EvolverConfig()) -> np.ndarray:
    """Return ``exp(-i h t) state`` to within ``cfg.tolerance`` in 2-norm.

    The horizon is split adaptively: each substep builds a fresh Krylov space
    and shrinks its length until the standard a-posteriori residual estimate
    fits the substep's share of the tolerance. Negative ``t`` evolves backwards.
    """
    psi = _check(state, h).copy()
    if not math.isfinite(t):
        raise ValueError("evolution time must be finite")
    norm0 = np.linalg.norm(psi)
    if t == 0 or norm0 == 0 or len(h) == 0:
        return psi
    total = abs(t)
    sign = 1.0 if t > 0 else -1.0
    done = 0.0
    step = total
    substeps = 0
    last_err = None
    while done < total:
        substeps += 1
        if substeps > cfg.max_substeps:
            raise EvolutionError(
                f"Krylov evolution did not reach t={t} within {cfg.max_substeps} substeps",
                residual=last_err,
            )
        nrm = np.linalg.norm(psi)
        basis, a, b, b_out = _lanczos(h, psi / nrm, cfg.max_krylov_dim)
        evals, evecs = eigh_tridiagonal(a, b) if len(a) > 1 else (a.copy(), np.ones((1, 1)))
        first = evecs[0].conj()
        step = min(step, total - done)
        while True:
            coeffs = evecs @ (np.exp(-1j * sign * step * evals) * first)
            err = nrm * b_out * abs(coeffs[-1])
            budget = cfg.tolerance * step / total
            if err <= budget or b_out == 0.0:
                break
            step *= 0.5
            if step < 1e-300:
                raise EvolutionError("Krylov substep underflow", residual=err)
        last_err = err
        psi = nrm * (coeffs @ basis)
        done += step
        step = min(2 * step, total - done) if done < total else step
    return psi


def evolve_dense(state: np.ndarray, h: PauliSum, t: float) -> np.ndarray:
    """Exact evolution by diagonalising the dense matrix (registers of at most 10 qubits)."""
    if h.n_qubits > DENSE_MAX_QUBITS:
        raise ResourceLimitError(f"dense evolution limited to {DENSE_MAX_QUBITS} qubits, got {h.n_qubits}")
    psi = _check(state, h)
    if t == 0 or len(h) == 0:
        return psi.copy()
    evals, evecs = np.linalg.eigh(h.to_dense())
    return evecs @ (np.exp(-1j * t * evals) * (evecs.conj().T @ psi))


class SpectralEvolver:
    """Cached eigendecomposition of one Hamiltonian; exact evolution for any ``t``."""

    def __init__(self, h: PauliSum, max_qubits: int = 12):
        if h.n_qubits > max_qubits:
            raise ResourceLimitError(f"spectral evolver limited to {max_qubits} qubits, got {h.n_qubits}")
        self.n_qubits = h.n_qubits
        self.energies, self.vectors = np.linalg.eigh(h.to_dense())

    def __call__(self, state: np.ndarray, t: float) -> np.ndarray:
        return self.vectors @ (np.exp(-1j * t * self.energies) * (self.vectors.conj().T @ state))
