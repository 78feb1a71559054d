"""Per-subsystem propagators used between insertions.

Each propagator offers a single-state path (``evolve``, computational basis)
used by the reference trajectory runner, and a batched path on rows of a
``(batch, 2^n)`` array held in a propagator-specific picture that does not
change between insertions (``to_work``, ``insert_at``, ``readout``).
"""

from __future__ import annotations

import numpy as np

from ..errors import ResourceLimitError, UnsupportedConfigurationError
from ..evolve import EvolverConfig, evolve_krylov
from ..pauli import PauliString, PauliSum

SPECTRAL_MAX_QUBITS = 12


class KrylovPropagator:
    """Matrix-free reference: each segment is a fresh Krylov exponential."""

    def __init__(self, h: PauliSum, cfg: EvolverConfig = EvolverConfig()):
        self.h = h
        self.cfg = cfg
        self.n_qubits = h.n_qubits

    def snap(self, t):
        return t

    def evolve(self, state: np.ndarray, t0: float, t1: float) -> np.ndarray:
        return evolve_krylov(state, self.h, t1 - t0, self.cfg)


class SpectralPropagator:
    """Exact propagation from the eigendecomposition of the local Hamiltonian.

    Batched rows are kept in the interaction picture ``e^{iEt} V^+ a(t)``,
    which is constant between insertions; an insertion at time ``t`` costs
    two elementwise phases around one dense product with ``V^+ P V``.
    """

    def __init__(self, h: PauliSum):
        if h.n_qubits > SPECTRAL_MAX_QUBITS:
            raise ResourceLimitError(
                f"subsystem of {h.n_qubits} qubits exceeds the {SPECTRAL_MAX_QUBITS}-qubit propagator guard"
            )
        self.n_qubits = h.n_qubits
        self.energies, self.vectors = np.linalg.eigh(h.to_dense())
        self._vt = np.ascontiguousarray(self.vectors.T)
        self._vc = np.ascontiguousarray(self.vectors.conj())
        self._insertions: dict[PauliString, np.ndarray] = {}

    def snap(self, t):
        return t

    def evolve(self, state, t0, t1):
        w = self.vectors.conj().T @ state
        return self.vectors @ (np.exp(-1j * (t1 - t0) * self.energies) * w)

    def to_work(self, rows: np.ndarray) -> np.ndarray:
        return rows @ self._vc

    def _matrix(self, p: PauliString) -> np.ndarray:
        m = self._insertions.get(p)
        if m is None:
            # rows hold w^T, so w -> (V^+ P V) w becomes rows @ (V^+ P V)^T
            full = self.vectors.conj().T @ p.to_dense() @ self.vectors
            m = self._insertions[p] = np.ascontiguousarray(full.T)
        return m

    def insert_at(self, rows: np.ndarray, p: PauliString, t: np.ndarray) -> np.ndarray:
        ph = np.exp(-1j * np.multiply.outer(t, self.energies))
        return ((rows * ph) @ self._matrix(p)) * ph.conj()

    def readout(self, rows: np.ndarray, t: float) -> np.ndarray:
        return rows @ (np.exp(-1j * t * self.energies)[:, None] * self._vt)


class TrotterPropagator:
    """First-order two-layer steps of fixed length ``dt``.

    One step applies the diagonal (Z-type) terms, then the remaining terms.
    Insertions are placed at the start of the step containing them, which
    is exact when every inserted factor is diagonal: it then commutes with
    the diagonal layer, where the cross-cut coupling lives. Batched rows are
    kept as ``U^{-k} a`` after ``k`` steps.
    """

    def __init__(self, h: PauliSum, steps: int, horizon: float):
        if steps < 1 or not horizon > 0:
            raise ValueError("trotter: need steps >= 1 and a positive horizon")
        self.n_qubits = h.n_qubits
        self.steps = steps
        self.dt = horizon / steps
        self.step_matrix = trotter_step_matrix(h, self.dt)
        powers = [np.eye(1 << h.n_qubits, dtype=complex)]
        for _ in range(steps):
            powers.append(self.step_matrix @ powers[-1])
        self._powers = powers
        self._insertions: dict[tuple[PauliString, int], np.ndarray] = {}

    def step_index(self, t) -> np.ndarray:
        return np.rint(np.asarray(t, dtype=float) / self.dt).astype(np.int64)

    def containing_step(self, t) -> np.ndarray:
        k = np.floor(np.asarray(t, dtype=float) / self.dt + 1e-12).astype(np.int64)
        return np.clip(k, 0, self.steps - 1)

    def snap(self, t):
        out = self.containing_step(t) * self.dt
        return float(out) if np.ndim(out) == 0 else out

    def evolve(self, state, t0, t1):
        k0, k1 = int(self.step_index(t0)), int(self.step_index(t1))
        for _ in range(k0, k1):
            state = self.step_matrix @ state
        return state

    def to_work(self, rows):
        return rows

    def _matrix(self, p: PauliString, k: int) -> np.ndarray:
        m = self._insertions.get((p, k))
        if m is None:
            u = self._powers[k]
            full = u.conj().T @ p.to_dense() @ u
            m = self._insertions[(p, k)] = np.ascontiguousarray(full.T)
        return m

    def insert_at(self, rows, p: PauliString, t):
        k = self.containing_step(t)
        out = np.empty_like(rows)
        for kk in np.unique(k):
            sel = k == kk
            out[sel] = rows[sel] @ self._matrix(p, int(kk))
        return out

    def readout(self, rows, t: float):
        k = int(self.step_index(t))
        if k > self.steps:
            raise ValueError(f"trotter: time {t} beyond the {self.steps}-step horizon")
        return rows @ self._powers[k].T


def split_layers(h: PauliSum) -> tuple[PauliSum, PauliSum]:
    diag = [(c, p) for c, p in h if p.is_diagonal()]
    rest = [(c, p) for c, p in h if not p.is_diagonal()]
    return PauliSum(h.n_qubits, diag), PauliSum(h.n_qubits, rest)


def trotter_step_matrix(h: PauliSum, dt: float) -> np.ndarray:
    """Dense ``exp(-i dt H_rest) exp(-i dt H_diag)``."""
    if h.n_qubits > SPECTRAL_MAX_QUBITS:
        raise ResourceLimitError(f"trotter step limited to {SPECTRAL_MAX_QUBITS}-qubit subsystems")
    diag, rest = split_layers(h)
    e, v = np.linalg.eigh(rest.to_dense())
    u_rest = (v * np.exp(-1j * dt * e)) @ v.conj().T
    return u_rest * np.exp(-1j * dt * diag.diagonal())[None, :]


def check_trotter_compatible(interactions) -> None:
    for term in interactions:
        if not all(f.is_diagonal() for f in term.factors):
            raise UnsupportedConfigurationError(
                "trotter mode requires diagonal (Z-type) interaction terms; "
                f"{term!r} does not commute with the diagonal layer"
            )
