"""Reference values: exact full-register dynamics, cost bounds and closed-form envelopes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
import scipy.linalg

from .errors import ResourceLimitError
from .evolve import EvolverConfig, evolve_krylov
from .models import InteractionTerm, ObservableSum, PartitionedSystem, full_state
from .pauli import IDENTITY, BasisProjector, PauliString, PauliSum, apply_operator, n_qubits_of

ORACLE_MAX_QUBITS = 20
BOUND_MAX_DIMENSION = 2**16


# -- exact full-register dynamics -------------------------------------------------------------


def _guard(n: int) -> None:
    if n > ORACLE_MAX_QUBITS:
        raise ResourceLimitError(f"oracle limited to {ORACLE_MAX_QUBITS} qubits, got {n}")


def oracle_states(
    full: PauliSum,
    initial: np.ndarray,
    grid: Sequence[float],
    cfg: EvolverConfig = EvolverConfig(),
    trotter_steps: int | None = None,
    horizon: float | None = None,
) -> Iterator[np.ndarray]:
    """Yield ``exp(-iHt)|psi0>`` at each ascending grid time.

    With ``trotter_steps`` the evolution is the first-order product of
    ``steps`` two-layer steps of length ``horizon / steps`` (diagonal terms,
    then the rest); grid times must then be step multiples.
    """
    _guard(full.n_qubits)
    psi = np.asarray(initial, dtype=complex)
    if n_qubits_of(psi) != full.n_qubits:
        raise ValueError("initial state does not match the Hamiltonian register")
    grid = [float(t) for t in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])) or (grid and grid[0] < 0):
        raise ValueError("grid must be non-negative and strictly ascending")
    if trotter_steps is None:
        cur = 0.0
        for t in grid:
            psi = evolve_krylov(psi, full, t - cur, cfg)
            cur = t
            yield psi
        return
    dt = horizon / trotter_steps
    diag = PauliSum(full.n_qubits, [(c, p) for c, p in full if p.is_diagonal()])
    rest = PauliSum(full.n_qubits, [(c, p) for c, p in full if not p.is_diagonal()])
    phases = np.exp(-1j * dt * diag.diagonal())
    done = 0
    for t in grid:
        k = int(round(t / dt))
        if abs(k * dt - t) > 1e-9 * max(1.0, dt):
            raise ValueError(f"trotter oracle: grid time {t} is not a multiple of {dt:g}")
        for _ in range(done, k):
            psi = evolve_krylov(phases * psi, rest, dt, cfg)
        done = k
        yield psi


def _expect(psi: np.ndarray, op) -> float:
    return float(np.vdot(psi, apply_operator(psi, op)).real)


def oracle_evolve_expect(
    full: PauliSum,
    initial: np.ndarray,
    observable,
    grid: Sequence[float],
    cfg: EvolverConfig = EvolverConfig(),
    trotter_steps: int | None = None,
    horizon: float | None = None,
) -> np.ndarray:
    """Exact ``<O(t)>`` on the grid; ``observable`` may also be a list (rows of the result)."""
    many = isinstance(observable, (list, tuple))
    ops = list(observable) if many else [observable]
    out = np.array(
        [[_expect(psi, op) for op in ops] for psi in oracle_states(full, initial, grid, cfg, trotter_steps, horizon)]
    ).T
    return out if many else out[0]


def embed_local_operator(system: PartitionedSystem, l: int, op):
    """Full-register version of a local factor (projectors become index masks)."""
    off, size, n = system.offsets[l], system.subsystem_sizes[l], system.n_qubits
    if op is IDENTITY or op is None:
        return None
    if isinstance(op, (PauliString, PauliSum)):
        return op.embed(off, n)
    if isinstance(op, BasisProjector):
        idx = np.arange(1 << n)
        return ((idx >> off) & ((1 << size) - 1)) == op.index
    raise TypeError(f"unsupported local operator {type(op).__name__}")


def observable_expectation(system: PartitionedSystem, obs: ObservableSum, psi: np.ndarray) -> float:
    """``<psi|O|psi>`` for a product-form observable on the full register."""
    val = obs.constant
    for c, ops in obs.terms:
        phi = psi
        for l, op in enumerate(ops):
            full_op = embed_local_operator(system, l, op)
            if full_op is None:
                continue
            phi = np.where(full_op, phi, 0) if isinstance(full_op, np.ndarray) else apply_operator(phi, full_op)
        val += c * np.vdot(psi, phi).real
    return float(val)


def oracle_observables(
    full: PauliSum,
    system: PartitionedSystem,
    initial_states: Sequence[np.ndarray],
    observables: Sequence[ObservableSum],
    grid: Sequence[float],
    cfg: EvolverConfig = EvolverConfig(),
    trotter_steps: int | None = None,
    horizon: float | None = None,
) -> np.ndarray:
    """``(n_obs, n_grid)`` exact values of partitioned observables."""
    _guard(full.n_qubits)
    psi0 = full_state(initial_states)
    cols = [
        [observable_expectation(system, o, psi) for o in observables]
        for psi in oracle_states(full, psi0, grid, cfg, trotter_steps, horizon)
    ]
    return np.array(cols).T


# -- Condition 1 and the trace-norm lower bound ---------------------------------------------------


@dataclass(frozen=True)
class Condition1Report:
    holds: bool
    support: tuple[int, ...]
    n_terms: int
    min_weight: int
    min_qubits: int
    term_limit: int
    violations: tuple[str, ...] = field(default=())

    def __bool__(self):
        return self.holds


def check_condition1(interactions: Sequence[InteractionTerm], subsystem_sizes: Sequence[int]) -> Condition1Report:
    """Tracelessness and pairwise orthogonality of every term's factors on the joint support.

    ``term_limit`` is ``3^k * C(n, k)`` for the smallest factor weight ``k``
    and the smallest subsystem ``n`` in the support; a true verdict implies
    ``n_terms <= term_limit``.
    """
    sizes = tuple(subsystem_sizes)
    for t in interactions:
        if tuple(f.n_qubits for f in t.factors) != sizes:
            raise ValueError("interaction factors do not match subsystem_sizes")
    support = tuple(sorted({l for t in interactions for l in t.support}))
    problems = []
    for l in support:
        seen: dict[PauliString, int] = {}
        for j, t in enumerate(interactions):
            f = t.factors[l]
            if f.is_identity():
                problems.append(f"term {j} is the identity on subsystem {l}")
            elif f in seen:
                problems.append(f"terms {seen[f]} and {j} share factor {f.label} on subsystem {l}")
            else:
                seen[f] = j
    weights = [t.factors[l].weight for t in interactions for l in support if not t.factors[l].is_identity()]
    k = min(weights, default=0)
    n = min((sizes[l] for l in support), default=0)
    limit = 3**k * math.comb(n, k) if support else 0
    return Condition1Report(not problems, support, len(interactions), k, n, limit, tuple(problems))


@dataclass(frozen=True)
class BoundReport:
    lower_bound: float
    explicit_cost_rate: float
    condition1: bool
    per_subsystem_norms: tuple[float, ...]


def _gram(factors: Sequence[PauliString]) -> np.ndarray:
    """Hilbert-Schmidt Gram matrix of the reshuffled single-subsystem Choi blocks.

    Columns are ``(term j, side a)`` then ``(term j, side b)``, with blocks
    ``P_j|phi><phi|`` (a) and ``|phi><phi|P_j`` (b) for the maximally entangled
    ``|phi>``. For Pauli strings ``<phi|P Q|phi> = [P == Q]``, which makes
    every entry 0 or 1.
    """
    J = len(factors)
    same = np.array([[float(p == q) for q in factors] for p in factors])
    ident = np.array([float(p.is_identity()) for p in factors])
    g = np.zeros((2 * J, 2 * J))
    g[:J, :J] = same
    g[J:, J:] = same
    g[:J, J:] = np.outer(ident, ident)
    g[J:, :J] = np.outer(ident, ident)
    return g


def _psd_sqrt(g: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(g)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def choi_lower_bound(
    interactions: Sequence[InteractionTerm],
    subsystem_sizes: Sequence[int],
    max_dimension: int = BOUND_MAX_DIMENSION,
) -> BoundReport:
    """Trace-norm lower bound on the cost rate of any decomposition of the interaction.

    For each subsystem ``l`` the Choi state of ``rho -> -i[V, rho]`` on
    maximally entangled inputs is reshuffled (vectorised on ``l``, turned into
    a row vector on all others). That matrix is ``U C W^+`` with one column per
    (term, side); its trace norm equals that of ``G_U^{1/2} C G_W^{1/2}``, where
    the Gram matrices are products of per-subsystem Hilbert-Schmidt overlaps.
    """
    sizes = tuple(int(s) for s in subsystem_sizes)
    dim = 4 ** sum(sizes)
    if dim > max_dimension:
        raise ResourceLimitError(
            f"bound guard: doubled dimension 4^{sum(sizes)} exceeds {max_dimension}"
        )
    terms = list(interactions)
    rate = 2.0 * sum(abs(t.lam) for t in terms)
    cond = check_condition1(terms, sizes).holds
    if not terms:
        return BoundReport(0.0, 0.0, cond, tuple(0.0 for _ in sizes))
    lam = np.array([t.lam for t in terms], dtype=float)
    coeff = np.diag(np.concatenate([-1j * lam, 1j * lam]))
    grams = [_gram([t.factors[l] for t in terms]) for l in range(len(sizes))]
    norms = []
    for l in range(len(sizes)):
        rest = np.ones_like(grams[l])
        for m, g in enumerate(grams):
            if m != l:
                rest = rest * g
        core = _psd_sqrt(grams[l]) @ coeff @ _psd_sqrt(rest.conj())
        norms.append(float(np.linalg.svd(core, compute_uv=False).sum()))
    return BoundReport(max(norms), rate, cond, tuple(norms))


# -- Dyson truncation and light-cone envelopes ----------------------------------------------------


def dyson_cost(k: int, lambda_total: float, T: float) -> float:
    """``C_k = sum_{n<=k} (2 T lambda)^n / n!``."""
    if k < 0:
        raise ValueError("order must be non-negative")
    x = 2.0 * T * lambda_total
    term, total = 1.0, 1.0
    for n in range(1, k + 1):
        term *= x / n
        total += term
    return total


def dyson_error_bound(k: int, v_norm: float, T: float) -> float:
    """Envelope ``e^{x} x^{k+1} / (k+1)!`` with ``x = ||V|| T``, up to a constant factor."""
    if k < 0:
        raise ValueError("order must be non-negative")
    x = v_norm * T
    return math.exp(x) * x ** (k + 1) / math.factorial(k + 1)


def interaction_norm(system: PartitionedSystem, max_qubits: int = 14) -> float:
    """Operator norm of the summed interaction (dense for small registers, else the 1-norm bound)."""
    if not system.interactions:
        return 0.0
    v = PauliSum(system.n_qubits, [(t.lam, system.embed_factors(t.factors)) for t in system.interactions])
    if system.n_qubits > max_qubits:
        return v.one_norm()
    if v.is_diagonal():
        return float(np.max(np.abs(v.diagonal())))
    return float(np.max(np.abs(scipy.linalg.eigvalsh(v.to_dense()))))


def bessel_i(d: int, x: float, rtol: float = 1e-16) -> float:
    """Modified Bessel function ``I_d(x)`` of integer order from its power series."""
    if d < 0:
        d = -d
    if x == 0:
        return 1.0 if d == 0 else 0.0
    half = 0.5 * x
    term = half**d / math.factorial(d)
    total = term
    m = 0
    while True:
        term *= half * half / ((m + 1) * (m + 1 + d))
        total += term
        m += 1
        if abs(term) <= rtol * abs(total) and m > half:
            return total


def lr_bound_nn(d: int, J: float, t: float) -> float:
    """Nearest-neighbour light-cone bound ``I_d(4 J t)``."""
    if d < 0 or t < 0:
        raise ValueError("need d >= 0 and t >= 0")
    return bessel_i(d, 4.0 * abs(J) * t)
