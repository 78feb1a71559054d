"""Monte Carlo estimators over sampled insertion trajectories.

Every trajectory carries a branch pair per subsystem: the ket branch ``a_l``
receives ket-side insertions, the bra branch ``b_l`` bra-side ones. At time
``t`` the trajectory represents ``w(t) * phase * prod_l |a_l><b_l|`` and a
product observable contributes ``w(t) * phase * prod_l <b_l|O_l|a_l>``.

Trajectories are processed in fixed-size batches; each batch is reduced to
(count, mean, M2) and batches are merged in index order, so the output does
not depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..evolve import EvolverConfig
from ..models import ObservableSum, PartitionedSystem
from ..pauli import IDENTITY, BasisProjector, PauliString, PauliSum, bilinear, n_qubits_of
from .decomposition import ExplicitDecomposition, decompose
from .propagators import (
    KrylovPropagator,
    SpectralPropagator,
    TrotterPropagator,
    check_trotter_compatible,
)
from .sampling import (
    BRA,
    DOMAIN_DYSON,
    DOMAIN_PURITY,
    DOMAIN_STOCHASTIC,
    KET,
    Trajectory,
    dyson_order_weights,
    sample_dyson,
    sample_trajectory,
    trajectory_rng,
)

BATCH_SIZE = 512


@dataclass(frozen=True)
class EstimatorResult:
    observable: str
    time: float
    mean: float
    stderr: float
    imag_diagnostic: float
    overhead_C: float
    n_samples: int
    imag_stderr: float = 0.0


# -- observable evaluation ------------------------------------------------------------------


def _op_key(op):
    if op is IDENTITY or op is None:
        return ("I",)
    if isinstance(op, PauliString):
        return ("P", op.n_qubits, op.x_mask, op.z_mask)
    if isinstance(op, BasisProjector):
        return ("proj", op.n_qubits, op.index)
    if isinstance(op, PauliSum):
        return ("sum", id(op))
    raise TypeError(f"unsupported local operator {type(op).__name__}")


class _LocalOps:
    """Distinct local operators of one subsystem; index 0 is the identity."""

    def __init__(self, n_qubits: int):
        self.n_qubits = n_qubits
        self.ops = [IDENTITY]
        self._index = {("I",): 0}

    def add(self, op) -> int:
        key = _op_key(op)
        if key not in self._index:
            if getattr(op, "n_qubits", self.n_qubits) != self.n_qubits:
                raise ValueError(f"local operator on {op.n_qubits} qubits for a {self.n_qubits}-qubit subsystem")
            self._index[key] = len(self.ops)
            self.ops.append(op)
        return self._index[key]

    def freeze(self):
        diag_idx, diag_rows = [], []
        self.proj = []
        self.offdiag = []
        self.sums = []
        for i, op in enumerate(self.ops[1:], start=1):
            if isinstance(op, PauliString) and op.is_diagonal():
                diag_idx.append(i)
                diag_rows.append(op.action()[1].real)
            elif isinstance(op, PauliSum) and op.is_diagonal():
                diag_idx.append(i)
                diag_rows.append(op.diagonal())
            elif isinstance(op, PauliString):
                perm, phase = op.action()
                self.offdiag.append((i, perm, phase))
            elif isinstance(op, BasisProjector):
                self.proj.append((i, op.index))
            else:
                self.sums.append((i, op))
        self.diag_idx = np.array(diag_idx, dtype=np.int64)
        self.diag = np.ascontiguousarray(np.array(diag_rows).T) if diag_rows else None

    def values(self, bra: np.ndarray, ket: np.ndarray) -> np.ndarray:
        """``out[r, i] = <bra_r| op_i |ket_r>`` in the computational basis."""
        out = np.empty((bra.shape[0], len(self.ops)), dtype=complex)
        cb = bra.conj()
        ba = cb * ket
        out[:, 0] = ba.sum(axis=1)
        if self.diag is not None:
            out[:, self.diag_idx] = ba @ self.diag
        for i, k in self.proj:
            out[:, i] = ba[:, k]
        for i, perm, phase in self.offdiag:
            out[:, i] = np.einsum("ij,ij->i", cb, ket[:, perm] * phase)
        for i, op in self.sums:
            out[:, i] = np.einsum("ij,ij->i", cb, op.matvec(ket))
        return out


class _ObservableTable:
    """All observable terms flattened: ``value = (prod_l vals_l[:, idx_l]) @ coeffs``."""

    def __init__(self, system: PartitionedSystem, observables: Sequence[ObservableSum]):
        L = system.n_subsystems
        self.names = [o.name for o in observables]
        self.constants = np.array([o.constant for o in observables], dtype=float)
        self.local = [_LocalOps(n) for n in system.subsystem_sizes]
        idx: list[list[int]] = [[] for _ in range(L)]
        coeff_rows = []
        for k, obs in enumerate(observables):
            for c, ops in obs.terms:
                if len(ops) != L:
                    raise ValueError(f"observable {obs.name!r}: term has {len(ops)} factors for {L} subsystems")
                for l, op in enumerate(ops):
                    idx[l].append(self.local[l].add(op))
                row = np.zeros(len(observables))
                row[k] = c
                coeff_rows.append(row)
        for loc in self.local:
            loc.freeze()
        self.idx = [np.array(i, dtype=np.int64) for i in idx]
        self.coeffs = np.array(coeff_rows).reshape(-1, len(observables))

    @property
    def n_obs(self) -> int:
        return len(self.names)

    def evaluate(self, bras: Sequence[np.ndarray], kets: Sequence[np.ndarray]) -> np.ndarray:
        """``(rows, n_obs)`` values of ``sum_terms coeff * prod_l <b_l|O_l|a_l>`` (constants excluded)."""
        rows = bras[0].shape[0]
        prod = np.ones((rows, self.coeffs.shape[0]), dtype=complex)
        for loc, i, b, a in zip(self.local, self.idx, bras, kets):
            prod *= loc.values(b, a)[:, i]
        return prod @ self.coeffs


# -- shared preparation -----------------------------------------------------------------------


def _check_initial(system: PartitionedSystem, initial) -> list[np.ndarray]:
    if len(initial) != system.n_subsystems:
        raise ValueError(f"need {system.n_subsystems} initial states, got {len(initial)}")
    out = []
    for l, (size, s) in enumerate(zip(system.subsystem_sizes, initial)):
        s = np.asarray(s, dtype=complex)
        if s.ndim != 1 or n_qubits_of(s) != size:
            raise ValueError(f"initial state {l} does not match its {size}-qubit subsystem")
        if abs(np.linalg.norm(s) - 1) > 1e-9:
            raise ValueError(f"initial state {l} is not normalised")
        out.append(s)
    return out


def _check_grid(grid, T: float) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("grid must be a non-empty list of times")
    if np.any(np.diff(g) <= 0):
        raise ValueError("grid times must be strictly ascending")
    if g[0] < 0 or g[-1] > T:
        raise ValueError(f"grid must lie within [0, T={T}]")
    return g


def build_propagators(system: PartitionedSystem, trotter_steps: int | None = None, horizon: float | None = None):
    if trotter_steps is None:
        return [SpectralPropagator(h) for h in system.local_hams]
    check_trotter_compatible(system.interactions)
    return [TrotterPropagator(h, trotter_steps, horizon) for h in system.local_hams]


def _check_trotter_grid(grid: np.ndarray, props) -> None:
    dt = props[0].dt
    k = np.rint(grid / dt)
    if np.any(np.abs(k * dt - grid) > 1e-9 * max(1.0, dt)):
        raise ValueError(f"trotter mode: grid times must be multiples of the step length {dt:g}")


class _Plan:
    def __init__(self, system, decomp, props, initial):
        self.system = system
        self.decomp = decomp
        self.props = props
        self.init_work = [p.to_work(s[None, :])[0] for p, s in zip(props, initial)]
        self.phase_table = decomp.phase_table() if decomp.terms else np.ones((0, 2), dtype=complex)
        self.factors = [
            [(l, t.factors[l]) for l in t.support] for t in decomp.terms
        ]

    def sweep(self, times, terms, sides, grid, on_grid):
        """Carry a batch of trajectories through ``grid``; ``on_grid(g, A, B, phase, ptr)``
        sees the working-picture branches after all jumps up to ``grid[g]``."""
        R = times.shape[0]
        props = self.props
        A = [np.repeat(w[None, :], R, axis=0) for w in self.init_work]
        B = [a.copy() for a in A]
        ptr = np.zeros(R, dtype=np.int64)
        phase = np.ones(R, dtype=complex)
        padded = np.concatenate([times, np.full((R, 1), np.inf)], axis=1)
        every = np.arange(R)
        for g, tg in enumerate(grid):
            while True:
                rows = np.flatnonzero(padded[every, ptr] <= tg)
                if rows.size == 0:
                    break
                slot = ptr[rows]
                te = times[rows, slot]
                key = terms[rows, slot] * 2 + sides[rows, slot]
                for k in np.unique(key):
                    mask = key == k
                    sel = rows[mask]
                    j, side = divmod(int(k), 2)
                    branch = A if side == KET else B
                    for l, f in self.factors[j]:
                        branch[l][sel] = props[l].insert_at(branch[l][sel], f, te[mask])
                    phase[sel] *= self.phase_table[j, side]
                ptr[rows] += 1
            on_grid(g, A, B, phase, ptr)


class _Runner:
    """Batched contribution kernel for one system, initial state and observable set."""

    def __init__(self, system, decomp, props, initial, observables):
        self.props = props
        self.plan = _Plan(system, decomp, props, initial)
        self.table = _ObservableTable(system, observables)

    def evaluate(self, A, B, t, rows=None):
        pick = (lambda x: x) if rows is None else (lambda x: x[rows])
        bras, kets = [], []
        for p, loc, a, b in zip(self.props, self.table.local, A, B):
            if len(loc.ops) == 1:
                # identity only: the overlap is the same in any picture
                bras.append(pick(b))
                kets.append(pick(a))
            else:
                bras.append(p.readout(pick(b), t))
                kets.append(p.readout(pick(a), t))
        return self.table.evaluate(bras, kets)

    def free_values(self, grid) -> np.ndarray:
        """``(n_grid, n_obs)`` values of the jump-free trajectory (identical branches)."""
        vals = np.zeros((len(grid), self.table.n_obs), dtype=complex)

        def grab(g, A, B, phase, ptr):
            vals[g] = self.evaluate(A, B, grid[g])[0]

        none = np.zeros((1, 1), np.int64)
        self.plan.sweep(np.full((1, 1), np.inf), none, none, grid, grab)
        return vals

    def contributions(self, trajs, grid, weights, free=None) -> np.ndarray:
        """``(n_traj, n_obs, n_grid)`` contributions, observable constants excluded.

        Rows that have not jumped yet reuse the precomputed jump-free values.
        """
        if free is None:
            free = self.free_values(grid)
        times, terms, sides = _pack(trajs)
        contrib = np.empty((len(trajs), self.table.n_obs, len(grid)), dtype=complex)

        def on_grid(g, A, B, phase, ptr):
            contrib[:, :, g] = weights[g] * free[g]
            rows = np.flatnonzero(ptr > 0)
            if rows.size:
                contrib[rows, :, g] = weights[g] * phase[rows, None] * self.evaluate(A, B, grid[g], rows)

        self.plan.sweep(times, terms, sides, grid, on_grid)
        return contrib


def batch_contributions(system, initial, observables, trajs, grid, trotter_steps=None, horizon=None):
    """Contributions of given trajectories through the batched kernel, constants included.

    Same layout as stacking :func:`run_trajectory` outputs; used to
    cross-check the fast path against the reference path.
    """
    initial = _check_initial(system, initial)
    decomp = decompose(system)
    grid = np.asarray(grid, dtype=float)
    props = build_propagators(system, trotter_steps, horizon)
    runner = _Runner(system, decomp, props, initial, observables)
    weights = [decomp.overhead(t) for t in grid]
    out = runner.contributions(trajs, grid, weights)
    return out + runner.table.constants[None, :, None]


def _pack(trajs: Sequence[Trajectory]):
    K = max(1, max((len(t) for t in trajs), default=0))
    R = len(trajs)
    times = np.full((R, K), np.inf)
    terms = np.zeros((R, K), dtype=np.int64)
    sides = np.zeros((R, K), dtype=np.int64)
    for r, tr in enumerate(trajs):
        for k, jp in enumerate(tr.jumps):
            times[r, k] = jp.time
            terms[r, k] = jp.term
            sides[r, k] = jp.side
    return times, terms, sides


class _Stats:
    """Running (count, mean, M2) for real and imaginary parts, merged in call order."""

    def __init__(self, shape):
        self.n = 0
        self.mean = np.zeros(shape, dtype=complex)
        self.m2_re = np.zeros(shape)
        self.m2_im = np.zeros(shape)

    @staticmethod
    def of(batch: np.ndarray) -> "_Stats":
        s = _Stats(batch.shape[1:])
        s.n = batch.shape[0]
        s.mean = batch.mean(axis=0)
        d = batch - s.mean
        s.m2_re = np.sum(d.real**2, axis=0)
        s.m2_im = np.sum(d.imag**2, axis=0)
        return s

    def merge(self, other: "_Stats") -> None:
        if other.n == 0:
            return
        n = self.n + other.n
        delta = other.mean - self.mean
        w = self.n * other.n / n
        self.m2_re = self.m2_re + other.m2_re + delta.real**2 * w
        self.m2_im = self.m2_im + other.m2_im + delta.imag**2 * w
        self.mean = self.mean + delta * (other.n / n)
        self.n = n

    def stderr(self):
        if self.n < 2:
            return np.zeros_like(self.m2_re), np.zeros_like(self.m2_im)
        f = 1.0 / (self.n * (self.n - 1))
        return np.sqrt(self.m2_re * f), np.sqrt(self.m2_im * f)


def _run_batches(tasks, worker, threads: int):
    if threads <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks))


# -- public API -------------------------------------------------------------------------------


def run_trajectory(
    system: PartitionedSystem,
    decomp: ExplicitDecomposition,
    traj: Trajectory,
    initial,
    observables: Sequence[ObservableSum],
    grid,
    evolver=None,
    weights=None,
) -> np.ndarray:
    """Contributions ``(n_obs, n_grid)`` of one trajectory, computed state by state.

    This is the plain reference path: branch states live in the
    computational basis and each free segment is evolved separately.
    ``evolver`` is ``None``/an :class:`EvolverConfig` (Krylov segments) or a
    list of per-subsystem propagators. ``weights`` overrides the per-grid
    factor ``e^{rate t}``. Observable constants are included.
    """
    initial = _check_initial(system, initial)
    grid = _check_grid(grid, traj.horizon)
    if evolver is None or isinstance(evolver, EvolverConfig):
        cfg = evolver or EvolverConfig()
        props = [KrylovPropagator(h, cfg) for h in system.local_hams]
    else:
        props = list(evolver)
    if weights is None:
        weights = [decomp.overhead(t) for t in grid]
    a = [s.copy() for s in initial]
    b = [s.copy() for s in initial]
    phase = 1.0 + 0.0j
    cur = 0.0
    out = np.zeros((len(observables), len(grid)), dtype=complex)
    pending = list(traj.jumps)
    for g, tg in enumerate(grid):
        while pending and pending[0].time <= tg:
            jp = pending.pop(0)
            te = props[0].snap(jp.time)
            for l, p in enumerate(props):
                a[l] = p.evolve(a[l], cur, te)
                b[l] = p.evolve(b[l], cur, te)
            cur = te
            term = decomp.terms[jp.term]
            branch = a if jp.side == KET else b
            for l in term.support:
                branch[l] = branch[l] if term.factors[l].is_identity() else _apply(branch[l], term.factors[l])
            phase *= decomp.jump_phase(jp.term, jp.side)
        for l, p in enumerate(props):
            a[l] = p.evolve(a[l], cur, tg)
            b[l] = p.evolve(b[l], cur, tg)
        cur = tg
        for k, obs in enumerate(observables):
            val = 0.0j
            for c, ops in obs.terms:
                prod = 1.0 + 0.0j
                for l, op in enumerate(ops):
                    prod *= bilinear(b[l], op, a[l])
                val += c * prod
            out[k, g] = weights[g] * phase * val + obs.constant
    return out


def _apply(state, p):
    perm, ph = p.action()
    return ph * state[perm]


def estimate(
    system: PartitionedSystem,
    initial,
    observables: Sequence[ObservableSum],
    T: float,
    grid,
    n_samples: int,
    seed: int,
    mode: str = "stochastic",
    max_jumps: int | None = None,
    dyson_order: int | None = None,
    evolver: EvolverConfig | None = None,
    trotter_steps: int | None = None,
    threads: int = 1,
    batch_size: int = BATCH_SIZE,
) -> list[EstimatorResult]:
    """Estimate every observable at every grid time.

    ``mode="stochastic"`` samples one horizon-``T`` trajectory per sample and
    reads all grid times from it (weight ``e^{rate t}``). ``mode="dyson"``
    truncates the expansion at ``dyson_order`` jumps and samples each grid
    time separately with weight ``C_k(t) = sum_{n<=k} (rate t)^n / n!``.

    Results are ordered by grid time, then observable. Local dynamics are
    exact (cached eigendecomposition) unless ``trotter_steps`` is given; the
    ``evolver`` argument is accepted for interface symmetry with the oracle.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    if mode not in ("stochastic", "dyson"):
        raise ValueError(f"mode must be 'stochastic' or 'dyson', got {mode!r}")
    if mode == "dyson":
        if dyson_order is None or dyson_order < 0:
            raise ValueError("dyson mode needs a non-negative dyson_order")
        if max_jumps is not None:
            raise ValueError("max_jumps applies to stochastic mode only")
    elif dyson_order is not None:
        raise ValueError("dyson_order applies to dyson mode only")
    if max_jumps is not None and max_jumps < 0:
        raise ValueError("max_jumps must be non-negative")
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    if not observables:
        raise ValueError("no observables requested")
    initial = _check_initial(system, initial)
    grid = _check_grid(grid, T)
    decomp = decompose(system)
    props = build_propagators(system, trotter_steps, T)
    if trotter_steps is not None:
        _check_trotter_grid(grid, props)
    runner = _Runner(system, decomp, props, initial, observables)
    table = runner.table
    n_obs = table.n_obs
    free_values = runner.free_values

    def run(trajs, sub_grid, weights, free):
        return _Stats.of(runner.contributions(trajs, sub_grid, weights, free))

    starts = list(range(0, n_samples, batch_size))
    results: list[EstimatorResult] = []
    if mode == "stochastic":
        weights = np.array([decomp.overhead(t) for t in grid])
        free = free_values(grid)

        def worker(start):
            trajs = [
                sample_trajectory(decomp, T, trajectory_rng(seed, i, DOMAIN_STOCHASTIC), max_jumps)
                for i in range(start, min(start + batch_size, n_samples))
            ]
            return run(trajs, grid, weights, free)

        stats = _Stats((n_obs, len(grid)))
        for s in _run_batches(starts, worker, threads):
            stats.merge(s)
        overheads = weights
    else:
        stats = _Stats((n_obs, len(grid)))
        overheads = np.empty(len(grid))
        per_grid = []
        for g, tg in enumerate(grid):
            sub = grid[g : g + 1]
            cw = float(np.sum(dyson_order_weights(decomp.rate * tg, dyson_order)))
            overheads[g] = cw
            free = free_values(sub)

            def worker(start, g=g, tg=tg, sub=sub, cw=cw, free=free):
                trajs = [
                    sample_dyson(decomp, tg, dyson_order, trajectory_rng(seed, (g << 40) | i, DOMAIN_DYSON))
                    for i in range(start, min(start + batch_size, n_samples))
                ]
                return run(trajs, sub, [cw], free)

            s_g = _Stats((n_obs, 1))
            for s in _run_batches(starts, worker, threads):
                s_g.merge(s)
            per_grid.append(s_g)
        stats.n = n_samples
        stats.mean = np.concatenate([s.mean for s in per_grid], axis=1)
        stats.m2_re = np.concatenate([s.m2_re for s in per_grid], axis=1)
        stats.m2_im = np.concatenate([s.m2_im for s in per_grid], axis=1)

    se_re, se_im = stats.stderr()
    for g, tg in enumerate(grid):
        for k, name in enumerate(table.names):
            results.append(
                EstimatorResult(
                    observable=name,
                    time=float(tg),
                    mean=float(stats.mean[k, g].real + table.constants[k]),
                    stderr=float(se_re[k, g]),
                    imag_diagnostic=float(abs(stats.mean[k, g].imag)),
                    overhead_C=float(overheads[g]),
                    n_samples=int(stats.n),
                    imag_stderr=float(se_im[k, g]),
                )
            )
    return results


def estimate_purity(
    system: PartitionedSystem,
    initial,
    m: int,
    T: float,
    n_pairs: int,
    seed: int,
    evolver: EvolverConfig | None = None,
    trotter_steps: int | None = None,
    threads: int = 1,
    batch_size: int = BATCH_SIZE,
) -> EstimatorResult:
    """Estimate ``Tr[rho_m(T)^2]`` from pairs of independent trajectories."""
    if not 0 <= m < system.n_subsystems:
        raise ValueError(f"subsystem index {m} outside 0..{system.n_subsystems - 1}")
    if n_pairs < 2:
        raise ValueError("n_pairs must be at least 2")
    if T < 0:
        raise ValueError("T must be non-negative")
    initial = _check_initial(system, initial)
    decomp = decompose(system)
    props = build_propagators(system, trotter_steps, T if T > 0 else 1.0)
    grid = np.array([T])
    if trotter_steps is not None:
        _check_trotter_grid(grid, props)
    plan = _Plan(system, decomp, props, initial)
    weight = math.exp(2 * decomp.rate * T)
    others = [l for l in range(system.n_subsystems) if l != m]

    def worker(start):
        stop = min(start + batch_size, n_pairs)
        trajs = []
        for p in range(start, stop):
            for i in (2 * p, 2 * p + 1):
                trajs.append(sample_trajectory(decomp, T, trajectory_rng(seed, i, DOMAIN_PURITY)))
        times, terms, sides = _pack(trajs)
        out = np.empty((stop - start, 1), dtype=complex)

        def on_grid(g, A, B, phase, ptr):
            k, kp = slice(0, None, 2), slice(1, None, 2)
            c = weight * phase[k] * phase[kp]
            for l in others:
                ov = np.einsum("ij,ij->i", B[l].conj(), A[l])
                c = c * ov[k] * ov[kp]
            c = c * np.einsum("ij,ij->i", B[m][k].conj(), A[m][kp])
            c = c * np.einsum("ij,ij->i", B[m][kp].conj(), A[m][k])
            out[:, 0] = c

        plan.sweep(times, terms, sides, grid, on_grid)
        return _Stats.of(out)

    stats = _Stats((1,))
    for s in _run_batches(list(range(0, n_pairs, batch_size)), worker, threads):
        stats.merge(s)
    se_re, se_im = stats.stderr()
    return EstimatorResult(
        observable=f"purity[{m}]",
        time=float(T),
        mean=float(stats.mean[0].real),
        stderr=float(se_re[0]),
        imag_diagnostic=float(abs(stats.mean[0].imag)),
        overhead_C=weight,
        n_samples=int(stats.n),
        imag_stderr=float(se_im[0]),
    )
