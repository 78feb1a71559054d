"""Model Hamiltonians, subsystem partitions, initial states and observables.

Physical site labels are 1-based (``site 8`` is qubit 7) to match how the
studied experiments are usually described; qubit indices are 0-based.
Occupations follow ``|0> = empty``, ``n = (I - Z)/2``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import AmbiguityError, UnsupportedConfigurationError
from .pauli import IDENTITY, BasisProjector, PauliString, PauliSum

log = logging.getLogger(__name__)


# -- model specifications ---------------------------------------------------------------


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class TFIM:
    """``J sum Z_i Z_{i+1} + h sum X_i`` on an open chain.

    ``trotter_steps`` selects first-order Trotterised local dynamics (ZZ layer
    then X layer per step, step length ``T / trotter_steps``).
    """

    n: int
    J: float = 1.0
    h: float = 1.0
    trotter_steps: int | None = None

    kind = "tfim"

    def __post_init__(self):
        _require(self.n >= 2, "tfim: n must be at least 2")
        _require(self.trotter_steps is None or self.trotter_steps >= 1, "tfim: trotter_steps must be positive")

    @property
    def n_qubits(self) -> int:
        return self.n


@dataclass(frozen=True)
class PowerLawIsing:
    """``sum_{i<j} J0 |i-j|^-alpha X_i X_j + h sum Z_i``.

    With ``cluster_size`` set, the power law acts only inside consecutive
    clusters and neighbouring clusters couple through ``J0 X X`` on their
    boundary sites. ``h`` defaults to ``2 n J0``.
    """

    n: int
    J0: float = 1.0
    alpha: float = 1.0
    h: float | None = None
    cluster_size: int | None = None

    kind = "powerlaw"

    def __post_init__(self):
        _require(self.n >= 2, "powerlaw: n must be at least 2")
        if self.cluster_size is not None:
            _require(self.cluster_size >= 2, "powerlaw: cluster_size must be at least 2")
            _require(self.n % self.cluster_size == 0, "powerlaw: n must be a multiple of cluster_size")

    @property
    def n_qubits(self) -> int:
        return self.n

    @property
    def field(self) -> float:
        return 2 * self.n * self.J0 if self.h is None else self.h

    def coupling(self, i: int, j: int) -> float:
        """Coupling between 1-based sites ``i`` and ``j``."""
        return self.J0 * abs(i - j) ** (-self.alpha)


@dataclass(frozen=True)
class XXChain:
    """Hard-core bosons: ``J sum (XX + YY) + 1/2 sum h_i (I - Z_i)``.

    Bonds ``(b-1, b)`` for each 1-based site ``b`` in ``boundaries`` carry
    ``J_boundary`` instead of ``J`` (default: the middle bond).
    """

    n: int
    J: float = 0.5
    J_boundary: float | None = None
    onsite: tuple[float, ...] = ()
    boundaries: tuple[int, ...] | None = None

    kind = "xx"

    def __post_init__(self):
        _require(self.n >= 2, "xx: n must be at least 2")
        _require(len(self.onsite) in (0, self.n), f"xx: onsite must have {self.n} entries")
        for b in self.boundary_sites:
            _require(2 <= b <= self.n, f"xx: boundary site {b} outside 2..{self.n}")

    @property
    def n_qubits(self) -> int:
        return self.n

    @property
    def boundary_sites(self) -> tuple[int, ...]:
        return (self.n // 2 + 1,) if self.boundaries is None else tuple(self.boundaries)

    @property
    def boundary_coupling(self) -> float:
        return self.J if self.J_boundary is None else self.J_boundary


def gaussian_potential(L: int, depth: float = 4.0, width: float = 1.0) -> tuple[float, ...]:
    """``-depth * exp(-(j - (L+1)/2)^2 / (2 width^2))`` for sites ``j = 1..L``."""
    centre = (L + 1) / 2
    return tuple(-depth * math.exp(-((j - centre) ** 2) / (2 * width**2)) for j in range(1, L + 1))


@dataclass(frozen=True)
class FermiHubbard:
    """1-D Fermi-Hubbard chain; qubits ``0..L-1`` hold spin up, ``L..2L-1`` spin down."""

    L: int
    J: float = 0.5
    U: float = 0.5
    h_up: tuple[float, ...] | None = None
    h_dn: tuple[float, ...] | None = None
    N_up: int | None = None
    N_dn: int | None = None

    kind = "hubbard"

    def __post_init__(self):
        _require(self.L >= 2, "hubbard: L must be at least 2")
        for name in ("h_up", "h_dn"):
            v = getattr(self, name)
            _require(v is None or len(v) == self.L, f"hubbard: {name} must have {self.L} entries")
        for name in ("N_up", "N_dn"):
            v = getattr(self, name)
            _require(v is None or 0 <= v <= self.L, f"hubbard: {name} must lie in 0..{self.L}")

    @property
    def n_qubits(self) -> int:
        return 2 * self.L

    @property
    def potential_up(self) -> tuple[float, ...]:
        return gaussian_potential(self.L) if self.h_up is None else tuple(self.h_up)

    @property
    def potential_dn(self) -> tuple[float, ...]:
        return (0.0,) * self.L if self.h_dn is None else tuple(self.h_dn)

    @property
    def filling(self) -> tuple[int, int]:
        quarter = max(1, self.L // 4)
        return (quarter if self.N_up is None else self.N_up, quarter if self.N_dn is None else self.N_dn)


@dataclass(frozen=True)
class MultiCluster:
    """Chain of clusters: ``J sum X X + h sum Z`` inside, ``f_l X X`` between clusters ``l, l+1``."""

    clusters: int
    cluster_size: int
    J: float = 1.0
    h: float = 1.0
    boundary_couplings: tuple[float, ...] = field(default=())

    kind = "multicluster"

    def __post_init__(self):
        _require(self.clusters >= 2, "multicluster: need at least 2 clusters")
        _require(self.cluster_size >= 2, "multicluster: cluster_size must be at least 2")
        _require(
            len(self.boundary_couplings) == self.clusters - 1,
            f"multicluster: boundary_couplings must have {self.clusters - 1} entries",
        )

    @property
    def n_qubits(self) -> int:
        return self.clusters * self.cluster_size

    @staticmethod
    def random_couplings(clusters: int, J: float, seed: int) -> tuple[float, ...]:
        """Boundary couplings drawn uniformly from ``[0, J/2]``."""
        rng = np.random.default_rng(seed)
        return tuple(float(f) for f in rng.uniform(0.0, J / 2, size=clusters - 1))


ModelSpec = Union[TFIM, PowerLawIsing, XXChain, FermiHubbard, MultiCluster]


# -- full-register Hamiltonians -----------------------------------------------------------


def _pair(n: int, i: int, j: int, ch: str) -> PauliString:
    return PauliString.from_ops({i: ch, j: ch}, n)


def _single(n: int, i: int, ch: str) -> PauliString:
    return PauliString.from_ops({i: ch}, n)


def _full_terms(spec: ModelSpec) -> list[tuple[float, PauliString]]:
    """All terms including the identity component."""
    ident = PauliString.identity(spec.n_qubits)
    if isinstance(spec, TFIM):
        n = spec.n
        terms = [(spec.J, _pair(n, i, i + 1, "Z")) for i in range(n - 1)]
        terms += [(spec.h, _single(n, i, "X")) for i in range(n)]
        return terms
    if isinstance(spec, PowerLawIsing):
        n, size = spec.n, spec.cluster_size
        terms = []
        for i in range(n):
            for j in range(i + 1, n):
                if size is None or i // size == j // size:
                    terms.append((spec.coupling(i + 1, j + 1), _pair(n, i, j, "X")))
        if size is not None:
            for c in range(1, n // size):
                terms.append((spec.J0, _pair(n, c * size - 1, c * size, "X")))
        terms += [(spec.field, _single(n, i, "Z")) for i in range(n)]
        return terms
    if isinstance(spec, XXChain):
        n = spec.n
        weak = {b - 2 for b in spec.boundary_sites}  # bond index = left qubit
        terms = []
        for i in range(n - 1):
            J = spec.boundary_coupling if i in weak else spec.J
            terms += [(J, _pair(n, i, i + 1, "X")), (J, _pair(n, i, i + 1, "Y"))]
        for i, h in enumerate(spec.onsite):
            terms += [(0.5 * h, ident), (-0.5 * h, _single(n, i, "Z"))]
        return terms
    if isinstance(spec, FermiHubbard):
        L, n = spec.L, 2 * spec.L
        terms = []
        for off in (0, L):
            for j in range(L - 1):
                a, b = off + j, off + j + 1
                terms += [(-spec.J / 2, _pair(n, a, b, "X")), (-spec.J / 2, _pair(n, a, b, "Y"))]
        for j in range(L):
            up, dn = j, L + j
            q = spec.U / 4
            terms += [
                (q, ident),
                (q, PauliString.from_ops({up: "Z", dn: "Z"}, n)),
                (-q, _single(n, up, "Z")),
                (-q, _single(n, dn, "Z")),
            ]
        for off, pot in ((0, spec.potential_up), (L, spec.potential_dn)):
            for j, h in enumerate(pot):
                terms += [(h / 2, ident), (-h / 2, _single(n, off + j, "Z"))]
        return terms
    if isinstance(spec, MultiCluster):
        n, size = spec.n_qubits, spec.cluster_size
        terms = []
        for c in range(spec.clusters):
            base = c * size
            terms += [(spec.J, _pair(n, base + i, base + i + 1, "X")) for i in range(size - 1)]
            terms += [(spec.h, _single(n, base + i, "Z")) for i in range(size)]
        for c, f in enumerate(spec.boundary_couplings):
            terms.append((f, _pair(n, (c + 1) * size - 1, (c + 1) * size, "X")))
        return terms
    raise TypeError(f"unknown model spec {type(spec).__name__}")


def build_full_with_constant(spec: ModelSpec) -> PauliSum:
    return PauliSum(spec.n_qubits, _full_terms(spec))


def build_full(spec: ModelSpec) -> PauliSum:
    """Full-register Hamiltonian with its constant (identity) component dropped."""
    return build_full_with_constant(spec).without_identity()


def constant_shift(spec: ModelSpec) -> float:
    return build_full_with_constant(spec).identity_coefficient()


# -- partitions ------------------------------------------------------------------------


@dataclass(frozen=True)
class InteractionTerm:
    lam: float
    factors: tuple[PauliString, ...]

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("interaction coefficient must be non-zero")
        if self.support_size < 2:
            raise ValueError("interaction term must act on at least two subsystems")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(l for l, f in enumerate(self.factors) if not f.is_identity())

    @property
    def support_size(self) -> int:
        return len(self.support)

    def __repr__(self):
        return f"InteractionTerm({self.lam:g}, {'⊗'.join(f.label for f in self.factors)})"


@dataclass(frozen=True)
class PartitionedSystem:
    """Subsystem layout, local Hamiltonians and cross-subsystem interaction terms.

    Subsystem ``l`` holds the contiguous global qubits
    ``offsets[l] .. offsets[l] + subsystem_sizes[l] - 1``.
    """

    subsystem_sizes: tuple[int, ...]
    local_hams: tuple[PauliSum, ...]
    interactions: tuple[InteractionTerm, ...]
    dropped_constant: float = 0.0

    def __post_init__(self):
        if len(self.local_hams) != len(self.subsystem_sizes):
            raise ValueError("one local Hamiltonian per subsystem required")
        for size, h in zip(self.subsystem_sizes, self.local_hams):
            if h.n_qubits != size:
                raise ValueError("local Hamiltonian size does not match its subsystem")
        for term in self.interactions:
            if tuple(f.n_qubits for f in term.factors) != self.subsystem_sizes:
                raise ValueError("interaction factors do not match the subsystem layout")

    @property
    def n_subsystems(self) -> int:
        return len(self.subsystem_sizes)

    @property
    def n_qubits(self) -> int:
        return sum(self.subsystem_sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for s in self.subsystem_sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    def global_to_local(self, qubit: int) -> tuple[int, int]:
        if not 0 <= qubit < self.n_qubits:
            raise ValueError(f"qubit {qubit} outside register of {self.n_qubits}")
        for l, (off, size) in enumerate(zip(self.offsets, self.subsystem_sizes)):
            if qubit < off + size:
                return l, qubit - off
        raise AssertionError("unreachable")

    def embed_factors(self, factors: Sequence[PauliString]) -> PauliString:
        x = z = 0
        for off, f in zip(self.offsets, factors):
            x |= f.x_mask << off
            z |= f.z_mask << off
        return PauliString(self.n_qubits, x, z)

    def reassemble(self) -> PauliSum:
        """Full-register Hamiltonian rebuilt from the pieces (constant excluded)."""
        n = self.n_qubits
        terms = []
        for off, h in zip(self.offsets, self.local_hams):
            terms += [(c, p.embed(off, n)) for c, p in h]
        terms += [(t.lam, self.embed_factors(t.factors)) for t in self.interactions]
        return PauliSum(n, terms)

    @property
    def lambda_total(self) -> float:
        return float(sum(abs(t.lam) for t in self.interactions))


def partition_sum(h: PauliSum, cut: Sequence[int]) -> PartitionedSystem:
    """Split any Pauli sum along contiguous qubit blocks of sizes ``cut``."""
    cut = tuple(int(c) for c in cut)
    if any(c < 1 for c in cut):
        raise ValueError("cut: subsystem sizes must be positive")
    if sum(cut) != h.n_qubits:
        raise ValueError(f"cut: sizes sum to {sum(cut)} but the model has {h.n_qubits} qubits")
    offsets = np.cumsum((0,) + cut[:-1])
    local_terms: list[list] = [[] for _ in cut]
    interactions = []
    constant = 0.0
    for coeff, p in h:
        factors = tuple(p.restrict(int(off), size) for off, size in zip(offsets, cut))
        touched = [l for l, f in enumerate(factors) if not f.is_identity()]
        if not touched:
            constant += coeff
            log.info("dropping identity component %g from the partitioned Hamiltonian", coeff)
        elif len(touched) == 1:
            local_terms[touched[0]].append((coeff, factors[touched[0]]))
        else:
            interactions.append(InteractionTerm(coeff, factors))
    return PartitionedSystem(
        cut,
        tuple(PauliSum(size, terms) for size, terms in zip(cut, local_terms)),
        tuple(interactions),
        constant,
    )


def partition(spec: ModelSpec, cut: Sequence[int]) -> PartitionedSystem:
    """Partition a model's Hamiltonian into subsystems of the given sizes."""
    return partition_sum(build_full_with_constant(spec), cut)


def jw_fermi_hubbard(spec: FermiHubbard) -> tuple[PauliSum, PartitionedSystem]:
    """Jordan-Wigner image of the Hubbard chain and its spin-sector partition."""
    if not isinstance(spec, FermiHubbard):
        raise ValueError("jw_fermi_hubbard requires a FermiHubbard spec")
    return build_full(spec), partition(spec, (spec.L, spec.L))


# -- initial states ----------------------------------------------------------------------


def single_particle_matrix(spec: FermiHubbard, spin: str) -> np.ndarray:
    pot = spec.potential_up if spin == "up" else spec.potential_dn
    m = np.diag(np.asarray(pot, dtype=float))
    for j in range(spec.L - 1):
        m[j, j + 1] = m[j + 1, j] = -spec.J
    return m


def slater_state(orbitals: np.ndarray) -> np.ndarray:
    """Qubit state of the Slater determinant of the given orbital columns.

    The amplitude of occupation bitstring ``S`` (sites ascending) is
    ``det(orbitals[S, :])``; with ``c_j = (X_j + iY_j)/2 * prod_{i<j} Z_i`` this
    equals ``a_1^+ ... a_N^+ |vac>``.
    """
    L, N = orbitals.shape
    psi = np.zeros(1 << L, dtype=complex)
    if N == 0:
        psi[0] = 1.0
        return psi
    for idx in range(1 << L):
        if idx.bit_count() != N:
            continue
        rows = [j for j in range(L) if (idx >> j) & 1]
        psi[idx] = np.linalg.det(orbitals[rows, :])
    psi /= np.linalg.norm(psi)
    # fix the arbitrary orbital signs: first non-negligible amplitude positive
    lead = psi[np.flatnonzero(np.abs(psi) > 1e-12)[0]]
    return psi * (abs(lead) / lead)


def ground_state_noninteracting(spec: FermiHubbard) -> tuple[np.ndarray, np.ndarray]:
    """Per-spin Slater ground states of the ``U = 0`` Hamiltonian (same potentials)."""
    out = []
    for spin, N in zip(("up", "dn"), spec.filling):
        energies, orbs = np.linalg.eigh(single_particle_matrix(spec, spin))
        if 0 < N < spec.L and abs(energies[N] - energies[N - 1]) < 1e-12:
            raise AmbiguityError(
                f"degenerate Fermi level for spin {spin} (N={N}); choose the occupied orbitals explicitly"
            )
        out.append(slater_state(orbs[:, :N]))
    return out[0], out[1]


PRESETS = ("all-zero", "flip-sites", "hubbard-ground")


def build_initial(
    spec: ModelSpec, system: PartitionedSystem, preset: str = "all-zero", flip_sites: Sequence[int] = ()
) -> list[np.ndarray]:
    """Product initial state, one statevector per subsystem.

    ``flip-sites`` applies X on the listed 1-based sites of the all-zero state.
    """
    if preset not in PRESETS:
        raise ValueError(f"initial: unknown preset {preset!r}; expected one of {PRESETS}")
    if preset == "hubbard-ground":
        if not isinstance(spec, FermiHubbard):
            raise UnsupportedConfigurationError("initial: hubbard-ground requires a hubbard model")
        if system.subsystem_sizes != (spec.L, spec.L):
            raise UnsupportedConfigurationError(
                "initial: hubbard-ground is a product state only across the spin cut [L, L]"
            )
        return list(ground_state_noninteracting(spec))
    indices = [0] * system.n_subsystems
    if preset == "flip-sites":
        for site in flip_sites:
            if not 1 <= site <= system.n_qubits:
                raise ValueError(f"initial: flip site {site} outside 1..{system.n_qubits}")
            l, q = system.global_to_local(site - 1)
            indices[l] ^= 1 << q
    states = []
    for size, idx in zip(system.subsystem_sizes, indices):
        psi = np.zeros(1 << size, dtype=complex)
        psi[idx] = 1.0
        states.append(psi)
    return states


def full_state(states: Sequence[np.ndarray]) -> np.ndarray:
    """Tensor product of subsystem states (subsystem 0 on the low qubits)."""
    psi = np.ones(1, dtype=complex)
    for s in states:
        psi = np.kron(s, psi)
    return psi


# -- observables -------------------------------------------------------------------------


@dataclass(frozen=True)
class ObservableSum:
    """``constant + sum_k coeff_k * prod_l O_{k,l}`` with per-subsystem factors.

    Each local factor is ``IDENTITY``, a :class:`PauliString`, a
    :class:`PauliSum` or a :class:`BasisProjector`.
    """

    name: str
    terms: tuple[tuple[float, tuple], ...]
    constant: float = 0.0


def _product(system: PartitionedSystem, ops: dict[int, str]) -> tuple:
    """Local factors of a Pauli product given as ``{global qubit: 'X'|'Y'|'Z'}``."""
    per_sub: list[dict[int, str]] = [{} for _ in system.subsystem_sizes]
    for q, ch in ops.items():
        l, local = system.global_to_local(q)
        per_sub[l][local] = ch
    return tuple(
        PauliString.from_ops(d, size) if d else IDENTITY for d, size in zip(per_sub, system.subsystem_sizes)
    )


def pauli_observable(system: PartitionedSystem, name: str, h: PauliSum) -> ObservableSum:
    """Express a full-register Pauli sum as an ObservableSum on the partition."""
    terms = []
    constant = 0.0
    for c, p in h:
        if p.is_identity():
            constant += c
            continue
        factors = tuple(
            IDENTITY if f.is_identity() else f
            for f in (p.restrict(off, size) for off, size in zip(system.offsets, system.subsystem_sizes))
        )
        terms.append((c, factors))
    return ObservableSum(name, tuple(terms), constant)


def _occupation(system, name, qubits_weights):
    """``sum_q w_q n_q`` with ``n = (I - Z)/2``."""
    terms = [(-0.5 * w, _product(system, {q: "Z"})) for q, w in qubits_weights if w != 0]
    return ObservableSum(name, tuple(terms), 0.5 * sum(w for _, w in qubits_weights))


def _parse_sites(arg: str, expected: int, name: str) -> list[int]:
    try:
        sites = [int(s) for s in arg.split(",")]
    except ValueError:
        raise ValueError(f"observables: cannot parse sites in {name!r}") from None
    if len(sites) != expected:
        raise ValueError(f"observables: {name!r} needs {expected} site(s)")
    return sites


OBSERVABLE_FAMILIES = (
    "identity",
    "magnetization",
    "magnetization_x",
    "zz_nn",
    "density",
    "density:<j>",
    "z:<j>",
    "zz:<i>,<j>",
    "correlator:<j>,<d>",
    "density_density:<i>,<j>",
    "charge_density",
    "spin_density",
    "kappa_charge",
    "kappa_spin",
    "loschmidt",
)


def build_observables(
    spec: ModelSpec, which: Sequence[str], system: PartitionedSystem, preset: str = "all-zero"
) -> list[ObservableSum]:
    """Observables by family name; see ``OBSERVABLE_FAMILIES``.

    ``correlator:j,d`` expands into the three pieces ``z:j``, ``z:j+d`` and
    ``zz:j,j+d`` from which :func:`connected_correlator` assembles ``C_d``.
    """
    n = system.n_qubits
    hubbard = isinstance(spec, FermiHubbard)

    def site(j: int) -> int:
        if not 1 <= j <= n:
            raise ValueError(f"observables: site {j} outside 1..{n}")
        return j - 1

    out: list[ObservableSum] = []
    for item in which:
        fam, _, arg = item.partition(":")
        if fam == "identity":
            out.append(ObservableSum("identity", ((1.0, (IDENTITY,) * system.n_subsystems),)))
        elif fam == "magnetization":
            out.append(ObservableSum("Mz", tuple((1.0 / n, _product(system, {q: "Z"})) for q in range(n))))
        elif fam == "magnetization_x":
            out.append(ObservableSum("Mx", tuple((1.0 / n, _product(system, {q: "X"})) for q in range(n))))
        elif fam == "zz_nn":
            out.append(
                ObservableSum(
                    "C1", tuple((1.0 / (n - 1), _product(system, {q: "Z", q + 1: "Z"})) for q in range(n - 1))
                )
            )
        elif fam == "density" and not arg:
            if hubbard:
                L = spec.L
                out += [_occupation(system, f"n_up[{j + 1}]", [(j, 1.0)]) for j in range(L)]
                out += [_occupation(system, f"n_dn[{j + 1}]", [(L + j, 1.0)]) for j in range(L)]
            else:
                out += [_occupation(system, f"n[{q + 1}]", [(q, 1.0)]) for q in range(n)]
        elif fam == "density":
            (j,) = _parse_sites(arg, 1, item)
            out.append(_occupation(system, f"n[{j}]", [(site(j), 1.0)]))
        elif fam == "z":
            (j,) = _parse_sites(arg, 1, item)
            out.append(ObservableSum(f"Z[{j}]", ((1.0, _product(system, {site(j): "Z"})),)))
        elif fam == "zz":
            i, j = _parse_sites(arg, 2, item)
            if i == j:
                raise ValueError("observables: zz needs two distinct sites")
            out.append(ObservableSum(f"ZZ[{i},{j}]", ((1.0, _product(system, {site(i): "Z", site(j): "Z"})),)))
        elif fam == "correlator":
            j, d = _parse_sites(arg, 2, item)
            out += build_observables(spec, [f"z:{j}", f"z:{j + d}", f"zz:{j},{j + d}"], system, preset)
        elif fam == "density_density":
            i, j = _parse_sites(arg, 2, item)
            if i == j:
                raise ValueError("observables: density_density needs i != j")
            qi, qj = site(i), site(j)
            terms = (
                (-0.25, _product(system, {qi: "Z"})),
                (-0.25, _product(system, {qj: "Z"})),
                (0.25, _product(system, {qi: "Z", qj: "Z"})),
            )
            out.append(ObservableSum(f"rho[{i},{j}]", terms, 0.25))
        elif fam in ("charge_density", "spin_density", "kappa_charge", "kappa_spin"):
            if not hubbard:
                raise ValueError(f"observables: {fam} requires a hubbard model")
            L = spec.L
            sign = 1.0 if fam.endswith("charge") or fam == "charge_density" else -1.0
            if fam.endswith("_density"):
                tag = "rho_c" if sign > 0 else "rho_s"
                out += [
                    _occupation(system, f"{tag}[{j + 1}]", [(j, 1.0), (L + j, sign)]) for j in range(L)
                ]
            else:
                centre = (L + 1) / 2
                weights = []
                for j in range(L):
                    w = abs(j + 1 - centre)
                    weights += [(j, w), (L + j, sign * w)]
                out.append(_occupation(system, "kappa_c" if sign > 0 else "kappa_s", weights))
        elif fam == "loschmidt":
            if preset != "all-zero":
                raise UnsupportedConfigurationError(
                    "observables: loschmidt amplitude is only available for the all-zero initial state"
                )
            proj = tuple(BasisProjector(size, 0) for size in system.subsystem_sizes)
            out.append(ObservableSum("G", ((1.0, proj),)))
        else:
            raise ValueError(f"observables: unknown observable {item!r}")
    return out


def connected_correlator(zz: float, zi: float, zj: float) -> float:
    """``<Z_i Z_j> - <Z_i><Z_j>``."""
    return zz - zi * zj
