"""Pauli strings, real-weighted Pauli sums and dense statevector primitives.

Conventions used throughout the package:

* Qubit 0 is the least significant bit of a basis index (little-endian).
* A Pauli string is stored as two bit masks ``(x_mask, z_mask)``; per qubit
  ``(0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z``. The factor ``i`` that turns ``XZ``
  into ``Y`` is applied when the string acts on a state, so every stored
  string is Hermitian and squares to the identity.
* Statevectors are plain 1-D ``complex128`` numpy arrays of length ``2**n``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

_LABEL_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LABEL = {v: k for k, v in _LABEL_BITS.items()}


def n_qubits_of(state: np.ndarray) -> int:
    """Number of qubits of a dense state, validating that its length is a power of two."""
    dim = state.shape[-1]
    n = dim.bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise ValueError(f"state length {dim} is not a power of two")
    return n


def _check_dims(state: np.ndarray, n_qubits: int) -> None:
    if state.shape[-1] != (1 << n_qubits):
        raise ValueError(
            f"dimension mismatch: state has length {state.shape[-1]}, operator acts on {n_qubits} qubits"
        )


def basis_state(n_qubits: int, index: int = 0) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def random_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return psi / np.linalg.norm(psi)


@lru_cache(maxsize=4096)
def _action(n_qubits: int, x_mask: int, z_mask: int) -> tuple[np.ndarray, np.ndarray]:
    """Gather index and phase such that ``(P psi)[c] = phase[c] * psi[perm[c]]``."""
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    perm = idx ^ x_mask
    y_count = (x_mask & z_mask).bit_count()
    parity = np.bitwise_count(perm & z_mask) & 1
    phase = (1j ** (y_count % 4)) * (1.0 - 2.0 * parity)
    perm.setflags(write=False)
    phase.setflags(write=False)
    return perm, phase


class PauliString:
    """Tensor product of single-qubit Paulis in symplectic form."""

    __slots__ = ("n_qubits", "x_mask", "z_mask")

    def __init__(self, n_qubits: int, x_mask: int = 0, z_mask: int = 0):
        if n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        full = (1 << n_qubits) - 1
        if x_mask & ~full or z_mask & ~full or x_mask < 0 or z_mask < 0:
            raise ValueError(f"masks exceed {n_qubits} qubits")
        self.n_qubits = int(n_qubits)
        self.x_mask = int(x_mask)
        self.z_mask = int(z_mask)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Build from a label such as ``"XIZ"``; character ``i`` acts on qubit ``i``."""
        x = z = 0
        for q, ch in enumerate(label.upper()):
            try:
                bx, bz = _LABEL_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z)

    @classmethod
    def from_ops(cls, ops: Mapping[int, str], n_qubits: int) -> "PauliString":
        """Build from ``{qubit: 'X'|'Y'|'Z'}``."""
        x = z = 0
        for q, ch in ops.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} outside register of {n_qubits}")
            bx, bz = _LABEL_BITS[ch.upper()]
            x |= bx << q
            z |= bz << q
        return cls(n_qubits, x, z)

    @property
    def label(self) -> str:
        return "".join(
            _BITS_LABEL[((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)] for q in range(self.n_qubits)
        )

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return self.support.bit_count()

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def is_diagonal(self) -> bool:
        return self.x_mask == 0

    def key(self) -> tuple[int, int]:
        return (self.x_mask, self.z_mask)

    def restrict(self, offset: int, size: int) -> "PauliString":
        """Factor acting on qubits ``offset .. offset+size-1``, relabelled from 0."""
        mask = (1 << size) - 1
        return PauliString(size, (self.x_mask >> offset) & mask, (self.z_mask >> offset) & mask)

    def embed(self, offset: int, n_total: int) -> "PauliString":
        return PauliString(n_total, self.x_mask << offset, self.z_mask << offset)

    def tensor(self, other: "PauliString") -> "PauliString":
        """``self`` on the low qubits, ``other`` on the qubits above them."""
        n = self.n_qubits
        return PauliString(n + other.n_qubits, self.x_mask | (other.x_mask << n), self.z_mask | (other.z_mask << n))

    def commutes_with(self, other: "PauliString") -> bool:
        return ((self.x_mask & other.z_mask).bit_count() + (self.z_mask & other.x_mask).bit_count()) % 2 == 0

    def action(self) -> tuple[np.ndarray, np.ndarray]:
        return _action(self.n_qubits, self.x_mask, self.z_mask)

    def to_dense(self) -> np.ndarray:
        perm, phase = self.action()
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        mat[np.arange(dim), perm] = phase
        return mat

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self.n_qubits, self.x_mask, self.z_mask) == (other.n_qubits, other.x_mask, other.z_mask)

    def __hash__(self):
        return hash((self.n_qubits, self.x_mask, self.z_mask))

    def __repr__(self):
        return f"PauliString({self.label!r})"


class PauliSum:
    """Hermitian operator ``sum_k c_k P_k`` with real coefficients.

    Duplicate strings are merged on construction and exact zeros dropped. The
    instance is treated as immutable; a grouped form used for matrix-free
    application is cached on first use.
    """

    def __init__(self, n_qubits: int, terms: Iterable[tuple[float, PauliString]] = ()):
        self.n_qubits = int(n_qubits)
        merged: dict[tuple[int, int], float] = {}
        for coeff, p in terms:
            if p.n_qubits != self.n_qubits:
                raise ValueError(f"term on {p.n_qubits} qubits added to a {self.n_qubits}-qubit sum")
            c = complex(coeff)
            if abs(c.imag) > 0:
                raise ValueError("PauliSum coefficients must be real")
            merged[p.key()] = merged.get(p.key(), 0.0) + c.real
        self._terms = tuple(
            (c, PauliString(self.n_qubits, x, z)) for (x, z), c in merged.items() if c != 0.0
        )
        self._groups = None

    @classmethod
    def from_dict(cls, n_qubits: int, coeffs: Mapping[str, float]) -> "PauliSum":
        """From ``{"ZZI": 1.0, "XII": 0.5}`` style labels."""
        return cls(n_qubits, ((c, PauliString.from_label(lbl)) for lbl, c in coeffs.items()))

    @property
    def terms(self) -> tuple[tuple[float, PauliString], ...]:
        return self._terms

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def to_dict(self) -> dict[str, float]:
        return {p.label: c for c, p in self._terms}

    def coefficient(self, p: PauliString) -> float:
        for c, q in self._terms:
            if q == p:
                return c
        return 0.0

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot add sums on different registers")
        return PauliSum(self.n_qubits, self._terms + other._terms)

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(self.n_qubits, ((scalar * c, p) for c, p in self._terms))

    __rmul__ = __mul__

    def embed(self, offset: int, n_total: int) -> "PauliSum":
        return PauliSum(n_total, ((c, p.embed(offset, n_total)) for c, p in self._terms))

    def identity_coefficient(self) -> float:
        return self.coefficient(PauliString.identity(self.n_qubits))

    def without_identity(self) -> "PauliSum":
        return PauliSum(self.n_qubits, ((c, p) for c, p in self._terms if not p.is_identity()))

    def is_diagonal(self) -> bool:
        return all(p.is_diagonal() for _, p in self._terms)

    def one_norm(self) -> float:
        return float(sum(abs(c) for c, _ in self._terms))

    def grouped(self) -> list[tuple[int, np.ndarray]]:
        """Terms grouped by X mask: ``(H psi)[c] = sum_x D_x[c] psi[c ^ x]``."""
        if self._groups is None:
            by_x: dict[int, np.ndarray] = {}
            for coeff, p in self._terms:
                _, phase = p.action()
                if p.x_mask in by_x:
                    by_x[p.x_mask] = by_x[p.x_mask] + coeff * phase
                else:
                    by_x[p.x_mask] = coeff * phase
            idx = np.arange(1 << self.n_qubits, dtype=np.int64)
            self._groups = [(x, d, idx ^ x) for x, d in sorted(by_x.items())]
        return [(x, d) for x, d, _ in self._groups]

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        """Apply to a state, or to a batch of states stored as rows."""
        _check_dims(psi, self.n_qubits)
        self.grouped()
        out = np.zeros(psi.shape, dtype=complex)
        for x, d, perm in self._groups:
            if x == 0:
                out += d * psi
            else:
                out += d * psi[..., perm]
        return out

    def diagonal(self) -> np.ndarray:
        """Diagonal of the matrix (the X-mask-zero group)."""
        for x, d in self.grouped():
            if x == 0:
                return d.real.copy()
        return np.zeros(1 << self.n_qubits)

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        rows = np.arange(dim)
        for x, d in self.grouped():
            mat[rows, rows ^ x] += d
        return mat

    def __repr__(self):
        inner = ", ".join(f"{p.label}: {c:g}" for c, p in self._terms)
        return f"PauliSum({self.n_qubits}, {{{inner}}})"


class BasisProjector:
    """Projector ``|k><k|`` onto one computational basis state."""

    __slots__ = ("n_qubits", "index")

    def __init__(self, n_qubits: int, index: int = 0):
        if not 0 <= index < (1 << n_qubits):
            raise ValueError(f"basis index {index} outside {n_qubits}-qubit register")
        self.n_qubits = int(n_qubits)
        self.index = int(index)

    def __eq__(self, other):
        return isinstance(other, BasisProjector) and (self.n_qubits, self.index) == (other.n_qubits, other.index)

    def __hash__(self):
        return hash(("proj", self.n_qubits, self.index))

    def __repr__(self):
        return f"BasisProjector({self.n_qubits}, {self.index})"


class _Identity:
    """The identity operator on any register."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "IDENTITY"

    def __reduce__(self):
        return (_Identity, ())


IDENTITY = _Identity()


def apply_pauli(state: np.ndarray, p: PauliString) -> np.ndarray:
    """Return ``P|psi>``."""
    _check_dims(state, p.n_qubits)
    perm, phase = p.action()
    return phase * state[..., perm]


def apply_pauli_sum(state: np.ndarray, h: PauliSum) -> np.ndarray:
    """Return ``H|psi>`` without forming a matrix."""
    return h.matvec(state)


def apply_operator(state: np.ndarray, op) -> np.ndarray:
    """Apply identity, a Pauli string, a Pauli sum or a basis projector."""
    if op is IDENTITY or op is None:
        return np.array(state, dtype=complex, copy=True)
    if isinstance(op, PauliString):
        return apply_pauli(state, op)
    if isinstance(op, PauliSum):
        return op.matvec(state)
    if isinstance(op, BasisProjector):
        _check_dims(state, op.n_qubits)
        out = np.zeros(state.shape, dtype=complex)
        out[..., op.index] = state[..., op.index]
        return out
    raise TypeError(f"unsupported operator {type(op).__name__}")


def bilinear(bra: np.ndarray, op, ket: np.ndarray) -> complex:
    """``<bra|op|ket>`` for identity, Pauli string/sum or basis projector."""
    if bra.shape != ket.shape:
        raise ValueError(f"dimension mismatch: bra {bra.shape} vs ket {ket.shape}")
    if isinstance(op, BasisProjector):
        _check_dims(ket, op.n_qubits)
        return complex(np.conj(bra[op.index]) * ket[op.index])
    return complex(np.vdot(bra, apply_operator(ket, op)))
