import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqsim.pauli import (
    IDENTITY,
    BasisProjector,
    PauliString,
    PauliSum,
    apply_operator,
    apply_pauli,
    apply_pauli_sum,
    basis_state,
    bilinear,
    random_state,
)

SQ2 = 1 / np.sqrt(2)
PLUS = np.array([SQ2, SQ2], dtype=complex)
MINUS = np.array([SQ2, -SQ2], dtype=complex)


def test_x_flips_zero():
    out = apply_pauli(basis_state(1, 0), PauliString.from_label("X"))
    assert np.allclose(out, [0, 1])


def test_y_on_zero_gives_i_one():
    out = apply_pauli(basis_state(1, 0), PauliString.from_label("Y"))
    assert np.allclose(out, [0, 1j])


def test_zz_on_01():
    # little-endian: |01> with qubit 0 set is index 1
    zz = PauliString.from_ops({0: "Z", 1: "Z"}, 2)
    psi = basis_state(2, 1)
    assert np.allclose(apply_pauli(psi, zz), -psi)


def test_identity_masks_zero():
    p = PauliString.identity(5)
    assert p.x_mask == 0 and p.z_mask == 0 and p.is_identity()


def test_masks_outside_register_rejected():
    with pytest.raises(ValueError):
        PauliString(2, x_mask=0b100)


def test_label_roundtrip():
    p = PauliString.from_label("XYZI")
    assert PauliString.from_label(p.label) == p


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_pauli(basis_state(2), PauliString.from_label("X"))
    with pytest.raises(ValueError):
        bilinear(basis_state(1), IDENTITY, basis_state(2))


def test_sum_merges_and_drops_zero():
    x = PauliString.from_label("X")
    h = PauliSum(1, [(0.5, x), (0.5, x)])
    assert len(h) == 1 and h.coefficient(x) == 1.0
    assert np.allclose(apply_pauli_sum(basis_state(1), h), [0, 1])
    assert len(PauliSum(1, [(1.0, x), (-1.0, x)])) == 0


def test_z_sum_on_zero():
    h = PauliSum(1, [(1.0, PauliString.from_label("Z"))])
    assert np.allclose(apply_pauli_sum(basis_state(1), h), basis_state(1))


def _tfim3(h=0.7):
    terms = [(1.0, PauliString.from_ops({i: "Z", i + 1: "Z"}, 3)) for i in range(2)]
    terms += [(h, PauliString.from_ops({i: "X"}, 3)) for i in range(3)]
    return PauliSum(3, terms)


def _dense_from_kron(label):
    mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
    # label character q acts on qubit q; kron puts the last factor on qubit 0
    out = np.array([[1.0]])
    for ch in reversed(label):
        out = np.kron(out, mats[ch])
    return out


def test_tfim3_matches_dense():
    h = _tfim3()
    dense = sum(c * _dense_from_kron(p.label) for c, p in h)
    psi = random_state(3, np.random.default_rng(1))
    assert np.max(np.abs(apply_pauli_sum(psi, h) - dense @ psi)) <= 1e-12
    assert np.max(np.abs(h.to_dense() - dense)) <= 1e-12


def test_bilinear_examples():
    z = PauliString.from_label("Z")
    x = PauliString.from_label("X")
    assert bilinear(basis_state(1, 0), z, basis_state(1, 0)) == pytest.approx(1)
    assert bilinear(basis_state(1, 1), IDENTITY, basis_state(1, 0)) == 0
    # X|-> = -|->, so <+|X|-> vanishes and <-|X|-> = -1
    assert abs(bilinear(PLUS, x, MINUS)) < 1e-15
    assert bilinear(MINUS, x, MINUS) == pytest.approx(-1)


def test_projector():
    psi = random_state(2, np.random.default_rng(3))
    proj = BasisProjector(2, 0)
    assert bilinear(psi, proj, psi) == pytest.approx(abs(psi[0]) ** 2)
    assert np.allclose(apply_operator(psi, proj), [psi[0], 0, 0, 0])


def test_batched_rows():
    rng = np.random.default_rng(0)
    rows = np.stack([random_state(3, rng) for _ in range(4)])
    p = PauliString.from_label("XYZ")
    out = apply_pauli(rows, p)
    for r, o in zip(rows, out):
        assert np.allclose(o, apply_pauli(r, p))
    h = _tfim3()
    assert np.allclose(h.matvec(rows), rows @ h.to_dense().T)


labels = st.text(alphabet="IXYZ", min_size=1, max_size=5)


@settings(max_examples=60, deadline=None)
@given(labels, st.integers(0, 2**31 - 1))
def test_involution_and_hermitian(label, seed):
    p = PauliString.from_label(label)
    psi = random_state(len(label), np.random.default_rng(seed))
    assert np.array_equal(apply_pauli(apply_pauli(psi, p), p), psi)
    m = p.to_dense()
    assert np.allclose(m, m.conj().T)
    assert np.allclose(m, _dense_from_kron(label))


@settings(max_examples=60, deadline=None)
@given(labels, labels)
def test_commutation_matches_dense(a, b):
    n = max(len(a), len(b))
    p, q = PauliString.from_label(a.rjust(n, "I")), PauliString.from_label(b.rjust(n, "I"))
    pm, qm = p.to_dense(), q.to_dense()
    assert p.commutes_with(q) == np.allclose(pm @ qm, qm @ pm)
