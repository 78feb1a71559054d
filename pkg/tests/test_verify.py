import math

import numpy as np
import pytest
import scipy.linalg
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from pqsim import PauliString, PauliSum, ResourceLimitError, evolve_dense, evolve_krylov
from pqsim.models import TFIM, InteractionTerm, XXChain, build_full, build_initial, build_observables, partition
from pqsim.pauli import basis_state, random_state
from pqsim.verify import (
    bessel_i,
    check_condition1,
    choi_lower_bound,
    dyson_cost,
    dyson_error_bound,
    interaction_norm,
    lr_bound_nn,
    oracle_evolve_expect,
    oracle_observables,
)


def term(lam, *labels):
    return InteractionTerm(lam, tuple(PauliString.from_label(s) for s in labels))


# -- dense Choi oracle -----------------------------------------------------------------


def dense_choi_bound(terms, sizes):
    """Reshuffled Choi trace norms computed from the full matrix, one per subsystem."""
    N = sum(sizes)
    d = 1 << N
    offsets = np.cumsum((0,) + tuple(sizes[:-1]))
    V = np.zeros((d, d), dtype=complex)
    for t in terms:
        x = z = 0
        for off, f in zip(offsets, t.factors):
            x |= f.x_mask << int(off)
            z |= f.z_mask << int(off)
        V += t.lam * PauliString(N, x, z).to_dense()
    phi = np.eye(d).reshape(-1) / np.sqrt(d)  # index i_A * d + i_S
    VI = np.kron(np.eye(d), V)
    rho = np.outer(phi, phi.conj())
    choi = -1j * (VI @ rho - rho @ VI)
    # axes: A_ket, S_ket, A_bra, S_bra, each split into N binary axes (axis a <-> qubit N-1-a)
    t = choi.reshape([2] * (4 * N))
    norms = []
    for l, (off, size) in enumerate(zip(offsets, sizes)):
        qubits = range(int(off), int(off) + size)
        row_axes = [g * N + (N - 1 - q) for g in range(4) for q in qubits]
        col_axes = [a for a in range(4 * N) if a not in row_axes]
        m = np.transpose(t, row_axes + col_axes).reshape(1 << len(row_axes), -1)
        norms.append(np.linalg.svd(m, compute_uv=False).sum())
    return norms


def test_dense_oracle_single_term():
    assert max(dense_choi_bound([term(0.7, "X", "X")], (1, 1))) == pytest.approx(1.4)


def test_single_term():
    rep = choi_lower_bound([term(-0.35, "X", "X")], (1, 1))
    assert rep.lower_bound == pytest.approx(0.7, abs=1e-12)
    assert rep.explicit_cost_rate == pytest.approx(0.7)
    assert rep.condition1


def test_xyz_three_subsystems():
    a, b, c = 0.3, -0.5, 1.1
    terms = [term(a, "X", "X", "X"), term(b, "Y", "Y", "Y"), term(c, "Z", "Z", "Z")]
    rep = choi_lower_bound(terms, (1, 1, 1))
    assert rep.condition1
    assert rep.lower_bound == pytest.approx(2 * (abs(a) + abs(b) + abs(c)), abs=1e-8)
    assert np.allclose(rep.per_subsystem_norms, dense_choi_bound(terms, (1, 1, 1)), atol=1e-10)


def test_empty():
    rep = choi_lower_bound([], (2, 2))
    assert rep.lower_bound == 0 and rep.explicit_cost_rate == 0


def test_guard():
    with pytest.raises(ResourceLimitError):
        choi_lower_bound([term(1, "XIIII", "XIIII", "XIIII")], (5, 5, 5))


def random_terms(rng, sizes, n_terms, allow_identity=True):
    out = []
    for _ in range(n_terms):
        factors = []
        for s in sizes:
            while True:
                lab = "".join(rng.choice(list("IXYZ"), size=s))
                if allow_identity or set(lab) != {"I"}:
                    break
            factors.append(lab)
        if sum(set(f) != {"I"} for f in factors) < 2:
            factors = ["X" * s for s in sizes]
        out.append(term(float(rng.normal()), *factors))
    return out


@pytest.mark.parametrize("sizes", [(1, 1), (1, 1, 1), (2, 2), (1, 2)])
def test_gram_route_matches_dense_oracle(sizes):
    rng = np.random.default_rng(sum(sizes) * 7 + len(sizes))
    for _ in range(15):
        terms = random_terms(rng, sizes, int(rng.integers(1, 5)))
        rep = choi_lower_bound(terms, sizes)
        assert np.allclose(rep.per_subsystem_norms, dense_choi_bound(terms, sizes), atol=1e-9)


def test_bound_never_exceeds_explicit_rate():
    rng = np.random.default_rng(11)
    for _ in range(50):
        terms = random_terms(rng, (2, 2), int(rng.integers(2, 6)))
        rep = choi_lower_bound(terms, (2, 2))
        assert rep.lower_bound <= rep.explicit_cost_rate + 1e-9


def test_non_orthogonal_pair_is_strictly_cheaper():
    rep = choi_lower_bound([term(1, "X", "X"), term(1, "X", "Z")], (1, 1))
    assert not rep.condition1
    assert rep.lower_bound == pytest.approx(2 * math.sqrt(2))


# -- Condition 1 -----------------------------------------------------------------------


def test_condition1_shared_factor():
    rep = check_condition1([term(1, "X", "X"), term(1, "X", "Z")], (1, 1))
    assert not rep and rep.violations


def test_condition1_identity_on_support():
    rep = check_condition1([term(1, "X", "X", "I"), term(1, "Y", "Y", "Y")], (1, 1, 1))
    assert not rep


def test_condition1_term_limit():
    rep = check_condition1([term(1, "XI", "ZI"), term(1, "IY", "IX")], (2, 2))
    assert rep.holds and rep.min_weight == 1 and rep.term_limit == 6 and rep.n_terms <= rep.term_limit


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_condition1_monotone_under_deletion(seed):
    rng = np.random.default_rng(seed)
    terms = random_terms(rng, (1, 2), int(rng.integers(2, 5)), allow_identity=False)
    if check_condition1(terms, (1, 2)):
        for k in range(len(terms)):
            assert check_condition1(terms[:k] + terms[k + 1 :], (1, 2))


# -- oracle ----------------------------------------------------------------------------


def test_oracle_t0_is_initial_expectation():
    h = build_full(TFIM(4, h=0.8))
    psi = random_state(4, np.random.default_rng(0))
    op = PauliString.from_label("XZIY")
    (v,) = oracle_evolve_expect(h, psi, op, [0.0])
    assert v == pytest.approx(np.vdot(psi, op.to_dense() @ psi).real)


def test_oracle_tfim_h0_stays_polarised():
    spec = TFIM(6, h=0.0)
    sys = partition(spec, [3, 3])
    init = build_initial(spec, sys)
    obs = build_observables(spec, ["magnetization"], sys)
    vals = oracle_observables(build_full(spec), sys, init, obs, [0.5, 1.0, 3.0])
    assert np.allclose(vals, 1.0, atol=1e-12)


def single_excitation_site4(n=8):
    psi = basis_state(n, 1 << 3)
    return psi


def test_oracle_single_particle_sector():
    n, J = 8, 0.5
    spec = XXChain(n, J=J)
    h = build_full(spec)
    grid = [0.3, 0.9, 1.7]
    ops = [PauliSum(n, [(-0.5, PauliString.from_ops({j: "Z"}, n))]) for j in range(n)]
    vals = oracle_evolve_expect(h, single_excitation_site4(n), ops, grid) + 0.5
    # one excitation hops with amplitude 2J on a tridiagonal n x n matrix
    m = np.diag([2 * J] * (n - 1), 1) + np.diag([2 * J] * (n - 1), -1)
    e0 = np.zeros(n)
    e0[3] = 1
    for g, t in enumerate(grid):
        amp = scipy.linalg.expm(-1j * t * m) @ e0
        assert np.max(np.abs(vals[:, g] - np.abs(amp) ** 2)) < 1e-8


@pytest.mark.parametrize("n", [4, 6, 8])
def test_dense_and_krylov_agree(n):
    h = build_full(TFIM(n, h=1.1))
    psi = random_state(n, np.random.default_rng(n))
    assert np.linalg.norm(evolve_dense(psi, h, 1.3) - evolve_krylov(psi, h, 1.3)) < 1e-8


def test_trotter_oracle_matches_layer_product():
    spec = TFIM(4, h=0.7)
    h = build_full(spec)
    diag = PauliSum(4, [(c, p) for c, p in h if p.is_diagonal()]).to_dense()
    rest = PauliSum(4, [(c, p) for c, p in h if not p.is_diagonal()]).to_dense()
    step = scipy.linalg.expm(-0.25j * rest) @ scipy.linalg.expm(-0.25j * diag)
    psi0 = basis_state(4)
    z = PauliString.from_label("ZIII")
    vals = oracle_evolve_expect(h, psi0, z, [0.5, 1.0], trotter_steps=4, horizon=1.0)
    for k, v in zip((2, 4), vals):
        psi = np.linalg.matrix_power(step, k) @ psi0
        assert v == pytest.approx(np.vdot(psi, z.to_dense() @ psi).real, abs=1e-9)


def test_oracle_guard():
    h = PauliSum(21, [(1.0, PauliString.from_ops({0: "X"}, 21))])
    with pytest.raises(ResourceLimitError):
        oracle_evolve_expect(h, np.zeros(2, dtype=complex), PauliString.identity(21), [1.0])


def test_lieb_robinson_envelope():
    n, J = 10, 0.5
    spec = XXChain(n, J=J)
    src = 4
    psi0 = basis_state(n, 1 << src)
    grid = np.linspace(0.1, 2.0, 8)
    ops = [PauliSum(n, [(-0.5, PauliString.from_ops({j: "Z"}, n))]) for j in range(n)]
    vals = oracle_evolve_expect(build_full(spec), psi0, ops, grid) + 0.5
    for j in range(n):
        start = 1.0 if j == src else 0.0
        for g, t in enumerate(grid):
            assert abs(vals[j, g] - start) <= lr_bound_nn(abs(j - src), J, t) + 1e-12


def test_interaction_norm():
    assert interaction_norm(partition(TFIM(6), [3, 3])) == pytest.approx(1.0)
    assert interaction_norm(partition(XXChain(4, J_boundary=0.4), [2, 2])) == pytest.approx(0.8)


# -- Dyson and Bessel ------------------------------------------------------------------


def test_dyson_cost():
    assert dyson_cost(0, 1.3, 2.0) == 1.0
    assert dyson_cost(1, 0.7, 1.5) == pytest.approx(1 + 2 * 1.5 * 0.7)
    assert dyson_cost(50, 1.0, 1.0) == pytest.approx(math.exp(2), abs=1e-10)


def test_dyson_error_envelope_decays():
    vals = [dyson_error_bound(k, 1.0, 1.0) for k in range(8)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(math.e)


def test_bessel_values():
    assert bessel_i(0, 0.0) == 1.0
    assert bessel_i(1, 0.0) == 0.0
    assert bessel_i(2, 1.0) == pytest.approx(0.1357476697670383, rel=1e-14)


@pytest.mark.parametrize("d", range(0, 8))
@pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 3.0, 8.0, 20.0])
def test_bessel_against_scipy(d, x):
    assert bessel_i(d, x) == pytest.approx(scipy.special.iv(d, x), rel=1e-10)


@pytest.mark.parametrize("x", [0.2, 1.0, 4.0, 12.0])
def test_bessel_recurrence(x):
    for d in range(1, 8):
        lhs = bessel_i(d - 1, x) - bessel_i(d + 1, x)
        assert lhs == pytest.approx(2 * d / x * bessel_i(d, x), rel=1e-9)


def test_lr_bound_argument():
    assert lr_bound_nn(2, 0.25, 1.0) == pytest.approx(bessel_i(2, 1.0))
    with pytest.raises(ValueError):
        lr_bound_nn(-1, 1.0, 1.0)
