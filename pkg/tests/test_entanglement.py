import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kcsr.dynamics import DensityMatrix
from kcsr.entanglement import (
    Bipartition, log_negativity, mutual_information_matrix, partial_transpose, product_state_FdagF,
    reduced_density, witness,
)
from kcsr.spin_algebra import ConstraintRule, PureState, expect

LN2 = np.log(2)


def bell():
    return DensityMatrix.from_pure(PureState.from_terms(2, {"01": 1, "10": 1}).normalize())


def site_state(rng, p=None):
    """(amp_down, amp_up) for one site with up-probability p."""
    if p is None:
        p = rng.uniform()
    phase = np.exp(2j * np.pi * rng.uniform())
    return np.array([np.sqrt(1 - p), phase * np.sqrt(p)])


def product_vector(sites):
    # site 1 is the least significant bit, so it is the last kron factor
    vec = np.ones(1, dtype=complex)
    for s in sites:
        vec = np.kron(s, vec)
    return vec


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / abs(np.diagonal(r)))


def test_bell_negativity():
    assert log_negativity(bell()) == pytest.approx(LN2, abs=1e-12)


def test_product_and_mixed_zero(rng):
    vec = product_vector([site_state(rng) for _ in range(4)])
    rho = DensityMatrix(4, np.outer(vec, vec.conj()))
    assert log_negativity(rho, Bipartition.half(4)) == pytest.approx(0, abs=1e-10)
    assert log_negativity(DensityMatrix.maximally_mixed(3)) == 0


def test_partial_transpose_examples(rng):
    part = Bipartition(2, (1,))
    m = bell().entries
    assert np.min(np.linalg.eigvalsh(partial_transpose(m, part))) == pytest.approx(-0.5)
    r = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    p3 = Bipartition(3, (1, 3))
    assert np.allclose(partial_transpose(partial_transpose(r, p3), p3), r)
    assert np.trace(partial_transpose(r, p3)) == pytest.approx(np.trace(r))
    # product: rho_A (x) rho_B -> rho_A (x) rho_B^T
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.allclose(partial_transpose(np.kron(b, a), part), np.kron(b.T, a))


def test_bipartition_rules():
    assert Bipartition.half(5).subset_a == (1, 2, 3)
    assert Bipartition.half(5).subset_b == (4, 5)
    with pytest.raises(ValueError):
        Bipartition(3, (1, 2, 3))
    with pytest.raises(ValueError):
        Bipartition(3, (0,))


@settings(max_examples=25)
@given(st.integers(0, 2**31 - 1))
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    dim = 16
    v = rng.normal(size=(3, dim)) + 1j * rng.normal(size=(3, dim))
    rho = DensityMatrix.from_snapshots(v)
    U = np.ones((1, 1))
    for _ in range(4):
        U = np.kron(random_unitary(rng), U)
    rotated = U @ rho.entries @ U.conj().T
    part = Bipartition.half(4)
    assert log_negativity(rotated, part) == pytest.approx(log_negativity(rho, part), abs=1e-9)


def test_mutual_information_examples(rng):
    mi = mutual_information_matrix(bell())
    assert mi[0, 1] == pytest.approx(2 * LN2)
    assert mi[0, 0] == 0
    vec = product_vector([site_state(rng) for _ in range(3)])
    assert np.allclose(mutual_information_matrix(np.outer(vec, vec.conj())), 0, atol=1e-10)
    dimer = PureState.from_terms(5, {"11010": 1, "10011": -1}).normalize()
    mi = mutual_information_matrix(DensityMatrix.from_pure(dimer))
    assert mi[1, 4] > 0.1
    assert np.allclose(mi, mi.T) and np.all(mi >= -1e-10)


def test_reduced_density_trace(rng):
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    v /= np.linalg.norm(v)
    r = reduced_density(np.outer(v, v.conj()), [1, 3])
    assert r.shape == (4, 4)
    assert np.trace(r) == pytest.approx(1)


def test_witness_examples():
    rule = ConstraintRule.east("open")
    dimer = DensityMatrix.from_pure(PureState.from_terms(5, {"11010": 1, "10011": -1}).normalize())
    rep = witness(dimer, rule)
    assert rep.dark_residual < 1e-12
    assert rep.nadj == pytest.approx(1)
    assert rep.verdict == "Entangled"
    mix = DensityMatrix.from_snapshots(np.stack([PureState.basis("10100").amplitudes,
                                                 PureState.basis("00101").amplitudes]))
    rep = witness(mix, rule)
    assert rep.nadj == 0 and rep.verdict == "Inconclusive"
    rep = witness(DensityMatrix.from_pure(PureState.fully_up(4)), ConstraintRule.east())
    assert rep.dark_residual == pytest.approx(4) and rep.verdict == "Inconclusive"


def test_product_formula_examples():
    assert product_state_FdagF(np.ones(6), np.zeros(6)) == pytest.approx(6)
    p = np.array([1, 0, 1, 0, 1, 0.0])
    assert product_state_FdagF(p, np.zeros(6)) == 0
    assert product_state_FdagF(p, np.zeros(6), form="two_term") == 0
    with pytest.raises(ValueError):
        product_state_FdagF([1.2, 0.0], [0, 0])
    with pytest.raises(ValueError):
        product_state_FdagF([0.5, 0.5], [0.6, 0])


@settings(max_examples=30)
@given(st.integers(2, 7), st.integers(0, 2**31 - 1))
def test_product_formula_tensor_oracle(n, seed):
    rng = np.random.default_rng(seed)
    sites = [site_state(rng) for _ in range(n)]
    p = np.array([abs(s[1]) ** 2 for s in sites])
    s = np.array([np.conj(s[0]) * s[1] for s in sites])
    vec = product_vector(sites)
    ref = expect("FdagF", PureState(n, vec), ConstraintRule.east())
    assert product_state_FdagF(p, s) == pytest.approx(ref, abs=1e-10)
    assert product_state_FdagF(p, s, form="two_term") >= 0


def test_random_product_dark_states_have_no_pairs():
    rng = np.random.default_rng(2024)
    rule = ConstraintRule.east()
    for _ in range(1000):
        n = int(rng.integers(3, 8))
        up = np.zeros(n, bool)
        for j in rng.permutation(n):
            if not up[(j - 1) % n] and not up[(j + 1) % n] and rng.uniform() < 0.7:
                up[j] = True
        vec = product_vector([site_state(rng, rng.uniform(0.05, 1.0) if u else 0.0) for u in up])
        rep = witness(np.outer(vec, vec.conj()), rule)
        assert rep.dark_residual < 1e-12
        assert rep.nadj == 0.0
