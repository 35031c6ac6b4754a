import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from cohfluct.errors import NotHermitianError, NumericalCheckError, SpaceMismatchError, ValidationError
from cohfluct.hilbert import (
    Boson,
    DenseOperator,
    Propagator,
    SpaceDescriptor,
    Spin,
    StateVector,
    boson_operators,
    commutator,
    evolve,
    expectation,
    identity,
    iterated_commutator,
    iterated_commutators,
    product_state,
    spin_ladder,
    spin_operators,
    tensor_embed,
    variance,
)


def random_hermitian(rng, space):
    m = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    return DenseOperator(space, m + m.conj().T)


def random_state(rng, space):
    v = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    return StateVector(space, v, normalize=True)


def test_spin_half_sz():
    sz = spin_operators(1)[2]
    assert np.allclose(sz.entries, np.diag([0.5, -0.5]))


@pytest.mark.parametrize("two_s", [1, 2, 5, 12, 57, 200])
def test_su2_algebra_and_casimir(two_s):
    hbar = 0.7
    sx, sy, sz = spin_operators(two_s, hbar)
    scale = (hbar * two_s / 2) ** 2
    assert np.max(np.abs(commutator(sx, sy).entries - 1j * hbar * sz.entries)) <= 1e-14 * max(1, scale)
    cas = sx @ sx + sy @ sy + sz @ sz
    s = two_s / 2
    assert np.max(np.abs(cas.entries - hbar**2 * s * (s + 1) * np.eye(two_s + 1))) <= 1e-13 * max(1, scale)


def test_basis_order_descending_m():
    sp, sm = spin_ladder(2)
    sz = spin_operators(2)[2]
    assert np.allclose(np.diag(sz.entries), [1, 0, -1])
    # S+ raises: maps index 1 (m=0) to index 0 (m=1)
    assert abs(sp.entries[0, 1] - np.sqrt(2)) < 1e-15
    assert np.allclose(sm.entries, sp.entries.T)


def test_boson_lowering_on_fock_state():
    a, adag, q, p = boson_operators(3)
    v = (a @ StateVector.basis(a.space, 2)).amplitudes
    assert np.allclose(v, np.sqrt(2) * np.eye(4)[1])


@pytest.mark.parametrize("ncut", [1, 3, 10])
def test_truncated_boson_commutator(ncut):
    a, adag, q, p = boson_operators(ncut, hbar=1.3, omega=0.6)
    c = commutator(a, adag).entries
    expected = np.eye(ncut + 1)
    expected[ncut, ncut] = -ncut
    assert np.array_equal(np.round(c, 12), expected)
    pq = commutator(p, q).entries
    assert np.allclose(pq[:ncut, :ncut], (1.3 / 1j) * np.eye(ncut), atol=1e-14)


def test_tensor_embed_spin_half():
    space = SpaceDescriptor((Spin(1), Spin(1)))
    sz = spin_operators(1)[2]
    emb = tensor_embed(sz, space, 0)
    assert np.allclose(emb.entries, np.diag([0.5, 0.5, -0.5, -0.5]))
    assert tensor_embed(identity(SpaceDescriptor.spin(1)), space, 1).allclose(identity(space))


def test_embedded_slots_commute(rng):
    space = SpaceDescriptor((Boson(4), Spin(3), Spin(2)))
    x = tensor_embed(random_hermitian(rng, SpaceDescriptor.spin(3)), space, 1)
    y = tensor_embed(random_hermitian(rng, SpaceDescriptor.spin(2)), space, 2)
    z = tensor_embed(random_hermitian(rng, SpaceDescriptor.boson(4)), space, 0)
    assert np.max(np.abs(commutator(x, y).entries)) == 0.0
    assert np.max(np.abs(commutator(x, z).entries)) == 0.0


def test_tensor_embed_wrong_factor():
    space = SpaceDescriptor((Spin(1), Spin(2)))
    with pytest.raises(SpaceMismatchError):
        tensor_embed(spin_operators(1)[0], space, 1)


def test_iterated_commutator_ladder():
    sz = spin_operators(4, hbar=0.8)[2]
    sp, _ = spin_ladder(4, hbar=0.8)
    assert iterated_commutator(sz, sp, 0).allclose(sp)
    assert iterated_commutator(sz, sp, 1).allclose(0.8 * sp)
    # loop oracle
    y = sp.entries
    for k, c in enumerate(iterated_commutators(sz, sp, 5)):
        assert np.allclose(c, y, atol=1e-12)
        assert np.allclose(c, 0.8**k * sp.entries, atol=1e-12)
        y = sz.entries @ y - y @ sz.entries


def test_evolve_trivial_cases(rng):
    space = SpaceDescriptor.spin(5)
    psi = random_state(rng, space)
    assert np.allclose(evolve(psi, DenseOperator.zeros(space), 3.0).amplitudes, psi.amplitudes)
    h = 0.9
    sz = spin_operators(5)[2]
    m = np.diag(sz.entries).real
    out = evolve(StateVector.basis(space, 1), h * sz, 2.0)
    assert np.allclose(out.amplitudes, np.exp(-1j * h * m * 2.0) * np.eye(6)[1])


def test_variance_eigenstate_zero():
    sz = spin_operators(6)[2]
    assert variance(StateVector.basis(sz.space, 2), sz) == 0.0


def test_variance_rejects_non_hermitian():
    sp, _ = spin_ladder(2)
    with pytest.raises(NotHermitianError):
        variance(StateVector.basis(sp.space, 0), sp)


def test_state_validation():
    with pytest.raises(ValidationError):
        StateVector(SpaceDescriptor.spin(1), [1.0, 1.0])
    with pytest.raises(SpaceMismatchError):
        expectation(StateVector.basis(SpaceDescriptor.spin(1), 0), spin_operators(2)[0])


def test_product_state_kron(rng):
    a = random_state(rng, SpaceDescriptor.spin(1))
    b = random_state(rng, SpaceDescriptor.boson(2))
    ps = product_state([a, b])
    assert ps.space.dims == (2, 3)
    assert np.allclose(ps.amplitudes, np.kron(a.amplitudes, b.amplitudes))


def test_propagator_matches_expm(rng):
    space = SpaceDescriptor.spin(4)
    h = random_hermitian(rng, space)
    u = Propagator(h, hbar=0.6).operator(1.7).entries
    assert np.allclose(u, scipy.linalg.expm(-1j * h.entries * 1.7 / 0.6), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(two_s=st.integers(1, 20), seed=st.integers(0, 2**32 - 1),
       t1=st.floats(-30, 30), t2=st.floats(-30, 30))
def test_unitarity_and_composition(two_s, seed, t1, t2):
    rng = np.random.default_rng(seed)
    space = SpaceDescriptor.spin(two_s)
    h = random_hermitian(rng, space)
    psi = random_state(rng, space)
    one = evolve(psi, h, t1 + t2)
    two = evolve(evolve(psi, h, t1), h, t2)
    assert abs(one.norm() - 1) <= 1e-12
    assert np.max(np.abs(one.amplitudes - two.amplitudes)) <= 1e-11


def test_variance_clamps_roundoff_but_flags_real_negatives():
    sz = spin_operators(2)[2]
    psi = StateVector.basis(sz.space, 0)
    assert variance(psi, sz) == 0.0
    # a blatantly inconsistent "state" is caught rather than clamped
    bad = StateVector(sz.space, [1.0, 0.0, 0.0])
    object.__setattr__(bad, "amplitudes", np.array([2.0, 0.0, 0.0]))
    with pytest.raises((NumericalCheckError, ValidationError)):
        variance(bad, -1.0 * (sz @ sz) + 4.0 * DenseOperator.identity(sz.space))
