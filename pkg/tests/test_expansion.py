import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohfluct.acceptance import random_spin_polynomial
from cohfluct.coherent import OscCoherentParams, SpinCoherentParams, osc_coherent_state, spin_coherent_state
from cohfluct.errors import NumericalCheckError, ValidationError
from cohfluct.expansion import (
    energy_fluctuation_leading,
    multi_osc_product_series,
    osc_product_series,
    osc_variance_series,
    product_coherent_state,
    su2_leading_variance,
    su2_product_series,
    su2_symmetrized_product,
    su2_variance_series,
    two_spin_product_series,
)
from cohfluct.hilbert import (
    Boson,
    DenseOperator,
    SpaceDescriptor,
    Spin,
    boson_operators,
    expectation,
    spin_operators,
    tensor_embed,
    variance,
)

angles = st.tuples(st.floats(0, math.pi), st.floats(0, 2 * math.pi))


def axis_operator(two_s, vec, hbar=1.0):
    ops = spin_operators(two_s, hbar)
    return vec[0] * ops[0] + vec[1] * ops[1] + vec[2] * ops[2]


# oscillator ------------------------------------------------------------------

def test_osc_q_variance_first_order_only():
    p = OscCoherentParams(0.7 - 1.1j, omega=2.0)
    _, _, q, _ = boson_operators(p.default_ncut(), 1.0, 2.0)
    rep = osc_product_series(q, q, p)
    assert abs(rep.terms[1] - 0.25) < 1e-14
    assert np.max(np.abs(rep.terms[2:])) < 1e-14
    assert abs(rep.total - expectation(osc_coherent_state(p), q @ q)) < 1e-12


def test_osc_identity_series():
    p = OscCoherentParams(1.0)
    eye = DenseOperator.identity(SpaceDescriptor.boson(p.default_ncut()))
    rep = osc_product_series(eye, eye, p)
    assert abs(rep.terms[0] - 1) < 1e-14
    assert np.all(np.abs(rep.terms[1:]) == 0)


def test_osc_a_adag_converges_by_second_order():
    alpha = 1.3 + 0.4j
    p = OscCoherentParams(alpha)
    a, adag, _, _ = boson_operators(p.default_ncut())
    rep = osc_product_series(a, adag, p)
    assert abs(rep.partial_sums[min(2, len(rep.terms) - 1)] - (abs(alpha) ** 2 + 1)) < 1e-9


def test_osc_stop_reason_nmax():
    p = OscCoherentParams(1.0)
    _, _, q, _ = boson_operators(p.default_ncut())
    op = q @ q @ q @ q
    rep = osc_product_series(op, op, p, nmax=2)
    assert rep.stop_reason == "nmax"
    assert len(rep.terms) == 3


def test_osc_variance_of_quartic_matches_exact():
    p = OscCoherentParams(0.6 + 0.3j, omega=1.4, hbar=0.8)
    _, _, q, pp = boson_operators(p.default_ncut(), 0.8, 1.4)
    op = q @ q + 0.3 * (pp @ q + q @ pp)
    rep = osc_variance_series(op, p)
    assert rep.stop_reason == "small-terms"
    assert abs(rep.total - variance(osc_coherent_state(p), op)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(re=st.floats(-1.5, 1.5), im=st.floats(-1.5, 1.5), omega=st.floats(0.3, 3),
       c=st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_osc_variance_terms_nonnegative(re, im, omega, c):
    p = OscCoherentParams(complex(re, im), omega)
    _, _, q, pp = boson_operators(p.default_ncut(), 1.0, omega)
    op = c[0] * q + c[1] * pp + c[2] * (q @ q) + c[3] * (q @ pp + pp @ q)
    assert np.min(osc_variance_series(op, p, nmax=10).terms.real) >= -1e-14


def test_osc_swap_conjugates_terms():
    p = OscCoherentParams(0.5 + 0.9j, omega=1.3)
    _, _, q, pp = boson_operators(p.default_ncut(), 1.0, 1.3)
    a, b = q @ q + pp, pp @ q + q @ pp
    ab = osc_product_series(a, b, p, nmax=8)
    ba = osc_product_series(b, a, p, nmax=8)
    n = min(len(ab.terms), len(ba.terms))
    assert np.allclose(ba.terms[:n], np.conj(ab.terms[:n]), atol=1e-12)
    scaled = osc_product_series(2.5 * a, b, p, nmax=8)
    assert np.allclose(scaled.terms[:n], 2.5 * ab.terms[:n], atol=1e-12)


def test_osc_hbar_order_counting():
    # term n of q^2 x q^2 carries hbar^n
    vals = []
    for hbar in (1.0, 0.5):
        p = OscCoherentParams.from_phase_point(0.0, 0.0, 1.0, hbar)
        _, _, q, _ = boson_operators(p.default_ncut(), hbar, 1.0)
        vals.append(osc_product_series(q @ q, q @ q, p).terms[2])
    assert abs(vals[1] / vals[0] - 0.25) < 1e-12


# SU(2) -----------------------------------------------------------------------

def test_su2_own_axis_eigenstate():
    p = SpinCoherentParams(6, 1.2, 0.4)
    a = axis_operator(6, p.direction, hbar=0.7)
    rep = su2_product_series(a, a, p, hbar=0.7)
    assert np.max(np.abs(rep.terms[1:])) < 1e-13
    assert abs(rep.total - (0.7 * 3) ** 2) < 1e-12
    assert np.max(np.abs(su2_variance_series(a, p, 0.7).terms)) < 1e-13


def test_su2_sz_equator():
    p = SpinCoherentParams(2, math.pi / 2)
    sz = spin_operators(2)[2]
    rep = su2_product_series(sz, sz, p)
    assert abs(rep.total - rep.terms[0] - 0.5) < 1e-14
    var = su2_variance_series(sz, p)
    assert abs(var.terms[1] - 0.5) < 1e-14
    assert np.max(np.abs(var.terms[2:])) < 1e-15


def test_su2_sxsx_variance():
    p = SpinCoherentParams(4, 1.1, 0.3)
    sx = spin_operators(4)[0]
    op = sx @ sx
    assert abs(su2_variance_series(op, p).total - variance(spin_coherent_state(p), op)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(two_s=st.integers(1, 12), seed=st.integers(0, 2**32 - 1), ang=angles)
def test_su2_series_is_finite_identity(two_s, seed, ang):
    rng = np.random.default_rng(seed)
    a = random_spin_polynomial(rng, two_s)
    b = random_spin_polynomial(rng, two_s)
    rep = su2_product_series(a, b, SpinCoherentParams(two_s, *ang), cross_check=True)
    assert len(rep.terms) == two_s + 1
    assert rep.final_residual <= 1e-10 * a.norm() * b.norm()
    assert rep.cross_check <= 1e-9


@settings(max_examples=40, deadline=None)
@given(two_s=st.integers(1, 12), seed=st.integers(0, 2**32 - 1), ang=angles)
def test_su2_variance_terms_nonnegative(two_s, seed, ang):
    a = random_spin_polynomial(np.random.default_rng(seed), two_s).hermitized()
    rep = su2_variance_series(a, SpinCoherentParams(two_s, *ang))
    assert np.min(rep.terms) >= -1e-14
    assert abs(rep.total - rep.exact) <= 1e-10 * max(1.0, a.norm() ** 2)


def test_su2_cross_check_default_range_and_large_spin():
    p = SpinCoherentParams(200, 1.0, 0.2)
    sz = spin_operators(200)[2]
    rep = su2_product_series(sz, sz, p)
    assert rep.cross_check is None
    assert rep.final_residual < 1e-9 * sz.norm() ** 2
    sz100 = spin_operators(100)[2]
    with pytest.raises(NumericalCheckError):
        su2_product_series(sz100 @ sz100, sz100 @ sz100, SpinCoherentParams(100, 1.0, 0.2), cross_check=True)


@pytest.mark.parametrize("theta", [0.0, 0.4, math.pi / 2, 2.2, math.pi])
def test_su2_leading_variance_linear_exact(theta):
    p = SpinCoherentParams(9, theta, 0.8)
    sz = spin_operators(9, 0.6)[2]
    lead = su2_leading_variance(sz, p, 0.6)
    assert abs(lead - 0.6**2 * 4.5 / 2 * math.sin(theta) ** 2) < 1e-12
    assert abs(lead - variance(spin_coherent_state(p), sz)) < 1e-12


def test_su2_leading_variance_casimir_zero():
    ops = spin_operators(5)
    cas = ops[0] @ ops[0] + ops[1] @ ops[1] + ops[2] @ ops[2]
    assert abs(su2_leading_variance(cas, SpinCoherentParams(5, 0.7, 0.1))) < 1e-12


def test_symmetrized_product_cases():
    p = SpinCoherentParams(6, 0.8, 0.0)
    sz = spin_operators(6)[2]
    eye = DenseOperator.identity(sz.space)
    lead, corr = su2_symmetrized_product(sz, eye, p)
    assert abs(lead - expectation(spin_coherent_state(p), sz)) < 1e-13 and abs(corr) < 1e-14
    lead, corr = su2_symmetrized_product(sz, sz, p)
    assert abs(corr - su2_leading_variance(sz, p)) < 1e-13


def _symmetrized_error(two_s, ka, kb):
    p = SpinCoherentParams(two_s, 0.8, 0.0)
    sz = spin_operators(two_s)[2] / (two_s / 2)
    a, b = sz**ka, sz**kb
    lead, corr = su2_symmetrized_product(a, b, p)
    exact = expectation(spin_coherent_state(p), 0.5 * (a @ b + b @ a)).real
    return abs(exact - lead - corr)


def test_symmetrized_product_exact_when_one_factor_is_linear():
    # A = Sz, B = Sz^2 at twoS = 6: the first-order formula leaves no remainder
    assert _symmetrized_error(6, 1, 2) < 1e-14


def test_symmetrized_product_scaling():
    two_ss = [8, 16, 32, 64, 128]
    errs = [_symmetrized_error(tw, 2, 3) for tw in two_ss]
    slope = np.polyfit(np.log(two_ss), np.log(errs), 1)[0]
    assert abs(slope + 2) < 0.2


def test_symmetrized_product_rejects_noncommuting():
    sx, sy, _ = spin_operators(3)
    with pytest.raises(ValidationError):
        su2_symmetrized_product(sx, sy, SpinCoherentParams(3, 0.5))


# energy fluctuations -----------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(two_s=st.integers(1, 30), ang=angles, h=st.floats(-2, 2), hbar=st.floats(0.3, 2))
def test_energy_fluctuation_zeeman_exact(two_s, ang, h, hbar):
    p = SpinCoherentParams(two_s, *ang)
    ham = -h * spin_operators(two_s, hbar)[2]
    lead = energy_fluctuation_leading(ham, [p], hbar)
    closed = hbar**2 * (two_s / 2) * h**2 * math.sin(ang[0]) ** 2 / 2
    assert abs(lead - closed) < 1e-10 * max(1, closed)
    assert abs(lead - variance(spin_coherent_state(p), ham)) < 1e-10 * max(1, closed)


def test_energy_fluctuation_harmonic_exact():
    hbar, omega, alpha = 0.8, 1.7, 1.1 - 0.5j
    p = OscCoherentParams(alpha, omega, hbar)
    a, adag, _, _ = boson_operators(p.default_ncut(), hbar, omega)
    ham = hbar * omega * (adag @ a)
    lead = energy_fluctuation_leading(ham, [p], hbar)
    assert abs(lead - (hbar * omega) ** 2 * abs(alpha) ** 2) < 1e-10
    assert abs(lead - variance(osc_coherent_state(p), ham)) < 1e-10


def test_energy_fluctuation_constant_zero():
    space = SpaceDescriptor((Boson(12), Spin(3)))
    ham = 2.5 * DenseOperator.identity(space)
    assert energy_fluctuation_leading(ham, [OscCoherentParams(0.5), SpinCoherentParams(3, 1.0)]) == 0.0


# several degrees of freedom ----------------------------------------------------

def test_multi_osc_single_mode_reduces():
    p = OscCoherentParams(0.4 + 0.8j, omega=1.5)
    _, _, q, pp = boson_operators(p.default_ncut(), 1.0, 1.5)
    a, b = q @ pp, pp @ pp + q
    one = osc_product_series(a, b, p, nmax=10)
    multi = multi_osc_product_series(a, b, [p], nmax=10)
    n = min(len(one.terms), len(multi.terms))
    assert np.allclose(one.terms[:n], multi.terms[:n], atol=1e-12)


def test_multi_osc_two_modes():
    ps = [OscCoherentParams(0.5 + 0.2j, 1.0), OscCoherentParams(-0.3 + 0.6j, 2.0)]
    space = SpaceDescriptor((Boson(ps[0].default_ncut()), Boson(ps[1].default_ncut())))
    _, _, q1, p1 = boson_operators(space.factors[0].ncut, 1.0, 1.0)
    _, _, q2, p2 = boson_operators(space.factors[1].ncut, 1.0, 2.0)
    q1, p1 = tensor_embed(q1, space, 0), tensor_embed(p1, space, 0)
    q2, p2 = tensor_embed(q2, space, 1), tensor_embed(p2, space, 1)
    a = q1 @ q2 + p1
    b = p2 @ q1 + q2
    rep = multi_osc_product_series(a, b, ps, nmax=20)
    exact = expectation(product_coherent_state(space, ps), a @ b)
    assert abs(rep.total - exact) <= 1e-9


def test_multi_osc_order_cap():
    ps = [OscCoherentParams(0.1)] * 3
    space = SpaceDescriptor(tuple(Boson(p.default_ncut()) for p in ps))
    eye = DenseOperator.identity(space)
    with pytest.raises(ValidationError):
        multi_osc_product_series(eye, eye, ps, nmax=30)


def test_two_spin_series():
    space = SpaceDescriptor((Spin(2), Spin(2)))
    sz = spin_operators(2)[2]
    a = tensor_embed(sz, space, 0) + tensor_embed(sz, space, 1)
    p1, p2 = SpinCoherentParams(2, 0.7, 0.2), SpinCoherentParams(2, 2.0, 1.1)
    rep = two_spin_product_series(a, a, p1, p2, cross_check=True)
    assert abs(rep.total - expectation(product_coherent_state(space, [p1, p2]), a @ a)) < 1e-10
    assert rep.detail["grid"].shape == (3, 3)


def test_two_spin_disjoint_factors(rng):
    space = SpaceDescriptor((Spin(3), Spin(2)))
    a = tensor_embed(random_spin_polynomial(rng, 3), space, 0)
    b = tensor_embed(random_spin_polynomial(rng, 2), space, 1)
    p1, p2 = SpinCoherentParams(3, 0.3, 2.0), SpinCoherentParams(2, 1.3, 0.5)
    rep = two_spin_product_series(a, b, p1, p2)
    st_ = product_coherent_state(space, [p1, p2])
    assert abs(rep.total - expectation(st_, a) * expectation(st_, b)) < 1e-9
