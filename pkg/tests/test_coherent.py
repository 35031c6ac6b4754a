import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from cohfluct.coherent import (
    OscCoherentParams,
    SpinCoherentParams,
    default_ncut,
    discarded_tail,
    osc_coherent_state,
    osc_completeness_defect,
    required_ncut,
    rotation_operator,
    spin_coherent_state,
    spin_completeness_defect,
    spin_direction,
    uncertainty_check,
)
from cohfluct.errors import TruncationError, ValidationError
from cohfluct.hilbert import (
    DenseOperator,
    StateVector,
    boson_operators,
    evolve,
    expectation,
    spin_ladder,
    spin_operators,
)

angles = st.tuples(st.floats(0, math.pi), st.floats(0, 2 * math.pi))


def axis_operator(two_s, vec, hbar=1.0):
    ops = spin_operators(two_s, hbar)
    return vec[0] * ops[0] + vec[1] * ops[1] + vec[2] * ops[2]


def test_north_pole_is_highest_weight():
    psi = spin_coherent_state(SpinCoherentParams(5, 0.0, 1.3))
    assert np.allclose(psi.amplitudes, np.eye(6)[0])


def test_sz_expectation():
    psi = spin_coherent_state(SpinCoherentParams(2, math.pi / 3))
    assert abs(expectation(psi, spin_operators(2)[2]) - 0.5) < 1e-14


@settings(max_examples=50, deadline=None)
@given(two_s=st.integers(1, 60), ang=angles)
def test_eigenvector_of_axis_operator(two_s, ang):
    p = SpinCoherentParams(two_s, *ang)
    psi = spin_coherent_state(p)
    op = axis_operator(two_s, p.direction)
    assert np.max(np.abs((op @ psi).amplitudes - p.s * psi.amplitudes)) <= 1e-12 * max(1, p.s)


@settings(max_examples=30, deadline=None)
@given(two_s=st.integers(1, 30), ang=angles)
def test_rotation_operator_builds_state(two_s, ang):
    u = rotation_operator(two_s, *ang, hbar=0.9)
    assert np.max(np.abs((u.dag @ u - DenseOperator.identity(u.space)).entries)) < 1e-12
    psi = spin_coherent_state(SpinCoherentParams(two_s, *ang))
    assert np.allclose(u.entries[:, 0], psi.amplitudes, atol=1e-12)
    rot_sz = u.dag @ spin_operators(two_s, 0.9)[2] @ u
    assert abs(rot_sz.entries[0, 0] - 0.9 * two_s / 2 * math.cos(ang[0])) < 1e-12


def test_rotation_identity_at_zero_angle():
    assert rotation_operator(4, 0.0, 2.0).allclose(DenseOperator.identity(spin_operators(4)[0].space))


def test_expectation_of_spin_vector():
    p = SpinCoherentParams(7, 1.1, 2.4)
    psi = spin_coherent_state(p)
    vec = [expectation(psi, o).real for o in spin_operators(7)]
    assert np.allclose(vec, p.s * spin_direction(1.1, 2.4), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(two_s=st.integers(1, 20), a=angles, b=angles)
def test_overlap_identity(two_s, a, b):
    pa, pb = SpinCoherentParams(two_s, *a), SpinCoherentParams(two_s, *b)
    ov = abs(spin_coherent_state(pa).inner(spin_coherent_state(pb))) ** 2
    cos_t = float(np.clip(pa.direction @ pb.direction, -1, 1))
    assert abs(ov - ((1 + cos_t) / 2) ** two_s) < 1e-12


def test_oscillator_eigenstate_of_lowering():
    for alpha in (2.0, 2j, 1.2 - 1.6j, 0.0):
        p = OscCoherentParams(alpha)
        psi = osc_coherent_state(p)
        a = boson_operators(p.default_ncut())[0]
        assert np.linalg.norm((a @ psi).amplitudes - alpha * psi.amplitudes) < 1e-10
    ground = osc_coherent_state(OscCoherentParams(0.0))
    assert ground.amplitudes[0] == 1.0


def test_oscillator_phase_point():
    p = OscCoherentParams.from_phase_point(0.8, -1.3, omega=1.7, hbar=0.6)
    psi = osc_coherent_state(p)
    _, _, q, pp = boson_operators(p.default_ncut(), 0.6, 1.7)
    assert abs(expectation(psi, q) - 0.8) < 1e-10
    assert abs(expectation(psi, pp) + 1.3) < 1e-10
    assert abs(p.xi - 0.8) < 1e-14 and abs(p.pi + 1.3) < 1e-14


def test_truncation_rule_and_error():
    assert default_ncut(2.0) == math.ceil(4 + 20 + 20)
    assert discarded_tail(6.0, default_ncut(6.0)) < 1e-12
    with pytest.raises(TruncationError) as info:
        osc_coherent_state(OscCoherentParams(3.0), ncut=10)
    assert info.value.required_ncut == required_ncut(3.0)
    assert str(info.value.required_ncut) in str(info.value)


def test_uncertainty_oscillator():
    for hbar, omega, alpha in ((1.0, 1.0, 0.5), (0.4, 2.5, -1 + 2j), (2.0, 0.3, 1.5j)):
        p = OscCoherentParams(alpha, omega, hbar)
        _, _, q, pp = boson_operators(p.default_ncut(), hbar, omega)
        r = uncertainty_check(osc_coherent_state(p), q, pp)
        assert abs(r.product - hbar / 2) < 1e-10


@settings(max_examples=30, deadline=None)
@given(two_s=st.integers(1, 40), ang=angles, hbar=st.floats(0.3, 3))
def test_uncertainty_spin(two_s, ang, hbar):
    th, ph = ang
    e1 = np.array([math.cos(th) * math.cos(ph), math.cos(th) * math.sin(ph), -math.sin(th)])
    e2 = np.array([-math.sin(ph), math.cos(ph), 0.0])
    psi = spin_coherent_state(SpinCoherentParams(two_s, th, ph))
    r = uncertainty_check(psi, axis_operator(two_s, e1, hbar), axis_operator(two_s, e2, hbar))
    assert abs(r.product - hbar**2 * two_s / 4) < 1e-10 * max(1, hbar**2 * two_s)


def test_uncertainty_eigenstate():
    sz = spin_operators(3)[2]
    r = uncertainty_check(StateVector.basis(sz.space, 1), sz, sz)
    assert r.product == 0.0


@pytest.mark.parametrize("two_s", [0, 1, 2, 5, 10])
def test_spin_completeness(two_s):
    assert spin_completeness_defect(two_s) < 1e-12


def test_oscillator_completeness():
    assert osc_completeness_defect(6.0, 8) < 1e-6


@settings(max_examples=20, deadline=None)
@given(two_s=st.integers(1, 20), ang=angles, h=st.floats(-3, 3), t=st.floats(0, 20))
def test_zeeman_precession(two_s, ang, h, t):
    # H = -h Sz rotates (Sx, Sy) by -h t about z
    p = SpinCoherentParams(two_s, *ang)
    out = evolve(spin_coherent_state(p), -h * spin_operators(two_s)[2], t)
    target = spin_coherent_state(SpinCoherentParams(two_s, ang[0], ang[1] - h * t))
    assert abs(out.fidelity(target) - 1) < 1e-10


@settings(max_examples=20, deadline=None)
@given(re=st.floats(-2, 2), im=st.floats(-2, 2), omega=st.floats(0.3, 3), t=st.floats(0, 10))
def test_harmonic_coherence(re, im, omega, t):
    p = OscCoherentParams(complex(re, im), omega)
    a, adag, _, _ = boson_operators(p.default_ncut(), 1.0, omega)
    h = omega * (adag @ a)
    psi = evolve(osc_coherent_state(p), h, t)
    alpha_t = complex(re, im) * np.exp(-1j * omega * t)
    assert np.linalg.norm((a @ psi).amplitudes - alpha_t * psi.amplitudes) < 1e-9


def test_params_validation():
    with pytest.raises(ValidationError):
        SpinCoherentParams(-1, 0.3)
    with pytest.raises(ValidationError):
        SpinCoherentParams(2, 4.0)
    with pytest.raises(ValidationError):
        OscCoherentParams(1.0, omega=0.0)


def test_large_spin_amplitudes_finite():
    psi = spin_coherent_state(SpinCoherentParams(2000, 1.0, 0.5))
    assert np.all(np.isfinite(psi.amplitudes))
    assert abs(psi.norm() - 1) < 1e-12


def test_ladder_expectation_phase():
    p = SpinCoherentParams(6, 0.9, 1.7)
    sp, _ = spin_ladder(6)
    val = expectation(spin_coherent_state(p), sp)
    assert abs(val - 3 * math.sin(0.9) * np.exp(1j * 1.7)) < 1e-13
    u = rotation_operator(6, 0.9, 1.7)
    gen = 0.9 * (math.sin(1.7) * spin_operators(6)[0] - math.cos(1.7) * spin_operators(6)[1])
    assert np.allclose(u.entries, scipy.linalg.expm(1j * gen.entries), atol=1e-12)
