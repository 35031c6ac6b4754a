"""Lipkin-Meshkov-Glick model in the maximal-spin sector."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..coherent import SpinCoherentParams
from ..errors import ValidationError
from ..hilbert import DenseOperator, spin_operators
from .classical import ClassicalState, spin_vector

ISOTROPY_TOL = 1e-14


@dataclass(frozen=True)
class LmgParams:
    """H = -h Sz - (gamma_x Sx^2 + gamma_y Sy^2) / (2 hbar S)."""

    two_s: int
    h: float
    gamma_x: float
    gamma_y: float
    hbar: float = 1.0

    def __post_init__(self):
        if not isinstance(self.two_s, (int, np.integer)) or self.two_s < 1:
            raise ValidationError(f"LMG needs twoS >= 1, got {self.two_s!r}")
        if not self.hbar > 0:
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        object.__setattr__(self, "two_s", int(self.two_s))

    @property
    def s(self) -> float:
        return self.two_s / 2

    @property
    def renorm(self) -> float:
        return 1 - 1 / self.two_s

    @property
    def gt_x(self) -> float:
        return self.gamma_x * self.renorm

    @property
    def gt_y(self) -> float:
        return self.gamma_y * self.renorm

    @property
    def isotropic(self) -> bool:
        return abs(self.gamma_x - self.gamma_y) <= ISOTROPY_TOL * max(1.0, abs(self.gamma_x))

    def with_two_s(self, two_s: int) -> "LmgParams":
        return LmgParams(two_s, self.h, self.gamma_x, self.gamma_y, self.hbar)


def lmg_hamiltonian(p: LmgParams) -> DenseOperator:
    sx, sy, sz = spin_operators(p.two_s, p.hbar)
    m = -p.h * sz.entries - (p.gamma_x * sx.entries @ sx.entries
                             + p.gamma_y * sy.entries @ sy.entries) / (2 * p.hbar * p.s)
    return DenseOperator(sz.space, m)


def lmg_classical_rhs(state, p: LmgParams) -> np.ndarray:
    """ds/dt from the coherent expectation of the Heisenberg equations."""
    sx, sy, sz = spin_vector(state)
    gx, gy = p.gt_x, p.gt_y
    return np.array([
        p.h * sy - gy * sz * sy,
        -p.h * sx + gx * sz * sx,
        -(gx - gy) * sx * sy,
    ])


def lmg_rhs(p: LmgParams):
    """Right-hand side for integrate_classical."""
    def rhs(st: ClassicalState):
        return lmg_classical_rhs(st, p)[None, :], np.zeros(0, dtype=complex)
    return rhs


def lmg_energy_expectation(state, p: LmgParams) -> float:
    """<H> in the coherent state minus the constant returned by lmg_energy_constant."""
    sx, sy, sz = spin_vector(state)
    return p.hbar * p.s * (-p.h * sz - 0.5 * p.gt_x * sx**2 - 0.5 * p.gt_y * sy**2)


def lmg_energy_constant(p: LmgParams) -> float:
    return -p.hbar * (p.gamma_x + p.gamma_y) / 4


def lmg_omega1(state, p: LmgParams) -> float:
    s_vec = spin_vector(state)
    ct = s_vec[2]
    st2 = s_vec[0] ** 2 + s_vec[1] ** 2
    c2 = s_vec[0] ** 2 / st2 if st2 > 0 else 1.0  # cos^2(phi)
    s2 = 1.0 - c2
    ct2 = ct * ct
    gx, gy, h = p.gt_x, p.gt_y, p.h
    mixed = st2 * st2 * c2 * s2
    bracket = (h * h * st2
               - 2 * h * gx * ct * st2 * c2
               - 2 * h * gy * ct * st2 * s2
               + gx * gx * (mixed + ct2 * st2 * c2)
               + gy * gy * (mixed + ct2 * st2 * s2)
               - 2 * gx * gy * mixed)
    return (p.hbar * p.s) ** 2 / p.two_s * bracket


def lmg_omega1_kinematic(state, p: LmgParams) -> float:
    """(hbar S)^2 (1/2S) |ds/dt|^2."""
    v = lmg_classical_rhs(state, p)
    return (p.hbar * p.s) ** 2 / p.two_s * float(v @ v)


def lmg_omega2(state, p: LmgParams) -> float:
    s_vec = spin_vector(state)
    ct2 = s_vec[2] ** 2
    sx2, sy2 = s_vec[0] ** 2, s_vec[1] ** 2
    gx, gy = p.gamma_x, p.gamma_y
    bracket = -4 * gx * gy * ct2 + (gx * (1 - sx2) + gy * (1 - sy2)) ** 2
    return (p.hbar * p.s) ** 2 / (2 * p.two_s**2) * p.renorm * bracket


def _require_isotropic(p: LmgParams):
    if not p.isotropic:
        raise ValidationError("closed-form dynamics needs gamma_x == gamma_y")


def lmg_iso_splus(t, p: LmgParams, state0: SpinCoherentParams):
    """Exact <S+(t)> for the isotropic model started in a coherent state."""
    _require_isotropic(p)
    t = np.asarray(t, dtype=float)
    g, s, th = p.gamma_x, p.s, state0.theta
    ct = math.cos(th)
    x = g * t / p.two_s
    lead = p.hbar * s * math.sin(th) * np.exp(1j * (state0.phi - (p.h - p.gt_x * ct) * t))
    inner = np.exp(-1j * ct * x) * (np.cos(x) + 1j * ct * np.sin(x))
    return lead * inner ** (p.two_s - 1)


def lmg_iso_spin_length(t, p: LmgParams, state0: SpinCoherentParams):
    """|<S+(t)>| = hbar S sin(theta) (1 - sin^2(theta) sin^2(gamma t / 2S))^(S - 1/2)."""
    _require_isotropic(p)
    t = np.asarray(t, dtype=float)
    st = math.sin(state0.theta)
    base = 1 - st * st * np.sin(p.gamma_x * t / p.two_s) ** 2
    return p.hbar * p.s * st * base ** (p.s - 0.5)


def lmg_revival_time(p: LmgParams, k: int = 1) -> float:
    """t = 2 pi k S / gamma."""
    _require_isotropic(p)
    if p.gamma_x == 0:
        raise ValidationError("no revivals without interaction (gamma = 0)")
    return 2 * math.pi * k * p.s / p.gamma_x


def lmg_ehrenfest_time(p: LmgParams, state0: SpinCoherentParams) -> float:
    """Gaussian decay time sqrt(2S) / (gamma sin(theta))."""
    _require_isotropic(p)
    st = math.sin(state0.theta)
    if abs(st) < 1e-14 or p.gamma_x == 0:
        raise ValidationError("Ehrenfest time undefined for sin(theta) = 0 or gamma = 0")
    return math.sqrt(p.two_s) / (p.gamma_x * st)
