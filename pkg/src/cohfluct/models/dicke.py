"""Dicke model: one cavity mode coupled to a collective spin."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..coherent import OscCoherentParams, SpinCoherentParams, default_ncut
from ..errors import ValidationError
from ..hilbert import Boson, DenseOperator, SpaceDescriptor, Spin, boson_operators, spin_operators, tensor_embed
from .classical import ClassicalState


@dataclass(frozen=True)
class DickeParams:
    """H = hbar w a^dag a + W Sz + (lam / sqrt(2S)) Sx (a + a^dag) on Boson(ncut) x Spin(twoS)."""

    two_s: int
    omega: float
    Omega: float
    lam: float
    ncut: int
    hbar: float = 1.0

    def __post_init__(self):
        if not isinstance(self.two_s, (int, np.integer)) or self.two_s < 1:
            raise ValidationError(f"Dicke needs twoS >= 1, got {self.two_s!r}")
        if not self.omega > 0:
            raise ValidationError(f"omega must be positive, got {self.omega}")
        if not self.hbar > 0:
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        if not isinstance(self.ncut, (int, np.integer)) or self.ncut < 1:
            raise ValidationError(f"ncut must be a positive integer, got {self.ncut!r}")
        object.__setattr__(self, "two_s", int(self.two_s))
        object.__setattr__(self, "ncut", int(self.ncut))

    @classmethod
    def for_amplitude(cls, two_s, omega, Omega, lam, alpha_bound, hbar=1.0) -> "DickeParams":
        """Cutoff from the truncation rule at the largest expected |alpha|."""
        return cls(two_s, omega, Omega, lam, default_ncut(alpha_bound), hbar)

    @property
    def s(self) -> float:
        return self.two_s / 2

    @property
    def space(self) -> SpaceDescriptor:
        return SpaceDescriptor((Boson(self.ncut), Spin(self.two_s)))

    @property
    def coupling(self) -> float:
        return self.lam / math.sqrt(self.two_s)


def dicke_hamiltonian(p: DickeParams) -> DenseOperator:
    space = p.space
    a, ad, _, _ = boson_operators(p.ncut, p.hbar)
    sx, _, sz = spin_operators(p.two_s, p.hbar)
    num = p.hbar * p.omega * (ad.entries @ a.entries)
    m = np.kron(num, np.eye(p.two_s + 1))
    m = m + p.Omega * tensor_embed(sz, space, 1).entries
    m = m + p.coupling * np.kron(a.entries + ad.entries, sx.entries)
    return DenseOperator(space, m)


def dicke_state_params(state: ClassicalState, p: DickeParams) -> list:
    """Parameter bundles for the product coherent state (oscillator, spin)."""
    return [OscCoherentParams(state.modes[0], p.omega, p.hbar),
            SpinCoherentParams.from_direction(p.two_s, state.spins[0])]


def _unpack(state):
    if isinstance(state, ClassicalState):
        return complex(state.modes[0]), np.asarray(state.spins[0], dtype=float)
    alpha, s_vec = state
    return complex(alpha), np.asarray(s_vec, dtype=float)


def dicke_energy_expectation(state, p: DickeParams) -> float:
    alpha, s = _unpack(state)
    hs = p.hbar * p.s
    return (p.hbar * p.omega * abs(alpha) ** 2 + p.Omega * hs * s[2]
            + p.coupling * hs * s[0] * 2 * alpha.real)


def dicke_classical_rhs(state, p: DickeParams) -> tuple:
    """(dalpha/dt, ds/dt) from the coherent expectation of the Heisenberg equations."""
    alpha, s = _unpack(state)
    b = p.coupling * 2 * alpha.real
    dalpha = -1j * p.omega * alpha - 1j * p.coupling * p.s * s[0]
    ds = np.array([-p.Omega * s[1], p.Omega * s[0] - b * s[2], b * s[1]])
    return dalpha, ds


def dicke_rhs(p: DickeParams):
    """Right-hand side for integrate_classical."""
    def rhs(st: ClassicalState):
        da, ds = dicke_classical_rhs(st, p)
        return ds[None, :], np.array([da])
    return rhs


def dicke_omega1(state, p: DickeParams) -> float:
    alpha, s = _unpack(state)
    hb, S = p.hbar, p.s
    hs = hb * S
    re2 = 2 * alpha.real  # alpha + conj(alpha)
    st2 = s[0] ** 2 + s[1] ** 2
    perp = s[1] ** 2 + s[2] ** 2  # sin^2 th sin^2 ph + cos^2 th
    g = p.coupling
    return ((hb * p.omega) ** 2 * abs(alpha) ** 2
            + hs**2 / p.two_s * p.Omega**2 * st2
            + hs**2 * p.lam**2 / p.two_s * (perp * re2**2 / p.two_s + s[0] ** 2)
            + hb * p.omega * g * hs * s[0] * re2
            - p.Omega * g * hs**2 / S * s[2] * s[0] * re2)


def dicke_omega1_kinematic(state, p: DickeParams) -> float:
    """(hbar/2)[w (dxi/dt)^2 + (dpi/dt)^2 / w] + ((hbar S)^2 / 2S) |ds/dt|^2."""
    dalpha, ds = dicke_classical_rhs(state, p)
    dxi = math.sqrt(2 * p.hbar / p.omega) * dalpha.real
    dpi = math.sqrt(2 * p.hbar * p.omega) * dalpha.imag
    osc = 0.5 * p.hbar * (p.omega * dxi**2 + dpi**2 / p.omega)
    return osc + (p.hbar * p.s) ** 2 / p.two_s * float(ds @ ds)


def dicke_omega2(state, p: DickeParams) -> float:
    """(lam^2 / (2S)^2)(<Sy>^2 + <Sz>^2); no dependence on omega or Omega."""
    _, s = _unpack(state)
    hs = p.hbar * p.s
    return p.lam**2 / p.two_s**2 * ((hs * s[1]) ** 2 + (hs * s[2]) ** 2)
