"""Oscillator and SU(2) coherent states, rotations and textbook property checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import TruncationError, ValidationError
from .hilbert import (
    DenseOperator,
    SpaceDescriptor,
    StateVector,
    boson_operators,
    require_hermitian,
    spin_operators,
    variance,
)
from .quadrature import interval_rule, sphere_rule

TAIL_MASS = 1e-12
ANGLE_SLACK = 1e-12


def spin_direction(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def direction_angles(vec) -> tuple:
    """(theta, phi) of a nonzero 3-vector, phi in [0, 2 pi)."""
    v = np.asarray(vec, dtype=float)
    r = np.linalg.norm(v)
    if r == 0:
        raise ValidationError("zero vector has no direction")
    theta = math.acos(float(np.clip(v[2] / r, -1.0, 1.0)))
    phi = math.atan2(v[1], v[0]) % (2 * np.pi)
    return theta, phi


@dataclass(frozen=True)
class SpinCoherentParams:
    """Spin coherent state |theta, phi> of spin twoS/2; phi is wrapped into [0, 2 pi)."""

    two_s: int
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not isinstance(self.two_s, (int, np.integer)) or self.two_s < 0:
            raise ValidationError(f"twoS must be a nonnegative integer, got {self.two_s!r}")
        th = float(self.theta)
        if not (-ANGLE_SLACK <= th <= np.pi + ANGLE_SLACK):
            raise ValidationError(f"theta must lie in [0, pi], got {th}")
        if not np.isfinite(self.phi):
            raise ValidationError(f"phi must be finite, got {self.phi}")
        object.__setattr__(self, "two_s", int(self.two_s))
        object.__setattr__(self, "theta", min(max(th, 0.0), np.pi))
        object.__setattr__(self, "phi", float(self.phi) % (2 * np.pi))

    @classmethod
    def from_direction(cls, two_s: int, vec) -> "SpinCoherentParams":
        return cls(two_s, *direction_angles(vec))

    @property
    def s(self) -> float:
        return self.two_s / 2

    @property
    def direction(self) -> np.ndarray:
        return spin_direction(self.theta, self.phi)

    @property
    def z(self) -> complex:
        """Stereographic coordinate tan(theta/2) e^{i phi}."""
        return np.tan(self.theta / 2) * np.exp(1j * self.phi)


@dataclass(frozen=True)
class OscCoherentParams:
    """Oscillator coherent state |alpha> with frequency omega.

    alpha = sqrt(omega/(2 hbar)) xi + i pi / sqrt(2 hbar omega).
    """

    alpha: complex
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValidationError(f"omega must be positive, got {self.omega}")
        if not self.hbar > 0:
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        object.__setattr__(self, "alpha", complex(self.alpha))

    @classmethod
    def from_phase_point(cls, xi: float, pi: float, omega: float = 1.0, hbar: float = 1.0):
        alpha = math.sqrt(omega / (2 * hbar)) * xi + 1j * pi / math.sqrt(2 * hbar * omega)
        return cls(alpha, omega, hbar)

    @property
    def xi(self) -> float:
        return math.sqrt(2 * self.hbar / self.omega) * self.alpha.real

    @property
    def pi(self) -> float:
        return math.sqrt(2 * self.hbar * self.omega) * self.alpha.imag

    def default_ncut(self) -> int:
        return default_ncut(abs(self.alpha))


def default_ncut(abs_alpha: float) -> int:
    """Truncation rule ceil(|a|^2 + 10|a| + 20)."""
    return int(math.ceil(abs_alpha**2 + 10 * abs_alpha + 20))


def discarded_tail(abs_alpha: float, ncut: int) -> float:
    """Poisson mass of Fock states above ncut."""
    return float(poisson.sf(ncut, abs_alpha**2))


def required_ncut(abs_alpha: float, tail: float = TAIL_MASS) -> int:
    mu = abs_alpha**2
    n = int(mu)
    while poisson.sf(n, mu) >= tail:
        n += 1
    return max(n, 1)


def spin_coherent_amplitudes(two_s: int, theta: float, phi: float) -> np.ndarray:
    """sqrt(binom(2S, S+m)) cos^{S+m}(theta/2) sin^{S-m}(theta/2) e^{i phi (S-m)}, m descending.

    Built in log space so large spins neither overflow nor underflow spuriously.
    """
    k = np.arange(two_s + 1)  # k = S - m
    up = two_s - k  # S + m
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.where(up == 0, 0.0, up * np.log(abs(c)) if c != 0 else -np.inf)
        logs = np.where(k == 0, 0.0, k * np.log(abs(s)) if s != 0 else -np.inf)
    logb = 0.5 * (gammaln(two_s + 1) - gammaln(up + 1) - gammaln(k + 1))
    mag = np.exp(logb + logc + logs)
    amp = mag * np.exp(1j * phi * k)
    return amp / np.linalg.norm(amp)


def spin_coherent_state(params: SpinCoherentParams) -> StateVector:
    amp = spin_coherent_amplitudes(params.two_s, params.theta, params.phi)
    return StateVector(SpaceDescriptor.spin(params.two_s), amp)


def osc_coherent_state(params: OscCoherentParams, ncut: int | None = None) -> StateVector:
    """e^{-|a|^2/2} a^n / sqrt(n!) on Fock states 0..ncut."""
    r = abs(params.alpha)
    if ncut is None:
        ncut = default_ncut(r)
    tail = discarded_tail(r, ncut)
    if tail >= TAIL_MASS:
        need = required_ncut(r)
        raise TruncationError(
            f"ncut={ncut} discards Poisson mass {tail:.2e} for |alpha|={r:.4g}; need ncut >= {need}",
            required_ncut=need,
        )
    n = np.arange(ncut + 1)
    if r == 0:
        amp = (n == 0).astype(complex)
    else:
        logmag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
        amp = np.exp(logmag) * np.exp(1j * n * np.angle(params.alpha))
    return StateVector(SpaceDescriptor.boson(ncut), amp, normalize=True)


def rotation_operator(two_s: int, theta: float, phi: float, hbar: float = 1.0) -> DenseOperator:
    """U = exp((i/hbar) theta (sin(phi) Sx - cos(phi) Sy)), from the eigenvectors of the generator.

    U|S> equals ``spin_coherent_state`` exactly (same global phase).
    """
    sx, sy, _ = spin_operators(two_s, 1.0)
    gen = math.sin(phi) * sx.entries - math.cos(phi) * sy.entries
    w, v = np.linalg.eigh(gen)
    u = (v * np.exp(1j * theta * w)) @ v.conj().T
    return DenseOperator(sx.space, u)


class UncertaintyResult(NamedTuple):
    delta1: float
    delta2: float
    product: float


def uncertainty_check(state: StateVector, op1: DenseOperator, op2: DenseOperator) -> UncertaintyResult:
    require_hermitian(op1, "first operator")
    require_hermitian(op2, "second operator")
    d1 = math.sqrt(variance(state, op1))
    d2 = math.sqrt(variance(state, op2))
    return UncertaintyResult(d1, d2, d1 * d2)


def spin_completeness_defect(two_s: int, n_theta: int | None = None, n_phi: int | None = None) -> float:
    """Spectral norm of (2S+1)/(4 pi) int dOmega |theta,phi><theta,phi| - Id."""
    n_theta = two_s + 1 if n_theta is None else n_theta
    n_phi = 2 * two_s + 1 if n_phi is None else n_phi
    if n_theta < 1 or n_phi < 1:
        raise ValidationError("quadrature resolution must be positive")
    ct, ph, _, w = sphere_rule(n_theta, n_phi)
    th = np.arccos(ct)
    vecs = np.array([spin_coherent_amplitudes(two_s, t, p) for t, p in zip(th, ph)])
    acc = (vecs.T * w) @ vecs.conj()
    acc *= (two_s + 1) / (4 * np.pi)
    return float(np.linalg.norm(acc - np.eye(two_s + 1), 2))


def osc_completeness_defect(radius: float = 6.0, n_sub: int = 8, n_radial: int = 80,
                            n_phi: int | None = None, ncut: int | None = None) -> float:
    """Spectral norm of (1/pi) int_{|a|<=radius} d^2a |a><a| - Id on Fock states n <= n_sub.

    The disc cut leaves a Gaussian tail of order e^{-radius^2} radius^{2 n_sub} / n_sub!.
    """
    if radius <= 0 or n_radial < 1 or n_sub < 0:
        raise ValidationError("quadrature resolution must be positive")
    n_phi = 2 * n_sub + 3 if n_phi is None else n_phi
    ncut = max(default_ncut(radius), n_sub + 1) if ncut is None else ncut
    rr, wr = interval_rule(n_radial, 0.0, radius)
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    acc = np.zeros((n_sub + 1, n_sub + 1), dtype=complex)
    for r, w in zip(rr, wr):
        for ph in phis:
            v = osc_coherent_state(OscCoherentParams(r * np.exp(1j * ph)), ncut).amplitudes[: n_sub + 1]
            acc += (w * r * 2 * np.pi / n_phi) * np.outer(v, v.conj())
    acc /= np.pi
    return float(np.linalg.norm(acc - np.eye(n_sub + 1), 2))
