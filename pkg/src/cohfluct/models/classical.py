"""Classical phase-space states and a fixed-step RK4 integrator."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..coherent import SpinCoherentParams, direction_angles, spin_direction
from ..errors import NumericalCheckError, ValidationError

log = logging.getLogger(__name__)

UNIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ClassicalState:
    """Unit spin directions (M, 3) and complex oscillator amplitudes (N,)."""

    spins: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    modes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        s = np.array(self.spins, dtype=float).reshape(-1, 3)
        m = np.array(self.modes, dtype=complex).reshape(-1)
        if len(s) and np.max(np.abs(np.linalg.norm(s, axis=1) - 1)) > UNIT_TOL:
            raise ValidationError("spin directions must be unit vectors")
        object.__setattr__(self, "spins", s)
        object.__setattr__(self, "modes", m)

    @classmethod
    def from_angles(cls, angles=(), alphas=()) -> "ClassicalState":
        spins = [spin_direction(t, p) for t, p in angles]
        return cls(np.array(spins).reshape(-1, 3), np.array(alphas, dtype=complex))

    def angles(self) -> list:
        return [direction_angles(v) for v in self.spins]

    def spin_params(self, two_s: int, k: int = 0) -> SpinCoherentParams:
        return SpinCoherentParams.from_direction(two_s, self.spins[k])


def spin_vector(state) -> np.ndarray:
    """Unit direction from a ClassicalState (first spin), SpinCoherentParams or 3-vector."""
    if isinstance(state, ClassicalState):
        return state.spins[0]
    if isinstance(state, SpinCoherentParams):
        return state.direction
    v = np.asarray(state, dtype=float).reshape(3)
    if abs(np.linalg.norm(v) - 1) > UNIT_TOL:
        raise ValidationError("spin direction must be a unit vector")
    return v


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    spins: np.ndarray  # (K, M, 3)
    modes: np.ndarray  # (K, N)
    max_renormalization: float = 0.0
    max_step_error: float = 0.0

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def state(self, k: int) -> ClassicalState:
        return ClassicalState(self.spins[k], self.modes[k])

    def states(self) -> list:
        return [self.state(k) for k in range(len(self))]


def _pack(st: ClassicalState) -> np.ndarray:
    return np.concatenate([st.spins.ravel(), st.modes.real, st.modes.imag])


def _unpack(y, nspin, nmode, renorm=False):
    s = y[: 3 * nspin].reshape(nspin, 3)
    m = y[3 * nspin: 3 * nspin + nmode] + 1j * y[3 * nspin + nmode:]
    if renorm and nspin:
        s = s / np.linalg.norm(s, axis=1)[:, None]
    return s, m


def integrate_classical(rhs: Callable, y0: ClassicalState, t_final: float, dt: float = 0.01,
                        tol: float = 1e-9) -> Trajectory:
    """Fixed-step RK4 from t=0 to t_final.

    ``rhs(state)`` returns (dspins (M,3), dmodes (N,)). Each step is compared
    with two half steps; a difference above ``tol`` aborts with a suggested dt.
    Spin directions are renormalized after every step; the largest correction
    is recorded in the trajectory.
    """
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if not t_final > 0:
        raise ValidationError(f"t_final must be positive, got {t_final}")
    nspin, nmode = len(y0.spins), len(y0.modes)

    def f(y):
        s, m = _unpack(y, nspin, nmode)
        ds, dm = rhs(_raw_state(s, m))
        dm = np.asarray(dm, dtype=complex).reshape(-1)
        return np.concatenate([np.asarray(ds, dtype=float).ravel(), dm.real, dm.imag])

    def rk4(y, h):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        return y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6

    nsteps = max(1, int(math.ceil(t_final / dt - 1e-12)))
    h = t_final / nsteps
    y = _pack(y0)
    times = [0.0]
    ys = [y]
    max_renorm = 0.0
    max_err = 0.0
    for k in range(nsteps):
        full = rk4(y, h)
        half = rk4(rk4(y, 0.5 * h), 0.5 * h)
        err = float(np.max(np.abs(full - half)))
        max_err = max(max_err, err)
        if err > tol:
            suggest = 0.9 * h * (tol / err) ** 0.2
            raise NumericalCheckError(
                f"RK4 step error {err:.2e} exceeds tol {tol:.1e} at t={times[-1]:.4g}; try dt <= {suggest:.3g}")
        s, m = _unpack(half, nspin, nmode)
        if nspin:
            norms = np.linalg.norm(s, axis=1)
            max_renorm = max(max_renorm, float(np.max(np.abs(norms - 1))))
            s = s / norms[:, None]
        y = np.concatenate([s.ravel(), m.real, m.imag])
        times.append((k + 1) * h)
        ys.append(y)
    log.debug("integrated %d steps, max renormalization %.2e", nsteps, max_renorm)
    arr = np.array(ys)
    spins = arr[:, : 3 * nspin].reshape(len(arr), nspin, 3)
    modes = arr[:, 3 * nspin: 3 * nspin + nmode] + 1j * arr[:, 3 * nspin + nmode:]
    return Trajectory(np.array(times), spins, modes, max_renorm, max_err)


def _raw_state(s, m) -> ClassicalState:
    # skip the unit-norm validation inside RK4 stages
    st = object.__new__(ClassicalState)
    object.__setattr__(st, "spins", s)
    object.__setattr__(st, "modes", m)
    return st
