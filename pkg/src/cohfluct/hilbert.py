"""Finite-dimensional operator kernel.

Spin and truncated-boson operators, tensor products, commutators,
expectation values and exact unitary time evolution. Everything is dense.

Spin bases are ordered by descending m, so index 0 is the highest-weight
state |S>. Boson bases are Fock states |0>, ..., |ncut>.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import NotHermitianError, NumericalCheckError, SpaceMismatchError, ValidationError

HERMITIAN_RTOL = 1e-10
VARIANCE_CLAMP = 1e-13
NORM_TOL = 1e-12


@dataclass(frozen=True)
class Spin:
    two_s: int

    def __post_init__(self):
        if not isinstance(self.two_s, (int, np.integer)) or isinstance(self.two_s, bool):
            raise ValidationError(f"twoS must be an integer, got {self.two_s!r}")
        if self.two_s < 0:
            raise ValidationError(f"twoS must be nonnegative, got {self.two_s}")
        object.__setattr__(self, "two_s", int(self.two_s))

    @property
    def dim(self) -> int:
        return self.two_s + 1

    @property
    def s(self) -> float:
        return self.two_s / 2

    def __str__(self):
        return f"Spin({self.two_s}/2)"


@dataclass(frozen=True)
class Boson:
    ncut: int

    def __post_init__(self):
        if not isinstance(self.ncut, (int, np.integer)) or isinstance(self.ncut, bool):
            raise ValidationError(f"ncut must be an integer, got {self.ncut!r}")
        if self.ncut < 0:
            raise ValidationError(f"ncut must be nonnegative, got {self.ncut}")
        object.__setattr__(self, "ncut", int(self.ncut))

    @property
    def dim(self) -> int:
        return self.ncut + 1

    def __str__(self):
        return f"Boson({self.ncut})"


@dataclass(frozen=True)
class SpaceDescriptor:
    """Ordered tensor product of spin and boson factors."""

    factors: tuple

    def __post_init__(self):
        facs = tuple(self.factors)
        if not facs:
            raise ValidationError("a space needs at least one factor")
        for f in facs:
            if not isinstance(f, (Spin, Boson)):
                raise ValidationError(f"unknown factor kind {f!r}")
        object.__setattr__(self, "factors", facs)

    @classmethod
    def spin(cls, two_s: int) -> "SpaceDescriptor":
        return cls((Spin(two_s),))

    @classmethod
    def boson(cls, ncut: int) -> "SpaceDescriptor":
        return cls((Boson(ncut),))

    @property
    def dims(self) -> tuple:
        return tuple(f.dim for f in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self):
        return len(self.factors)

    def __str__(self):
        return " x ".join(str(f) for f in self.factors)


def _check_hbar(hbar):
    if not hbar > 0:
        raise ValidationError(f"hbar must be positive, got {hbar}")


def _same_space(a, b):
    if a.space != b.space:
        raise SpaceMismatchError(f"space mismatch: {a.space} vs {b.space}")


class DenseOperator:
    """Complex square matrix tagged with the space it acts on.

    Entries are copied on construction and made read-only.
    """

    __slots__ = ("space", "entries")
    __array_priority__ = 100

    def __init__(self, space: SpaceDescriptor, entries):
        m = np.array(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"operator must be a square matrix, got shape {m.shape}")
        if m.shape[0] != space.dim:
            raise SpaceMismatchError(f"matrix of size {m.shape[0]} on space {space} of dim {space.dim}")
        m.flags.writeable = False
        self.space = space
        self.entries = m

    @classmethod
    def identity(cls, space: SpaceDescriptor) -> "DenseOperator":
        return cls(space, np.eye(space.dim))

    @classmethod
    def zeros(cls, space: SpaceDescriptor) -> "DenseOperator":
        return cls(space, np.zeros((space.dim, space.dim)))

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def dag(self) -> "DenseOperator":
        return DenseOperator(self.space, self.entries.conj().T)

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.entries))

    def hermiticity_defect(self) -> float:
        """||A - A^dag|| / max(||A||, 1e-300)."""
        n = self.norm()
        if n == 0.0:
            return 0.0
        return float(np.linalg.norm(self.entries - self.entries.conj().T)) / n

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        return self.hermiticity_defect() <= rtol

    def hermitized(self) -> "DenseOperator":
        return DenseOperator(self.space, 0.5 * (self.entries + self.entries.conj().T))

    def __add__(self, other):
        if isinstance(other, DenseOperator):
            _same_space(self, other)
            return DenseOperator(self.space, self.entries + other.entries)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, DenseOperator):
            _same_space(self, other)
            return DenseOperator(self.space, self.entries - other.entries)
        return NotImplemented

    def __neg__(self):
        return DenseOperator(self.space, -self.entries)

    def __mul__(self, other):
        if np.isscalar(other):
            return DenseOperator(self.space, self.entries * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return DenseOperator(self.space, self.entries / other)
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, DenseOperator):
            _same_space(self, other)
            return DenseOperator(self.space, self.entries @ other.entries)
        if isinstance(other, StateVector):
            _same_space(self, other)
            return StateVector(self.space, self.entries @ other.amplitudes, normalize=False, check=False)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValidationError("only nonnegative integer powers are supported")
        return DenseOperator(self.space, np.linalg.matrix_power(self.entries, int(k)))

    def allclose(self, other, atol=1e-12) -> bool:
        _same_space(self, other)
        return bool(np.allclose(self.entries, other.entries, rtol=0, atol=atol))

    def __repr__(self):
        return f"DenseOperator({self.space}, dim={self.dim})"


class StateVector:
    """Complex vector on a described space, unit norm unless built with check=False.

    ``normalize=True`` rescales the input; otherwise the norm must already be 1
    within 1e-12. Unnormalized vectors (operator images) use ``check=False``.
    """

    __slots__ = ("space", "amplitudes")

    def __init__(self, space: SpaceDescriptor, amplitudes, normalize: bool = False, check: bool = True):
        v = np.array(amplitudes, dtype=complex).reshape(-1)
        if v.shape[0] != space.dim:
            raise SpaceMismatchError(f"vector of length {v.shape[0]} on space {space} of dim {space.dim}")
        if normalize:
            n = np.linalg.norm(v)
            if n == 0:
                raise ValidationError("cannot normalize the zero vector")
            v = v / n
        elif check and abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise ValidationError(f"state not normalized: norm={np.linalg.norm(v)!r}")
        v.flags.writeable = False
        self.space = space
        self.amplitudes = v

    @classmethod
    def basis(cls, space: SpaceDescriptor, index: int) -> "StateVector":
        v = np.zeros(space.dim, dtype=complex)
        v[index] = 1.0
        return cls(space, v)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        _same_space(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        """|<self|other>|, equal to 1 iff the states agree up to a global phase."""
        return abs(self.inner(other))

    def __repr__(self):
        return f"StateVector({self.space})"


def spin_ladder(two_s: int, hbar: float = 1.0):
    """Return (S+, S-) for spin twoS/2."""
    _check_hbar(hbar)
    space = SpaceDescriptor.spin(two_s)
    s = two_s / 2
    m = s - np.arange(two_s + 1)
    # S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>; |m+1> sits one index lower
    up = np.sqrt(np.maximum(s * (s + 1) - m[1:] * (m[1:] + 1), 0.0))
    splus = np.diag(up, k=1) * hbar
    return DenseOperator(space, splus), DenseOperator(space, splus.T)


def spin_operators(two_s: int, hbar: float = 1.0):
    """Return (Sx, Sy, Sz) for spin twoS/2, basis ordered by descending m."""
    splus, sminus = spin_ladder(two_s, hbar)
    space = splus.space
    s = two_s / 2
    sz = np.diag(s - np.arange(two_s + 1)) * hbar
    sx = (splus.entries + sminus.entries) / 2
    sy = (splus.entries - sminus.entries) / 2j
    return DenseOperator(space, sx), DenseOperator(space, sy), DenseOperator(space, sz)


def boson_operators(ncut: int, hbar: float = 1.0, omega: float = 1.0):
    """Return (a, adag, q, p) on the Fock space truncated at ncut.

    q = sqrt(hbar/(2 omega)) (a + adag), p = i sqrt(hbar omega / 2) (adag - a).
    """
    _check_hbar(hbar)
    if not omega > 0:
        raise ValidationError(f"omega must be positive, got {omega}")
    if ncut < 1:
        raise ValidationError(f"ncut must be at least 1, got {ncut}")
    space = SpaceDescriptor.boson(ncut)
    a = np.diag(np.sqrt(np.arange(1, ncut + 1, dtype=float)), k=1).astype(complex)
    ad = a.T.copy()
    q = np.sqrt(hbar / (2 * omega)) * (a + ad)
    p = 1j * np.sqrt(hbar * omega / 2) * (ad - a)
    return tuple(DenseOperator(space, m) for m in (a, ad, q, p))


def identity(space: SpaceDescriptor) -> DenseOperator:
    return DenseOperator.identity(space)


def tensor_embed(op: DenseOperator, space: SpaceDescriptor, slot: int) -> DenseOperator:
    """Place a single-factor operator into ``slot`` of a product space."""
    if not 0 <= slot < len(space):
        raise ValidationError(f"slot {slot} out of range for {len(space)} factors")
    fac = space.factors[slot]
    if op.dim != fac.dim:
        raise SpaceMismatchError(f"operator of dim {op.dim} does not fit slot {slot} ({fac})")
    if len(op.space) == 1 and op.space.factors[0] != fac:
        raise SpaceMismatchError(f"operator factor {op.space.factors[0]} differs from slot factor {fac}")
    left = int(np.prod(space.dims[:slot]))
    right = int(np.prod(space.dims[slot + 1:]))
    m = np.kron(np.kron(np.eye(left), op.entries), np.eye(right))
    return DenseOperator(space, m)


def product_state(states: Sequence[StateVector]) -> StateVector:
    """Tensor product of single-factor states, in order."""
    facs = []
    for st in states:
        facs.extend(st.space.factors)
    vec = reduce(np.kron, [st.amplitudes for st in states])
    return StateVector(SpaceDescriptor(tuple(facs)), vec, normalize=True)


def commutator(x: DenseOperator, y: DenseOperator) -> DenseOperator:
    _same_space(x, y)
    return DenseOperator(x.space, x.entries @ y.entries - y.entries @ x.entries)


def iterated_commutator(x: DenseOperator, y: DenseOperator, n: int) -> DenseOperator:
    """[X, Y]_n with [X, Y]_0 = Y and [X, Y]_n = [X, [X, Y]_{n-1}]."""
    _same_space(x, y)
    if n < 0:
        raise ValidationError(f"commutator order must be nonnegative, got {n}")
    xm, m = x.entries, y.entries
    for _ in range(n):
        m = xm @ m - m @ xm
    return DenseOperator(x.space, m)


def iterated_commutators(x: DenseOperator, y: DenseOperator, nmax: int) -> list:
    """All [X, Y]_n for n = 0..nmax as raw matrices."""
    _same_space(x, y)
    xm, m = x.entries, np.array(y.entries)
    out = [m]
    for _ in range(nmax):
        m = xm @ m - m @ xm
        out.append(m)
    return out


def require_hermitian(op: DenseOperator, what: str = "operator", rtol: float = HERMITIAN_RTOL):
    d = op.hermiticity_defect()
    if d > rtol:
        raise NotHermitianError(f"{what} is not Hermitian (relative defect {d:.3e})")


def expectation(state: StateVector, op: DenseOperator) -> complex:
    _same_space(state, op)
    v = state.amplitudes
    return complex(np.vdot(v, op.entries @ v))


def variance(state: StateVector, op: DenseOperator) -> float:
    """<A^2> - <A>^2 for Hermitian A, computed as ||A psi||^2 - <A>^2."""
    _same_space(state, op)
    require_hermitian(op)
    v = state.amplitudes
    w = op.entries @ v
    mean = np.vdot(v, w).real
    second = np.vdot(w, w).real
    var = second - mean * mean
    if var < 0:
        if var < -VARIANCE_CLAMP * max(1.0, second):
            raise NumericalCheckError(f"negative variance {var:.3e} beyond rounding")
        var = 0.0
    return float(var)


class Propagator:
    """exp(-i H t / hbar) through one eigendecomposition of H."""

    def __init__(self, h: DenseOperator, hbar: float = 1.0):
        _check_hbar(hbar)
        require_hermitian(h, "Hamiltonian")
        herm = 0.5 * (h.entries + h.entries.conj().T)
        self.space = h.space
        self.hbar = hbar
        self.energies, self.vectors = np.linalg.eigh(herm)

    def __call__(self, state: StateVector, t: float) -> StateVector:
        _same_space(self, state)
        c = self.vectors.conj().T @ state.amplitudes
        c = c * np.exp(-1j * self.energies * t / self.hbar)
        return StateVector(self.space, self.vectors @ c)

    def operator(self, t: float) -> DenseOperator:
        ph = np.exp(-1j * self.energies * t / self.hbar)
        return DenseOperator(self.space, (self.vectors * ph) @ self.vectors.conj().T)


def evolve(state: StateVector, h: DenseOperator, t: float, hbar: float = 1.0) -> StateVector:
    """exp(-i H t / hbar) |state> via eigendecomposition of H."""
    _same_space(state, h)
    return Propagator(h, hbar)(state, t)
