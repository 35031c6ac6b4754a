"""Operator-product expansions in coherent states.

Oscillator series in powers of hbar, the finite SU(2) series in 1/S, their
multi-mode and two-spin versions, variance series and the leading-order
energy-fluctuation formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .coherent import (
    OscCoherentParams,
    SpinCoherentParams,
    osc_coherent_state,
    rotation_operator,
    spin_coherent_state,
)
from .errors import NumericalCheckError, SpaceMismatchError, ValidationError
from .hilbert import (
    Boson,
    DenseOperator,
    SpaceDescriptor,
    Spin,
    StateVector,
    boson_operators,
    expectation,
    product_state,
    require_hermitian,
    spin_ladder,
    spin_operators,
    tensor_embed,
    variance,
)

NMAX_CAP = 10_000
MULTI_ORDER_CAP = 64  # cap on N * nmax for the multi-mode series
MULTI_MEMORY_CAP = 4e8  # bytes held by one level of nested commutators
CROSS_CHECK_RTOL = 1e-9
CROSS_CHECK_MAX_TWO_S = 64
SMALL_TERM_RTOL = 1e-14
SMALL_TERM_RUN = 3
COMMUTING_RTOL = 1e-10


@dataclass(frozen=True)
class ExpansionReport:
    """Per-order terms of a coherent-state series and their comparison with the exact value.

    ``stop_reason`` is "finite" for the SU(2) identities, otherwise "nmax" or
    "small-terms". ``cross_check`` is the largest per-term disagreement between
    two independent evaluations, in units of ``scale``; None when not run.
    """

    terms: np.ndarray
    partial_sums: np.ndarray
    exact: complex
    residuals: np.ndarray
    order_used: int
    stop_reason: str = "finite"
    cross_check: float | None = None
    detail: dict = field(default_factory=dict)

    @property
    def total(self) -> complex:
        return complex(self.partial_sums[-1])

    @property
    def final_residual(self) -> float:
        return float(self.residuals[-1])

    @property
    def scale(self) -> float:
        return max(float(np.max(np.abs(self.terms))), abs(self.exact), np.finfo(float).tiny)


def _report(terms, exact, stop_reason="finite", cross_check=None, detail=None) -> ExpansionReport:
    terms = np.asarray(terms, dtype=complex)
    ps = np.cumsum(terms)
    res = np.abs(ps - exact)
    return ExpansionReport(terms, ps, complex(exact), res, len(terms) - 1, stop_reason, cross_check, detail or {})


@dataclass(frozen=True)
class SpinLadderFrame:
    """Rotated spin operators S~ = U S U^dag; the coherent state is the top eigenvector of S~z."""

    rotation: DenseOperator
    s_plus: DenseOperator
    s_minus: DenseOperator
    s_z: DenseOperator


@dataclass(frozen=True)
class OscLadderFrame:
    """Q = (i/sqrt(2) hbar)(sqrt(w) q - i p / sqrt(w)) and its partner with +ip."""

    q_minus: DenseOperator
    q_plus: DenseOperator


def frame_angles(params: SpinCoherentParams) -> tuple:
    """Angles for the frame rotation; at the poles phi is fixed to 0."""
    if params.theta == 0.0 or params.theta == np.pi:
        return params.theta, 0.0
    return params.theta, params.phi


def spin_ladder_frame(params: SpinCoherentParams, hbar: float = 1.0) -> SpinLadderFrame:
    u = rotation_operator(params.two_s, *frame_angles(params))
    sp, sm = spin_ladder(params.two_s, hbar)
    _, _, sz = spin_operators(params.two_s, hbar)
    rot = lambda op: DenseOperator(op.space, u.entries @ op.entries @ u.entries.conj().T)
    return SpinLadderFrame(u, rot(sp), rot(sm), rot(sz))


def osc_ladder_frame(ncut: int, omega: float = 1.0, hbar: float = 1.0) -> OscLadderFrame:
    _, _, q, p = boson_operators(ncut, hbar, omega)
    pref = 1j / (math.sqrt(2) * hbar)
    qm = pref * (math.sqrt(omega) * q.entries - 1j * p.entries / math.sqrt(omega))
    qp = pref * (math.sqrt(omega) * q.entries + 1j * p.entries / math.sqrt(omega))
    return OscLadderFrame(DenseOperator(q.space, qm), DenseOperator(q.space, qp))


def _single_factor(a: DenseOperator, b: DenseOperator | None, kind):
    if b is not None and a.space != b.space:
        raise SpaceMismatchError(f"space mismatch: {a.space} vs {b.space}")
    if len(a.space) != 1 or not isinstance(a.space.factors[0], kind):
        raise SpaceMismatchError(f"expected a single {kind.__name__} factor, got {a.space}")
    return a.space.factors[0]


def _check_spin_params(fac: Spin, params: SpinCoherentParams):
    if fac.two_s != params.two_s:
        raise SpaceMismatchError(f"state has twoS={params.two_s}, operators act on {fac}")


def _expect(vec, m):
    return complex(np.vdot(vec, m @ vec))


def log_su2_prefactor(two_s: int, n: int) -> float:
    """log of (2S-n)! / (n! (2S)!)."""
    return float(gammaln(two_s - n + 1) - gammaln(n + 1) - gammaln(two_s + 1))


def _su2_commutator_terms(a_m, b_m, psi, xm, xp, two_s):
    terms = np.empty(two_s + 1, dtype=complex)
    ca, cb = a_m, b_m
    for n in range(two_s + 1):
        if n:
            ca = xm @ ca - ca @ xm
            cb = xp @ cb - cb @ xp
        terms[n] = math.exp(log_su2_prefactor(two_s, n)) * _expect(psi, ca) * _expect(psi, cb)
    return terms


def su2_product_series(a: DenseOperator, b: DenseOperator, params: SpinCoherentParams,
                       hbar: float = 1.0, cross_check: bool | None = None) -> ExpansionReport:
    """<AB> = sum_{n=0}^{2S} <S|U^dag A U|S-n><S-n|U^dag B U|S> in the coherent state.

    The iterated-commutator form with prefactors (2S-n)!/(n!(2S)!) is evaluated
    as a cross-check (by default for twoS <= 64) and must agree term by term.
    """
    fac = _single_factor(a, b, Spin)
    _check_spin_params(fac, params)
    frame = spin_ladder_frame(params, hbar)
    u = frame.rotation.entries
    psi = u[:, 0]
    row = psi.conj() @ a.entries @ u
    col = u.conj().T @ (b.entries @ psi)
    terms = row * col
    exact = _expect(psi, a.entries @ b.entries)
    check = None
    if cross_check or (cross_check is None and params.two_s <= CROSS_CHECK_MAX_TWO_S):
        xm = (1j / hbar) * frame.s_minus.entries
        xp = (1j / hbar) * frame.s_plus.entries
        alt = _su2_commutator_terms(a.entries, b.entries, psi, xm, xp, params.two_s)
        scale = max(np.max(np.abs(terms)), abs(exact), np.finfo(float).tiny)
        check = float(np.max(np.abs(alt - terms)) / scale)
        if check > CROSS_CHECK_RTOL:
            raise NumericalCheckError(
                f"matrix-element and commutator forms disagree by {check:.3e} (relative)")
    return _report(terms, exact, "finite", check)


def su2_variance_series(a: DenseOperator, params: SpinCoherentParams, hbar: float = 1.0) -> ExpansionReport:
    """(Delta A)^2 = sum_{n>=1} |<S|U^dag A U|S-n>|^2; term 0 is reported as 0."""
    fac = _single_factor(a, None, Spin)
    _check_spin_params(fac, params)
    require_hermitian(a)
    u = spin_ladder_frame(params, hbar).rotation.entries
    psi = u[:, 0]
    row = psi.conj() @ a.entries @ u
    terms = np.abs(row) ** 2
    terms[0] = 0.0
    st = StateVector(a.space, psi, normalize=True)
    return _report(terms, variance(st, a))


def _rotation_generators(two_s, hbar):
    return [op.entries for op in spin_operators(two_s, hbar)]


def _gradient(psi, gens, m, hbar):
    """<[(i/hbar) S^i, M]> for i = x, y, z."""
    return np.array([_expect(psi, (1j / hbar) * (g @ m - m @ g)) for g in gens])


def su2_leading_variance(a: DenseOperator, params: SpinCoherentParams, hbar: float = 1.0) -> float:
    """(1/2S) sum_i |<[(i/hbar) S^i, A]>|^2."""
    fac = _single_factor(a, None, Spin)
    _check_spin_params(fac, params)
    require_hermitian(a)
    if params.two_s == 0:
        raise ValidationError("the 1/S expansion needs S > 0")
    psi = spin_coherent_state(params).amplitudes
    g = _gradient(psi, _rotation_generators(params.two_s, hbar), a.entries, hbar)
    return float(np.sum(np.abs(g) ** 2) / params.two_s)


def su2_symmetrized_product(a: DenseOperator, b: DenseOperator, params: SpinCoherentParams,
                            hbar: float = 1.0) -> tuple:
    """(<A><B>, (1/2S) sum_i <[(i/hbar)S^i, A]><[(i/hbar)S^i, B]>) for commuting A, B."""
    fac = _single_factor(a, b, Spin)
    _check_spin_params(fac, params)
    if params.two_s == 0:
        raise ValidationError("the 1/S expansion needs S > 0")
    comm = np.linalg.norm(a.entries @ b.entries - b.entries @ a.entries)
    if comm > COMMUTING_RTOL * max(1.0, a.norm() * b.norm()):
        raise ValidationError(f"operators do not commute (||[A,B]|| = {comm:.3e})")
    psi = spin_coherent_state(params).amplitudes
    gens = _rotation_generators(params.two_s, hbar)
    ga = _gradient(psi, gens, a.entries, hbar)
    gb = _gradient(psi, gens, b.entries, hbar)
    lead = _expect(psi, a.entries) * _expect(psi, b.entries)
    corr = complex(np.sum(ga * gb) / params.two_s)
    if a.is_hermitian() and b.is_hermitian():
        return lead.real, corr.real
    return lead, corr


def _osc_setup(a, b, params: OscCoherentParams):
    fac = _single_factor(a, b, Boson)
    st = osc_coherent_state(params, fac.ncut)
    _, _, q, p = boson_operators(fac.ncut, params.hbar, params.omega)
    w = math.sqrt(params.omega)
    xm = (1j / params.hbar) * (w * q.entries - 1j * p.entries / w)
    xp = (1j / params.hbar) * (w * q.entries + 1j * p.entries / w)
    return st.amplitudes, xm, xp


def _check_nmax(nmax):
    if not 0 <= nmax <= NMAX_CAP:
        raise ValidationError(f"nmax must lie in [0, {NMAX_CAP}], got {nmax}")


def _run_series(term_fn, nmax, exact):
    """Evaluate term_fn(n) for n = 0.. until nmax or three consecutive negligible terms."""
    thr = SMALL_TERM_RTOL * abs(exact)
    terms, run, reason = [], 0, "nmax"
    for n in range(nmax + 1):
        t = term_fn(n)
        terms.append(t)
        run = run + 1 if (n > 0 and abs(t) <= thr) else 0
        if run >= SMALL_TERM_RUN:
            reason = "small-terms"
            break
    return terms, reason


def osc_product_series(a: DenseOperator, b: DenseOperator, params: OscCoherentParams,
                       nmax: int = 50) -> ExpansionReport:
    """hbar-series of <alpha|AB|alpha> for operators on one truncated oscillator.

    term n = (hbar^n / (n! 2^n)) <[X-, A]_n><[X+, B]_n>, X-+ = (i/hbar)(sqrt(w) q -+ i p / sqrt(w)).
    """
    _check_nmax(nmax)
    psi, xm, xp = _osc_setup(a, b, params)
    exact = _expect(psi, a.entries @ b.entries)
    state = {"a": a.entries, "b": b.entries}
    hb = params.hbar

    def term(n):
        if n:
            ca, cb = state["a"], state["b"]
            state["a"] = xm @ ca - ca @ xm
            state["b"] = xp @ cb - cb @ xp
        pref = math.exp(n * math.log(hb / 2) - gammaln(n + 1))
        return pref * _expect(psi, state["a"]) * _expect(psi, state["b"])

    terms, reason = _run_series(term, nmax, exact)
    return _report(terms, exact, reason)


def osc_variance_series(a: DenseOperator, params: OscCoherentParams, nmax: int = 50) -> ExpansionReport:
    """(Delta A)^2 = sum_{n>=1} (hbar^n/(n! 2^n)) |<[X-, A]_n>|^2; term 0 is reported as 0."""
    _check_nmax(nmax)
    require_hermitian(a)
    psi, xm, _ = _osc_setup(a, None, params)
    st = StateVector(a.space, psi)
    exact = variance(st, a)
    state = {"a": a.entries}
    hb = params.hbar

    def term(n):
        if n == 0:
            return 0.0
        ca = state["a"]
        state["a"] = xm @ ca - ca @ xm
        pref = math.exp(n * math.log(hb / 2) - gammaln(n + 1))
        return pref * abs(_expect(psi, state["a"])) ** 2

    terms, reason = _run_series(term, nmax, exact)
    return _report(terms, exact, reason)


def product_coherent_state(space: SpaceDescriptor, params: Sequence) -> StateVector:
    """Product of coherent states, one parameter bundle per factor of ``space``."""
    if len(params) != len(space):
        raise ValidationError(f"{len(space)} factors but {len(params)} parameter sets")
    parts = []
    for fac, pr in zip(space.factors, params):
        if isinstance(fac, Spin):
            if not isinstance(pr, SpinCoherentParams):
                raise ValidationError(f"factor {fac} needs SpinCoherentParams")
            _check_spin_params(fac, pr)
            parts.append(spin_coherent_state(pr))
        else:
            if not isinstance(pr, OscCoherentParams):
                raise ValidationError(f"factor {fac} needs OscCoherentParams")
            parts.append(osc_coherent_state(pr, fac.ncut))
    return product_state(parts)


def multi_osc_product_series(a: DenseOperator, b: DenseOperator, params: Sequence[OscCoherentParams],
                             nmax: int = 30) -> ExpansionReport:
    """hbar-series of <AB> in a product of N oscillator coherent states.

    Order n sums over all maps {1..n} -> {1..N}; since different modes commute
    the maps are grouped into multisets with weight n!/prod(k_i!).
    """
    _check_nmax(nmax)
    space = a.space
    if b.space != space:
        raise SpaceMismatchError(f"space mismatch: {a.space} vs {b.space}")
    if not all(isinstance(f, Boson) for f in space.factors):
        raise SpaceMismatchError("all factors must be oscillators")
    nmodes = len(space)
    if nmodes * nmax > MULTI_ORDER_CAP:
        raise ValidationError(f"N*nmax = {nmodes * nmax} exceeds the cap {MULTI_ORDER_CAP}")
    hbars = {p.hbar for p in params}
    if len(hbars) != 1:
        raise ValidationError("all modes must share one hbar")
    hb = hbars.pop()
    psi = product_coherent_state(space, params).amplitudes
    qm, qp = [], []
    for slot, (fac, pr) in enumerate(zip(space.factors, params)):
        fr = osc_ladder_frame(fac.ncut, pr.omega, hb)
        qm.append(tensor_embed(fr.q_minus, space, slot).entries)
        qp.append(tensor_embed(fr.q_plus, space, slot).entries)
    exact = _expect(psi, a.entries @ b.entries)
    bytes_per = 2 * 16 * space.dim**2
    level = [((0,) * nmodes, 0, a.entries, b.entries)]

    def term(n):
        nonlocal level
        if n:
            nxt = []
            for counts, last, ma, mb in level:
                for i in range(last, nmodes):
                    c = list(counts)
                    c[i] += 1
                    nxt.append((tuple(c), i, qm[i] @ ma - ma @ qm[i], qp[i] @ mb - mb @ qp[i]))
            if len(nxt) * bytes_per > MULTI_MEMORY_CAP:
                raise ValidationError("nested commutators at this order exceed the memory cap")
            level = nxt
        tot = 0j
        for counts, _, ma, mb in level:
            lw = n * math.log(hb) - sum(gammaln(k + 1) for k in counts)
            tot += math.exp(lw) * _expect(psi, ma) * _expect(psi, mb)
        return tot

    terms, reason = _run_series(term, nmax, exact)
    return _report(terms, exact, reason)


def two_spin_product_series(a: DenseOperator, b: DenseOperator, params1: SpinCoherentParams,
                            params2: SpinCoherentParams, hbar: float = 1.0,
                            cross_check: bool | None = None) -> ExpansionReport:
    """Finite double series of <AB> in |z1> x |z2>.

    Terms are grouped by total order n1 + n2; ``detail["grid"][n1, n2]`` holds
    the individual contributions. The nested-commutator form with the product of
    per-spin prefactors is evaluated as a cross-check.
    """
    space = a.space
    if b.space != space:
        raise SpaceMismatchError(f"space mismatch: {a.space} vs {b.space}")
    if len(space) != 2 or not all(isinstance(f, Spin) for f in space.factors):
        raise SpaceMismatchError("expected exactly two spin factors")
    _check_spin_params(space.factors[0], params1)
    _check_spin_params(space.factors[1], params2)
    f1 = spin_ladder_frame(params1, hbar)
    f2 = spin_ladder_frame(params2, hbar)
    u = np.kron(f1.rotation.entries, f2.rotation.entries)
    psi = u[:, 0]
    d1, d2 = space.dims
    row = (psi.conj() @ a.entries @ u).reshape(d1, d2)
    col = (u.conj().T @ (b.entries @ psi)).reshape(d1, d2)
    grid = row * col
    exact = _expect(psi, a.entries @ b.entries)
    terms = np.zeros(d1 + d2 - 1, dtype=complex)
    for n1 in range(d1):
        terms[n1:n1 + d2] += grid[n1]
    check = None
    if cross_check or (cross_check is None and max(params1.two_s, params2.two_s) <= CROSS_CHECK_MAX_TWO_S):
        x1m = (1j / hbar) * tensor_embed(f1.s_minus, space, 0).entries
        x1p = (1j / hbar) * tensor_embed(f1.s_plus, space, 0).entries
        x2m = (1j / hbar) * tensor_embed(f2.s_minus, space, 1).entries
        x2p = (1j / hbar) * tensor_embed(f2.s_plus, space, 1).entries
        alt = np.zeros_like(grid)
        ca1, cb1 = a.entries, b.entries
        for n1 in range(d1):
            if n1:
                ca1 = x1m @ ca1 - ca1 @ x1m
                cb1 = x1p @ cb1 - cb1 @ x1p
            ca, cb = ca1, cb1
            for n2 in range(d2):
                if n2:
                    ca = x2m @ ca - ca @ x2m
                    cb = x2p @ cb - cb @ x2p
                lp = log_su2_prefactor(params1.two_s, n1) + log_su2_prefactor(params2.two_s, n2)
                alt[n1, n2] = math.exp(lp) * _expect(psi, ca) * _expect(psi, cb)
        scale = max(np.max(np.abs(grid)), abs(exact), np.finfo(float).tiny)
        check = float(np.max(np.abs(alt - grid)) / scale)
        if check > CROSS_CHECK_RTOL:
            raise NumericalCheckError(
                f"matrix-element and commutator forms disagree by {check:.3e} (relative)")
    return _report(terms, exact, "finite", check, {"grid": grid})


def energy_fluctuation_leading(h: DenseOperator, params: Sequence, hbar: float = 1.0) -> float:
    """Leading-order (Delta H)^2 in a product coherent state.

    (hbar/2) sum_osc [w <dq/dt>^2 + <dp/dt>^2 / w] + sum_spin (1/2S) |<dS/dt>|^2,
    every time derivative being <(i/hbar)[H, X]>.
    """
    require_hermitian(h, "Hamiltonian")
    space = h.space
    psi = product_coherent_state(space, params).amplitudes
    hm = h.entries
    total = 0.0

    def rate(x):
        return _expect(psi, (1j / hbar) * (hm @ x - x @ hm)).real

    for slot, (fac, pr) in enumerate(zip(space.factors, params)):
        if isinstance(fac, Boson):
            if abs(pr.hbar - hbar) > 1e-15 * hbar:
                raise ValidationError("oscillator parameters carry a different hbar")
            _, _, q, p = boson_operators(fac.ncut, hbar, pr.omega)
            dq = rate(tensor_embed(q, space, slot).entries)
            dp = rate(tensor_embed(p, space, slot).entries)
            total += 0.5 * hbar * (pr.omega * dq**2 + dp**2 / pr.omega)
        else:
            if fac.two_s == 0:
                continue
            ds = [rate(tensor_embed(op, space, slot).entries) for op in spin_operators(fac.two_s, hbar)]
            total += float(np.dot(ds, ds)) / fac.two_s
    return float(total)
