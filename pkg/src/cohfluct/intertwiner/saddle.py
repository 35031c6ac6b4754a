"""Large-spin (saddle-point) formulas for coherent intertwiners.

Besides the short first-order expressions this module provides the
complete first-order corrections ("complete"), obtained by expanding the
group integral around the saddle including the quartic part of the phase,
the square of its cubic part and the measure. The short corrections keep
only part of these terms; their errors therefore still decay like 1/lambda
under S_a -> lambda S_a, while the complete ones decay like 1/lambda^2.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import ClosureError, EmptySingletSpaceError, NumericalCheckError, ValidationError
from ..hilbert import DenseOperator
from .geometry import CLOSURE_RTOL, NodeGeometry, closure_defect, hessian
from .haar import _EPS, INVARIANCE_RTOL, node_space, node_spin_operators, node_state, total_spin_operators

EPS_FORM_TOL = 1e-12


def _require_closure(node: NodeGeometry):
    d = float(np.linalg.norm(closure_defect(node)))
    if d >= CLOSURE_RTOL * node.total_spin:
        raise ClosureError(f"closure violated: |sum S_a s_a| = {d:.3e}")


def _require_integer_total(node: NodeGeometry):
    if not node.has_singlets_possible:
        raise EmptySingletSpaceError(
            f"total spin {node.total_spin} is half-integer: the invariant subspace is empty")


def _cross(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def norm_correction_complete(node: NodeGeometry) -> float:
    """Relative first-order correction kappa with <Phi|P|Phi> ~ leading (1 + kappa).

    With Sigma = H^{-1}/2 the Gaussian covariance at the saddle,
    kappa = tr(Sigma)/2
            - (1/2) sum_a S_a [(tr P_a Sigma)^2 + 2 tr(P_a Sigma P_a Sigma)]
            - (2/9) sum_ab S_a S_b [9 s_aa s_bb s_ab + 6 s_ab^3],
    P_a = 1 - s_a s_a^T and s_ab = s_a^T Sigma s_b.
    """
    h = hessian(node)
    sig = h.inverse / 2
    s, d = node.spins, node.directions
    kappa = np.trace(sig) / 2
    for sa, va in zip(s, d):
        pa = np.eye(3) - np.outer(va, va)
        ps = pa @ sig
        kappa -= 0.5 * sa * (np.trace(ps) ** 2 + 2 * np.trace(ps @ ps))
    cov = d @ sig @ d.T
    diag = np.diag(cov)
    cubic = 9 * np.outer(diag, diag) * cov + 6 * cov**3
    kappa -= (2.0 / 9.0) * float(s @ cubic @ s)
    return float(kappa)


def saddle_norm(node: NodeGeometry, order: str = "leading") -> float:
    """Saddle-point value of <Phi|P|Phi>.

    leading   : 1 / sqrt(pi det H)
    corrected : leading (1 + tr(H^{-1}) / 4), the short first-order form
    complete  : leading (1 + kappa) with kappa from norm_correction_complete
    """
    _require_closure(node)
    _require_integer_total(node)
    h = hessian(node)
    lead = 1.0 / math.sqrt(math.pi * h.det)
    if order == "leading":
        return lead
    if order == "corrected":
        return lead * (1 + h.trace_inverse / 4)
    if order == "complete":
        return lead * (1 + norm_correction_complete(node))
    raise ValidationError(f"unknown order {order!r}")


def coefficients_epsilon_form(node: NodeGeometry) -> np.ndarray:
    """C_a^i = S_a sum_jkl eps^{ijk} (H^{-1})^{kl} (s_a^l s_a^j - delta^{lj})."""
    hinv = hessian(node).inverse
    s, d = node.spins, node.directions
    out = np.empty((node.n_edges, 3))
    for a in range(node.n_edges):
        m = np.outer(d[a], d[a]) - np.eye(3)  # (l, j)
        out[a] = s[a] * np.einsum("ijk,kl,lj->i", _EPS, hinv, m)
    return out


def coefficients(node: NodeGeometry, require_closure: bool = True) -> np.ndarray:
    """C_a = S_a s_a x (H^{-1} s_a), cross-checked against the epsilon-tensor form."""
    if require_closure:
        _require_closure(node)
    hinv = hessian(node).inverse
    s, d = node.spins, node.directions
    c = s[:, None] * np.cross(d, d @ hinv.T)
    alt = coefficients_epsilon_form(node)
    scale = max(1.0, float(np.max(np.abs(c))))
    if np.max(np.abs(c - alt)) > EPS_FORM_TOL * scale:
        raise NumericalCheckError("closed-form and epsilon-form coefficients disagree")
    return c


def commutator_gradients(node: NodeGeometry, q: DenseOperator) -> np.ndarray:
    """g_a^i = <Phi|[i S_a^i, Q]|Phi> by matrix commutators on the node space."""
    if q.space != node_space(node):
        raise ValidationError("operator does not act on the node space")
    phi = node_state(node).amplitudes
    ops = node_spin_operators(node)
    qm = q.entries
    g = np.empty((node.n_edges, 3), dtype=complex)
    for a in range(node.n_edges):
        for i in range(3):
            x = ops[a][i].entries
            g[a, i] = np.vdot(phi, 1j * (x @ qm - qm @ x) @ phi)
    return g


def semiclassical_expectation(node: NodeGeometry, q: DenseOperator | None = None,
                              gradient_data=None, plain_value=None) -> float:
    """<Phi|Q|Phi> + sum_a (1/2S_a) sum_i <Phi|[i S_a^i, Q]|Phi> C_a^i.

    Either pass Q (gradients and <Phi|Q|Phi> are then computed on the node
    space) or pass ``gradient_data`` (N, 3) and ``plain_value`` directly.
    Q = None means the identity.
    """
    c = coefficients(node)
    if q is None and gradient_data is None:
        return 1.0 if plain_value is None else float(plain_value)
    if q is not None:
        jops = total_spin_operators(node)
        for j in jops:
            comm = np.linalg.norm(q.entries @ j.entries - j.entries @ q.entries)
            if comm > INVARIANCE_RTOL * max(1.0, q.norm()):
                raise ValidationError(f"operator is not rotationally invariant (||[Q, J]|| = {comm:.2e})")
        phi = node_state(node).amplitudes
        if gradient_data is None:
            gradient_data = commutator_gradients(node, q)
        if plain_value is None:
            plain_value = np.vdot(phi, q.entries @ phi)
    g = np.asarray(gradient_data)
    if g.shape != (node.n_edges, 3):
        raise ValidationError(f"gradient data must have shape ({node.n_edges}, 3)")
    corr = np.sum(g * c / (2 * node.spins[:, None]))
    return float(np.real(plain_value + corr))


def _check_edges(node, edges):
    if node.n_edges < 3:
        raise ValidationError("the triple product needs at least three edges")
    edges = tuple(int(e) for e in edges)
    if len(set(edges)) != 3 or not all(0 <= e < node.n_edges for e in edges):
        raise ValidationError(f"need three distinct edge indices, got {edges}")
    return edges


def triple_product_expectation(node: NodeGeometry, edges: tuple = (0, 1, 2)) -> tuple:
    """(leading, corrected) for S_1 . (S_2 x S_3) with the short first-order bracket.

    leading   = S1 S2 S3 s1 . (s2 x s3)
    corrected = leading + S1 S2 S3 (1/2) [ (s1 x (s2 x s3)) . (s1 x H^{-1} s1) + cyclic ]
    """
    e = _check_edges(node, edges)
    s, d = node.spins, node.directions
    pref = s[e[0]] * s[e[1]] * s[e[2]]
    v = [d[k] for k in e]
    lead = pref * float(v[0] @ np.cross(v[1], v[2]))
    _require_closure(node)
    hinv = hessian(node).inverse
    corr = 0.0
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        corr += 0.5 * float(np.cross(v[i], np.cross(v[j], v[k])) @ np.cross(v[i], hinv @ v[i]))
    return lead, lead + pref * corr


def _det3(vs):
    return np.einsum("ijk,i,j,k->", _EPS, vs[0], vs[1], vs[2])


def triple_product_complete(node: NodeGeometry, edges: tuple = (0, 1, 2)) -> float:
    """Triple-product expectation with the complete first-order correction.

    Expanding each edge's displaced coherent-state mean to second order in
    the saddle fluctuation p, with M_a = i (1 - s_a s_a^T) + [s_a]_x and
    covariance Sigma = H^{-1}/2, the relative first-order terms are

      sum_a det(s_a -> -i M_a Sigma s_a)
      + sum_{a<b} eps_ijk (M_a Sigma M_b^T)_{slot a, slot b} s_c
      - (2i/3) sum_a sum_b S_b det(s_a -> 3 M_a Sigma s_b (s_b^T Sigma s_b)),

    the first from the quadratic part of each mean, the second from pairs of
    linear parts, the third from a linear part against the cubic phase.
    """
    e = _check_edges(node, edges)
    _require_closure(node)
    _require_integer_total(node)
    s, d = node.spins, node.directions
    sig = hessian(node).inverse / 2
    v = [d[k].astype(complex) for k in e]
    m = [1j * (np.eye(3) - np.outer(d[k], d[k])) + _cross(d[k]) for k in e]
    lead = _det3(v)
    quad = 0j
    for a in range(3):
        w = list(v)
        w[a] = -1j * m[a] @ sig @ d[e[a]]
        quad += _det3(w)
    pair = 0j
    idx = "ijk"
    for a in range(3):
        for b in range(a + 1, 3):
            c = 3 - a - b
            t = m[a] @ sig @ m[b].T
            pair += np.einsum(f"ijk,{idx[a]}{idx[b]},{idx[c]}->", _EPS, t, v[c])
    cubic = 0j
    for a in range(3):
        for b in range(node.n_edges):
            w = list(v)
            sb = d[b]
            w[a] = m[a] @ (3 * sig @ sb * float(sb @ sig @ sb))
            cubic += -(2j / 3) * s[b] * _det3(w)
    pref = s[e[0]] * s[e[1]] * s[e[2]]
    return float(np.real(pref * (lead + quad + pair + cubic)))
