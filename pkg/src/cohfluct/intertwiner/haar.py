"""Group averaging over SU(2) by exact product quadrature.

P = (1/8 pi^2) int_0^{4 pi} dpsi sin^2(psi/2) int dOmega(n) exp(i psi n.J).

Running psi over the full SU(2) period [0, 4 pi) (with the extra factor 1/2)
keeps the rule exact for half-integer total spin too. For integer total spin
it coincides with the usual [0, 2 pi) form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from ..coherent import spin_coherent_amplitudes, direction_angles
from ..errors import EmptySingletSpaceError, ValidationError
from ..hilbert import DenseOperator, SpaceDescriptor, Spin, StateVector, spin_operators, tensor_embed
from ..quadrature import sphere_rule
from .geometry import NodeGeometry

DIMENSION_CAP = 20_000
MATRIX_CAP = 1000
INVARIANCE_RTOL = 1e-10
CHUNK = 4096


@dataclass(frozen=True, eq=False)
class HaarGrid:
    """Product rule: sphere points (K, 3) with weights, psi nodes with weights.

    Weights include the measure normalization, so sum_k w_k sum_j v_j = 1.
    """

    points: np.ndarray
    sphere_weights: np.ndarray
    psi: np.ndarray
    psi_weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.points) * len(self.psi)


def haar_grid(total_two_s: int, extra: int = 0) -> HaarGrid:
    """Minimal exact grid for a tensor product of total spin twoS/2, plus ``extra`` nodes per axis."""
    t = total_two_s / 2
    n_psi = int(math.ceil(2 * t + 3)) + extra
    n_theta = int(math.ceil(t + 2)) + extra
    n_phi = int(math.ceil(2 * t + 3)) + extra
    _, _, pts, w = sphere_rule(n_theta, n_phi)
    psi = 4 * np.pi * np.arange(n_psi) / n_psi
    wpsi = (4 * np.pi / n_psi) * np.sin(psi / 2) ** 2 / (8 * np.pi**2)
    return HaarGrid(pts, w, psi, wpsi)


def wigner_top_row(two_s: int, axis, psi):
    """(<S|R|S>, <S-1|R|S>) for R = exp(i psi n.S), S = twoS/2, |S> the top state.

    <S|R|S> = (cos(psi/2) + i n_z sin(psi/2))^{2S},
    <S-1|R|S> = i sqrt(2S) (cos(psi/2) + i n_z sin(psi/2))^{2S-1} (n_x + i n_y) sin(psi/2).
    ``axis`` may be (..., 3) and ``psi`` any broadcastable array.
    """
    n = np.asarray(axis, dtype=float)
    psi = np.asarray(psi, dtype=float)
    c, s = np.cos(psi / 2), np.sin(psi / 2)
    base = c + 1j * n[..., 2] * s
    d0 = base**two_s
    if two_s == 0:
        return d0, np.zeros_like(d0)
    d1 = 1j * math.sqrt(two_s) * base ** (two_s - 1) * (n[..., 0] + 1j * n[..., 1]) * s
    return d0, d1


def _top_row_conjugate(two_s, axis, psi):
    """<S|R|S-1> = conj(<S-1|R^dag|S>)."""
    _, d1 = wigner_top_row(two_s, axis, -np.asarray(psi, dtype=float))
    return np.conj(d1)


def edge_frame(direction) -> tuple:
    """Right-handed frame (u, v, s) with v = e_z x s / |e_z x s|, u = v x s.

    At the poles u = e_x and v = s x u.
    """
    s = np.asarray(direction, dtype=float)
    w = np.cross([0.0, 0.0, 1.0], s)
    nw = np.linalg.norm(w)
    if nw < 1e-12:
        u = np.array([1.0, 0.0, 0.0])
        v = np.cross(s, u)
        return u, v, s
    v = w / nw
    u = np.cross(v, s)
    return u, v, s


def _require_singlets(node: NodeGeometry):
    if not node.has_singlets_possible:
        raise EmptySingletSpaceError(
            f"total spin {node.total_spin} is half-integer: the invariant subspace is empty")


@dataclass(frozen=True, eq=False)
class NodeIntegrals:
    """Quadratures over the group for a product coherent state |Phi>.

    norm = <Phi|P|Phi>; c_numerators[a] = <Phi|[i S_a, P]|Phi>;
    triple_numerator = <Phi|S_e1 . (S_e2 x S_e3) P|Phi>.
    """

    norm: complex
    c_numerators: np.ndarray
    triple_numerator: complex | None
    triple_edges: tuple | None


_EPS = np.zeros((3, 3, 3))
_EPS[0, 1, 2] = _EPS[1, 2, 0] = _EPS[2, 0, 1] = 1.0
_EPS[0, 2, 1] = _EPS[2, 1, 0] = _EPS[1, 0, 2] = -1.0


def node_integrals(node: NodeGeometry, triple: tuple | None = (0, 1, 2), extra: int = 0) -> NodeIntegrals:
    """Norm, C-numerators and triple-product numerator in one pass over the grid.

    Each edge contributes through the top row of its rotation matrix in the
    frame of its own coherent state, so the cost is independent of the
    tensor-space dimension.
    """
    grid = haar_grid(sum(node.two_s), extra)
    nedge = node.n_edges
    if triple is not None:
        triple = tuple(int(e) for e in triple)
        if len(set(triple)) != 3 or not all(0 <= e < nedge for e in triple):
            raise ValidationError(f"triple product needs three distinct edges, got {triple}")
    frames = [edge_frame(v) for v in node.directions]
    psi = grid.psi[:, None]
    norm = 0j
    cnum = np.zeros((nedge, 3), dtype=complex)
    tnum = 0j
    for start in range(0, len(grid.points), CHUNK):
        pts = grid.points[start:start + CHUNK]
        wt = grid.psi_weights[:, None] * grid.sphere_weights[None, start:start + CHUNK]
        d0s, srs, rss = [], [], []
        for tw, (u, v, s) in zip(node.two_s, frames):
            local = np.stack([pts @ u, pts @ v, pts @ s], axis=-1)[None, :, :]
            d0, d1 = wigner_top_row(tw, local, psi)
            d1c = _top_row_conjugate(tw, local, psi)
            half = math.sqrt(tw) / 2
            sa = tw / 2
            # <c|S R|c> and <c|R S|c> as 3-vectors
            sr = half * d1[..., None] * (u - 1j * v) + sa * d0[..., None] * s
            rs = half * d1c[..., None] * (u + 1j * v) + sa * d0[..., None] * s
            d0s.append(d0)
            srs.append(sr)
            rss.append(rs)
        prod = reduce(np.multiply, d0s)
        norm += np.sum(prod * wt)
        for a in range(nedge):
            others = reduce(np.multiply, [d0s[b] for b in range(nedge) if b != a], np.ones_like(prod))
            cnum[a] += np.einsum("pk,pki->i", others * wt, 1j * (srs[a] - rss[a]))
        if triple is not None:
            e1, e2, e3 = triple
            rest = reduce(np.multiply, [d0s[b] for b in range(nedge) if b not in triple], np.ones_like(prod))
            tp = np.einsum("ijk,...i,...j,...k->...", _EPS, srs[e1], srs[e2], srs[e3])
            tnum += np.sum(tp * rest * wt)
    return NodeIntegrals(complex(norm), cnum, complex(tnum) if triple is not None else None, triple)


def haar_norm(node: NodeGeometry, extra: int = 0) -> float:
    """<Phi|P|Phi> by exact quadrature."""
    val = node_integrals(node, triple=None, extra=extra).norm
    return float(val.real)


def haar_coefficients(node: NodeGeometry, extra: int = 0) -> np.ndarray:
    """C_a = <Phi|[i S_a, P]|Phi> / <Phi|P|Phi> from the group integrals (any geometry)."""
    _require_singlets(node)
    ints = node_integrals(node, triple=None, extra=extra)
    return (ints.c_numerators / ints.norm).real


def haar_triple_product(node: NodeGeometry, edges: tuple = (0, 1, 2), extra: int = 0) -> float:
    """Coherent-intertwiner expectation of S_e1 . (S_e2 x S_e3)."""
    _require_singlets(node)
    ints = node_integrals(node, triple=edges, extra=extra)
    return float((ints.triple_numerator / ints.norm).real)


# ---- tensor-space routes -------------------------------------------------

def node_space(node: NodeGeometry) -> SpaceDescriptor:
    return SpaceDescriptor(tuple(Spin(t) for t in node.two_s))


def node_state(node: NodeGeometry) -> StateVector:
    """Product of edge coherent states |s_1> x ... x |s_N>."""
    vecs = [spin_coherent_amplitudes(t, *direction_angles(v)) for t, v in zip(node.two_s, node.directions)]
    return StateVector(node_space(node), reduce(np.kron, vecs), normalize=True)


def node_spin_operators(node: NodeGeometry) -> list:
    """Per edge, the dimensionless (Sx, Sy, Sz) embedded in the node space."""
    space = node_space(node)
    return [[tensor_embed(op, space, a) for op in spin_operators(t, 1.0)] for a, t in enumerate(node.two_s)]


def total_spin_operators(node: NodeGeometry) -> list:
    ops = node_spin_operators(node)
    return [reduce(lambda x, y: x + y, [ops[a][i] for a in range(node.n_edges)]) for i in range(3)]


def triple_product_operator(node: NodeGeometry, edges: tuple = (0, 1, 2)) -> DenseOperator:
    """S_e1 . (S_e2 x S_e3) on the node space."""
    ops = node_spin_operators(node)
    e1, e2, e3 = edges
    m = 0
    for i in range(3):
        for j in range(3):
            for k in range(3):
                if _EPS[i, j, k]:
                    m = m + _EPS[i, j, k] * (ops[e1][i].entries @ ops[e2][j].entries @ ops[e3][k].entries)
    return DenseOperator(node_space(node), m)


def _check_dimension(node, cap):
    if node.dimension > cap:
        raise ValidationError(f"node dimension {node.dimension} exceeds the cap {cap}")


def _per_node_factors(node: NodeGeometry, grid: HaarGrid):
    """Yield (weight, eigenvector matrices W_a, total-M grid, psi-averaged f(M)) per sphere point."""
    gens = [[op.entries for op in spin_operators(t, 1.0)] for t in node.two_s]
    mvals = [t / 2 - np.arange(t + 1) for t in node.two_s]
    mtot = reduce(np.add.outer, mvals).reshape(-1)
    # f(M) = sum_j v_j exp(i psi_j M); depends only on total M
    uniq = np.unique(np.round(2 * mtot).astype(int))
    fvals = {k: complex(np.sum(grid.psi_weights * np.exp(0.5j * k * grid.psi))) for k in uniq}
    fm = np.array([fvals[k] for k in np.round(2 * mtot).astype(int)])
    for n, w in zip(grid.points, grid.sphere_weights):
        ws = []
        for g, m in zip(gens, mvals):
            gen = n[0] * g[0] + n[1] * g[1] + n[2] * g[2]
            ev, vec = np.linalg.eigh(gen)
            # eigh sorts ascending; reorder to descending m
            ws.append(vec[:, ::-1])
        yield w, ws, fm


def _apply_kron(mats, vec, dims):
    """(mats[0] x mats[1] x ...) @ vec without forming the Kronecker product."""
    t = vec.reshape(dims)
    for ax, m in enumerate(mats):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [ax])), 0, ax)
    return t.reshape(-1)


def apply_projector(node: NodeGeometry, vec, extra: int = 0, cap: int = DIMENSION_CAP) -> np.ndarray:
    """P @ vec by quadrature, using per-edge eigendecompositions of n.S_a."""
    _check_dimension(node, cap)
    grid = haar_grid(sum(node.two_s), extra)
    dims = node.dims
    v = np.asarray(vec, dtype=complex)
    out = np.zeros_like(v)
    for w, ws, fm in _per_node_factors(node, grid):
        y = _apply_kron([m.conj().T for m in ws], v, dims)
        out += w * _apply_kron(ws, fm * y, dims)
    return out


def projector_matrix(node: NodeGeometry, extra: int = 0, cap: int = MATRIX_CAP) -> DenseOperator:
    """Dense P on the node space (dimension <= cap)."""
    _check_dimension(node, cap)
    grid = haar_grid(sum(node.two_s), extra)
    dim = node.dimension
    p = np.zeros((dim, dim), dtype=complex)
    sel = None
    for w, ws, fm in _per_node_factors(node, grid):
        if sel is None:
            # only |M| <= 1 survive the psi average; the rest are rounding noise
            sel = np.abs(fm) > 1e-13 * np.max(np.abs(fm))
            fsel = fm[sel]
        big = reduce(np.kron, ws)[:, sel]
        p += w * (big * fsel) @ big.conj().T
    return DenseOperator(node_space(node), p)


def haar_expectation(node: NodeGeometry, q: DenseOperator | None = None, variant: str = "ratio",
                     extra: int = 0, cap: int = DIMENSION_CAP):
    """Group-averaged expectation in the coherent node state.

    variant "ratio": <Phi|Q P|Phi> / <Phi|P|Phi> (the coherent-intertwiner value);
    variant "raw": <Phi|Q P|Phi>. With q=None the norm <Phi|P|Phi> is returned.
    Q must be rotationally invariant.
    """
    if variant not in ("ratio", "raw"):
        raise ValidationError(f"unknown variant {variant!r}")
    _check_dimension(node, cap)
    phi = node_state(node).amplitudes
    pphi = apply_projector(node, phi, extra, cap)
    norm = complex(np.vdot(phi, pphi))
    if q is None:
        return float(norm.real)
    if q.space != node_space(node):
        raise ValidationError(f"operator acts on {q.space}, node space is {node_space(node)}")
    jops = total_spin_operators(node)
    for j in jops:
        comm = np.linalg.norm(q.entries @ j.entries - j.entries @ q.entries)
        if comm > INVARIANCE_RTOL * max(1.0, q.norm()):
            raise ValidationError(f"operator is not rotationally invariant (||[Q, J]|| = {comm:.2e})")
    raw = complex(np.vdot(phi, q.entries @ pphi))
    if variant == "raw":
        return raw
    _require_singlets(node)
    val = raw / norm
    return val.real if abs(val.imag) <= 1e-12 * max(1.0, abs(val)) else val
