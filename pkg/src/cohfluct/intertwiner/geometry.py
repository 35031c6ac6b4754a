"""Node geometry: edge spins and unit normals, closure, the H matrix."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DegenerateNodeError, ValidationError

log = logging.getLogger(__name__)

UNIT_TOL = 1e-12
LOAD_NORM_WARN = 1e-6
COLLINEAR_TOL = 1e-12
CLOSURE_RTOL = 1e-10

# Prefactor relating dimensionless spins to flux operators, E_a = 8 pi gamma l_P^2 S_a.
# Exposed for reference only; nothing in the package multiplies by it.
FLUX_PREFACTOR_OVER_IMMIRZI_LP2 = 8 * math.pi


@dataclass(frozen=True, eq=False)
class NodeGeometry:
    """N-valent node: spins twoS_a / 2 and unit directions s_a (rows of ``directions``).

    Spins are dimensionless. Two antipodal edges are accepted so closure can be
    exercised on the smallest example; collinearity is rejected where H is inverted.
    """

    two_s: tuple
    directions: np.ndarray

    def __post_init__(self):
        ts = tuple(int(t) for t in self.two_s)
        if any(t != t0 for t, t0 in zip(ts, self.two_s)):
            raise ValidationError("edge twoS values must be integers")
        d = np.array(self.directions, dtype=float).reshape(-1, 3)
        if len(ts) != len(d):
            raise ValidationError(f"{len(ts)} spins but {len(d)} directions")
        if len(ts) < 2:
            raise ValidationError("a node needs at least two edges")
        if min(ts) < 1:
            raise ValidationError("edge spins must be positive")
        dev = np.abs(np.linalg.norm(d, axis=1) - 1)
        if np.max(dev) > UNIT_TOL:
            raise ValidationError(f"directions must be unit vectors (deviation {np.max(dev):.2e})")
        d.flags.writeable = False
        object.__setattr__(self, "two_s", ts)
        object.__setattr__(self, "directions", d)

    @classmethod
    def from_edges(cls, edges, normalize: bool = False) -> "NodeGeometry":
        ts = [int(e[0]) for e in edges]
        d = np.array([np.asarray(e[1], dtype=float) for e in edges])
        if normalize:
            d = d / np.linalg.norm(d, axis=1)[:, None]
        return cls(tuple(ts), d)

    @property
    def n_edges(self) -> int:
        return len(self.two_s)

    @property
    def spins(self) -> np.ndarray:
        return np.array(self.two_s, dtype=float) / 2

    @property
    def total_spin(self) -> float:
        return sum(self.two_s) / 2

    @property
    def has_singlets_possible(self) -> bool:
        """False when the total spin is half-integer (no invariant subspace)."""
        return sum(self.two_s) % 2 == 0

    @property
    def dims(self) -> tuple:
        return tuple(t + 1 for t in self.two_s)

    @property
    def dimension(self) -> int:
        return int(np.prod(self.dims))

    @property
    def edges(self) -> list:
        return [(t, v.copy()) for t, v in zip(self.two_s, self.directions)]

    def scaled(self, lam: int) -> "NodeGeometry":
        """Rescale every spin S_a -> lam S_a (lam a positive integer)."""
        if int(lam) != lam or lam < 1:
            raise ValidationError(f"scale factor must be a positive integer, got {lam}")
        return NodeGeometry(tuple(int(lam) * t for t in self.two_s), self.directions)

    def rotated(self, rot) -> "NodeGeometry":
        r = np.asarray(rot, dtype=float)
        return NodeGeometry(self.two_s, self.directions @ r.T)

    def to_records(self) -> list:
        return [{"two_s": t, "direction": [float(x) for x in v]} for t, v in zip(self.two_s, self.directions)]


def closure_defect(node: NodeGeometry) -> np.ndarray:
    """sum_a S_a s_a."""
    return node.spins @ node.directions


def is_closed(node: NodeGeometry, rtol: float = CLOSURE_RTOL) -> bool:
    return float(np.linalg.norm(closure_defect(node))) < rtol * node.total_spin


def is_collinear(node: NodeGeometry) -> bool:
    d = node.directions
    cr = np.cross(d[:, None, :], d[None, :, :])
    return float(np.max(np.linalg.norm(cr, axis=-1))) < COLLINEAR_TOL


@dataclass(frozen=True, eq=False)
class HessianH:
    """H^{ij} = sum_a S_a (delta^{ij} - s_a^i s_a^j), positive definite for non-collinear nodes."""

    matrix: np.ndarray

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    @property
    def trace_inverse(self) -> float:
        return float(np.trace(self.inverse))

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def hessian_matrix(node: NodeGeometry) -> np.ndarray:
    d = node.directions
    return node.spins.sum() * np.eye(3) - np.einsum("a,ai,aj->ij", node.spins, d, d)


def hessian(node: NodeGeometry) -> HessianH:
    if is_collinear(node):
        raise DegenerateNodeError("all edge directions are collinear: H is singular")
    return HessianH(hessian_matrix(node))


def det_h_explicit(node: NodeGeometry) -> float:
    """(T/2) sum_ab S_a S_b |s_a x s_b|^2 - (1/6) sum_abc S_a S_b S_c ((s_a x s_b) . s_c)^2."""
    s, d = node.spins, node.directions
    t = s.sum()
    cr = np.cross(d[:, None, :], d[None, :, :])  # (N, N, 3)
    two = np.einsum("a,b,ab->", s, s, np.sum(cr**2, axis=-1))
    trip = np.einsum("abi,ci->abc", cr, d)
    three = np.einsum("a,b,c,abc->", s, s, s, trip**2)
    return float(t / 2 * two - three / 6)


def regular_tetrahedron(two_s: int = 2) -> NodeGeometry:
    d = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float) / math.sqrt(3)
    return NodeGeometry((two_s,) * 4, d)


def squashed_tetrahedron(two_s: int = 2, z_scale: float = 0.7) -> NodeGeometry:
    """Tetrahedron normals with z-components scaled, renormalized.

    Equal spins keep the node closed because the four directions stay
    symmetric under the two-fold rotations about the coordinate axes.
    """
    d = np.array([[1, 1, z_scale], [1, -1, -z_scale], [-1, 1, -z_scale], [-1, -1, z_scale]], dtype=float)
    d /= np.linalg.norm(d, axis=1)[:, None]
    return NodeGeometry((two_s,) * 4, d)


def _random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_closed_node(rng, n_edges: int = 4, max_two_s: int = 6, integer_total: bool = True,
                       max_tries: int = 1000) -> NodeGeometry:
    """Random closed, non-collinear node.

    The first n-2 edges are random; the last two close the polygon as a
    triangle around the remaining vector.
    """
    if n_edges < 3:
        raise ValidationError("a random closed node needs at least three edges")
    for _ in range(max_tries):
        ts = list(rng.integers(1, max_two_s + 1, size=n_edges))
        if integer_total and sum(ts) % 2:
            ts[-1] += 1 if ts[-1] < max_two_s else -1
            if ts[-1] < 1:
                continue
        s = np.array(ts, dtype=float) / 2
        dirs = [_random_unit(rng) for _ in range(n_edges - 2)]
        rem = -(s[:-2] @ np.array(dirs))
        r = np.linalg.norm(rem)
        s1, s2 = s[-2], s[-1]
        if r < 1e-9 or not (abs(s1 - s2) + 1e-6 < r < s1 + s2 - 1e-6):
            continue
        axis = rem / r
        par = (r * r + s1 * s1 - s2 * s2) / (2 * r)
        perp_len = math.sqrt(max(s1 * s1 - par * par, 0.0))
        e = np.cross(axis, _random_unit(rng))
        e /= np.linalg.norm(e)
        v1 = par * axis + perp_len * e
        v2 = rem - v1
        d = np.array(dirs + [v1 / s1, v2 / s2])
        d /= np.linalg.norm(d, axis=1)[:, None]
        node = NodeGeometry(tuple(int(t) for t in ts), d)
        if not is_collinear(node) and is_closed(node):
            return node
    raise ValidationError("could not sample a closed node; increase max_two_s or max_tries")


def parse_node_records(records) -> NodeGeometry:
    """Records {two_s: int, direction: [x, y, z]}; directions are normalized, with a warning
    when the input norm deviates from 1 by more than 1e-6."""
    if isinstance(records, dict) and "edges" in records:
        records = records["edges"]
    if not isinstance(records, list) or not records:
        raise ValidationError("node file must hold a nonempty list of edge records")
    ts, dirs = [], []
    for k, rec in enumerate(records):
        try:
            t = rec["two_s"]
            v = np.asarray(rec["direction"], dtype=float).reshape(3)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"edge record {k} malformed: {rec!r}") from exc
        if int(t) != t:
            raise ValidationError(f"edge record {k}: two_s must be an integer")
        nv = np.linalg.norm(v)
        if nv == 0:
            raise ValidationError(f"edge record {k}: zero direction")
        if abs(nv - 1) > LOAD_NORM_WARN:
            log.warning("edge %d direction has norm %.6g; normalizing", k, nv)
        ts.append(int(t))
        dirs.append(v / nv)
    return NodeGeometry(tuple(ts), np.array(dirs))


def load_node_file(path) -> NodeGeometry:
    """Read a node from YAML or JSON."""
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        data = json.loads(text)
    else:
        import yaml

        data = yaml.safe_load(text)
    return parse_node_records(data)
