"""Independent singlet projector from sequential angular-momentum coupling.

Clebsch-Gordan coefficients use the Racah formula in exact rational
arithmetic; all angular momenta are passed doubled so half-integers are exact.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..errors import ValidationError
from ..hilbert import DenseOperator
from .geometry import NodeGeometry
from .haar import node_space

ORACLE_CAP = 256


@lru_cache(maxsize=None)
def clebsch_gordan(tj1: int, tm1: int, tj2: int, tm2: int, tj: int, tm: int) -> float:
    """<j1 m1; j2 m2 | J M> (Condon-Shortley), arguments doubled."""
    if tm1 + tm2 != tm:
        return 0.0
    if not abs(tj1 - tj2) <= tj <= tj1 + tj2 or (tj1 + tj2 + tj) % 2:
        return 0.0
    for tjj, tmm in ((tj1, tm1), (tj2, tm2), (tj, tm)):
        if abs(tmm) > tjj or (tjj - tmm) % 2:
            return 0.0
    f = math.factorial
    a, b, c = (tj + tj1 - tj2) // 2, (tj - tj1 + tj2) // 2, (tj1 + tj2 - tj) // 2
    pref = Fraction((tj + 1) * f(a) * f(b) * f(c), f((tj1 + tj2 + tj) // 2 + 1))
    pref *= (f((tj + tm) // 2) * f((tj - tm) // 2) * f((tj1 - tm1) // 2) * f((tj1 + tm1) // 2)
             * f((tj2 - tm2) // 2) * f((tj2 + tm2) // 2))
    x1 = (tj1 - tm1) // 2
    x2 = (tj2 + tm2) // 2
    y1 = (tj - tj2 + tm1) // 2
    y2 = (tj - tj1 - tm2) // 2
    total = Fraction(0)
    for k in range(max(0, -y1, -y2), min(c, x1, x2) + 1):
        den = f(k) * f(c - k) * f(x1 - k) * f(x2 - k) * f(y1 + k) * f(y2 + k)
        total += Fraction((-1) ** k, den)
    return math.sqrt(float(pref)) * float(total)


def singlet_basis(two_s) -> np.ndarray:
    """Orthonormal basis (columns) of the total-spin-zero subspace of the product space."""
    two_s = [int(t) for t in two_s]
    d1 = two_s[0] + 1
    # paths: list of (tJ, {tM: vector})
    paths = [(two_s[0], {two_s[0] - 2 * k: np.eye(d1)[k] for k in range(d1)})]
    for pos, tj in enumerate(two_s[1:], start=1):
        remaining = sum(two_s[pos + 1:])
        de = tj + 1
        new = []
        for tJ, vecs in paths:
            for tJn in range(abs(tJ - tj), tJ + tj + 1, 2):
                if tJn > remaining:
                    continue  # cannot couple back to zero
                out = {}
                for tMn in range(-tJn, tJn + 1, 2):
                    acc = None
                    for k in range(de):
                        tm = tj - 2 * k
                        tM = tMn - tm
                        if tM not in vecs:
                            continue
                        cg = clebsch_gordan(tJ, tM, tj, tm, tJn, tMn)
                        if cg == 0.0:
                            continue
                        term = cg * np.kron(vecs[tM], np.eye(de)[k])
                        acc = term if acc is None else acc + term
                    if acc is not None:
                        out[tMn] = acc
                new.append((tJn, out))
        paths = new
    cols = [vecs[0] for tJ, vecs in paths if tJ == 0 and 0 in vecs]
    dim = int(np.prod([t + 1 for t in two_s]))
    if not cols:
        return np.zeros((dim, 0))
    return np.array(cols).T


def recoupling_projector(node: NodeGeometry, cap: int = ORACLE_CAP) -> DenseOperator:
    """Singlet projector B B^T from the coupled basis (dimension <= cap)."""
    if node.dimension > cap:
        raise ValidationError(f"node dimension {node.dimension} exceeds the oracle cap {cap}")
    b = singlet_basis(node.two_s)
    return DenseOperator(node_space(node), b @ b.T)
