"""Polynomial spin Hamiltonians with the large-S scaling used for the LMG model."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from ..hilbert import DenseOperator, spin_operators


@dataclass(frozen=True, eq=False)
class SpinPolynomial:
    """H = sum c_i S_i + sum c_ij S_i S_j / (hbar S) + sum c_ijk S_i S_j S_k / (hbar S)^2, Hermitized.

    The coefficients are fixed; only twoS changes between evaluations, so the
    classical energy per (hbar S) stays of order one.
    """

    linear: np.ndarray
    quadratic: np.ndarray
    cubic: np.ndarray

    @classmethod
    def random(cls, rng, scale: float = 1.0) -> "SpinPolynomial":
        return cls(scale * rng.normal(size=3), scale * rng.normal(size=(3, 3)), scale * rng.normal(size=(3, 3, 3)))

    def operator(self, two_s: int, hbar: float = 1.0) -> DenseOperator:
        ops = [o.entries for o in spin_operators(two_s, hbar)]
        hs = hbar * two_s / 2
        m = sum(c * o for c, o in zip(self.linear, ops))
        for i, j in product(range(3), repeat=2):
            m = m + self.quadratic[i, j] * ops[i] @ ops[j] / hs
        for i, j, k in product(range(3), repeat=3):
            m = m + self.cubic[i, j, k] * ops[i] @ ops[j] @ ops[k] / hs**2
        m = 0.5 * (m + m.conj().T)
        return DenseOperator(spin_operators(two_s, hbar)[0].space, m)
