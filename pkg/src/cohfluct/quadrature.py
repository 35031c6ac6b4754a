"""Product quadrature rules used by the completeness checks and group averages."""
from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss


def sphere_rule(n_theta: int, n_phi: int):
    """Gauss-Legendre in cos(theta) times uniform phi.

    Returns (cos_theta, phi, points, weights) with points of shape (K, 3) and
    weights summing to 4 pi. Exact for polynomials of degree < 2 n_theta in
    cos(theta) times trigonometric polynomials of degree < n_phi in phi.
    """
    x, wx = leggauss(int(n_theta))
    phi = 2 * np.pi * np.arange(int(n_phi)) / n_phi
    ct = np.repeat(x, n_phi)
    ph = np.tile(phi, n_theta)
    st = np.sqrt(np.clip(1 - ct**2, 0.0, None))
    pts = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=1)
    w = np.repeat(wx, n_phi) * (2 * np.pi / n_phi)
    return ct, ph, pts, w


def interval_rule(n: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1), half * w
