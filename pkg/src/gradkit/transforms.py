"""2D discrete Fourier, sine and cosine transforms with their inverses.

The definitions fix the conventions the spectral Poisson solvers rely on;
the fast paths are backed by scipy.fft / numpy.fft and agree with direct
double-sum evaluation of the same formulas.

dft2     F[k, l] = sum_{u, v} f[u, v] exp(-2 pi j (u k / m + v l / n))
sine2    S[k, l] = sum_{u, v} f[u, v] sin(pi k (u+1) / m) sin(pi l (v+1) / n)
         (samples live at the interior nodes 1..m-1 x 1..n-1 of an
         m x n-cell lattice, so an input of shape (n-1, m-1))
cosine2  C[k, l] = sum_{u, v} f[u, v] cos(pi k (2u+1) / (2m)) cos(pi l (2v+1) / (2n))
         (half-sample cosine nodes: exactly orthogonal, and they
         diagonalize the reflective five-point Laplacian)
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft


def dft2(f: np.ndarray) -> np.ndarray:
    return np.fft.fft2(f)


def idft2(coeffs: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(coeffs)


def sine2(f: np.ndarray) -> np.ndarray:
    """Forward sine transform of interior samples (no normalization)."""
    return sfft.dstn(f, type=1) / 4.0


def isine2(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`sine2`: f = (4 / (m n)) sum S sin sin."""
    m = coeffs.shape[1] + 1
    n = coeffs.shape[0] + 1
    return sfft.dstn(coeffs, type=1) / (m * n)


def cosine2(f: np.ndarray) -> np.ndarray:
    """Forward half-sample cosine transform (no normalization)."""
    return sfft.dctn(f, type=2) / 4.0


def icosine2(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`cosine2`.

    f = (4 / (m n)) sum w_k w_l C cos cos, with weight 1/2 on the k = 0
    and l = 0 terms (the price of the exactly orthogonal half-sample basis).
    """
    return sfft.idctn(4.0 * coeffs, type=2)
