"""Shared oracle builders for the test suite.

These deliberately re-derive everything from first principles (python
loops, dense linear algebra) so the vectorized / transform-based library
paths are checked against independent implementations.
"""

import numpy as np

from gradkit.grids import DomainMask, GradientField, ScalarGrid

SQRT2 = np.sqrt(2.0)


def trap_consistent_field(zv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """p, q whose trapezoidal edge averages equal the exact z differences.

    Built by the recurrence p[u+1] = 2 (z[u+1] - z[u]) - p[u] per row
    (and the analogue per column for q), starting from 0.  Any integrator
    using the trapezoidal edge model must reproduce zv exactly from this
    field, up to a constant.
    """
    h, w = zv.shape
    p = np.zeros((h, w))
    q = np.zeros((h, w))
    for u in range(w - 1):
        p[:, u + 1] = 2.0 * (zv[:, u + 1] - zv[:, u]) - p[:, u]
    for v in range(h - 1):
        q[v + 1, :] = 2.0 * (zv[v + 1, :] - zv[v, :]) - q[v, :]
    return p, q


def field_on_full(p: np.ndarray, q: np.ndarray) -> GradientField:
    h, w = p.shape
    return GradientField(ScalarGrid(p), ScalarGrid(q), DomainMask.full(w, h))


def disc_mask(size: int, radius: float) -> DomainMask:
    uu, vv = np.meshgrid(np.arange(size, dtype=float), np.arange(size, dtype=float))
    c = (size - 1) / 2.0
    return DomainMask((uu - c) ** 2 + (vv - c) ** 2 <= radius**2)


def random_mask(rng, width: int, height: int, fill=0.6) -> DomainMask:
    while True:
        inside = rng.random((height, width)) < fill
        if inside.any():
            return DomainMask(inside)


def incidence_lstsq(g: GradientField) -> np.ndarray:
    """Dense least-squares minimizer of the edge-residual energy.

    Rows of the incidence system are the +u / +v edges with both endpoints
    inside; the right-hand side is the trapezoidal edge average.  Returns a
    full grid with NaN outside, normalized to zero mean per the whole
    inside set (caller aligns further if needed).
    """
    inside = g.mask.inside
    h, w = inside.shape
    p, q = g.p.values, g.q.values
    pix = [(v, u) for v in range(h) for u in range(w) if inside[v, u]]
    index = {vu: i for i, vu in enumerate(pix)}
    rows, rvals = [], []
    for v, u in pix:
        if u + 1 < w and inside[v, u + 1]:
            rows.append((index[(v, u)], index[(v, u + 1)]))
            rvals.append((p[v, u] + p[v, u + 1]) / 2.0)
        if v + 1 < h and inside[v + 1, u]:
            rows.append((index[(v, u)], index[(v + 1, u)]))
            rvals.append((q[v, u] + q[v + 1, u]) / 2.0)
    B = np.zeros((len(rows), len(pix)))
    for e, (i, j) in enumerate(rows):
        B[e, i] = -1.0
        B[e, j] = 1.0
    zvec, *_ = np.linalg.lstsq(B, np.array(rvals), rcond=None)
    out = np.full((h, w), np.nan)
    for (v, u), i in index.items():
        out[v, u] = zvec[i]
    out[inside] -= out[inside].mean()
    return out


def dense_system(g: GradientField) -> tuple[np.ndarray, np.ndarray, list]:
    """Dense matrix and rhs of the per-pixel optimality equations.

    Independent loop-based assembly: for each inside pixel, the equation
    sum over inside neighbors (z_nbr - z_pix) = signed sum of trapezoidal
    edge averages.  Returns (A, b, pixel list in row-major (v, u) order).
    """
    inside = g.mask.inside
    h, w = inside.shape
    p, q = g.p.values, g.q.values
    pix = [(v, u) for v in range(h) for u in range(w) if inside[v, u]]
    index = {vu: i for i, vu in enumerate(pix)}
    n = len(pix)
    A = np.zeros((n, n))
    b = np.zeros(n)
    for v, u in pix:
        i = index[(v, u)]
        for du, dv in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            uu, vv = u + du, v + dv
            if not (0 <= uu < w and 0 <= vv < h) or not inside[vv, uu]:
                continue
            A[i, index[(vv, uu)]] += 1.0
            A[i, i] -= 1.0
            if du == 1:
                b[i] += (p[v, u] + p[v, uu]) / 2.0
            elif du == -1:
                b[i] -= (p[v, uu] + p[v, u]) / 2.0
            elif dv == 1:
                b[i] += (q[v, u] + q[vv, u]) / 2.0
            else:
                b[i] -= (q[vv, u] + q[v, u]) / 2.0
    return A, b, pix


def neumann_dense_rhs(p: np.ndarray, q: np.ndarray, bN: np.ndarray) -> np.ndarray:
    """Loop-built right-hand side of the reflective (Neumann) system."""
    h, w = p.shape
    rhs = np.zeros((h, w))
    for v in range(h):
        for u in range(w):
            if 0 < u < w - 1:
                dp = (p[v, u + 1] - p[v, u - 1]) / 2.0
            elif u == 0:
                dp = (p[v, 1] - p[v, 0]) / 2.0
            else:
                dp = (p[v, w - 1] - p[v, w - 2]) / 2.0
            if 0 < v < h - 1:
                dq = (q[v + 1, u] - q[v - 1, u]) / 2.0
            elif v == 0:
                dq = (q[1, u] - q[0, u]) / 2.0
            else:
                dq = (q[h - 1, u] - q[h - 2, u]) / 2.0
            weight = 0.0
            if u in (0, w - 1) or v in (0, h - 1):
                weight = SQRT2 if (u in (0, w - 1) and v in (0, h - 1)) else 1.0
            rhs[v, u] = dp + dq - weight * bN[v, u]
    return rhs


def reflective_dense_matrix(w: int, h: int) -> np.ndarray:
    """Five-point Laplacian with reflected (ghost = self) boundary rows."""
    n = w * h
    A = np.zeros((n, n))
    for v in range(h):
        for u in range(w):
            i = v * w + u
            for du, dv in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                uu, vv = u + du, v + dv
                if 0 <= uu < w and 0 <= vv < h:
                    A[i, vv * w + uu] += 1.0
                    A[i, i] -= 1.0
    return A


def wrapped_stencil_truth(width: int, height: int, seed: int):
    """(z*, p, q) such that the wrapped five-point system maps (p, q) to z*.

    Built in the spectral domain (odd sizes keep every mode usable): the
    gradient spectra are chosen so the periodic solver's numerator equals
    the stencil eigenvalue times the target spectrum.
    """
    assert width % 2 == 1 and height % 2 == 1, "use odd sizes"
    rng = np.random.default_rng(seed)
    zstar = rng.normal(size=(height, width))
    zstar -= zstar.mean()
    Z = np.fft.fft2(zstar)
    k = np.arange(width)[None, :]
    l = np.arange(height)[:, None]
    P = 2j * np.tan(np.pi * k / width) * Z
    Q = 2j * np.tan(np.pi * l / height) * Z
    p = np.real(np.fft.ifft2(P))
    q = np.real(np.fft.ifft2(Q))
    return zstar, p, q


def brute_force_classify(inside: np.ndarray, u: int, v: int):
    h, w = inside.shape
    neighbors = []
    for du, dv in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        uu, vv = u + du, v + dv
        if 0 <= uu < w and 0 <= vv < h and inside[vv, uu]:
            neighbors.append((uu, vv))
    if not inside[v, u]:
        kind = "outside"
    elif len(neighbors) == 4:
        kind = "interior"
    else:
        kind = "boundary"
    return kind, neighbors
