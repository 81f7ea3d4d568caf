"""Analytic test surfaces, their exact gradients, and noise injection.

Gradients are evaluated from closed-form partial derivatives, never finite
differences: a forward-difference field is discretely integrable no matter
what the depth looks like, which silently hides the discontinuities an
integration benchmark is supposed to probe.

The vase surface models a half-vase lying on a flat ground, with depth
discontinuities along the top and bottom caps; its silhouette is returned
as a separate reconstruction mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import NormalField
from .grids import DomainMask, GradientField, ScalarGrid

GRADIENT_NOISE = "gradient_gaussian"
NORMAL_NOISE = "normal_angle_gaussian"


@dataclass(frozen=True)
class SyntheticSurface:
    z: ScalarGrid
    gradient: GradientField
    mask: DomainMask  # object silhouette for the vase; full grid otherwise

    def gradient_on_mask(self) -> GradientField:
        """The gradient datum restricted to the object mask."""
        return GradientField(self.gradient.p, self.gradient.q, self.mask)


def _coord_grids(width: int, height: int):
    return np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))


def _plane(width, height, a=1.0, b=0.0):
    uu, vv = _coord_grids(width, height)
    z = a * uu + b * vv
    p = np.full_like(z, a)
    q = np.full_like(z, b)
    return z, p, q, None


def _sine_product(width, height, kx=1.0, ky=1.0):
    uu, vv = _coord_grids(width, height)
    fu = 2.0 * np.pi * kx / width
    fv = 2.0 * np.pi * ky / height
    z = np.sin(fu * uu) * np.sin(fv * vv)
    p = fu * np.cos(fu * uu) * np.sin(fv * vv)
    q = fv * np.sin(fu * uu) * np.cos(fv * vv)
    return z, p, q, None


def _peaks(width, height, amplitude=1.0):
    # the classic three-bump exponential test surface on [-3, 3]^2
    uu, vv = _coord_grids(width, height)
    su = 6.0 / (width - 1)
    sv = 6.0 / (height - 1)
    x = -3.0 + su * uu
    y = -3.0 + sv * vv
    e1 = np.exp(-(x**2) - (y + 1.0) ** 2)
    e2 = np.exp(-(x**2) - y**2)
    e3 = np.exp(-((x + 1.0) ** 2) - y**2)
    z = 3.0 * (1.0 - x) ** 2 * e1 - 10.0 * (x / 5.0 - x**3 - y**5) * e2 - e3 / 3.0
    dzdx = (
        (-6.0 * (1.0 - x) - 6.0 * x * (1.0 - x) ** 2) * e1
        - 10.0 * ((0.2 - 3.0 * x**2) - 2.0 * x * (x / 5.0 - x**3 - y**5)) * e2
        + (2.0 / 3.0) * (x + 1.0) * e3
    )
    dzdy = (
        -6.0 * (1.0 - x) ** 2 * (y + 1.0) * e1
        - 10.0 * (-5.0 * y**4 - 2.0 * y * (x / 5.0 - x**3 - y**5)) * e2
        + (2.0 / 3.0) * y * e3
    )
    return amplitude * z, amplitude * su * dzdx, amplitude * sv * dzdy, None


def vase_radius(v: np.ndarray, width: int, height: int) -> np.ndarray:
    """Silhouette half-width of the vase at row v (NaN off the vase rows)."""
    v = np.asarray(v, dtype=float)
    t = (v - 0.15 * height) / (0.7 * height)
    r = 0.25 * width * (0.55 + 0.45 * np.sin(np.pi * t) * (1.0 - 0.35 * np.cos(3.0 * np.pi * t)))
    return np.where((t >= 0.0) & (t <= 1.0), r, np.nan)


def _vase_radius_slope(v: np.ndarray, width: int, height: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    t = (v - 0.15 * height) / (0.7 * height)
    drdt = (
        0.25
        * width
        * 0.45
        * (
            np.pi * np.cos(np.pi * t) * (1.0 - 0.35 * np.cos(3.0 * np.pi * t))
            + 1.05 * np.pi * np.sin(np.pi * t) * np.sin(3.0 * np.pi * t)
        )
    )
    return drdt / (0.7 * height)


def _vase(width, height):
    uu, vv = _coord_grids(width, height)
    r = vase_radius(vv, width, height)
    rp = _vase_radius_slope(vv, width, height)
    d = uu - width / 2.0
    with np.errstate(invalid="ignore"):
        on_vase = np.isfinite(r) & (np.abs(d) <= r)
        sq = r**2 - d**2
    z = np.zeros((height, width))
    p = np.zeros((height, width))
    q = np.zeros((height, width))
    body = on_vase & (sq > 0.0)
    z[body] = np.sqrt(sq[body])
    # slope is unbounded where the body meets the ground (sq == 0); those
    # measure-zero pixels keep gradient 0
    p[body] = -d[body] / z[body]
    q[body] = r[body] * rp[body] / z[body]
    return z, p, q, on_vase


_KINDS = {
    "plane": _plane,
    "sine_product": _sine_product,
    "peaks_smooth": _peaks,
    "vase": _vase,
}


def make_surface(kind: str, width: int, height: int, **params) -> SyntheticSurface:
    """Analytic surface, its exact gradient, and a reconstruction mask.

    kind: 'plane' (a, b), 'sine_product' (kx, ky), 'peaks_smooth'
    (amplitude) or 'vase'.  The gradient field always covers the whole
    grid; for the vase the returned mask is the object silhouette, which
    the caller may use to exclude the discontinuities along the caps.
    """
    if width < 16 or height < 16:
        raise ValueError(f"surfaces need at least 16x16 pixels, got {width}x{height}")
    try:
        build = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown surface kind {kind!r}; choose from {sorted(_KINDS)}") from None
    z, p, q, silhouette = build(width, height, **params)
    full = DomainMask.full(width, height)
    gradient = GradientField(ScalarGrid(p), ScalarGrid(q), full)
    mask = DomainMask(silhouette) if silhouette is not None else full
    return SyntheticSurface(ScalarGrid(z), gradient, mask)


def make_harmonic(family: str, omega: float, width: int, height: int) -> ScalarGrid:
    """Sampled harmonic surface cos(omega u) e^(omega v) or sin(.) e^(.).

    The continuous Laplacian of either family is identically zero; the
    five-point stencil applied to the samples leaves a residual that decays
    like omega^4.
    """
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if omega * height > 700.0:
        raise ValueError(f"omega * height = {omega * height:g} would overflow exp")
    uu, vv = _coord_grids(width, height)
    if family == "cos_exp":
        base = np.cos(omega * uu)
    elif family == "sin_exp":
        base = np.sin(omega * uu)
    else:
        raise ValueError(f"unknown harmonic family {family!r}")
    return ScalarGrid(base * np.exp(omega * vv))


def add_noise(field, model: str, sigma: float, seed: int = 0):
    """Noise surrogate applied to the measurement, not to camera images.

    'gradient_gaussian' adds i.i.d. zero-mean Gaussian noise to p and q of
    a GradientField; 'normal_angle_gaussian' tilts each normal of a
    NormalField by a Gaussian angle (radians) about a random axis.  Both
    are deterministic per seed.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    rng = np.random.default_rng(seed)
    if model == GRADIENT_NOISE:
        if not isinstance(field, GradientField):
            raise TypeError("gradient_gaussian noise applies to a GradientField")
        ins = field.mask.inside
        p = field.p.values.copy()
        q = field.q.values.copy()
        noise_p = rng.normal(0.0, 1.0, size=p.shape)
        noise_q = rng.normal(0.0, 1.0, size=q.shape)
        sel_p = ins & np.isfinite(p)
        sel_q = ins & np.isfinite(q)
        p[sel_p] += sigma * noise_p[sel_p]
        q[sel_q] += sigma * noise_q[sel_q]
        return GradientField(ScalarGrid(p), ScalarGrid(q), field.mask)
    if model == NORMAL_NOISE:
        if not isinstance(field, NormalField):
            raise TypeError("normal_angle_gaussian noise applies to a NormalField")
        n = np.stack([field.n1.values, field.n2.values, field.n3.values])
        axis = rng.normal(0.0, 1.0, size=n.shape)
        theta = rng.normal(0.0, sigma, size=n.shape[1:])
        valid = field.valid
        # tangential unit direction: remove the component along n
        dot = np.sum(axis * n, axis=0)
        tang = axis - dot * n
        norm = np.sqrt(np.sum(tang**2, axis=0))
        degenerate = valid & (norm < 1e-12)
        if degenerate.any():
            # fall back to a fixed axis; n cannot be parallel to both e1, e2
            for basis in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
                alt = basis[:, None, None] - np.sum(basis[:, None, None] * n, axis=0) * n
                alt_norm = np.sqrt(np.sum(alt**2, axis=0))
                use = degenerate & (alt_norm >= 1e-12)
                tang[:, use] = alt[:, use]
                norm[use] = alt_norm[use]
                degenerate &= ~use
        with np.errstate(invalid="ignore", divide="ignore"):
            tang = tang / norm
        rotated = np.cos(theta) * n + np.sin(theta) * tang
        rotated /= np.sqrt(np.sum(rotated**2, axis=0))
        out = np.where(valid, rotated, n)
        return NormalField(
            ScalarGrid(out[0]), ScalarGrid(out[1]), ScalarGrid(out[2]), valid
        )
    raise ValueError(f"unknown noise model {model!r}")
