"""Camera-model conversions between normal fields, gradient fields and depth.

Normals are unit 3-vectors in the camera frame, pointing toward the camera
(n3 < 0 for a fronto-parallel patch under orthographic projection).  Under
perspective projection the conversion produces the gradient of log-depth,
so depth is recovered up to a positive multiplicative constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError
from .grids import DomainMask, GradientField, NOT_A_VALUE, ScalarGrid

ORTHOGRAPHIC = "orthographic"
WEAK_PERSPECTIVE = "weak_perspective"
PERSPECTIVE = "perspective"

UNIT_NORM_TOL = 1e-6


@dataclass(frozen=True)
class CameraModel:
    """Projection model: kind plus the parameters that kind requires.

    focal           focal length in pixels (perspective)
    magnification   dimensionless image magnification (weak perspective)
    principal_point (u0, v0) in pixels (perspective)
    """

    kind: str
    focal: float | None = None
    magnification: float | None = None
    principal_point: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in (ORTHOGRAPHIC, WEAK_PERSPECTIVE, PERSPECTIVE):
            raise ConfigurationError(f"unknown camera kind {self.kind!r}")
        if self.kind == WEAK_PERSPECTIVE:
            if self.magnification is None or self.magnification <= 0:
                raise ConfigurationError("weak-perspective camera needs magnification > 0")
        if self.kind == PERSPECTIVE:
            if self.focal is None or self.focal <= 0:
                raise ConfigurationError("perspective camera needs focal length > 0")
            if self.principal_point is None:
                raise ConfigurationError("perspective camera needs a principal point")

    @classmethod
    def orthographic(cls) -> "CameraModel":
        return cls(ORTHOGRAPHIC)

    @classmethod
    def weak_perspective(cls, magnification: float) -> "CameraModel":
        return cls(WEAK_PERSPECTIVE, magnification=magnification)

    @classmethod
    def perspective(cls, focal: float, principal_point: tuple[float, float]) -> "CameraModel":
        u0, v0 = principal_point
        return cls(PERSPECTIVE, focal=focal, principal_point=(float(u0), float(v0)))


@dataclass(frozen=True)
class NormalField:
    """Per-pixel unit normals (n1, n2, n3) with a validity flag per pixel."""

    n1: ScalarGrid
    n2: ScalarGrid
    n3: ScalarGrid
    valid: np.ndarray

    def __post_init__(self):
        valid = np.array(self.valid, dtype=bool)
        if not (self.n1.shape == self.n2.shape == self.n3.shape == valid.shape):
            raise ValueError("normal components and validity mask must share dimensions")
        valid.setflags(write=False)
        object.__setattr__(self, "valid", valid)
        norms = np.sqrt(
            self.n1.values**2 + self.n2.values**2 + self.n3.values**2
        )
        err = np.abs(norms[valid] - 1.0)
        if err.size and err.max() > UNIT_NORM_TOL:
            raise DataError(
                f"normals deviate from unit length by up to {err.max():.3e} "
                f"(tolerance {UNIT_NORM_TOL:g})"
            )

    @property
    def width(self) -> int:
        return self.n1.width

    @property
    def height(self) -> int:
        return self.n1.height

    @property
    def shape(self) -> tuple[int, int]:
        return self.n1.shape

    @classmethod
    def from_array(cls, normals: np.ndarray, valid: np.ndarray | None = None) -> "NormalField":
        """Build from an (h, w, 3) array; invalid pixels may hold NaN."""
        normals = np.asarray(normals, dtype=np.float64)
        if normals.ndim != 3 or normals.shape[2] != 3:
            raise ValueError(f"expected an (h, w, 3) array, got {normals.shape}")
        if valid is None:
            valid = np.isfinite(normals).all(axis=2)
        return cls(
            ScalarGrid(normals[:, :, 0]),
            ScalarGrid(normals[:, :, 1]),
            ScalarGrid(normals[:, :, 2]),
            valid,
        )

    def as_array(self) -> np.ndarray:
        return np.stack([self.n1.values, self.n2.values, self.n3.values], axis=2)


def normals_to_gradient(
    nf: NormalField, cam: CameraModel, eps: float = 1e-6
) -> tuple[GradientField, np.ndarray]:
    """Convert a normal field to the gradient field the camera model induces.

    Orthographic: (p, q) = (-n1/n3, -n2/n3).  Weak perspective: the same
    divided by the magnification.  Perspective: the log-depth gradient
    (-n1/D, -n2/D) with D = (u-u0) n1 + (v-v0) n2 + f n3.

    Pixels where the conversion is singular (|n3| <= eps, or |D| <= eps*f
    under perspective) lie on the occluding contour: depth is not
    recoverable there, so they are flagged and removed from the mask.

    Returns
    -------
    (GradientField, ndarray of bool)
        The gradient field, and the occluding-contour flag grid.
    """
    n1, n2, n3 = nf.n1.values, nf.n2.values, nf.n3.values
    valid = nf.valid
    if cam.kind == PERSPECTIVE:
        h, w = nf.shape
        u0, v0 = cam.principal_point
        uu, vv = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
        with np.errstate(invalid="ignore"):
            denom = (uu - u0) * n1 + (vv - v0) * n2 + cam.focal * n3
        occluding = valid & ~(np.abs(denom) > eps * cam.focal)
    else:
        occluding = valid & ~(np.abs(n3) > eps)
        denom = n3
        facing_away = valid & ~occluding & (n3 > 0)
        if facing_away.any():
            vs, us = np.nonzero(facing_away)
            raise DataError(
                f"{facing_away.sum()} valid pixels have n3 > 0 (first at "
                f"({us[0]}, {vs[0]})); normals must point toward the camera"
            )

    keep = valid & ~occluding
    if not keep.any():
        raise DataError("no pixel survives occluding-contour removal")

    p = np.full(nf.shape, NOT_A_VALUE)
    q = np.full(nf.shape, NOT_A_VALUE)
    with np.errstate(invalid="ignore", divide="ignore"):
        p[keep] = -n1[keep] / denom[keep]
        q[keep] = -n2[keep] / denom[keep]
    if cam.kind == WEAK_PERSPECTIVE:
        p[keep] /= cam.magnification
        q[keep] /= cam.magnification
    field = GradientField(ScalarGrid(p), ScalarGrid(q), DomainMask(keep))
    return field, occluding


def log_depth_to_depth(
    zt: ScalarGrid, anchor_value: float, anchor_pixel: tuple[int, int]
) -> ScalarGrid:
    """Exponentiate a log-depth grid, anchoring the free multiplicative constant.

    z = exp(zt - zt[anchor]) * anchor_value, so z is positive everywhere and
    equals anchor_value at the anchor pixel.
    """
    if anchor_value <= 0:
        raise ValueError(f"anchor_value must be positive, got {anchor_value}")
    u, v = anchor_pixel
    anchor = zt.at(u, v)
    if not np.isfinite(anchor):
        raise ValueError(f"anchor pixel ({u}, {v}) is outside the grid's domain")
    return ScalarGrid(np.exp(zt.values - anchor) * anchor_value)


def depth_to_points(
    z: ScalarGrid, cam: CameraModel, mask: DomainMask | None = None
) -> np.ndarray:
    """Back-project a depth grid to 3D points, one per inside pixel.

    Returns an (n_inside, 3) array in row-major pixel order.  Under
    perspective projection pixel coordinates are taken relative to the
    principal point and depth must be positive.
    """
    inside = mask.inside if mask is not None else np.isfinite(z.values)
    if mask is not None and mask.shape != z.shape:
        raise ValueError(f"grid {z.shape} and mask {mask.shape} must share dimensions")
    vs, us = np.nonzero(inside)
    depths = z.values[vs, us]
    if not np.isfinite(depths).all():
        bad = np.flatnonzero(~np.isfinite(depths))[0]
        raise DataError(f"depth is undefined at inside pixel ({us[bad]}, {vs[bad]})")
    u = us.astype(float)
    v = vs.astype(float)
    if cam.kind == ORTHOGRAPHIC:
        x, y = u, v
    elif cam.kind == WEAK_PERSPECTIVE:
        x = u / cam.magnification
        y = v / cam.magnification
    else:
        if (depths <= 0).any():
            bad = np.flatnonzero(depths <= 0)[0]
            raise DataError(
                f"perspective back-projection needs z > 0, got {depths[bad]:g} "
                f"at pixel ({us[bad]}, {vs[bad]})"
            )
        u0, v0 = cam.principal_point
        x = depths * (u - u0) / cam.focal
        y = depths * (v - v0) / cam.focal
    return np.column_stack([x, y, depths])
