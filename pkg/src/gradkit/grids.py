"""Masked raster grids and the discrete differential operators shared by all solvers.

Conventions used throughout the toolkit:

* Arrays have shape ``(height, width)`` and are indexed ``a[v, u]``: u runs
  along a row (axis 1), v down the columns (axis 0).
* Grid spacing is fixed to 1; physical scaling is the caller's concern.
* ``NaN`` is the not-a-value marker for pixels outside the domain (or for
  samples a discrete operator cannot form).  Reductions over a domain always
  select pixels by mask, never by sniffing values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage

NOT_A_VALUE = np.nan

# 4-connectivity structure for component labelling.
_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def shifted(a: np.ndarray, du: int, dv: int, fill) -> np.ndarray:
    """Return the array whose (u, v) entry is ``a`` at (u+du, v+dv).

    Entries whose source falls off the grid are set to ``fill``.
    """
    h, w = a.shape
    out = np.full(a.shape, fill, dtype=a.dtype)
    src_u = slice(max(du, 0), w + min(du, 0))
    dst_u = slice(max(-du, 0), w + min(-du, 0))
    src_v = slice(max(dv, 0), h + min(dv, 0))
    dst_v = slice(max(-dv, 0), h + min(-dv, 0))
    out[dst_v, dst_u] = a[src_v, src_u]
    return out


def _frozen_float_grid(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a 2D grid of at least 1x1, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScalarGrid:
    """Immutable 2D raster of float64 values; NaN marks not-a-value pixels."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_float_grid(self.values))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def at(self, u: int, v: int) -> float:
        if not (0 <= u < self.width and 0 <= v < self.height):
            raise IndexError(f"pixel ({u}, {v}) outside {self.width}x{self.height} grid")
        return float(self.values[v, u])

    @classmethod
    def zeros(cls, width: int, height: int) -> "ScalarGrid":
        return cls(np.zeros((height, width)))

    @classmethod
    def full_of(cls, width: int, height: int, value: float) -> "ScalarGrid":
        return cls(np.full((height, width), float(value)))


@dataclass(frozen=True)
class DomainMask:
    """Per-pixel inside/outside flags defining the reconstruction domain.

    A pixel is *interior* iff it and its four axis neighbors are inside;
    an inside pixel that is not interior is *boundary*.
    """

    inside: np.ndarray

    def __post_init__(self):
        arr = np.array(self.inside, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a 2D mask, got shape {arr.shape}")
        if not arr.any():
            raise ValueError("mask must contain at least one inside pixel")
        arr.setflags(write=False)
        object.__setattr__(self, "inside", arr)

    @property
    def width(self) -> int:
        return self.inside.shape[1]

    @property
    def height(self) -> int:
        return self.inside.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.inside.shape

    @cached_property
    def interior(self) -> np.ndarray:
        ins = self.inside
        out = ins.copy()
        for du, dv in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            out &= shifted(ins, du, dv, False)
        out.setflags(write=False)
        return out

    @cached_property
    def boundary(self) -> np.ndarray:
        out = self.inside & ~self.interior
        out.setflags(write=False)
        return out

    @cached_property
    def component_labels(self) -> np.ndarray:
        """Integer labels of 4-connected components (0 = outside)."""
        labels, _ = ndimage.label(self.inside, structure=_CROSS)
        labels.setflags(write=False)
        return labels

    def is_full(self) -> bool:
        return bool(self.inside.all())

    @classmethod
    def full(cls, width: int, height: int) -> "DomainMask":
        return cls(np.ones((height, width), dtype=bool))


@dataclass(frozen=True)
class GradientField:
    """A gradient datum (p, q) = (du z, dv z) with its domain mask.

    p and q may hold NaN at inside pixels where a forward difference could
    not be formed (see :func:`fd_gradient`); analytic fields are finite on
    every inside pixel.
    """

    p: ScalarGrid
    q: ScalarGrid
    mask: DomainMask

    def __post_init__(self):
        if not (self.p.shape == self.q.shape == self.mask.shape):
            raise ValueError(
                f"p {self.p.shape}, q {self.q.shape} and mask {self.mask.shape} "
                "must share dimensions"
            )

    @property
    def width(self) -> int:
        return self.mask.width

    @property
    def height(self) -> int:
        return self.mask.height


class PixelClass(enum.Enum):
    OUTSIDE = "outside"
    INTERIOR = "interior"
    BOUNDARY = "boundary"


def classify_pixel(mask: DomainMask, u: int, v: int):
    """Classify pixel (u, v) and list its inside axis neighbors.

    Returns
    -------
    (PixelClass, list of (u, v) tuples)
        Neighbors are reported in the fixed order (+u, -u, +v, -v),
        omitting those outside the grid or outside the mask.
    """
    if not (0 <= u < mask.width and 0 <= v < mask.height):
        raise IndexError(f"pixel ({u}, {v}) outside {mask.width}x{mask.height} grid")
    ins = mask.inside
    neighbors = []
    for du, dv in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        uu, vv = u + du, v + dv
        if 0 <= uu < mask.width and 0 <= vv < mask.height and ins[vv, uu]:
            neighbors.append((uu, vv))
    if not ins[v, u]:
        return PixelClass.OUTSIDE, neighbors
    if len(neighbors) == 4:
        return PixelClass.INTERIOR, neighbors
    return PixelClass.BOUNDARY, neighbors


def fd_gradient(z: ScalarGrid, mask: DomainMask) -> GradientField:
    """Forward-difference gradient of a depth grid.

    p[u, v] = z[u+1, v] - z[u, v] where both pixels are inside, NaN
    otherwise; q analogously along v.  Note that a field built this way is
    discretely integrable by construction, whatever z looks like, so it is
    unsuitable for benchmarking discontinuity handling.
    """
    if z.shape != mask.shape:
        raise ValueError(f"grid {z.shape} and mask {mask.shape} must share dimensions")
    ins = mask.inside
    zv = z.values
    p = np.full(z.shape, NOT_A_VALUE)
    q = np.full(z.shape, NOT_A_VALUE)
    has_pu = ins & shifted(ins, 1, 0, False)
    has_pv = ins & shifted(ins, 0, 1, False)
    p[has_pu] = (shifted(zv, 1, 0, NOT_A_VALUE) - zv)[has_pu]
    q[has_pv] = (shifted(zv, 0, 1, NOT_A_VALUE) - zv)[has_pv]
    return GradientField(ScalarGrid(p), ScalarGrid(q), mask)


def central_divergence(g: GradientField) -> ScalarGrid:
    """Second-order divergence (p[u+1]-p[u-1])/2 + (q[v+1]-q[v-1])/2.

    Defined on interior pixels only; NaN elsewhere.  Boundary right-hand
    sides are assembled by the solver modules, not here.
    """
    pv, qv = g.p.values, g.q.values
    div = (shifted(pv, 1, 0, NOT_A_VALUE) - shifted(pv, -1, 0, NOT_A_VALUE)) / 2.0
    div += (shifted(qv, 0, 1, NOT_A_VALUE) - shifted(qv, 0, -1, NOT_A_VALUE)) / 2.0
    out = np.full(div.shape, NOT_A_VALUE)
    interior = g.mask.interior
    out[interior] = div[interior]
    return ScalarGrid(out)


def discrete_laplacian(z: ScalarGrid, mask: DomainMask) -> ScalarGrid:
    """Five-point Laplacian z[u+1]+z[u-1]+z[v+1]+z[v-1]-4z on interior pixels."""
    if z.shape != mask.shape:
        raise ValueError(f"grid {z.shape} and mask {mask.shape} must share dimensions")
    zv = z.values
    lap = (
        shifted(zv, 1, 0, NOT_A_VALUE)
        + shifted(zv, -1, 0, NOT_A_VALUE)
        + shifted(zv, 0, 1, NOT_A_VALUE)
        + shifted(zv, 0, -1, NOT_A_VALUE)
        - 4.0 * zv
    )
    out = np.full(zv.shape, NOT_A_VALUE)
    interior = mask.interior
    out[interior] = lap[interior]
    return ScalarGrid(out)
