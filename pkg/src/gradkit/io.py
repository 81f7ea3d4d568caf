"""Bit-exact raster file formats: PFM rasters, PGM masks, PNG previews.

PFM layout: header ``Pf\\n<width> <height>\\n<scale>\\n`` followed by
width x height 32-bit floats, rows stored bottom-to-top.  A negative scale
marks little-endian payloads (always written here); a positive scale marks
big-endian.  The color variant ``PF`` stores three floats per pixel and
carries normal fields.  Not-a-value pixels are written as quiet NaN.

Gradient fields ship as two scalar PFM files with suffixes ``.p.pfm`` and
``.q.pfm``.  PGM masks are binary P5, maxval 255, nonzero = inside.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .camera import NormalField
from .errors import DataError, FileFormatError
from .grids import DomainMask, GradientField, NOT_A_VALUE, ScalarGrid


def _read_token(data: bytes, offset: int, path: str) -> tuple[bytes, int]:
    """Next whitespace-delimited token, skipping '#' comment lines."""
    n = len(data)
    while offset < n:
        c = data[offset : offset + 1]
        if c == b"#":
            while offset < n and data[offset : offset + 1] != b"\n":
                offset += 1
        elif c.isspace():
            offset += 1
        else:
            break
    if offset >= n:
        raise FileFormatError(f"{path}: unexpected end of header at byte {offset}")
    start = offset
    while offset < n and not data[offset : offset + 1].isspace():
        offset += 1
    return data[start:offset], offset


def _parse_pfm(path: str) -> tuple[np.ndarray, int]:
    with open(path, "rb") as fh:
        data = fh.read()
    magic, offset = _read_token(data, 0, path)
    if magic == b"Pf":
        channels = 1
    elif magic == b"PF":
        channels = 3
    else:
        raise FileFormatError(f"{path}: bad magic {magic!r} at byte 0 (expected Pf or PF)")
    token, offset = _read_token(data, offset, path)
    try:
        width = int(token)
    except ValueError:
        raise FileFormatError(f"{path}: bad width {token!r} at byte {offset - len(token)}") from None
    token, offset = _read_token(data, offset, path)
    try:
        height = int(token)
    except ValueError:
        raise FileFormatError(f"{path}: bad height {token!r} at byte {offset - len(token)}") from None
    if width < 1 or height < 1:
        raise FileFormatError(f"{path}: non-positive dimensions {width}x{height}")
    token, offset = _read_token(data, offset, path)
    try:
        scale = float(token)
    except ValueError:
        raise FileFormatError(f"{path}: bad scale {token!r} at byte {offset - len(token)}") from None
    if scale == 0.0:
        raise FileFormatError(f"{path}: scale must be nonzero")
    # exactly one whitespace byte terminates the header
    offset += 1
    expected = width * height * channels * 4
    payload = data[offset : offset + expected]
    if len(payload) != expected:
        raise FileFormatError(
            f"{path}: truncated payload at byte {offset + len(payload)} "
            f"(expected {expected} bytes, got {len(payload)})"
        )
    dtype = "<f4" if scale < 0 else ">f4"
    flat = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    if channels == 1:
        arr = flat.reshape(height, width)
    else:
        arr = flat.reshape(height, width, 3)
    return np.flipud(arr).copy(), channels


def read_pfm(path: str) -> np.ndarray:
    """Read a scalar PFM raster as a float64 (height, width) array."""
    arr, channels = _parse_pfm(path)
    if channels != 1:
        raise FileFormatError(f"{path}: expected a grayscale Pf raster, found color PF")
    return arr


def write_pfm(path: str, values: np.ndarray):
    """Write a scalar raster as little-endian PFM (scale -1.0)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2D array, got shape {arr.shape}")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        fh.write(np.flipud(arr).astype("<f4").tobytes())


def read_normals_pfm(path: str) -> NormalField:
    """Read a color PF raster as a normal field (NaN triples are invalid)."""
    arr, channels = _parse_pfm(path)
    if channels != 3:
        raise FileFormatError(f"{path}: expected a color PF raster, found grayscale Pf")
    return NormalField.from_array(arr)


def write_normals_pfm(path: str, nf: NormalField):
    arr = nf.as_array().copy()
    arr[~nf.valid] = NOT_A_VALUE
    h, w = nf.shape
    with open(path, "wb") as fh:
        fh.write(f"PF\n{w} {h}\n-1.0\n".encode("ascii"))
        fh.write(np.flipud(arr).astype("<f4").tobytes())


def gradient_paths(prefix: str) -> tuple[str, str]:
    return f"{prefix}.p.pfm", f"{prefix}.q.pfm"


def read_gradient(prefix: str, mask: DomainMask | None = None) -> GradientField:
    """Read a gradient field from ``<prefix>.p.pfm`` / ``<prefix>.q.pfm``.

    Without an explicit mask, inside pixels are those where either
    component is finite.
    """
    p_path, q_path = gradient_paths(prefix)
    p = read_pfm(p_path)
    q = read_pfm(q_path)
    if p.shape != q.shape:
        raise FileFormatError(
            f"{p_path} and {q_path} disagree on dimensions: {p.shape} vs {q.shape}"
        )
    if mask is None:
        inside = np.isfinite(p) | np.isfinite(q)
        if not inside.any():
            raise DataError(f"{prefix}: gradient field has no finite pixels")
        mask = DomainMask(inside)
    elif mask.shape != p.shape:
        raise FileFormatError(f"mask {mask.shape} does not match gradient {p.shape}")
    return GradientField(ScalarGrid(p), ScalarGrid(q), mask)


def write_gradient(prefix: str, g: GradientField):
    p_path, q_path = gradient_paths(prefix)
    p = g.p.values.copy()
    q = g.q.values.copy()
    p[~g.mask.inside] = NOT_A_VALUE
    q[~g.mask.inside] = NOT_A_VALUE
    write_pfm(p_path, p)
    write_pfm(q_path, q)


def read_pgm_mask(path: str) -> DomainMask:
    """Read a binary P5 PGM; nonzero pixels are inside."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, offset = _read_token(data, 0, path)
    if magic != b"P5":
        raise FileFormatError(f"{path}: bad magic {magic!r} at byte 0 (expected P5)")
    dims = []
    for name in ("width", "height", "maxval"):
        token, offset = _read_token(data, offset, path)
        try:
            dims.append(int(token))
        except ValueError:
            raise FileFormatError(
                f"{path}: bad {name} {token!r} at byte {offset - len(token)}"
            ) from None
    width, height, maxval = dims
    if width < 1 or height < 1:
        raise FileFormatError(f"{path}: non-positive dimensions {width}x{height}")
    if not 0 < maxval < 256:
        raise FileFormatError(f"{path}: unsupported maxval {maxval} (need 1..255)")
    offset += 1
    expected = width * height
    payload = data[offset : offset + expected]
    if len(payload) != expected:
        raise FileFormatError(
            f"{path}: truncated payload at byte {offset + len(payload)} "
            f"(expected {expected} bytes, got {len(payload)})"
        )
    inside = np.frombuffer(payload, dtype=np.uint8).reshape(height, width) > 0
    if not inside.any():
        raise DataError(f"{path}: mask must contain at least one inside pixel")
    return DomainMask(inside)


def write_pgm_mask(path: str, mask: DomainMask):
    with open(path, "wb") as fh:
        fh.write(f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii"))
        fh.write(np.where(mask.inside, 255, 0).astype(np.uint8).tobytes())


def write_png_preview(path: str, values: np.ndarray, mask: np.ndarray | None = None):
    """Grayscale preview normalized to [0, 255]; returns (vmin, vmax).

    Previews are for humans: outside / undefined pixels render black, and
    the normalization range should be quoted alongside.  PFM is the data
    of record.
    """
    arr = np.asarray(values, dtype=np.float64)
    sel = np.isfinite(arr)
    if mask is not None:
        sel &= np.asarray(mask, dtype=bool)
    img = np.zeros(arr.shape, dtype=np.uint8)
    if sel.any():
        vmin = float(arr[sel].min())
        vmax = float(arr[sel].max())
        span = vmax - vmin
        if span > 0:
            img[sel] = np.clip((arr[sel] - vmin) / span * 255.0, 0, 255).astype(np.uint8)
        else:
            img[sel] = 128
    else:
        vmin = vmax = float("nan")
    Image.fromarray(img, mode="L").save(path)
    return vmin, vmax
