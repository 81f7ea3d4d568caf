"""Non-iterative Poisson solvers on rectangular domains.

Four solvers are provided:

* :func:`solve_fc` -- project the gradient field onto integrable fields in
  the continuous Fourier basis.  Fast, but the solution is implicitly
  periodic, which biases non-periodic surfaces.
* :func:`solve_scs_periodic` -- diagonalize the wrapped five-point Poisson
  system with the discrete Fourier transform.
* :func:`solve_scs_dirichlet` -- sine-transform solve with prescribed depth
  on the boundary ring of the lattice.
* :func:`solve_scs_neumann` -- cosine-transform solve with a prescribed (or
  natural) normal-derivative condition; this realizes the free-boundary
  least-squares solution on rectangular grids.

All of them require a full rectangular mask; none can handle holes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, UnsupportedDomainError
from .grids import GradientField, ScalarGrid, shifted
from .transforms import cosine2, dft2, icosine2, idft2, isine2, sine2

PERIODIC = "periodic"
DIRICHLET = "dirichlet"
NEUMANN = "neumann"

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary condition: kind plus per-boundary-pixel data where required.

    data is a full-size (height, width) array of which only the outermost
    ring is read: prescribed depth values for ``dirichlet``, prescribed
    outward normal derivatives for ``neumann``.  ``neumann`` with
    ``data=None`` is the natural condition: the normal derivative is taken
    from the gradient datum itself.
    """

    kind: str
    data: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (PERIODIC, DIRICHLET, NEUMANN):
            raise ConfigurationError(f"unknown boundary kind {self.kind!r}")
        if self.kind == PERIODIC and self.data is not None:
            raise ConfigurationError("periodic boundaries carry no data")
        if self.kind == DIRICHLET and self.data is None:
            raise ConfigurationError("dirichlet boundaries need prescribed values")
        if self.data is not None:
            arr = np.array(self.data, dtype=np.float64)
            if arr.ndim != 2:
                raise ConfigurationError("boundary data must be a 2D grid")
            arr.setflags(write=False)
            object.__setattr__(self, "data", arr)

    @classmethod
    def periodic(cls) -> "BoundarySpec":
        return cls(PERIODIC)

    @classmethod
    def dirichlet(cls, values: np.ndarray) -> "BoundarySpec":
        return cls(DIRICHLET, values)

    @classmethod
    def neumann(cls, values: np.ndarray) -> "BoundarySpec":
        return cls(NEUMANN, values)

    @classmethod
    def natural(cls) -> "BoundarySpec":
        return cls(NEUMANN, None)


@dataclass(frozen=True)
class SpectrumGrid:
    """Solved coefficient grid, tagged with the transform that produced it.

    For the Fourier and cosine spectra the (0, 0) coefficient is
    indeterminate (the additive constant of the solution); it is stored as
    zero and flagged.
    """

    kind: str
    coefficients: np.ndarray
    dc_indeterminate: bool


def _require_full_rect(g: GradientField, what: str):
    if not g.mask.is_full():
        raise UnsupportedDomainError(
            f"{what} requires a full rectangular domain; the mask has holes"
        )


def _signed_index(count: int) -> np.ndarray:
    """Map DFT index k to the signed frequency index k or k - count.

    Indices up to count/2 keep their sign; the rest alias to negative
    frequencies.  Getting this wrong flips the sign of the high-frequency
    numerators and shows up as grid-frequency oscillations.
    """
    idx = np.arange(count, dtype=np.float64)
    return np.where(2 * idx <= count, idx, idx - count)


def solve_fc(g: GradientField, convention: str = "pulsation") -> ScalarGrid:
    """Integrate by zeroing the non-integrable part in the Fourier basis.

    convention selects between equivalent spectral formulas written with
    pulsations (radians per sample) or with frequencies (cycles per
    sample); they agree to rounding.  A published implementation of the
    frequency form is missing its 2 pi factor, which silently scales the
    surface -- worth keeping both forms around as a cross-check.

    The mean of the surface is not recoverable; the output is zero-mean.
    """
    _require_full_rect(g, "the Fourier-projection solver")
    if convention not in ("pulsation", "frequency"):
        raise ConfigurationError(f"unknown convention {convention!r}")
    h, w = g.mask.shape
    p_hat = dft2(g.p.values)
    q_hat = dft2(g.q.values)
    ku = _signed_index(w)[None, :]
    lv = _signed_index(h)[:, None]
    if convention == "pulsation":
        wu = 2.0 * np.pi * ku / w
        wv = 2.0 * np.pi * lv / h
        denom = 1j * (wu**2 + wv**2)
    else:
        wu = ku / w
        wv = lv / h
        denom = 2.0 * np.pi * 1j * (wu**2 + wv**2)
    denom[0, 0] = 1.0  # placeholder; the coefficient is zeroed below
    z_hat = (wu * p_hat + wv * q_hat) / denom
    z_hat[0, 0] = 0.0
    z = np.real(idft2(z_hat))
    return ScalarGrid(z - z.mean())


def _periodic_spectrum(g: GradientField) -> SpectrumGrid:
    h, w = g.mask.shape
    p_hat = dft2(g.p.values)
    q_hat = dft2(g.q.values)
    ku = np.arange(w)[None, :]
    lv = np.arange(h)[:, None]
    num = np.sin(2.0 * np.pi * ku / w) * p_hat + np.sin(2.0 * np.pi * lv / h) * q_hat
    denom = 4.0 * (np.sin(np.pi * ku / w) ** 2 + np.sin(np.pi * lv / h) ** 2)
    denom[0, 0] = 1.0
    coeffs = num / (1j * denom)
    coeffs[0, 0] = 0.0
    return SpectrumGrid(PERIODIC, coeffs, dc_indeterminate=True)


def solve_scs_periodic(g: GradientField) -> ScalarGrid:
    """Solve the wrapped five-point Poisson system by DFT diagonalization.

    The output satisfies the discrete system exactly (with wraparound
    neighbor indexing) and is therefore periodic in the stencil sense;
    like :func:`solve_fc` it is only appropriate for periodic surfaces.
    """
    _require_full_rect(g, "the periodic transform solver")
    spectrum = _periodic_spectrum(g)
    z = np.real(idft2(spectrum.coefficients))
    return ScalarGrid(z - z.mean())


def _dirichlet_rhs(g: GradientField, b: np.ndarray) -> np.ndarray:
    """Divergence right-hand side on the interior, boundary ring folded in."""
    h, w = g.mask.shape
    pv, qv = g.p.values, g.q.values
    div = (shifted(pv, 1, 0, np.nan) - shifted(pv, -1, 0, np.nan)) / 2.0
    div += (shifted(qv, 0, 1, np.nan) - shifted(qv, 0, -1, np.nan)) / 2.0
    rhs = div[1 : h - 1, 1 : w - 1].copy()
    # each unknown adjacent to the ring sees the prescribed value moved
    # to the right-hand side (corners touch two ring pixels)
    rhs[:, 0] -= b[1 : h - 1, 0]
    rhs[:, -1] -= b[1 : h - 1, w - 1]
    rhs[0, :] -= b[0, 1 : w - 1]
    rhs[-1, :] -= b[h - 1, 1 : w - 1]
    return rhs


def _sine_eigenvalues(h_int: int, w_int: int) -> np.ndarray:
    m = w_int + 1
    n = h_int + 1
    k = np.arange(1, w_int + 1)[None, :]
    l = np.arange(1, h_int + 1)[:, None]
    return 4.0 * (np.sin(np.pi * k / (2.0 * m)) ** 2 + np.sin(np.pi * l / (2.0 * n)) ** 2)


def solve_scs_dirichlet(g: GradientField, bc: BoundarySpec) -> ScalarGrid:
    """Sine-transform Poisson solve with prescribed boundary depth.

    The unknowns are the (width-2) x (height-2) interior lattice points;
    the outermost ring is fixed to the prescribed values and re-attached to
    the output.  The discrete system is diagonalized exactly, so the output
    satisfies the five-point equation on every interior pixel.
    """
    _require_full_rect(g, "the sine transform solver")
    if bc.kind != DIRICHLET or bc.data is None:
        raise ConfigurationError("solve_scs_dirichlet needs a dirichlet BoundarySpec with values")
    h, w = g.mask.shape
    if h < 3 or w < 3:
        raise UnsupportedDomainError("the sine transform solver needs at least a 3x3 lattice")
    if bc.data.shape != (h, w):
        raise ConfigurationError(
            f"boundary data shape {bc.data.shape} does not match grid {(h, w)}"
        )
    b = bc.data
    rhs = _dirichlet_rhs(g, b)
    coeffs = -sine2(rhs) / _sine_eigenvalues(h - 2, w - 2)
    z = np.empty((h, w))
    z[1 : h - 1, 1 : w - 1] = isine2(coeffs)
    z[0, :] = b[0, :]
    z[-1, :] = b[-1, :]
    z[:, 0] = b[:, 0]
    z[:, -1] = b[:, -1]
    return ScalarGrid(z)


def natural_neumann_values(g: GradientField) -> np.ndarray:
    """Boundary data realizing the natural (free-boundary) condition.

    The normal derivative of z on the boundary is set to the normal
    component of the gradient datum itself, with the diagonal outward
    normal at the four corners.
    """
    h, w = g.mask.shape
    pv, qv = g.p.values, g.q.values
    b = np.zeros((h, w))
    b[:, 0] = -pv[:, 0]
    b[:, -1] = pv[:, -1]
    b[0, :] = -qv[0, :]
    b[-1, :] = qv[-1, :]
    b[0, 0] = -(pv[0, 0] + qv[0, 0]) / SQRT2
    b[0, -1] = (pv[0, -1] - qv[0, -1]) / SQRT2
    b[-1, 0] = (-pv[-1, 0] + qv[-1, 0]) / SQRT2
    b[-1, -1] = (pv[-1, -1] + qv[-1, -1]) / SQRT2
    return b


def neumann_rhs(g: GradientField, b: np.ndarray) -> np.ndarray:
    """Divergence right-hand side with one-sided edge differences and
    boundary data folded in (corner entries weighted by sqrt(2))."""
    h, w = g.mask.shape
    pv, qv = g.p.values, g.q.values
    px = np.empty((h, w))
    px[:, 1 : w - 1] = (pv[:, 2:] - pv[:, : w - 2]) / 2.0
    px[:, 0] = (pv[:, 1] - pv[:, 0]) / 2.0
    px[:, -1] = (pv[:, -1] - pv[:, -2]) / 2.0
    qy = np.empty((h, w))
    qy[1 : h - 1, :] = (qv[2:, :] - qv[: h - 2, :]) / 2.0
    qy[0, :] = (qv[1, :] - qv[0, :]) / 2.0
    qy[-1, :] = (qv[-1, :] - qv[-2, :]) / 2.0
    weights = np.zeros((h, w))
    weights[0, :] = weights[-1, :] = weights[:, 0] = weights[:, -1] = 1.0
    for corner in ((0, 0), (0, -1), (-1, 0), (-1, -1)):
        weights[corner] = SQRT2
    return px + qy - weights * b


def _cosine_eigenvalues(h: int, w: int) -> np.ndarray:
    k = np.arange(w)[None, :]
    l = np.arange(h)[:, None]
    return 4.0 * (np.sin(np.pi * k / (2.0 * w)) ** 2 + np.sin(np.pi * l / (2.0 * h)) ** 2)


def _neumann_spectrum(g: GradientField, b: np.ndarray) -> SpectrumGrid:
    h, w = g.mask.shape
    denom = _cosine_eigenvalues(h, w)
    denom[0, 0] = 1.0
    coeffs = -cosine2(neumann_rhs(g, b)) / denom
    coeffs[0, 0] = 0.0
    return SpectrumGrid(NEUMANN, coeffs, dc_indeterminate=True)


def solve_scs_neumann(g: GradientField, bc: BoundarySpec | None = None) -> ScalarGrid:
    """Cosine-transform Poisson solve under a Neumann boundary condition.

    With ``bc=None`` (or a neumann spec without data) the natural condition
    is used, which makes this the non-iterative twin of the least-squares
    integrator on full rectangular grids.  The additive constant is not
    determined; the output is zero-mean.
    """
    _require_full_rect(g, "the cosine transform solver")
    if bc is None:
        bc = BoundarySpec.natural()
    if bc.kind != NEUMANN:
        raise ConfigurationError("solve_scs_neumann needs a neumann BoundarySpec")
    h, w = g.mask.shape
    if h < 2 or w < 2:
        raise UnsupportedDomainError("the cosine transform solver needs at least a 2x2 grid")
    if bc.data is None:
        b = natural_neumann_values(g)
    else:
        if bc.data.shape != (h, w):
            raise ConfigurationError(
                f"boundary data shape {bc.data.shape} does not match grid {(h, w)}"
            )
        b = bc.data
    spectrum = _neumann_spectrum(g, b)
    z = icosine2(spectrum.coefficients)
    return ScalarGrid(z - z.mean())


def poisson_spectrum(g: GradientField, bc: BoundarySpec) -> SpectrumGrid:
    """Solved coefficient grid for the transform solver matching ``bc``."""
    _require_full_rect(g, "spectral solving")
    if bc.kind == PERIODIC:
        return _periodic_spectrum(g)
    if bc.kind == NEUMANN:
        b = bc.data if bc.data is not None else natural_neumann_values(g)
        return _neumann_spectrum(g, b)
    h, w = g.mask.shape
    rhs = _dirichlet_rhs(g, bc.data)
    coeffs = -sine2(rhs) / _sine_eigenvalues(h - 2, w - 2)
    return SpectrumGrid(DIRICHLET, coeffs, dc_indeterminate=False)
