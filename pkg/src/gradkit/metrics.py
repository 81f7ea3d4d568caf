"""Quantitative evaluation: integrability energy, aligned RMSE, residuals."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, DataError, UnsupportedDomainError
from .grids import DomainMask, GradientField, ScalarGrid, shifted
from .poisson import assemble_system
from .spectral import BoundarySpec, DIRICHLET, NEUMANN, PERIODIC, natural_neumann_values, neumann_rhs


def e_int(g: GradientField) -> float:
    """Discrete curl energy: departure of (p, q) from being integrable.

    Sum of [(p[u,v+1] - p[u,v]) - (q[u+1,v] - q[u,v])]^2 over pixels whose
    +u and +v neighbors are inside.  Identically zero for any field built
    by forward differences of a depth grid, however discontinuous -- the
    reason synthetic benchmarks must sample analytic gradients instead.
    Terms whose samples are undefined (NaN) are skipped.
    """
    ins = g.mask.inside
    omega3 = ins & shifted(ins, 1, 0, False) & shifted(ins, 0, 1, False)
    pv, qv = g.p.values, g.q.values
    curl = (shifted(pv, 0, 1, np.nan) - pv) - (shifted(qv, 1, 0, np.nan) - qv)
    terms = curl[omega3] ** 2
    return float(np.nansum(terms))


def rmse_offset_aligned(
    z: ScalarGrid, z_gt: ScalarGrid, mask: DomainMask
) -> tuple[float, float]:
    """RMSE after shifting z by the least-squares optimal constant.

    Returns (rmse, kappa) with kappa the applied offset: the mean of
    (z_gt - z) over the mask, which is the exact minimizer of the squared
    error among all constant shifts.
    """
    if not (z.shape == z_gt.shape == mask.shape):
        raise ValueError("estimate, ground truth and mask must share dimensions")
    sel = mask.inside
    a = z.values[sel]
    b = z_gt.values[sel]
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise DataError("depth undefined on masked pixels; cannot align")
    kappa = float(np.mean(b - a))
    rmse = float(np.sqrt(np.mean((a + kappa - b) ** 2)))
    return rmse, kappa


def rmse_scale_aligned(
    z: ScalarGrid, z_gt: ScalarGrid, mask: DomainMask
) -> tuple[float, float]:
    """Depth-domain RMSE after the optimal positive rescaling of z.

    For depth recovered from a log-depth gradient the gauge freedom is
    multiplicative; the scale s = exp(mean(ln z_gt - ln z)) is optimal for
    the log-domain squared error.  Returns (rmse, s).
    """
    if not (z.shape == z_gt.shape == mask.shape):
        raise ValueError("estimate, ground truth and mask must share dimensions")
    sel = mask.inside
    a = z.values[sel]
    b = z_gt.values[sel]
    if (a <= 0).any() or (b <= 0).any() or not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise DataError("scale alignment needs positive finite depths on the mask")
    s = float(np.exp(np.mean(np.log(b) - np.log(a))))
    rmse = float(np.sqrt(np.mean((s * a - b) ** 2)))
    return rmse, s


def _wrapped_residual(z: np.ndarray, g: GradientField) -> np.ndarray:
    pv, qv = g.p.values, g.q.values
    lap = (
        np.roll(z, -1, axis=1)
        + np.roll(z, 1, axis=1)
        + np.roll(z, -1, axis=0)
        + np.roll(z, 1, axis=0)
        - 4.0 * z
    )
    div = (np.roll(pv, -1, axis=1) - np.roll(pv, 1, axis=1)) / 2.0
    div += (np.roll(qv, -1, axis=0) - np.roll(qv, 1, axis=0)) / 2.0
    return lap - div


def _dirichlet_residual(z: np.ndarray, g: GradientField, b: np.ndarray) -> float:
    h, w = z.shape
    pv, qv = g.p.values, g.q.values
    lap = z[1:-1, 2:] + z[1:-1, :-2] + z[2:, 1:-1] + z[:-2, 1:-1] - 4.0 * z[1:-1, 1:-1]
    div = (pv[1:-1, 2:] - pv[1:-1, :-2]) / 2.0 + (qv[2:, 1:-1] - qv[:-2, 1:-1]) / 2.0
    interior = float(np.abs(lap - div).max())
    ring = np.zeros((h, w), dtype=bool)
    ring[0, :] = ring[-1, :] = ring[:, 0] = ring[:, -1] = True
    mismatch = float(np.abs(z[ring] - b[ring]).max())
    return max(interior, mismatch)


def stencil_residual(z: ScalarGrid, g: GradientField, bc: BoundarySpec | None = None) -> float:
    """Max-norm residual of the discrete system the named solver assembles.

    bc=None checks the free-boundary least-squares equations on the field's
    mask; a BoundarySpec selects the periodic, dirichlet or neumann system
    on the full rectangle.  A solver output should drive this to rounding
    level; feeding a wrong surface (or a harmonic perturbation) shows up as
    a nonzero residual.

    One structural caveat: the neumann system is singular, so prescribed
    data whose assembled right-hand side is not orthogonal to constants
    admits no exact solution; the solver then returns the least-squares
    fit and this residual bottoms out at the imbalance (natural data is
    always consistent).
    """
    if z.shape != g.mask.shape:
        raise ValueError("grid and gradient field must share dimensions")
    zv = z.values
    if bc is None or (bc.kind == NEUMANN and bc.data is None and not g.mask.is_full()):
        system = assemble_system(g)
        resid = system.residual(np.where(g.mask.inside, zv, 0.0))
        return float(np.nanmax(np.abs(resid)))
    if not g.mask.is_full():
        raise UnsupportedDomainError(f"the {bc.kind} system is only defined on full rectangles")
    if bc.kind == PERIODIC:
        return float(np.abs(_wrapped_residual(zv, g)).max())
    if bc.kind == DIRICHLET:
        if bc.data is None:
            raise ConfigurationError("dirichlet residual needs prescribed boundary values")
        return _dirichlet_residual(zv, g, bc.data)
    # neumann: reflective five-point system with one-sided divergence
    b = bc.data if bc.data is not None else natural_neumann_values(g)
    system = assemble_system(g)  # reflective LHS coincides with the energy normal equations
    lhs = system.residual(zv) + system.rhs  # neighbor sums minus diag*z
    rhs = neumann_rhs(g, b)
    return float(np.nanmax(np.abs(lhs - rhs)))
