"""Iterative least-squares integration on arbitrary masked domains.

The depth is taken as the minimizer of the discrete energy

    F(z) = sum over +u edges [z[u+1,v] - z[u,v] - (p[u+1,v] + p[u,v]) / 2]^2
         + sum over +v edges [z[u,v+1] - z[u,v] - (q[u,v+1] + q[u,v]) / 2]^2

where an edge exists whenever both of its endpoints are inside the mask.
Setting the gradient of F to zero gives one linear equation per inside
pixel; on interior pixels it reduces to the five-point Poisson stencil with
the second-order divergence as right-hand side, and on boundary pixels it
discretizes the free-boundary (natural) condition.  The system is solved by
Jacobi, red-black Gauss-Seidel or SOR sweeps.

Because the boundary is free, the system only fixes z up to one additive
constant per connected component; outputs are normalized to zero mean per
component (components consisting of a single pixel have no equation at all
and keep their initial value).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .grids import DomainMask, GradientField, NOT_A_VALUE, ScalarGrid, shifted

_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _mean_of_finite(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    fa, fb = np.isfinite(a), np.isfinite(b)
    out = np.full(a.shape, NOT_A_VALUE)
    both = fa & fb
    out[both] = (a[both] + b[both]) / 2.0
    out[fa & ~fb] = a[fa & ~fb]
    out[fb & ~fa] = b[fb & ~fa]
    return out


def _edge_averages(g: GradientField) -> tuple[np.ndarray, np.ndarray]:
    """Per-edge averages of p (+u edges) and q (+v edges), NaN off-domain.

    The average of the two endpoint samples is used; if one endpoint sample
    is undefined (forward-difference fields have no sample on pixels whose
    +u / +v neighbor is outside), the remaining one is used alone.
    """
    ins = g.mask.inside
    pv, qv = g.p.values, g.q.values
    edge_u = ins & shifted(ins, 1, 0, False)
    edge_v = ins & shifted(ins, 0, 1, False)
    pe = _mean_of_finite(pv, shifted(pv, 1, 0, NOT_A_VALUE))
    qe = _mean_of_finite(qv, shifted(qv, 0, 1, NOT_A_VALUE))
    pe[~edge_u] = NOT_A_VALUE
    qe[~edge_v] = NOT_A_VALUE
    return pe, qe


@dataclass(frozen=True)
class PoissonSystem:
    """Normal equations of the discrete energy, one row per inside pixel.

    diag[v, u] counts the incident edges (0..4); rhs[v, u] holds the signed
    sum of the incident edge averages; edge_p / edge_q keep the averages
    themselves (NaN where there is no edge) so the energy of a candidate
    solution can be evaluated against the system.  The matrix itself is
    implied by the mask: off-diagonal entries are +1 toward each inside
    neighbor, so it is symmetric with zero row sums (pure Neumann
    structure).

    fixed_values, where finite, pins those pixels (removing them from the
    unknowns); their incident edges then feed known values to the sweeps.
    """

    mask: DomainMask
    diag: np.ndarray
    rhs: np.ndarray
    edge_p: np.ndarray
    edge_q: np.ndarray
    fixed_values: np.ndarray | None = None

    @property
    def unknowns(self) -> np.ndarray:
        free = self.mask.inside.copy()
        if self.fixed_values is not None:
            free &= ~np.isfinite(self.fixed_values)
        return free

    def energy(self, z: np.ndarray) -> float:
        ins = self.mask.inside
        total = 0.0
        for du, dv, edge in ((1, 0, self.edge_p), (0, 1, self.edge_q)):
            has_edge = ins & shifted(ins, du, dv, False)
            resid = shifted(z, du, dv, NOT_A_VALUE) - z - edge
            total += float(np.sum(resid[has_edge] ** 2))
        return total

    def residual(self, z: np.ndarray) -> np.ndarray:
        """Per-pixel residual of the normal equations (NaN outside)."""
        ins = self.mask.inside
        nbr = np.zeros(z.shape)
        work = np.where(ins, z, 0.0)
        for du, dv in _DIRS:
            link = ins & shifted(ins, du, dv, False)
            nbr[link] += shifted(work, du, dv, 0.0)[link]
        out = np.full(z.shape, NOT_A_VALUE)
        out[ins] = nbr[ins] - self.diag[ins] * z[ins] - self.rhs[ins]
        return out


def assemble_system(g: GradientField, fixed_values: np.ndarray | None = None) -> PoissonSystem:
    """Assemble the per-pixel optimality equations of the discrete energy.

    For each inside pixel:  sum over inside neighbors (z_nbr - z_pix) = rhs,
    with rhs the signed sum of edge averages of p and q.  fixed_values may
    pin pixels (finite entries) to prescribed depths; they are moved out of
    the unknown set (their equations are dropped).
    """
    ins = g.mask.inside
    pe, qe = _edge_averages(g)
    diag = np.zeros(g.mask.shape)
    rhs = np.zeros(g.mask.shape)
    for du, dv, edge in ((1, 0, pe), (0, 1, qe)):
        has_fwd = ins & shifted(ins, du, dv, False)
        diag += has_fwd  # +u / +v edge owned by this pixel
        has_bwd = shifted(has_fwd, -du, -dv, False)
        diag += has_bwd  # edge owned by the lower neighbor
        rhs[has_fwd] += edge[has_fwd]
        rhs[has_bwd] -= shifted(edge, -du, -dv, NOT_A_VALUE)[has_bwd]
    diag[~ins] = 0.0
    rhs[~ins] = 0.0
    if fixed_values is not None:
        fixed_values = np.asarray(fixed_values, dtype=np.float64)
        if fixed_values.shape != g.mask.shape:
            raise ValueError("fixed_values must match the mask dimensions")
        if np.isfinite(fixed_values[~ins]).any():
            raise ValueError("fixed_values prescribes depths outside the mask")
    return PoissonSystem(g.mask, diag, rhs, pe, qe, fixed_values)


@dataclass(frozen=True)
class SolverConfig:
    """Iteration scheme and stopping rule.

    method   'jacobi', 'gauss_seidel' (red-black) or 'sor'
    tol      stop when the max absolute update falls below tol
             (None: 1e-8 * max(1, max |rhs|))
    omega    SOR relaxation factor, 0 < omega < 2
    initial  starting grid (None: zeros)
    """

    method: str = "gauss_seidel"
    tol: float | None = None
    max_iters: int = 100_000
    omega: float = 1.9
    initial: ScalarGrid | None = None
    track_updates: bool = False

    def __post_init__(self):
        if self.method not in ("jacobi", "gauss_seidel", "sor"):
            raise ConfigurationError(f"unknown method {self.method!r}")
        if self.tol is not None and self.tol <= 0:
            raise ConfigurationError("tol must be positive")
        if not 0.0 < self.omega < 2.0:
            raise ConfigurationError("SOR needs 0 < omega < 2")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be at least 1")


@dataclass
class SolveReport:
    iterations: int
    max_update: float
    energy: float
    converged: bool
    tol: float = 0.0
    updates: list[float] | None = None


def sor_omega_hint(mask: DomainMask) -> float:
    """Near-optimal SOR relaxation factor for Poisson-type systems."""
    extent = max(mask.width, mask.height)
    return 2.0 / (1.0 + np.sin(np.pi / extent))


def _component_zero_mean(z: np.ndarray, labels: np.ndarray, normalizable: np.ndarray):
    for comp in np.unique(labels[normalizable]):
        sel = (labels == comp) & normalizable
        z[sel] -= z[sel].mean()


def solve(system: PoissonSystem, cfg: SolverConfig | None = None) -> tuple[ScalarGrid, SolveReport]:
    """Iterate to a fixed point of the normal equations.

    Non-convergence within max_iters is reported (converged=False), not
    raised.  Unless pixels are pinned, each connected component is
    normalized to zero mean.
    """
    if cfg is None:
        cfg = SolverConfig()
    ins = system.mask.inside
    h, w = system.mask.shape
    diag = system.diag
    rhs = system.rhs
    tol = cfg.tol
    if tol is None:
        scale = np.abs(rhs[ins]).max() if ins.any() else 1.0
        tol = 1e-8 * max(1.0, float(scale))

    active = system.unknowns & (diag > 0)
    linksf = [(ins & shifted(ins, du, dv, False)).astype(np.float64) for du, dv in _DIRS]

    z = np.zeros((h, w))
    if cfg.initial is not None:
        if cfg.initial.shape != (h, w):
            raise ValueError("initial grid must match the system dimensions")
        init = cfg.initial.values
        usable = ins & np.isfinite(init)
        z[usable] = init[usable]
    if system.fixed_values is not None:
        pinned = np.isfinite(system.fixed_values)
        z[pinned] = system.fixed_values[pinned]

    uu, vv = np.meshgrid(np.arange(w), np.arange(h))
    colors = [active & ((uu + vv) % 2 == 0), active & ((uu + vv) % 2 == 1)]

    labels = system.mask.component_labels
    # single-pixel components have no equations; leave them at their start
    normalizable = ins & (diag > 0)
    if system.fixed_values is not None:
        # components containing a pinned pixel are uniquely determined
        pinned_labels = np.unique(labels[np.isfinite(system.fixed_values)])
        normalizable &= ~np.isin(labels, pinned_labels)

    safe_diag = np.where(diag > 0, diag, 1.0)

    def neighbor_sum(zz):
        total = linksf[0] * shifted(zz, 1, 0, 0.0)
        total += linksf[1] * shifted(zz, -1, 0, 0.0)
        total += linksf[2] * shifted(zz, 0, 1, 0.0)
        total += linksf[3] * shifted(zz, 0, -1, 0.0)
        return total

    max_update = np.inf
    iters = 0
    converged = False
    history: list[float] | None = [] if cfg.track_updates else None
    while iters < cfg.max_iters:
        iters += 1
        if cfg.method == "jacobi":
            target = (neighbor_sum(z) - rhs) / safe_diag
            delta = np.where(active, target - z, 0.0)
            max_update = float(np.abs(delta).max())
            z += delta
        else:
            max_update = 0.0
            for color in colors:
                target = (neighbor_sum(z) - rhs) / safe_diag
                if cfg.method == "sor":
                    target = (1.0 - cfg.omega) * z + cfg.omega * target
                delta = np.where(color, target - z, 0.0)
                max_update = max(max_update, float(np.abs(delta).max()))
                z += delta
        if history is not None:
            history.append(max_update)
        if max_update < tol:
            converged = True
            break
        if iters % 1000 == 0:
            _component_zero_mean(z, labels, normalizable)

    _component_zero_mean(z, labels, normalizable)
    out = np.full((h, w), NOT_A_VALUE)
    out[ins] = z[ins]
    report = SolveReport(
        iterations=iters,
        max_update=max_update,
        energy=system.energy(z),
        converged=converged,
        tol=tol,
        updates=history,
    )
    return ScalarGrid(out), report


def energy_f_l2(z: ScalarGrid, g: GradientField) -> float:
    """Discrete least-squares energy of a candidate depth grid.

    Sum of squared edge residuals (z difference minus edge average of the
    gradient datum) over all inside edges.  Adding a constant to z leaves
    the energy unchanged.
    """
    if z.shape != g.mask.shape:
        raise ValueError("grid and gradient field must share dimensions")
    ins = g.mask.inside
    pe, qe = _edge_averages(g)
    zv = z.values
    total = 0.0
    for du, dv, edge in ((1, 0, pe), (0, 1, qe)):
        has_edge = ins & shifted(ins, du, dv, False)
        resid = shifted(zv, du, dv, NOT_A_VALUE) - zv - edge
        total += float(np.sum(resid[has_edge] ** 2))
    return total
