"""Direct curvilinear integration of gradient fields.

The classical baseline: starting from an origin pixel (depth 0), each pixel
gets its predecessor's depth plus a trapezoidal edge increment (the average
of the gradient component at the edge's two endpoints, the same edge model
the least-squares solvers use).  On non-integrable data the result depends
on the marching order, so several orders are provided and
:func:`integrate_multipath` averages over an ensemble of them.

Output support is the 4-connected component of the origin; other components
stay not-a-value, since they cannot be reached without leaving the domain.
"""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .grids import GradientField, NOT_A_VALUE, ScalarGrid
from .poisson import _edge_averages

ROW_MAJOR = "row_major"
COLUMN_MAJOR = "column_major"


def thread_budget() -> int:
    """Worker cap for internal parallelism (GRADKIT_THREADS, else CPU count)."""
    env = os.environ.get("GRADKIT_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"GRADKIT_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


class _Increments:
    """Trapezoidal edge increments between axis-adjacent pixels."""

    def __init__(self, g: GradientField):
        self.pe, self.qe = _edge_averages(g)

    def step(self, fu: int, fv: int, tu: int, tv: int) -> float:
        if tu == fu + 1:
            return self.pe[fv, fu]
        if tu == fu - 1:
            return -self.pe[fv, tu]
        if tv == fv + 1:
            return self.qe[fv, fu]
        return -self.qe[tv, fu]


def _bfs_fill(z, comp, inc: _Increments):
    """Assign still-unvalued component pixels by breadth-first chaining."""
    h, w = comp.shape
    valued = np.isfinite(z)
    queue = deque(zip(*[idx.tolist() for idx in np.nonzero(valued)]))
    while queue:
        fv, fu = queue.popleft()
        for du, dv in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            tu, tv = fu + du, fv + dv
            if not (0 <= tu < w and 0 <= tv < h):
                continue
            if not comp[tv, tu] or valued[tv, tu]:
                continue
            step = inc.step(fu, fv, tu, tv)
            if not np.isfinite(step):
                continue
            z[tv, tu] = z[fv, fu] + step
            valued[tv, tu] = True
            queue.append((tv, tu))


def _axis_order(size: int, start: int):
    yield from range(start, size)
    yield from range(start - 1, -1, -1)


def _sweep(z, comp, inc, origin, order):
    u0, v0 = origin
    h, w = comp.shape
    for v in _axis_order(h, v0):
        for u in _axis_order(w, u0):
            if (u, v) == (u0, v0) or not comp[v, u]:
                continue
            if order == ROW_MAJOR:
                horizontal_first = u != u0
            else:
                horizontal_first = v == v0
            if horizontal_first:
                pu, pv = (u - 1 if u > u0 else u + 1), v
            else:
                pu, pv = u, (v - 1 if v > v0 else v + 1)
            if not (0 <= pu < w and 0 <= pv < h) or not comp[pv, pu]:
                continue
            if not np.isfinite(z[pv, pu]):
                continue
            step = inc.step(pu, pv, u, v)
            if np.isfinite(step):
                z[v, u] = z[pv, pu] + step


def _staircase(z, comp, inc, origin, rng):
    """Random monotone staircase: march outward ring by ring (L1 distance),
    picking the horizontal or vertical predecessor toward the origin by a
    coin flip whenever both are usable."""
    u0, v0 = origin
    h, w = comp.shape
    vs, us = np.nonzero(comp)
    dist = np.abs(us - u0) + np.abs(vs - v0)
    for i in np.lexsort((us, vs, dist)):
        u, v = int(us[i]), int(vs[i])
        if (u, v) == (u0, v0):
            continue
        candidates = []
        if u != u0:
            candidates.append((u - 1 if u > u0 else u + 1, v))
        if v != v0:
            candidates.append((u, v - 1 if v > v0 else v + 1))
        usable = []
        for pu, pv in candidates:
            if comp[pv, pu] and np.isfinite(z[pv, pu]):
                step = inc.step(pu, pv, u, v)
                if np.isfinite(step):
                    usable.append((pu, pv, step))
        if not usable:
            continue
        pu, pv, step = usable[rng.integers(len(usable))] if len(usable) > 1 else usable[0]
        z[v, u] = z[pv, pu] + step


def _integrate(g: GradientField, origin, mode, rng=None) -> np.ndarray:
    u0, v0 = origin
    if not (0 <= u0 < g.width and 0 <= v0 < g.height):
        raise ValueError(f"origin ({u0}, {v0}) outside the grid")
    if not g.mask.inside[v0, u0]:
        raise ValueError(f"origin ({u0}, {v0}) is outside the mask")
    labels = g.mask.component_labels
    comp = labels == labels[v0, u0]
    inc = _Increments(g)
    z = np.full(g.mask.shape, NOT_A_VALUE)
    z[v0, u0] = 0.0
    if mode in (ROW_MAJOR, COLUMN_MAJOR):
        _sweep(z, comp, inc, origin, mode)
    elif mode == "staircase":
        _staircase(z, comp, inc, origin, rng)
    else:
        raise ValueError(f"unknown integration order {mode!r}")
    _bfs_fill(z, comp, inc)
    return z


def integrate_path(g: GradientField, origin: tuple[int, int], order: str = ROW_MAJOR) -> ScalarGrid:
    """Integrate along a single deterministic sweep.

    order 'row_major' chains pixels horizontally from the origin column
    (which itself is chained vertically from the origin); 'column_major'
    is the transpose.  z(origin) = 0.
    """
    if order not in (ROW_MAJOR, COLUMN_MAJOR):
        raise ValueError(f"order must be '{ROW_MAJOR}' or '{COLUMN_MAJOR}', got {order!r}")
    return ScalarGrid(_integrate(g, origin, order))


def integrate_multipath(
    g: GradientField, origin: tuple[int, int], n_paths: int, seed: int = 0
) -> ScalarGrid:
    """Average :func:`integrate_path` over an ensemble of sweeps.

    The ensemble is the two deterministic sweeps plus (n_paths - 2) random
    monotone staircases drawn from the seed.  Averaging damps the error
    accumulated along any single path on noisy data.  Deterministic for a
    fixed seed; paths may be evaluated in parallel (GRADKIT_THREADS) but
    the reduction order is fixed.
    """
    if n_paths < 2:
        raise ValueError(f"n_paths must be at least 2, got {n_paths}")
    master = np.random.default_rng(seed)
    child_seeds = master.integers(0, 2**63, size=max(0, n_paths - 2))
    jobs: list[tuple[str, np.random.Generator | None]] = [(ROW_MAJOR, None), (COLUMN_MAJOR, None)]
    jobs += [("staircase", np.random.default_rng(int(s))) for s in child_seeds]
    jobs = jobs[:n_paths]

    def run(job):
        mode, rng = job
        return _integrate(g, origin, mode, rng)

    workers = min(thread_budget(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    total = results[0].copy()
    for r in results[1:]:
        total += r
    return ScalarGrid(total / len(jobs))
