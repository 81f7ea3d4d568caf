"""Benchmark harness: all integrators x {full grid, vase silhouette} x noise.

Emits ``bench.csv`` (method, domain, sigma, rmse, e_int, iterations,
converged, wall_time_s), PNG previews of the noise-free reconstructions,
and ``ambiguity_demo.csv`` showing that adding a sampled harmonic surface
to a solution barely changes the interior stencil residual while moving
the energy -- the boundary handling is what pins the solution down.

Wall time is measured around the solver call only, so two runs of the same
suite produce byte-identical CSVs except for that column.
"""

from __future__ import annotations

import csv
import os
import time

import numpy as np

from . import metrics, pathint, poisson, spectral, synth
from .errors import UnsupportedDomainError
from .grids import DomainMask, GradientField, ScalarGrid
from .io import write_png_preview
from .spectral import BoundarySpec

METHODS = ("path", "multipath:16", "hb", "dc", "fc", "dft", "dst", "dct")


def _first_inside(mask: DomainMask) -> tuple[int, int]:
    vs, us = np.nonzero(mask.inside)
    return int(us[0]), int(vs[0])


def _run_method(method: str, g: GradientField, gt: ScalarGrid, seed: int):
    """Returns (z, iterations, converged)."""
    origin = _first_inside(g.mask)
    if method == "path":
        return pathint.integrate_path(g, origin), "", ""
    if method.startswith("multipath"):
        n = int(method.split(":")[1])
        return pathint.integrate_multipath(g, origin, n, seed=seed), "", ""
    if method in ("hb", "dc"):
        system = poisson.assemble_system(g)
        if method == "hb":
            cfg = poisson.SolverConfig(method="jacobi", tol=1e-6, max_iters=5000)
        else:
            cfg = poisson.SolverConfig(
                method="sor", omega=poisson.sor_omega_hint(g.mask), tol=1e-7, max_iters=20000
            )
        z, report = poisson.solve(system, cfg)
        return z, report.iterations, report.converged
    if method == "fc":
        return spectral.solve_fc(g), "", ""
    if method == "dft":
        return spectral.solve_scs_periodic(g), "", ""
    if method == "dst":
        ring = gt.values.copy()  # known boundary depth as the Dirichlet datum
        return spectral.solve_scs_dirichlet(g, BoundarySpec.dirichlet(ring)), "", ""
    if method == "dct":
        return spectral.solve_scs_neumann(g), "", ""
    raise ValueError(f"unknown bench method {method!r}")


def _ambiguity_demo(out_dir: str, size: int):
    surface = synth.make_surface("peaks_smooth", size, size)
    g = surface.gradient
    z = spectral.solve_scs_neumann(g)
    harmonic = synth.make_harmonic("cos_exp", 0.1, size, size)
    scale = 0.05 * np.ptp(z.values) / np.abs(harmonic.values).max()
    bumped = ScalarGrid(z.values + scale * harmonic.values)
    rows = [
        ("solution", poisson.energy_f_l2(z, g), metrics.stencil_residual(z, g)),
        ("solution+harmonic", poisson.energy_f_l2(bumped, g), metrics.stencil_residual(bumped, g)),
    ]
    path = os.path.join(out_dir, "ambiguity_demo.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["surface", "energy", "stencil_residual_natural"])
        for name, energy, resid in rows:
            writer.writerow([name, f"{energy:.9g}", f"{resid:.9g}"])


def run_suite(out_dir: str, suite: str = "default", seed: int = 0) -> str:
    """Run the suite and return the path of the main CSV report."""
    if suite == "default":
        size = 128
        sigmas = (0.0, 0.01, 0.05, 0.1)
        methods = METHODS
    elif suite == "smoke":
        size = 32
        sigmas = (0.0, 0.05)
        methods = ("path", "dc", "fc", "dct")
    else:
        raise ValueError(f"unknown suite {suite!r}")
    os.makedirs(out_dir, exist_ok=True)

    smooth = synth.make_surface("peaks_smooth", size, size)
    vase = synth.make_surface("vase", size, size)
    domains = [
        ("full", smooth.z, smooth.gradient),
        ("vase", vase.z, vase.gradient_on_mask()),
    ]

    csv_path = os.path.join(out_dir, "bench.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "domain", "sigma", "rmse", "e_int", "iterations", "converged",
             "status", "wall_time_s"]
        )
        for domain, gt, g_clean in domains:
            for sigma in sigmas:
                g = g_clean
                if sigma > 0:
                    g = synth.add_noise(g_clean, synth.GRADIENT_NOISE, sigma, seed=seed)
                integrability = metrics.e_int(g)
                for method in methods:
                    t0 = time.perf_counter()
                    try:
                        z, iters, converged = _run_method(method, g, gt, seed)
                    except UnsupportedDomainError:
                        writer.writerow(
                            [method, domain, f"{sigma:g}", "", f"{integrability:.9g}",
                             "", "", "unsupported-domain", ""]
                        )
                        continue
                    elapsed = time.perf_counter() - t0
                    rmse, _ = metrics.rmse_offset_aligned(z, gt, g.mask)
                    writer.writerow(
                        [method, domain, f"{sigma:g}", f"{rmse:.9g}", f"{integrability:.9g}",
                         iters, converged, "ok", f"{elapsed:.4f}"]
                    )
                    if sigma == 0.0:
                        png = os.path.join(out_dir, f"{domain}_{method.replace(':', '')}.png")
                        write_png_preview(png, z.values, g.mask.inside)

    _ambiguity_demo(out_dir, min(size, 64))
    return csv_path
