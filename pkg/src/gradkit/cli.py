"""Command-line surface: convert, integrate, synth, eval, bench.

Exit codes: 0 success, 1 data/configuration errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import bench as bench_mod
from . import io as gio
from . import metrics, pathint, poisson, spectral, synth
from .camera import CameraModel, NormalField, normals_to_gradient
from .errors import GradkitError
from .grids import DomainMask, ScalarGrid
from .spectral import BoundarySpec

SPECTRAL_METHODS = ("fc", "dft", "dst", "dct")
ITERATIVE_METHODS = ("hb", "dc")


def _parse_camera(parser, spec: str) -> CameraModel:
    kind, _, rest = spec.partition(":")
    try:
        if kind == "ortho":
            return CameraModel.orthographic()
        if kind == "weak":
            return CameraModel.weak_perspective(float(rest))
        if kind == "persp":
            focal, u0, v0 = (float(x) for x in rest.split(","))
            return CameraModel.perspective(focal, (u0, v0))
    except (ValueError, GradkitError) as exc:
        parser.error(f"bad --camera {spec!r}: {exc}")
    parser.error(f"bad --camera {spec!r}: expected ortho, weak:M or persp:F,U0,V0")


def _parse_method(parser, spec: str) -> tuple[str, int]:
    name, _, rest = spec.partition(":")
    if name == "multipath":
        try:
            return name, int(rest or "16")
        except ValueError:
            parser.error(f"bad --method {spec!r}: multipath:N needs an integer N")
    if rest:
        parser.error(f"--method {name} takes no argument")
    if name not in ("path", "hb", "dc") + SPECTRAL_METHODS:
        parser.error(f"unknown --method {name!r}")
    return name, 0


def _parse_bc(parser, spec: str, shape) -> tuple[BoundarySpec | None, bool]:
    """Returns (spec or None for natural, whether a file was given)."""
    name, _, path = spec.partition(":")
    if name == "natural":
        return None, False
    if name == "periodic":
        return BoundarySpec.periodic(), False
    if name in ("dirichlet", "neumann"):
        if path:
            values = gio.read_pfm(path)
            if values.shape != shape:
                parser.error(f"--bc file {path} is {values.shape}, grid is {shape}")
        else:
            values = np.zeros(shape)
        return BoundarySpec(name, values), bool(path)
    parser.error(f"unknown --bc {spec!r}")


def _parse_size(parser, spec: str) -> tuple[int, int]:
    try:
        m, n = spec.lower().split("x")
        return int(m), int(n)
    except ValueError:
        parser.error(f"bad --size {spec!r}: expected MxN")


def _first_inside(mask: DomainMask) -> tuple[int, int]:
    vs, us = np.nonzero(mask.inside)
    return int(us[0]), int(vs[0])


def _cmd_convert(parser, args) -> int:
    cam = _parse_camera(parser, args.camera)
    nf = gio.read_normals_pfm(args.normals)
    g, occluding = normals_to_gradient(nf, cam, eps=args.eps)
    gio.write_gradient(args.out, g)
    gio.write_pgm_mask(f"{args.out}.mask.pgm", g.mask)
    print(
        f"converted {args.normals} ({cam.kind}): {int(g.mask.inside.sum())} pixels, "
        f"{int(occluding.sum())} flagged occluding -> {args.out}.p.pfm/.q.pfm"
    )
    return 0


def _cmd_integrate(parser, args) -> int:
    method, n_paths = _parse_method(parser, args.method)
    mask = gio.read_pgm_mask(args.mask) if args.mask else None
    g = gio.read_gradient(args.grad, mask)
    bc, bc_from_file = _parse_bc(parser, args.bc, g.mask.shape)
    if method in ("fc", "dft") and bc is not None and bc.kind != spectral.PERIODIC:
        parser.error(f"--method {method} supports --bc natural or periodic only")

    report = None
    if method == "path":
        origin = tuple(args.origin) if args.origin else _first_inside(g.mask)
        z = pathint.integrate_path(g, origin)
    elif method == "multipath":
        origin = tuple(args.origin) if args.origin else _first_inside(g.mask)
        z = pathint.integrate_multipath(g, origin, n_paths, seed=args.seed)
    elif method in ITERATIVE_METHODS:
        fixed = None
        if bc is not None:
            if bc.kind != spectral.DIRICHLET or not bc_from_file:
                parser.error(
                    f"--method {method} supports --bc natural or dirichlet:FILE "
                    "(finite entries in FILE pin those pixels)"
                )
            fixed = np.where(g.mask.inside, bc.data, np.nan)
        system = poisson.assemble_system(g, fixed_values=fixed)
        if method == "hb":
            scheme, omega = "jacobi", 1.0
        elif args.omega is not None:
            scheme, omega = "sor", args.omega
        else:
            scheme, omega = "gauss_seidel", 1.0
        cfg = poisson.SolverConfig(
            method=scheme, tol=args.tol, max_iters=args.max_iters, omega=omega
        )
        z, report = poisson.solve(system, cfg)
    elif method == "fc":
        z = spectral.solve_fc(g)
    elif method == "dft":
        z = spectral.solve_scs_periodic(g)
    elif method == "dst":
        if bc is None or bc.kind != spectral.DIRICHLET:
            parser.error("--method dst needs --bc dirichlet[:FILE]")
        z = spectral.solve_scs_dirichlet(g, bc)
    else:  # dct
        if bc is not None and bc.kind != spectral.NEUMANN:
            parser.error("--method dct needs --bc natural or neumann:FILE")
        z = spectral.solve_scs_neumann(g, bc)

    gio.write_pfm(args.out, z.values)
    line = f"integrated {args.grad} with {args.method} -> {args.out}"
    if report is not None:
        line += (
            f" (iters={report.iterations} max_update={report.max_update:.3e}"
            f" energy={report.energy:.6e} converged={report.converged})"
        )
    print(line)
    if args.png:
        vmin, vmax = gio.write_png_preview(args.png, z.values, g.mask.inside)
        print(f"preview {args.png} maps [{vmin:g}, {vmax:g}] to [0, 255]")
    return 0


def _cmd_synth(parser, args) -> int:
    width, height = _parse_size(parser, args.size)
    kind, _, params = args.kind.partition(":")
    prefix = args.out_prefix
    if kind == "harmonic":
        try:
            omega = float(params)
        except ValueError:
            parser.error(f"bad --kind {args.kind!r}: harmonic:OMEGA needs a number")
        z = synth.make_harmonic("cos_exp", omega, width, height)
        gio.write_pfm(f"{prefix}.z.pfm", z.values)
        gio.write_pgm_mask(f"{prefix}.mask.pgm", DomainMask.full(width, height))
        print(f"wrote harmonic surface {prefix}.z.pfm ({width}x{height}, omega={omega})")
        return 0
    table = {"vase": ("vase", ()), "plane": ("plane", ("a", "b")), "sine": ("sine_product", ("kx", "ky"))}
    if kind not in table:
        parser.error(f"unknown --kind {args.kind!r}")
    lib_kind, names = table[kind]
    kwargs = {}
    if params:
        try:
            kwargs = dict(zip(names, (float(x) for x in params.split(","))))
        except ValueError:
            parser.error(f"bad --kind parameters in {args.kind!r}")
    surface = synth.make_surface(lib_kind, width, height, **kwargs)
    g = surface.gradient
    if args.noise:
        model, _, sigma_s = args.noise.partition(":")
        try:
            sigma = float(sigma_s)
        except ValueError:
            parser.error(f"bad --noise {args.noise!r}")
        if model == "gradient":
            g = synth.add_noise(g, synth.GRADIENT_NOISE, sigma, seed=args.seed)
        elif model == "normal":
            # perturb the normals the gradient induces, then convert back
            p, q = g.p.values, g.q.values
            norm = np.sqrt(1.0 + p**2 + q**2)
            nf = NormalField(
                ScalarGrid(p / norm), ScalarGrid(q / norm), ScalarGrid(-1.0 / norm),
                g.mask.inside,
            )
            noisy = synth.add_noise(nf, synth.NORMAL_NOISE, sigma, seed=args.seed)
            g, _ = normals_to_gradient(noisy, CameraModel.orthographic())
        else:
            parser.error(f"unknown --noise model {model!r}")
    gio.write_pfm(f"{prefix}.z.pfm", surface.z.values)
    gio.write_gradient(prefix, g)
    gio.write_pgm_mask(f"{prefix}.mask.pgm", surface.mask)
    print(f"wrote {prefix}.z.pfm, {prefix}.p.pfm, {prefix}.q.pfm, {prefix}.mask.pgm")
    return 0


def _cmd_eval(parser, args) -> int:
    est = ScalarGrid(gio.read_pfm(args.est))
    gt = ScalarGrid(gio.read_pfm(args.gt))
    if est.shape != gt.shape:
        raise GradkitError(f"estimate {est.shape} and ground truth {gt.shape} differ")
    if args.mask:
        mask = gio.read_pgm_mask(args.mask)
    else:
        mask = DomainMask(np.isfinite(est.values) & np.isfinite(gt.values))
    rmse, offset = metrics.rmse_offset_aligned(est, gt, mask)
    e_int_value = ""
    residual = ""
    if args.grad:
        g = gio.read_gradient(args.grad, mask)
        e_int_value = f"{metrics.e_int(g):.9g}"
        residual = f"{metrics.stencil_residual(est, g):.9g}"
    with open(args.report, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["est", "gt", "pixels", "rmse", "offset", "e_int", "stencil_residual"])
        writer.writerow(
            [args.est, args.gt, int(mask.inside.sum()), f"{rmse:.9g}", f"{offset:.9g}",
             e_int_value, residual]
        )
    print(f"rmse={rmse:.9g} offset={offset:.9g} -> {args.report}")
    return 0


def _cmd_bench(parser, args) -> int:
    out = bench_mod.run_suite(args.out_dir, suite=args.suite, seed=args.seed)
    print(f"bench suite '{args.suite}' complete -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="normal field (PF) -> gradient field (two PFMs)")
    p.add_argument("--normals", required=True)
    p.add_argument("--camera", required=True, help="ortho | weak:M | persp:F,U0,V0")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--eps", type=float, default=1e-6, help="occluding-contour threshold")

    p = sub.add_parser("integrate", help="gradient field -> depth map")
    p.add_argument("--grad", required=True, help="gradient prefix (reads .p.pfm/.q.pfm)")
    p.add_argument("--mask", help="PGM mask (default: finite gradient pixels)")
    p.add_argument("--method", required=True,
                   help="path | multipath:N | hb | dc | fc | dft | dst | dct")
    p.add_argument("--bc", default="natural",
                   help="natural | periodic | dirichlet[:FILE] | neumann[:FILE]")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--omega", type=float, default=None, help="SOR factor for --method dc")
    p.add_argument("--origin", type=int, nargs=2, metavar=("U", "V"),
                   help="integration origin for path methods")
    p.add_argument("--out", required=True)
    p.add_argument("--png", help="also write a grayscale preview")

    p = sub.add_parser("synth", help="make an analytic surface and its gradient")
    p.add_argument("--kind", required=True, help="vase | plane:a,b | sine:kx,ky | harmonic:omega")
    p.add_argument("--size", required=True, help="MxN (width x height)")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--noise", help="gradient:sigma | normal:sigma")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval", help="compare a depth estimate against ground truth")
    p.add_argument("--est", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--mask")
    p.add_argument("--grad", help="gradient prefix for e_int / residual columns")
    p.add_argument("--report", required=True)

    p = sub.add_parser("bench", help="run the benchmark suite")
    p.add_argument("--suite", default="default", choices=("default", "smoke"))
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "convert": _cmd_convert,
        "integrate": _cmd_integrate,
        "synth": _cmd_synth,
        "eval": _cmd_eval,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](parser, args)
    except GradkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
