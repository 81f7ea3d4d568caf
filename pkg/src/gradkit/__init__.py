"""gradkit: integrate per-pixel surface normals / gradient fields into depth.

The toolkit covers the classical family of integrators -- direct path
integration, iterative least-squares with a free boundary on arbitrary
masks, and spectral Poisson solvers under periodic / Dirichlet / Neumann
boundary conditions -- plus camera-model conversions, synthetic evaluation
surfaces and metrics.
"""

from . import bench, camera, io, metrics, pathint, poisson, spectral, synth, transforms
from .camera import CameraModel, NormalField, depth_to_points, log_depth_to_depth, normals_to_gradient
from .errors import (
    ConfigurationError,
    DataError,
    FileFormatError,
    GradkitError,
    UnsupportedDomainError,
)
from .grids import (
    NOT_A_VALUE,
    DomainMask,
    GradientField,
    PixelClass,
    ScalarGrid,
    central_divergence,
    classify_pixel,
    discrete_laplacian,
    fd_gradient,
)
from .metrics import e_int, rmse_offset_aligned, rmse_scale_aligned, stencil_residual
from .pathint import integrate_multipath, integrate_path
from .poisson import (
    PoissonSystem,
    SolveReport,
    SolverConfig,
    assemble_system,
    energy_f_l2,
    sor_omega_hint,
)
from .spectral import (
    BoundarySpec,
    SpectrumGrid,
    natural_neumann_values,
    poisson_spectrum,
    solve_fc,
    solve_scs_dirichlet,
    solve_scs_neumann,
    solve_scs_periodic,
)
from .synth import SyntheticSurface, add_noise, make_harmonic, make_surface

__version__ = "0.1.0"
