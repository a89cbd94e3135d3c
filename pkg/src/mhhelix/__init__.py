"""Mardia-Holmes shell distributions and maximum-likelihood helix axis estimation."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("mhhelix")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .kernels import BACKEND
from .errors import (BenchmarkError, ConvergenceError, DegenerateInputError, DomainError,
                     InitializationError, InputError, MHError, ParseError)
from .specfun import QuadratureSpec, b_kappa, pcf_U, std_normal_cdf
from .optim import OptOptions, OptResult, minimize
from .geometry import (HelixParams, PointCloud, angle_between_axes, frame_from_axis,
                       helix_point, simulate_helix, stereographic_to_axis)
from .mh2d import (MHCircleParams, MHEllipseParams, MHFit, fit_circle, fit_ellipse,
                   init_circle, mh_log_norm_const, mh_logpdf)
from .axisfit import (AxisFit, HelixFit, estimate_axis_mh, init_axis_pca, mll_given_axis,
                      optls_fit, project_to_plane)
from .mvmh import MvMHFit, MvMHParams, mvmh_fit, mvmh_logpdf
from .simlab import BenchConfig, BenchRow, mse_axis, run_benchmark

__all__ = [
    "BACKEND", "__version__",
    "MHError", "DomainError", "InputError", "DegenerateInputError", "ParseError",
    "ConvergenceError", "InitializationError", "BenchmarkError",
    "QuadratureSpec", "std_normal_cdf", "pcf_U", "b_kappa",
    "OptOptions", "OptResult", "minimize",
    "HelixParams", "PointCloud", "helix_point", "simulate_helix", "frame_from_axis",
    "stereographic_to_axis", "angle_between_axes",
    "MHCircleParams", "MHEllipseParams", "MHFit", "mh_log_norm_const", "mh_logpdf",
    "init_circle", "fit_circle", "fit_ellipse",
    "AxisFit", "HelixFit", "project_to_plane", "mll_given_axis", "init_axis_pca",
    "estimate_axis_mh", "optls_fit",
    "MvMHParams", "MvMHFit", "mvmh_logpdf", "mvmh_fit",
    "BenchConfig", "BenchRow", "mse_axis", "run_benchmark",
]
