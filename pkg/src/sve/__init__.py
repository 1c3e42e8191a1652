#
# MIT License
#
# Copyright (c) 2024 nbiotcloud
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
#

"""Graded Mesh Solvers for Stochastic Volterra Equations."""

from pydantic import ValidationError

from .config import ExperimentConfig
from .exceptions import (
    DimensionError,
    FailedPathsError,
    IndexOutOfRangeError,
    InvalidParameterError,
    ModeError,
    NonFiniteStateError,
    NumericalError,
    QuadratureError,
    SOEBuildError,
    SVEError,
)
from .harness import (
    BenchReport,
    ErrorReport,
    LevelError,
    ProbePair,
    RegularityReport,
    TheoreticalOrders,
    bench_cpu,
    default_probe_pairs,
    fit_order,
    regularity_probe,
    run_convergence,
    theoretical_orders,
)
from .mesh import (
    GradedMesh,
    build_mesh,
    diffusion_coeff,
    diffusion_coeffs,
    drift_weight,
    drift_weights,
    exp_drift_weight,
    exp_drift_weights,
)
from .noise import BrownianPath, coarsen, coarsen_increments, nested_path, path_seed, sample_path, sample_paths
from .problem import PRESETS, SVEProblem, example41, get_problem, linear
from .schemes import Trajectory, em_solve, fast_em_solve, milstein_solve, quadrature_oracle, solve
from .soe import SOEApprox, build_soe, eval_soe, get_soe, read_soe_csv, verify_soe, write_soe_csv

__all__ = [
    "bench_cpu",
    "BenchReport",
    "BrownianPath",
    "build_mesh",
    "build_soe",
    "coarsen_increments",
    "coarsen",
    "default_probe_pairs",
    "diffusion_coeff",
    "diffusion_coeffs",
    "DimensionError",
    "drift_weight",
    "drift_weights",
    "em_solve",
    "ErrorReport",
    "eval_soe",
    "example41",
    "exp_drift_weight",
    "exp_drift_weights",
    "ExperimentConfig",
    "FailedPathsError",
    "fast_em_solve",
    "fit_order",
    "get_problem",
    "get_soe",
    "GradedMesh",
    "IndexOutOfRangeError",
    "InvalidParameterError",
    "LevelError",
    "linear",
    "milstein_solve",
    "ModeError",
    "nested_path",
    "NonFiniteStateError",
    "NumericalError",
    "path_seed",
    "PRESETS",
    "ProbePair",
    "quadrature_oracle",
    "QuadratureError",
    "read_soe_csv",
    "regularity_probe",
    "RegularityReport",
    "run_convergence",
    "sample_path",
    "sample_paths",
    "SOEApprox",
    "SOEBuildError",
    "solve",
    "SVEError",
    "SVEProblem",
    "TheoreticalOrders",
    "theoretical_orders",
    "Trajectory",
    "ValidationError",
    "verify_soe",
    "write_soe_csv",
]
