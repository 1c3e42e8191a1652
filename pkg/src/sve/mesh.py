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

"""
Graded Meshes and Singular Kernel Weights.

A graded mesh on `[0, T]` has the nodes `t_n = T (n/N)^r`.
The grading exponent `r >= 1` clusters nodes near the origin, where the solution of a
stochastic Volterra equation is least regular.

    >>> mesh = build_mesh(10, 10, 2)
    >>> mesh
    GradedMesh(10.0, 10, 2.0)
    >>> float(mesh.points[5]), float(mesh.points[10])
    (2.5, 10.0)
    >>> round(float(mesh.points[1]), 12)
    0.1
    >>> bool(np.allclose(build_mesh(10, 10, 1).steps, 1.0))
    True

Meshes are cached, building the same mesh twice returns the identical object:

    >>> build_mesh(10, 10, 2) is mesh
    True

Nodes are computed as `T * (n / N) ** r`. As `n / N` is a correctly rounded division,
nested meshes share bit-identical nodes:

    >>> fine = build_mesh(1, 12, 2.5)
    >>> coarse = fine.nested(4)
    >>> bool((coarse.points == fine.points[::3]).all())
    True

The kernel weights integrate the singular kernels exactly over each mesh interval:

    >>> float(drift_weight(build_mesh(1, 1, 1), 1, 0, 0.5))
    2.0
    >>> float(diffusion_coeff(build_mesh(1, 4, 1), 4, 0, 0.1))
    1.0
"""

from typing import ClassVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import IndexOutOfRangeError, InvalidParameterError
from .object import Field, LightObject, PosArgs, PrivateField

TAYLOR_LIMIT = 1e-8


class GradedMesh(LightObject):
    """
    Graded Mesh.

    Attributes:
        T: Horizon.
        N: Number of Steps.
        r: Grading Exponent.

    Use [build_mesh][sve.mesh.build_mesh] for validated construction.
    """

    T: float = Field(gt=0)
    N: int = Field(ge=1)
    r: float = Field(ge=1)

    _posargs: ClassVar[PosArgs] = ("T", "N", "r")
    _points: NDArray[np.float64] = PrivateField()
    _steps: NDArray[np.float64] = PrivateField()

    def model_post_init(self, __context) -> None:
        points = self.T * (np.arange(self.N + 1) / self.N) ** self.r
        steps = np.diff(points)
        points.flags.writeable = False
        steps.flags.writeable = False
        self._points = points
        self._steps = steps

    @property
    def points(self) -> NDArray[np.float64]:
        """Nodes `t_0, ..., t_N`."""
        return self._points

    @property
    def steps(self) -> NDArray[np.float64]:
        """Step Sizes `h_1, ..., h_N`, stored at index `0, ..., N-1`."""
        return self._steps

    def step(self, n: int) -> float:
        """
        Step Size `h_n` for `1 <= n <= N`.

        >>> build_mesh(1, 4, 2).step(2)
        0.1875
        """
        if not 1 <= n <= self.N:
            raise IndexOutOfRangeError(f"Step index {n} not in [1, {self.N}]")
        return float(self._steps[n - 1])

    def nested(self, N: int) -> "GradedMesh":
        """
        Coarser Mesh with `N` steps, whose nodes coincide with every `self.N // N`-th node.

        Raises:
            InvalidParameterError: if `N` does not divide the number of steps.
        """
        if N < 1 or self.N % N:
            raise InvalidParameterError(f"{N} steps do not nest into {self.N} steps")
        return build_mesh(self.T, N, self.r)

    def index_of(self, t: float) -> int:
        """
        Index of node `t`.

        >>> build_mesh(10, 10, 2).index_of(2.5)
        5
        """
        idx = int(np.searchsorted(self._points, t))
        if idx > self.N or self._points[idx] != t:
            raise InvalidParameterError(f"{t!r} is not a node of {self}")
        return idx


def build_mesh(T: float, N: int, r: float) -> GradedMesh:
    """
    Build Graded Mesh `t_n = T (n/N)^r`.

    Args:
        T: Horizon, positive.
        N: Number of Steps, positive.
        r: Grading Exponent, at least 1.

    Raises:
        InvalidParameterError: on invalid arguments.
    """
    if not T > 0 or not np.isfinite(T):
        raise InvalidParameterError(f"Horizon must be positive and finite, got {T!r}")
    if int(N) != N or N < 1:
        raise InvalidParameterError(f"Number of steps must be a positive integer, got {N!r}")
    if not r >= 1 or not np.isfinite(r):
        raise InvalidParameterError(f"Grading exponent must be at least 1, got {r!r}")
    return GradedMesh(T=float(T), N=int(N), r=float(r))


def _check_indices(mesh: GradedMesh, n: int, i: int | None = None):
    if not 1 <= n <= mesh.N:
        raise IndexOutOfRangeError(f"n={n} not in [1, {mesh.N}]")
    if i is not None and not 0 <= i < n:
        raise IndexOutOfRangeError(f"i={i} not in [0, {n})")


def _check_alpha(alpha: float):
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must be in (0, 1), got {alpha!r}")


def _check_beta(beta: float):
    if not 0 <= beta < 0.5:  # noqa: PLR2004
        raise InvalidParameterError(f"beta must be in [0, 1/2), got {beta!r}")


def drift_weights(mesh: GradedMesh, n: int, alpha: float) -> NDArray[np.float64]:
    """
    Drift Weights `w_{n,i}` for `i = 0, ..., n-1`.

    `w_{n,i}` is the integral of `(t_n - s)^(-alpha)` over `[t_i, t_{i+1}]`.
    With `b = t_n - t_{i+1}`, `h = h_{i+1}` and `p = 1 - alpha` it is evaluated as
    `b^p expm1(p log1p(h/b)) / p`, which does not cancel for `i` far below `n`.

    >>> mesh = build_mesh(1, 4, 1)
    >>> w = drift_weights(mesh, 4, 0.5)
    >>> round(float(w.sum()), 14)
    2.0
    """
    _check_indices(mesh, n)
    _check_alpha(alpha)
    points = mesh.points
    p = 1.0 - alpha
    b = points[n] - points[1 : n + 1]
    h = mesh.steps[:n]
    last = b <= 0
    safe = np.where(last, 1.0, b)
    weights = safe**p * np.expm1(p * np.log1p(h / safe)) / p
    weights[last] = h[last] ** p / p
    return weights


def drift_weight(mesh: GradedMesh, n: int, i: int, alpha: float) -> float:
    """
    Drift Weight: integral of `(t_n - s)^(-alpha)` over `[t_i, t_{i+1}]`.

    Raises:
        IndexOutOfRangeError: unless `0 <= i < n <= N`.
        InvalidParameterError: unless `0 < alpha < 1`.
    """
    _check_indices(mesh, n, i)
    return float(drift_weights(mesh, n, alpha)[i])


def diffusion_coeffs(mesh: GradedMesh, n: int, beta: float) -> NDArray[np.float64]:
    """Diffusion Coefficients `(t_n - t_i)^(-beta)` for `i = 0, ..., n-1`."""
    _check_indices(mesh, n)
    _check_beta(beta)
    if beta == 0:
        return np.ones(n)
    points = mesh.points
    return (points[n] - points[:n]) ** -beta


def diffusion_coeff(mesh: GradedMesh, n: int, i: int, beta: float) -> float:
    """
    Diffusion Coefficient `(t_n - t_i)^(-beta)`.

    Raises:
        IndexOutOfRangeError: unless `0 <= i < n <= N`.
        InvalidParameterError: unless `0 <= beta < 1/2`.
    """
    _check_indices(mesh, n, i)
    return float(diffusion_coeffs(mesh, n, beta)[i])


def exp_drift_weights(taus: ArrayLike, t_n: float, t_a: float, t_b: float) -> NDArray[np.float64]:
    """
    Integral of `exp(-tau (t_n - s))` over `[t_a, t_b]`, for every decay rate in `taus`.

    >>> exp_drift_weights([0.0, 2.0], 1.0, 0.0, 0.5).round(12).tolist()
    [0.5, 0.116272078967]
    """
    if not t_a < t_b <= t_n:
        raise InvalidParameterError(f"Require t_a < t_b <= t_n, got {t_a!r}, {t_b!r}, {t_n!r}")
    taus = np.asarray(taus, dtype=np.float64)
    if (taus < 0).any():
        raise InvalidParameterError("Decay rates must be non-negative")
    delta = t_b - t_a
    x = taus * delta
    decay = np.exp(-taus * (t_n - t_b))
    small = x <= TAYLOR_LIMIT
    safe = np.where(small, 1.0, taus)
    return np.where(small, delta * decay * (1.0 - 0.5 * x), decay * -np.expm1(-x) / safe)


def exp_drift_weight(tau: float, t_n: float, t_a: float, t_b: float) -> float:
    """
    Integral of `exp(-tau (t_n - s))` over `[t_a, t_b]`.

    >>> exp_drift_weight(0.0, 1.0, 0.25, 0.75)
    0.5
    >>> exp_drift_weight(1e6, 1.0, 0.0, 0.5)
    0.0

    Raises:
        InvalidParameterError: unless `t_a < t_b <= t_n` and `tau >= 0`.
    """
    return float(exp_drift_weights(tau, t_n, t_a, t_b)[()])
