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
Stochastic Volterra Equations.

A problem describes

    x(t) = x0 + int_0^t (t-s)^(-alpha) f(x(s)) ds + int_0^t (t-s)^(-beta) g(x(s)) dW(s)

with a `d`-dimensional state and `m`-dimensional Brownian motion `W`.

Coefficients are vectorized over leading axes:

* `f(x)` maps `(..., d)` to `(..., d)`.
* `g(x)` maps `(..., d)` to `(..., d, m)`.
* `g_prime(x)` maps `(..., d)` to `(..., d, m, d)` with `g_prime(x)[..., j, k, l]` the derivative
  of `g_jk` in direction `l`. Only the Milstein scheme needs it.

    >>> problem = example41(0.9, 0.1)
    >>> problem
    SVEProblem('example41', alpha=0.9, beta=0.1)
    >>> problem.f(np.array([0.0])).tolist()
    [-0.0]
    >>> problem.g(np.array([0.0])).tolist()
    [[1.0]]
"""

from collections.abc import Callable
from functools import partial
from typing import Any, ClassVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import InvalidParameterError
from .object import Field, Object, PosArgs, model_validator

Coefficient = Callable[[NDArray[np.float64]], NDArray[np.float64]]
Sampler = Callable[[np.random.Generator], ArrayLike]


class SVEProblem(Object):
    """
    Stochastic Volterra Equation.

    Attributes:
        name: Name.
        alpha: Drift Kernel Exponent in `(0, 1)`.
        beta: Diffusion Kernel Exponent in `[0, 1/2)`.
        T: Horizon.
        d: State Dimension.
        m: Noise Dimension.
        x0: Deterministic Initial State, or a sampler drawing it from a generator.
        f: Drift.
        g: Diffusion.
        g_prime: Derivative of the Diffusion.
    """

    name: str = "custom"
    alpha: float
    beta: float
    T: float = 1.0
    d: int = 1
    m: int = 1
    x0: tuple[float, ...] | Sampler = Field(repr=False)
    f: Coefficient = Field(repr=False)
    g: Coefficient = Field(repr=False)
    g_prime: Coefficient | None = Field(default=None, repr=False)

    _posargs: ClassVar[PosArgs] = ("name",)

    @model_validator(mode="after")
    def _check_parameters(self) -> "SVEProblem":
        if not 0 < self.alpha < 1:
            raise InvalidParameterError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if not 0 <= self.beta < 0.5:  # noqa: PLR2004
            raise InvalidParameterError(f"beta must be in [0, 1/2), got {self.beta!r}")
        if not self.T > 0:
            raise InvalidParameterError(f"Horizon must be positive, got {self.T!r}")
        if self.d < 1 or self.m < 1:
            raise InvalidParameterError(f"Dimensions must be positive, got d={self.d!r}, m={self.m!r}")
        if isinstance(self.x0, tuple) and len(self.x0) != self.d:
            raise InvalidParameterError(f"x0 has {len(self.x0)} entries, expected {self.d}")
        return self

    @property
    def random_x0(self) -> bool:
        """Initial State is random."""
        return not isinstance(self.x0, tuple)

    def initial_state(self, seed: int | None = None) -> NDArray[np.float64]:
        """
        Initial State, drawn from a generator keyed by the path `seed` if random.

        >>> example41(0.5, 0.0).initial_state().tolist()
        [1.0]
        """
        if isinstance(self.x0, tuple):
            return np.array(self.x0, dtype=np.float64)
        if seed is None:
            raise InvalidParameterError(f"{self}: random initial state requires a seed")
        rng = np.random.default_rng([seed, 1])
        state = np.asarray(self.x0(rng), dtype=np.float64).reshape(self.d)
        return state

    def initial_states(self, seeds: tuple[int, ...]) -> NDArray[np.float64]:
        """Initial States of a batch of paths, shape `(P, d)`."""
        if isinstance(self.x0, tuple):
            return np.broadcast_to(np.array(self.x0, dtype=np.float64), (len(seeds), self.d)).copy()
        return np.stack([self.initial_state(seed) for seed in seeds])

    def lipschitz_estimate(self, samples: int = 1000, seed: int = 0, scale: float = 1.0) -> tuple[float, float]:
        """
        Sampled local Lipschitz constants of `f` and `g` around the initial state.

        Pairs of states are drawn from a Gaussian with standard deviation `scale`.
        The result is a lower bound of the true constants, for diagnostics only.

        >>> lip_f, lip_g = example41(0.5, 0.0).lipschitz_estimate()
        >>> bool(lip_f <= 0.25 and lip_g <= 0.5)
        True
        """
        rng = np.random.default_rng(seed)
        center = self.initial_state(seed)
        y = center + scale * rng.standard_normal((samples, self.d))
        z = center + scale * rng.standard_normal((samples, self.d))
        dist = np.linalg.norm(y - z, axis=-1)
        dist = np.where(dist > 0, dist, np.inf)
        lip_f = np.linalg.norm(self.f(y) - self.f(z), axis=-1) / dist
        lip_g = np.linalg.norm((self.g(y) - self.g(z)).reshape(samples, -1), axis=-1) / dist
        return float(lip_f.max()), float(lip_g.max())


def _sin_drift(x: NDArray[np.float64], alpha: float) -> NDArray[np.float64]:
    return -(1.0 - alpha) * np.sin(x / 2.0)


def _cos_diffusion(x: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.cos(x / 2.0)[..., None]


def _cos_diffusion_prime(x: NDArray[np.float64]) -> NDArray[np.float64]:
    return -0.5 * np.sin(x / 2.0)[..., None, None]


def example41(alpha: float, beta: float) -> SVEProblem:
    """
    Scalar Test Problem `f(x) = -(1 - alpha) sin(x/2)`, `g(x) = cos(x/2)`, `x0 = 1`, `T = 1`.
    """
    return SVEProblem(
        name="example41",
        alpha=alpha,
        beta=beta,
        x0=(1.0,),
        f=partial(_sin_drift, alpha=alpha),
        g=_cos_diffusion,
        g_prime=_cos_diffusion_prime,
    )


def _affine_drift(x: NDArray[np.float64], A: NDArray[np.float64], a: NDArray[np.float64]) -> NDArray[np.float64]:
    return x @ A.T + a


def _affine_diffusion(x: NDArray[np.float64], B: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.einsum("jkl,...l->...jk", B, x) + b


def _affine_diffusion_prime(x: NDArray[np.float64], B: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.broadcast_to(B, (*x.shape[:-1], *B.shape))


def linear(
    alpha: float,
    beta: float,
    A: ArrayLike = -1.0,
    a: ArrayLike = 0.0,
    B: ArrayLike = 0.0,
    b: ArrayLike = 1.0,
    x0: ArrayLike = 1.0,
    T: float = 1.0,
) -> SVEProblem:
    """
    Linear Coefficients `f(x) = A x + a` and `g(x) = B x + b`.

    Scalars give a one-dimensional problem. Otherwise `A` is `(d, d)`, `a` is `(d,)`,
    `B` is `(d, m, d)` and `b` is `(d, m)`.

    >>> problem = linear(0.5, 0.0, A=2.0, a=1.0)
    >>> problem.f(np.array([3.0])).tolist()
    [7.0]
    >>> problem.g(np.array([[3.0], [4.0]])).tolist()
    [[[1.0]], [[1.0]]]
    """
    b_arr = np.asarray(b, dtype=np.float64)
    if b_arr.ndim == 0:
        d, m = 1, 1
    elif b_arr.ndim == 2:  # noqa: PLR2004
        d, m = b_arr.shape
    else:
        raise InvalidParameterError(f"b must be scalar or (d, m), got shape {b_arr.shape}")
    try:
        A_arr = np.broadcast_to(np.asarray(A, dtype=np.float64), (d, d)).copy()
        a_arr = np.broadcast_to(np.asarray(a, dtype=np.float64), (d,)).copy()
        B_arr = np.broadcast_to(np.asarray(B, dtype=np.float64), (d, m, d)).copy()
        b_arr = np.broadcast_to(b_arr, (d, m)).copy()
        x0_arr = np.broadcast_to(np.asarray(x0, dtype=np.float64), (d,))
    except ValueError as exc:
        raise InvalidParameterError(f"Inconsistent linear coefficients: {exc}") from None
    return SVEProblem(
        name="linear",
        alpha=alpha,
        beta=beta,
        T=float(T),
        d=d,
        m=m,
        x0=tuple(float(value) for value in x0_arr),
        f=partial(_affine_drift, A=A_arr, a=a_arr),
        g=partial(_affine_diffusion, B=B_arr, b=b_arr),
        g_prime=partial(_affine_diffusion_prime, B=B_arr),
    )


PRESETS: dict[str, Callable[..., SVEProblem]] = {
    "example41": example41,
    "linear": linear,
}
"""Problem Presets."""


def get_problem(preset: str, alpha: float, beta: float, **coefs: Any) -> SVEProblem:
    """
    Create Problem from Preset.

    Args:
        preset: Preset Name.
        alpha: Drift Kernel Exponent.
        beta: Diffusion Kernel Exponent.
        coefs: Additional Coefficients of the preset.

    >>> get_problem("linear", 0.5, 0.1, A=-2.0)
    SVEProblem('linear', alpha=0.5, beta=0.1)
    >>> get_problem("other", 0.5, 0.1)
    Traceback (most recent call last):
      ...
    sve.exceptions.InvalidParameterError: Unknown preset 'other'. Known are: 'example41', 'linear'
    """
    try:
        factory = PRESETS[preset]
    except KeyError:
        known = ", ".join(repr(name) for name in PRESETS)
        raise InvalidParameterError(f"Unknown preset {preset!r}. Known are: {known}") from None
    try:
        return factory(alpha, beta, **coefs)
    except TypeError:
        raise InvalidParameterError(f"Preset {preset!r} does not take {', '.join(coefs)}") from None
