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
Time Stepping Schemes.

All schemes take the problem, the mesh and Brownian increments aligned with the mesh.
Increments are either one path `(N, m)` or a batch `(..., N, m)`, the batch is solved in one
vectorized pass. The states of the returned [Trajectory][sve.schemes.Trajectory] have the
shape `(N + 1, d)` or `(..., N + 1, d)` respectively.

    >>> from sve.mesh import build_mesh
    >>> from sve.noise import sample_path
    >>> from sve.problem import example41
    >>> problem = example41(0.9, 0.1)
    >>> mesh = build_mesh(1.0, 16, 2)
    >>> path = sample_path(mesh, 1, seed=7)
    >>> em = em_solve(problem, mesh, path.increments)
    >>> em.states.shape
    (17, 1)
    >>> fast = fast_em_solve(problem, mesh, path.increments, eps=1e-8)
    >>> bool(np.abs(em.states - fast.states).max() < 1e-6)
    True
"""

import time
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad

from .consts import MilsteinMode, Scheme
from .exceptions import DimensionError, InvalidParameterError, ModeError, NonFiniteStateError, QuadratureError
from .mesh import GradedMesh, build_mesh, drift_weights, exp_drift_weights
from .noise import BrownianPath, coarsen_increments
from .object import Field, Object
from .problem import SVEProblem
from .soe import get_soe


class Trajectory(Object):
    """
    Numerical Solution.

    Attributes:
        mesh: Mesh.
        states: States `X_0, ..., X_N`.
        scheme: Scheme.
        wall_time: Wall Clock Time of the solve in seconds.
    """

    mesh: GradedMesh
    states: NDArray[np.float64] = Field(repr=False)
    scheme: Scheme
    wall_time: float = 0.0

    @property
    def final(self) -> NDArray[np.float64]:
        """State at the horizon."""
        return self.states[..., -1, :]


@dataclass
class _Batch:
    """Time-major working arrays of a batched solve."""

    dW: NDArray[np.float64]  # (N, P, m)
    x0: NDArray[np.float64]  # (P, d)
    shape: tuple[int, ...]

    def states(self, states: NDArray[np.float64]) -> NDArray[np.float64]:
        """Convert time-major `(N + 1, P, d)` states back to `(..., N + 1, d)`."""
        steps, _, d = states.shape
        return np.moveaxis(states, 0, 1).reshape(*self.shape, steps, d)


def _prepare(problem: SVEProblem, mesh: GradedMesh, increments: ArrayLike, x0: ArrayLike | None) -> _Batch:
    inc = np.asarray(increments, dtype=np.float64)
    if inc.ndim < 2 or inc.shape[-2:] != (mesh.N, problem.m):  # noqa: PLR2004
        raise DimensionError(f"Increments of shape {inc.shape} do not match (..., {mesh.N}, {problem.m})")
    if mesh.T != problem.T:
        raise InvalidParameterError(f"Mesh horizon {mesh.T!r} differs from problem horizon {problem.T!r}")
    shape = inc.shape[:-2]
    paths = int(np.prod(shape, dtype=np.int64))
    dW = np.ascontiguousarray(np.moveaxis(inc.reshape(paths, mesh.N, problem.m), 1, 0))
    if x0 is None:
        if problem.random_x0:
            raise InvalidParameterError(f"{problem}: random initial state requires explicit x0")
        x0 = problem.initial_state()
    try:
        init = np.broadcast_to(np.asarray(x0, dtype=np.float64), (*shape, problem.d)).reshape(paths, problem.d)
    except ValueError:
        raise DimensionError(f"Initial state does not match (..., {problem.d})") from None
    return _Batch(dW=dW, x0=init, shape=shape)


def _check_finite(step: int, state: NDArray[np.float64]):
    bad = ~np.isfinite(state).all(axis=-1)
    if bad.any():
        raise NonFiniteStateError(step, tuple(int(idx) for idx in np.flatnonzero(bad)))


def _apply(g: NDArray[np.float64], dW: NDArray[np.float64]) -> NDArray[np.float64]:
    """`g @ dW` for `g` of shape `(P, d, m)` and `dW` of shape `(P, m)`."""
    return np.einsum("pjk,pk->pj", g, dW)


def em_solve(
    problem: SVEProblem, mesh: GradedMesh, increments: ArrayLike, x0: ArrayLike | None = None
) -> Trajectory:
    """
    Euler-Maruyama Scheme.

    `X_n = x0 + sum_i w_{n,i} f(X_i) + sum_i (t_n - t_i)^(-beta) g(X_i) dW_{i+1}` with the exact
    drift weights of [drift_weights][sve.mesh.drift_weights]. The full history is kept, a solve
    costs `O(N^2)`.

    Args:
        problem: Problem.
        mesh: Mesh.
        increments: Brownian Increments `(..., N, m)`.
        x0: Initial States `(..., d)`, overriding the deterministic initial state of `problem`.

    Raises:
        DimensionError: on mismatching shapes.
        NonFiniteStateError: on overflow.
    """
    start = time.perf_counter()
    batch = _prepare(problem, mesh, increments, x0)
    N, points = mesh.N, mesh.points
    paths = batch.x0.shape[0]
    states = np.empty((N + 1, paths, problem.d))
    drifts = np.empty((N, paths, problem.d))
    noises = np.empty((N, paths, problem.d))
    states[0] = batch.x0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for n in range(1, N + 1):
            prev = states[n - 1]
            drifts[n - 1] = problem.f(prev)
            noises[n - 1] = _apply(problem.g(prev), batch.dW[n - 1])
            weights = drift_weights(mesh, n, problem.alpha)
            state = batch.x0 + np.tensordot(weights, drifts[:n], axes=1)
            if problem.beta:
                coeffs = (points[n] - points[:n]) ** -problem.beta
                state += np.tensordot(coeffs, noises[:n], axes=1)
            else:
                state += noises[:n].sum(axis=0)
            _check_finite(n, state)
            states[n] = state
    return Trajectory(mesh=mesh, states=batch.states(states), scheme="em", wall_time=time.perf_counter() - start)


def fast_em_solve(
    problem: SVEProblem,
    mesh: GradedMesh,
    increments: ArrayLike,
    eps: float,
    delta: float | None = None,
    cache: bool = True,
    x0: ArrayLike | None = None,
) -> Trajectory:
    """
    Fast Euler-Maruyama Scheme.

    The history sums of [em_solve][sve.schemes.em_solve] beyond the last step are replaced by
    sum-of-exponentials approximations of both kernels. Every exponential carries a running
    history which is updated by one decay factor and one local contribution per step, so a
    solve costs `O(N K)` for `K` exponentials. The first step equals the EM step.

    For `beta = 0` the diffusion kernel is constant and represented exactly by the single
    term `tau = 0`, `omega = 1`.

    Args:
        problem: Problem.
        mesh: Mesh.
        increments: Brownian Increments `(..., N, m)`.
        eps: Tolerance of the approximations.
        delta: Lower end of the approximated interval. Defaults to `h_1`.
        cache: Use the disk cache for the approximations.
        x0: Initial States `(..., d)`.

    Raises:
        DimensionError: on mismatching shapes.
        NonFiniteStateError: on overflow.
        SOEBuildError: if no approximation can be certified.
    """
    start = time.perf_counter()
    batch = _prepare(problem, mesh, increments, x0)
    N, points, steps = mesh.N, mesh.points, mesh.steps
    alpha, beta = problem.alpha, problem.beta
    delta = float(steps[0]) if delta is None else float(delta)
    soe_alpha = get_soe(alpha, delta, mesh.T, float(eps), cache=cache)
    tau_a, omega_a = soe_alpha.nodes, soe_alpha.weights
    if beta:
        soe_beta = get_soe(beta, delta, mesh.T, float(eps), cache=cache)
        tau_b, omega_b = soe_beta.nodes, soe_beta.weights
    else:
        tau_b, omega_b = np.zeros(1), np.ones(1)

    paths = batch.x0.shape[0]
    states = np.empty((N + 1, paths, problem.d))
    states[0] = batch.x0
    hist_a = np.zeros((len(tau_a), paths, problem.d))
    hist_b = np.zeros((len(tau_b), paths, problem.d))
    drift_prev = noise_prev = None
    p = 1.0 - alpha
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for n in range(1, N + 1):
            h = steps[n - 1]
            prev = states[n - 1]
            drift = problem.f(prev)
            noise = _apply(problem.g(prev), batch.dW[n - 1])
            if n >= 2:  # noqa: PLR2004
                local = exp_drift_weights(tau_a, points[n], points[n - 2], points[n - 1])
                hist_a = np.exp(-tau_a * h)[:, None, None] * hist_a + local[:, None, None] * drift_prev
                decay = np.exp(-tau_b * (points[n] - points[n - 2]))
                hist_b = np.exp(-tau_b * h)[:, None, None] * hist_b + decay[:, None, None] * noise_prev
            state = (
                batch.x0
                + np.tensordot(omega_a, hist_a, axes=1)
                + (h**p / p) * drift
                + np.tensordot(omega_b, hist_b, axes=1)
                + h**-beta * noise
            )
            _check_finite(n, state)
            states[n] = state
            drift_prev, noise_prev = drift, noise
    return Trajectory(
        mesh=mesh, states=batch.states(states), scheme="fast_em", wall_time=time.perf_counter() - start
    )


def milstein_solve(
    problem: SVEProblem,
    mesh: GradedMesh,
    increments: ArrayLike,
    mode: MilsteinMode = "exact",
    k_inner: int | None = None,
    fine_path: BrownianPath | ArrayLike | None = None,
    x0: ArrayLike | None = None,
) -> Trajectory:
    """
    Milstein Scheme.

    Modes:

    * `exact`: For `beta = 0` and scalar noise the iterated stochastic integral of each step is
      `(dW^2 - h) / 2`, the kernel difference terms vanish. Cost `O(N^2)`.
    * `subsampled`: All stochastic integrals including the kernel-weighted iterated integrals are
      evaluated as left-point Riemann-Ito sums on a sub-grid with `k_inner` fine steps per step.
      The fine increments come from `fine_path`, which must live on the nested mesh with
      `N * k_inner` steps. This is a reference oracle with cost `O((N k_inner)^2)`.

    Args:
        problem: Problem. Requires `g_prime`.
        mesh: Mesh.
        increments: Brownian Increments `(..., N, m)`.
        mode: `exact` or `subsampled`.
        k_inner: Fine steps per step. Derived from `fine_path` if omitted.
        fine_path: Fine Brownian increments `(..., N * k_inner, m)` for `subsampled`.
        x0: Initial States `(..., d)`.

    Raises:
        ModeError: if the mode does not fit the problem.
        DimensionError: on mismatching shapes.
        NonFiniteStateError: on overflow.
    """
    if problem.g_prime is None:
        raise ModeError(f"{problem}: Milstein scheme requires g_prime")
    if mode == "exact":
        if problem.beta != 0 or problem.m != 1:
            raise ModeError(f"{problem}: exact Milstein mode requires beta = 0 and m = 1")
        return _milstein_exact(problem, mesh, increments, x0)
    if mode == "subsampled":
        if fine_path is None:
            raise ModeError("Subsampled Milstein mode requires a fine path")
        fine = fine_path.increments if isinstance(fine_path, BrownianPath) else np.asarray(fine_path, dtype=np.float64)
        if fine.ndim < 2 or fine.shape[-2] % mesh.N:  # noqa: PLR2004
            raise DimensionError(f"Fine increments of shape {fine.shape} do not refine {mesh}")
        if k_inner is None:
            k_inner = fine.shape[-2] // mesh.N
        if fine.shape[-2] != mesh.N * k_inner:
            raise DimensionError(f"Fine path has {fine.shape[-2]} steps, expected {mesh.N * k_inner}")
        batch = _prepare(problem, mesh, increments, x0)
        coarse = coarsen_increments(fine, k_inner)
        if not np.allclose(coarse.reshape(batch.dW.shape[1], mesh.N, problem.m), np.moveaxis(batch.dW, 0, 1)):
            raise DimensionError("Fine path does not refine the increments")
        return _milstein_subsampled(problem, mesh, fine, k_inner, x0)
    raise ModeError(f"Unknown Milstein mode {mode!r}")


def _milstein_exact(problem: SVEProblem, mesh: GradedMesh, increments: ArrayLike, x0: ArrayLike | None) -> Trajectory:
    start = time.perf_counter()
    batch = _prepare(problem, mesh, increments, x0)
    N, steps = mesh.N, mesh.steps
    paths = batch.x0.shape[0]
    states = np.empty((N + 1, paths, problem.d))
    drifts = np.empty((N, paths, problem.d))
    noise_sum = np.zeros((paths, problem.d))
    states[0] = batch.x0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for n in range(1, N + 1):
            prev = states[n - 1]
            dW = batch.dW[n - 1]
            g = problem.g(prev)
            correction = np.einsum("pjkl,plk->pj", problem.g_prime(prev), g)
            iterated = 0.5 * (dW[:, 0] ** 2 - steps[n - 1])
            drifts[n - 1] = problem.f(prev)
            noise_sum = noise_sum + _apply(g, dW) + correction * iterated[:, None]
            weights = drift_weights(mesh, n, problem.alpha)
            state = batch.x0 + np.tensordot(weights, drifts[:n], axes=1) + noise_sum
            _check_finite(n, state)
            states[n] = state
    return Trajectory(mesh=mesh, states=batch.states(states), scheme="milstein", wall_time=time.perf_counter() - start)


def _milstein_subsampled(
    problem: SVEProblem, mesh: GradedMesh, fine: NDArray[np.float64], k_inner: int, x0: ArrayLike | None
) -> Trajectory:
    start = time.perf_counter()
    fine_mesh = build_mesh(mesh.T, mesh.N * k_inner, mesh.r)
    batch = _prepare(problem, fine_mesh, fine, x0)
    N, beta = mesh.N, problem.beta
    u = fine_mesh.points
    paths = batch.x0.shape[0]
    states = np.empty((N + 1, paths, problem.d))
    drifts = np.empty((N, paths, problem.d))
    # fine contributions g(Y_i) dW_{p+1} and Milstein-corrected D_p
    plain = np.empty((N * k_inner, paths, problem.d))
    corrected = np.empty((N * k_inner, paths, problem.d))
    states[0] = batch.x0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for i in range(N):
            prev = states[i]
            g = problem.g(prev)
            gp = problem.g_prime(prev)
            drifts[i] = problem.f(prev)
            lo, hi = i * k_inner, (i + 1) * k_inner
            for q in range(lo, hi):
                plain[q] = _apply(g, batch.dW[q])
            inner_start = _inner(u, plain, lo, beta)
            for q in range(lo, hi):
                inner = _inner(u, plain, q, beta) - inner_start
                dW = batch.dW[q]
                corrected[q] = plain[q] + np.einsum("pjkl,pl,pk->pj", gp, inner, dW)
            coeffs = (u[hi] - u[:hi]) ** -beta if beta else np.ones(hi)
            weights = drift_weights(mesh, i + 1, problem.alpha)
            state = (
                batch.x0
                + np.tensordot(weights, drifts[: i + 1], axes=1)
                + np.tensordot(coeffs, corrected[:hi], axes=1)
            )
            _check_finite(i + 1, state)
            states[i + 1] = state
    return Trajectory(mesh=mesh, states=batch.states(states), scheme="milstein", wall_time=time.perf_counter() - start)


def _inner(u: NDArray[np.float64], plain: NDArray[np.float64], q: int, beta: float) -> NDArray[np.float64]:
    """`sum_{j < q} (u_q - u_j)^(-beta) plain_j`."""
    if not q:
        return np.zeros(plain.shape[1:])
    if beta:
        return np.tensordot((u[q] - u[:q]) ** -beta, plain[:q], axes=1)
    return plain[:q].sum(axis=0)


def solve(
    scheme: Scheme,
    problem: SVEProblem,
    mesh: GradedMesh,
    increments: ArrayLike,
    eps: float | None = None,
    mode: MilsteinMode = "exact",
    fine_path: ArrayLike | None = None,
    x0: ArrayLike | None = None,
    cache: bool = True,
) -> Trajectory:
    """Dispatch to the solver of `scheme`."""
    if scheme == "em":
        return em_solve(problem, mesh, increments, x0=x0)
    if scheme == "fast_em":
        if eps is None:
            raise InvalidParameterError("Fast EM requires eps")
        return fast_em_solve(problem, mesh, increments, eps, cache=cache, x0=x0)
    if scheme == "milstein":
        return milstein_solve(problem, mesh, increments, mode=mode, fine_path=fine_path, x0=x0)
    raise InvalidParameterError(f"Unknown scheme {scheme!r}")


def quadrature_oracle(exponent: float, a: float, b: float, t_n: float) -> float:
    """
    Adaptive Quadrature of `(t_n - s)^(-exponent)` over `[a, b]`.

    The endpoint singularity at `t_n` is handled by algebraic weight functions of QUADPACK.

    >>> round(quadrature_oracle(0.5, 0.0, 4.0, 4.0), 12)
    4.0

    Raises:
        InvalidParameterError: unless `a < b <= t_n` and `0 <= exponent < 1`.
        QuadratureError: if the quadrature does not converge.
    """
    if not a < b <= t_n:
        raise InvalidParameterError(f"Require a < b <= t_n, got {a!r}, {b!r}, {t_n!r}")
    if not 0 <= exponent < 1:
        raise InvalidParameterError(f"Exponent must be in [0, 1), got {exponent!r}")
    if t_n - b <= b - a:
        value = _singular(exponent, a, t_n)
        if t_n > b:
            value -= _singular(exponent, b, t_n)
        return value
    return _quad(lambda s: (t_n - s) ** -exponent, a, b)


def _singular(exponent: float, a: float, t_n: float) -> float:
    return _quad(lambda s: 1.0, a, t_n, weight="alg", wvar=(0.0, -exponent))


def _quad(func, a: float, b: float, **kwargs) -> float:
    result = quad(func, a, b, epsabs=0.0, epsrel=1e-12, limit=200, full_output=1, **kwargs)
    if len(result) > 3:  # noqa: PLR2004
        raise QuadratureError(f"Quadrature on [{a!r}, {b!r}] did not converge: {result[3]}")
    return float(result[0])
