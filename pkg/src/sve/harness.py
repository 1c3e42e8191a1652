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
Monte Carlo Experiments.

* [run_convergence][sve.harness.run_convergence] measures strong errors against a fine reference
  solution driven by the same Brownian paths and fits convergence orders.
* [bench_cpu][sve.harness.bench_cpu] compares the run time of EM and fast EM.
* [regularity_probe][sve.harness.regularity_probe] estimates the Hoelder regularity of the
  solution in the interior and near the origin.

Paths are processed in chunks of fixed size on a thread pool. Chunk results are reduced in
chunk order, so results do not depend on the number of workers.
"""

import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from threadpoolctl import threadpool_limits

from .config import ExperimentConfig
from .consts import CHUNK_SIZE, MAX_FAILED_FRACTION, ORIGIN_STEPS, ORIGIN_WINDOW, Scheme
from .exceptions import FailedPathsError, InvalidParameterError, NonFiniteStateError
from .logging import LOGGER
from .mesh import GradedMesh, build_mesh
from .noise import coarsen_increments, path_seed, sample_paths
from .object import Object
from .problem import SVEProblem
from .schemes import Trajectory, em_solve, milstein_solve, solve
from .soe import get_soe
from .util import chunked, get_maxworkers

Deviations = Callable[[Sequence[int]], tuple[NDArray[np.float64], NDArray[np.float64]]]


class LevelError(Object):
    """
    Strong Errors of one Level.

    Attributes:
        N: Number of Steps.
        err_end: Error at the horizon.
        err_max: Maximum Error over all nodes.
        stderr_end: Monte Carlo Standard Error of `err_end`.
        stderr_max: Monte Carlo Standard Error of `err_max`.
        wall_s: Accumulated Solver Wall Time.
    """

    N: int
    err_end: float
    err_max: float
    stderr_end: float
    stderr_max: float
    wall_s: float


class TheoreticalOrders(Object):
    """
    Predicted Convergence Orders.

    Attributes:
        rho: `min(1 - alpha, 1/2 - beta)`.
        sigma: `min(3/2 - alpha - beta, 1)`.
        r_em: Grading exponent for the optimal EM order.
        r_milstein: Grading exponent for the optimal Milstein order.
        order_end: Order at the horizon.
        order_max: Order uniform in time.
    """

    rho: float
    sigma: float
    r_em: float
    r_milstein: float
    order_end: float
    order_max: float


class ErrorReport(Object):
    """
    Result of a Convergence Experiment.

    Attributes:
        config: Configuration.
        reference: Scheme of the reference solution.
        rows: Errors per Level.
        order_end: Fitted Order of `err_end`.
        order_max: Fitted Order of `err_max`.
        theory: Predicted Orders.
        failed_paths: Number of excluded paths.
    """

    config: ExperimentConfig
    reference: Scheme
    rows: tuple[LevelError, ...]
    order_end: float | None = None
    order_max: float | None = None
    theory: TheoreticalOrders
    failed_paths: int = 0


class BenchRow(Object):
    """Run Time per path in seconds."""

    N: int
    em_s: float
    fast_em_s: float


class BenchReport(Object):
    """
    Run Time Comparison.

    Attributes:
        rows: Timings per Level.
        paths: Number of paths solved per timing.
        em_slope: Log-log slope of the EM run time.
        fast_em_slope: Log-log slope of the fast EM run time.
    """

    rows: tuple[BenchRow, ...]
    paths: int
    em_slope: float | None = None
    fast_em_slope: float | None = None


class ProbePair(Object):
    """Pair of reference node indices `0 < i <= j`."""

    family: str = "custom"
    i: int
    j: int


class RegularityRow(Object):
    """Estimated `L^2` distance of the solution at `s` and `t`."""

    family: str
    s: float
    t: float
    modulus: float
    stderr: float


class RegularityReport(Object):
    """
    Regularity Estimate.

    Attributes:
        rows: Moduli per node pair.
        interior_exponent: Fitted exponent in `t - s` for the `interior` family.
        origin_exponent: Fitted exponent in `s` for the `origin` family with `t = 2s`.
        paths: Number of paths used.
        n_ref: Number of Steps of the reference solution.
    """

    rows: tuple[RegularityRow, ...]
    interior_exponent: float | None = None
    origin_exponent: float | None = None
    paths: int
    n_ref: int


def theoretical_orders(scheme: Scheme, alpha: float, beta: float, r: float) -> TheoreticalOrders:
    """
    Predicted Orders for `scheme`.

    >>> theory = theoretical_orders("em", 0.9, 0.1, 1.0)
    >>> round(theory.order_end, 12), round(theory.order_max, 12)
    (0.4, 0.2)
    >>> round(theoretical_orders("em", 0.9, 0.1, 2.0).order_max, 12)
    0.4
    >>> theory = theoretical_orders("milstein", 0.9, 0.0, 1.0)
    >>> round(theory.order_end, 12), round(theory.order_max, 12), round(theory.r_milstein, 12)
    (0.6, 0.2, 3.0)
    """
    rho = min(1 - alpha, 0.5 - beta)
    sigma = min(1.5 - alpha - beta, 1.0)
    gap = 0.5 - alpha + beta + sigma
    r_em = max((0.5 - beta) / (1 - alpha + rho), 1.0)
    r_milstein = max(sigma / gap, 1.0) if gap > 0 else float("inf")
    if scheme == "milstein":
        order_end = min(1.5 - alpha - beta, 1 - 2 * beta)
        order_max = order_end if gap - sigma / r >= 0 else order_end + r * gap - sigma
    else:
        order_end = 0.5 - beta
        order_max = min(0.5 - beta, r * (1 - alpha + rho))
    return TheoreticalOrders(
        rho=rho, sigma=sigma, r_em=r_em, r_milstein=r_milstein, order_end=order_end, order_max=order_max
    )


def _slope(x: ArrayLike, y: ArrayLike) -> float:
    return float(np.polyfit(np.log(np.asarray(x, dtype=np.float64)), np.log(np.asarray(y, dtype=np.float64)), 1)[0])


def fit_order(levels: Sequence[int], errors: Sequence[float]) -> float:
    """
    Convergence Order: negated least squares slope of `log(error)` over `log(N)`.

    >>> round(fit_order([128, 256, 512], [0.4, 0.2, 0.1]), 12)
    1.0
    >>> abs(fit_order([128, 256], [0.3, 0.3])) < 1e-12
    True

    Raises:
        InvalidParameterError: on less than two levels or non-positive errors.
    """
    if len(levels) != len(errors) or len(levels) < 2:  # noqa: PLR2004
        raise InvalidParameterError(f"Need at least two levels with errors, got {len(levels)} and {len(errors)}")
    if any(not error > 0 for error in errors):
        raise InvalidParameterError(f"Errors must be positive, got {list(errors)}")
    return -_slope(levels, errors)


def reference_scheme(scheme: Scheme, problem: SVEProblem) -> Scheme:
    """
    Scheme of the reference solution.

    Milstein rows are referenced by the Milstein scheme, all others by EM. The Milstein mode of the
    reference follows the configuration: exact for `beta = 0` and scalar noise, subsampled on the
    mesh with `n_ref // k_inner` steps otherwise.
    """
    if scheme == "milstein" and problem.g_prime is not None:
        return "milstein"
    return "em"


@dataclass
class _Sums:
    """Moment sums of one chunk."""

    power: NDArray[np.float64]
    power2: NDArray[np.float64]
    walls: NDArray[np.float64]
    count: int
    failed: list[int]


def _chunk_sums(func: Deviations, indices: Sequence[int], p: float) -> _Sums:
    """Evaluate `func` on the whole chunk, or path by path if the chunk contains a failing path."""
    try:
        results = [func(indices)]
        failed: list[int] = []
    except NonFiniteStateError:
        results, failed = [], []
        for idx in indices:
            try:
                results.append(func([idx]))
            except NonFiniteStateError as exc:  # noqa: PERF203
                LOGGER.debug("path %d: %s", idx, exc)
                failed.append(idx)
    if not results:
        return _Sums(power=np.zeros(0), power2=np.zeros(0), walls=np.zeros(0), count=0, failed=failed)
    devs = np.concatenate([devs for devs, _ in results], axis=0)
    powered = devs**p
    walls = np.sum([walls for _, walls in results], axis=0)
    return _Sums(
        power=powered.sum(axis=0),
        power2=(powered**2).sum(axis=0),
        walls=walls,
        count=devs.shape[0],
        failed=failed,
    )


def _monte_carlo(
    func: Deviations, paths: int, p: float, chunk_size: int, maxworkers: int | None
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64], int]:
    """
    `L^p` norms of the deviations returned by `func` and their standard errors.

    Returns:
        Norms, Standard Errors, Wall Times and number of failed paths.
    """

    def job(chunk: range) -> _Sums:
        return _chunk_sums(func, chunk, p)

    with ThreadPoolExecutor(max_workers=maxworkers or get_maxworkers()) as executor:
        chunks = list(executor.map(job, chunked(paths, chunk_size)))

    failed = sum(len(chunk.failed) for chunk in chunks)
    if failed > MAX_FAILED_FRACTION * paths or failed == paths:
        raise FailedPathsError(f"{failed} of {paths} paths failed with non-finite states")
    if failed:
        LOGGER.warning("Excluded %d of %d paths with non-finite states", failed, paths)
    valid = [chunk for chunk in chunks if chunk.count]
    power = valid[0].power.copy()
    power2 = valid[0].power2.copy()
    walls = valid[0].walls.copy()
    for chunk in valid[1:]:
        power += chunk.power
        power2 += chunk.power2
        walls += chunk.walls
    count = paths - failed
    mean = power / count
    var = np.maximum(power2 / count - mean**2, 0.0)
    norms = mean ** (1 / p)
    with np.errstate(divide="ignore", invalid="ignore"):
        stderr = np.where(mean > 0, np.sqrt(var / count) * mean ** (1 / p - 1) / p, 0.0)
    return norms, stderr, walls, failed


def _solve_level(
    config: ExperimentConfig,
    problem: SVEProblem,
    mesh: GradedMesh,
    increments: NDArray[np.float64],
    factor: int,
    x0: NDArray[np.float64],
    cache: bool,
) -> Trajectory:
    """Solve on `mesh` with the reference increments coarsened by `factor`."""
    coarse = coarsen_increments(increments, factor)
    if config.scheme == "milstein" and config.mode == "subsampled":
        k_inner = config.k_inner or 1
        fine = coarsen_increments(increments, factor // k_inner)
        return milstein_solve(problem, mesh, coarse, mode="subsampled", k_inner=k_inner, fine_path=fine, x0=x0)
    return solve(config.scheme, problem, mesh, coarse, eps=config.eps, mode=config.mode, x0=x0, cache=cache)


def run_convergence(config: ExperimentConfig, cache: bool = True) -> ErrorReport:
    """
    Strong Convergence Experiment.

    Every path is sampled on the reference mesh with `n_ref` steps. The reference solution and
    the solutions on all levels use the same increments, coarsened to the nested meshes.
    Deviations are measured at the coarse nodes. A path failing on any level is excluded from
    all levels.

    The subsampled Milstein reference is solved on the nested mesh with `n_ref // k_inner` steps,
    using the increments of the `n_ref` mesh as its sub-grid.

    Args:
        config: Configuration.
        cache: Use the disk cache for sum-of-exponentials approximations.

    Raises:
        FailedPathsError: if more than 0.1% of the paths fail.
    """
    problem = config.problem
    fine_mesh = build_mesh(problem.T, config.n_ref, config.r)
    subsampled = config.scheme == "milstein" and config.mode == "subsampled"
    ref_mesh = fine_mesh.nested(config.n_ref // (config.k_inner or 1)) if subsampled else fine_mesh
    meshes = [fine_mesh.nested(level) for level in config.levels]
    reference = reference_scheme(config.scheme, problem)
    seeds = tuple(path_seed(config.seed, idx) for idx in range(config.paths))
    LOGGER.info("%r: reference %s on %r, %d paths", config, reference, ref_mesh, config.paths)

    if config.scheme == "fast_em":
        # build the approximations once, before the worker threads need them
        for mesh in meshes:
            for exponent in {problem.alpha, problem.beta} - {0.0}:
                get_soe(exponent, float(mesh.steps[0]), mesh.T, config.eps, cache=cache)

    def solve_reference(increments: NDArray[np.float64], x0: NDArray[np.float64]) -> Trajectory:
        if subsampled:
            return _solve_level(config, problem, ref_mesh, increments, config.n_ref // ref_mesh.N, x0, cache)
        return solve(reference, problem, ref_mesh, increments, mode=config.mode, x0=x0)

    def deviations(indices: Sequence[int]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        chunk_seeds = tuple(seeds[idx] for idx in indices)
        increments = sample_paths(fine_mesh, problem.m, chunk_seeds).increments
        x0 = problem.initial_states(chunk_seeds)
        ref = solve_reference(increments, x0)
        devs, walls = [], []
        for mesh in meshes:
            traj = _solve_level(config, problem, mesh, increments, config.n_ref // mesh.N, x0, cache)
            devs.append(np.linalg.norm(traj.states - ref.states[:, :: ref_mesh.N // mesh.N], axis=-1))
            walls.append(traj.wall_time)
        return np.concatenate(devs, axis=1), np.array(walls)

    norms, stderr, walls, failed = _monte_carlo(
        deviations, config.paths, config.p, config.chunk_size, config.maxworkers
    )

    rows = []
    offset = 0
    for idx, mesh in enumerate(meshes):
        level_norms = norms[offset : offset + mesh.N + 1]
        level_stderr = stderr[offset : offset + mesh.N + 1]
        offset += mesh.N + 1
        peak = int(np.argmax(level_norms))
        row = LevelError(
            N=mesh.N,
            err_end=float(level_norms[-1]),
            err_max=float(level_norms[peak]),
            stderr_end=float(level_stderr[-1]),
            stderr_max=float(level_stderr[peak]),
            wall_s=float(walls[idx]),
        )
        LOGGER.info("N=%d err_end=%.4e err_max=%.4e", row.N, row.err_end, row.err_max)
        rows.append(row)

    order_end = order_max = None
    if len(rows) > 1 and all(row.err_end > 0 for row in rows):
        order_end = fit_order(config.levels, [row.err_end for row in rows])
    if len(rows) > 1 and all(row.err_max > 0 for row in rows):
        order_max = fit_order(config.levels, [row.err_max for row in rows])
    return ErrorReport(
        config=config,
        reference=reference,
        rows=tuple(rows),
        order_end=order_end,
        order_max=order_max,
        theory=theoretical_orders(config.scheme, config.alpha, config.beta, config.r),
        failed_paths=failed,
    )


def bench_cpu(
    config: ExperimentConfig, levels: Sequence[int] | None = None, repeats: int = 5, cache: bool = True
) -> BenchReport:
    """
    Compare EM and fast EM run times.

    For every level a batch of `config.paths` paths is solved by both schemes, with BLAS
    limited to a single thread. After one discarded warm-up, the median of `repeats` timings
    divided by the number of paths is reported.

    Args:
        config: Configuration providing problem, grading, `eps`, paths and seed.
        levels: Step Counts. Default `config.levels`.
        repeats: Timings per level and scheme.
        cache: Use the disk cache for sum-of-exponentials approximations.
    """
    if repeats < 1:
        raise InvalidParameterError(f"repeats must be positive, got {repeats}")
    problem = config.problem
    levels = tuple(config.levels if levels is None else levels)
    seeds = tuple(path_seed(config.seed, idx) for idx in range(config.paths))
    x0 = problem.initial_states(seeds)
    rows = []
    with threadpool_limits(limits=1):
        for N in levels:
            mesh = build_mesh(problem.T, N, config.r)
            increments = sample_paths(mesh, problem.m, seeds).increments
            timings = {}
            for scheme in ("em", "fast_em"):

                def run(scheme: Scheme = scheme) -> None:
                    solve(scheme, problem, mesh, increments, eps=config.eps, x0=x0, cache=cache)

                run()
                samples = []
                for _ in range(repeats):
                    start = time.perf_counter()
                    run()
                    samples.append(time.perf_counter() - start)
                timings[scheme] = float(np.median(samples)) / config.paths
            row = BenchRow(N=N, em_s=timings["em"], fast_em_s=timings["fast_em"])
            LOGGER.info("N=%d em=%.3es fast_em=%.3es", N, row.em_s, row.fast_em_s)
            rows.append(row)
    em_slope = fast_em_slope = None
    if len(rows) > 1:
        em_slope = _slope(levels, [row.em_s for row in rows])
        fast_em_slope = _slope(levels, [row.fast_em_s for row in rows])
    return BenchReport(rows=tuple(rows), paths=config.paths, em_slope=em_slope, fast_em_slope=fast_em_slope)


def default_probe_pairs(n_ref: int) -> tuple[ProbePair, ...]:
    """
    Node pairs for the regularity probe.

    * `interior`: `s = T/2` and `t - s = 2^a T / n_ref` for `a = 2..8` on the uniform mesh.
    * `origin`: `s = 2^a h` and `t = 2s` for `a = 2..7` on the origin window, the uniform mesh
      with `ORIGIN_STEPS` steps of size `h` over `[0, ORIGIN_WINDOW T]`.

    >>> [(pair.family, pair.i, pair.j) for pair in default_probe_pairs(64)][:3]
    [('interior', 32, 36), ('interior', 32, 40), ('interior', 32, 48)]
    """
    mid = n_ref // 2
    interior = [ProbePair(family="interior", i=mid, j=mid + 2**a) for a in range(2, 9) if mid + 2**a <= n_ref]
    origin = [ProbePair(family="origin", i=2**a, j=2 ** (a + 1)) for a in range(2, 8) if 2 ** (a + 1) <= ORIGIN_STEPS]
    return (*interior, *origin)


def regularity_probe(
    problem: SVEProblem,
    n_ref: int,
    paths: int,
    pairs: Sequence[ProbePair] | None = None,
    seed: int = 0,
    r: float = 1.0,
    chunk_size: int = CHUNK_SIZE,
    maxworkers: int | None = None,
) -> RegularityReport:
    """
    Estimate `||x(t) - x(s)||_L2` by the EM solution on a fine mesh.

    Pairs of the `origin` family index the origin window of
    [default_probe_pairs][sve.harness.default_probe_pairs], a short uniform mesh starting at
    zero. All other pairs index the mesh with `n_ref` steps and grading `r`. The exponents are
    fitted for the default families: in `t - s` for `interior` and in `s` for `origin`. Pairs
    with zero modulus are ignored by the fit.

    Args:
        problem: Problem.
        n_ref: Number of Steps.
        paths: Number of Monte Carlo Paths.
        pairs: Node Pairs. Default [default_probe_pairs][sve.harness.default_probe_pairs].
        seed: Master Seed.
        r: Grading Exponent.
        chunk_size: Paths solved together.
        maxworkers: Worker Threads.
    """
    meshes = {
        "main": build_mesh(problem.T, n_ref, r),
        "origin": build_mesh(problem.T * ORIGIN_WINDOW, ORIGIN_STEPS, 1.0),
    }
    pairs = tuple(default_probe_pairs(n_ref) if pairs is None else pairs)
    names = tuple("origin" if pair.family == "origin" else "main" for pair in pairs)
    for pair, name in zip(pairs, names, strict=True):
        if not 0 < pair.i <= pair.j <= meshes[name].N:
            raise InvalidParameterError(f"{pair} is not within (0, {meshes[name].N}]")
    if paths < 1:
        raise InvalidParameterError(f"paths must be positive, got {paths}")
    seeds = tuple(path_seed(seed, idx) for idx in range(paths))
    used = {name: meshes[name] for name in names}

    def deviations(indices: Sequence[int]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        chunk_seeds = tuple(seeds[idx] for idx in indices)
        x0 = problem.initial_states(chunk_seeds)
        states, walls = {}, []
        for name, mesh in used.items():
            increments = sample_paths(mesh, problem.m, chunk_seeds).increments
            traj = em_solve(problem, mesh, increments, x0=x0)
            states[name] = traj.states
            walls.append(traj.wall_time)
        diff = np.stack(
            [states[name][:, pair.j] - states[name][:, pair.i] for pair, name in zip(pairs, names, strict=True)],
            axis=1,
        )
        return np.linalg.norm(diff, axis=-1), np.array([sum(walls)])

    moduli, stderr, _, _ = _monte_carlo(deviations, paths, 2.0, chunk_size, maxworkers)
    rows = tuple(
        RegularityRow(
            family=pair.family,
            s=float(meshes[name].points[pair.i]),
            t=float(meshes[name].points[pair.j]),
            modulus=float(moduli[idx]),
            stderr=float(stderr[idx]),
        )
        for idx, (pair, name) in enumerate(zip(pairs, names, strict=True))
    )
    return RegularityReport(
        rows=rows,
        interior_exponent=_family_exponent(rows, "interior", lambda row: row.t - row.s),
        origin_exponent=_family_exponent(rows, "origin", lambda row: row.s),
        paths=paths,
        n_ref=n_ref,
    )


def _family_exponent(rows: Sequence[RegularityRow], family: str, scale: Callable[[RegularityRow], float]) -> float | None:
    selected = [row for row in rows if row.family == family and row.modulus > 0 and scale(row) > 0]
    if len(selected) < 2:  # noqa: PLR2004
        return None
    return _slope([scale(row) for row in selected], [row.modulus for row in selected])
