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
Sum-of-Exponentials Approximation of Power Kernels.

On `[delta, T]` the kernel `t^(-gamma)` is approximated by `sum_k omega_k exp(-tau_k t)`.
The approximation discretizes

    t^(-gamma) = 1/Gamma(gamma) * integral_0^inf exp(-t lambda) lambda^(gamma-1) dlambda

with Gauss-Jacobi quadrature on `[0, L]` and Gauss-Legendre quadrature on the dyadic panels
`[2^j L, 2^(j+1) L]` up to a cutoff `Lambda`, where the remaining tail is below `eps/4`.
Every block is checked against its exact contribution, an incomplete gamma function, on a
log-spaced grid. The result is verified on the same grid.

    >>> approx = build_soe(0.5, 0.01, 1.0, 1e-6)
    >>> approx.error <= 1e-6
    True
    >>> abs(eval_soe(approx, 0.25) - 2.0) <= 1e-6
    True
"""

from functools import lru_cache
from pathlib import Path
from typing import ClassVar, TextIO

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray
from scipy.special import gamma as gamma_fn
from scipy.special import gammainc, gammaincc, roots_jacobi, roots_legendre

from .cache import CACHE
from .consts import VERIFY_GRID
from .exceptions import InvalidParameterError, SOEBuildError
from .logging import LOGGER
from .object import Field, Object, PosArgs

ORDERS: tuple[int, ...] = (4, 6, 8, 12, 16, 24, 32, 48)
"""Gauss-Legendre Orders tried per Panel."""

JACOBI_ORDER = 8
LOW_END_RANGE = 64
BISECTIONS = 48
MAX_PANELS = 200
CHUNK = 1024


class SOEApprox(Object):
    """
    Sum-of-Exponentials Approximation.

    Attributes:
        gamma: Kernel Exponent.
        delta: Lower End of the certified Interval.
        T: Upper End of the certified Interval.
        eps: Tolerance.
        nodes: Decay Rates `tau_k`, strictly increasing.
        weights: Weights `omega_k`.
        error: Maximum Error measured on the verification grid.
    """

    gamma: float
    delta: float
    T: float
    eps: float
    nodes: NDArray[np.float64] = Field(repr=False)
    weights: NDArray[np.float64] = Field(repr=False)
    error: float = float("nan")

    _posargs: ClassVar[PosArgs] = ("gamma", "delta", "T", "eps")

    @property
    def K(self) -> int:
        """Number of Terms."""
        return len(self.nodes)


def build_soe(gamma: float, delta: float, T: float, eps: float, grid_points: int = VERIFY_GRID) -> SOEApprox:
    """
    Build certified Sum-of-Exponentials Approximation of `t^(-gamma)` on `[delta, T]`.

    The error budget is split: `eps/4` for the tail beyond the cutoff, `eps/4` for the
    Gauss-Jacobi block and `eps/4` shared by the Gauss-Legendre panels. The end `L` of the
    Gauss-Jacobi block is the largest one meeting its budget, so the error at large `t` is
    close to `eps/4` and scales with the tolerance.

    Args:
        gamma: Kernel Exponent in `(0, 1)`.
        delta: Lower End, `0 < delta <= T`.
        T: Upper End.
        eps: Tolerance in `(0, 1)`.
        grid_points: Verification Grid Size.

    Raises:
        InvalidParameterError: on invalid arguments.
        SOEBuildError: if the tolerance is not reached.
    """
    if not 0 < gamma < 1:
        raise InvalidParameterError(f"gamma must be in (0, 1), got {gamma!r}")
    if not 0 < delta <= T or not np.isfinite(T):
        raise InvalidParameterError(f"Require 0 < delta <= T, got delta={delta!r}, T={T!r}")
    if not 0 < eps < 1:
        raise InvalidParameterError(f"eps must be in (0, 1), got {eps!r}")
    if grid_points < 2:  # noqa: PLR2004
        raise InvalidParameterError(f"grid_points must be at least 2, got {grid_points!r}")

    gamma, delta, T, eps = float(gamma), float(delta), float(T), float(eps)
    grid = np.geomspace(delta, T, grid_points)
    cutoff = _cutoff(gamma, delta, T, eps)
    low = _low_end(gamma, grid, cutoff, eps / 4)
    starts = []
    start = low
    while start < cutoff and len(starts) < MAX_PANELS:
        starts.append(start)
        start *= 2.0
    LOGGER.debug("soe: gamma=%r delta=%r T=%r eps=%r L=%.6g panels=%d", gamma, delta, T, eps, low, len(starts))

    nodes, weights = _jacobi(gamma, low)
    parts = [(nodes, weights)]
    budget = eps / (4 * max(len(starts), 1))
    parts.extend(_panel(gamma, start, grid, budget) for start in starts)
    approx = SOEApprox(
        gamma=gamma,
        delta=delta,
        T=T,
        eps=eps,
        nodes=np.concatenate([nodes for nodes, _ in parts]),
        weights=np.concatenate([weights for _, weights in parts]),
    )
    error = verify_soe(approx, grid_points)
    LOGGER.debug("soe: K=%d error=%.3e", approx.K, error)
    if not error <= eps:
        raise SOEBuildError(
            f"SOE for gamma={gamma!r} on [{delta!r}, {T!r}] did not reach eps={eps!r} (achieved {error:.3e})",
            achieved=error,
        )
    approx = _prune(approx.new(error=error), grid_points)
    LOGGER.debug("soe: certified K=%d error=%.3e", approx.K, approx.error)
    return approx


def _cutoff(gamma: float, delta: float, T: float, eps: float) -> float:
    """Smallest `2^j / T` whose tail is below `eps/4` for all `t >= delta`."""
    scale = delta**-gamma
    for j in range(MAX_PANELS):
        cutoff = 2.0**j / T
        if scale * gammaincc(gamma, delta * cutoff) <= eps / 4:
            return cutoff
    raise SOEBuildError(f"No tail cutoff found for delta={delta!r}", achieved=float("inf"))


def _jacobi(gamma: float, low: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Gauss-Jacobi rule for `lambda^(gamma-1) dlambda / Gamma(gamma)` on `[0, low]`."""
    x, w = roots_jacobi(JACOBI_ORDER, 0.0, gamma - 1.0)
    return low * (1.0 + x) / 2.0, (low / 2.0) ** gamma * w / gamma_fn(gamma)


def _low_end(gamma: float, grid: NDArray[np.float64], cutoff: float, budget: float) -> float:
    """Largest `L <= cutoff` with a Gauss-Jacobi block error below `budget`, by bisection in `log2(L)`."""

    def error(low: float) -> float:
        nodes, weights = _jacobi(gamma, low)
        exact = grid**-gamma * gammainc(gamma, low * grid)
        return float(np.max(np.abs(exact - np.exp(-np.multiply.outer(grid, nodes)) @ weights)))

    if error(cutoff) <= budget:
        return cutoff
    hi = float(np.log2(cutoff))
    lo = hi - LOW_END_RANGE
    if not error(2.0**lo) <= budget:
        raise SOEBuildError(f"Gauss-Jacobi block does not reach {budget:.3e}", achieved=error(2.0**lo))
    for _ in range(BISECTIONS):
        mid = (lo + hi) / 2
        if error(2.0**mid) <= budget:
            lo = mid
        else:
            hi = mid
    return 2.0**lo


def _panel(
    gamma: float, start: float, grid: NDArray[np.float64], budget: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Gauss-Legendre rule on `[start, 2 start]` of the smallest order in `ORDERS` meeting `budget`."""
    lower, upper = start * grid, 2.0 * start * grid
    fraction = np.where(
        lower < 1.0, gammainc(gamma, upper) - gammainc(gamma, lower), gammaincc(gamma, lower) - gammaincc(gamma, upper)
    )
    exact = grid**-gamma * fraction
    norm = gamma_fn(gamma)
    for order in ORDERS:
        x, w = roots_legendre(order)
        nodes = start * (3.0 + x) / 2.0
        weights = start / 2.0 * w * nodes ** (gamma - 1.0) / norm
        error = float(np.max(np.abs(exact - np.exp(-np.multiply.outer(grid, nodes)) @ weights)))
        if error <= budget:
            break
    return nodes, weights


def _prune(approx: SOEApprox, grid_points: int) -> SOEApprox:
    """Drop the terms with the smallest contribution on `[delta, T]` if still certified."""
    contrib = approx.weights * np.exp(-approx.nodes * approx.delta)
    order = np.argsort(contrib, kind="stable")
    drop = np.cumsum(contrib[order]) <= approx.eps / 10
    if not drop.any():
        return approx
    keep = np.sort(order[~drop])
    if not keep.size:
        return approx
    pruned = approx.new(nodes=approx.nodes[keep], weights=approx.weights[keep])
    error = verify_soe(pruned, grid_points)
    if error > approx.eps:
        return approx
    return pruned.new(error=error)


def eval_soe(approx: SOEApprox, t: ArrayLike) -> float | NDArray[np.float64]:
    """
    Evaluate `sum_k omega_k exp(-tau_k t)`.

    >>> single = SOEApprox(gamma=0.5, delta=1.0, T=1.0, eps=0.5, nodes=np.ones(1), weights=np.ones(1))
    >>> eval_soe(single, 0.0)
    1.0
    """
    t = np.asarray(t, dtype=np.float64)
    values = np.exp(-np.multiply.outer(t, approx.nodes)) @ approx.weights
    if values.ndim == 0:
        return float(values)
    return values


def verify_soe(approx: SOEApprox, grid_points: int, target=None) -> float:
    """
    Maximum absolute Error on `grid_points` log-spaced points in `[delta, T]`.

    Args:
        approx: Approximation.
        grid_points: Number of Grid Points, at least 2.
        target: Function to compare with. Defaults to `t^(-gamma)`.
    """
    if grid_points < 2:  # noqa: PLR2004
        raise InvalidParameterError(f"grid_points must be at least 2, got {grid_points!r}")
    grid = np.geomspace(approx.delta, approx.T, grid_points)
    error = 0.0
    for start in range(0, grid_points, CHUNK):
        t = grid[start : start + CHUNK]
        expected = t**-approx.gamma if target is None else np.asarray(target(t), dtype=np.float64)
        error = max(error, float(np.max(np.abs(expected - eval_soe(approx, t)))))
    return error


@lru_cache(maxsize=64)
def get_soe(gamma: float, delta: float, T: float, eps: float, cache: bool = True) -> SOEApprox:
    """
    Certified Approximation, memoized in process and on disk.

    Args:
        gamma: Kernel Exponent.
        delta: Lower End.
        T: Upper End.
        eps: Tolerance.
        cache: Use the disk cache.
    """
    if cache:
        return CACHE.soe_cache.anycache()(build_soe)(gamma, delta, T, eps)
    return build_soe(gamma, delta, T, eps)


def write_soe_csv(approx: SOEApprox, file: TextIO):
    """Write Approximation as CSV with columns `tau,omega` after metadata comments."""
    for name in ("gamma", "delta", "T", "eps", "error"):
        key = "horizon" if name == "T" else name
        file.write(f"# {key}={getattr(approx, name)!r}\n")
    pd.DataFrame({"tau": approx.nodes, "omega": approx.weights}).to_csv(file, index=False, lineterminator="\n")


def read_soe_csv(filepath: Path) -> SOEApprox:
    """
    Read Approximation written by [write_soe_csv][sve.soe.write_soe_csv].

    Raises:
        InvalidParameterError: on malformed files.
    """
    filepath = Path(filepath)
    meta: dict[str, float] = {}
    with filepath.open(encoding="utf-8") as file:
        for lineno, line in enumerate(file, 1):
            if not line.startswith("#"):
                continue
            try:
                key, value = line[1:].split("=", 1)
                meta[key.strip()] = float(value)
            except ValueError:
                raise InvalidParameterError(f"{filepath}:{lineno} Cannot parse {line.strip()!r}") from None
    try:
        frame = pd.read_csv(filepath, comment="#", float_precision="round_trip")
        table = frame[["tau", "omega"]].to_numpy(dtype=np.float64)
    except (KeyError, ValueError, pd.errors.ParserError) as exc:
        raise InvalidParameterError(f"{filepath}: Cannot parse columns 'tau,omega': {exc}") from None
    if np.isnan(table).any():
        raise InvalidParameterError(f"{filepath}: Cannot parse incomplete rows")
    try:
        approx = SOEApprox(
            gamma=meta["gamma"],
            delta=meta["delta"],
            T=meta["horizon"],
            eps=meta["eps"],
            nodes=np.ascontiguousarray(table[:, 0]),
            weights=np.ascontiguousarray(table[:, 1]),
            error=meta.get("error", float("nan")),
        )
    except KeyError as exc:
        raise InvalidParameterError(f"{filepath}: missing '# {exc.args[0]}=' line") from None
    return approx
