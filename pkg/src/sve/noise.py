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
Brownian Increments on Graded Meshes.

Increments are generated by a counter-based generator: the Gaussian for step `i` and
coordinate `c` is derived from the counter position `i * m + c` of a Philox stream keyed by the
seed. A path therefore only depends on its seed, never on the order in which paths are drawn.

    >>> from sve.mesh import build_mesh
    >>> mesh = build_mesh(1.0, 8, 2)
    >>> path = sample_path(mesh, 1, seed=42)
    >>> path.increments.shape
    (8, 1)
    >>> bool((sample_path(mesh, 1, seed=42).increments == path.increments).all())
    True

Coarser meshes nest into finer ones, coarse increments are exact block sums:

    >>> coarse = coarsen(path, 4)
    >>> bool((coarse[0] == path.increments[0] + path.increments[1]).all())
    True
"""

from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import ndtri

from .exceptions import InvalidParameterError
from .mesh import GradedMesh
from .object import Field, Object

_MASK = 2**64


class BrownianPath(Object):
    """
    Brownian Increments.

    Attributes:
        mesh: Mesh.
        m: Dimension.
        seed: Seed, or one Seed per path for batches.
        increments: `(N, m)` array, or `(P, N, m)` for a batch of `P` paths. Row `i` covers
            `(t_i, t_{i+1}]`.
    """

    mesh: GradedMesh
    m: int = Field(ge=1)
    seed: int | tuple[int, ...]
    increments: NDArray[np.float64] = Field(repr=False)

    @property
    def batched(self) -> bool:
        """Batch of paths."""
        return isinstance(self.seed, tuple)

    def values(self) -> NDArray[np.float64]:
        """
        Brownian Motion at the mesh nodes, starting with `W(0) = 0`.

        >>> from sve.mesh import build_mesh
        >>> path = sample_path(build_mesh(1.0, 4, 1), 2, seed=1)
        >>> path.values().shape
        (5, 2)
        """
        inc = self.increments
        zeros = np.zeros((*inc.shape[:-2], 1, inc.shape[-1]))
        return np.concatenate([zeros, np.cumsum(inc, axis=-2)], axis=-2)


def path_seed(master_seed: int, index: int) -> int:
    """
    Seed of path `index` derived from `master_seed`.

    >>> path_seed(1, 0) == path_seed(1, 0) != path_seed(1, 1)
    True
    """
    seq = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(seq.generate_state(1, np.uint64)[0])


def _gaussians(seed: int, count: int) -> NDArray[np.float64]:
    if not 0 <= seed < _MASK:
        raise InvalidParameterError(f"Seed must be in [0, 2**64), got {seed!r}")
    key = np.random.SeedSequence(seed).generate_state(2, np.uint64)
    raw = np.random.Philox(key=key).random_raw(count)
    uniform = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(uniform)


def sample_path(mesh: GradedMesh, m: int, seed: int) -> BrownianPath:
    """
    Sample `m`-dimensional Brownian increments on `mesh`.

    Args:
        mesh: Mesh.
        m: Dimension.
        seed: Seed in `[0, 2**64)`.
    """
    if m < 1:
        raise InvalidParameterError(f"Dimension must be positive, got {m!r}")
    increments = _gaussians(seed, mesh.N * m).reshape(mesh.N, m) * np.sqrt(mesh.steps)[:, None]
    increments.flags.writeable = False
    return BrownianPath(mesh=mesh, m=m, seed=seed, increments=increments)


def sample_paths(mesh: GradedMesh, m: int, seeds: Sequence[int]) -> BrownianPath:
    """Batch of paths, path `p` identical to `sample_path(mesh, m, seeds[p])`."""
    if m < 1:
        raise InvalidParameterError(f"Dimension must be positive, got {m!r}")
    seeds = tuple(int(seed) for seed in seeds)
    scale = np.sqrt(mesh.steps)[:, None]
    increments = np.empty((len(seeds), mesh.N, m))
    for idx, seed in enumerate(seeds):
        increments[idx] = _gaussians(seed, mesh.N * m).reshape(mesh.N, m) * scale
    increments.flags.writeable = False
    return BrownianPath(mesh=mesh, m=m, seed=seeds, increments=increments)


def coarsen_increments(increments: NDArray[np.float64], factor: int) -> NDArray[np.float64]:
    """
    Sum blocks of `factor` consecutive increments along axis `-2`, strictly left to right.

    >>> coarsen_increments(np.arange(8.0).reshape(4, 2), 2).tolist()
    [[2.0, 4.0], [10.0, 12.0]]
    """
    steps = increments.shape[-2]
    if factor < 1 or steps % factor:
        raise InvalidParameterError(f"Cannot coarsen {steps} steps by {factor}")
    if factor == 1:
        return increments.copy()
    blocks = increments.reshape(*increments.shape[:-2], steps // factor, factor, increments.shape[-1])
    result = blocks[..., 0, :].copy()
    for idx in range(1, factor):
        result += blocks[..., idx, :]
    return result


def coarsen(path: BrownianPath, N: int) -> NDArray[np.float64]:
    """
    Increments of `path` on the nested mesh with `N` steps.

    Raises:
        InvalidParameterError: if `N` does not divide the number of fine steps.
    """
    coarse = path.mesh.nested(N)
    return coarsen_increments(path.increments, path.mesh.N // coarse.N)


def nested_path(path: BrownianPath, N: int) -> BrownianPath:
    """
    Path on the nested mesh with `N` steps, as [BrownianPath][sve.noise.BrownianPath].

    >>> from sve.mesh import build_mesh
    >>> path = sample_path(build_mesh(1.0, 8, 1), 1, seed=3)
    >>> nested_path(path, 2).mesh
    GradedMesh(1.0, 2, 1.0)
    """
    increments = coarsen(path, N)
    increments.flags.writeable = False
    return path.new(mesh=path.mesh.nested(N), increments=increments)
