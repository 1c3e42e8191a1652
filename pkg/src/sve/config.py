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
Experiment Configuration.

    >>> config = ExperimentConfig(alpha=0.9, beta=0.1, levels=(128, 256), n_ref=1024, paths=10)
    >>> config
    ExperimentConfig('em', alpha=0.9, beta=0.1, levels=(128, 256), n_ref=1024, paths=10)
    >>> config.problem
    SVEProblem('example41', alpha=0.9, beta=0.1)
    >>> config.new(out=Path("other.csv")).hash == config.hash
    True
    >>> config.new(seed=1).hash == config.hash
    False

Invalid combinations raise `pydantic.ValidationError`.
"""

import hashlib
from pathlib import Path
from typing import ClassVar

from .consts import CHUNK_SIZE, EPS, MOMENT, PATHS, MilsteinMode, Scheme
from .object import Field, Object, PosArgs, model_validator
from .problem import SVEProblem, get_problem


class ExperimentConfig(Object):
    """
    Convergence Experiment.

    Attributes:
        scheme: Scheme under test.
        preset: Problem Preset.
        coefs: Additional Preset Coefficients as `(name, value)` pairs.
        alpha: Drift Kernel Exponent.
        beta: Diffusion Kernel Exponent.
        r: Grading Exponent.
        levels: Step Counts under test, strictly increasing.
        n_ref: Step Count of the reference solution, a multiple of every level.
        paths: Number of Monte Carlo paths.
        seed: Master Seed.
        eps: Sum-of-Exponentials Tolerance (fast EM only).
        p: Error Moment.
        mode: Milstein Mode.
        k_inner: Fine steps per step for the subsampled Milstein mode.
        chunk_size: Paths solved together.
        maxworkers: Worker Threads. Default from `SVE_MAXWORKERS` or number of CPUs.
        out: Output File.
    """

    scheme: Scheme = "em"
    preset: str = "example41"
    coefs: tuple[tuple[str, float], ...] = ()
    alpha: float
    beta: float
    r: float = 1.0
    levels: tuple[int, ...]
    n_ref: int
    paths: int = PATHS
    seed: int = 0
    eps: float = EPS
    p: float = MOMENT
    mode: MilsteinMode = "exact"
    k_inner: int | None = None
    chunk_size: int = Field(default=CHUNK_SIZE, ge=1)
    maxworkers: int | None = None
    out: Path | None = None

    _posargs: ClassVar[PosArgs] = ("scheme",)
    _hash_excludes: ClassVar[set[str]] = {"maxworkers", "out"}

    @model_validator(mode="after")
    def _check_config(self) -> "ExperimentConfig":
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if not 0 <= self.beta < 0.5:  # noqa: PLR2004
            raise ValueError(f"beta must be in [0, 1/2), got {self.beta!r}")
        if not self.r >= 1:
            raise ValueError(f"Grading exponent must be at least 1, got {self.r!r}")
        if not self.levels:
            raise ValueError("At least one level is required")
        if any(level < 1 for level in (*self.levels, self.n_ref)):
            raise ValueError(f"Levels and n_ref must be positive, got {self.levels} and {self.n_ref}")
        if any(lo >= hi for lo, hi in zip(self.levels, self.levels[1:], strict=False)):
            raise ValueError(f"Levels must be strictly increasing, got {self.levels}")
        for value in (*self.levels, self.n_ref):
            if value & (value - 1):
                raise ValueError(f"Levels and n_ref must be powers of two, got {value}")
        for level in self.levels:
            if self.n_ref % level:
                raise ValueError(f"Level {level} does not divide n_ref={self.n_ref}")
        if self.paths < 1:
            raise ValueError(f"paths must be positive, got {self.paths}")
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must be in (0, 1), got {self.eps!r}")
        if not self.p >= 2:  # noqa: PLR2004
            raise ValueError(f"Error moment must be at least 2, got {self.p!r}")
        if self.scheme == "milstein":
            if self.mode == "exact" and self.beta:
                raise ValueError("Milstein with beta > 0 requires the subsampled mode")
            if self.mode == "subsampled":
                if not self.k_inner or self.k_inner < 1:
                    raise ValueError("Subsampled Milstein mode requires k_inner >= 1")
                for level in self.levels:
                    if self.n_ref % (level * self.k_inner):
                        raise ValueError(f"Level {level} times k_inner={self.k_inner} does not divide n_ref")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"Seed must be in [0, 2**64), got {self.seed}")
        return self

    @property
    def problem(self) -> SVEProblem:
        """Problem."""
        return get_problem(self.preset, self.alpha, self.beta, **dict(self.coefs))

    @property
    def hash(self) -> str:
        """Configuration Hash, identical for configurations yielding identical results."""
        hashdata = self.model_dump(exclude=self.__class__._hash_excludes)
        return hashlib.sha256(str(hashdata).encode("utf-8")).hexdigest()[:16]
