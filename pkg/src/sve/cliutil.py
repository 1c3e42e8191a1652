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

"""Command Line Interface - Utilities."""

from pathlib import Path

import click

from .consts import CHUNK_SIZE, EPS, N_REF_EXP, PATHS

PathType = click.Path(path_type=Path)


def parse_levels(value: str) -> tuple[int, ...]:
    """
    Parse `LO:HI` base-2 exponents into step counts.

    >>> parse_levels("6:9")
    (64, 128, 256, 512)
    >>> parse_levels("7")
    (128,)
    """
    try:
        if ":" in value:
            lo, hi = (int(item) for item in value.split(":", 1))
        else:
            lo = hi = int(value)
    except ValueError:
        raise click.BadParameter(f"Expected LO:HI, got {value!r}") from None
    if not 0 <= lo <= hi:
        raise click.BadParameter(f"Expected 0 <= LO <= HI, got {value!r}")
    return tuple(2**exp for exp in range(lo, hi + 1))


def _levels_callback(ctx, param, value):
    if value is None:
        return None
    return parse_levels(value)


def _pow2_callback(ctx, param, value):
    if value is None:
        return None
    if value < 0:
        raise click.BadParameter(f"Exponent must be non-negative, got {value}")
    return 2**value


def coefs2data(coefs: tuple[str, ...]) -> tuple[tuple[str, float], ...]:
    """
    Convert `NAME=VALUE` coefficients.

    >>> coefs2data(("A=-2", "b=0.5"))
    (('A', -2.0), ('b', 0.5))
    """
    result = []
    for coef in coefs:
        try:
            name, value = coef.split("=", 1)
            result.append((name.strip(), float(value)))
        except ValueError:
            raise click.BadParameter(f"Expected NAME=VALUE, got {coef!r}") from None
    return tuple(result)


opt_alpha = click.option("--alpha", "-a", type=float, required=True, help="Drift Kernel Exponent in (0, 1).")
opt_beta = click.option("--beta", "-b", type=float, required=True, help="Diffusion Kernel Exponent in [0, 1/2).")
opt_r = click.option("--r", "-r", "r", type=float, default=1.0, show_default=True, help="Grading Exponent.")
opt_levels = click.option(
    "--levels",
    "-l",
    required=True,
    callback=_levels_callback,
    help="Levels as base-2 exponents 'LO:HI', i.e. N = 2**LO ... 2**HI.",
)
opt_nref = click.option(
    "--nref",
    type=int,
    default=N_REF_EXP,
    show_default=True,
    callback=_pow2_callback,
    help="Reference Resolution as base-2 exponent.",
)
opt_paths = click.option("--paths", "-P", type=int, default=PATHS, show_default=True, help="Monte Carlo Paths.")
opt_seed = click.option("--seed", "-s", type=int, default=0, show_default=True, help="Master Seed.")
opt_eps = click.option("--eps", type=float, default=EPS, show_default=True, help="Sum-of-Exponentials Tolerance.")
opt_k_inner = click.option("--k-inner", type=int, help="Fine steps per step. Selects the subsampled Milstein mode.")
opt_preset = click.option(
    "--preset",
    type=click.Choice(["example41", "linear"]),
    default="example41",
    show_default=True,
    help="Problem Preset.",
)
opt_coef = click.option(
    "--coef",
    "-c",
    multiple=True,
    help="Preset Coefficient 'NAME=VALUE'. This option can be specified multiple times.",
)
opt_chunk_size = click.option(
    "--chunk-size", type=int, default=CHUNK_SIZE, show_default=True, help="Paths solved together."
)
opt_maxworkers = click.option(
    "--maxworkers",
    "-J",
    type=int,
    help="Maximum Number of Worker Threads. Environment Variable 'SVE_MAXWORKERS'.",
    envvar="SVE_MAXWORKERS",
)
opt_out = click.option(
    "--out",
    "-o",
    type=PathType,
    help="Output to file instead of STDOUT",
)
