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

"""Command Line Interface."""

import logging
import sys
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from logging import Handler, StreamHandler
from pathlib import Path
from typing import TextIO

import click
from click_bash42_completion import patch
from pydantic import BaseModel, ConfigDict
from rich.console import Console
from rich.logging import RichHandler

from ._cligroup import EXIT_CODE, MainGroup
from ._logging import LevelCountHandler
from .cache import CACHE
from .cliutil import (
    PathType,
    coefs2data,
    opt_alpha,
    opt_beta,
    opt_chunk_size,
    opt_coef,
    opt_eps,
    opt_k_inner,
    opt_levels,
    opt_maxworkers,
    opt_nref,
    opt_out,
    opt_paths,
    opt_preset,
    opt_r,
    opt_seed,
)
from .config import ExperimentConfig
from .consts import VERIFY_GRID
from .harness import bench_cpu, regularity_probe, run_convergence
from .logging import LOGGER
from .mesh import build_mesh
from .problem import get_problem
from .report import (
    bench_table,
    convergence_table,
    regularity_table,
    write_bench_csv,
    write_convergence_csv,
    write_mesh,
    write_regularity_csv,
)
from .soe import build_soe, read_soe_csv, verify_soe, write_soe_csv

patch()


_LOGLEVELMAP = {
    0: logging.WARNING,
    1: logging.INFO,
    2: logging.DEBUG,
}

_SCHEMES = {"em": "em", "fast-em": "fast_em", "milstein": "milstein"}


class Ctx(BaseModel):
    """Command Line Context."""

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
    )

    console: Console
    level_count_handler: LevelCountHandler | None = None

    verbose: int = 0
    no_cache: bool = False
    no_color: bool | None = None

    @staticmethod
    def create(no_color: bool | None = None, **kwargs) -> "Ctx":
        """Create."""
        console = Console(stderr=True, log_time=False, log_path=False, no_color=no_color)
        level_count_handler = LevelCountHandler()
        return Ctx(console=console, level_count_handler=level_count_handler, no_color=no_color, **kwargs)

    def _log_handler(self) -> Handler:
        """Rich Handler on STDERR, or plain Lines for `--no-color`."""
        if self.no_color:
            handler: Handler = StreamHandler(stream=sys.stderr)
            handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
            return handler
        return RichHandler(show_time=False, show_path=False, rich_tracebacks=True, console=self.console)

    def __enter__(self):
        level = _LOGLEVELMAP.get(self.verbose, logging.DEBUG)
        handlers = [self._log_handler()]
        if self.level_count_handler:
            handlers.append(self.level_count_handler)
        logging.basicConfig(level=level, format="%(message)s", handlers=handlers, force=True)
        if self.no_cache:
            CACHE.disable()
        return self

    def __exit__(self, exc_type, exc_value, tb):
        if self.level_count_handler and self.level_count_handler.warnings:
            self.console.print(f"[yellow]{self.level_count_handler.warnings} warning(s).", highlight=False)
        if exc_type or (self.level_count_handler and self.level_count_handler.has_errors):
            self.console.print("[red][bold]Aborted.")
            clickctx = click.get_current_context(silent=True)
            sys.exit((clickctx and clickctx.meta.get(EXIT_CODE)) or 1)

    @contextmanager
    def output(self, out: Path | None, show: Callable[[], None] | None = None) -> Iterator[TextIO]:
        """Write to `out` and show the summary on the console, or write to STDOUT only."""
        if out is None:
            yield click.get_text_stream("stdout")
            return
        with out.open("w", encoding="utf-8") as file:
            yield file
        if show:
            show()
        LOGGER.info("Written %r", str(out))


@click.group(cls=MainGroup, context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", count=True, help="Increase Verbosity.")
@click.option("-C", "--no-cache", is_flag=True, help="Disable Caching.")
@click.option("--no-color", is_flag=True, help="Disable Coloring.", envvar="SVE_NO_COLOR")
@click.version_option()
@click.pass_context
def sve(ctx, verbose=0, no_cache=False, no_color=False):
    """Graded Mesh Solvers for Stochastic Volterra Equations."""
    ctx.obj = ctx.with_resource(Ctx.create(verbose=verbose, no_cache=no_cache, no_color=no_color))


pass_ctx = click.make_pass_decorator(Ctx)


@sve.command()
@click.option("--scheme", "-S", type=click.Choice(list(_SCHEMES)), required=True, help="Scheme.")
@opt_alpha
@opt_beta
@opt_r
@opt_levels
@opt_nref
@opt_paths
@opt_seed
@opt_eps
@opt_k_inner
@opt_preset
@opt_coef
@opt_chunk_size
@opt_maxworkers
@opt_out
@pass_ctx
def converge(
    ctx,
    scheme,
    alpha,
    beta,
    r,
    levels,
    nref,
    paths,
    seed,
    eps,
    k_inner=None,
    preset="example41",
    coef=(),
    chunk_size=None,
    maxworkers=None,
    out=None,
):
    """
    Measure Strong Errors and fit Convergence Orders.

    Solutions on all levels are compared with a reference solution on 2**NREF steps,
    driven by the same Brownian paths.
    """
    config = ExperimentConfig(
        scheme=_SCHEMES[scheme],
        preset=preset,
        coefs=coefs2data(coef),
        alpha=alpha,
        beta=beta,
        r=r,
        levels=levels,
        n_ref=nref,
        paths=paths,
        seed=seed,
        eps=eps,
        mode="subsampled" if k_inner else "exact",
        k_inner=k_inner,
        chunk_size=chunk_size,
        maxworkers=maxworkers,
        out=out,
    )
    report = run_convergence(config)
    with ctx.output(out, lambda: ctx.console.print(convergence_table(report))) as file:
        write_convergence_csv(report, file)


@sve.command()
@opt_alpha
@opt_beta
@opt_r
@opt_levels
@click.option("--paths", "-P", type=int, default=1000, show_default=True, help="Paths per timing.")
@opt_seed
@opt_eps
@click.option("--repeats", type=int, default=5, show_default=True, help="Timings per level.")
@opt_preset
@opt_coef
@opt_out
@pass_ctx
def bench(ctx, alpha, beta, r, levels, paths, seed, eps, repeats, preset="example41", coef=(), out=None):
    """Compare CPU Time of EM and fast EM."""
    config = ExperimentConfig(
        scheme="fast_em",
        preset=preset,
        coefs=coefs2data(coef),
        alpha=alpha,
        beta=beta,
        r=r,
        levels=levels,
        n_ref=levels[-1],
        paths=paths,
        seed=seed,
        eps=eps,
    )
    report = bench_cpu(config, repeats=repeats)
    with ctx.output(out, lambda: ctx.console.print(bench_table(report))) as file:
        write_bench_csv(report, file)


@sve.command()
@opt_alpha
@opt_beta
@opt_nref
@opt_paths
@opt_seed
@opt_preset
@opt_coef
@opt_chunk_size
@opt_maxworkers
@opt_out
@pass_ctx
def regularity(
    ctx, alpha, beta, nref, paths, seed, preset="example41", coef=(), chunk_size=None, maxworkers=None, out=None
):
    """Estimate the Hoelder Regularity of the Solution."""
    problem = get_problem(preset, alpha, beta, **dict(coefs2data(coef)))
    report = regularity_probe(problem, nref, paths, seed=seed, chunk_size=chunk_size, maxworkers=maxworkers)
    with ctx.output(out, lambda: ctx.console.print(regularity_table(report))) as file:
        write_regularity_csv(report, file)


@sve.group()
def soe():
    """Sum-of-Exponentials Approximations."""


@soe.command("build")
@click.option("--gamma", "-g", type=float, required=True, help="Kernel Exponent in (0, 1).")
@click.option("--delta", "-d", type=float, required=True, help="Lower End of the Interval.")
@click.option("--horizon", "-T", type=float, default=1.0, show_default=True, help="Upper End of the Interval.")
@opt_eps
@opt_out
@pass_ctx
def soe_build(ctx, gamma, delta, horizon, eps, out=None):
    """Build certified Approximation of t**-gamma."""
    approx = build_soe(gamma, delta, horizon, eps)
    LOGGER.info("%r: K=%d error=%.3e", approx, approx.K, approx.error)
    with ctx.output(out, lambda: ctx.console.print(f"K={approx.K} error={approx.error:.3e}")) as file:
        write_soe_csv(approx, file)


@soe.command("verify")
@click.option("--in", "-i", "filepath", type=PathType, required=True, help="Approximation CSV.")
@click.option("--grid", type=int, default=VERIFY_GRID, show_default=True, help="Number of Grid Points.")
@pass_ctx
def soe_verify(ctx, filepath, grid):
    """Print Maximum Error of an Approximation, failing if it exceeds the stored Tolerance."""
    approx = read_soe_csv(filepath)
    error = verify_soe(approx, grid)
    if error > approx.eps:
        LOGGER.error("Error %.3e exceeds eps=%r", error, approx.eps)
    click.echo(repr(error))


@sve.group()
def mesh():
    """Graded Meshes."""


@mesh.command("dump")
@click.option("--horizon", "-T", type=float, default=1.0, show_default=True, help="Horizon.")
@click.option("--steps", "-N", type=int, required=True, help="Number of Steps.")
@click.option("--grading", "-r", type=float, default=1.0, show_default=True, help="Grading Exponent.")
@opt_out
@pass_ctx
def mesh_dump(ctx, horizon, steps, grading, out=None):
    """Print Mesh Nodes, one per line."""
    with ctx.output(out) as file:
        write_mesh(build_mesh(horizon, steps, grading), file)
