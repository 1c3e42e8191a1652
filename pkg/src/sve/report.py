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
Report Output.

Results are written as CSV with a header row and trailing `# key=value` comment lines, and shown
as `rich` tables on the console.
"""

from typing import TextIO

import pandas as pd
from rich.table import Table

from .harness import BenchReport, ErrorReport, RegularityReport
from .mesh import GradedMesh

CONVERGENCE_COLUMNS = ["scheme", "alpha", "beta", "r", "N", "err_end", "err_max", "paths", "seed", "wall_s"]


def _fmt(value: float | None) -> str:
    """
    Format Number.

    >>> _fmt(0.1), _fmt(None)
    ('0.1', 'nan')
    """
    if value is None:
        return "nan"
    return repr(float(value))


def _write_csv(frame: pd.DataFrame, footer: dict[str, float | str | None], file: TextIO):
    frame.to_csv(file, index=False, lineterminator="\n")
    for key, value in footer.items():
        text = value if isinstance(value, str) else _fmt(value)
        file.write(f"# {key}={text}\n")


def write_convergence_csv(report: ErrorReport, file: TextIO):
    """Write Convergence Report."""
    config = report.config
    frame = pd.DataFrame(
        [
            {
                "scheme": config.scheme,
                "alpha": config.alpha,
                "beta": config.beta,
                "r": config.r,
                "N": row.N,
                "err_end": row.err_end,
                "err_max": row.err_max,
                "paths": config.paths - report.failed_paths,
                "seed": config.seed,
                "wall_s": row.wall_s,
            }
            for row in report.rows
        ],
        columns=CONVERGENCE_COLUMNS,
    )
    footer = {
        "order_end": report.order_end,
        "order_max": report.order_max,
        "theory_order_end": report.theory.order_end,
        "theory_order_max": report.theory.order_max,
        "config": config.hash,
    }
    _write_csv(frame, footer, file)


def write_bench_csv(report: BenchReport, file: TextIO):
    """Write Benchmark Report."""
    frame = pd.DataFrame([row.model_dump() for row in report.rows], columns=["N", "em_s", "fast_em_s"])
    _write_csv(frame, {"em_slope": report.em_slope, "fast_em_slope": report.fast_em_slope}, file)


def write_regularity_csv(report: RegularityReport, file: TextIO):
    """Write Regularity Report."""
    frame = pd.DataFrame(
        [row.model_dump() for row in report.rows], columns=["family", "s", "t", "modulus", "stderr"]
    )
    footer = {"interior_exponent": report.interior_exponent, "origin_exponent": report.origin_exponent}
    _write_csv(frame, footer, file)


def write_mesh(mesh: GradedMesh, file: TextIO):
    """Write one node per line at full precision."""
    pd.Series(mesh.points).to_csv(file, index=False, header=False, lineterminator="\n")


def convergence_table(report: ErrorReport) -> Table:
    """Convergence Report as Table."""
    config = report.config
    table = Table(title=f"{config.scheme} alpha={config.alpha} beta={config.beta} r={config.r}")
    for column in ("N", "Err_end", "+-", "Err_max", "+-", "Wall [s]"):
        table.add_column(column, justify="right")
    for row in report.rows:
        table.add_row(
            str(row.N),
            f"{row.err_end:.4e}",
            f"{row.stderr_end:.1e}",
            f"{row.err_max:.4e}",
            f"{row.stderr_max:.1e}",
            f"{row.wall_s:.2f}",
        )
    table.caption = (
        f"order_end={_order(report.order_end)} (theory {report.theory.order_end:.4f}) "
        f"order_max={_order(report.order_max)} (theory {report.theory.order_max:.4f})"
    )
    return table


def bench_table(report: BenchReport) -> Table:
    """Benchmark Report as Table."""
    table = Table(title=f"CPU time per path ({report.paths} paths)")
    for column in ("N", "EM [s]", "fast EM [s]"):
        table.add_column(column, justify="right")
    for row in report.rows:
        table.add_row(str(row.N), f"{row.em_s:.3e}", f"{row.fast_em_s:.3e}")
    table.caption = f"slopes: EM {_order(report.em_slope)} fast EM {_order(report.fast_em_slope)}"
    return table


def regularity_table(report: RegularityReport) -> Table:
    """Regularity Report as Table."""
    table = Table(title=f"L2 moduli ({report.paths} paths, N={report.n_ref})")
    for column in ("family", "s", "t", "modulus", "+-"):
        table.add_column(column, justify="right")
    for row in report.rows:
        table.add_row(row.family, f"{row.s:.6f}", f"{row.t:.6f}", f"{row.modulus:.4e}", f"{row.stderr:.1e}")
    table.caption = (
        f"interior exponent {_order(report.interior_exponent)} origin exponent {_order(report.origin_exponent)}"
    )
    return table


def _order(value: float | None) -> str:
    return "-" if value is None else f"{value:.4f}"
