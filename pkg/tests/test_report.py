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
"""Test Report Output."""

import io

import pandas as pd
from rich.console import Console

from sve.config import ExperimentConfig
from sve.harness import BenchReport, BenchRow, ErrorReport, LevelError, theoretical_orders
from sve.mesh import build_mesh
from sve.report import (
    CONVERGENCE_COLUMNS,
    bench_table,
    convergence_table,
    write_bench_csv,
    write_convergence_csv,
    write_mesh,
)


def _render(table) -> str:
    console = Console(file=io.StringIO(), width=200, no_color=True)
    console.print(table)
    return console.file.getvalue()


def _error_report(failed_paths=0):
    config = ExperimentConfig(alpha=0.9, beta=0.1, levels=(8, 16), n_ref=64, paths=100, seed=3)
    rows = (
        LevelError(N=8, err_end=0.2, err_max=0.3, stderr_end=0.01, stderr_max=0.02, wall_s=0.5),
        LevelError(N=16, err_end=0.1, err_max=0.2, stderr_end=0.01, stderr_max=0.02, wall_s=1.0),
    )
    return ErrorReport(
        config=config,
        reference="em",
        rows=rows,
        order_end=1.0,
        theory=theoretical_orders("em", 0.9, 0.1, 1.0),
        failed_paths=failed_paths,
    )


def test_convergence_csv():
    """Convergence CSV with trailing orders."""
    report = _error_report(failed_paths=2)
    buffer = io.StringIO()
    write_convergence_csv(report, buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[:3] == [
        "scheme,alpha,beta,r,N,err_end,err_max,paths,seed,wall_s",
        "em,0.9,0.1,1.0,8,0.2,0.3,98,3,0.5",
        "em,0.9,0.1,1.0,16,0.1,0.2,98,3,1.0",
    ]
    assert lines[3] == "# order_end=1.0"
    assert lines[4] == "# order_max=nan"
    assert lines[7] == f"# config={report.config.hash}"

    buffer.seek(0)
    frame = pd.read_csv(buffer, comment="#")
    assert list(frame.columns) == CONVERGENCE_COLUMNS
    assert frame["N"].tolist() == [8, 16]
    assert frame["err_end"].tolist() == [0.2, 0.1]
    assert (frame["scheme"] == "em").all()


def test_convergence_table():
    """Convergence Summary."""
    text = _render(convergence_table(_error_report()))
    assert "em alpha=0.9 beta=0.1 r=1.0" in text
    assert "2.0000e-01" in text
    assert "order_end=1.0000" in text
    assert "order_max=-" in text


def test_bench():
    """Benchmark CSV and Summary."""
    report = BenchReport(rows=(BenchRow(N=128, em_s=0.25, fast_em_s=0.125),), paths=10)
    buffer = io.StringIO()
    write_bench_csv(report, buffer)
    assert buffer.getvalue() == "N,em_s,fast_em_s\n128,0.25,0.125\n# em_slope=nan\n# fast_em_slope=nan\n"
    assert "CPU time per path (10 paths)" in _render(bench_table(report))


def test_write_mesh():
    """Mesh Nodes."""
    buffer = io.StringIO()
    write_mesh(build_mesh(1.0, 3, 1), buffer)
    assert buffer.getvalue().splitlines() == ["0.0", "0.3333333333333333", "0.6666666666666666", "1.0"]
