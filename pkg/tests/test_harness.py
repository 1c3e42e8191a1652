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
"""Test Experiment Harness."""

import logging

import numpy as np
from pytest import approx, mark, raises

from sve.config import ExperimentConfig
from sve.consts import ORIGIN_STEPS, ORIGIN_WINDOW
from sve.exceptions import FailedPathsError, InvalidParameterError, NonFiniteStateError
from sve.harness import (
    ProbePair,
    _monte_carlo,
    bench_cpu,
    default_probe_pairs,
    fit_order,
    reference_scheme,
    regularity_probe,
    run_convergence,
    theoretical_orders,
)
from sve.problem import example41, linear


def test_fit_order():
    """Least Squares Fit."""
    assert fit_order([128, 256, 512], [0.4, 0.2, 0.1]) == approx(1.0)
    assert fit_order([128, 256], [0.3, 0.3]) == approx(0.0, abs=1e-12)
    errors = [6.68e-2, 5.76e-2, 5.02e-2, 4.38e-2]
    levels = [2**k for k in range(7, 11)]
    assert fit_order(levels, errors) == approx(0.2027, abs=2e-3)


def test_fit_order_invalid():
    """Degenerate Fits."""
    with raises(InvalidParameterError):
        fit_order([128], [0.1])
    with raises(InvalidParameterError):
        fit_order([128, 256], [0.1])
    with raises(InvalidParameterError):
        fit_order([128, 256], [0.1, 0.0])


@mark.parametrize(
    "scheme,alpha,beta,r,order_end,order_max",
    [
        ("em", 0.9, 0.1, 1.0, 0.4, 0.2),
        ("em", 0.9, 0.1, 2.0, 0.4, 0.4),
        ("fast_em", 0.9, 0.1, 1.0, 0.4, 0.2),
        ("em", 0.5, 0.0, 1.0, 0.5, 0.5),
        ("milstein", 0.9, 0.0, 1.0, 0.6, 0.2),
        ("milstein", 0.9, 0.0, 3.0, 0.6, 0.6),
    ],
)
def test_theoretical_orders(scheme, alpha, beta, r, order_end, order_max):
    """Predicted Orders."""
    theory = theoretical_orders(scheme, alpha, beta, r)
    assert theory.order_end == approx(order_end)
    assert theory.order_max == approx(order_max)


def test_theoretical_gradings():
    """Optimal Grading Exponents."""
    theory = theoretical_orders("milstein", 0.9, 0.0, 1.0)
    assert theory.r_milstein == approx(3.0)
    assert theory.r_em == approx(2.5)
    assert theoretical_orders("em", 0.3, 0.1, 1.0).r_em == 1.0


def test_reference_scheme():
    """Reference Scheme Selection."""
    assert reference_scheme("em", example41(0.5, 0.0)) == "em"
    assert reference_scheme("fast_em", example41(0.5, 0.1)) == "em"
    assert reference_scheme("milstein", example41(0.5, 0.0)) == "milstein"
    assert reference_scheme("milstein", example41(0.5, 0.1)) == "milstein"
    assert reference_scheme("milstein", linear(0.5, 0.1)) == "milstein"


def test_self_comparison():
    """Solution compared against itself has no error."""
    config = ExperimentConfig(alpha=0.9, beta=0.1, levels=(64,), n_ref=64, paths=20)
    report = run_convergence(config)
    assert len(report.rows) == 1
    assert report.rows[0].err_end == 0.0
    assert report.rows[0].err_max == 0.0
    assert report.order_end is None
    assert report.order_max is None


def test_convergence():
    """Errors decrease with the level."""
    config = ExperimentConfig(alpha=0.9, beta=0.1, levels=(8, 16, 32), n_ref=256, paths=100, chunk_size=30)
    report = run_convergence(config)
    assert report.reference == "em"
    assert report.failed_paths == 0
    assert [row.N for row in report.rows] == [8, 16, 32]
    for row in report.rows:
        assert row.err_max >= row.err_end > 0
        assert row.stderr_end > 0
        assert row.wall_s >= 0
    assert report.rows[0].err_max > report.rows[-1].err_max
    assert report.order_end > 0
    assert report.theory.order_end == approx(0.4)


def test_convergence_paths():
    """Doubling the paths moves the errors within the Monte Carlo standard error."""
    config = ExperimentConfig(alpha=0.7, beta=0.2, levels=(8, 16), n_ref=64, paths=200)
    small = run_convergence(config)
    large = run_convergence(config.new(paths=400))
    for lhs, rhs in zip(small.rows, large.rows, strict=True):
        assert abs(lhs.err_end - rhs.err_end) < 3 * lhs.stderr_end
        assert abs(lhs.err_max - rhs.err_max) < 3 * lhs.stderr_max


def test_determinism():
    """Results depend on the seed, not on the number of workers."""
    config = ExperimentConfig(alpha=0.7, beta=0.2, levels=(8, 16), n_ref=64, paths=50, chunk_size=7, maxworkers=1)
    first = run_convergence(config)
    second = run_convergence(config.new(maxworkers=3))
    assert [row.err_end for row in first.rows] == [row.err_end for row in second.rows]
    assert [row.err_max for row in first.rows] == [row.err_max for row in second.rows]
    third = run_convergence(config.new(seed=1))
    assert [row.err_end for row in first.rows] != [row.err_end for row in third.rows]


@mark.parametrize(
    "update",
    [
        {"scheme": "fast_em", "r": 2.0},
        {"scheme": "milstein", "beta": 0.0},
        {"scheme": "milstein", "mode": "subsampled", "k_inner": 2},
    ],
)
def test_schemes(update):
    """Convergence Experiment for all schemes."""
    config = ExperimentConfig(alpha=0.8, beta=0.1, levels=(8, 16), n_ref=64, paths=20)
    report = run_convergence(config.new(**update))
    assert len(report.rows) == 2
    assert all(row.err_max >= row.err_end for row in report.rows)


def test_subsampled_reference():
    """Subsampled Milstein rows are referenced by subsampled Milstein on the coarsened fine mesh."""
    config = ExperimentConfig(
        alpha=0.8, beta=0.2, levels=(4, 8), n_ref=64, paths=20, scheme="milstein", mode="subsampled", k_inner=4
    )
    report = run_convergence(config)
    assert report.reference == "milstein"
    for row in report.rows:
        assert np.isfinite([row.err_end, row.err_max]).all()
        assert row.err_max >= row.err_end > 0


def _deviations(failing):
    def func(indices):
        if set(indices) & failing:
            raise NonFiniteStateError(1, tuple(idx for idx in indices if idx in failing))
        devs = np.array([[float(idx % 3)] for idx in indices])
        return devs, np.array([1.0])

    return func


def test_monte_carlo():
    """Norms and Standard Errors."""
    norms, stderr, walls, failed = _monte_carlo(_deviations(set()), 300, 2.0, 100, 1)
    assert failed == 0
    assert norms[0] == approx(np.sqrt(5 / 3))
    assert stderr[0] > 0
    assert walls[0] == 3.0


def test_monte_carlo_failed_paths(caplog):
    """Few failing paths are excluded, many abort."""
    with caplog.at_level(logging.WARNING):
        norms, _, _, failed = _monte_carlo(_deviations({5}), 2000, 2.0, 100, 1)
    assert failed == 1
    assert "Excluded 1 of 2000 paths" in caplog.text
    assert np.isfinite(norms).all()

    with raises(FailedPathsError):
        _monte_carlo(_deviations({1, 2, 3}), 2000, 2.0, 100, 1)
    with raises(FailedPathsError):
        _monte_carlo(_deviations({0}), 1, 2.0, 100, 1)


def test_convergence_failed_paths():
    """Blow-up on every path aborts the experiment."""
    config = ExperimentConfig(
        preset="linear", coefs=(("A", 1e300), ("x0", 1e300)), alpha=0.5, beta=0.0, levels=(4,), n_ref=8, paths=5
    )
    with raises(FailedPathsError):
        run_convergence(config)


def test_default_probe_pairs():
    """Default Node Pairs."""
    pairs = default_probe_pairs(1024)
    interior = [pair for pair in pairs if pair.family == "interior"]
    origin = [pair for pair in pairs if pair.family == "origin"]
    assert len(interior) == 7
    assert len(origin) == 6
    assert all(pair.i == 512 for pair in interior)
    assert all(pair.j == 2 * pair.i for pair in origin)


def test_regularity_probe():
    """Moduli grow with the distance of the nodes."""
    problem = example41(0.9, 0.1)
    report = regularity_probe(problem, 256, 100)
    assert report.paths == 100
    assert report.n_ref == 256
    interior = [row for row in report.rows if row.family == "interior"]
    assert interior[0].s == 0.5
    assert interior[0].modulus < interior[-1].modulus
    assert report.interior_exponent > 0
    assert report.origin_exponent > 0


def test_regularity_origin_window():
    """Origin pairs resolve the short window next to zero, independent of the fine mesh."""
    problem = example41(0.9, 0.1)
    report = regularity_probe(problem, 64, 50)
    origin = [row for row in report.rows if row.family == "origin"]
    assert len(origin) == 6
    for row in origin:
        assert 0 < row.s <= ORIGIN_WINDOW
        assert row.t == approx(2 * row.s)
    assert origin[0].s == approx(4 * ORIGIN_WINDOW / ORIGIN_STEPS)
    assert [row.s for row in origin] == sorted(row.s for row in origin)


def test_regularity_probe_pairs():
    """Custom Node Pairs."""
    problem = linear(0.5, 0.0)
    report = regularity_probe(problem, 16, 10, pairs=[ProbePair(i=4, j=4), ProbePair(i=4, j=8)])
    assert report.rows[0].modulus == 0.0
    assert report.rows[1].modulus > 0.0
    assert report.interior_exponent is None
    with raises(InvalidParameterError):
        regularity_probe(problem, 16, 10, pairs=[ProbePair(i=0, j=4)])
    with raises(InvalidParameterError):
        regularity_probe(problem, 16, 10, pairs=[ProbePair(i=4, j=32)])
    with raises(InvalidParameterError):
        regularity_probe(problem, 16, 0)


def test_bench_cpu():
    """Timings per Level."""
    config = ExperimentConfig(alpha=0.9, beta=0.1, levels=(16, 32), n_ref=32, paths=4, r=2.0)
    report = bench_cpu(config, repeats=1)
    assert [row.N for row in report.rows] == [16, 32]
    assert all(row.em_s > 0 and row.fast_em_s > 0 for row in report.rows)
    assert report.em_slope is not None
    assert report.fast_em_slope is not None
    assert bench_cpu(config, levels=(16,), repeats=1).em_slope is None
    with raises(InvalidParameterError):
        bench_cpu(config, repeats=0)
